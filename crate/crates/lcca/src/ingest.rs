//! Raw survey CSV handling: merge household/person/trip files, apply a
//! declarative recode spec, normalize weights, and (de)serialize datasets.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{LccaError, Result};
use crate::model::{CategoricalVariable, Dataset};

/// A merged raw table: header names plus string-valued rows.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Indicator,
    Covariate,
}

/// What to do with a raw code no rule covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnmappedPolicy {
    /// Abort the recode. The default: silent drops hide survey-code drift.
    #[default]
    Error,
    /// Drop the row and count it.
    Drop,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RuleKind {
    /// Raw categorical codes -> target category labels.
    ValueMap {
        /// Target categories, in output order.
        categories: Vec<String>,
        /// Raw code -> target label. Integer-like keys are matched
        /// leading-zero-insensitively ("01" == "1").
        map: HashMap<String, String>,
        #[serde(default)]
        unmapped: UnmappedPolicy,
    },
    /// Right-closed numeric bins: value <= bounds[0] -> labels[0],
    /// bounds[0] < value <= bounds[1] -> labels[1], ..., open-ended last bin.
    NumericBin {
        bounds: Vec<f64>,
        labels: Vec<String>,
        /// Optional translation of coded raw values to numerics before
        /// binning (e.g. survey income brackets to midpoint dollars).
        /// Values absent from the map are parsed as numbers directly.
        #[serde(default)]
        code_map: HashMap<String, f64>,
        /// Values below this floor are treated as unmapped.
        #[serde(default)]
        valid_min: Option<f64>,
        #[serde(default)]
        unmapped: UnmappedPolicy,
    },
    /// Raw values are already the category labels.
    Passthrough {
        categories: Vec<String>,
        #[serde(default)]
        unmapped: UnmappedPolicy,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableRule {
    /// Output variable name.
    pub name: String,
    /// Raw column the rule reads.
    pub source: String,
    pub role: Role,
    pub rule: RuleKind,
    /// Reference category override; defaults to the first category.
    #[serde(default)]
    pub reference: Option<String>,
}

/// Row filter: keep rows where `column` equals `equals` (string compare on
/// trimmed values, leading-zero-insensitive for integer-like values).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Filter {
    pub column: String,
    pub equals: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightRule {
    pub column: String,
    pub target_mean: f64,
    #[serde(default)]
    pub integer_mode: bool,
}

/// Declarative mapping from raw survey columns to a coded analysis dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecodeSpec {
    pub variables: Vec<VariableRule>,
    pub weight: WeightRule,
    pub id_columns: Vec<String>,
    #[serde(default)]
    pub filters: Vec<Filter>,
    /// Raw values treated as missing in any used column.
    #[serde(default)]
    pub missing_values: Vec<String>,
}

impl RecodeSpec {
    pub fn from_json(json: &str) -> Result<Self> {
        let spec: RecodeSpec = serde_json::from_str(json)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variables.is_empty() {
            return Err(LccaError::InvalidSpec("no variables declared".into()));
        }
        if !self.variables.iter().any(|v| v.role == Role::Indicator) {
            return Err(LccaError::InvalidSpec("no indicator variables".into()));
        }
        if self.weight.target_mean <= 0.0 {
            return Err(LccaError::InvalidSpec("weight target_mean must be > 0".into()));
        }
        for v in &self.variables {
            match &v.rule {
                RuleKind::ValueMap { categories, map, .. } => {
                    for target in map.values() {
                        if !categories.contains(target) {
                            return Err(LccaError::InvalidSpec(format!(
                                "{}: map target {target:?} is not a declared category",
                                v.name
                            )));
                        }
                    }
                    Self::check_categories(&v.name, categories)?;
                }
                RuleKind::NumericBin { bounds, labels, .. } => {
                    if labels.len() != bounds.len() + 1 {
                        return Err(LccaError::InvalidSpec(format!(
                            "{}: {} bin labels for {} bounds (need bounds + 1)",
                            v.name,
                            labels.len(),
                            bounds.len()
                        )));
                    }
                    if bounds.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(LccaError::InvalidSpec(format!(
                            "{}: bin bounds must be strictly increasing",
                            v.name
                        )));
                    }
                    Self::check_categories(&v.name, labels)?;
                }
                RuleKind::Passthrough { categories, .. } => {
                    Self::check_categories(&v.name, categories)?;
                }
            }
            if let Some(r) = &v.reference {
                if !v.categories().contains(r) {
                    return Err(LccaError::InvalidSpec(format!(
                        "{}: reference {r:?} is not a declared category",
                        v.name
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_categories(name: &str, cats: &[String]) -> Result<()> {
        if cats.len() < 2 {
            return Err(LccaError::InvalidSpec(format!(
                "{name}: needs at least 2 categories"
            )));
        }
        let mut sorted = cats.to_vec();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != cats.len() {
            return Err(LccaError::InvalidSpec(format!("{name}: duplicate categories")));
        }
        Ok(())
    }
}

impl VariableRule {
    pub fn categories(&self) -> &[String] {
        match &self.rule {
            RuleKind::ValueMap { categories, .. } => categories,
            RuleKind::NumericBin { labels, .. } => labels,
            RuleKind::Passthrough { categories, .. } => categories,
        }
    }

    fn to_variable(&self) -> Result<CategoricalVariable> {
        let cats = self.categories().to_vec();
        let reference = match &self.reference {
            Some(r) => cats.iter().position(|c| c == r).unwrap_or(0),
            None => 0,
        };
        CategoricalVariable::with_reference(&self.name, cats, reference)
    }
}

/// Leading-zero-insensitive canonical form for survey codes: integer-like
/// strings collapse to their integer rendering, everything else is trimmed.
fn canonical_code(raw: &str) -> String {
    let t = raw.trim();
    if let Ok(v) = t.parse::<f64>() {
        if v.fract() == 0.0 && v.abs() < 1e15 {
            return format!("{}", v as i64);
        }
    }
    t.to_string()
}

fn read_csv(path: &Path) -> Result<RawTable> {
    if !path.exists() {
        return Err(LccaError::MissingFile(path.display().to_string()));
    }
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_path(path)?;
    let columns: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(|f| f.trim().to_string()).collect());
    }
    Ok(RawTable { columns, rows })
}

/// Join keys for merging the three survey files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JoinKeys {
    pub household: String,
    pub person: String,
}

impl Default for JoinKeys {
    fn default() -> Self {
        Self {
            household: "HOUSEID".into(),
            person: "PERSONID".into(),
        }
    }
}

/// Inner-join household, person, and trip files at the trip grain.
///
/// Household and person files must be unique on their keys; trips referencing
/// an absent household or person are excluded with a warning.
pub fn load_and_merge(
    household_file: &Path,
    person_file: &Path,
    trip_file: &Path,
    keys: &JoinKeys,
) -> Result<(RawTable, Vec<String>)> {
    let hh = read_csv(household_file)?;
    let pp = read_csv(person_file)?;
    let tt = read_csv(trip_file)?;

    let need = |table: &RawTable, file: &Path, col: &str| -> Result<usize> {
        table
            .column_index(col)
            .ok_or_else(|| LccaError::MissingColumn {
                file: file.display().to_string(),
                column: col.to_string(),
            })
    };

    let hh_key = need(&hh, household_file, &keys.household)?;
    let pp_hkey = need(&pp, person_file, &keys.household)?;
    let pp_pkey = need(&pp, person_file, &keys.person)?;
    let tt_hkey = need(&tt, trip_file, &keys.household)?;
    let tt_pkey = need(&tt, trip_file, &keys.person)?;

    let mut hh_index: HashMap<String, usize> = HashMap::new();
    for (i, row) in hh.rows.iter().enumerate() {
        let k = canonical_code(&row[hh_key]);
        if hh_index.insert(k.clone(), i).is_some() {
            return Err(LccaError::DuplicateKey {
                file: household_file.display().to_string(),
                key: k,
            });
        }
    }
    let mut pp_index: HashMap<(String, String), usize> = HashMap::new();
    for (i, row) in pp.rows.iter().enumerate() {
        let k = (
            canonical_code(&row[pp_hkey]),
            canonical_code(&row[pp_pkey]),
        );
        if pp_index.insert(k.clone(), i).is_some() {
            return Err(LccaError::DuplicateKey {
                file: person_file.display().to_string(),
                key: format!("{}/{}", k.0, k.1),
            });
        }
    }

    // output columns: all trip columns, then person and household columns
    // not already present
    let mut columns = tt.columns.clone();
    let mut pp_extra = Vec::new();
    for (j, c) in pp.columns.iter().enumerate() {
        if !columns.contains(c) {
            columns.push(c.clone());
            pp_extra.push(j);
        }
    }
    let mut hh_extra = Vec::new();
    for (j, c) in hh.columns.iter().enumerate() {
        if !columns.contains(c) {
            columns.push(c.clone());
            hh_extra.push(j);
        }
    }

    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut dropped = 0usize;
    for trip in &tt.rows {
        let hkey = canonical_code(&trip[tt_hkey]);
        let pkey = canonical_code(&trip[tt_pkey]);
        let (hh_row, pp_row) = match (
            hh_index.get(&hkey),
            pp_index.get(&(hkey.clone(), pkey.clone())),
        ) {
            (Some(&h), Some(&p)) => (&hh.rows[h], &pp.rows[p]),
            _ => {
                dropped += 1;
                continue;
            }
        };
        let mut out = trip.clone();
        for &j in &pp_extra {
            out.push(pp_row[j].clone());
        }
        for &j in &hh_extra {
            out.push(hh_row[j].clone());
        }
        rows.push(out);
    }
    if dropped > 0 {
        warnings.push(format!(
            "{dropped} trip rows referenced an absent household or person and were excluded"
        ));
    }
    Ok((RawTable { columns, rows }, warnings))
}

/// Row accounting for a recode run.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DropReport {
    pub input_rows: usize,
    pub filtered_out: usize,
    pub missing_dropped: usize,
    pub unmapped_dropped: usize,
    pub output_rows: usize,
    pub warnings: Vec<String>,
}

enum MapOutcome {
    Code(usize),
    Unmapped,
}

fn apply_rule(rule: &RuleKind, raw: &str) -> Result<MapOutcome> {
    match rule {
        RuleKind::ValueMap { categories, map, .. } => {
            let key = canonical_code(raw);
            // maps may be written with either padded or bare codes
            let target = map.get(raw.trim()).or_else(|| {
                map.iter()
                    .find(|(k, _)| canonical_code(k) == key)
                    .map(|(_, v)| v)
            });
            match target {
                Some(label) => Ok(MapOutcome::Code(
                    categories.iter().position(|c| c == label).unwrap(),
                )),
                None => Ok(MapOutcome::Unmapped),
            }
        }
        RuleKind::NumericBin {
            bounds,
            labels: _,
            code_map,
            valid_min,
            ..
        } => {
            let key = canonical_code(raw);
            let value = match code_map
                .get(raw.trim())
                .or_else(|| {
                    code_map
                        .iter()
                        .find(|(k, _)| canonical_code(k) == key)
                        .map(|(_, v)| v)
                }) {
                Some(&v) => v,
                None => match raw.trim().parse::<f64>() {
                    Ok(v) => v,
                    Err(_) => return Ok(MapOutcome::Unmapped),
                },
            };
            if let Some(floor) = valid_min {
                if value < *floor {
                    return Ok(MapOutcome::Unmapped);
                }
            }
            // right-closed bins: value <= bounds[b] lands in bin b
            let bin = bounds
                .iter()
                .position(|&b| value <= b)
                .unwrap_or(bounds.len());
            Ok(MapOutcome::Code(bin))
        }
        RuleKind::Passthrough { categories, .. } => {
            match categories.iter().position(|c| c == raw.trim()) {
                Some(i) => Ok(MapOutcome::Code(i)),
                None => Ok(MapOutcome::Unmapped),
            }
        }
    }
}

fn rule_policy(rule: &RuleKind) -> UnmappedPolicy {
    match rule {
        RuleKind::ValueMap { unmapped, .. } => *unmapped,
        RuleKind::NumericBin { unmapped, .. } => *unmapped,
        RuleKind::Passthrough { unmapped, .. } => *unmapped,
    }
}

/// Apply a recode spec to a merged raw table, producing a coded dataset plus
/// a drop report. Deterministic: row order follows the input.
pub fn recode(raw: &RawTable, spec: &RecodeSpec) -> Result<(Dataset, DropReport)> {
    spec.validate()?;
    let mut report = DropReport {
        input_rows: raw.rows.len(),
        ..Default::default()
    };

    let col =
        |name: &str| -> Result<usize> {
            raw.column_index(name).ok_or_else(|| LccaError::MissingColumn {
                file: "<merged table>".into(),
                column: name.to_string(),
            })
        };

    let filter_cols: Vec<(usize, String)> = spec
        .filters
        .iter()
        .map(|f| Ok((col(&f.column)?, canonical_code(&f.equals))))
        .collect::<Result<_>>()?;
    let var_cols: Vec<usize> = spec
        .variables
        .iter()
        .map(|v| col(&v.source))
        .collect::<Result<_>>()?;
    let weight_col = col(&spec.weight.column)?;
    let id_cols: Vec<usize> = spec
        .id_columns
        .iter()
        .map(|c| col(c))
        .collect::<Result<_>>()?;

    let missing: Vec<String> = spec.missing_values.iter().map(|m| canonical_code(m)).collect();
    let is_missing = |v: &str| -> bool {
        let c = canonical_code(v);
        c.is_empty() || missing.contains(&c)
    };

    let indicators: Vec<CategoricalVariable> = spec
        .variables
        .iter()
        .filter(|v| v.role == Role::Indicator)
        .map(|v| v.to_variable())
        .collect::<Result<_>>()?;
    let covariates: Vec<CategoricalVariable> = spec
        .variables
        .iter()
        .filter(|v| v.role == Role::Covariate)
        .map(|v| v.to_variable())
        .collect::<Result<_>>()?;

    let mut indicator_codes = Vec::new();
    let mut covariate_codes = Vec::new();
    let mut weights = Vec::new();
    let mut ids = Vec::new();

    'rows: for (row_idx, row) in raw.rows.iter().enumerate() {
        for (c, expect) in &filter_cols {
            if canonical_code(&row[*c]) != *expect {
                report.filtered_out += 1;
                continue 'rows;
            }
        }
        // missing check over every used column
        for &c in var_cols.iter().chain(std::iter::once(&weight_col)) {
            if is_missing(&row[c]) {
                report.missing_dropped += 1;
                continue 'rows;
            }
        }

        let mut ind_row = Vec::with_capacity(indicators.len());
        let mut cov_row = Vec::with_capacity(covariates.len());
        for (v, &c) in spec.variables.iter().zip(&var_cols) {
            match apply_rule(&v.rule, &row[c])? {
                MapOutcome::Code(code) => match v.role {
                    Role::Indicator => ind_row.push(code),
                    Role::Covariate => cov_row.push(code),
                },
                MapOutcome::Unmapped => match rule_policy(&v.rule) {
                    UnmappedPolicy::Error => {
                        return Err(LccaError::UnmappedCode {
                            column: v.source.clone(),
                            code: row[c].clone(),
                            row: row_idx,
                        })
                    }
                    UnmappedPolicy::Drop => {
                        report.unmapped_dropped += 1;
                        continue 'rows;
                    }
                },
            }
        }

        let w: f64 = row[weight_col].trim().parse().map_err(|_| {
            LccaError::Domain(format!(
                "row {row_idx}: weight {:?} is not numeric",
                row[weight_col]
            ))
        })?;
        if w < 0.0 {
            return Err(LccaError::Domain(format!("row {row_idx}: negative weight {w}")));
        }

        let id = id_cols
            .iter()
            .map(|&c| row[c].trim())
            .collect::<Vec<_>>()
            .join("-");

        indicator_codes.push(ind_row);
        covariate_codes.push(cov_row);
        weights.push(w);
        ids.push(id);
    }

    report.output_rows = indicator_codes.len();
    if indicator_codes.is_empty() {
        return Err(LccaError::EmptyResult(format!(
            "all {} rows were filtered or dropped",
            report.input_rows
        )));
    }

    let weights = normalize_weights(
        &weights,
        spec.weight.target_mean,
        spec.weight.integer_mode,
    )?;
    let data = Dataset::new(
        indicators,
        covariates,
        indicator_codes,
        covariate_codes,
        weights,
        ids,
    )?;
    Ok((data, report))
}

/// Rescale weights to the target mean. In integer mode the scaled weights are
/// rounded to the nearest integer and clamped to a floor of 1.
pub fn normalize_weights(weights: &[f64], target_mean: f64, integer_mode: bool) -> Result<Vec<f64>> {
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(LccaError::AllZeroWeights);
    }
    if target_mean <= 0.0 {
        return Err(LccaError::Domain("target mean must be positive".into()));
    }
    let mean: f64 = weights.iter().sum::<f64>() / weights.len() as f64;
    let factor = target_mean / mean;
    let scaled = weights.iter().map(|w| w * factor);
    Ok(if integer_mode {
        scaled.map(|w| w.round().max(1.0)).collect()
    } else {
        scaled.collect()
    })
}

/// Header half of the on-disk dataset format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub indicators: Vec<CategoricalVariable>,
    pub covariates: Vec<CategoricalVariable>,
    pub n_rows: usize,
}

/// Write a dataset as a JSON header plus a CSV body of coded values.
pub fn write_dataset(data: &Dataset, json_path: &Path, csv_path: &Path) -> Result<()> {
    let header = DatasetHeader {
        indicators: data.indicators.clone(),
        covariates: data.covariates.clone(),
        n_rows: data.n_rows(),
    };
    std::fs::write(json_path, serde_json::to_string_pretty(&header)?)?;

    let mut writer = csv::Writer::from_path(csv_path)?;
    let mut cols = vec!["id".to_string()];
    cols.extend(data.indicators.iter().map(|v| v.name.clone()));
    cols.extend(data.covariates.iter().map(|v| v.name.clone()));
    cols.push("weight".into());
    writer.write_record(&cols)?;
    for i in 0..data.n_rows() {
        let mut rec = vec![data.ids[i].clone()];
        rec.extend(data.indicator_codes[i].iter().map(|c| c.to_string()));
        rec.extend(data.covariate_codes[i].iter().map(|c| c.to_string()));
        rec.push(format!("{}", data.weights[i]));
        writer.write_record(&rec)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a dataset written by [`write_dataset`].
pub fn read_dataset(json_path: &Path, csv_path: &Path) -> Result<Dataset> {
    if !json_path.exists() {
        return Err(LccaError::MissingFile(json_path.display().to_string()));
    }
    let header: DatasetHeader = serde_json::from_str(&std::fs::read_to_string(json_path)?)?;
    let table = read_csv(csv_path)?;

    let l = header.indicators.len();
    let j = header.covariates.len();
    let expected_cols = 1 + l + j + 1;
    if table.columns.len() != expected_cols {
        return Err(LccaError::SchemaMismatch(format!(
            "dataset CSV has {} columns, header implies {expected_cols}",
            table.columns.len()
        )));
    }

    let mut indicator_codes = Vec::with_capacity(table.rows.len());
    let mut covariate_codes = Vec::with_capacity(table.rows.len());
    let mut weights = Vec::with_capacity(table.rows.len());
    let mut ids = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        ids.push(row[0].clone());
        let parse_code = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| LccaError::Domain(format!("row {i}: bad code {s:?}")))
        };
        indicator_codes.push(
            row[1..1 + l]
                .iter()
                .map(|s| parse_code(s))
                .collect::<Result<_>>()?,
        );
        covariate_codes.push(
            row[1 + l..1 + l + j]
                .iter()
                .map(|s| parse_code(s))
                .collect::<Result<_>>()?,
        );
        weights.push(
            row[1 + l + j]
                .parse()
                .map_err(|_| LccaError::Domain(format!("row {i}: bad weight")))?,
        );
    }
    Dataset::new(
        header.indicators,
        header.covariates,
        indicator_codes,
        covariate_codes,
        weights,
        ids,
    )
}

/// The bundled recode spec for NHTS 2022 column names, encoding the standard
/// mode/purpose/age/distance/race/education/density/income groupings.
pub fn default_nhts_spec() -> RecodeSpec {
    RecodeSpec::from_json(include_str!("../assets/nhts2022_recode.json"))
        .expect("bundled NHTS recode spec must be valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        p
    }

    #[test]
    fn merge_exact_match_join() {
        let dir = tempfile::tempdir().unwrap();
        let hh = write_file(dir.path(), "hh.csv", "HOUSEID,HHVEHCNT\n1,0\n2,3\n");
        let pp = write_file(
            dir.path(),
            "pp.csv",
            "HOUSEID,PERSONID,R_AGE\n1,1,34\n2,1,60\n",
        );
        let tt = write_file(
            dir.path(),
            "tt.csv",
            "HOUSEID,PERSONID,TRIPID,TRPMILES\n1,1,1,2.4\n2,1,1,8.0\n3,1,1,1.0\n",
        );
        let (table, warnings) =
            load_and_merge(&hh, &pp, &tt, &JoinKeys::default()).unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(warnings.len(), 1);
        // trip columns first, then person and household extras
        assert!(table.column_index("TRPMILES").is_some());
        assert!(table.column_index("R_AGE").is_some());
        assert!(table.column_index("HHVEHCNT").is_some());
    }

    #[test]
    fn merge_rejects_duplicate_household_key() {
        let dir = tempfile::tempdir().unwrap();
        let hh = write_file(dir.path(), "hh.csv", "HOUSEID,HHVEHCNT\n1,0\n1,2\n");
        let pp = write_file(dir.path(), "pp.csv", "HOUSEID,PERSONID\n1,1\n");
        let tt = write_file(dir.path(), "tt.csv", "HOUSEID,PERSONID,TRIPID\n1,1,1\n");
        let err = load_and_merge(&hh, &pp, &tt, &JoinKeys::default());
        assert!(matches!(err, Err(LccaError::DuplicateKey { .. })));
    }

    #[test]
    fn merge_reports_missing_column() {
        let dir = tempfile::tempdir().unwrap();
        let hh = write_file(dir.path(), "hh.csv", "HOUSEID\n1\n");
        let pp = write_file(dir.path(), "pp.csv", "HOUSEID\n1\n");
        let tt = write_file(dir.path(), "tt.csv", "HOUSEID,PERSONID\n1,1\n");
        let err = load_and_merge(&hh, &pp, &tt, &JoinKeys::default());
        assert!(matches!(err, Err(LccaError::MissingColumn { .. })));
    }

    fn toy_spec() -> RecodeSpec {
        serde_json::from_value(serde_json::json!({
            "variables": [
                {
                    "name": "mode_group",
                    "source": "MODE",
                    "role": "indicator",
                    "rule": {
                        "type": "value_map",
                        "categories": ["private_vehicle", "shared_mobility", "active_travel"],
                        "map": {"Car": "private_vehicle", "Bus": "shared_mobility", "Walk": "active_travel"}
                    }
                },
                {
                    "name": "distance",
                    "source": "MILES",
                    "role": "covariate",
                    "rule": {
                        "type": "numeric_bin",
                        "bounds": [1.0, 3.0, 10.0],
                        "labels": ["0-1", ">1-3", ">3-10", ">10"],
                        "valid_min": 0.0
                    }
                }
            ],
            "weight": {"column": "WT", "target_mean": 10.0},
            "id_columns": ["ID"],
            "filters": [{"column": "VEH", "equals": "0"}],
            "missing_values": ["", "-9"]
        }))
        .unwrap()
    }

    fn toy_table() -> RawTable {
        RawTable {
            columns: vec!["ID", "VEH", "MODE", "MILES", "WT"]
                .into_iter()
                .map(String::from)
                .collect(),
            rows: vec![
                vec!["a", "0", "Walk", "2.4", "1.0"],
                vec!["b", "0", "Car", "1.0", "2.0"],
                vec!["c", "1", "Bus", "5.0", "1.0"],
                vec!["d", "0", "Bus", "-9", "1.0"],
            ]
            .into_iter()
            .map(|r| r.into_iter().map(String::from).collect())
            .collect(),
        }
    }

    #[test]
    fn recode_maps_filters_and_drops_missing() {
        let (data, report) = recode(&toy_table(), &toy_spec()).unwrap();
        assert_eq!(report.input_rows, 4);
        assert_eq!(report.filtered_out, 1);
        assert_eq!(report.missing_dropped, 1);
        assert_eq!(data.n_rows(), 2);
        // Walk -> active_travel (index 2)
        assert_eq!(data.indicator_codes[0], vec![2]);
        // 2.4 mi -> ">1-3" (index 1); 1.0 mi is right-closed into "0-1"
        assert_eq!(data.covariate_codes[0], vec![1]);
        assert_eq!(data.covariate_codes[1], vec![0]);
        // weights {1, 2} normalized to mean 10
        assert_eq!(data.weights, vec![20.0 / 3.0, 40.0 / 3.0]);
    }

    #[test]
    fn recode_unmapped_is_error_by_default() {
        let mut table = toy_table();
        table.rows[0][2] = "Jetpack".into();
        let err = recode(&table, &toy_spec());
        assert!(matches!(err, Err(LccaError::UnmappedCode { .. })));
    }

    #[test]
    fn recode_empty_result_is_error() {
        let mut table = toy_table();
        for row in table.rows.iter_mut() {
            row[1] = "9".into();
        }
        assert!(matches!(
            recode(&table, &toy_spec()),
            Err(LccaError::EmptyResult(_))
        ));
    }

    #[test]
    fn recode_is_deterministic() {
        let (a, _) = recode(&toy_table(), &toy_spec()).unwrap();
        let (b, _) = recode(&toy_table(), &toy_spec()).unwrap();
        assert_eq!(a.indicator_codes, b.indicator_codes);
        assert_eq!(a.ids, b.ids);
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn normalize_weights_examples() {
        assert_eq!(
            normalize_weights(&[5.0, 10.0, 15.0], 10.0, false).unwrap(),
            vec![5.0, 10.0, 15.0]
        );
        assert_eq!(
            normalize_weights(&[1.0, 2.0, 3.0], 10.0, false).unwrap(),
            vec![5.0, 10.0, 15.0]
        );
        assert_eq!(
            normalize_weights(&[0.2, 0.3], 10.0, true).unwrap(),
            vec![8.0, 12.0]
        );
        assert!(matches!(
            normalize_weights(&[0.0, 0.0], 10.0, false),
            Err(LccaError::AllZeroWeights)
        ));
    }

    #[test]
    fn normalize_weights_integer_mode_clamps_to_one() {
        let out = normalize_weights(&[0.01, 10.0], 5.0, true).unwrap();
        assert!(out[0] >= 1.0);
    }

    #[test]
    fn normalize_preserves_ratios() {
        let w = [0.3, 1.7, 4.2, 0.9];
        let out = normalize_weights(&w, 10.0, false).unwrap();
        for i in 0..w.len() {
            for j in 0..w.len() {
                assert!((out[i] / out[j] - w[i] / w[j]).abs() < 1e-12);
            }
        }
        let mean: f64 = out.iter().sum::<f64>() / out.len() as f64;
        assert!((mean - 10.0).abs() < 1e-12);
    }

    #[test]
    fn dataset_round_trips_through_files() {
        let (data, _) = recode(&toy_table(), &toy_spec()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let json = dir.path().join("data.json");
        let csv = dir.path().join("data.csv");
        write_dataset(&data, &json, &csv).unwrap();
        let back = read_dataset(&json, &csv).unwrap();
        assert_eq!(back.indicator_codes, data.indicator_codes);
        assert_eq!(back.covariate_codes, data.covariate_codes);
        assert_eq!(back.weights, data.weights);
        assert_eq!(back.indicators, data.indicators);
    }

    #[test]
    fn bundled_nhts_spec_is_valid() {
        let spec = default_nhts_spec();
        assert!(spec.variables.iter().any(|v| v.name == "mode_group"));
        assert!(spec.variables.iter().any(|v| v.name == "trip_purpose"));
    }
}
