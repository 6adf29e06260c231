//! Reporting on fitted models: hard assignments, conditional-probability
//! tables, weighted crosstabs, and the post-hoc membership logit.

use serde::{Deserialize, Serialize};

use crate::error::{LccaError, Result};
use crate::estimate::{fit_weighted_logit, EmConfig, LogitConfig};
use crate::math::normal_two_sided_p;
use crate::model::{CategoricalVariable, Dataset, LatentClassModel};

/// Hard class assignment: argmax per posterior row, ties toward the lowest
/// class index.
pub fn assign_classes(posteriors: &[Vec<f64>]) -> Vec<usize> {
    posteriors
        .iter()
        .map(|row| {
            let mut best = 0;
            for (k, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Weighted share of each class among hard-assigned observations.
pub fn weighted_class_shares(labels: &[usize], weights: &[f64], k: usize) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut shares = vec![0.0; k];
    for (&label, &w) in labels.iter().zip(weights) {
        shares[label] += w;
    }
    for s in shares.iter_mut() {
        *s /= total;
    }
    shares
}

/// Model-estimated conditional probabilities of the indicators by class: a
/// pure projection of the measurement tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionalProbTable {
    pub indicators: Vec<CategoricalVariable>,
    /// K x L x M_l, as in the measurement parameters.
    pub probs: Vec<Vec<Vec<f64>>>,
}

pub fn conditional_prob_table(model: &LatentClassModel) -> ConditionalProbTable {
    ConditionalProbTable {
        indicators: model.indicators.clone(),
        probs: model.measurement.probs.clone(),
    }
}

impl ConditionalProbTable {
    pub fn to_csv(&self) -> String {
        let k = self.probs.len();
        let mut out = String::from("Indicator,Category");
        for c in 1..=k {
            out.push_str(&format!(",Class {c}"));
        }
        out.push('\n');
        for (l, var) in self.indicators.iter().enumerate() {
            for (m, cat) in var.categories.iter().enumerate() {
                out.push_str(&format!("{},{}", var.name, cat));
                for c in 0..k {
                    out.push_str(&format!(",{:.4}", self.probs[c][l][m]));
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let k = self.probs.len();
        let mut out = String::from("| Indicator | Category |");
        for c in 1..=k {
            out.push_str(&format!(" Class {c} |"));
        }
        out.push('\n');
        out.push_str(&format!("|---|---|{}", "---|".repeat(k)));
        out.push('\n');
        for (l, var) in self.indicators.iter().enumerate() {
            for (m, cat) in var.categories.iter().enumerate() {
                out.push_str(&format!("| {} | {} |", var.name, cat));
                for c in 0..k {
                    out.push_str(&format!(" {:.4} |", self.probs[c][l][m]));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Weighted percentage breakdown of one variable by class, plus a
/// whole-sample column. Columns sum to 100.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Crosstab {
    pub variable: String,
    pub categories: Vec<String>,
    /// K x M percentages.
    pub class_pct: Vec<Vec<f64>>,
    pub total_pct: Vec<f64>,
}

fn variable_codes<'a>(
    data: &'a Dataset,
    name: &str,
) -> Option<(&'a CategoricalVariable, Box<dyn Fn(usize) -> usize + 'a>)> {
    if let Some(l) = data.indicators.iter().position(|v| v.name == name) {
        return Some((
            &data.indicators[l],
            Box::new(move |i| data.indicator_codes[i][l]),
        ));
    }
    if let Some(j) = data.covariates.iter().position(|v| v.name == name) {
        return Some((
            &data.covariates[j],
            Box::new(move |i| data.covariate_codes[i][j]),
        ));
    }
    None
}

/// Weighted per-class category percentages for the named variables.
pub fn weighted_profile(
    data: &Dataset,
    labels: &[usize],
    variables: &[String],
) -> Result<Vec<Crosstab>> {
    let k = labels.iter().max().map(|m| m + 1).unwrap_or(1);
    let mut class_weight = vec![0.0; k];
    for (&label, &w) in labels.iter().zip(&data.weights) {
        class_weight[label] += w;
    }
    let total_weight = data.total_weight();

    let mut tables = Vec::with_capacity(variables.len());
    for name in variables {
        let (var, codes) = variable_codes(data, name)
            .ok_or_else(|| LccaError::UnknownVariable(name.clone()))?;
        let m = var.n_categories();
        let mut class_mass = vec![vec![0.0; m]; k];
        let mut total_mass = vec![0.0; m];
        for i in 0..data.n_rows() {
            let c = codes(i);
            class_mass[labels[i]][c] += data.weights[i];
            total_mass[c] += data.weights[i];
        }
        let class_pct = class_mass
            .iter()
            .zip(&class_weight)
            .map(|(mass, &cw)| {
                mass.iter()
                    .map(|&v| if cw > 0.0 { 100.0 * v / cw } else { 0.0 })
                    .collect()
            })
            .collect();
        let total_pct = total_mass.iter().map(|&v| 100.0 * v / total_weight).collect();
        tables.push(Crosstab {
            variable: var.name.clone(),
            categories: var.categories.clone(),
            class_pct,
            total_pct,
        });
    }
    Ok(tables)
}

pub fn crosstabs_to_csv(tables: &[Crosstab]) -> String {
    let k = tables.first().map(|t| t.class_pct.len()).unwrap_or(0);
    let mut out = String::from("Variable,Category");
    for c in 1..=k {
        out.push_str(&format!(",Class {c}"));
    }
    out.push_str(",Sample\n");
    for t in tables {
        for (m, cat) in t.categories.iter().enumerate() {
            out.push_str(&format!("{},{}", t.variable, cat));
            for c in 0..k {
                out.push_str(&format!(",{:.2}", t.class_pct[c][m]));
            }
            out.push_str(&format!(",{:.2}\n", t.total_pct[m]));
        }
    }
    out
}

pub fn crosstabs_to_markdown(tables: &[Crosstab]) -> String {
    let k = tables.first().map(|t| t.class_pct.len()).unwrap_or(0);
    let mut out = String::from("| Variable | Category |");
    for c in 1..=k {
        out.push_str(&format!(" Class {c} |"));
    }
    out.push_str(" Sample |\n");
    out.push_str(&format!("|---|---|{}", "---|".repeat(k + 1)));
    out.push('\n');
    for t in tables {
        for (m, cat) in t.categories.iter().enumerate() {
            out.push_str(&format!("| {} | {} |", t.variable, cat));
            for c in 0..k {
                out.push_str(&format!(" {:.2} |", t.class_pct[c][m]));
            }
            out.push_str(&format!(" {:.2} |\n", t.total_pct[m]));
        }
    }
    out
}

/// One coefficient of the post-hoc membership logit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefEntry {
    pub variable: String,
    pub category: String,
    pub coef: f64,
    pub std_err: f64,
    pub z: f64,
    pub p: f64,
    /// Significance stars: * 10%, ** 5%, *** 1%.
    pub stars: String,
}

/// Post-hoc membership logit coefficients, one block per non-reference class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipCoefs {
    /// K class blocks; block 0 (the reference) is empty.
    pub classes: Vec<Vec<CoefEntry>>,
    pub separation_flag: bool,
    /// Set when the information matrix was near-singular and a ridge was
    /// added before inversion.
    pub ridge_fallback: bool,
}

fn stars_for(p: f64) -> String {
    if p < 0.01 {
        "***".into()
    } else if p < 0.05 {
        "**".into()
    } else if p < 0.10 {
        "*".into()
    } else {
        String::new()
    }
}

/// Fit a weighted multinomial logit of hard class labels on the dataset's
/// dummy-encoded covariates, with Wald z and normal p-values from the
/// inverse observed information.
pub fn post_hoc_membership_logit(
    labels: &[usize],
    data: &Dataset,
    config: &EmConfig,
) -> Result<MembershipCoefs> {
    let k = labels.iter().max().map(|m| m + 1).unwrap_or(1);
    if k < 2 {
        return Err(LccaError::InvalidDimension(
            "post-hoc logit needs at least 2 classes".into(),
        ));
    }
    let targets: Vec<Vec<f64>> = labels
        .iter()
        .map(|&label| {
            let mut t = vec![0.0; k];
            t[label] = 1.0;
            t
        })
        .collect();
    membership_logit_from_targets(&targets, data, config)
}

/// Posterior-weighted variant of the post-hoc logit (soft targets instead of
/// hard labels). Off the default reporting path.
pub fn post_hoc_membership_logit_soft(
    posteriors: &[Vec<f64>],
    data: &Dataset,
    config: &EmConfig,
) -> Result<MembershipCoefs> {
    membership_logit_from_targets(posteriors, data, config)
}

fn membership_logit_from_targets(
    targets: &[Vec<f64>],
    data: &Dataset,
    config: &EmConfig,
) -> Result<MembershipCoefs> {
    let k = targets[0].len();
    let design: Vec<Vec<f64>> = (0..data.n_rows()).map(|i| data.design_row(i)).collect();
    let logit_cfg = LogitConfig::from(config);
    let fit = fit_weighted_logit(targets, &design, &data.weights, &logit_cfg)?;

    let d = design[0].len();
    let free = (k - 1) * d;

    // covariance of the free coefficients from the observed information;
    // near-singular information gets a ridge before inversion
    let mut info = fit.observed_information.clone();
    let mut ridge_fallback = false;
    let cov = loop {
        match info.clone().cholesky() {
            Some(chol) => break chol.inverse(),
            None => {
                ridge_fallback = true;
                for j in 0..free {
                    info[(j, j)] += 1e-6 * (1.0 + info[(j, j)].abs());
                }
            }
        }
    };

    let mut names = vec![("(Intercept)".to_string(), String::new())];
    names.extend(data.dummy_labels());

    let mut classes = vec![Vec::new(); k];
    for c in 1..k {
        let mut entries = Vec::with_capacity(d);
        for j in 0..d {
            let idx = (c - 1) * d + j;
            let coef = fit.params.gamma[c][j];
            let var = cov[(idx, idx)].max(0.0);
            let std_err = var.sqrt();
            let z = if std_err > 0.0 { coef / std_err } else { f64::NAN };
            let p = if z.is_finite() { normal_two_sided_p(z) } else { f64::NAN };
            entries.push(CoefEntry {
                variable: names[j].0.clone(),
                category: names[j].1.clone(),
                coef,
                std_err,
                z,
                p,
                stars: if p.is_finite() { stars_for(p) } else { String::new() },
            });
        }
        classes[c] = entries;
    }

    Ok(MembershipCoefs {
        classes,
        separation_flag: fit.separation_flag,
        ridge_fallback,
    })
}

pub fn membership_coefs_to_csv(coefs: &MembershipCoefs) -> String {
    let mut out = String::from("Class,Variable,Category,Coefficient,StdErr,Z,P,Signif\n");
    for (c, entries) in coefs.classes.iter().enumerate() {
        for e in entries {
            out.push_str(&format!(
                "{},{},{},{:.4},{:.4},{:.4},{:.4e},{}\n",
                c + 1,
                e.variable,
                e.category,
                e.coef,
                e.std_err,
                e.z,
                e.p,
                e.stars
            ));
        }
    }
    out
}

pub fn membership_coefs_to_markdown(coefs: &MembershipCoefs) -> String {
    let mut out =
        String::from("| Class | Variable | Category | Coefficient | z-value | Signif. |\n|---|---|---|---|---|---|\n");
    for (c, entries) in coefs.classes.iter().enumerate() {
        for e in entries {
            out.push_str(&format!(
                "| {} | {} | {} | {:.4} | {:.4} | {} |\n",
                c + 1,
                e.variable,
                e.category,
                e.coef,
                e.z,
                e.stars
            ));
        }
    }
    out
}

/// The full profiling bundle for one fitted model on one dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileReport {
    pub class_shares: Vec<f64>,
    pub conditional_probs: ConditionalProbTable,
    pub crosstabs: Vec<Crosstab>,
    pub membership_coefs: Option<MembershipCoefs>,
    pub labels: Vec<usize>,
}

/// Assemble the full report: hard assignment, weighted shares, conditional
/// probabilities, crosstabs over every variable, and (for K >= 2 with
/// covariates) the post-hoc membership logit.
pub fn build_report(
    model: &LatentClassModel,
    data: &Dataset,
    config: &EmConfig,
) -> Result<ProfileReport> {
    let posteriors = crate::estimate::e_step(model, data)?;
    let labels = assign_classes(&posteriors);
    let class_shares = weighted_class_shares(&labels, &data.weights, model.k);
    let conditional_probs = conditional_prob_table(model);
    let variables: Vec<String> = data
        .indicators
        .iter()
        .chain(&data.covariates)
        .map(|v| v.name.clone())
        .collect();
    let crosstabs = weighted_profile(data, &labels, &variables)?;
    let membership_coefs = if model.k >= 2 && !data.covariates.is_empty() {
        Some(post_hoc_membership_logit(&labels, data, config)?)
    } else {
        None
    };
    Ok(ProfileReport {
        class_shares,
        conditional_probs,
        crosstabs,
        membership_coefs,
        labels,
    })
}
