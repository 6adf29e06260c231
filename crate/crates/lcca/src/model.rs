//! Core domain types: variables, datasets, model parameters, fit results.

use serde::{Deserialize, Serialize};

use crate::error::{LccaError, Result};
use crate::math::softmax;

/// A categorical variable: ordered category labels plus the reference
/// category used for identification in logit parameterizations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalVariable {
    pub name: String,
    pub categories: Vec<String>,
    pub reference_index: usize,
}

impl CategoricalVariable {
    pub fn new(name: impl Into<String>, categories: Vec<String>) -> Result<Self> {
        Self::with_reference(name, categories, 0)
    }

    pub fn with_reference(
        name: impl Into<String>,
        categories: Vec<String>,
        reference_index: usize,
    ) -> Result<Self> {
        let name = name.into();
        if categories.len() < 2 {
            return Err(LccaError::InvalidDimension(format!(
                "variable {name} needs at least 2 categories, got {}",
                categories.len()
            )));
        }
        for (i, c) in categories.iter().enumerate() {
            if c.is_empty() {
                return Err(LccaError::InvalidSpec(format!(
                    "variable {name}: empty category label at index {i}"
                )));
            }
        }
        let mut sorted = categories.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != categories.len() {
            return Err(LccaError::InvalidSpec(format!(
                "variable {name}: duplicate category labels"
            )));
        }
        if reference_index >= categories.len() {
            return Err(LccaError::InvalidDimension(format!(
                "variable {name}: reference index {reference_index} out of range"
            )));
        }
        Ok(Self {
            name,
            categories,
            reference_index,
        })
    }

    pub fn n_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn category_index(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }
}

/// Coded observations: N rows over L categorical indicators and J categorical
/// covariates, with per-row survey weights and opaque ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub indicators: Vec<CategoricalVariable>,
    pub covariates: Vec<CategoricalVariable>,
    /// N x L category indices.
    pub indicator_codes: Vec<Vec<usize>>,
    /// N x J category indices.
    pub covariate_codes: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    pub ids: Vec<String>,
}

impl Dataset {
    pub fn new(
        indicators: Vec<CategoricalVariable>,
        covariates: Vec<CategoricalVariable>,
        indicator_codes: Vec<Vec<usize>>,
        covariate_codes: Vec<Vec<usize>>,
        weights: Vec<f64>,
        ids: Vec<String>,
    ) -> Result<Self> {
        let n = indicator_codes.len();
        if covariate_codes.len() != n || weights.len() != n || ids.len() != n {
            return Err(LccaError::InvalidDimension(format!(
                "inconsistent row counts: {} indicator rows, {} covariate rows, {} weights, {} ids",
                n,
                covariate_codes.len(),
                weights.len(),
                ids.len()
            )));
        }
        if n == 0 {
            return Err(LccaError::EmptyResult("dataset has no rows".into()));
        }
        for (i, row) in indicator_codes.iter().enumerate() {
            if row.len() != indicators.len() {
                return Err(LccaError::InvalidDimension(format!(
                    "row {i}: expected {} indicator codes, got {}",
                    indicators.len(),
                    row.len()
                )));
            }
            for (l, (&code, var)) in row.iter().zip(&indicators).enumerate() {
                if code >= var.n_categories() {
                    return Err(LccaError::InvalidDimension(format!(
                        "row {i}, indicator {l} ({}): code {code} out of range",
                        var.name
                    )));
                }
            }
        }
        for (i, row) in covariate_codes.iter().enumerate() {
            if row.len() != covariates.len() {
                return Err(LccaError::InvalidDimension(format!(
                    "row {i}: expected {} covariate codes, got {}",
                    covariates.len(),
                    row.len()
                )));
            }
            for (j, (&code, var)) in row.iter().zip(&covariates).enumerate() {
                if code >= var.n_categories() {
                    return Err(LccaError::InvalidDimension(format!(
                        "row {i}, covariate {j} ({}): code {code} out of range",
                        var.name
                    )));
                }
            }
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(LccaError::Domain("weights must be nonnegative".into()));
        }
        if !weights.iter().any(|&w| w > 0.0) {
            return Err(LccaError::AllZeroWeights);
        }
        Ok(Self {
            indicators,
            covariates,
            indicator_codes,
            covariate_codes,
            weights,
            ids,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.indicator_codes.len()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Number of dummy columns from dummy-encoding the covariates
    /// (one reference column dropped per covariate).
    pub fn covariate_dummy_count(&self) -> usize {
        self.covariates.iter().map(|v| v.n_categories() - 1).sum()
    }

    /// Design row for the membership logit: intercept followed by 0/1
    /// dummies for every non-reference category of every covariate.
    pub fn design_row(&self, i: usize) -> Vec<f64> {
        let mut x = Vec::with_capacity(1 + self.covariate_dummy_count());
        x.push(1.0);
        for (j, var) in self.covariates.iter().enumerate() {
            let code = self.covariate_codes[i][j];
            for m in 0..var.n_categories() {
                if m == var.reference_index {
                    continue;
                }
                x.push(if code == m { 1.0 } else { 0.0 });
            }
        }
        x
    }

    /// Labels for the design columns produced by [`Dataset::design_row`],
    /// excluding the intercept.
    pub fn dummy_labels(&self) -> Vec<(String, String)> {
        let mut labels = Vec::new();
        for var in &self.covariates {
            for (m, cat) in var.categories.iter().enumerate() {
                if m != var.reference_index {
                    labels.push((var.name.clone(), cat.clone()));
                }
            }
        }
        labels
    }
}

/// Class-conditional indicator distributions: `probs[k][l][m]` is
/// P(indicator l takes category m | class k).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementParams {
    pub probs: Vec<Vec<Vec<f64>>>,
}

impl MeasurementParams {
    pub fn validate(&self, indicators: &[CategoricalVariable]) -> Result<()> {
        for (k, class) in self.probs.iter().enumerate() {
            if class.len() != indicators.len() {
                return Err(LccaError::InvalidDimension(format!(
                    "class {k}: expected {} indicator tables, got {}",
                    indicators.len(),
                    class.len()
                )));
            }
            for (l, (p, var)) in class.iter().zip(indicators).enumerate() {
                if p.len() != var.n_categories() {
                    return Err(LccaError::InvalidDimension(format!(
                        "class {k}, indicator {l}: expected {} probabilities, got {}",
                        var.n_categories(),
                        p.len()
                    )));
                }
                if p.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                    return Err(LccaError::Domain(format!(
                        "class {k}, indicator {l}: probability outside [0, 1]"
                    )));
                }
                let sum: f64 = p.iter().sum();
                if (sum - 1.0).abs() > 1e-10 {
                    return Err(LccaError::Domain(format!(
                        "class {k}, indicator {l}: probabilities sum to {sum}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_classes(&self) -> usize {
        self.probs.len()
    }
}

/// Membership-logit coefficients: K x (1 + J_d), row 0 pinned to zero as the
/// reference class, column 0 the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipParams {
    pub gamma: Vec<Vec<f64>>,
}

impl MembershipParams {
    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_empty() {
            return Err(LccaError::InvalidDimension("empty gamma".into()));
        }
        let d = self.gamma[0].len();
        for (k, row) in self.gamma.iter().enumerate() {
            if row.len() != d {
                return Err(LccaError::InvalidDimension(format!(
                    "gamma row {k} has length {}, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(LccaError::Domain(format!("gamma row {k} not finite")));
            }
        }
        if self.gamma[0].iter().any(|&v| v != 0.0) {
            return Err(LccaError::Domain(
                "gamma reference row (class 0) must be identically zero".into(),
            ));
        }
        Ok(())
    }

    /// Class probabilities for one design row.
    pub fn class_probs(&self, x: &[f64]) -> Vec<f64> {
        let eta: Vec<f64> = self
            .gamma
            .iter()
            .map(|row| row.iter().zip(x).map(|(g, xv)| g * xv).sum())
            .collect();
        softmax(&eta)
    }
}

/// The class-prior component of a model: either a constant prior vector
/// (indicator-only stage) or a covariate-driven membership logit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Membership {
    ConstantPrior { priors: Vec<f64> },
    Covariate { params: MembershipParams },
}

/// A latent class model: K classes, measurement tables, and a membership
/// component. `covariate_schema` records the covariate layout the membership
/// logit expects (empty for constant-prior models).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentClassModel {
    pub k: usize,
    pub indicators: Vec<CategoricalVariable>,
    pub measurement: MeasurementParams,
    pub membership: Membership,
    pub covariate_schema: Vec<CategoricalVariable>,
}

impl LatentClassModel {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(LccaError::InvalidDimension("k must be >= 1".into()));
        }
        if self.measurement.n_classes() != self.k {
            return Err(LccaError::InvalidDimension(format!(
                "measurement has {} classes, model k = {}",
                self.measurement.n_classes(),
                self.k
            )));
        }
        self.measurement.validate(&self.indicators)?;
        match &self.membership {
            Membership::ConstantPrior { priors } => {
                if priors.len() != self.k {
                    return Err(LccaError::InvalidDimension(format!(
                        "{} priors for k = {}",
                        priors.len(),
                        self.k
                    )));
                }
                let sum: f64 = priors.iter().sum();
                if (sum - 1.0).abs() > 1e-10 {
                    return Err(LccaError::Domain(format!("priors sum to {sum}")));
                }
                if !self.covariate_schema.is_empty() {
                    return Err(LccaError::SchemaMismatch(
                        "constant-prior model must have an empty covariate schema".into(),
                    ));
                }
            }
            Membership::Covariate { params } => {
                params.validate()?;
                if params.gamma.len() != self.k {
                    return Err(LccaError::InvalidDimension(format!(
                        "{} gamma rows for k = {}",
                        params.gamma.len(),
                        self.k
                    )));
                }
                let expected = 1 + self
                    .covariate_schema
                    .iter()
                    .map(|v| v.n_categories() - 1)
                    .sum::<usize>();
                if params.gamma[0].len() != expected {
                    return Err(LccaError::SchemaMismatch(format!(
                        "gamma has {} columns, covariate schema implies {expected}",
                        params.gamma[0].len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Prior class probabilities for row `i` of `data`.
    pub fn prior_for_row(&self, data: &Dataset, i: usize) -> Vec<f64> {
        match &self.membership {
            Membership::ConstantPrior { priors } => priors.clone(),
            Membership::Covariate { params } => params.class_probs(&data.design_row(i)),
        }
    }
}

/// Which membership parameterization a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipKind {
    ConstantPrior,
    Covariate,
}

/// Free-parameter count for a model with the given indicator category sizes.
///
/// Measurement contributes `k * sum(M_l - 1)`; mixing contributes `k - 1`
/// constant priors or `(k - 1) * (1 + J_d)` logit coefficients.
pub fn n_params(
    k: usize,
    indicator_cats: &[usize],
    covariate_dummy_count: usize,
    membership: MembershipKind,
) -> Result<usize> {
    if k == 0 {
        return Err(LccaError::InvalidDimension("k must be >= 1".into()));
    }
    if let Some(&m) = indicator_cats.iter().find(|&&m| m < 2) {
        return Err(LccaError::InvalidDimension(format!(
            "indicator with {m} categories (need >= 2)"
        )));
    }
    let measurement: usize = indicator_cats.iter().map(|m| m - 1).sum::<usize>() * k;
    let mixing = match membership {
        MembershipKind::ConstantPrior => k - 1,
        MembershipKind::Covariate => (k - 1) * (1 + covariate_dummy_count),
    };
    Ok(measurement + mixing)
}

/// AIC and BIC from a log-likelihood, parameter count, and BIC sample size.
pub fn information_criteria(loglik: f64, n_params: usize, bic_sample_size: f64) -> Result<(f64, f64)> {
    if !(bic_sample_size > 1.0) {
        return Err(LccaError::Domain(format!(
            "BIC sample size must exceed 1, got {bic_sample_size}"
        )));
    }
    let p = n_params as f64;
    Ok((2.0 * p - 2.0 * loglik, p * bic_sample_size.ln() - 2.0 * loglik))
}

/// A converged estimation result for one (data, k, mode) combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub model: LatentClassModel,
    pub loglik: f64,
    pub n_params: usize,
    pub aic: f64,
    pub bic: f64,
    pub bic_sample_size: f64,
    /// N x K posterior class probabilities.
    pub posteriors: Vec<Vec<f64>>,
    /// Weighted expected class shares, summing to 1.
    pub class_shares: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub restart_index: usize,
    pub seed: u64,
    /// Set when the membership logit hit its iteration cap or a divergence
    /// bound (quasi-separation).
    pub separation_flag: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str, cats: &[&str]) -> CategoricalVariable {
        CategoricalVariable::new(name, cats.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn variable_rejects_duplicates_and_bad_reference() {
        assert!(CategoricalVariable::new("x", vec!["a".into(), "a".into()]).is_err());
        assert!(CategoricalVariable::new("x", vec!["a".into()]).is_err());
        assert!(
            CategoricalVariable::with_reference("x", vec!["a".into(), "b".into()], 2).is_err()
        );
        assert!(CategoricalVariable::new("x", vec!["a".into(), "".into()]).is_err());
    }

    #[test]
    fn dataset_rejects_out_of_range_codes() {
        let ind = vec![var("mode", &["pv", "sm", "at"])];
        let err = Dataset::new(
            ind,
            vec![],
            vec![vec![3]],
            vec![vec![]],
            vec![1.0],
            vec!["r0".into()],
        );
        assert!(err.is_err());
    }

    #[test]
    fn dataset_rejects_all_zero_weights() {
        let ind = vec![var("mode", &["pv", "sm", "at"])];
        let err = Dataset::new(
            ind,
            vec![],
            vec![vec![0]],
            vec![vec![]],
            vec![0.0],
            vec!["r0".into()],
        );
        assert!(matches!(err, Err(LccaError::AllZeroWeights)));
    }

    #[test]
    fn design_row_drops_reference_column() {
        let cov = CategoricalVariable::with_reference(
            "inc",
            vec!["low".into(), "mid".into(), "high".into()],
            0,
        )
        .unwrap();
        let data = Dataset::new(
            vec![var("mode", &["pv", "sm"])],
            vec![cov],
            vec![vec![0], vec![1]],
            vec![vec![0], vec![2]],
            vec![1.0, 1.0],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert_eq!(data.design_row(0), vec![1.0, 0.0, 0.0]);
        assert_eq!(data.design_row(1), vec![1.0, 0.0, 1.0]);
        assert_eq!(data.covariate_dummy_count(), 2);
    }

    // Table-style parameter counts: K classes over indicators with 3 and 5
    // categories, constant priors.
    #[test]
    fn n_params_table_values() {
        for (k, expected) in [(1usize, 6usize), (2, 13), (3, 20), (4, 27), (5, 34), (6, 41)] {
            assert_eq!(
                n_params(k, &[3, 5], 0, MembershipKind::ConstantPrior).unwrap(),
                expected
            );
        }
    }

    #[test]
    fn n_params_covariate_mode() {
        // one class: no mixing params regardless of covariates
        assert_eq!(n_params(1, &[2], 4, MembershipKind::Covariate).unwrap(), 1);
        assert_eq!(
            n_params(3, &[3, 5], 4, MembershipKind::Covariate).unwrap(),
            3 * 6 + 2 * 5
        );
    }

    #[test]
    fn n_params_monotone_in_k() {
        let mut prev = 0;
        for k in 1..=8 {
            let p = n_params(k, &[3, 5], 2, MembershipKind::Covariate).unwrap();
            assert!(p > prev);
            prev = p;
        }
    }

    #[test]
    fn n_params_rejects_degenerate_indicator() {
        assert!(n_params(2, &[3, 1], 0, MembershipKind::ConstantPrior).is_err());
    }

    #[test]
    fn information_criteria_identities() {
        let (aic, bic) = information_criteria(-20607.7, 20, 7950.0).unwrap();
        assert!((aic - 41255.4).abs() < 1e-9);
        assert_eq!(aic, 2.0 * 20.0 - 2.0 * (-20607.7));
        assert_eq!(bic, 20.0 * 7950.0f64.ln() - 2.0 * (-20607.7));

        let (aic, _bic) = information_criteria(-20669.1, 13, 7950.0).unwrap();
        assert!((aic - 41364.2).abs() < 1e-9);

        let (aic, bic) = information_criteria(0.0, 0, 100.0).unwrap();
        assert_eq!((aic, bic), (0.0, 0.0));
    }

    #[test]
    fn information_criteria_rejects_small_n() {
        assert!(information_criteria(-1.0, 2, 1.0).is_err());
        assert!(information_criteria(-1.0, 2, 0.5).is_err());
    }

    #[test]
    fn aic_below_bic_when_n_exceeds_e_squared() {
        let n = (std::f64::consts::E * std::f64::consts::E) * 1.01;
        let (aic, bic) = information_criteria(-50.0, 3, n).unwrap();
        assert!(aic < bic);
    }

    #[test]
    fn membership_probs_sum_to_one() {
        let params = MembershipParams {
            gamma: vec![vec![0.0, 0.0], vec![1.5, -0.7], vec![-2.0, 0.3]],
        };
        params.validate().unwrap();
        let p = params.class_probs(&[1.0, 1.0]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn membership_rejects_nonzero_reference_row() {
        let params = MembershipParams {
            gamma: vec![vec![0.1, 0.0], vec![1.0, 1.0]],
        };
        assert!(params.validate().is_err());
    }
}
