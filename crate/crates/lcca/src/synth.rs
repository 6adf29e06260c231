//! Synthetic data generation from a known model, plus label alignment for
//! recovery testing.

use itertools::Itertools;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LccaError, Result};
use crate::model::{CategoricalVariable, Dataset, LatentClassModel, Membership};

/// Where simulated covariate rows come from.
pub enum CovariateSource<'a> {
    /// No covariates.
    None,
    /// Bootstrap covariate rows from a real dataset, preserving their joint
    /// distribution.
    Bootstrap(&'a Dataset),
    /// Independent draws from per-covariate marginal distributions.
    Marginals {
        variables: Vec<CategoricalVariable>,
        /// One probability vector per covariate, matching its categories.
        probs: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
}

fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}

/// Draw `n` observations from `model`: covariates from `covariates`, class
/// from the membership model, indicators independently from the class's
/// measurement tables, weight from `weight_spec`. Returns the dataset and
/// the true class labels (for evaluation only).
pub fn simulate(
    model: &LatentClassModel,
    covariates: &CovariateSource,
    n: usize,
    weight_spec: WeightSpec,
    seed: u64,
) -> Result<(Dataset, Vec<usize>)> {
    if n == 0 {
        return Err(LccaError::InvalidSpec("n must be >= 1".into()));
    }
    model.validate()?;
    match weight_spec {
        WeightSpec::Constant { value } if value <= 0.0 => {
            return Err(LccaError::InvalidSpec("constant weight must be > 0".into()))
        }
        WeightSpec::Uniform { low, high } if !(0.0 < low && low < high) => {
            return Err(LccaError::InvalidSpec(
                "uniform weight range needs 0 < low < high".into(),
            ))
        }
        _ => {}
    }

    let cov_vars: Vec<CategoricalVariable> = match covariates {
        CovariateSource::None => Vec::new(),
        CovariateSource::Bootstrap(pool) => pool.covariates.clone(),
        CovariateSource::Marginals { variables, probs } => {
            if variables.len() != probs.len() {
                return Err(LccaError::InvalidSpec(
                    "marginal spec: variables and probs differ in length".into(),
                ));
            }
            for (v, p) in variables.iter().zip(probs) {
                if p.len() != v.n_categories() || (p.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
                    return Err(LccaError::InvalidSpec(format!(
                        "marginal spec for {} is not a distribution over its categories",
                        v.name
                    )));
                }
            }
            variables.clone()
        }
    };
    if let Membership::Covariate { .. } = model.membership {
        if cov_vars != model.covariate_schema {
            return Err(LccaError::SchemaMismatch(
                "covariate source does not match the model's covariate schema".into(),
            ));
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut indicator_codes = Vec::with_capacity(n);
    let mut covariate_codes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut ids = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);

    // scratch dataset so the membership model can score a single row
    for i in 0..n {
        let cov_row: Vec<usize> = match covariates {
            CovariateSource::None => Vec::new(),
            CovariateSource::Bootstrap(pool) => {
                let src = rng.random_range(0..pool.n_rows());
                pool.covariate_codes[src].clone()
            }
            CovariateSource::Marginals { probs, .. } => probs
                .iter()
                .map(|p| sample_categorical(p, &mut rng))
                .collect(),
        };

        let prior = match &model.membership {
            Membership::ConstantPrior { priors } => priors.clone(),
            Membership::Covariate { params } => {
                let mut x = Vec::with_capacity(1 + cov_vars.len());
                x.push(1.0);
                for (j, var) in cov_vars.iter().enumerate() {
                    for m in 0..var.n_categories() {
                        if m == var.reference_index {
                            continue;
                        }
                        x.push(if cov_row[j] == m { 1.0 } else { 0.0 });
                    }
                }
                params.class_probs(&x)
            }
        };
        let class = sample_categorical(&prior, &mut rng);
        truth.push(class);

        indicator_codes.push(
            model.measurement.probs[class]
                .iter()
                .map(|table| sample_categorical(table, &mut rng))
                .collect(),
        );
        covariate_codes.push(cov_row);
        weights.push(match weight_spec {
            WeightSpec::Constant { value } => value,
            WeightSpec::Uniform { low, high } => rng.random_range(low..high),
        });
        ids.push(format!("sim-{i}"));
    }

    let data = Dataset::new(
        model.indicators.clone(),
        cov_vars,
        indicator_codes,
        covariate_codes,
        weights,
        ids,
    )?;
    Ok((data, truth))
}

/// Total L1 distance between two measurement tables under a permutation
/// mapping truth class `t` to estimated class `perm[t]`.
fn permutation_distance(
    estimated: &LatentClassModel,
    truth: &LatentClassModel,
    perm: &[usize],
) -> f64 {
    let mut dist = 0.0;
    for (t, &e) in perm.iter().enumerate() {
        for (et, tt) in estimated.measurement.probs[e]
            .iter()
            .zip(&truth.measurement.probs[t])
        {
            for (a, b) in et.iter().zip(tt) {
                dist += (a - b).abs();
            }
        }
    }
    dist
}

/// The permutation `perm` (truth class index -> estimated class index)
/// minimizing the total L1 distance between measurement tables, by
/// exhaustive search over all K! permutations.
pub fn align_labels(estimated: &LatentClassModel, truth: &LatentClassModel) -> Result<Vec<usize>> {
    if estimated.k != truth.k || estimated.indicators != truth.indicators {
        return Err(LccaError::SchemaMismatch(
            "label alignment needs equal K and identical indicator schemas".into(),
        ));
    }
    if estimated.k > 8 {
        return Err(LccaError::InvalidDimension(
            "exhaustive label alignment supports K <= 8".into(),
        ));
    }
    let best = (0..estimated.k)
        .permutations(estimated.k)
        .min_by(|a, b| {
            permutation_distance(estimated, truth, a)
                .partial_cmp(&permutation_distance(estimated, truth, b))
                .unwrap()
        })
        .unwrap();
    Ok(best)
}
