//! Weighted EM estimation of latent class models.
//!
//! Supports both the indicator-only stage (constant class priors) and the
//! covariate stage (multinomial-logit membership model re-estimated jointly
//! with the measurement tables at every iteration).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LccaError, Result};
use crate::math::log_sum_exp;
use crate::model::{
    Dataset, FitResult, LatentClassModel, MeasurementParams, Membership, MembershipParams,
};

pub use crate::model::MembershipKind as MembershipMode;

/// Which n goes into the BIC penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BicSampleSize {
    /// Sum of survey weights (effective N). The default.
    #[default]
    SumOfWeights,
    /// Raw row count.
    RawN,
}

/// EM and inner-solver settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// Relative log-likelihood change declaring convergence.
    pub loglik_tolerance: f64,
    pub n_restarts: usize,
    pub seed: u64,
    /// Smoothing floor applied to measurement probabilities.
    pub prob_floor: f64,
    pub irls_max_iter: usize,
    /// Gradient max-norm tolerance for the membership logit.
    pub irls_tolerance: f64,
    /// L2 regularization on membership coefficients.
    pub ridge: f64,
    pub bic_sample_size: BicSampleSize,
    /// Coefficient magnitude beyond which the logit is flagged as separated.
    pub divergence_bound: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            loglik_tolerance: 1e-8,
            n_restarts: 20,
            seed: 0,
            prob_floor: 1e-10,
            irls_max_iter: 50,
            irls_tolerance: 1e-10,
            ridge: 1e-8,
            bic_sample_size: BicSampleSize::SumOfWeights,
            divergence_bound: 30.0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.loglik_tolerance <= 0.0 || self.irls_tolerance <= 0.0 {
            return Err(LccaError::Domain("tolerances must be positive".into()));
        }
        if self.n_restarts == 0 {
            return Err(LccaError::Domain("n_restarts must be >= 1".into()));
        }
        if !(self.prob_floor > 0.0 && self.prob_floor < 1e-3) {
            return Err(LccaError::Domain("prob_floor must lie in (0, 1e-3)".into()));
        }
        Ok(())
    }
}

fn check_schema(model: &LatentClassModel, data: &Dataset) -> Result<()> {
    if model.indicators != data.indicators {
        return Err(LccaError::SchemaMismatch(
            "model indicators do not match dataset indicators".into(),
        ));
    }
    if let Membership::Covariate { .. } = model.membership {
        if model.covariate_schema != data.covariates {
            return Err(LccaError::SchemaMismatch(
                "model covariate schema does not match dataset covariates".into(),
            ));
        }
    }
    Ok(())
}

fn ln_guard(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Per-row log joint terms ln P(C_k|Z_i) + sum_l ln P(Y_il|C_k).
fn row_log_terms(model: &LatentClassModel, data: &Dataset, i: usize) -> Vec<f64> {
    let prior = model.prior_for_row(data, i);
    (0..model.k)
        .map(|k| {
            let mut t = ln_guard(prior[k]);
            for (l, &code) in data.indicator_codes[i].iter().enumerate() {
                t += ln_guard(model.measurement.probs[k][l][code]);
            }
            t
        })
        .collect()
}

/// Weighted log-likelihood of `data` under `model`, computed in log space
/// with a log-sum-exp over classes.
pub fn log_likelihood(model: &LatentClassModel, data: &Dataset) -> Result<f64> {
    check_schema(model, data)?;
    let mut total = 0.0;
    for i in 0..data.n_rows() {
        total += data.weights[i] * log_sum_exp(&row_log_terms(model, data, i));
    }
    Ok(total)
}

/// Posterior class probabilities, one row per observation, rows summing to 1.
pub fn e_step(model: &LatentClassModel, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    Ok(e_step_with_loglik(model, data)?.0)
}

/// E-step returning both posteriors and the weighted log-likelihood from the
/// same pass over the data.
pub fn e_step_with_loglik(
    model: &LatentClassModel,
    data: &Dataset,
) -> Result<(Vec<Vec<f64>>, f64)> {
    check_schema(model, data)?;
    let mut posteriors = Vec::with_capacity(data.n_rows());
    let mut loglik = 0.0;
    for i in 0..data.n_rows() {
        let terms = row_log_terms(model, data, i);
        let lse = log_sum_exp(&terms);
        if !lse.is_finite() {
            return Err(LccaError::Estimation(format!(
                "row {i} has zero probability under every class"
            )));
        }
        loglik += data.weights[i] * lse;
        posteriors.push(terms.iter().map(|t| (t - lse).exp()).collect());
    }
    Ok((posteriors, loglik))
}

/// Output of the measurement M-step.
pub struct MeasurementStep {
    pub params: MeasurementParams,
    /// Classes whose total responsibility mass was zero.
    pub degenerate_classes: Vec<usize>,
}

/// Closed-form weighted-frequency M-step for the measurement tables.
pub fn m_step_measurement(
    posteriors: &[Vec<f64>],
    data: &Dataset,
    prob_floor: f64,
) -> MeasurementStep {
    let k = posteriors[0].len();
    let mut degenerate = Vec::new();
    let mut probs = Vec::with_capacity(k);
    for c in 0..k {
        let denom: f64 = (0..data.n_rows())
            .map(|i| data.weights[i] * posteriors[i][c])
            .sum();
        let mut class_tables = Vec::with_capacity(data.indicators.len());
        for (l, var) in data.indicators.iter().enumerate() {
            let m_l = var.n_categories();
            let mut table = vec![0.0; m_l];
            if denom > 0.0 {
                for i in 0..data.n_rows() {
                    table[data.indicator_codes[i][l]] += data.weights[i] * posteriors[i][c];
                }
                for v in table.iter_mut() {
                    *v /= denom;
                }
            } else {
                // empty class: fall back to uniform, caller decides what to do
                table.fill(1.0 / m_l as f64);
            }
            // floor and renormalize
            for v in table.iter_mut() {
                if *v < prob_floor {
                    *v = prob_floor;
                }
            }
            let sum: f64 = table.iter().sum();
            for v in table.iter_mut() {
                *v /= sum;
            }
            class_tables.push(table);
        }
        if denom <= 0.0 {
            degenerate.push(c);
        }
        probs.push(class_tables);
    }
    MeasurementStep {
        params: MeasurementParams { probs },
        degenerate_classes: degenerate,
    }
}

/// A solved weighted multinomial logit with fractional targets.
pub struct LogitFit {
    /// K x D coefficient matrix, row 0 pinned to zero.
    pub params: MembershipParams,
    pub converged: bool,
    /// Iteration cap hit or a coefficient crossed the divergence bound.
    pub separation_flag: bool,
    /// Negative Hessian of the unpenalized weighted log-likelihood at the
    /// solution, over the free parameters (classes 1..K-1 by design column).
    pub observed_information: DMatrix<f64>,
}

/// Settings for [`fit_weighted_logit`], split out so the post-hoc profile
/// logit can reuse the solver with its own tolerances.
#[derive(Debug, Clone, Copy)]
pub struct LogitConfig {
    pub max_iter: usize,
    pub tolerance: f64,
    pub ridge: f64,
    pub divergence_bound: f64,
}

impl From<&EmConfig> for LogitConfig {
    fn from(c: &EmConfig) -> Self {
        Self {
            max_iter: c.irls_max_iter,
            tolerance: c.irls_tolerance,
            ridge: c.ridge,
            divergence_bound: c.divergence_bound,
        }
    }
}

fn logit_probs(gamma: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let eta: Vec<f64> = gamma
        .iter()
        .map(|row| row.iter().zip(x).map(|(g, v)| g * v).sum())
        .collect();
    crate::math::softmax(&eta)
}

fn logit_objective(
    gamma: &[Vec<f64>],
    targets: &[Vec<f64>],
    design: &[Vec<f64>],
    weights: &[f64],
    ridge: f64,
) -> f64 {
    let mut obj = 0.0;
    for i in 0..design.len() {
        let p = logit_probs(gamma, &design[i]);
        for k in 0..gamma.len() {
            if targets[i][k] > 0.0 {
                obj += weights[i] * targets[i][k] * ln_guard(p[k]);
            }
        }
    }
    let sq: f64 = gamma
        .iter()
        .skip(1)
        .flat_map(|r| r.iter())
        .map(|g| g * g)
        .sum();
    obj - 0.5 * ridge * sq
}

/// Newton fit of a weighted multinomial logit with fractional targets.
///
/// `targets` is N x K with rows summing to 1, `design` is N x D including the
/// intercept column. Class 0 is the reference; its coefficient row stays
/// pinned at zero.
pub fn fit_weighted_logit(
    targets: &[Vec<f64>],
    design: &[Vec<f64>],
    weights: &[f64],
    cfg: &LogitConfig,
) -> Result<LogitFit> {
    let n = design.len();
    let k = targets[0].len();
    if k < 2 {
        return Err(LccaError::InvalidDimension(
            "membership logit needs k >= 2".into(),
        ));
    }
    let d = design[0].len();
    let free = (k - 1) * d;

    let mut gamma = vec![vec![0.0; d]; k];
    let mut converged = false;
    let mut separation = false;

    let pack_index = |c: usize, j: usize| (c - 1) * d + j;

    for _iter in 0..cfg.max_iter {
        // gradient and Hessian of the penalized objective
        let mut grad = DVector::<f64>::zeros(free);
        let mut neg_hess = DMatrix::<f64>::zeros(free, free);
        for i in 0..n {
            let p = logit_probs(&gamma, &design[i]);
            let x = &design[i];
            for c in 1..k {
                for j in 0..d {
                    grad[pack_index(c, j)] += weights[i] * (targets[i][c] - p[c]) * x[j];
                }
            }
            for c1 in 1..k {
                for c2 in 1..k {
                    let s = weights[i] * p[c1] * (if c1 == c2 { 1.0 } else { 0.0 } - p[c2]);
                    if s == 0.0 {
                        continue;
                    }
                    for j1 in 0..d {
                        for j2 in 0..d {
                            neg_hess[(pack_index(c1, j1), pack_index(c2, j2))] +=
                                s * x[j1] * x[j2];
                        }
                    }
                }
            }
        }
        for c in 1..k {
            for j in 0..d {
                grad[pack_index(c, j)] -= cfg.ridge * gamma[c][j];
                neg_hess[(pack_index(c, j), pack_index(c, j))] += cfg.ridge;
            }
        }

        if grad.amax() < cfg.tolerance {
            converged = true;
            break;
        }

        // Newton direction, boosting the diagonal if the solve fails
        let mut boost = 0.0;
        let step = loop {
            let mut h = neg_hess.clone();
            if boost > 0.0 {
                for j in 0..free {
                    h[(j, j)] += boost;
                }
            }
            match h.cholesky() {
                Some(chol) => break chol.solve(&grad),
                None => {
                    boost = if boost == 0.0 { 1e-8 } else { boost * 10.0 };
                    if boost > 1e6 {
                        return Err(LccaError::Estimation(
                            "membership logit Hessian is numerically singular".into(),
                        ));
                    }
                }
            }
        };

        // backtracking line search on the penalized objective
        let base = logit_objective(&gamma, targets, design, weights, cfg.ridge);
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial = gamma.clone();
            for c in 1..k {
                for j in 0..d {
                    trial[c][j] += scale * step[pack_index(c, j)];
                }
            }
            if logit_objective(&trial, targets, design, weights, cfg.ridge) >= base {
                gamma = trial;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            // no improving step along the Newton direction; treat as converged
            converged = true;
            break;
        }
        if gamma
            .iter()
            .flat_map(|r| r.iter())
            .any(|g| g.abs() > cfg.divergence_bound)
        {
            separation = true;
            break;
        }
    }
    if !converged {
        separation = true;
    }

    // observed information (unpenalized) at the solution
    let mut info = DMatrix::<f64>::zeros(free, free);
    for i in 0..n {
        let p = logit_probs(&gamma, &design[i]);
        let x = &design[i];
        for c1 in 1..k {
            for c2 in 1..k {
                let s = weights[i] * p[c1] * (if c1 == c2 { 1.0 } else { 0.0 } - p[c2]);
                if s == 0.0 {
                    continue;
                }
                for j1 in 0..d {
                    for j2 in 0..d {
                        info[(pack_index(c1, j1), pack_index(c2, j2))] += s * x[j1] * x[j2];
                    }
                }
            }
        }
    }

    Ok(LogitFit {
        params: MembershipParams { gamma },
        converged,
        separation_flag: separation,
        observed_information: info,
    })
}

/// Analytic gradient of the (ridge-penalized) fractional-target logit
/// objective at `gamma`, over the free parameters. Exposed for gradient
/// verification against finite differences.
pub fn logit_gradient(
    gamma: &[Vec<f64>],
    targets: &[Vec<f64>],
    design: &[Vec<f64>],
    weights: &[f64],
    ridge: f64,
) -> Vec<f64> {
    let k = gamma.len();
    let d = gamma[0].len();
    let mut grad = vec![0.0; (k - 1) * d];
    for i in 0..design.len() {
        let p = logit_probs(gamma, &design[i]);
        for c in 1..k {
            for j in 0..d {
                grad[(c - 1) * d + j] += weights[i] * (targets[i][c] - p[c]) * design[i][j];
            }
        }
    }
    for c in 1..k {
        for j in 0..d {
            grad[(c - 1) * d + j] -= ridge * gamma[c][j];
        }
    }
    grad
}

/// Penalized fractional-target logit objective. Counterpart of
/// [`logit_gradient`] for finite-difference checks.
pub fn logit_objective_value(
    gamma: &[Vec<f64>],
    targets: &[Vec<f64>],
    design: &[Vec<f64>],
    weights: &[f64],
    ridge: f64,
) -> f64 {
    logit_objective(gamma, targets, design, weights, ridge)
}

/// M-step for the covariate membership model: a weighted multinomial logit
/// with the posteriors as fractional targets.
pub fn m_step_membership(
    posteriors: &[Vec<f64>],
    data: &Dataset,
    config: &EmConfig,
) -> Result<LogitFit> {
    let design: Vec<Vec<f64>> = (0..data.n_rows()).map(|i| data.design_row(i)).collect();
    fit_weighted_logit(posteriors, &design, &data.weights, &config.into())
}

fn derive_restart_seed(seed: u64, restart: u64) -> u64 {
    // splitmix64 over (seed, restart) so chains are independent streams
    let mut z = seed
        .wrapping_add(restart.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Chain {
    model: LatentClassModel,
    posteriors: Vec<Vec<f64>>,
    loglik: f64,
    iterations: usize,
    converged: bool,
    degenerate: bool,
    separation: bool,
}

fn run_chain(
    data: &Dataset,
    k: usize,
    mode: MembershipMode,
    config: &EmConfig,
    restart: usize,
) -> Result<Chain> {
    let mut rng = ChaCha12Rng::seed_from_u64(derive_restart_seed(config.seed, restart as u64));

    // Dirichlet(1) posterior rows via normalized Exp(1) draws
    let mut posteriors: Vec<Vec<f64>> = (0..data.n_rows())
        .map(|_| {
            if k == 1 {
                vec![1.0]
            } else {
                let draws: Vec<f64> = (0..k)
                    .map(|_| -(1.0 - rng.random::<f64>()).ln())
                    .collect();
                let s: f64 = draws.iter().sum();
                draws.into_iter().map(|v| v / s).collect()
            }
        })
        .collect();

    let total_weight = data.total_weight();
    let mut model;
    let mut loglik = f64::NEG_INFINITY;
    let mut converged = false;
    let mut degenerate = false;
    let mut separation = false;
    let mut iterations = 0;

    loop {
        iterations += 1;
        let meas = m_step_measurement(&posteriors, data, config.prob_floor);
        if !meas.degenerate_classes.is_empty() {
            degenerate = true;
        }
        let membership = match mode {
            MembershipMode::ConstantPrior => {
                let mut priors: Vec<f64> = (0..k)
                    .map(|c| {
                        (0..data.n_rows())
                            .map(|i| data.weights[i] * posteriors[i][c])
                            .sum::<f64>()
                            / total_weight
                    })
                    .collect();
                let s: f64 = priors.iter().sum();
                for p in priors.iter_mut() {
                    *p /= s;
                }
                Membership::ConstantPrior { priors }
            }
            MembershipMode::Covariate => {
                if k == 1 {
                    Membership::ConstantPrior { priors: vec![1.0] }
                } else {
                    let fit = m_step_membership(&posteriors, data, config)?;
                    if fit.separation_flag {
                        separation = true;
                    }
                    Membership::Covariate { params: fit.params }
                }
            }
        };
        let covariate_schema = match membership {
            Membership::Covariate { .. } => data.covariates.clone(),
            Membership::ConstantPrior { .. } => Vec::new(),
        };
        model = LatentClassModel {
            k,
            indicators: data.indicators.clone(),
            measurement: meas.params,
            membership,
            covariate_schema,
        };

        let (post, ll) = e_step_with_loglik(&model, data)?;
        posteriors = post;

        if degenerate {
            return Ok(Chain {
                model,
                posteriors,
                loglik: ll,
                iterations,
                converged: false,
                degenerate,
                separation,
            });
        }
        let rel_change = (ll - loglik).abs() / (loglik.abs().max(1.0));
        let done = loglik.is_finite() && rel_change < config.loglik_tolerance;
        loglik = ll;
        if done {
            converged = true;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }
    }

    Ok(Chain {
        model,
        posteriors,
        loglik,
        iterations,
        converged,
        degenerate,
        separation,
    })
}

/// Expected weighted class shares from a posterior matrix.
pub fn expected_shares(posteriors: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let k = posteriors[0].len();
    let total: f64 = weights.iter().sum();
    (0..k)
        .map(|c| {
            posteriors
                .iter()
                .zip(weights)
                .map(|(row, w)| w * row[c])
                .sum::<f64>()
                / total
        })
        .collect()
}

/// Canonical class order: descending weighted share, ties broken by
/// lexicographic comparison of the flattened measurement tables.
fn canonical_order(shares: &[f64], measurement: &MeasurementParams) -> Vec<usize> {
    let flatten = |k: usize| -> Vec<f64> {
        measurement.probs[k]
            .iter()
            .flat_map(|t| t.iter().cloned())
            .collect()
    };
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        shares[b]
            .partial_cmp(&shares[a])
            .unwrap()
            .then_with(|| flatten(a).partial_cmp(&flatten(b)).unwrap())
    });
    order
}

fn permute_chain(chain: &mut Chain, order: &[usize]) {
    let meas = &chain.model.measurement;
    chain.model.measurement = MeasurementParams {
        probs: order.iter().map(|&k| meas.probs[k].clone()).collect(),
    };
    chain.model.membership = match &chain.model.membership {
        Membership::ConstantPrior { priors } => Membership::ConstantPrior {
            priors: order.iter().map(|&k| priors[k]).collect(),
        },
        Membership::Covariate { params } => {
            // re-reference: subtract the new class-0 row so it is exactly zero
            let base = params.gamma[order[0]].clone();
            let gamma = order
                .iter()
                .map(|&k| {
                    params.gamma[k]
                        .iter()
                        .zip(&base)
                        .map(|(g, b)| g - b)
                        .collect::<Vec<f64>>()
                })
                .collect();
            let mut p = MembershipParams { gamma };
            for v in p.gamma[0].iter_mut() {
                *v = 0.0;
            }
            Membership::Covariate { params: p }
        }
    };
    for row in chain.posteriors.iter_mut() {
        let old = row.clone();
        for (slot, &k) in row.iter_mut().zip(order) {
            *slot = old[k];
        }
    }
}

/// Fit a latent class model with `k` classes via multi-restart weighted EM.
///
/// Runs `config.n_restarts` independent chains (concurrently, with
/// per-restart seeds derived from `config.seed`) and returns the chain with
/// the highest weighted log-likelihood, classes reordered canonically.
pub fn fit_em(
    data: &Dataset,
    k: usize,
    mode: MembershipMode,
    config: &EmConfig,
) -> Result<FitResult> {
    config.validate()?;
    if k == 0 {
        return Err(LccaError::InvalidDimension("k must be >= 1".into()));
    }

    let n_restarts = if k == 1 { 1 } else { config.n_restarts };
    let chains: Vec<Result<Chain>> = (0..n_restarts)
        .into_par_iter()
        .map(|r| run_chain(data, k, mode, config, r))
        .collect();

    let mut best: Option<(usize, Chain)> = None;
    let mut any_ok = false;
    let mut last_err = None;
    for (r, res) in chains.into_iter().enumerate() {
        match res {
            Ok(chain) => {
                if chain.degenerate {
                    continue;
                }
                any_ok = true;
                let better = match &best {
                    None => true,
                    Some((_, b)) => chain.loglik > b.loglik,
                };
                if better {
                    best = Some((r, chain));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let (restart_index, mut chain) = match best {
        Some(b) => b,
        None => {
            if any_ok {
                unreachable!()
            }
            return match last_err {
                Some(e) => Err(e),
                None => Err(LccaError::AllChainsDegenerate(k)),
            };
        }
    };

    let shares = expected_shares(&chain.posteriors, &data.weights);
    let order = canonical_order(&shares, &chain.model.measurement);
    permute_chain(&mut chain, &order);
    let class_shares = expected_shares(&chain.posteriors, &data.weights);

    let indicator_cats: Vec<usize> = data.indicators.iter().map(|v| v.n_categories()).collect();
    let dummy_count = match mode {
        MembershipMode::Covariate => data.covariate_dummy_count(),
        MembershipMode::ConstantPrior => 0,
    };
    let n_params = crate::model::n_params(k, &indicator_cats, dummy_count, mode)?;
    let bic_n = match config.bic_sample_size {
        BicSampleSize::SumOfWeights => data.total_weight(),
        BicSampleSize::RawN => data.n_rows() as f64,
    };
    let (aic, bic) = crate::model::information_criteria(chain.loglik, n_params, bic_n)?;

    Ok(FitResult {
        model: chain.model,
        loglik: chain.loglik,
        n_params,
        aic,
        bic,
        bic_sample_size: bic_n,
        posteriors: chain.posteriors,
        class_shares,
        converged: chain.converged,
        iterations: chain.iterations,
        restart_index,
        seed: config.seed,
        separation_flag: chain.separation,
    })
}

/// Fitted-model JSON document: the model plus fit statistics and the config
/// that produced it (posteriors omitted; re-derivable from model + data).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub model: LatentClassModel,
    pub loglik: f64,
    pub n_params: usize,
    pub aic: f64,
    pub bic: f64,
    pub bic_sample_size: f64,
    pub class_shares: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub restart_index: usize,
    pub separation_flag: bool,
    pub config: EmConfig,
}

impl ModelDocument {
    pub fn from_fit(fit: &FitResult, config: &EmConfig) -> Self {
        Self {
            model: fit.model.clone(),
            loglik: fit.loglik,
            n_params: fit.n_params,
            aic: fit.aic,
            bic: fit.bic,
            bic_sample_size: fit.bic_sample_size,
            class_shares: fit.class_shares.clone(),
            converged: fit.converged,
            iterations: fit.iterations,
            restart_index: fit.restart_index,
            separation_flag: fit.separation_flag,
            config: config.clone(),
        }
    }
}
