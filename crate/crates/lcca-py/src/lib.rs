//! Python bindings: dataset loading, model fitting, class-count sweeps, and
//! synthetic data generation.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use lcca::estimate::{fit_em, EmConfig, MembershipMode, ModelDocument};
use lcca::model::{LatentClassModel, Membership, MembershipKind};
use lcca::profile;
use lcca::select::{self, Criterion};
use lcca::synth::{self, CovariateSource, WeightSpec};
use lcca::LccaError;

fn to_py_err(e: LccaError) -> PyErr {
    match e {
        LccaError::Io(_) | LccaError::MissingFile(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn em_config(seed: u64, restarts: usize) -> EmConfig {
    EmConfig {
        seed,
        n_restarts: restarts,
        ..Default::default()
    }
}

/// A coded categorical dataset with survey weights.
#[pyclass(name = "Dataset")]
struct PyDataset {
    inner: lcca::Dataset,
}

#[pymethods]
impl PyDataset {
    /// Load a dataset from its JSON header and CSV body.
    #[staticmethod]
    fn read(json_path: &str, csv_path: &str) -> PyResult<Self> {
        let inner = lcca::ingest::read_dataset(json_path.as_ref(), csv_path.as_ref())
            .map_err(to_py_err)?;
        Ok(Self { inner })
    }

    /// Write the dataset back out as JSON header + CSV body.
    fn write(&self, json_path: &str, csv_path: &str) -> PyResult<()> {
        lcca::ingest::write_dataset(&self.inner, json_path.as_ref(), csv_path.as_ref())
            .map_err(to_py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    #[getter]
    fn indicator_names(&self) -> Vec<String> {
        self.inner.indicators.iter().map(|v| v.name.clone()).collect()
    }

    #[getter]
    fn covariate_names(&self) -> Vec<String> {
        self.inner.covariates.iter().map(|v| v.name.clone()).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} rows, {} indicators, {} covariates)",
            self.inner.n_rows(),
            self.inner.indicators.len(),
            self.inner.covariates.len()
        )
    }
}

/// A fitted latent class model plus its fit statistics.
#[pyclass(name = "FitResult")]
struct PyFitResult {
    inner: lcca::FitResult,
    config: EmConfig,
}

#[pymethods]
impl PyFitResult {
    #[getter]
    fn k(&self) -> usize {
        self.inner.model.k
    }

    #[getter]
    fn loglik(&self) -> f64 {
        self.inner.loglik
    }

    #[getter]
    fn aic(&self) -> f64 {
        self.inner.aic
    }

    #[getter]
    fn bic(&self) -> f64 {
        self.inner.bic
    }

    #[getter]
    fn n_params(&self) -> usize {
        self.inner.n_params
    }

    #[getter]
    fn class_shares(&self) -> Vec<f64> {
        self.inner.class_shares.clone()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn separation_flag(&self) -> bool {
        self.inner.separation_flag
    }

    /// Class-conditional probability tables indexed [class][indicator][category].
    #[getter]
    fn measurement_probs(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.model.measurement.probs.clone()
    }

    /// Constant class priors, or None for a covariate membership model.
    #[getter]
    fn class_priors(&self) -> Option<Vec<f64>> {
        match &self.inner.model.membership {
            Membership::ConstantPrior { priors } => Some(priors.clone()),
            Membership::Covariate { .. } => None,
        }
    }

    /// Membership-logit coefficients indexed [class][design column]
    /// (row 0 is the reference class, pinned at zero), or None under
    /// constant priors.
    #[getter]
    fn membership_coefs(&self) -> Option<Vec<Vec<f64>>> {
        match &self.inner.model.membership {
            Membership::Covariate { params } => Some(params.gamma.clone()),
            Membership::ConstantPrior { .. } => None,
        }
    }

    /// Posterior class probabilities, one row per observation.
    #[getter]
    fn posteriors(&self) -> Vec<Vec<f64>> {
        self.inner.posteriors.clone()
    }

    /// Modal class assignment per observation (0-based).
    fn assignments(&self) -> Vec<usize> {
        profile::assign_classes(&self.inner.posteriors)
    }

    /// Serialize the full model document as JSON.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&ModelDocument::from_fit(&self.inner, &self.config))
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "FitResult(k={}, loglik={:.3}, bic={:.1}, converged={})",
            self.inner.model.k, self.inner.loglik, self.inner.bic, self.inner.converged
        )
    }
}

/// Fit a latent class model by multi-restart EM.
#[pyfunction]
#[pyo3(signature = (data, k, covariates=false, seed=0, restarts=20))]
fn fit(data: &PyDataset, k: usize, covariates: bool, seed: u64, restarts: usize) -> PyResult<PyFitResult> {
    let mode = if covariates {
        MembershipMode::Covariate
    } else {
        MembershipMode::ConstantPrior
    };
    let config = em_config(seed, restarts);
    let inner = fit_em(&data.inner, k, mode, &config).map_err(to_py_err)?;
    Ok(PyFitResult { inner, config })
}

/// Sweep class counts and pick the best K by BIC. Returns
/// (best_k, list of per-K stat dicts).
#[pyfunction]
#[pyo3(signature = (data, kmin=1, kmax=6, covariates=false, seed=0, restarts=20))]
fn sweep(
    py: Python<'_>,
    data: &PyDataset,
    kmin: usize,
    kmax: usize,
    covariates: bool,
    seed: u64,
    restarts: usize,
) -> PyResult<(usize, Vec<Py<PyAny>>)> {
    let mode = if covariates {
        MembershipMode::Covariate
    } else {
        MembershipMode::ConstantPrior
    };
    let config = em_config(seed, restarts);
    let (table, _) = select::sweep(&data.inner, kmin..=kmax, mode, &config).map_err(to_py_err)?;
    let best = select::select_best(&table, Criterion::Bic).map_err(to_py_err)?;
    let mut rows = Vec::with_capacity(table.rows.len());
    for r in &table.rows {
        let d = pyo3::types::PyDict::new(py);
        d.set_item("k", r.k)?;
        d.set_item("aic", r.aic)?;
        d.set_item("bic", r.bic)?;
        d.set_item("loglik", r.loglik)?;
        d.set_item("n_params", r.n_params)?;
        d.set_item("class_shares", r.class_shares.clone())?;
        d.set_item("converged", r.converged)?;
        d.set_item("error", r.error.clone())?;
        rows.push(d.into_any().unbind());
    }
    Ok((best, rows))
}

fn model_from_json(json: &str) -> PyResult<LatentClassModel> {
    // accept either a full model document or a bare model
    if let Ok(doc) = serde_json::from_str::<ModelDocument>(json) {
        return Ok(doc.model);
    }
    serde_json::from_str::<LatentClassModel>(json)
        .map_err(|e| PyValueError::new_err(format!("invalid model JSON: {e}")))
}

/// Simulate a dataset from a model given as JSON. Returns (dataset,
/// true class labels). Covariate-membership models need `pool`, a dataset to
/// bootstrap covariate rows from.
#[pyfunction]
#[pyo3(signature = (model_json, n, seed=0, weight=1.0, pool=None))]
fn simulate(
    model_json: &str,
    n: usize,
    seed: u64,
    weight: f64,
    pool: Option<&PyDataset>,
) -> PyResult<(PyDataset, Vec<usize>)> {
    let model = model_from_json(model_json)?;
    let source = match pool {
        Some(p) => CovariateSource::Bootstrap(&p.inner),
        None => CovariateSource::None,
    };
    let (data, labels) =
        synth::simulate(&model, &source, n, WeightSpec::Constant { value: weight }, seed)
            .map_err(to_py_err)?;
    Ok((PyDataset { inner: data }, labels))
}

/// Weighted log-likelihood of a dataset under a model given as JSON.
#[pyfunction]
fn log_likelihood(model_json: &str, data: &PyDataset) -> PyResult<f64> {
    let model = model_from_json(model_json)?;
    lcca::estimate::log_likelihood(&model, &data.inner).map_err(to_py_err)
}

/// Free-parameter count: K classes, indicator category sizes, number of
/// covariate dummy columns, constant vs covariate membership.
#[pyfunction]
#[pyo3(signature = (k, category_counts, dummy_count=0, covariates=false))]
fn n_params(k: usize, category_counts: Vec<usize>, dummy_count: usize, covariates: bool) -> PyResult<usize> {
    let kind = if covariates {
        MembershipKind::Covariate
    } else {
        MembershipKind::ConstantPrior
    };
    lcca::model::n_params(k, &category_counts, dummy_count, kind).map_err(to_py_err)
}

#[pymodule]
fn lcca_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(n_params, m)?)?;
    Ok(())
}
