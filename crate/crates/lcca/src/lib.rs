//! Weighted latent class cluster analysis for categorical survey data.
//!
//! The crate covers the full pipeline: merging and recoding raw survey CSVs
//! into a coded [`model::Dataset`], weighted EM estimation of finite mixtures
//! of independent multinomials (optionally with a covariate-driven
//! multinomial-logit membership model), BIC/AIC model selection over a range
//! of class counts, and profiling of a fitted model into conditional
//! probability tables, weighted crosstabs, and a post-hoc membership logit.

pub mod error;
pub mod estimate;
pub mod ingest;
pub mod math;
pub mod model;
pub mod profile;
pub mod select;
pub mod synth;

pub use error::LccaError;
pub use estimate::{fit_em, EmConfig, MembershipMode};
pub use model::{
    CategoricalVariable, Dataset, FitResult, LatentClassModel, MeasurementParams, Membership,
    MembershipParams,
};
