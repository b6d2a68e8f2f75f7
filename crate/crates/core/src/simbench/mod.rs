//! Simulation study on nine bivariate normal mixtures.
//!
//! The mixtures follow the standard bivariate test suite of Wand and Jones
//! (1993); [`MixtureModel::describe`] prints the parameters used, and every
//! study report carries them.

mod models;
mod study;
mod truth;

pub use models::{mixture_density, mixture_sample, Component, MixtureModel};
pub use study::{
    run_study, run_study_with_progress, CellFlag, CellReport, ErrorReport, Estimator, Quotient, QuotientKind, ReplicateResult,
    StudyConfig, Summary, P_LEVELS,
};
pub use truth::{default_truth_grid, true_hdr, true_hdr_default, TrueHdr, DEFAULT_TRUTH_DRAWS};

use crate::density::DensityError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
    #[error("unknown model {0}; the catalog has models 1 to 9")]
    UnknownModel(u8),
    #[error("tau must lie in (0, 1), got {0}")]
    InvalidTau(f64),
    #[error("invalid study configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Density(#[from] DensityError),
}
