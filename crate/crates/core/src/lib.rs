//! Extreme value fitting, goodness-of-fit testing, and the p-value weighted
//! two-component GEV mixture found by coordinate-wise grid search.
//!
//! * [`distributions`]: GEV / Gumbel / Weibull / Fréchet kernels and sampling.
//! * [`stats`]: chi-square and Kolmogorov-Smirnov machinery.
//! * [`fitting`]: maximum likelihood with observed-information standard errors.
//! * [`mixture`]: the convex combination `(1 - p) F₁ + p F₁'`.
//! * [`search`]: grid scans maximizing the chi-square p-value.

pub mod distributions;
pub mod error;
pub mod fitting;
pub mod fmt;
pub mod mixture;
mod optim;
pub mod rng;
pub mod search;
pub mod special;
pub mod stats;
pub mod table_stub;

pub use distributions::{log_likelihood, sample, Family, GevParams};
pub use error::{Error, Result};
pub use fitting::{fit_mle, initial_params, std_errors, FitConfig, FitResult};
pub use mixture::{make_mixture, MixtureModel};
pub use rng::SeededRng;
pub use search::{
    optimize, optimize_with, scan_parameter, ChiSquareObjective, Evaluation, Objective, ParamRange,
    SearchParam, SearchSpec, SearchTrace, StageRecord,
};
pub use table_stub::TableStub;
