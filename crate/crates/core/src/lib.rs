//! Bivariate causal direction estimation by comparing how detectable the
//! departures from each direction's linear-model null are.
//!
//! The pipeline, bottom up:
//!
//! * [`kernel`]: Gaussian Gram matrices, median-heuristic bandwidths and the
//!   empirical HSIC V-statistic between a predictor and its residuals.
//! * [`regress`]: directional OLS, plus a penalised spline and BIC rule
//!   used to flag approximately linear pairs.
//! * [`gof`]: null-bootstrap critical values for the joint independence and
//!   goodness-of-fit test in each direction.
//! * [`cdsp`]: bootstrap detectability indices, the direction estimate and
//!   its nested-bootstrap support probability.
//! * [`lingam`]: the two-variable DirectLiNGAM baseline.
//! * [`simlab`]: the misspecification simulation study.
//! * [`bench`]: the cause–effect pairs benchmark harness.

pub mod bench;
pub mod cdsp;
pub mod error;
pub mod gof;
pub mod kernel;
pub mod lingam;
pub mod regress;
pub mod report;
pub mod rng;
pub mod sample;
pub mod simlab;

pub use cdsp::{
    cdsp_point_estimate, cdsp_support_probability, estimate_direction_quantities, support_category,
    CausalDirection, CdspConfig, CdspResult, DirectionalEstimates, PointEstimate, SupportCategory,
};
pub use error::{CdspError, Result};
pub use gof::{decide, null_bootstrap_critical, CriticalValue, TestDecision};
pub use kernel::{
    directional_statistic, gaussian_gram, hsic_gaussian, hsic_vstat, median_heuristic_bandwidth, GramMatrix,
    HsicStatistic,
};
pub use lingam::{lingam_bootstrap_rate, lingam_direction, LingamDecision, LingamResult};
pub use regress::{bic_linear_vs_spline, ols_fit, select_smoothing, spline_fit, LinearFit, Linearity, SplineFit};
pub use sample::{BivariateSample, Direction};
