//! Directional least squares and the linear-vs-smooth model comparison.

mod ols;
mod spline;

pub use ols::{ols_fit, ols_oriented, LinearFit};
pub use spline::{
    bic_linear_vs_spline, select_smoothing, spline_fit, BicComparison, Linearity, SplineFit,
    DEFAULT_BASIS_DIM,
};
