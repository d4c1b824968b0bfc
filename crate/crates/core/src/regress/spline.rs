//! Cubic B-spline smoother with a second-difference penalty.
//!
//! Interior knots sit at quantiles of the distinct predictor values. The
//! penalty takes second divided differences of the coefficients over the
//! Greville abscissae, so its null space is exactly the straight lines and an
//! infinite penalty reproduces the OLS fit.
//!
//! The smoothing parameter is chosen by maximum marginal likelihood, treating
//! the penalised coefficient directions as Gaussian random effects:
//!
//! ```text
//! -2 l(λ) = n ln(Q_λ / n) + ln|λΛ + Rᵀ BᵀB R| - (k-2) ln λ - Σ ln s_j + const
//! ```
//!
//! where `P = R Λ Rᵀ` is the range part of the penalty, `Q_λ` the penalised
//! residual sum of squares and `s_j` the positive eigenvalues of `P`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{CdspError, Result};
use crate::regress::ols::ols_fit;
use crate::sample::{BivariateSample, Direction};

pub const DEFAULT_BASIS_DIM: usize = 10;
const DEGREE: usize = 3;
const GRID_POINTS: usize = 41;
const GRID_LOG10_MIN: f64 = -6.0;
const GRID_LOG10_MAX: f64 = 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineFit {
    pub basis_dim: usize,
    pub smoothing_param: f64,
    pub fitted: Vec<f64>,
    /// Trace of the hat matrix.
    pub edf: f64,
    pub rss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linearity {
    Linear,
    Nonlinear,
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicComparison {
    pub class: Linearity,
    pub bic_linear: f64,
    pub bic_spline: f64,
    pub spline_edf: f64,
}

/// Design, penalty and the per-dataset quantities shared across λ values.
struct PenalizedProblem {
    basis: DMatrix<f64>,
    gram: DMatrix<f64>,
    penalty: DMatrix<f64>,
    bty: DVector<f64>,
    y: DVector<f64>,
    k: usize,
}

impl PenalizedProblem {
    fn new(x: &[f64], y: &[f64], basis_dim: usize) -> Result<Self> {
        let n = x.len();
        if basis_dim < DEGREE + 1 {
            return Err(CdspError::InvalidInput(format!(
                "basis dimension must be at least {}, got {basis_dim}",
                DEGREE + 1
            )));
        }
        if n <= basis_dim {
            return Err(CdspError::InvalidInput(format!(
                "need more observations ({n}) than basis functions ({basis_dim})"
            )));
        }
        let mut distinct = x.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < basis_dim {
            return Err(CdspError::RankDeficient(format!(
                "{} distinct predictor values for {basis_dim} basis functions",
                distinct.len()
            )));
        }
        let knots = quantile_knots(&distinct, basis_dim);
        let mut basis = DMatrix::zeros(n, basis_dim);
        for (i, &xi) in x.iter().enumerate() {
            let row = bspline_row(&knots, basis_dim, xi);
            for (j, b) in row.into_iter().enumerate() {
                basis[(i, j)] = b;
            }
        }
        let penalty = divided_difference_penalty(&knots, basis_dim);
        let gram = basis.transpose() * &basis;
        let yv = DVector::from_column_slice(y);
        let bty = basis.transpose() * &yv;
        Ok(PenalizedProblem {
            basis,
            gram,
            penalty,
            bty,
            y: yv,
            k: basis_dim,
        })
    }

    /// λ normaliser making the grid dimensionless.
    fn lambda_scale(&self) -> f64 {
        self.gram.trace() / self.penalty.trace()
    }

    fn solve(&self, lambda: f64) -> Result<(SplineFit, f64)> {
        let system = &self.gram + &self.penalty * lambda;
        let chol = Cholesky::new(system).ok_or_else(|| {
            CdspError::RankDeficient(format!("penalised normal equations not positive definite at λ={lambda:e}"))
        })?;
        let coef = chol.solve(&self.bty);
        let fitted = &self.basis * &coef;
        let rss = (&self.y - &fitted).norm_squared();
        let edf = chol.solve(&self.gram).trace();
        let penalised = rss + lambda * (coef.transpose() * &self.penalty * &coef)[(0, 0)];
        Ok((
            SplineFit {
                basis_dim: self.k,
                smoothing_param: lambda,
                fitted: fitted.iter().copied().collect(),
                edf,
                rss,
            },
            penalised,
        ))
    }
}

/// Knot vector with `DEGREE + 1`-fold boundary knots and `basis_dim - 4`
/// interior knots at equally spaced quantiles of the distinct values.
fn quantile_knots(distinct: &[f64], basis_dim: usize) -> Vec<f64> {
    let (lo, hi) = (distinct[0], distinct[distinct.len() - 1]);
    let interior = basis_dim - DEGREE - 1;
    let mut knots = vec![lo; DEGREE + 1];
    let m = distinct.len() - 1;
    for j in 1..=interior {
        let pos = j as f64 * m as f64 / (interior + 1) as f64;
        let f = pos.floor() as usize;
        let frac = pos - f as f64;
        let q = if f >= m {
            distinct[m]
        } else {
            distinct[f] + frac * (distinct[f + 1] - distinct[f])
        };
        knots.push(q);
    }
    knots.extend(std::iter::repeat_n(hi, DEGREE + 1));
    knots
}

/// Values of all `basis_dim` cubic B-splines at `x` (Cox–de Boor).
fn bspline_row(knots: &[f64], basis_dim: usize, x: f64) -> Vec<f64> {
    let last = knots.len() - 1;
    // span index s with knots[s] <= x < knots[s+1]; right end maps to last span
    let mut s = DEGREE;
    while s < basis_dim - 1 && x >= knots[s + 1] {
        s += 1;
    }
    let mut n = vec![0.0; DEGREE + 1];
    n[0] = 1.0;
    let mut left = [0.0; DEGREE + 1];
    let mut right = [0.0; DEGREE + 1];
    for j in 1..=DEGREE {
        left[j] = x - knots[s + 1 - j];
        right[j] = knots[(s + j).min(last)] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom != 0.0 { n[r] / denom } else { 0.0 };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    let mut row = vec![0.0; basis_dim];
    for (r, v) in n.into_iter().enumerate() {
        row[s - DEGREE + r] = v;
    }
    row
}

fn greville(knots: &[f64], basis_dim: usize) -> Vec<f64> {
    (0..basis_dim)
        .map(|j| knots[j + 1..=j + DEGREE].iter().sum::<f64>() / DEGREE as f64)
        .collect()
}

/// `DᵀD` for second divided differences over the Greville abscissae.
fn divided_difference_penalty(knots: &[f64], basis_dim: usize) -> DMatrix<f64> {
    let g = greville(knots, basis_dim);
    let mut d = DMatrix::zeros(basis_dim - 2, basis_dim);
    for r in 0..basis_dim - 2 {
        let h0 = g[r + 1] - g[r];
        let h1 = g[r + 2] - g[r + 1];
        d[(r, r)] = 1.0 / h0;
        d[(r, r + 1)] = -1.0 / h0 - 1.0 / h1;
        d[(r, r + 2)] = 1.0 / h1;
    }
    d.transpose() * d
}

fn oriented_xy(sample: &BivariateSample) -> (&[f64], &[f64]) {
    sample.oriented(Direction::XToY)
}

/// Penalised cubic spline of y on x at a fixed (unscaled) smoothing parameter.
pub fn spline_fit(sample: &BivariateSample, basis_dim: usize, smoothing_param: f64) -> Result<SplineFit> {
    if !(smoothing_param >= 0.0 && smoothing_param.is_finite()) {
        return Err(CdspError::InvalidInput(format!(
            "smoothing parameter must be non-negative, got {smoothing_param}"
        )));
    }
    let (x, y) = oriented_xy(sample);
    let problem = PenalizedProblem::new(x, y, basis_dim)?;
    problem.solve(smoothing_param).map(|(fit, _)| fit)
}

/// Profiles λ over a log grid spanning `[1e-6, 1e6]` times the trace ratio
/// `tr(BᵀB)/tr(P)` and returns the fit maximising the marginal likelihood.
pub fn select_smoothing(sample: &BivariateSample, basis_dim: usize) -> Result<SplineFit> {
    let (x, y) = oriented_xy(sample);
    let problem = PenalizedProblem::new(x, y, basis_dim)?;
    let n = x.len() as f64;
    let k = problem.k;

    let eig = SymmetricEigen::new(problem.penalty.clone());
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let range: Vec<usize> = order[..k - 2].to_vec();
    let s: Vec<f64> = range.iter().map(|&j| eig.eigenvalues[j]).collect();
    if s.iter().any(|&v| !(v > 0.0)) {
        return Err(CdspError::Numeric("penalty range eigenvalues not positive".into()));
    }
    let r = DMatrix::from_fn(k, k - 2, |i, c| eig.eigenvectors[(i, range[c])]);
    let rgr = r.transpose() * &problem.gram * &r;
    let log_s: f64 = s.iter().map(|v| v.ln()).sum();

    let scale = problem.lambda_scale();
    let mut best: Option<(f64, usize, SplineFit)> = None;
    for g in 0..GRID_POINTS {
        let log10 = GRID_LOG10_MIN + (GRID_LOG10_MAX - GRID_LOG10_MIN) * g as f64 / (GRID_POINTS - 1) as f64;
        let lambda = scale * 10f64.powf(log10);
        let (fit, penalised) = problem.solve(lambda)?;
        let mut m = rgr.clone();
        for (c, sv) in s.iter().enumerate() {
            m[(c, c)] += lambda * sv;
        }
        let logdet = match Cholesky::new(m) {
            Some(ch) => 2.0 * ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
            None => continue,
        };
        let criterion = n * (penalised.max(f64::MIN_POSITIVE) / n).ln() + logdet
            - (k - 2) as f64 * lambda.ln()
            - log_s;
        if best.as_ref().is_none_or(|(c, _, _)| criterion < *c) {
            best = Some((criterion, g, fit));
        }
    }
    let (_, idx, fit) = best.ok_or_else(|| CdspError::Numeric("no admissible smoothing parameter".into()))?;
    if idx == 0 || idx == GRID_POINTS - 1 {
        log::warn!(
            "smoothing parameter selected at grid endpoint (λ = {:e}, edf = {:.3})",
            fit.smoothing_param,
            fit.edf
        );
    }
    Ok(fit)
}

/// `BIC = n ln(rss/n) + p ln n`; `p = 3` for the line (two coefficients and
/// the error variance), `p = edf + 1` for the spline. Linear wins ties.
pub fn bic_linear_vs_spline(sample: &BivariateSample) -> Result<BicComparison> {
    let n = sample.n();
    if n <= 12 {
        return Err(CdspError::InvalidInput(format!(
            "linearity classification needs more than 12 observations, got {n}"
        )));
    }
    let nf = n as f64;
    let linear = ols_fit(sample, Direction::XToY)?;
    let spline = select_smoothing(sample, DEFAULT_BASIS_DIM)?;
    let bic = |rss: f64, p: f64| nf * (rss / nf).ln() + p * nf.ln();
    let bic_linear = bic(linear.rss, 3.0);
    let bic_spline = bic(spline.rss, spline.edf + 1.0);
    let class = if bic_linear <= bic_spline {
        Linearity::Linear
    } else {
        Linearity::Nonlinear
    };
    Ok(BicComparison {
        class,
        bic_linear,
        bic_spline,
        spline_edf: spline.edf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn basis_is_partition_of_unity() {
        let x: Vec<f64> = grid(57).into_iter().map(|v| v * v * 4.0 - 1.0).collect();
        let mut d = x.clone();
        d.sort_by(f64::total_cmp);
        d.dedup();
        let knots = quantile_knots(&d, 10);
        for &xi in &x {
            let row = bspline_row(&knots, 10, xi);
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert!(row.iter().all(|&b| b >= -1e-15));
        }
    }

    #[test]
    fn penalty_annihilates_lines() {
        let d = grid(30);
        let knots = quantile_knots(&d, 10);
        let p = divided_difference_penalty(&knots, 10);
        let g = DVector::from_vec(greville(&knots, 10));
        let line = g.map(|v| 2.0 - 3.0 * v);
        assert!((&p * line).norm() < 1e-9);
    }

    #[test]
    fn huge_penalty_collapses_to_ols_line() {
        let x = grid(60);
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v + 0.05 * (17.0 * v).sin()).collect();
        let s = BivariateSample::new(x, y).unwrap();
        let fit = spline_fit(&s, 10, 1e8).unwrap();
        let ols = ols_fit(&s, Direction::XToY).unwrap();
        assert_abs_diff_eq!(fit.edf, 2.0, epsilon = 1e-3);
        for (f, (xi, yi)) in fit.fitted.iter().zip(s.xs().iter().zip(s.ys())) {
            let _ = yi;
            assert_abs_diff_eq!(*f, ols.intercept + ols.slope * xi, epsilon = 1e-6);
        }
    }

    #[test]
    fn no_penalty_nearly_interpolates_smooth_data() {
        let n = 12;
        let x = grid(n);
        let y: Vec<f64> = x.iter().map(|v| (1.5 * v).sin()).collect();
        let s = BivariateSample::new(x, y).unwrap();
        let fit = spline_fit(&s, n - 1, 0.0).unwrap();
        assert!(fit.rss < 1e-8, "rss {}", fit.rss);
        assert_abs_diff_eq!(fit.edf, (n - 1) as f64, epsilon = 1e-8);
    }

    #[test]
    fn edf_is_monotone_in_lambda() {
        let x = grid(80);
        let y: Vec<f64> = x.iter().map(|v| (6.0 * v).sin() + 0.1 * (40.0 * v).cos()).collect();
        let s = BivariateSample::new(x, y).unwrap();
        let mut prev = f64::INFINITY;
        for e in -4..8 {
            let fit = spline_fit(&s, 10, 10f64.powi(e)).unwrap();
            assert!(fit.edf <= prev + 1e-9);
            assert!(fit.edf >= 1.0 && fit.edf <= 10.0 + 1e-9);
            prev = fit.edf;
        }
    }

    #[test]
    fn too_few_distinct_values() {
        let x: Vec<f64> = (0..40).map(|i| (i % 5) as f64).collect();
        let y: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let s = BivariateSample::new(x, y).unwrap();
        assert!(matches!(spline_fit(&s, 10, 1.0), Err(CdspError::RankDeficient(_))));
    }

    #[test]
    fn bic_needs_more_than_twelve_points() {
        let x = grid(12);
        let s = BivariateSample::new(x.clone(), x).unwrap();
        assert!(bic_linear_vs_spline(&s).is_err());
    }
}
