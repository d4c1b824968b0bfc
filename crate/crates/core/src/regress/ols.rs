use serde::{Deserialize, Serialize};

use crate::error::{CdspError, Result};
use crate::sample::{BivariateSample, Direction};

/// Least-squares line with intercept, fitted in one orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    /// Response minus fitted value, in input order.
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub direction: Direction,
}

pub fn ols_fit(sample: &BivariateSample, direction: Direction) -> Result<LinearFit> {
    let (p, r) = sample.oriented(direction);
    ols_oriented(p, r, direction)
}

/// OLS of `response` on `predictor` using centred sums.
pub fn ols_oriented(predictor: &[f64], response: &[f64], direction: Direction) -> Result<LinearFit> {
    if predictor.len() != response.len() {
        return Err(CdspError::DimensionMismatch {
            left: predictor.len(),
            right: response.len(),
        });
    }
    let n = predictor.len();
    if n < 2 {
        return Err(CdspError::InvalidInput("OLS needs at least two points".into()));
    }
    let nf = n as f64;
    let mx = predictor.iter().sum::<f64>() / nf;
    let my = response.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in predictor.iter().zip(response) {
        let dx = x - mx;
        sxx += dx * dx;
        sxy += dx * (y - my);
    }
    if !(sxx > 0.0) || predictor.iter().all(|&x| x == predictor[0]) {
        return Err(CdspError::Degenerate(format!(
            "predictor ({}) has zero variance",
            match direction {
                Direction::XToY => "x",
                Direction::YToX => "y",
            }
        )));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = predictor
        .iter()
        .zip(response)
        .map(|(&x, &y)| y - (intercept + slope * x))
        .collect();
    let rss = residuals.iter().map(|e| e * e).sum();
    Ok(LinearFit {
        intercept,
        slope,
        residuals,
        rss,
        direction,
    })
}
