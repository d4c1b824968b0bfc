//! Bootstrap calibration of the joint independence and linear-fit null.
//!
//! The bootstrap world imposes both parts of the null: predictors and
//! centred residuals are resampled independently and recombined through the
//! fitted line, then the line is refitted and the HSIC statistic recomputed.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CdspError, Result};
use crate::kernel::{predictor_residual_hsic, HsicStatistic};
use crate::regress::{ols_fit, ols_oriented};
use crate::rng::{substream, StreamRng, TAG_NULL};
use crate::sample::{BivariateSample, Direction};

pub const MIN_BOOTSTRAP: usize = 50;
/// Fresh substreams tried when a resample is degenerate.
pub(crate) const MAX_RETRIES: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub level_alpha: f64,
    /// Critical value on the `n * T` scale.
    pub c_alpha: f64,
    pub c_alpha_over_n: f64,
    pub n: usize,
    pub n_boot: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestDecision {
    Reject,
    FailToReject,
}

impl TestDecision {
    pub fn is_reject(self) -> bool {
        self == TestDecision::Reject
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CdspError::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

pub(crate) fn check_boot(n_boot: usize) -> Result<()> {
    if n_boot < MIN_BOOTSTRAP {
        Err(CdspError::InsufficientReplicates {
            min: MIN_BOOTSTRAP,
            got: n_boot,
        })
    } else {
        Ok(())
    }
}

/// Type-7 (linear interpolation) empirical quantile of sorted data.
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    debug_assert!(m > 0);
    let h = (m - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= m {
        return sorted[m - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Draws `n` indices uniformly with replacement.
pub(crate) fn resample_indices(rng: &mut StreamRng, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Null-bootstrap replicates of `n * T` for one orientation, in replicate order.
pub fn null_bootstrap_statistics(
    sample: &BivariateSample,
    direction: Direction,
    n_boot: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let fit = ols_fit(sample, direction)?;
    let (predictor, _) = sample.oriented(direction);
    let n = sample.n();
    let mean_resid = fit.residuals.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = fit.residuals.iter().map(|e| e - mean_resid).collect();

    let replicate = |b: usize| -> Result<f64> {
        let mut last_err = None;
        for attempt in 0..MAX_RETRIES {
            // Streams are keyed without the orientation so that exchanging the
            // columns exchanges the two directions' bootstrap worlds exactly.
            let mut rng = substream(seed, &[TAG_NULL, b as u64, attempt]);
            let xi = resample_indices(&mut rng, n);
            let ei = resample_indices(&mut rng, n);
            let xs: Vec<f64> = xi.iter().map(|&i| predictor[i]).collect();
            let ys: Vec<f64> = xs
                .iter()
                .zip(&ei)
                .map(|(&x, &j)| fit.intercept + fit.slope * x + centred[j])
                .collect();
            match ols_oriented(&xs, &ys, direction) {
                Ok(refit) => {
                    let t = predictor_residual_hsic(&xs, &refit.residuals)?;
                    return Ok(t.scaled());
                }
                Err(e) if e.is_degenerate() => last_err = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last_err.unwrap_or_else(|| CdspError::Degenerate("degenerate resample".into())))
    };
    (0..n_boot).into_par_iter().map(replicate).collect()
}

/// Level-α critical value for `n * T` in the given orientation.
pub fn null_bootstrap_critical(
    sample: &BivariateSample,
    direction: Direction,
    alpha: f64,
    n_boot: usize,
    seed: u64,
) -> Result<CriticalValue> {
    check_alpha(alpha)?;
    check_boot(n_boot)?;
    let mut stats = null_bootstrap_statistics(sample, direction, n_boot, seed)?;
    stats.sort_by(f64::total_cmp);
    let c_alpha = quantile_type7(&stats, 1.0 - alpha).max(0.0);
    let n = sample.n();
    Ok(CriticalValue {
        level_alpha: alpha,
        c_alpha,
        c_alpha_over_n: c_alpha / n as f64,
        n,
        n_boot,
    })
}

/// Reject iff `n * T > c_alpha` (strict).
pub fn decide(statistic: &HsicStatistic, crit: &CriticalValue) -> Result<TestDecision> {
    if statistic.n != crit.n {
        return Err(CdspError::DimensionMismatch {
            left: statistic.n,
            right: crit.n,
        });
    }
    Ok(if statistic.scaled() > crit.c_alpha {
        TestDecision::Reject
    } else {
        TestDecision::FailToReject
    })
}
