//! Two-variable DirectLiNGAM with HSIC as the dependence measure.
//!
//! With two variables the causal ordering search reduces to one comparison:
//! standardise both columns, regress each on the other, and pick the
//! orientation whose predictor is less dependent on its residual.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CdspError, Result};
use crate::gof::{check_boot, resample_indices};
use crate::kernel::predictor_residual_hsic;
use crate::regress::ols_fit;
use crate::rng::{substream, TAG_LINGAM};
use crate::sample::{BivariateSample, Direction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LingamDecision {
    pub direction: Direction,
    pub dep_xtoy: f64,
    pub dep_ytox: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LingamResult {
    pub direction: Direction,
    pub dep_xtoy: f64,
    pub dep_ytox: f64,
    /// Share of resamples repeating the full-sample decision.
    pub bootstrap_rate: f64,
    pub n_boot: usize,
}

fn standardize(v: &[f64]) -> Result<Vec<f64>> {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) || v.iter().all(|&x| x == v[0]) {
        return Err(CdspError::Degenerate("column has zero variance".into()));
    }
    let sd = var.sqrt();
    Ok(v.iter().map(|x| (x - mean) / sd).collect())
}

/// Smaller predictor–residual HSIC wins; an exact tie goes to X -> Y.
pub fn lingam_direction(sample: &BivariateSample) -> Result<LingamDecision> {
    let std = BivariateSample::new(standardize(sample.xs())?, standardize(sample.ys())?)?;
    let dep = |d: Direction| -> Result<f64> {
        let fit = ols_fit(&std, d)?;
        let (p, _) = std.oriented(d);
        Ok(predictor_residual_hsic(p, &fit.residuals)?.value)
    };
    let dep_xtoy = dep(Direction::XToY)?;
    let dep_ytox = dep(Direction::YToX)?;
    let direction = if dep_xtoy <= dep_ytox {
        Direction::XToY
    } else {
        Direction::YToX
    };
    Ok(LingamDecision {
        direction,
        dep_xtoy,
        dep_ytox,
    })
}

/// Full-sample decision plus its paired-bootstrap selection rate.
pub fn lingam_bootstrap_rate(sample: &BivariateSample, n_boot: usize, seed: u64) -> Result<LingamResult> {
    check_boot(n_boot)?;
    let full = lingam_direction(sample)?;
    let n = sample.n();
    let agree: Vec<bool> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let mut last = None;
            for attempt in 0..crate::gof::MAX_RETRIES {
                let mut rng = substream(seed, &[TAG_LINGAM, b as u64, attempt]);
                let rs = sample.select(&resample_indices(&mut rng, n));
                match lingam_direction(&rs) {
                    Ok(d) => return Ok(d.direction == full.direction),
                    Err(e) if e.is_degenerate() => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(last.unwrap_or_else(|| CdspError::Degenerate("degenerate resample".into())))
        })
        .collect::<Result<_>>()?;
    let hits = agree.iter().filter(|&&a| a).count();
    Ok(LingamResult {
        direction: full.direction,
        dep_xtoy: full.dep_xtoy,
        dep_ytox: full.dep_ytox,
        bootstrap_rate: hits as f64 / n_boot as f64,
        n_boot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn uniform_noise_sample(n: usize, seed: u64) -> BivariateSample {
        let mut rng = substream(seed, &[]);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x + 0.6 * rng.random_range(-1.0..1.0)).collect();
        BivariateSample::new(xs, ys).unwrap()
    }

    #[test]
    fn noiseless_line_is_a_tie_resolved_to_x_to_y() {
        let xs: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let s = BivariateSample::new(xs, ys).unwrap();
        let d = lingam_direction(&s).unwrap();
        assert_eq!(d.dep_xtoy, d.dep_ytox);
        assert_eq!(d.direction, Direction::XToY);
    }

    #[test]
    fn uniform_noise_linear_model_is_identified() {
        let s = uniform_noise_sample(300, 1);
        assert_eq!(lingam_direction(&s).unwrap().direction, Direction::XToY);
    }

    #[test]
    fn swapping_columns_flips_decision() {
        for seed in 0..5 {
            let s = uniform_noise_sample(80, seed);
            let a = lingam_direction(&s).unwrap();
            let b = lingam_direction(&s.swapped()).unwrap();
            assert_eq!(a.dep_xtoy, b.dep_ytox);
            if a.dep_xtoy != a.dep_ytox {
                assert_eq!(b.direction, a.direction.reversed());
            }
        }
    }

    #[test]
    fn affine_rescaling_leaves_decision_unchanged() {
        let s = uniform_noise_sample(120, 3);
        let t = s.map_columns(|x| 4.0 * x - 7.0, |y| 0.25 * y + 100.0).unwrap();
        assert_eq!(lingam_direction(&s).unwrap().direction, lingam_direction(&t).unwrap().direction);
    }

    #[test]
    fn bootstrap_rate_bounds_and_determinism() {
        let s = uniform_noise_sample(60, 4);
        let a = lingam_bootstrap_rate(&s, 50, 2).unwrap();
        assert!((0.0..=1.0).contains(&a.bootstrap_rate));
        assert_eq!(a, lingam_bootstrap_rate(&s, 50, 2).unwrap());
        assert!(lingam_bootstrap_rate(&s, 10, 2).is_err());
    }

    #[test]
    fn constant_column_is_degenerate() {
        let s = BivariateSample::new(vec![1.0; 10], (0..10).map(|i| i as f64).collect()).unwrap();
        assert!(lingam_direction(&s).unwrap_err().is_degenerate());
    }
}
