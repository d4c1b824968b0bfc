//! Direction estimation from directional detectability indices.
//!
//! For each orientation the index is `(θ̂ − ĉ/n) / σ̂`, where `θ̂` and `σ̂` are
//! the mean and standard deviation of the predictor–residual HSIC over
//! paired bootstrap resamples and `ĉ` is the null-bootstrap critical value of
//! `n·T` on the original data. The orientation whose null departs *more*
//! (relative to its variability) is the one that is rejected; the other is
//! reported as the causal direction. Support for the decision is the share of
//! outer bootstrap resamples on which the whole procedure repeats it.
//!
//! Naming: `xtoy` quantities come from regressing y on x (the null that
//! holds when X causes Y), `ytox` from regressing x on y.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CdspError, Result};
use crate::gof::{check_alpha, check_boot, decide, null_bootstrap_critical, resample_indices, TestDecision, MAX_RETRIES};
use crate::kernel::predictor_residual_hsic;
use crate::regress::ols_fit;
use crate::rng::{derive_seed, substream, TAG_OUTER, TAG_PAIRED};
use crate::sample::{BivariateSample, Direction};

pub const MIN_CDSP_SAMPLE: usize = 20;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_BOOT_OUTER: usize = 100;
pub const DEFAULT_BOOT_INNER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalDirection {
    XToY,
    YToX,
    Inconclusive,
}

impl CausalDirection {
    pub fn label(self) -> &'static str {
        match self {
            CausalDirection::XToY => "x_to_y",
            CausalDirection::YToX => "y_to_x",
            CausalDirection::Inconclusive => "inconclusive",
        }
    }

    pub fn swapped(self) -> CausalDirection {
        match self {
            CausalDirection::XToY => CausalDirection::YToX,
            CausalDirection::YToX => CausalDirection::XToY,
            CausalDirection::Inconclusive => CausalDirection::Inconclusive,
        }
    }

    /// Decision implied by the ordering of the two indices.
    pub fn from_indices(index_xtoy: f64, index_ytox: f64) -> CausalDirection {
        if index_ytox > index_xtoy {
            CausalDirection::XToY
        } else if index_xtoy > index_ytox {
            CausalDirection::YToX
        } else {
            CausalDirection::Inconclusive
        }
    }
}

impl From<Direction> for CausalDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::XToY => CausalDirection::XToY,
            Direction::YToX => CausalDirection::YToX,
        }
    }
}

/// Bootstrap estimates for one orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionalEstimates {
    pub direction: Direction,
    /// Bootstrap mean of the HSIC statistic.
    pub theta_hat: f64,
    /// Bootstrap standard deviation (ddof = 1) of the raw statistic.
    pub sigma_hat: f64,
    pub c_hat_over_n: f64,
    pub index_hat: f64,
    /// Statistic on the original sample.
    pub statistic: f64,
    pub decision: TestDecision,
}

impl DirectionalEstimates {
    fn from_parts(
        direction: Direction,
        boot: &[f64],
        statistic: f64,
        c_hat_over_n: f64,
        decision: TestDecision,
    ) -> Result<Self> {
        let (theta_hat, sigma_hat) = mean_sd(boot);
        if !(sigma_hat > 0.0 && sigma_hat.is_finite()) {
            return Err(CdspError::Degenerate(format!(
                "bootstrap standard deviation of the {} statistic is {sigma_hat}",
                direction.label()
            )));
        }
        Ok(DirectionalEstimates {
            direction,
            theta_hat,
            sigma_hat,
            c_hat_over_n,
            index_hat: (theta_hat - c_hat_over_n) / sigma_hat,
            statistic,
            decision,
        })
    }
}

/// Mean and ddof=1 standard deviation.
pub(crate) fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Algorithm settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdspConfig {
    pub alpha: f64,
    /// Replicates for the directional estimates and critical values.
    pub n_boot_inner: usize,
    /// Replicates for the support probability.
    pub n_boot_outer: usize,
}

impl Default for CdspConfig {
    fn default() -> Self {
        CdspConfig {
            alpha: DEFAULT_ALPHA,
            n_boot_inner: DEFAULT_BOOT_INNER,
            n_boot_outer: DEFAULT_BOOT_OUTER,
        }
    }
}

impl CdspConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_boot(self.n_boot_inner)?;
        check_boot(self.n_boot_outer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub direction: CausalDirection,
    pub xtoy: DirectionalEstimates,
    pub ytox: DirectionalEstimates,
}

impl PointEstimate {
    /// Rejection of the null for the X -> Y working model.
    pub fn reject_y(&self) -> bool {
        self.xtoy.decision.is_reject()
    }

    /// Rejection of the null for the Y -> X working model.
    pub fn reject_x(&self) -> bool {
        self.ytox.decision.is_reject()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdspResult {
    pub direction: CausalDirection,
    pub p_cdsp: f64,
    pub favorable: usize,
    pub estimates_xtoy: DirectionalEstimates,
    pub estimates_ytox: DirectionalEstimates,
    pub reject_y: bool,
    pub reject_x: bool,
    pub n_boot_outer: usize,
    pub n_boot_inner: usize,
    pub seed: u64,
    /// `(index_xtoy, index_ytox)` for each outer replicate.
    pub replicate_indices: Vec<(f64, f64)>,
}

impl CdspResult {
    pub fn support(&self) -> SupportCategory {
        // p_cdsp is a ratio of counts and always lies in [0, 1]
        support_category(self.p_cdsp).unwrap_or(SupportCategory::NoLittle)
    }
}

fn check_sample(sample: &BivariateSample) -> Result<()> {
    if sample.n() < MIN_CDSP_SAMPLE {
        return Err(CdspError::InvalidInput(format!(
            "need at least {MIN_CDSP_SAMPLE} observations, got {}",
            sample.n()
        )));
    }
    Ok(())
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Paired resample `b`, retried on fresh substreams while a column is constant.
fn paired_resample(sample: &BivariateSample, tag: u64, seed: u64, b: usize) -> Result<BivariateSample> {
    for attempt in 0..MAX_RETRIES {
        let mut rng = substream(seed, &[tag, b as u64, attempt]);
        let idx = resample_indices(&mut rng, sample.n());
        let rs = sample.select(&idx);
        if !is_constant(rs.xs()) && !is_constant(rs.ys()) {
            return Ok(rs);
        }
    }
    Err(CdspError::Degenerate(format!(
        "bootstrap replicate {b}: {MAX_RETRIES} consecutive resamples with a constant column"
    )))
}

fn oriented_statistic(sample: &BivariateSample, direction: Direction) -> Result<f64> {
    let fit = ols_fit(sample, direction)?;
    let (p, _) = sample.oriented(direction);
    Ok(predictor_residual_hsic(p, &fit.residuals)?.value)
}

/// Paired-bootstrap statistics for the requested orientations, in replicate order.
fn paired_bootstrap(
    sample: &BivariateSample,
    directions: &[Direction],
    n_boot: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let rs = paired_resample(sample, TAG_PAIRED, seed, b)?;
            directions.iter().map(|&d| oriented_statistic(&rs, d)).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..directions.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect())
}

fn finish_direction(
    sample: &BivariateSample,
    direction: Direction,
    boot: &[f64],
    alpha: f64,
    n_boot: usize,
    seed: u64,
) -> Result<DirectionalEstimates> {
    let fit = ols_fit(sample, direction)?;
    let (p, _) = sample.oriented(direction);
    let stat = predictor_residual_hsic(p, &fit.residuals)?;
    let crit = null_bootstrap_critical(sample, direction, alpha, n_boot, seed)?;
    let decision = decide(&stat, &crit)?;
    DirectionalEstimates::from_parts(direction, boot, stat.value, crit.c_alpha_over_n, decision)
}

/// θ̂, σ̂, ĉ/n and the detectability index for one orientation.
pub fn estimate_direction_quantities(
    sample: &BivariateSample,
    direction: Direction,
    alpha: f64,
    n_boot: usize,
    seed: u64,
) -> Result<DirectionalEstimates> {
    check_sample(sample)?;
    check_alpha(alpha)?;
    check_boot(n_boot)?;
    let boot = paired_bootstrap(sample, &[direction], n_boot, seed)?;
    finish_direction(sample, direction, &boot[0], alpha, n_boot, seed)
}

/// Both orientations' estimates and the implied direction. Both orientations
/// share the same paired resamples.
pub fn cdsp_point_estimate(sample: &BivariateSample, alpha: f64, n_boot: usize, seed: u64) -> Result<PointEstimate> {
    check_sample(sample)?;
    check_alpha(alpha)?;
    check_boot(n_boot)?;
    let boot = paired_bootstrap(sample, &[Direction::XToY, Direction::YToX], n_boot, seed)?;
    let (xtoy, ytox) = rayon::join(
        || finish_direction(sample, Direction::XToY, &boot[0], alpha, n_boot, seed),
        || finish_direction(sample, Direction::YToX, &boot[1], alpha, n_boot, seed),
    );
    let (xtoy, ytox) = (xtoy?, ytox?);
    Ok(PointEstimate {
        direction: CausalDirection::from_indices(xtoy.index_hat, ytox.index_hat),
        xtoy,
        ytox,
    })
}

/// Point estimate plus the nested-bootstrap support probability.
///
/// Cost is `O(B_outer · B_inner · n²)` kernel evaluations.
pub fn cdsp_support_probability(sample: &BivariateSample, config: &CdspConfig, seed: u64) -> Result<CdspResult> {
    config.validate()?;
    check_sample(sample)?;
    let point = cdsp_point_estimate(sample, config.alpha, config.n_boot_inner, seed)?;
    let replicate_indices: Vec<(f64, f64)> = (0..config.n_boot_outer)
        .into_par_iter()
        .map(|b| {
            let rs = paired_resample(sample, TAG_OUTER, seed, b)?;
            let inner_seed = derive_seed(seed, &[TAG_OUTER, b as u64]);
            let pe = cdsp_point_estimate(&rs, config.alpha, config.n_boot_inner, inner_seed)?;
            Ok((pe.xtoy.index_hat, pe.ytox.index_hat))
        })
        .collect::<Result<_>>()?;
    let favorable = replicate_indices
        .iter()
        .filter(|&&(ix, iy)| CausalDirection::from_indices(ix, iy) == point.direction)
        .count();
    Ok(CdspResult {
        direction: point.direction,
        p_cdsp: favorable as f64 / config.n_boot_outer as f64,
        favorable,
        reject_y: point.reject_y(),
        reject_x: point.reject_x(),
        estimates_xtoy: point.xtoy,
        estimates_ytox: point.ytox,
        n_boot_outer: config.n_boot_outer,
        n_boot_inner: config.n_boot_inner,
        seed,
        replicate_indices,
    })
}

/// Interpretation bins for the support probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportCategory {
    NoLittle,
    Weak,
    Moderate,
    Strong,
    VeryStrong,
}

impl SupportCategory {
    pub const ALL: [SupportCategory; 5] = [
        SupportCategory::NoLittle,
        SupportCategory::Weak,
        SupportCategory::Moderate,
        SupportCategory::Strong,
        SupportCategory::VeryStrong,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SupportCategory::NoLittle => "No/little",
            SupportCategory::Weak => "Weak",
            SupportCategory::Moderate => "Moderate",
            SupportCategory::Strong => "Strong",
            SupportCategory::VeryStrong => "Very strong",
        }
    }
}

impl fmt::Display for SupportCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Bins: `[0, 0.55)` no/little, `[0.55, 0.7)` weak, `[0.7, 0.8)` moderate,
/// `[0.8, 0.9)` strong, `[0.9, 1]` very strong.
pub fn support_category(p: f64) -> Result<SupportCategory> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CdspError::InvalidInput(format!("support probability {p} outside [0, 1]")));
    }
    Ok(if p >= 0.9 {
        SupportCategory::VeryStrong
    } else if p >= 0.8 {
        SupportCategory::Strong
    } else if p >= 0.7 {
        SupportCategory::Moderate
    } else if p >= 0.55 {
        SupportCategory::Weak
    } else {
        SupportCategory::NoLittle
    })
}
