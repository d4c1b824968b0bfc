use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdsp::{mean_sd, CausalDirection};
use crate::error::{CdspError, Result};
use crate::kernel::directional_statistic;
use crate::regress::ols_fit;
use crate::rng::{substream, TAG_ORACLE};
use crate::sample::{BivariateSample, Direction};

use super::scenario::{generate, generate_n, SimScenario};

pub const DESK_N_MC: usize = 20_000;
pub const FULL_N_MC: usize = 100_000;

/// Monte Carlo stand-ins for the population indices. The critical-value
/// term is dropped: it vanishes at rate `1/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleQuantities {
    pub theta_xtoy: f64,
    pub theta_ytox: f64,
    /// `√n` times the across-replication sd of the X -> Y statistic.
    pub sigma_xtoy: f64,
    pub sigma_ytox: f64,
    /// Index of the reverse (Y -> X) fit.
    pub i_x: f64,
    /// Index of the forward (X -> Y) fit.
    pub i_y: f64,
    pub n_mc: usize,
    pub m_reps_for_sigma: usize,
}

impl OracleQuantities {
    pub fn asymmetry_holds(&self) -> bool {
        self.i_x > self.i_y
    }

    /// Direction a perfectly estimated CDSP would report.
    pub fn favored_direction(&self) -> CausalDirection {
        CausalDirection::from_indices(self.i_y, self.i_x)
    }
}

fn statistic(sample: &BivariateSample, d: Direction) -> Result<f64> {
    let fit = ols_fit(sample, d)?;
    Ok(directional_statistic(sample, d, &fit)?.value)
}

/// Statistics of both orientations on one large sample.
pub fn population_thetas(scenario: &SimScenario, n_mc: usize) -> Result<(f64, f64)> {
    scenario.validate()?;
    let mut rng = substream(scenario.seed, &[TAG_ORACLE]);
    let big = generate_n(scenario, n_mc, &mut rng)?;
    Ok((statistic(&big, Direction::XToY)?, statistic(&big, Direction::YToX)?))
}

pub fn estimate_oracle(scenario: &SimScenario, n_mc: usize, m_reps_for_sigma: usize) -> Result<OracleQuantities> {
    scenario.validate()?;
    if n_mc < 10 * scenario.n {
        return Err(CdspError::InvalidInput(format!(
            "oracle sample of {n_mc} is below ten times the replication size {}",
            scenario.n
        )));
    }
    if m_reps_for_sigma < 2 {
        return Err(CdspError::InvalidInput("need at least two replications for sigma".into()));
    }
    let (theta_xtoy, theta_ytox) = population_thetas(scenario, n_mc)?;
    let per_rep: Vec<(f64, f64)> = (0..m_reps_for_sigma)
        .into_par_iter()
        .map(|m| {
            let s = generate(scenario, m)?;
            Ok((statistic(&s, Direction::XToY)?, statistic(&s, Direction::YToX)?))
        })
        .collect::<Result<_>>()?;
    let root_n = (scenario.n as f64).sqrt();
    let (_, sd_xtoy) = mean_sd(&per_rep.iter().map(|p| p.0).collect::<Vec<_>>());
    let (_, sd_ytox) = mean_sd(&per_rep.iter().map(|p| p.1).collect::<Vec<_>>());
    let (sigma_xtoy, sigma_ytox) = (root_n * sd_xtoy, root_n * sd_ytox);
    if !(sigma_xtoy > 0.0 && sigma_ytox > 0.0) {
        return Err(CdspError::Degenerate("replication statistics have zero spread".into()));
    }
    Ok(OracleQuantities {
        theta_xtoy,
        theta_ytox,
        sigma_xtoy,
        sigma_ytox,
        i_x: theta_ytox / sigma_ytox,
        i_y: theta_xtoy / sigma_xtoy,
        n_mc,
        m_reps_for_sigma,
    })
}
