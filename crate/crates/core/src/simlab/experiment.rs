use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdsp::{cdsp_point_estimate, CausalDirection, CdspConfig};
use crate::error::{CdspError, Result};
use crate::lingam::lingam_direction;
use crate::rng::{derive_seed, TAG_REPLICATION};
use crate::sample::Direction;

use super::oracle::{estimate_oracle, OracleQuantities, DESK_N_MC};
use super::scenario::{generate, SimScenario};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub cdsp: CdspConfig,
    pub n_mc: usize,
    /// Replications used for the oracle sigmas; `None` means `m_reps`.
    pub sigma_reps: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            cdsp: CdspConfig::default(),
            n_mc: DESK_N_MC,
            sigma_reps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep_index: usize,
    pub cdsp_direction: Option<CausalDirection>,
    pub lingam_direction: Option<Direction>,
    /// Estimated index of the reverse (Y -> X) fit.
    pub i_hat_x: Option<f64>,
    pub i_hat_y: Option<f64>,
    pub reject_x: Option<bool>,
    pub reject_y: Option<bool>,
    pub error: Option<String>,
}

impl ReplicationRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub scenario: SimScenario,
    pub config: ExperimentConfig,
    pub oracle: OracleQuantities,
    pub asymmetry_holds: bool,
    pub oracle_direction: CausalDirection,
    pub cdsp_accuracy: f64,
    pub lingam_accuracy: f64,
    pub completed: usize,
    pub failures: usize,
    pub per_rep: Vec<ReplicationRecord>,
}

impl AccuracyReport {
    fn ok_reps(&self) -> impl Iterator<Item = &ReplicationRecord> {
        self.per_rep.iter().filter(|r| !r.failed())
    }

    /// `P(reject H_X only) − P(reject H_Y only)` over completed replications.
    pub fn directional_power_gap(&self) -> f64 {
        let (mut only_x, mut only_y) = (0usize, 0usize);
        for r in self.ok_reps() {
            match (r.reject_x, r.reject_y) {
                (Some(true), Some(false)) => only_x += 1,
                (Some(false), Some(true)) => only_y += 1,
                _ => {}
            }
        }
        (only_x as f64 - only_y as f64) / self.completed as f64
    }

    /// Mean of `Î_X − Î_Y` over completed replications.
    pub fn mean_index_gap(&self) -> f64 {
        self.ok_reps()
            .filter_map(|r| Some(r.i_hat_x? - r.i_hat_y?))
            .sum::<f64>()
            / self.completed as f64
    }
}

fn run_replication(scenario: &SimScenario, cdsp: &CdspConfig, rep: usize) -> ReplicationRecord {
    let mut record = ReplicationRecord {
        rep_index: rep,
        cdsp_direction: None,
        lingam_direction: None,
        i_hat_x: None,
        i_hat_y: None,
        reject_x: None,
        reject_y: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let sample = generate(scenario, rep)?;
        record.lingam_direction = Some(lingam_direction(&sample)?.direction);
        let seed = derive_seed(scenario.seed, &[TAG_REPLICATION, rep as u64]);
        let pe = cdsp_point_estimate(&sample, cdsp.alpha, cdsp.n_boot_inner, seed)?;
        record.cdsp_direction = Some(pe.direction);
        record.i_hat_x = Some(pe.ytox.index_hat);
        record.i_hat_y = Some(pe.xtoy.index_hat);
        record.reject_x = Some(pe.reject_x());
        record.reject_y = Some(pe.reject_y());
        Ok(())
    })();
    if let Err(e) = outcome {
        log::warn!("replication {rep} failed: {e}");
        record.error = Some(e.to_string());
    }
    record
}

/// Generates `m_reps` datasets and scores CDSP against the oracle-favoured
/// direction and LiNGAM against the true X -> Y.
pub fn run_accuracy_experiment(scenario: &SimScenario, config: &ExperimentConfig) -> Result<AccuracyReport> {
    scenario.validate()?;
    config.cdsp.validate()?;
    let oracle = estimate_oracle(scenario, config.n_mc, config.sigma_reps.unwrap_or(scenario.m_reps))?;
    let oracle_direction = oracle.favored_direction();
    let per_rep: Vec<ReplicationRecord> = (0..scenario.m_reps)
        .into_par_iter()
        .map(|m| run_replication(scenario, &config.cdsp, m))
        .collect();
    let failures = per_rep.iter().filter(|r| r.failed()).count();
    let completed = per_rep.len() - failures;
    if completed == 0 {
        return Err(CdspError::Degenerate(format!("all {} replications failed", per_rep.len())));
    }
    let cdsp_hits = per_rep
        .iter()
        .filter(|r| r.cdsp_direction == Some(oracle_direction))
        .count();
    let lingam_hits = per_rep
        .iter()
        .filter(|r| !r.failed() && r.lingam_direction == Some(Direction::XToY))
        .count();
    Ok(AccuracyReport {
        scenario: scenario.clone(),
        config: *config,
        asymmetry_holds: oracle.asymmetry_holds(),
        oracle_direction,
        oracle,
        cdsp_accuracy: cdsp_hits as f64 / completed as f64,
        lingam_accuracy: lingam_hits as f64 / completed as f64,
        completed,
        failures,
        per_rep,
    })
}
