use serde::Serialize;

use crate::cdsp::CausalDirection;
use crate::error::{CdspError, Result};
use crate::report::{finish_csv, histograms_csv, shared_histograms, to_json_pretty};

use super::experiment::{AccuracyReport, ExperimentConfig};
use super::oracle::OracleQuantities;
use super::scenario::SimScenario;

#[derive(Serialize)]
struct Row<'a> {
    rep_index: usize,
    cdsp_direction: &'a str,
    cdsp_correct: bool,
    lingam_direction: &'a str,
    lingam_correct: bool,
    i_hat_x: Option<f64>,
    i_hat_y: Option<f64>,
    reject_x: Option<bool>,
    reject_y: Option<bool>,
    error: &'a str,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario: &'a SimScenario,
    config: &'a ExperimentConfig,
    oracle: &'a OracleQuantities,
    oracle_direction: CausalDirection,
    asymmetry_holds: bool,
    cdsp_accuracy: f64,
    lingam_accuracy: f64,
    completed: usize,
    failures: usize,
    directional_power_gap: f64,
    mean_index_gap: f64,
}

impl AccuracyReport {
    /// One row per replication.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.per_rep {
            w.serialize(Row {
                rep_index: r.rep_index,
                cdsp_direction: r.cdsp_direction.map_or("", |d| d.label()),
                cdsp_correct: r.cdsp_direction == Some(self.oracle_direction),
                lingam_direction: r.lingam_direction.map_or("", |d| d.label()),
                lingam_correct: !r.failed() && r.lingam_direction == Some(crate::sample::Direction::XToY),
                i_hat_x: r.i_hat_x,
                i_hat_y: r.i_hat_y,
                reject_x: r.reject_x,
                reject_y: r.reject_y,
                error: r.error.as_deref().unwrap_or(""),
            })
            .map_err(|e| CdspError::Serialize(e.to_string()))?;
        }
        finish_csv(w)
    }

    pub fn summary_json(&self) -> Result<String> {
        to_json_pretty(&Summary {
            scenario: &self.scenario,
            config: &self.config,
            oracle: &self.oracle,
            oracle_direction: self.oracle_direction,
            asymmetry_holds: self.asymmetry_holds,
            cdsp_accuracy: self.cdsp_accuracy,
            lingam_accuracy: self.lingam_accuracy,
            completed: self.completed,
            failures: self.failures,
            directional_power_gap: self.directional_power_gap(),
            mean_index_gap: self.mean_index_gap(),
        })
    }

    /// Distribution of the estimated indices across replications.
    pub fn index_histogram_csv(&self, bins: usize) -> Result<String> {
        let xs: Vec<f64> = self.per_rep.iter().filter_map(|r| r.i_hat_x).collect();
        let ys: Vec<f64> = self.per_rep.iter().filter_map(|r| r.i_hat_y).collect();
        histograms_csv(&shared_histograms(&[("i_hat_x", xs), ("i_hat_y", ys)], bins))
    }
}
