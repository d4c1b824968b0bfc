use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdsp::{cdsp_support_probability, support_category, CausalDirection, CdspConfig, SupportCategory};
use crate::error::{CdspError, Result};
use crate::lingam::lingam_bootstrap_rate;
use crate::regress::Linearity;
use crate::report::{finish_csv, histograms_csv, shared_histograms, to_json_pretty};
use crate::rng::{derive_seed, key_of};
use crate::sample::Direction;

use super::ingest::BenchPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub cdsp: CdspConfig,
    pub lingam_boot: usize,
    pub seed: u64,
    /// Row cap applied at ingestion, echoed for the record.
    pub cap: Option<usize>,
    pub linear_only: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            cdsp: CdspConfig::default(),
            lingam_boot: crate::cdsp::DEFAULT_BOOT_OUTER,
            seed: 0,
            cap: Some(super::ingest::DEFAULT_CAP),
            linear_only: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOutcome {
    pub pair_id: String,
    pub n: usize,
    pub n_original: usize,
    pub ground_truth: Direction,
    pub weight: f64,
    pub linearity: Linearity,
    pub cdsp_direction: Option<CausalDirection>,
    pub p_cdsp: Option<f64>,
    pub cdsp_support: Option<SupportCategory>,
    pub cdsp_correct: Option<bool>,
    pub i_hat_x: Option<f64>,
    pub i_hat_y: Option<f64>,
    pub lingam_direction: Option<Direction>,
    pub lingam_rate: Option<f64>,
    pub lingam_support: Option<SupportCategory>,
    pub lingam_correct: Option<bool>,
    /// `(Î_X, Î_Y)` per outer bootstrap replicate.
    #[serde(skip)]
    pub replicate_indices: Vec<(f64, f64)>,
    pub error: Option<String>,
}

impl PairOutcome {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub decisions: usize,
    pub correct: usize,
    pub tdr: f64,
    pub fdr: f64,
    pub weighted_tdr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contingency {
    pub both_correct: usize,
    pub cdsp_only_correct: usize,
    pub lingam_only_correct: usize,
    pub both_wrong: usize,
}

impl Contingency {
    pub fn total(&self) -> usize {
        self.both_correct + self.cdsp_only_correct + self.lingam_only_correct + self.both_wrong
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportRow {
    pub category: SupportCategory,
    pub cdsp_decisions: usize,
    pub cdsp_false: usize,
    pub cdsp_fdr: Option<f64>,
    pub lingam_decisions: usize,
    pub lingam_false: usize,
    pub lingam_fdr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    pub label: String,
    pub pairs: usize,
    pub cdsp: Metrics,
    pub lingam: Metrics,
    pub contingency: Contingency,
    pub fdr_by_support: Vec<SupportRow>,
}

impl StratumReport {
    pub fn support_row(&self, c: SupportCategory) -> &SupportRow {
        // one row per category, in ALL order
        &self.fdr_by_support[c as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub per_pair: Vec<PairOutcome>,
    pub overall: StratumReport,
    pub linear: StratumReport,
    pub excluded: usize,
}

fn metrics<'a>(rows: impl Iterator<Item = (&'a PairOutcome, bool)>) -> Metrics {
    let (mut decisions, mut correct, mut w_all, mut w_ok) = (0usize, 0usize, 0.0, 0.0);
    for (r, ok) in rows {
        decisions += 1;
        w_all += r.weight;
        if ok {
            correct += 1;
            w_ok += r.weight;
        }
    }
    let tdr = if decisions > 0 {
        correct as f64 / decisions as f64
    } else {
        0.0
    };
    Metrics {
        decisions,
        correct,
        tdr,
        fdr: if decisions > 0 { 1.0 - tdr } else { 0.0 },
        weighted_tdr: if w_all > 0.0 { w_ok / w_all } else { 0.0 },
    }
}

/// Aggregates completed rows. Inconclusive CDSP outcomes count as wrong.
pub fn summarize(label: &str, rows: &[&PairOutcome]) -> StratumReport {
    let done: Vec<&PairOutcome> = rows.iter().copied().filter(|r| !r.failed()).collect();
    let cdsp_ok = |r: &PairOutcome| r.cdsp_correct == Some(true);
    let lingam_ok = |r: &PairOutcome| r.lingam_correct == Some(true);
    let mut contingency = Contingency {
        both_correct: 0,
        cdsp_only_correct: 0,
        lingam_only_correct: 0,
        both_wrong: 0,
    };
    for r in &done {
        match (cdsp_ok(r), lingam_ok(r)) {
            (true, true) => contingency.both_correct += 1,
            (true, false) => contingency.cdsp_only_correct += 1,
            (false, true) => contingency.lingam_only_correct += 1,
            (false, false) => contingency.both_wrong += 1,
        }
    }
    let fdr_by_support = SupportCategory::ALL
        .iter()
        .map(|&category| {
            let cd: Vec<_> = done.iter().filter(|r| r.cdsp_support == Some(category)).collect();
            let ld: Vec<_> = done.iter().filter(|r| r.lingam_support == Some(category)).collect();
            let cf = cd.iter().filter(|r| !cdsp_ok(r)).count();
            let lf = ld.iter().filter(|r| !lingam_ok(r)).count();
            let rate = |f: usize, d: usize| (d > 0).then(|| f as f64 / d as f64);
            SupportRow {
                category,
                cdsp_decisions: cd.len(),
                cdsp_false: cf,
                cdsp_fdr: rate(cf, cd.len()),
                lingam_decisions: ld.len(),
                lingam_false: lf,
                lingam_fdr: rate(lf, ld.len()),
            }
        })
        .collect();
    StratumReport {
        label: label.to_string(),
        pairs: done.len(),
        cdsp: metrics(done.iter().map(|r| (*r, cdsp_ok(r)))),
        lingam: metrics(done.iter().map(|r| (*r, lingam_ok(r)))),
        contingency,
        fdr_by_support,
    }
}

fn run_pair(pair: &BenchPair, config: &BenchConfig) -> PairOutcome {
    let mut out = PairOutcome {
        pair_id: pair.pair_id.clone(),
        n: pair.sample.n(),
        n_original: pair.n_original,
        ground_truth: pair.ground_truth,
        weight: pair.weight,
        linearity: pair.linearity,
        cdsp_direction: None,
        p_cdsp: None,
        cdsp_support: None,
        cdsp_correct: None,
        i_hat_x: None,
        i_hat_y: None,
        lingam_direction: None,
        lingam_rate: None,
        lingam_support: None,
        lingam_correct: None,
        replicate_indices: Vec::new(),
        error: None,
    };
    let seed = derive_seed(config.seed, &[key_of(&pair.pair_id)]);
    let outcome = (|| -> Result<()> {
        let c = cdsp_support_probability(&pair.sample, &config.cdsp, seed)?;
        out.cdsp_direction = Some(c.direction);
        out.p_cdsp = Some(c.p_cdsp);
        out.cdsp_support = Some(c.support());
        out.cdsp_correct = Some(c.direction == CausalDirection::from(pair.ground_truth));
        out.i_hat_x = Some(c.estimates_ytox.index_hat);
        out.i_hat_y = Some(c.estimates_xtoy.index_hat);
        out.replicate_indices = c.replicate_indices.iter().map(|&(xy, yx)| (yx, xy)).collect();
        let l = lingam_bootstrap_rate(&pair.sample, config.lingam_boot, seed)?;
        out.lingam_direction = Some(l.direction);
        out.lingam_rate = Some(l.bootstrap_rate);
        out.lingam_support = Some(support_category(l.bootstrap_rate)?);
        out.lingam_correct = Some(l.direction == pair.ground_truth);
        Ok(())
    })();
    if let Err(e) = outcome {
        log::warn!("pair {} failed: {e}", pair.pair_id);
        out.error = Some(e.to_string());
    }
    out
}

/// Runs both methods on every pair (or only on Linear pairs when
/// `config.linear_only`) and aggregates the results.
pub fn run_benchmark(pairs: &[BenchPair], config: &BenchConfig) -> Result<BenchReport> {
    config.cdsp.validate()?;
    crate::gof::check_boot(config.lingam_boot)?;
    let selected: Vec<&BenchPair> = pairs
        .iter()
        .filter(|p| !config.linear_only || p.linearity == Linearity::Linear)
        .collect();
    if selected.is_empty() {
        return Err(CdspError::InvalidInput("no pairs to evaluate".into()));
    }
    let per_pair: Vec<PairOutcome> = selected.par_iter().map(|p| run_pair(p, config)).collect();
    Ok(BenchReport::from_outcomes(*config, per_pair))
}

impl BenchReport {
    pub fn from_outcomes(config: BenchConfig, per_pair: Vec<PairOutcome>) -> Self {
        let all: Vec<&PairOutcome> = per_pair.iter().collect();
        let lin: Vec<&PairOutcome> = per_pair
            .iter()
            .filter(|r| r.linearity == Linearity::Linear)
            .collect();
        let overall = summarize(if config.linear_only { "linear" } else { "all" }, &all);
        let linear = summarize("linear", &lin);
        let excluded = per_pair.iter().filter(|r| r.failed()).count();
        BenchReport {
            config,
            per_pair,
            overall,
            linear,
            excluded,
        }
    }

    pub fn per_pair_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row<'a> {
            pair_id: &'a str,
            n: usize,
            n_original: usize,
            ground_truth: &'a str,
            weight: f64,
            linearity: Linearity,
            cdsp_direction: &'a str,
            p_cdsp: Option<f64>,
            cdsp_support: &'a str,
            cdsp_correct: Option<bool>,
            i_hat_x: Option<f64>,
            i_hat_y: Option<f64>,
            lingam_direction: &'a str,
            lingam_rate: Option<f64>,
            lingam_support: &'a str,
            lingam_correct: Option<bool>,
            error: &'a str,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.per_pair {
            w.serialize(Row {
                pair_id: &r.pair_id,
                n: r.n,
                n_original: r.n_original,
                ground_truth: r.ground_truth.label(),
                weight: r.weight,
                linearity: r.linearity,
                cdsp_direction: r.cdsp_direction.map_or("", |d| d.label()),
                p_cdsp: r.p_cdsp,
                cdsp_support: r.cdsp_support.map_or("", |c| c.label()),
                cdsp_correct: r.cdsp_correct,
                i_hat_x: r.i_hat_x,
                i_hat_y: r.i_hat_y,
                lingam_direction: r.lingam_direction.map_or("", |d| d.label()),
                lingam_rate: r.lingam_rate,
                lingam_support: r.lingam_support.map_or("", |c| c.label()),
                lingam_correct: r.lingam_correct,
                error: r.error.as_deref().unwrap_or(""),
            })
            .map_err(|e| CdspError::Serialize(e.to_string()))?;
        }
        finish_csv(w)
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary<'a> {
            config: &'a BenchConfig,
            mode: &'a str,
            excluded: usize,
            overall: &'a StratumReport,
            linear: &'a StratumReport,
        }
        to_json_pretty(&Summary {
            config: &self.config,
            mode: if self.config.cap.is_some() { "capped" } else { "full" },
            excluded: self.excluded,
            overall: &self.overall,
            linear: &self.linear,
        })
    }

    /// Outer-replicate index distributions, one pair of series per pair.
    pub fn index_histogram_csv(&self, bins: usize) -> Result<String> {
        let mut hists = Vec::new();
        for r in self.per_pair.iter().filter(|r| !r.replicate_indices.is_empty()) {
            let xs: Vec<f64> = r.replicate_indices.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = r.replicate_indices.iter().map(|p| p.1).collect();
            let (nx, ny) = (format!("{}/i_hat_x", r.pair_id), format!("{}/i_hat_y", r.pair_id));
            hists.extend(shared_histograms(&[(nx.as_str(), xs), (ny.as_str(), ys)], bins));
        }
        histograms_csv(&hists)
    }

    /// Plain-text rendering of the performance, agreement and
    /// support-stratified tables for each stratum.
    pub fn tables_text(&self) -> String {
        let mut s = String::new();
        let mode = match self.config.cap {
            Some(c) => format!("capped at {c} rows"),
            None => "full".to_string(),
        };
        let _ = writeln!(s, "mode: {mode}; excluded pairs: {}", self.excluded);
        let strata: Vec<&StratumReport> = if self.config.linear_only {
            vec![&self.overall]
        } else {
            vec![&self.overall, &self.linear]
        };
        for st in strata {
            let _ = writeln!(s, "\n== {} pairs (n = {}) ==", st.label, st.pairs);
            let _ = writeln!(s, "\nPerformance");
            let _ = writeln!(s, "{:<8} {:>14} {:>14}", "method", "TDR", "FDR");
            for (name, m) in [("CDSP", &st.cdsp), ("LiNGAM", &st.lingam)] {
                let wrong = m.decisions - m.correct;
                let _ = writeln!(
                    s,
                    "{:<8} {:>14} {:>14}",
                    name,
                    format!("{}/{} = {:.1}%", m.correct, m.decisions, 100.0 * m.tdr),
                    format!("{}/{} = {:.1}%", wrong, m.decisions, 100.0 * m.fdr),
                );
            }
            let c = &st.contingency;
            let _ = writeln!(s, "\nAgreement (rows CDSP, columns LiNGAM)");
            let _ = writeln!(s, "{:<10} {:>8} {:>8}", "", "correct", "wrong");
            let _ = writeln!(s, "{:<10} {:>8} {:>8}", "correct", c.both_correct, c.cdsp_only_correct);
            let _ = writeln!(s, "{:<10} {:>8} {:>8}", "wrong", c.lingam_only_correct, c.both_wrong);
            let _ = writeln!(s, "\nFDR by support category");
            let _ = writeln!(s, "{:<12} {:>16} {:>16}", "support", "CDSP", "LiNGAM");
            for r in &st.fdr_by_support {
                let cell = |f: usize, d: usize, v: Option<f64>| match v {
                    Some(v) => format!("{f}/{d} = {:.1}%", 100.0 * v),
                    None => "-".to_string(),
                };
                let _ = writeln!(
                    s,
                    "{:<12} {:>16} {:>16}",
                    r.category.label(),
                    cell(r.cdsp_false, r.cdsp_decisions, r.cdsp_fdr),
                    cell(r.lingam_false, r.lingam_decisions, r.lingam_fdr),
                );
            }
        }
        s
    }
}
