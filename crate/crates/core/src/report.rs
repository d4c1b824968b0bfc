//! Plain-data output helpers shared by the simulation and benchmark reports.

use std::path::Path;

use serde::Serialize;

use crate::error::{CdspError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub series: String,
    /// `bins + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins on `[lo, hi]`; the last bin is closed and values
    /// outside the range or non-finite are dropped.
    pub fn new(series: impl Into<String>, values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|k| lo + k as f64 * width).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            if !(v >= lo && v <= hi) {
                continue;
            }
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Histogram {
            series: series.into(),
            edges,
            counts,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Histograms of several series on one shared grid.
pub fn shared_histograms(series: &[(&str, Vec<f64>)], bins: usize) -> Vec<Histogram> {
    let finite = series.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    series.iter().map(|(name, v)| Histogram::new(*name, v, lo, hi, bins)).collect()
}

#[derive(Serialize)]
struct HistogramRow<'a> {
    series: &'a str,
    bin_lo: f64,
    bin_hi: f64,
    count: usize,
}

pub fn histograms_csv(hists: &[Histogram]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for h in hists {
        for (k, &count) in h.counts.iter().enumerate() {
            w.serialize(HistogramRow {
                series: &h.series,
                bin_lo: h.edges[k],
                bin_hi: h.edges[k + 1],
                count,
            })
            .map_err(|e| CdspError::Serialize(e.to_string()))?;
        }
    }
    finish_csv(w)
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| CdspError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CdspError::Serialize(e.to_string()))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CdspError::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CdspError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CdspError::io(path, e))
}
