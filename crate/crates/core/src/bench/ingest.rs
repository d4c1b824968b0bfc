use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{CdspError, Result};
use crate::regress::{bic_linear_vs_spline, Linearity};
use crate::rng::{key_of, substream, TAG_SUBSAMPLE};
use crate::sample::{BivariateSample, Direction};

pub const DEFAULT_CAP: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub pair_id: String,
    /// 1-based inclusive column ranges.
    pub cause: (usize, usize),
    pub effect: (usize, usize),
    pub weight: f64,
}

impl PairMeta {
    pub fn is_univariate(&self) -> bool {
        self.cause.0 == self.cause.1 && self.effect.0 == self.effect.1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPair {
    pub pair_id: String,
    pub sample: BivariateSample,
    pub ground_truth: Direction,
    pub weight: f64,
    pub linearity: Linearity,
    /// Row count before subsampling.
    pub n_original: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub pair_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestOptions {
    /// Row cap; `None` keeps every row.
    pub cap: Option<usize>,
    pub seed: u64,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            cap: Some(DEFAULT_CAP),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IngestResult {
    pub pairs: Vec<BenchPair>,
    pub skipped: Vec<SkippedPair>,
}

/// Zero-padded four-digit identifier, e.g. `0042`.
pub fn is_pair_id(s: &str) -> bool {
    s.len() == 4 && s.bytes().all(|b| b.is_ascii_digit())
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> CdspError {
    CdspError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Parses a metadata file: `id cause_start cause_end effect_start effect_end weight` per line.
pub fn parse_meta(path: &Path) -> Result<BTreeMap<String, PairMeta>> {
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CdspError::MissingMetadata(format!("metadata file {} not found", path.display()))
        } else {
            CdspError::io(path, e)
        }
    })?;
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() || fields[0].starts_with('#') {
            continue;
        }
        if fields.len() != 6 {
            return Err(parse_err(path, lineno, format!("expected 6 fields, found {}", fields.len())));
        }
        let id = fields[0];
        if !is_pair_id(id) {
            return Err(parse_err(path, lineno, format!("bad pair id {id:?}")));
        }
        let col = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .ok()
                .filter(|&c| c >= 1)
                .ok_or_else(|| parse_err(path, lineno, format!("bad column index {s:?}")))
        };
        let weight: f64 = fields[5]
            .parse()
            .ok()
            .filter(|w: &f64| *w >= 0.0 && w.is_finite())
            .ok_or_else(|| parse_err(path, lineno, format!("bad weight {:?}", fields[5])))?;
        out.insert(
            id.to_string(),
            PairMeta {
                pair_id: id.to_string(),
                cause: (col(fields[1])?, col(fields[2])?),
                effect: (col(fields[3])?, col(fields[4])?),
                weight,
            },
        );
    }
    Ok(out)
}

/// Whitespace-delimited numeric table; every row must have the same width.
pub fn parse_table(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| CdspError::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let lineno = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(path, lineno, format!("not a finite number: {tok:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected {} columns, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    Ok(rows)
}

fn pair_files(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let entries = fs::read_dir(dir).map_err(|e| CdspError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CdspError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(id) = name.strip_prefix("pair").and_then(|r| r.strip_suffix(".txt")) {
            if is_pair_id(id) {
                out.push((id.to_string(), entry.path()));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Seeded uniform subsample without replacement; original row order kept.
pub fn subsample(sample: &BivariateSample, cap: usize, seed: u64, pair_id: &str) -> BivariateSample {
    if sample.n() <= cap {
        return sample.clone();
    }
    let mut rng = substream(seed, &[TAG_SUBSAMPLE, key_of(pair_id)]);
    let mut idx = index::sample(&mut rng, sample.n(), cap).into_vec();
    idx.sort_unstable();
    sample.select(&idx)
}

/// Loads every `pairNNNN.txt` in `data_dir` that has a metadata entry.
pub fn ingest_pairs(data_dir: &Path, meta_file: &Path, opts: &IngestOptions) -> Result<IngestResult> {
    let meta = parse_meta(meta_file)?;
    let files = pair_files(data_dir)?;
    if files.is_empty() {
        return Err(CdspError::InvalidInput(format!(
            "no pairNNNN.txt files in {}",
            data_dir.display()
        )));
    }
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    let mut skip = |id: &str, reason: &str| {
        log::info!("skipping pair {id}: {reason}");
        skipped.push(SkippedPair {
            pair_id: id.to_string(),
            reason: reason.to_string(),
        });
    };
    for (id, path) in files {
        let m = meta
            .get(&id)
            .ok_or_else(|| CdspError::MissingMetadata(format!("no metadata entry for pair {id}")))?;
        if !m.is_univariate() {
            skip(&id, "multivariate");
            continue;
        }
        let rows = parse_table(&path)?;
        if rows[0].len() != 2 {
            skip(&id, "multivariate");
            continue;
        }
        let ground_truth = match (m.cause.0, m.effect.0) {
            (1, 2) => Direction::XToY,
            (2, 1) => Direction::YToX,
            _ => {
                skip(&id, "column indices do not describe a two-column pair");
                continue;
            }
        };
        let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r[0], r[1])).unzip();
        let sample = match BivariateSample::new(xs, ys) {
            Ok(s) => s,
            Err(e) => {
                skip(&id, &format!("invalid sample: {e}"));
                continue;
            }
        };
        let n_original = sample.n();
        let sample = match opts.cap {
            Some(cap) => subsample(&sample, cap, opts.seed, &id),
            None => sample,
        };
        pairs.push(BenchPair {
            pair_id: id,
            sample,
            ground_truth,
            weight: m.weight,
            linearity: Linearity::Unclassified,
            n_original,
        });
    }
    Ok(IngestResult { pairs, skipped })
}

/// BIC linear-versus-spline class in the ground-truth direction.
pub fn classify_linearity(pairs: &mut [BenchPair]) {
    for p in pairs.iter_mut() {
        let oriented = match p.ground_truth {
            Direction::XToY => p.sample.clone(),
            Direction::YToX => p.sample.swapped(),
        };
        p.linearity = match bic_linear_vs_spline(&oriented) {
            Ok(c) => c.class,
            Err(e) => {
                log::warn!("pair {}: linearity unclassified ({e})", p.pair_id);
                Linearity::Unclassified
            }
        };
    }
}
