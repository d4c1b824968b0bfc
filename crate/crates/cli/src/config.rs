use std::path::{Path, PathBuf};

use cdsp_core::bench::DEFAULT_CAP;
use cdsp_core::cdsp::{DEFAULT_ALPHA, DEFAULT_BOOT_INNER, DEFAULT_BOOT_OUTER};
use cdsp_core::{CdspConfig, CdspError, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Test level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Outer (support-probability) bootstrap replicates.
    #[arg(long)]
    pub boot_outer: Option<usize>,
    /// Inner bootstrap replicates for the indices and critical values.
    #[arg(long)]
    pub boot_inner: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file (infer, lingam) or directory (simulate, bench).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with any of: alpha, boot_outer, boot_inner, seed, cap, format.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    boot_outer: Option<usize>,
    boot_inner: Option<usize>,
    seed: Option<u64>,
    cap: Option<usize>,
    format: Option<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub alpha: f64,
    pub n_boot_outer: usize,
    pub n_boot_inner: usize,
    pub seed: u64,
    pub subsample_cap: Option<usize>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn cdsp(&self) -> CdspConfig {
        CdspConfig {
            alpha: self.alpha,
            n_boot_inner: self.n_boot_inner,
            n_boot_outer: self.n_boot_outer,
        }
    }
}

fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CdspError::InvalidInput(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CdspError::InvalidInput(format!("config {}: {e}", path.display())))
}

/// `cap_flag`: `Some(Some(n))` for `--cap n`, `Some(None)` for `--no-cap`.
pub fn resolve(common: &CommonArgs, cap_flag: Option<Option<usize>>) -> Result<RunConfig> {
    let file = match &common.config {
        Some(p) => read_file_config(p)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig {
        alpha: common.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA),
        n_boot_outer: common.boot_outer.or(file.boot_outer).unwrap_or(DEFAULT_BOOT_OUTER),
        n_boot_inner: common.boot_inner.or(file.boot_inner).unwrap_or(DEFAULT_BOOT_INNER),
        seed: common.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        subsample_cap: match cap_flag {
            Some(c) => c,
            None => Some(file.cap.unwrap_or(DEFAULT_CAP)),
        },
        output_format: common.format.or(file.format).unwrap_or(OutputFormat::Json),
        output_path: common.out.clone(),
    };
    cfg.cdsp().validate()?;
    if cfg.subsample_cap.is_some_and(|c| c < cdsp_core::cdsp::MIN_CDSP_SAMPLE) {
        return Err(CdspError::InvalidInput(format!(
            "cap must be at least {}",
            cdsp_core::cdsp::MIN_CDSP_SAMPLE
        )));
    }
    Ok(cfg)
}
