use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cdsp_core::bench::{classify_linearity, ingest_pairs, run_benchmark, BenchConfig, IngestOptions};
use cdsp_core::report::write_text;
use cdsp_core::simlab::{run_accuracy_experiment, ExperimentConfig, SimScenario, DESK_N_MC};
use cdsp_core::{cdsp_support_probability, lingam_bootstrap_rate, support_category, CdspError, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

mod config;
mod input;

use config::{resolve, CommonArgs, OutputFormat, RunConfig};

pub const DATA_DIR_ENV: &str = "CDSP_DATA_DIR";
const HISTOGRAM_BINS: usize = 30;

#[derive(Parser)]
#[command(name = "cdsp", version, about = "Causal direction of bivariate data from directional test power")]
struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the causal direction of a two-column data file.
    Infer {
        input: PathBuf,
        /// Also run the LiNGAM baseline.
        #[arg(long)]
        lingam: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a simulation scenario (preset name or TOML file).
    Simulate {
        scenario: String,
        /// Override the per-replication sample size.
        #[arg(long)]
        n: Option<usize>,
        /// Override the number of replications.
        #[arg(long)]
        reps: Option<usize>,
        /// Size of the oracle Monte Carlo sample.
        #[arg(long)]
        n_mc: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the cause–effect pairs benchmark.
    Bench {
        /// Directory with pairNNNN.txt files (default: $CDSP_DATA_DIR).
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Metadata file (default: <data-dir>/pairmeta.txt).
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Maximum rows per pair.
        #[arg(long, conflicts_with = "no_cap")]
        cap: Option<usize>,
        /// Use every row of every pair.
        #[arg(long)]
        no_cap: bool,
        /// Evaluate only the approximately linear pairs.
        #[arg(long)]
        linear_only: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run only the LiNGAM baseline on a two-column data file.
    Lingam {
        input: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn exit_code(e: &CdspError) -> u8 {
    match e {
        CdspError::Degenerate(_) | CdspError::RankDeficient(_) => 3,
        CdspError::Numeric(_) | CdspError::Serialize(_) => 4,
        _ => 2,
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.output_path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct LingamSummary {
    direction: &'static str,
    dep_xtoy: f64,
    dep_ytox: f64,
    bootstrap_rate: f64,
    support_category: &'static str,
    n_boot: usize,
}

fn lingam_summary(sample: &cdsp_core::BivariateSample, cfg: &RunConfig) -> Result<LingamSummary> {
    let l = lingam_bootstrap_rate(sample, cfg.n_boot_outer, cfg.seed)?;
    Ok(LingamSummary {
        direction: l.direction.label(),
        dep_xtoy: l.dep_xtoy,
        dep_ytox: l.dep_ytox,
        bootstrap_rate: l.bootstrap_rate,
        support_category: support_category(l.bootstrap_rate)?.label(),
        n_boot: l.n_boot,
    })
}

#[derive(Serialize)]
struct InferReport<'a> {
    config: &'a RunConfig,
    input: String,
    n: usize,
    direction: &'static str,
    p_cdsp: f64,
    favorable: usize,
    support_category: &'static str,
    i_hat_x: f64,
    i_hat_y: f64,
    theta_hat_x: f64,
    theta_hat_y: f64,
    sigma_hat_x: f64,
    sigma_hat_y: f64,
    c_hat_over_n_x: f64,
    c_hat_over_n_y: f64,
    reject_x: bool,
    reject_y: bool,
    lingam: Option<LingamSummary>,
}

fn cmd_infer(input: &Path, with_lingam: bool, cfg: &RunConfig) -> Result<()> {
    let sample = input::read_two_columns(input)?;
    let r = cdsp_support_probability(&sample, &cfg.cdsp(), cfg.seed)?;
    let lingam = if with_lingam {
        Some(lingam_summary(&sample, cfg)?)
    } else {
        None
    };
    let (x, y) = (&r.estimates_ytox, &r.estimates_xtoy);
    let rep = InferReport {
        config: cfg,
        input: input.display().to_string(),
        n: sample.n(),
        direction: r.direction.label(),
        p_cdsp: r.p_cdsp,
        favorable: r.favorable,
        support_category: r.support().label(),
        i_hat_x: x.index_hat,
        i_hat_y: y.index_hat,
        theta_hat_x: x.theta_hat,
        theta_hat_y: y.theta_hat,
        sigma_hat_x: x.sigma_hat,
        sigma_hat_y: y.sigma_hat,
        c_hat_over_n_x: x.c_hat_over_n,
        c_hat_over_n_y: y.c_hat_over_n,
        reject_x: r.reject_x,
        reject_y: r.reject_y,
        lingam,
    };
    let text = match cfg.output_format {
        OutputFormat::Json => cdsp_core::report::to_json_pretty(&rep)?,
        OutputFormat::Csv => {
            let mut head: Vec<String> = [
                "alpha", "boot_outer", "boot_inner", "seed", "n", "direction", "p_cdsp", "favorable",
                "support_category", "i_hat_x", "i_hat_y", "theta_hat_x", "theta_hat_y", "sigma_hat_x",
                "sigma_hat_y", "c_hat_over_n_x", "c_hat_over_n_y", "reject_x", "reject_y",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect();
            let mut row: Vec<String> = vec![
                cfg.alpha.to_string(),
                cfg.n_boot_outer.to_string(),
                cfg.n_boot_inner.to_string(),
                cfg.seed.to_string(),
                rep.n.to_string(),
                rep.direction.to_string(),
                rep.p_cdsp.to_string(),
                rep.favorable.to_string(),
                rep.support_category.to_string(),
                rep.i_hat_x.to_string(),
                rep.i_hat_y.to_string(),
                rep.theta_hat_x.to_string(),
                rep.theta_hat_y.to_string(),
                rep.sigma_hat_x.to_string(),
                rep.sigma_hat_y.to_string(),
                rep.c_hat_over_n_x.to_string(),
                rep.c_hat_over_n_y.to_string(),
                rep.reject_x.to_string(),
                rep.reject_y.to_string(),
            ];
            if let Some(l) = &rep.lingam {
                head.extend(["lingam_direction", "lingam_rate", "lingam_support_category"].map(String::from));
                row.extend([
                    l.direction.to_string(),
                    l.bootstrap_rate.to_string(),
                    l.support_category.to_string(),
                ]);
            }
            csv_line(&head) + &csv_line(&row)
        }
    };
    emit(cfg, &text)
}

#[derive(Serialize)]
struct LingamReport<'a> {
    config: &'a RunConfig,
    input: String,
    n: usize,
    #[serde(flatten)]
    result: LingamSummary,
}

fn cmd_lingam(input: &Path, cfg: &RunConfig) -> Result<()> {
    let sample = input::read_two_columns(input)?;
    let result = lingam_summary(&sample, cfg)?;
    let text = match cfg.output_format {
        OutputFormat::Json => cdsp_core::report::to_json_pretty(&LingamReport {
            config: cfg,
            input: input.display().to_string(),
            n: sample.n(),
            result,
        })?,
        OutputFormat::Csv => {
            let head = ["seed", "n_boot", "n", "direction", "dep_xtoy", "dep_ytox", "bootstrap_rate", "support_category"];
            let row = [
                cfg.seed.to_string(),
                result.n_boot.to_string(),
                sample.n().to_string(),
                result.direction.to_string(),
                result.dep_xtoy.to_string(),
                result.dep_ytox.to_string(),
                result.bootstrap_rate.to_string(),
                result.support_category.to_string(),
            ];
            csv_line(&head.map(String::from)) + &csv_line(&row)
        }
    };
    emit(cfg, &text)
}

fn load_scenario(name: &str) -> Result<SimScenario> {
    let path = Path::new(name);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CdspError::InvalidInput(format!("{name}: {e}")))?;
        return SimScenario::from_toml_str(&text);
    }
    SimScenario::preset(name).ok_or_else(|| {
        CdspError::InvalidInput(format!(
            "unknown scenario {name:?}; presets: {}",
            SimScenario::preset_names().join(", ")
        ))
    })
}

fn cmd_simulate(
    name: &str,
    n: Option<usize>,
    reps: Option<usize>,
    n_mc: Option<usize>,
    seed_given: bool,
    cfg: &RunConfig,
) -> Result<()> {
    let mut scenario = load_scenario(name)?;
    if let Some(n) = n {
        scenario.n = n;
    }
    if let Some(m) = reps {
        scenario.m_reps = m;
    }
    if seed_given {
        scenario.seed = cfg.seed;
    }
    let exp = ExperimentConfig {
        cdsp: cfg.cdsp(),
        n_mc: n_mc.unwrap_or(DESK_N_MC.max(10 * scenario.n)),
        sigma_reps: None,
    };
    let report = run_accuracy_experiment(&scenario, &exp)?;
    match &cfg.output_path {
        Some(dir) => {
            write_text(&dir.join("per_rep.csv"), &report.to_csv()?)?;
            write_text(&dir.join("summary.json"), &report.summary_json()?)?;
            write_text(&dir.join("index_histogram.csv"), &report.index_histogram_csv(HISTOGRAM_BINS)?)
        }
        None => {
            let text = match cfg.output_format {
                OutputFormat::Json => report.summary_json()?,
                OutputFormat::Csv => report.to_csv()?,
            };
            print!("{text}");
            Ok(())
        }
    }
}

fn missing_data(msg: String) -> CdspError {
    CdspError::InvalidInput(format!(
        "{msg}\nDownload the Tübingen cause-effect pairs (pairNNNN.txt plus pairmeta.txt) from \
         https://webdav.tuebingen.mpg.de/cause-effect/ and pass --data-dir or set {DATA_DIR_ENV}."
    ))
}

fn cmd_bench(data_dir: Option<PathBuf>, meta: Option<PathBuf>, linear_only: bool, cfg: &RunConfig) -> Result<()> {
    let dir = data_dir
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .ok_or_else(|| missing_data("no benchmark directory given".into()))?;
    if !dir.is_dir() {
        return Err(missing_data(format!("benchmark directory {} not found", dir.display())));
    }
    let meta = meta.unwrap_or_else(|| dir.join("pairmeta.txt"));
    if !meta.is_file() {
        return Err(missing_data(format!("metadata file {} not found", meta.display())));
    }
    let opts = IngestOptions {
        cap: cfg.subsample_cap,
        seed: cfg.seed,
    };
    let mut ingested = ingest_pairs(&dir, &meta, &opts)?;
    classify_linearity(&mut ingested.pairs);
    let bench_cfg = BenchConfig {
        cdsp: cfg.cdsp(),
        lingam_boot: cfg.n_boot_outer,
        seed: cfg.seed,
        cap: cfg.subsample_cap,
        linear_only,
    };
    let report = run_benchmark(&ingested.pairs, &bench_cfg)?;
    match &cfg.output_path {
        Some(out) => {
            write_text(&out.join("per_pair.csv"), &report.per_pair_csv()?)?;
            write_text(&out.join("summary.json"), &report.summary_json()?)?;
            write_text(&out.join("tables.txt"), &report.tables_text())?;
            write_text(&out.join("index_histogram.csv"), &report.index_histogram_csv(HISTOGRAM_BINS)?)?;
            write_text(&out.join("skipped.json"), &cdsp_core::report::to_json_pretty(&ingested.skipped)?)
        }
        None => {
            let text = match cfg.output_format {
                OutputFormat::Json => report.summary_json()?,
                OutputFormat::Csv => report.per_pair_csv()?,
            };
            print!("{text}");
            Ok(())
        }
    }
}

fn seed_given(common: &CommonArgs) -> bool {
    common.seed.is_some()
        || common.config.as_ref().is_some_and(|p| {
            std::fs::read_to_string(p)
                .ok()
                .and_then(|t| t.parse::<toml::Table>().ok())
                .is_some_and(|t| t.contains_key("seed"))
        })
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CdspError::InvalidInput(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Infer { input, lingam, common } => cmd_infer(&input, lingam, &resolve(&common, None)?),
        Command::Lingam { input, common } => cmd_lingam(&input, &resolve(&common, None)?),
        Command::Simulate {
            scenario,
            n,
            reps,
            n_mc,
            common,
        } => {
            let cfg = resolve(&common, None)?;
            cmd_simulate(&scenario, n, reps, n_mc, seed_given(&common), &cfg)
        }
        Command::Bench {
            data_dir,
            meta,
            cap,
            no_cap,
            linear_only,
            common,
        } => {
            let cap_flag = if no_cap { Some(None) } else { cap.map(Some) };
            cmd_bench(data_dir, meta, linear_only, &resolve(&common, cap_flag)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
