//! Command-line front end: `analyze`, `simulate`, `oracle` and `plotdata`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
//! invariant violation.

mod commands;
mod config;
mod ingest;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::localfit::KernelKind;

pub use commands::{
    latent_summary, oracle, parse_shares, plot_bins, plot_csv, plotdata, simulate, OracleOutput,
    PlotBin, SimulateOptions, MAX_BINS, ORACLE_TABLE,
};
pub use config::{ColumnMap, ConfigLayer, RunConfig, MAX_REPORT_ORDER};
pub use ingest::{ingest, read_running};
pub use report::{
    analyze, analyze_dataset, protocol_order, BalanceEntry, BoundaryBlock, DataSummary, FuzzyBlock,
    OrderBlock, PointBlock, ProtocolBlock, Report, SetBlock, SCHEMA_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::UnknownCovariate(_)
        | Error::InvalidOutcomeRange { .. }
        | Error::InvalidGrid(_)
        | Error::UnknownDgp(_)
        | Error::InvalidParams(_)
        | Error::InvalidWeights(_) => EXIT_CONFIG,
        Error::Invariant(_) => EXIT_INTERNAL,
        Error::OnSide { source, .. } => exit_code(source),
        _ => EXIT_DATA,
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let name = path.file_name().ok_or_else(|| {
        Error::InvalidConfig(format!("output path {} has no file name", path.display()))
    })?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, contents.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rdd-bounds",
    version,
    about = "Manipulation-robust regression discontinuity bounds"
)]
pub struct Cli {
    /// Worker threads for bootstrap replicates (results do not depend on it).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density test, balance tests and bounds with confidence intervals.
    Analyze(Box<AnalyzeArgs>),
    /// Writes a synthetic sample as CSV.
    Simulate(SimulateArgs),
    /// Population bounds of the binary-outcome design.
    Oracle(OracleArgs),
    /// Histogram counts and fitted one-sided densities as CSV.
    Plotdata(PlotArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub col_x: Option<String>,
    #[arg(long)]
    pub col_y: Option<String>,
    #[arg(long)]
    pub col_d: Option<String>,
    /// Repeatable.
    #[arg(long = "covariate")]
    pub covariates: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y_max: Option<f64>,
    /// type2, type3, type4 or mixed.
    #[arg(long = "type")]
    pub assumption: Option<String>,
    /// Comma-separated list, default 0,1,2.
    #[arg(long, value_delimiter = ',')]
    pub order: Vec<usize>,
    #[arg(long)]
    pub bw_mean_left: Option<f64>,
    #[arg(long)]
    pub bw_mean_right: Option<f64>,
    #[arg(long)]
    pub bw_dens_left: Option<f64>,
    #[arg(long)]
    pub bw_dens_right: Option<f64>,
    /// triangular, uniform or epanechnikov.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Default bandwidth rule: robust or rot.
    #[arg(long)]
    pub bw_rule: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub boot: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// fixed or random.
    #[arg(long)]
    pub r_mode: Option<String>,
    #[arg(long)]
    pub sharp: bool,
    #[arg(long)]
    pub fuzzy: bool,
    /// Clamp bounds and intervals to the logical range of the effect.
    #[arg(long)]
    pub clamp: bool,
    #[arg(long)]
    pub bin_width: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl AnalyzeArgs {
    /// Flags as a configuration layer.
    pub fn layer(&self) -> Result<ConfigLayer> {
        Ok(ConfigLayer {
            cutoff: self.cutoff,
            y_min: self.y_min,
            y_max: self.y_max,
            assumption: self.assumption.as_deref().map(str::parse).transpose()?,
            orders: (!self.order.is_empty()).then(|| self.order.clone()),
            bw_mean_left: self.bw_mean_left,
            bw_mean_right: self.bw_mean_right,
            bw_dens_left: self.bw_dens_left,
            bw_dens_right: self.bw_dens_right,
            kernel: self.kernel.as_deref().map(str::parse).transpose()?,
            bw_rule: self.bw_rule.as_deref().map(str::parse).transpose()?,
            alpha: self.alpha,
            boot: self.boot,
            seed: self.seed,
            r_mode: self.r_mode.as_deref().map(str::parse).transpose()?,
            sharp: self.sharp.then_some(true),
            fuzzy: self.fuzzy.then_some(true),
            clamp: self.clamp.then_some(true),
            col_x: self.col_x.clone(),
            col_y: self.col_y.clone(),
            col_d: self.col_d.clone(),
            covariates: (!self.covariates.is_empty()).then(|| self.covariates.clone()),
            bin_width: self.bin_width,
        })
    }

    /// Flags over config file over defaults.
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => ConfigLayer::from_file(p)?,
            None => ConfigLayer::default(),
        };
        self.layer()?.or(file).resolve()
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// appendix-d, counterexample-e or typed.
    pub dgp: String,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    /// Type shares for `typed`, e.g. `0=0.5,2=0.3,4=0.2`.
    #[arg(long)]
    pub shares: Option<String>,
    /// Typed-design parameter override `name=value`; repeatable.
    #[arg(long = "param")]
    pub params: Vec<String>,
    /// Add `w_noise` and `w_xstar` covariate columns.
    #[arg(long)]
    pub covariates: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn options(&self) -> Result<SimulateOptions> {
        let mut opts = SimulateOptions {
            n: self.n,
            seed: self.seed,
            p: self.p,
            lambda: self.lambda,
            noise_sd: self.noise_sd,
            covariates: self.covariates,
            ..SimulateOptions::default()
        };
        if let Some(s) = &self.shares {
            opts.shares = parse_shares(s)?;
        }
        for raw in &self.params {
            let (k, v) = raw.split_once('=').ok_or_else(|| {
                Error::InvalidParams(format!("parameter `{raw}` is not `name=value`"))
            })?;
            let v: f64 = v.trim().parse().map_err(|_| {
                Error::InvalidParams(format!("parameter `{raw}` has a non-numeric value"))
            })?;
            opts.params.push((k.trim().to_string(), v));
        }
        Ok(opts)
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub cutoff: f64,
    #[arg(long)]
    pub bin_width: f64,
    #[arg(long, default_value = "x")]
    pub col_x: String,
    #[arg(long, default_value = "triangular")]
    pub kernel: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let report = analyze(&cfg, &args.input)?;
    emit(args.out.as_deref(), &report.to_json()?)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let ts = simulate(&args.dgp, &args.options()?)?;
    emit(args.out.as_deref(), &ts.to_csv_string()?)?;
    eprintln!("{}", latent_summary(&ts));
    Ok(())
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let out = oracle(args.p, args.lambda)?;
    let mut json =
        serde_json::to_string_pretty(&out).map_err(|e| Error::Invariant(e.to_string()))?;
    json.push('\n');
    emit(args.out.as_deref(), &json)
}

pub fn cmd_plotdata(args: &PlotArgs) -> Result<()> {
    let kernel: KernelKind = args.kernel.parse()?;
    let csv = plotdata(
        &args.input,
        &args.col_x,
        args.cutoff,
        args.bin_width,
        kernel,
    )?;
    emit(args.out.as_deref(), &csv)
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Plotdata(a) => cmd_plotdata(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let pool = match cli.threads {
        Some(0) => {
            eprintln!("error: --threads must be at least 1");
            return EXIT_CONFIG;
        }
        Some(t) => rayon::ThreadPoolBuilder::new().num_threads(t).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INTERNAL;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::InvalidConfig("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::UnknownDgp("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::MissingColumn("y".into())), EXIT_DATA);
        assert_eq!(exit_code(&Error::FileNotFound("a".into())), EXIT_DATA);
        assert_eq!(exit_code(&Error::Invariant("x".into())), EXIT_INTERNAL);
    }

    #[test]
    fn bad_flags_are_config_errors() {
        assert_eq!(run(["rdd-bounds", "analyze"]), EXIT_CONFIG);
        assert_eq!(
            run(["rdd-bounds", "simulate", "nope", "--n", "10"]),
            EXIT_CONFIG
        );
        assert_eq!(run(["rdd-bounds", "--threads", "0", "oracle"]), EXIT_CONFIG);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
