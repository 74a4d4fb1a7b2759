//! `simulate`, `oracle` and `plotdata`.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result, Side};
use crate::localfit::{
    default_bandwidth, density_from_sorted, BandwidthRule, DensityOptions, FitSpec, KernelKind,
    DEFAULT_MIN_BANDWIDTH,
};
use crate::synth::{
    gen_appendix_d, gen_counterexample_e, gen_typed, oracle_appendix_d, AppendixDSpec, OracleRow,
    TypeShares, TypedParams, TypedSample,
};

use super::ingest::read_running;

/// The `(p, lambda)` pairs of the published oracle table.
pub const ORACLE_TABLE: [(f64, f64); 4] = [(0.1, 0.05), (0.1, 0.3), (0.3, 0.05), (0.3, 0.3)];

/// Upper limit on histogram bins.
pub const MAX_BINS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub n: usize,
    pub seed: u64,
    pub p: f64,
    pub lambda: f64,
    pub noise_sd: f64,
    pub shares: TypeShares,
    /// `key=value` overrides of [`TypedParams`] fields.
    pub params: Vec<(String, f64)>,
    pub covariates: bool,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        SimulateOptions {
            n: 10_000,
            seed: 0,
            p: 0.1,
            lambda: 0.05,
            noise_sd: 0.0,
            shares: TypeShares::from([(0, 0.5), (2, 0.3), (4, 0.2)]),
            params: Vec::new(),
            covariates: false,
        }
    }
}

/// Parses `0=0.5,2=0.5` into type shares.
pub fn parse_shares(text: &str) -> Result<TypeShares> {
    let mut shares = TypeShares::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (t, w) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidParams(format!("share `{part}` is not `type=weight`")))?;
        let t: u8 = t
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad type label `{t}`")))?;
        let w: f64 = w
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParams(format!("bad share `{w}`")))?;
        shares.insert(t, w);
    }
    Ok(shares)
}

fn typed_params(overrides: &[(String, f64)]) -> Result<TypedParams> {
    let mut value = serde_json::to_value(TypedParams::default())
        .map_err(|e| Error::Invariant(e.to_string()))?;
    let map = value
        .as_object_mut()
        .ok_or_else(|| Error::Invariant("typed parameters are not an object".into()))?;
    for (k, v) in overrides {
        let key = k.replace('-', "_");
        match map.get_mut(&key) {
            Some(slot) => *slot = serde_json::json!(v),
            None => {
                return Err(Error::InvalidParams(format!(
                    "unknown typed parameter `{k}`"
                )))
            }
        }
    }
    serde_json::from_value(value).map_err(|e| Error::InvalidParams(e.to_string()))
}

/// Generates a sample from a named design.
pub fn simulate(dgp: &str, opts: &SimulateOptions) -> Result<TypedSample> {
    let ts = match dgp {
        "appendix-d" => gen_appendix_d(&AppendixDSpec {
            p: opts.p,
            lambda: opts.lambda,
            n: opts.n,
            seed: opts.seed,
        })?,
        "counterexample-e" => gen_counterexample_e(opts.n, opts.seed, opts.noise_sd)?,
        "typed" => gen_typed(
            &opts.shares,
            &typed_params(&opts.params)?,
            opts.n,
            opts.seed,
        )?,
        other => return Err(Error::UnknownDgp(other.to_string())),
    };
    Ok(if opts.covariates {
        ts.with_covariates(opts.seed)
    } else {
        ts
    })
}

/// One-line latent summary: type shares and manipulated fraction.
pub fn latent_summary(ts: &TypedSample) -> String {
    let shares = ts.type_shares();
    let mut s = format!(
        "n = {}, manipulated = {:.4}, types:",
        ts.len(),
        ts.manipulation_fraction()
    );
    for (t, share) in shares.iter().enumerate() {
        if *share > 0.0 {
            let _ = write!(s, " {t}={share:.4}");
        }
    }
    s
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum OracleOutput {
    One(OracleRow),
    Table(Vec<OracleRow>),
}

/// One row for `(p, lambda)`, or the published table when neither is given.
pub fn oracle(p: Option<f64>, lambda: Option<f64>) -> Result<OracleOutput> {
    match (p, lambda) {
        (Some(p), Some(l)) => Ok(OracleOutput::One(oracle_appendix_d(p, l)?)),
        (None, None) => Ok(OracleOutput::Table(
            ORACLE_TABLE
                .iter()
                .map(|&(p, l)| oracle_appendix_d(p, l))
                .collect::<Result<_>>()?,
        )),
        _ => Err(Error::InvalidConfig(
            "--p and --lambda must be given together".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotBin {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: usize,
    pub side: Side,
    /// One-sided density fit at the bin midpoint; `None` where the fit fails.
    pub fitted_density: Option<f64>,
}

/// Histogram with the cutoff on a bin edge plus one-sided density fits.
pub fn plot_bins(
    xs: &[f64],
    cutoff: f64,
    bin_width: f64,
    kernel: KernelKind,
) -> Result<Vec<PlotBin>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "bin width {bin_width} must be positive"
        )));
    }
    if xs.is_empty() {
        return Err(Error::InvalidDataset("no observations".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let index = |x: f64| {
        let j = ((x - cutoff) / bin_width).floor() as i64;
        if x < cutoff {
            j.min(-1)
        } else {
            j.max(0)
        }
    };
    let (first, last) = (index(sorted[0]), index(sorted[sorted.len() - 1]));
    let bins = (last - first + 1) as usize;
    if bins > MAX_BINS {
        return Err(Error::InvalidConfig(format!(
            "bin width {bin_width} gives {bins} bins (limit {MAX_BINS})"
        )));
    }
    let mut counts = vec![0usize; bins];
    for &x in &sorted {
        counts[(index(x) - first) as usize] += 1;
    }
    let split = sorted.partition_point(|&x| x < cutoff);
    let (left, right) = sorted.split_at(split);
    let n_total = sorted.len() as f64;
    let bandwidth = |side: Side| {
        default_bandwidth(
            xs,
            side,
            cutoff,
            kernel,
            BandwidthRule::default(),
            DEFAULT_MIN_BANDWIDTH,
        )
        .ok()
    };
    let (h_left, h_right) = (bandwidth(Side::Left), bandwidth(Side::Right));
    let fit = |pts: &[f64], h: Option<f64>, mid: f64| -> Option<f64> {
        let h = h?;
        let lo = pts.partition_point(|&x| x < mid - h);
        let hi = pts.partition_point(|&x| x <= mid + h);
        let spec = FitSpec::new(1, h, kernel, Side::Interior).ok()?;
        density_from_sorted(
            &pts[lo..hi],
            None,
            n_total,
            mid,
            &spec,
            &DensityOptions::default(),
        )
        .ok()
        .map(|d| d.value)
    };
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            let j = first + k as i64;
            let bin_left = cutoff + j as f64 * bin_width;
            let bin_right = cutoff + (j + 1) as f64 * bin_width;
            let mid = 0.5 * (bin_left + bin_right);
            let (side, fitted) = if j < 0 {
                (Side::Left, fit(left, h_left, mid))
            } else {
                (Side::Right, fit(right, h_right, mid))
            };
            PlotBin {
                bin_left,
                bin_right,
                count,
                side,
                fitted_density: fitted,
            }
        })
        .collect())
}

pub fn plot_csv(bins: &[PlotBin]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin_left", "bin_right", "count", "side", "fitted_density"])
        .map_err(|e| Error::Io(e.to_string()))?;
    for b in bins {
        let side = match b.side {
            Side::Left => "left",
            _ => "right",
        };
        w.write_record([
            b.bin_left.to_string(),
            b.bin_right.to_string(),
            b.count.to_string(),
            side.to_string(),
            b.fitted_density.map(|d| d.to_string()).unwrap_or_default(),
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Plot data for a file's running variable.
pub fn plotdata(
    input: &Path,
    col_x: &str,
    cutoff: f64,
    bin_width: f64,
    kernel: KernelKind,
) -> Result<String> {
    let xs = read_running(input, col_x)?;
    plot_csv(&plot_bins(&xs, cutoff, bin_width, kernel)?)
}
