//! Bootstrap distributions of the bounds and Imbens–Manski intervals.
//!
//! In fixed mode every replicate evaluates the bounds with the full-sample
//! densities; in random mode the densities (and hence `r`) are re-estimated
//! per replicate. Bandwidths are always the full-sample ones.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::boundary::{
    BoundaryConfig, BoundaryEstimates, BoundaryWindow, Column, Dataset, OutcomeRange,
};
use crate::bounds::{
    crude_bounds, fuzzy_bounds_with, sharp_type2_bounds_with, BoundsOptions, BoundsResult,
    FuzzyInputs, TypeAssumption, WeightedOutcomes, DEFAULT_GRID_SIZE,
};
use crate::diagnostics::MIN_REPLICATIONS;
use crate::error::{Error, Result};
use crate::resample::{collect_successes, run_replicates, std_dev, window_multiplicities};

pub const DEFAULT_BOOTSTRAP: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RMode {
    #[default]
    Fixed,
    Random,
}

impl fmt::Display for RMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RMode::Fixed => "fixed",
            RMode::Random => "random",
        })
    }
}

impl FromStr for RMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fixed" => Ok(RMode::Fixed),
            "random" => Ok(RMode::Random),
            other => Err(Error::InvalidConfig(format!(
                "unknown r mode `{other}` (fixed or random)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub seed: u64,
    pub r_mode: RMode,
    pub alpha: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            replications: DEFAULT_BOOTSTRAP,
            seed: 0,
            r_mode: RMode::Fixed,
            alpha: 0.05,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::InvalidConfig(format!(
                "bootstrap count {} is below the minimum of {MIN_REPLICATIONS}",
                self.replications
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha = {} outside (0, 1)",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Which interval is bootstrapped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BoundsMethod {
    Crude { assumption: TypeAssumption },
    SharpType2 { grid_size: usize },
    Fuzzy,
}

impl BoundsMethod {
    pub fn sharp() -> Self {
        BoundsMethod::SharpType2 {
            grid_size: DEFAULT_GRID_SIZE,
        }
    }
}

/// Estimation settings shared by the point estimate and every replicate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FitConfig {
    pub boundary: BoundaryConfig,
    /// Falls back to the dataset's range when unset.
    pub outcome_range: Option<OutcomeRange>,
    pub bounds: BoundsOptions,
}

impl FitConfig {
    fn range(&self, data: &Dataset) -> Result<OutcomeRange> {
        self.outcome_range
            .or_else(|| data.outcome_range())
            .ok_or_else(|| {
                Error::InvalidConfig("bounds need an outcome range (y_min, y_max)".into())
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapBounds {
    pub point: BoundsResult,
    pub estimates: BoundaryEstimates,
    pub r_mode: RMode,
    /// `(lower, upper)` for each successful replicate, in replicate order.
    pub replicates: Vec<(f64, f64)>,
    pub se_lower: f64,
    pub se_upper: f64,
    /// Jump `mu+ - mu-` (ratio of outcome and treatment jumps for fuzzy bounds).
    pub point_estimate: f64,
    pub point_se: f64,
    pub failed_replications: usize,
}

impl BootstrapBounds {
    pub fn imbens_manski(&self, alpha: f64) -> Result<IntervalCI> {
        imbens_manski_ci(
            self.point.lower,
            self.point.upper,
            self.se_lower,
            self.se_upper,
            alpha,
        )
    }
}

struct Evaluator<'a> {
    window: BoundaryWindow<'a>,
    method: BoundsMethod,
    range: OutcomeRange,
    opts: BoundsOptions,
}

struct Evaluation {
    bounds: BoundsResult,
    estimate: f64,
}

impl Evaluator<'_> {
    /// Boundary moments, plus treatment shares when needed.
    fn moments(&self, freq: Option<&[f64]>) -> Result<(BoundaryEstimates, Option<(f64, f64)>)> {
        let be = self.window.estimate(Column::Outcome, freq)?;
        let d = if self.method == BoundsMethod::Fuzzy {
            let (p, m) = self.window.means(Column::Treatment, freq)?;
            Some((p.intercept().clamp(0.0, 1.0), m.intercept().clamp(0.0, 1.0)))
        } else {
            None
        };
        Ok((be, d))
    }

    fn bounds(
        &self,
        be: &BoundaryEstimates,
        d: Option<(f64, f64)>,
        freq: Option<&[f64]>,
    ) -> Result<Evaluation> {
        let bounds = match self.method {
            BoundsMethod::Crude { assumption } => {
                crude_bounds(be, assumption, self.range, &self.opts)?
            }
            BoundsMethod::SharpType2 { grid_size } => {
                let model = WeightedOutcomes::new(&self.window.right_outcomes(freq))?;
                sharp_type2_bounds_with(&model, be, self.range, grid_size, &self.opts)?.0
            }
            BoundsMethod::Fuzzy => {
                let (d_plus, d_minus) =
                    d.ok_or_else(|| Error::Invariant("missing treatment shares".into()))?;
                fuzzy_bounds_with(
                    &FuzzyInputs {
                        be: be.clone(),
                        d_plus,
                        d_minus,
                    },
                    self.range,
                    &self.opts,
                )?
            }
        };
        let estimate = match d {
            Some((p, m)) => be.jump() / (p - m),
            None => be.jump(),
        };
        Ok(Evaluation { bounds, estimate })
    }
}

fn finite_pair(b: &BoundsResult) -> Result<(f64, f64)> {
    if b.lower.is_finite() && b.upper.is_finite() {
        Ok((b.lower, b.upper))
    } else {
        Err(Error::Invariant(format!(
            "replicate bounds are not finite ({:?})",
            b.status
        )))
    }
}

/// Bootstraps the bounds under one assumption in the configured r mode.
pub fn bootstrap_bounds(
    data: &Dataset,
    assumption: TypeAssumption,
    cfg: &BootstrapConfig,
    fit: &FitConfig,
) -> Result<BootstrapBounds> {
    bootstrap_method(data, BoundsMethod::Crude { assumption }, cfg, fit)
}

pub fn bootstrap_method(
    data: &Dataset,
    method: BoundsMethod,
    cfg: &BootstrapConfig,
    fit: &FitConfig,
) -> Result<BootstrapBounds> {
    let (fixed, random) = bootstrap_both_modes(data, method, cfg, fit)?;
    match cfg.r_mode {
        RMode::Fixed => fixed,
        RMode::Random => random,
    }
}

/// Fixed- and random-r results from a single set of replicates.
///
/// The outer error covers the full-sample estimate; each mode then succeeds
/// or fails on its own replicates.
pub fn bootstrap_both_modes(
    data: &Dataset,
    method: BoundsMethod,
    cfg: &BootstrapConfig,
    fit: &FitConfig,
) -> Result<(Result<BootstrapBounds>, Result<BootstrapBounds>)> {
    cfg.validate()?;
    if method == BoundsMethod::Fuzzy && !data.has_treatment() {
        return Err(Error::InvalidDataset(
            "fuzzy bounds need a treatment column".into(),
        ));
    }
    let ev = Evaluator {
        window: BoundaryWindow::new(data, &fit.boundary)?,
        method,
        range: fit.range(data)?,
        opts: fit.bounds,
    };
    let (be, d) = ev.moments(None)?;
    let point = ev.bounds(&be, d, None)?;
    let draws = run_replicates(cfg.replications, cfg.seed, |rng| {
        let freq = window_multiplicities(rng, ev.window.n_total(), ev.window.len());
        let (be_b, d_b) = ev.moments(Some(&freq))?;
        let random = ev.bounds(&be_b, d_b, Some(&freq))?;
        let fixed_be = be_b.with_densities(be.f_plus, be.f_minus);
        let fixed = ev.bounds(&fixed_be, d_b, Some(&freq))?;
        Ok((fixed, random))
    });
    let assemble = |mode: RMode| -> Result<BootstrapBounds> {
        let per_mode: Vec<Result<(f64, f64, f64)>> = draws
            .iter()
            .map(|r| match r {
                Ok((fixed, random)) => {
                    let e = if mode == RMode::Fixed { fixed } else { random };
                    finite_pair(&e.bounds).map(|(l, u)| (l, u, e.estimate))
                }
                Err(e) => Err(e.clone()),
            })
            .collect();
        let (ok, failed) = collect_successes(per_mode)?;
        let lows: Vec<f64> = ok.iter().map(|t| t.0).collect();
        let highs: Vec<f64> = ok.iter().map(|t| t.1).collect();
        let ests: Vec<f64> = ok.iter().map(|t| t.2).filter(|v| v.is_finite()).collect();
        Ok(BootstrapBounds {
            point: point.bounds.clone(),
            estimates: be.clone(),
            r_mode: mode,
            replicates: ok.iter().map(|t| (t.0, t.1)).collect(),
            se_lower: std_dev(&lows),
            se_upper: std_dev(&highs),
            point_estimate: point.estimate,
            point_se: std_dev(&ests),
            failed_replications: failed,
        })
    };
    Ok((assemble(RMode::Fixed), assemble(RMode::Random)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalCI {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub method: String,
    pub se_lower: f64,
    pub se_upper: f64,
    pub c_bar: f64,
}

impl IntervalCI {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Solves `Phi(c + delta) - Phi(-c) = 1 - alpha` for `c` by bisection, where
/// `delta` is the set width over the larger standard error.
pub fn im_critical_value(delta: f64, alpha: f64) -> f64 {
    let n = Normal::standard();
    let mut lo = n.inverse_cdf(1.0 - alpha);
    let mut hi = n.inverse_cdf(1.0 - alpha / 2.0);
    if delta.is_infinite() {
        return lo;
    }
    let f = |c: f64| n.cdf(c + delta) - n.cdf(-c) - (1.0 - alpha);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn imbens_manski_ci(
    lower_hat: f64,
    upper_hat: f64,
    se_lower: f64,
    se_upper: f64,
    alpha: f64,
) -> Result<IntervalCI> {
    let all_finite = [lower_hat, upper_hat, se_lower, se_upper]
        .iter()
        .all(|v| v.is_finite());
    if !all_finite || se_lower < 0.0 || se_upper < 0.0 {
        return Err(Error::InvalidInputs(
            "set endpoints must be finite and standard errors nonnegative".into(),
        ));
    }
    if lower_hat > upper_hat {
        return Err(Error::InvalidInputs(format!(
            "lower endpoint {lower_hat} exceeds upper endpoint {upper_hat}"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInputs(format!(
            "alpha = {alpha} outside (0, 1)"
        )));
    }
    let sigma = se_lower.max(se_upper);
    let width = upper_hat - lower_hat;
    let c_bar = if sigma > 0.0 {
        im_critical_value(width / sigma, alpha)
    } else {
        let n = Normal::standard();
        n.inverse_cdf(1.0 - if width > 0.0 { alpha } else { alpha / 2.0 })
    };
    Ok(IntervalCI {
        lo: lower_hat - c_bar * se_lower,
        hi: upper_hat + c_bar * se_upper,
        alpha,
        method: "imbens-manski".into(),
        se_lower,
        se_upper,
        c_bar,
    })
}
