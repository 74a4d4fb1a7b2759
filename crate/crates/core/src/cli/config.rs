//! Run configuration assembled from flags, an optional config file and
//! defaults, in that order of precedence.
//!
//! Config files are either flat `key = value` text (`#` starts a comment) or
//! a JSON object. Keys are the long flag names with `-` or `_`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boundary::{BandwidthOverrides, BoundaryConfig, OutcomeRange};
use crate::bounds::{BoundsOptions, TypeAssumption};
use crate::diagnostics::{DEFAULT_ALPHA, MIN_REPLICATIONS};
use crate::error::{Error, Result};
use crate::inference::{BootstrapConfig, FitConfig, RMode, DEFAULT_BOOTSTRAP};
use crate::localfit::{BandwidthRule, KernelKind};

/// Largest polynomial order accepted for the report blocks.
pub const MAX_REPORT_ORDER: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub x: String,
    pub y: String,
    pub d: Option<String>,
    pub covariates: Vec<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            x: "x".into(),
            y: "y".into(),
            d: None,
            covariates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub cutoff: f64,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub assumption: TypeAssumption,
    pub orders: Vec<usize>,
    pub bandwidths: BandwidthOverrides,
    pub kernel: KernelKind,
    pub bw_rule: BandwidthRule,
    pub alpha: f64,
    pub boot: usize,
    pub seed: u64,
    pub r_mode: RMode,
    pub sharp: bool,
    pub fuzzy: bool,
    pub clamp: bool,
    pub columns: ColumnMap,
    pub bin_width: Option<f64>,
}

impl RunConfig {
    /// Defaults around a given cutoff.
    pub fn new(cutoff: f64) -> Self {
        RunConfig {
            cutoff,
            y_min: None,
            y_max: None,
            assumption: TypeAssumption::Type2,
            orders: vec![0, 1, 2],
            bandwidths: BandwidthOverrides::default(),
            kernel: KernelKind::default(),
            bw_rule: BandwidthRule::default(),
            alpha: DEFAULT_ALPHA,
            boot: DEFAULT_BOOTSTRAP,
            seed: 0,
            r_mode: RMode::Fixed,
            sharp: false,
            fuzzy: false,
            clamp: false,
            columns: ColumnMap::default(),
            bin_width: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.cutoff.is_finite() {
            return bad(format!("cutoff {} is not finite", self.cutoff));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} outside (0, 1)", self.alpha));
        }
        if self.boot < MIN_REPLICATIONS {
            return bad(format!(
                "--boot {} is below the minimum of {MIN_REPLICATIONS}",
                self.boot
            ));
        }
        if self.orders.is_empty() {
            return bad("at least one order is required".into());
        }
        if let Some(o) = self.orders.iter().find(|&&o| o > MAX_REPORT_ORDER) {
            return bad(format!("order {o} not supported (0, 1 or 2)"));
        }
        match (self.y_min, self.y_max) {
            (Some(lo), Some(hi)) => {
                OutcomeRange::new(lo, hi)?;
            }
            (None, None) => {}
            _ => return bad("--y-min and --y-max must be given together".into()),
        }
        let o = &self.bandwidths;
        for h in [o.mean_left, o.mean_right, o.density_left, o.density_right]
            .into_iter()
            .flatten()
        {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("bandwidth {h} must be positive"));
            }
        }
        if let Some(w) = self.bin_width {
            if !(w > 0.0 && w.is_finite()) {
                return bad(format!("bin width {w} must be positive"));
            }
        }
        if self.fuzzy && self.columns.d.is_none() {
            return bad("--fuzzy needs a treatment column (--col-d)".into());
        }
        Ok(())
    }

    pub fn outcome_range(&self) -> Option<OutcomeRange> {
        match (self.y_min, self.y_max) {
            (Some(low), Some(high)) => Some(OutcomeRange { low, high }),
            _ => None,
        }
    }

    pub fn boundary(&self, order: usize) -> BoundaryConfig {
        BoundaryConfig {
            kernel: self.kernel,
            bandwidths: self.bandwidths,
            bandwidth_rule: self.bw_rule,
            ..BoundaryConfig::with_order(order)
        }
    }

    pub fn fit(&self, order: usize, range: OutcomeRange) -> FitConfig {
        FitConfig {
            boundary: self.boundary(order),
            outcome_range: Some(range),
            bounds: BoundsOptions {
                clamp: self.clamp,
                ..BoundsOptions::default()
            },
        }
    }

    pub fn bootstrap(&self, seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            replications: self.boot,
            seed,
            r_mode: self.r_mode,
            alpha: self.alpha,
        }
    }
}

/// Partially specified configuration; unset fields fall through to the next
/// source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub cutoff: Option<f64>,
    pub y_min: Option<f64>,
    pub y_max: Option<f64>,
    pub assumption: Option<TypeAssumption>,
    pub orders: Option<Vec<usize>>,
    pub bw_mean_left: Option<f64>,
    pub bw_mean_right: Option<f64>,
    pub bw_dens_left: Option<f64>,
    pub bw_dens_right: Option<f64>,
    pub kernel: Option<KernelKind>,
    pub bw_rule: Option<BandwidthRule>,
    pub alpha: Option<f64>,
    pub boot: Option<usize>,
    pub seed: Option<u64>,
    pub r_mode: Option<RMode>,
    pub sharp: Option<bool>,
    pub fuzzy: Option<bool>,
    pub clamp: Option<bool>,
    pub col_x: Option<String>,
    pub col_y: Option<String>,
    pub col_d: Option<String>,
    pub covariates: Option<Vec<String>>,
    pub bin_width: Option<f64>,
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse `{v}` for `{key}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::InvalidConfig(format!(
            "cannot parse `{v}` as a boolean for `{key}`"
        ))),
    }
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ConfigLayer {
    /// Sets one key; unknown keys are configuration errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let k = key.as_str();
        let v = value.trim();
        match k {
            "cutoff" => self.cutoff = Some(parse(k, v)?),
            "y_min" => self.y_min = Some(parse(k, v)?),
            "y_max" => self.y_max = Some(parse(k, v)?),
            "type" => self.assumption = Some(v.parse()?),
            "order" => self.orders = Some(parse_list(k, v)?),
            "bw_mean_left" => self.bw_mean_left = Some(parse(k, v)?),
            "bw_mean_right" => self.bw_mean_right = Some(parse(k, v)?),
            "bw_dens_left" => self.bw_dens_left = Some(parse(k, v)?),
            "bw_dens_right" => self.bw_dens_right = Some(parse(k, v)?),
            "kernel" => self.kernel = Some(v.parse()?),
            "bw_rule" => self.bw_rule = Some(v.parse()?),
            "alpha" => self.alpha = Some(parse(k, v)?),
            "boot" => self.boot = Some(parse(k, v)?),
            "seed" => self.seed = Some(parse(k, v)?),
            "r_mode" => self.r_mode = Some(v.parse()?),
            "sharp" => self.sharp = Some(parse_bool(k, v)?),
            "fuzzy" => self.fuzzy = Some(parse_bool(k, v)?),
            "clamp" => self.clamp = Some(parse_bool(k, v)?),
            "col_x" => self.col_x = Some(v.to_string()),
            "col_y" => self.col_y = Some(v.to_string()),
            "col_d" => self.col_d = Some(v.to_string()),
            "covariate" | "covariates" => {
                self.covariates = Some(
                    v.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect(),
                )
            }
            "bin_width" => self.bin_width = Some(parse(k, v)?),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown config key `{other}`"
                )))
            }
        }
        Ok(())
    }

    /// Parses a config file body, detecting JSON by a leading `{`.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut layer = ConfigLayer::default();
        if text.trim_start().starts_with('{') {
            let map: BTreeMap<String, serde_json::Value> = serde_json::from_str(text)
                .map_err(|e| Error::InvalidConfig(format!("config JSON: {e}")))?;
            for (k, v) in map {
                let s = match v {
                    serde_json::Value::String(s) => s,
                    serde_json::Value::Array(items) => items
                        .iter()
                        .map(|i| match i {
                            serde_json::Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect::<Vec<_>>()
                        .join(","),
                    serde_json::Value::Null => continue,
                    other => other.to_string(),
                };
                layer.set(&k, &s)?;
            }
            return Ok(layer);
        }
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("config line {}: expected `key = value`", i + 1))
            })?;
            layer.set(k, v)?;
        }
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::InvalidConfig(format!(
                "config file {} not found",
                path.display()
            )));
        }
        let text = std::fs::read_to_string(path)?;
        Self::parse_text(&text)
    }

    /// Fields of `self`, falling back to `other` where unset.
    pub fn or(self, other: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            cutoff: self.cutoff.or(other.cutoff),
            y_min: self.y_min.or(other.y_min),
            y_max: self.y_max.or(other.y_max),
            assumption: self.assumption.or(other.assumption),
            orders: self.orders.or(other.orders),
            bw_mean_left: self.bw_mean_left.or(other.bw_mean_left),
            bw_mean_right: self.bw_mean_right.or(other.bw_mean_right),
            bw_dens_left: self.bw_dens_left.or(other.bw_dens_left),
            bw_dens_right: self.bw_dens_right.or(other.bw_dens_right),
            kernel: self.kernel.or(other.kernel),
            bw_rule: self.bw_rule.or(other.bw_rule),
            alpha: self.alpha.or(other.alpha),
            boot: self.boot.or(other.boot),
            seed: self.seed.or(other.seed),
            r_mode: self.r_mode.or(other.r_mode),
            sharp: self.sharp.or(other.sharp),
            fuzzy: self.fuzzy.or(other.fuzzy),
            clamp: self.clamp.or(other.clamp),
            col_x: self.col_x.or(other.col_x),
            col_y: self.col_y.or(other.col_y),
            col_d: self.col_d.or(other.col_d),
            covariates: self.covariates.or(other.covariates),
            bin_width: self.bin_width.or(other.bin_width),
        }
    }

    /// Fills remaining gaps with defaults and validates. The cutoff has no default.
    pub fn resolve(self) -> Result<RunConfig> {
        let cutoff = self
            .cutoff
            .ok_or_else(|| Error::InvalidConfig("--cutoff is required".into()))?;
        let d = RunConfig::new(cutoff);
        let cfg = RunConfig {
            cutoff,
            y_min: self.y_min,
            y_max: self.y_max,
            assumption: self.assumption.unwrap_or(d.assumption),
            orders: self.orders.unwrap_or(d.orders),
            bandwidths: BandwidthOverrides {
                mean_left: self.bw_mean_left,
                mean_right: self.bw_mean_right,
                density_left: self.bw_dens_left,
                density_right: self.bw_dens_right,
            },
            kernel: self.kernel.unwrap_or(d.kernel),
            bw_rule: self.bw_rule.unwrap_or(d.bw_rule),
            alpha: self.alpha.unwrap_or(d.alpha),
            boot: self.boot.unwrap_or(d.boot),
            seed: self.seed.unwrap_or(d.seed),
            r_mode: self.r_mode.unwrap_or(d.r_mode),
            sharp: self.sharp.unwrap_or(d.sharp),
            fuzzy: self.fuzzy.unwrap_or(d.fuzzy),
            clamp: self.clamp.unwrap_or(d.clamp),
            columns: ColumnMap {
                x: self.col_x.unwrap_or(d.columns.x),
                y: self.col_y.unwrap_or(d.columns.y),
                d: self.col_d,
                covariates: self.covariates.unwrap_or_default(),
            },
            bin_width: self.bin_width,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
