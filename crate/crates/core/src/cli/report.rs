//! The analysis pipeline behind `analyze` and its JSON report.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boundary::{
    Bandwidths, BoundaryWarning, BoundaryWindow, Column, Dataset, OutcomeRange, SideCounts,
};
use crate::bounds::{BoundStatus, BoundsResult, TypeAssumption};
use crate::diagnostics::{
    density_discontinuity_test, run_sequential_protocol, ProtocolConfig, TestResult, Verdict,
};
use crate::error::{Error, Result};
use crate::inference::{bootstrap_both_modes, BootstrapBounds, BoundsMethod, IntervalCI};
use crate::resample::derive_seed;

use super::config::RunConfig;
use super::ingest::ingest;

pub const SCHEMA_VERSION: u32 = 1;

/// Share of duplicated running-variable values above which a warning is added.
const DUPLICATE_WARNING: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n: usize,
    pub n_left: usize,
    pub n_right: usize,
    pub cutoff: f64,
    pub duplicate_x_fraction: f64,
    pub outcome_range: OutcomeRange,
    /// `config` or `sample` (observed min and max of the outcome).
    pub outcome_range_source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceEntry {
    pub covariate: String,
    pub test: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolBlock {
    pub order: usize,
    pub alpha: f64,
    pub verdict: Verdict,
    pub density: TestResult,
    pub balance: Option<Vec<BalanceEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryBlock {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointBlock {
    pub estimate: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetBlock {
    pub set: BoundsResult,
    pub se_lower_fixed_r: Option<f64>,
    pub se_upper_fixed_r: Option<f64>,
    pub se_lower_random_r: Option<f64>,
    pub se_upper_random_r: Option<f64>,
    pub ci_fixed_r: Option<IntervalCI>,
    pub ci_random_r: Option<IntervalCI>,
    /// A confidence limit was cut back to the logical range.
    pub ci_clamped: bool,
    pub failed_replications_fixed_r: Option<usize>,
    pub failed_replications_random_r: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderBlock {
    pub order: usize,
    pub discontinuity: TestResult,
    pub r: f64,
    pub bandwidths: Bandwidths,
    pub n_effective: SideCounts,
    pub boundary: BoundaryBlock,
    pub point: PointBlock,
    pub identified_set: SetBlock,
    pub sharp: Option<SetBlock>,
    pub fuzzy: Option<FuzzyBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyBlock {
    pub d_plus: f64,
    pub d_minus: f64,
    pub wald: PointBlock,
    pub bounds: SetBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub data: DataSummary,
    pub config: RunConfig,
    pub protocol: ProtocolBlock,
    pub orders: Vec<OrderBlock>,
    pub warnings: Vec<String>,
}

impl Report {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s =
            serde_json::to_string_pretty(self).map_err(|e| Error::Invariant(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }
}

/// Order used for the protocol verdict: 1 when requested, else the first.
pub fn protocol_order(orders: &[usize]) -> usize {
    if orders.contains(&1) {
        1
    } else {
        orders[0]
    }
}

fn warning_text(order: usize, w: &BoundaryWarning) -> String {
    match w {
        BoundaryWarning::DensityClipped { side, raw } => {
            format!("order {order}: {side} density estimate {raw:.4e} was clipped to the floor")
        }
        BoundaryWarning::RatioAboveOne { r } => {
            format!("order {order}: r = {r:.4} exceeds 1")
        }
    }
}

fn interval(
    mode: &Result<BootstrapBounds>,
    alpha: f64,
    label: &str,
    clamp: Option<f64>,
    warnings: &mut Vec<String>,
) -> (Option<IntervalCI>, bool) {
    let b = match mode {
        Ok(b) => b,
        Err(e) => {
            warnings.push(format!("{label}: no confidence interval ({e})"));
            return (None, false);
        }
    };
    match b.imbens_manski(alpha) {
        Ok(mut ci) => {
            let mut clamped = false;
            if let Some(span) = clamp {
                let (lo, hi) = (ci.lo.max(-span), ci.hi.min(span));
                clamped = lo != ci.lo || hi != ci.hi;
                ci.lo = lo;
                ci.hi = hi;
            }
            (Some(ci), clamped)
        }
        Err(e) => {
            warnings.push(format!("{label}: no confidence interval ({e})"));
            (None, false)
        }
    }
}

fn set_block(
    fixed: &Result<BootstrapBounds>,
    random: &Result<BootstrapBounds>,
    point: BoundsResult,
    cfg: &RunConfig,
    label: &str,
    warnings: &mut Vec<String>,
) -> SetBlock {
    let span =
        (cfg.clamp && point.status != BoundStatus::Degenerate).then(|| point.outcome_range.width());
    let (ci_fixed_r, c1) = interval(
        fixed,
        cfg.alpha,
        &format!("{label}, fixed r"),
        span,
        warnings,
    );
    let (ci_random_r, c2) = interval(
        random,
        cfg.alpha,
        &format!("{label}, random r"),
        span,
        warnings,
    );
    if point.status == BoundStatus::Refuted {
        warnings.push(format!(
            "{label}: {}",
            point
                .note
                .clone()
                .unwrap_or_else(|| "bounds refuted".into())
        ));
    }
    SetBlock {
        se_lower_fixed_r: fixed.as_ref().ok().map(|b| b.se_lower),
        se_upper_fixed_r: fixed.as_ref().ok().map(|b| b.se_upper),
        se_lower_random_r: random.as_ref().ok().map(|b| b.se_lower),
        se_upper_random_r: random.as_ref().ok().map(|b| b.se_upper),
        ci_fixed_r,
        ci_random_r,
        ci_clamped: c1 || c2,
        failed_replications_fixed_r: fixed.as_ref().ok().map(|b| b.failed_replications),
        failed_replications_random_r: random.as_ref().ok().map(|b| b.failed_replications),
        set: point,
    }
}

fn order_block(
    data: &Dataset,
    cfg: &RunConfig,
    order: usize,
    range: OutcomeRange,
    warnings: &mut Vec<String>,
) -> Result<OrderBlock> {
    let boundary = cfg.boundary(order);
    let discontinuity =
        density_discontinuity_test(data, &boundary, cfg.boot, derive_seed(cfg.seed, "density"))?;
    let fit = cfg.fit(order, range);
    let seed = |label: &str| derive_seed(cfg.seed, &format!("{label}:order{order}"));
    let crude = BoundsMethod::Crude {
        assumption: cfg.assumption,
    };
    let (fixed, random) = bootstrap_both_modes(data, crude, &cfg.bootstrap(seed("bounds")), &fit)?;
    let base = fixed
        .as_ref()
        .or(random.as_ref())
        .map_err(Clone::clone)?
        .clone();
    let be = base.estimates.clone();
    for w in &be.warnings {
        warnings.push(warning_text(order, w));
    }
    let label = format!("order {order}, {}", cfg.assumption);
    let identified_set = set_block(&fixed, &random, base.point.clone(), cfg, &label, warnings);
    let sharp = if cfg.sharp {
        if cfg.assumption != TypeAssumption::Type2 {
            warnings.push(format!(
                "order {order}: sharp bounds are computed for Type 2"
            ));
        }
        let (f, r) = bootstrap_both_modes(
            data,
            BoundsMethod::sharp(),
            &cfg.bootstrap(seed("sharp")),
            &fit,
        )?;
        let point = f
            .as_ref()
            .or(r.as_ref())
            .map_err(Clone::clone)?
            .point
            .clone();
        Some(set_block(
            &f,
            &r,
            point,
            cfg,
            &format!("order {order}, sharp"),
            warnings,
        ))
    } else {
        None
    };
    let fuzzy = if cfg.fuzzy {
        let (f, r) = bootstrap_both_modes(
            data,
            BoundsMethod::Fuzzy,
            &cfg.bootstrap(seed("fuzzy")),
            &fit,
        )?;
        let main = f.as_ref().or(r.as_ref()).map_err(Clone::clone)?.clone();
        let window = BoundaryWindow::new(data, &boundary)?;
        let (dp, dm) = window.means(Column::Treatment, None)?;
        Some(FuzzyBlock {
            d_plus: dp.intercept().clamp(0.0, 1.0),
            d_minus: dm.intercept().clamp(0.0, 1.0),
            wald: PointBlock {
                estimate: main.point_estimate,
                se: main.point_se,
            },
            bounds: set_block(
                &f,
                &r,
                main.point,
                cfg,
                &format!("order {order}, fuzzy"),
                warnings,
            ),
        })
    } else {
        None
    };
    Ok(OrderBlock {
        order,
        discontinuity,
        r: be.r,
        bandwidths: be
            .bandwidths
            .ok_or_else(|| Error::Invariant("bandwidths missing".into()))?,
        n_effective: be
            .n_effective
            .ok_or_else(|| Error::Invariant("effective counts missing".into()))?,
        boundary: BoundaryBlock {
            mu_plus: be.mu_plus,
            mu_minus: be.mu_minus,
            f_plus: be.f_plus,
            f_minus: be.f_minus,
            r: be.r,
        },
        point: PointBlock {
            estimate: base.point_estimate,
            se: base.point_se,
        },
        identified_set,
        sharp,
        fuzzy,
    })
}

/// Runs the protocol and every requested order block on an ingested dataset.
pub fn analyze_dataset(data: &Dataset, cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let (range, source) = match cfg.outcome_range() {
        Some(r) => (r, "config"),
        None => {
            let (lo, hi) = data
                .observations()
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), o| {
                    (a.min(o.y), b.max(o.y))
                });
            warnings.push(format!(
                "outcome range not given; using the sample range [{lo}, {hi}]"
            ));
            (OutcomeRange::new(lo, hi)?, "sample")
        }
    };
    let dup = data.duplicate_x_fraction();
    if dup > DUPLICATE_WARNING {
        warnings.push(format!(
            "{:.1}% of running-variable values are duplicates",
            dup * 100.0
        ));
    }
    let n_left = data
        .observations()
        .iter()
        .filter(|o| o.x < data.cutoff())
        .count();
    let p_order = protocol_order(&cfg.orders);
    let protocol = run_sequential_protocol(
        data,
        &ProtocolConfig {
            boundary: cfg.boundary(p_order),
            replications: cfg.boot,
            alpha: cfg.alpha,
            seed: cfg.seed,
            covariates: cfg.columns.covariates.clone(),
        },
    )?;
    let mut orders = Vec::with_capacity(cfg.orders.len());
    for &order in &cfg.orders {
        orders.push(
            order_block(data, cfg, order, range, &mut warnings).map_err(|e| match e {
                Error::OnSide { .. } | Error::InsufficientData { .. } | Error::SingularDesign => {
                    Error::InvalidDataset(format!("order {order}: {e}"))
                }
                other => other,
            })?,
        );
    }
    if protocol.verdict == Verdict::DesignSuspect {
        warnings.push(
            "density test accepted but covariate balance failed: the design is suspect".into(),
        );
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        data: DataSummary {
            n: data.len(),
            n_left,
            n_right: data.len() - n_left,
            cutoff: data.cutoff(),
            duplicate_x_fraction: dup,
            outcome_range: range,
            outcome_range_source: source.into(),
        },
        config: cfg.clone(),
        protocol: ProtocolBlock {
            order: p_order,
            alpha: protocol.alpha,
            verdict: protocol.verdict,
            density: protocol.density,
            balance: protocol.balance.map(|v| {
                v.into_iter()
                    .map(|(covariate, test)| BalanceEntry { covariate, test })
                    .collect()
            }),
        },
        orders,
        warnings,
    })
}

/// Ingests `input` and analyses it.
pub fn analyze(cfg: &RunConfig, input: &Path) -> Result<Report> {
    cfg.validate()?;
    let data = ingest(input, &cfg.columns, cfg.cutoff, cfg.outcome_range())?;
    if data.observations().iter().all(|o| o.x < cfg.cutoff)
        || data.observations().iter().all(|o| o.x >= cfg.cutoff)
    {
        return Err(Error::InvalidDataset(format!(
            "all observations lie on one side of the cutoff {}",
            cfg.cutoff
        )));
    }
    analyze_dataset(&data, cfg)
}
