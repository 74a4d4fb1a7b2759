//! Partial-identification bounds on the treatment effect at the cutoff.

mod covariate;
mod fuzzy;
mod sharp;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryEstimates, OutcomeRange};
use crate::error::{Error, Result};

pub use covariate::covariate_bounds;
pub use fuzzy::{fuzzy_bounds, fuzzy_bounds_with, FuzzyInputs, FuzzyMoments};
pub use sharp::{
    binary_sharp_gfuncs, sharp_type2_bounds, sharp_type2_bounds_with, BinaryOutcome, TrimmingCurve,
    TrimmingModel, WeightedOutcomes, DEFAULT_GRID_SIZE,
};

/// Largest `r - 1` still treated as sampling noise around `r = 1`.
pub const DEFAULT_R_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeAssumption {
    Type2,
    Type3,
    Type4,
    Mixed,
}

impl TypeAssumption {
    pub const ALL: [TypeAssumption; 4] = [
        TypeAssumption::Type2,
        TypeAssumption::Type3,
        TypeAssumption::Type4,
        TypeAssumption::Mixed,
    ];

    /// Label of the estimand the interval bounds.
    pub fn target(self) -> &'static str {
        match self {
            TypeAssumption::Type2 => "E[Y(1)-Y(0) | X*=c]",
            TypeAssumption::Type3 => "E[Y(1)-Y(0) | X*=c or (X!=X*, X=c)]",
            TypeAssumption::Type4 => "E[Y(1)-Y(0) | X*=c, X=X*]",
            TypeAssumption::Mixed => "theta~ = sum_t pi~_t theta_t",
        }
    }
}

impl fmt::Display for TypeAssumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TypeAssumption::Type2 => "type2",
            TypeAssumption::Type3 => "type3",
            TypeAssumption::Type4 => "type4",
            TypeAssumption::Mixed => "mixed",
        })
    }
}

impl FromStr for TypeAssumption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "type2" | "2" => Ok(TypeAssumption::Type2),
            "type3" | "3" => Ok(TypeAssumption::Type3),
            "type4" | "4" => Ok(TypeAssumption::Type4),
            "mixed" => Ok(TypeAssumption::Mixed),
            other => Err(Error::InvalidConfig(format!(
                "unknown type assumption `{other}` (expected type2, type3, type4 or mixed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundStatus {
    Informative,
    Refuted,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    pub lower: f64,
    pub upper: f64,
    pub target: String,
    pub assumption: TypeAssumption,
    pub status: BoundStatus,
    pub clamped: bool,
    pub outcome_range: OutcomeRange,
    pub note: Option<String>,
}

impl BoundsResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn is_informative(&self) -> bool {
        self.status == BoundStatus::Informative
    }

    /// Copy clamped to `[y_L - y_U, y_U - y_L]`, the logical range of a
    /// difference of two outcomes.
    pub fn clamp_to_range(&self) -> BoundsResult {
        let span = self.outcome_range.width();
        let lower = self.lower.clamp(-span, span);
        let upper = self.upper.clamp(-span, span);
        let mut out = self.clone();
        out.clamped |= lower != self.lower || upper != self.upper;
        out.lower = lower;
        out.upper = upper;
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsOptions {
    pub r_tolerance: f64,
    pub clamp: bool,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        BoundsOptions {
            r_tolerance: DEFAULT_R_TOLERANCE,
            clamp: false,
        }
    }
}

/// Effective ratio and refutation note for an estimated `r`.
///
/// Within tolerance above one, `r` is treated as 1; beyond it the raw value
/// is kept and the bound is refuted.
pub(crate) fn effective_r(r: f64, tol: f64) -> (f64, Option<String>) {
    if r > 1.0 + tol {
        (
            r,
            Some(format!(
                "r = {r:.4} exceeds 1 + {tol}: the density rises to the left of the cutoff, \
                 contradicting one-sided manipulation"
            )),
        )
    } else {
        (r.min(1.0), None)
    }
}

/// The two crude branches for one outcome endpoint `y`:
/// `(mu+ - y) - r (mu- - y)` and `(mu+ - y) / r - (mu- - y)`.
#[inline]
pub(crate) fn crude_branches(mu_plus: f64, mu_minus: f64, r: f64, y: f64) -> (f64, f64) {
    (
        (mu_plus - y) - r * (mu_minus - y),
        (mu_plus - y) / r - (mu_minus - y),
    )
}

pub fn crude_bounds(
    be: &BoundaryEstimates,
    assumption: TypeAssumption,
    range: OutcomeRange,
    opts: &BoundsOptions,
) -> Result<BoundsResult> {
    let range = OutcomeRange::new(range.low, range.high)?;
    let (r, note) = effective_r(be.r, opts.r_tolerance);
    let (l3, l4) = crude_branches(be.mu_plus, be.mu_minus, r, range.high);
    let (u3, u4) = crude_branches(be.mu_plus, be.mu_minus, r, range.low);
    let (lower, upper) = match assumption {
        TypeAssumption::Type2 | TypeAssumption::Mixed => (l3.min(l4), u3.max(u4)),
        TypeAssumption::Type3 => (l3, u3),
        TypeAssumption::Type4 => (l4, u4),
    };
    let status = if note.is_some() {
        BoundStatus::Refuted
    } else {
        BoundStatus::Informative
    };
    let out = BoundsResult {
        lower,
        upper,
        target: assumption.target().to_string(),
        assumption,
        status,
        clamped: false,
        outcome_range: range,
        note,
    };
    Ok(if opts.clamp {
        out.clamp_to_range()
    } else {
        out
    })
}

pub fn type2_bounds(be: &BoundaryEstimates, y_low: f64, y_high: f64) -> Result<BoundsResult> {
    crude_bounds(
        be,
        TypeAssumption::Type2,
        OutcomeRange::new(y_low, y_high)?,
        &BoundsOptions::default(),
    )
}

pub fn type3_bounds(be: &BoundaryEstimates, y_low: f64, y_high: f64) -> Result<BoundsResult> {
    crude_bounds(
        be,
        TypeAssumption::Type3,
        OutcomeRange::new(y_low, y_high)?,
        &BoundsOptions::default(),
    )
}

pub fn type4_bounds(be: &BoundaryEstimates, y_low: f64, y_high: f64) -> Result<BoundsResult> {
    crude_bounds(
        be,
        TypeAssumption::Type4,
        OutcomeRange::new(y_low, y_high)?,
        &BoundsOptions::default(),
    )
}

/// Outer interval for the mixed-type estimand; numerically the Type 2 interval.
pub fn mixed_bounds(be: &BoundaryEstimates, y_low: f64, y_high: f64) -> Result<BoundsResult> {
    crude_bounds(
        be,
        TypeAssumption::Mixed,
        OutcomeRange::new(y_low, y_high)?,
        &BoundsOptions::default(),
    )
}
