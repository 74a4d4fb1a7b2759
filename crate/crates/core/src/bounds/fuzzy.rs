use serde::{Deserialize, Serialize};

use super::{effective_r, BoundStatus, BoundsOptions, BoundsResult, TypeAssumption};
use crate::boundary::{BoundaryEstimates, OutcomeRange};
use crate::error::{Error, Result};

pub const FUZZY_TARGET: &str = "rho_0 = rho_Y / rho_D";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyInputs {
    pub be: BoundaryEstimates,
    pub d_plus: f64,
    pub d_minus: f64,
}

/// Bound ingredients `R_Y` and `R_D` (lower, upper).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzyMoments {
    pub ry_low: f64,
    pub ry_high: f64,
    pub rd_low: f64,
    pub rd_high: f64,
}

impl FuzzyInputs {
    pub fn moments(&self, range: OutcomeRange) -> FuzzyMoments {
        let (fp, fm) = (self.be.f_plus, self.be.f_minus);
        let r_of = |plus: f64, minus: f64, y: f64| fp * (plus - y) - fm * (minus - y);
        FuzzyMoments {
            ry_low: r_of(self.be.mu_plus, self.be.mu_minus, range.high),
            ry_high: r_of(self.be.mu_plus, self.be.mu_minus, range.low),
            rd_low: r_of(self.d_plus, self.d_minus, 1.0),
            rd_high: r_of(self.d_plus, self.d_minus, 0.0),
        }
    }
}

pub fn fuzzy_bounds(fi: &FuzzyInputs, y_low: f64, y_high: f64) -> Result<BoundsResult> {
    fuzzy_bounds_with(
        fi,
        OutcomeRange::new(y_low, y_high)?,
        &BoundsOptions::default(),
    )
}

/// Bounds on the ratio of outcome and treatment jumps among non-manipulators.
///
/// Never clamped: a ratio of jumps has no range implied by the outcome support.
pub fn fuzzy_bounds_with(
    fi: &FuzzyInputs,
    range: OutcomeRange,
    opts: &BoundsOptions,
) -> Result<BoundsResult> {
    let range = OutcomeRange::new(range.low, range.high)?;
    for d in [fi.d_plus, fi.d_minus] {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::InvalidInputs(format!(
                "treatment share {d} outside [0, 1]"
            )));
        }
    }
    let m = fi.moments(range);
    let (_, refuted) = effective_r(fi.be.r, opts.r_tolerance);
    let mut out = BoundsResult {
        lower: f64::NEG_INFINITY,
        upper: f64::INFINITY,
        target: FUZZY_TARGET.to_string(),
        assumption: TypeAssumption::Type2,
        status: BoundStatus::Informative,
        clamped: false,
        outcome_range: range,
        note: None,
    };
    if m.rd_low <= 0.0 {
        out.status = BoundStatus::Degenerate;
        out.note = Some(format!(
            "lower treatment jump bound {:.4} is not positive: no informative bounds",
            m.rd_low
        ));
        return Ok(out);
    }
    out.lower = (m.ry_low / m.rd_low).min(m.ry_low / m.rd_high);
    out.upper = (m.ry_high / m.rd_low).max(m.ry_high / m.rd_high);
    if refuted.is_some() {
        out.status = BoundStatus::Refuted;
        out.note = refuted;
    }
    Ok(out)
}
