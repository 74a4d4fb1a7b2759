//! Sharp Type 2 bounds by trimming the right-boundary outcome distribution.

use serde::{Deserialize, Serialize};

use super::{crude_bounds, effective_r, BoundStatus, BoundsOptions, BoundsResult, TypeAssumption};
use crate::boundary::{BoundaryEstimates, OutcomeRange};
use crate::error::{Error, Result};

pub const DEFAULT_GRID_SIZE: usize = 201;

/// The scan over the counterfactual boundary density `z in [f-, f+]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrimmingCurve {
    pub z_grid: Vec<f64>,
    pub tau: Vec<f64>,
    pub g_low: Vec<f64>,
    pub g_high: Vec<f64>,
    pub theta_low: Vec<f64>,
    pub theta_high: Vec<f64>,
}

impl TrimmingCurve {
    pub fn len(&self) -> usize {
        self.z_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_grid.is_empty()
    }
}

/// Extreme means of a sub-population holding mass `tau` of the boundary
/// outcome distribution.
pub trait TrimmingModel {
    /// `(g_L, g_U)` for `tau in (0, 1]`: the mean of the lowest and of the
    /// highest `tau` mass.
    fn trimmed_means(&self, tau: f64) -> (f64, f64);
}

/// Closed forms for a binary outcome with `P(Y = 1 | X = c+) = mu_plus`.
pub fn binary_sharp_gfuncs(mu_plus: f64, tau: f64) -> (f64, f64) {
    if tau <= 0.0 {
        return (0.0, 1.0);
    }
    let lo = ((mu_plus - (1.0 - tau)) / tau).clamp(0.0, 1.0);
    let hi = (mu_plus / tau).clamp(0.0, 1.0);
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryOutcome {
    pub mu_plus: f64,
}

impl TrimmingModel for BinaryOutcome {
    fn trimmed_means(&self, tau: f64) -> (f64, f64) {
        binary_sharp_gfuncs(self.mu_plus, tau)
    }
}

/// Weighted empirical distribution; the atom straddling the trimming
/// quantile enters fractionally.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedOutcomes {
    /// Outcomes in ascending order.
    ys: Vec<f64>,
    /// Prefix sums of normalised weights and weighted outcomes, from the
    /// bottom (`asc_*`) and from the top (`desc_*`).
    asc_w: Vec<f64>,
    asc_wy: Vec<f64>,
    desc_w: Vec<f64>,
    desc_wy: Vec<f64>,
    mean: f64,
}

impl WeightedOutcomes {
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(points.len());
        for &(w, y) in points {
            if !w.is_finite() || w < 0.0 || !y.is_finite() {
                return Err(Error::InvalidInputs(format!(
                    "invalid weighted outcome ({w}, {y})"
                )));
            }
            if w > 0.0 {
                atoms.push((y, w));
            }
        }
        if atoms.is_empty() {
            return Err(Error::EmptyWindow);
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let ys: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        let ws: Vec<f64> = atoms.iter().map(|a| a.1 / total).collect();
        let prefix = |order: &mut dyn Iterator<Item = usize>| {
            let mut cw = vec![0.0];
            let mut cwy = vec![0.0];
            for i in order {
                cw.push(cw.last().unwrap() + ws[i]);
                cwy.push(cwy.last().unwrap() + ws[i] * ys[i]);
            }
            (cw, cwy)
        };
        let (asc_w, asc_wy) = prefix(&mut (0..ys.len()));
        let (desc_w, desc_wy) = prefix(&mut (0..ys.len()).rev());
        let mean = *asc_wy.last().unwrap();
        Ok(WeightedOutcomes {
            ys,
            asc_w,
            asc_wy,
            desc_w,
            desc_wy,
            mean,
        })
    }

    /// Discrete distribution given as `(value, probability)` atoms.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let swapped: Vec<(f64, f64)> = atoms.iter().map(|&(y, p)| (p, y)).collect();
        Self::new(&swapped)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn min(&self) -> f64 {
        self.ys[0]
    }

    pub fn max(&self) -> f64 {
        *self.ys.last().unwrap()
    }

    fn trimmed(cw: &[f64], cwy: &[f64], y_at: impl Fn(usize) -> f64, tau: f64) -> f64 {
        let n = cw.len() - 1;
        let k = cw.partition_point(|&c| c < tau).clamp(1, n);
        let partial = (tau - cw[k - 1]).clamp(0.0, cw[k] - cw[k - 1]);
        (cwy[k - 1] + partial * y_at(k - 1)) / (cw[k - 1] + partial)
    }

    pub fn lower_trimmed_mean(&self, tau: f64) -> f64 {
        Self::trimmed(&self.asc_w, &self.asc_wy, |i| self.ys[i], tau)
    }

    pub fn upper_trimmed_mean(&self, tau: f64) -> f64 {
        let n = self.ys.len();
        Self::trimmed(&self.desc_w, &self.desc_wy, |i| self.ys[n - 1 - i], tau)
    }
}

impl TrimmingModel for WeightedOutcomes {
    fn trimmed_means(&self, tau: f64) -> (f64, f64) {
        (self.lower_trimmed_mean(tau), self.upper_trimmed_mean(tau))
    }
}

/// Sharp Type 2 bounds from the kernel-weighted right-of-cutoff outcomes
/// `(weight, y)`.
pub fn sharp_type2_bounds(
    window: &[(f64, f64)],
    be: &BoundaryEstimates,
    y_low: f64,
    y_high: f64,
    grid_size: usize,
) -> Result<(BoundsResult, TrimmingCurve)> {
    let range = OutcomeRange::new(y_low, y_high)?;
    if grid_size < 2 {
        return Err(Error::InvalidGrid(grid_size));
    }
    let model = WeightedOutcomes::new(window)?;
    sharp_type2_bounds_with(&model, be, range, grid_size, &BoundsOptions::default())
}

pub fn sharp_type2_bounds_with<M: TrimmingModel + ?Sized>(
    model: &M,
    be: &BoundaryEstimates,
    range: OutcomeRange,
    grid_size: usize,
    opts: &BoundsOptions,
) -> Result<(BoundsResult, TrimmingCurve)> {
    let range = OutcomeRange::new(range.low, range.high)?;
    if grid_size < 2 {
        return Err(Error::InvalidGrid(grid_size));
    }
    let (r, note) = effective_r(be.r, opts.r_tolerance);
    if note.is_some() {
        let crude = crude_bounds(be, TypeAssumption::Type2, range, opts)?;
        return Ok((crude, TrimmingCurve::default()));
    }
    let (y_l, y_u) = (range.low, range.high);
    let f_plus = be.f_plus;
    let f_minus = r * f_plus;
    let (mu_p, mu_m) = (be.mu_plus, be.mu_minus);
    let last = (grid_size - 1) as f64;
    let mut curve = TrimmingCurve::default();
    for k in 0..grid_size {
        let z = if k + 1 == grid_size {
            f_plus
        } else {
            f_minus + (f_plus - f_minus) * (k as f64 / last)
        };
        let tau = (1.0 - z / f_plus).max(0.0);
        let (g_l, g_u) = if tau > 0.0 {
            let (a, b) = model.trimmed_means(tau);
            let a = a.clamp(y_l, y_u);
            (a, b.clamp(a, y_u))
        } else {
            (y_l, y_u)
        };
        let (a, b) = (f_plus / z, f_minus / z);
        curve.z_grid.push(z);
        curve.tau.push(tau);
        curve.g_low.push(g_l);
        curve.g_high.push(g_u);
        curve
            .theta_low
            .push(a * (mu_p - g_u) - b * (mu_m - y_u) + (g_u - y_u));
        curve
            .theta_high
            .push(a * (mu_p - g_l) - b * (mu_m - y_l) + (g_l - y_l));
    }
    let lower = curve
        .theta_low
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let upper = curve
        .theta_high
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let out = BoundsResult {
        lower,
        upper,
        target: TypeAssumption::Type2.target().to_string(),
        assumption: TypeAssumption::Type2,
        status: BoundStatus::Informative,
        clamped: false,
        outcome_range: range,
        note: Some("sharp".into()),
    };
    let out = if opts.clamp {
        out.clamp_to_range()
    } else {
        out
    };
    Ok((out, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::type2_bounds;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn binary_closed_forms() {
        let (lo, hi) = binary_sharp_gfuncs(0.5, 0.6);
        assert_abs_diff_eq!(lo, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(hi, 5.0 / 6.0, epsilon = 1e-15);
        assert_eq!(binary_sharp_gfuncs(0.5, 0.2), (0.0, 1.0));
        assert_eq!(binary_sharp_gfuncs(0.5, 1.0), (0.5, 0.5));
        assert_eq!(binary_sharp_gfuncs(0.5, 0.0), (0.0, 1.0));
    }

    #[test]
    fn weighted_trimming_matches_binary() {
        let w = WeightedOutcomes::from_atoms(&[(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let (lo, hi) = w.trimmed_means(0.6);
        assert_abs_diff_eq!(lo, 1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 5.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.lower_trimmed_mean(1.0), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn binary_sharp_equals_crude() {
        for &r in &[0.5, 0.7, 0.9] {
            for i in 0..9 {
                let mu_plus = (1.0 - r) + (2.0 * r - 1.0) * i as f64 / 8.0;
                let be = BoundaryEstimates::from_ratio(mu_plus, 0.3, r).unwrap();
                let (sharp, _) = sharp_type2_bounds_with(
                    &BinaryOutcome { mu_plus },
                    &be,
                    OutcomeRange::unit(),
                    DEFAULT_GRID_SIZE,
                    &BoundsOptions::default(),
                )
                .unwrap();
                let crude = type2_bounds(&be, 0.0, 1.0).unwrap();
                assert_abs_diff_eq!(sharp.lower, crude.lower, epsilon = 1e-9);
                assert_abs_diff_eq!(sharp.upper, crude.upper, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn grid_and_window_errors() {
        let be = BoundaryEstimates::from_ratio(0.5, 0.3, 0.9).unwrap();
        assert_eq!(
            sharp_type2_bounds(&[(1.0, 0.5)], &be, 0.0, 1.0, 1).unwrap_err(),
            Error::InvalidGrid(1)
        );
        assert_eq!(
            sharp_type2_bounds(&[(0.0, 0.5)], &be, 0.0, 1.0, 11).unwrap_err(),
            Error::EmptyWindow
        );
    }

    #[test]
    fn refuted_ratio_returns_crude() {
        let be = BoundaryEstimates::from_ratio(0.5, 0.3, 1.2).unwrap();
        let (b, curve) = sharp_type2_bounds(&[(1.0, 0.5)], &be, 0.0, 1.0, 11).unwrap();
        assert_eq!(b.status, BoundStatus::Refuted);
        assert!(curve.is_empty());
    }

    #[test]
    fn curve_endpoints() {
        let be = BoundaryEstimates::from_moments(0.4, 0.3, 2.0, 1.5).unwrap();
        let window: Vec<(f64, f64)> = (0..50).map(|i| (1.0, i as f64 / 49.0)).collect();
        let (_, c) = sharp_type2_bounds(&window, &be, 0.0, 1.0, 201).unwrap();
        assert_eq!(c.len(), 201);
        assert_eq!(c.z_grid[0], 1.5);
        assert_eq!(*c.z_grid.last().unwrap(), 2.0);
        assert_eq!(*c.tau.last().unwrap(), 0.0);
        assert_eq!(
            (*c.g_low.last().unwrap(), *c.g_high.last().unwrap()),
            (0.0, 1.0)
        );
        assert_abs_diff_eq!(c.tau[0], 0.25, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn sharp_inside_crude(
            ys in prop::collection::vec((0.01f64..1.0, 0.0f64..1.0), 1..40),
            mu_minus in 0.0f64..1.0, r in 0.05f64..1.0,
        ) {
            let model = WeightedOutcomes::new(&ys).unwrap();
            let be = BoundaryEstimates::from_ratio(model.mean(), mu_minus, r).unwrap();
            let (sharp, curve) = sharp_type2_bounds(&ys, &be, 0.0, 1.0, 51).unwrap();
            let crude = type2_bounds(&be, 0.0, 1.0).unwrap();
            prop_assert!(sharp.lower >= crude.lower - 1e-12);
            prop_assert!(sharp.upper <= crude.upper + 1e-12);
            for k in 0..curve.len() {
                prop_assert!(curve.tau[k] >= 0.0 && curve.tau[k] <= 1.0 - r + 1e-12);
                prop_assert!(curve.g_low[k] <= curve.g_high[k]);
                prop_assert!(curve.g_low[k] >= 0.0 && curve.g_high[k] <= 1.0);
                if k > 0 {
                    // tau falls along the grid: g_L rises with tau, g_U falls.
                    prop_assert!(curve.z_grid[k] >= curve.z_grid[k - 1]);
                    prop_assert!(curve.g_low[k] <= curve.g_low[k - 1] + 1e-12);
                    prop_assert!(curve.g_high[k] >= curve.g_high[k - 1] - 1e-12);
                }
            }
        }

        #[test]
        fn trimmed_mean_identity(
            ys in prop::collection::vec((0.01f64..1.0, -3.0f64..3.0), 1..40),
            tau in 0.001f64..0.999,
        ) {
            let m = WeightedOutcomes::new(&ys).unwrap();
            let whole = tau * m.upper_trimmed_mean(tau) + (1.0 - tau) * m.lower_trimmed_mean(1.0 - tau);
            prop_assert!((whole - m.mean()).abs() < 1e-9);
        }
    }
}
