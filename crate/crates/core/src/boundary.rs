//! Observed data and the five boundary statistics every bound consumes:
//! one-sided conditional means `mu_plus`, `mu_minus`, one-sided densities
//! `f_plus`, `f_minus` and their ratio `r = f_minus / f_plus`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Quantity, Result, Side};
use crate::localfit::{
    default_bandwidth, density_from_sorted, weighted_local_poly_fit, BandwidthRule,
    DensityEstimate, DensityOptions, FitSpec, KernelKind, LocalFitResult, DEFAULT_MIN_BANDWIDTH,
};

/// Declared support `[low, high]` of the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRange {
    pub low: f64,
    pub high: f64,
}

impl OutcomeRange {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low <= high) {
            return Err(Error::InvalidOutcomeRange { low, high });
        }
        Ok(OutcomeRange { low, high })
    }

    pub fn unit() -> Self {
        OutcomeRange {
            low: 0.0,
            high: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, y: f64) -> bool {
        (self.low..=self.high).contains(&y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: f64,
    pub y: f64,
    pub d: Option<bool>,
    /// Values aligned with [`Dataset::covariate_names`].
    pub covariates: Vec<f64>,
}

impl Observation {
    pub fn new(x: f64, y: f64) -> Self {
        Observation {
            x,
            y,
            d: None,
            covariates: Vec::new(),
        }
    }
}

/// Observations plus the cutoff and the (optional) outcome range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    observations: Vec<Observation>,
    covariate_names: Vec<String>,
    cutoff: f64,
    outcome_range: Option<OutcomeRange>,
}

impl Dataset {
    pub fn new(
        observations: Vec<Observation>,
        covariate_names: Vec<String>,
        cutoff: f64,
        outcome_range: Option<OutcomeRange>,
    ) -> Result<Self> {
        if !cutoff.is_finite() {
            return Err(Error::InvalidDataset(format!(
                "cutoff {cutoff} is not finite"
            )));
        }
        if let Some(r) = outcome_range {
            OutcomeRange::new(r.low, r.high)?;
        }
        let has_d = observations.first().map(|o| o.d.is_some());
        for (i, o) in observations.iter().enumerate() {
            if !o.x.is_finite() || !o.y.is_finite() {
                return Err(Error::InvalidDataset(format!(
                    "observation {i} has a non-finite running variable or outcome"
                )));
            }
            if let Some(r) = outcome_range {
                if !r.contains(o.y) {
                    return Err(Error::InvalidDataset(format!(
                        "observation {i}: outcome {} outside [{}, {}]",
                        o.y, r.low, r.high
                    )));
                }
            }
            if Some(o.d.is_some()) != has_d {
                return Err(Error::InvalidDataset(
                    "treatment indicator must be present on all observations or none".into(),
                ));
            }
            if o.covariates.len() != covariate_names.len() {
                return Err(Error::InvalidDataset(format!(
                    "observation {i} has {} covariates, expected {}",
                    o.covariates.len(),
                    covariate_names.len()
                )));
            }
        }
        Ok(Dataset {
            observations,
            covariate_names,
            cutoff,
            outcome_range,
        })
    }

    /// Dataset with running variable and outcome only.
    pub fn from_xy(
        xs: &[f64],
        ys: &[f64],
        cutoff: f64,
        outcome_range: Option<OutcomeRange>,
    ) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidDataset(format!(
                "{} running-variable values but {} outcomes",
                xs.len(),
                ys.len()
            )));
        }
        let obs = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| Observation::new(x, y))
            .collect();
        Dataset::new(obs, Vec::new(), cutoff, outcome_range)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn outcome_range(&self) -> Option<OutcomeRange> {
        self.outcome_range
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn has_treatment(&self) -> bool {
        self.observations.first().is_some_and(|o| o.d.is_some())
    }

    pub fn xs(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.x).collect()
    }

    pub fn covariate_index(&self, name: &str) -> Result<usize> {
        self.covariate_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownCovariate(name.to_string()))
    }

    /// Fraction of observations whose running variable repeats an earlier value.
    pub fn duplicate_x_fraction(&self) -> f64 {
        if self.observations.is_empty() {
            return 0.0;
        }
        let mut xs = self.xs();
        xs.sort_by(f64::total_cmp);
        let distinct = 1 + xs.windows(2).filter(|w| w[0] != w[1]).count();
        1.0 - distinct as f64 / xs.len() as f64
    }

    /// Mirror image `x -> 2c - x`; left and right swap.
    pub fn reflected(&self) -> Dataset {
        let c = self.cutoff;
        let mut out = self.clone();
        for o in &mut out.observations {
            o.x = 2.0 * c - o.x;
        }
        out
    }

    /// Affine map of the running variable, `x -> scale * x + shift` (and the cutoff).
    pub fn rescaled_running(&self, scale: f64, shift: f64) -> Dataset {
        let mut out = self.clone();
        out.cutoff = scale * self.cutoff + shift;
        for o in &mut out.observations {
            o.x = scale * o.x + shift;
        }
        out
    }

    /// Outcomes shifted by a constant; the declared range moves with them.
    pub fn shifted_outcome(&self, delta: f64) -> Dataset {
        let mut out = self.clone();
        out.outcome_range = self.outcome_range.map(|r| OutcomeRange {
            low: r.low + delta,
            high: r.high + delta,
        });
        for o in &mut out.observations {
            o.y += delta;
        }
        out
    }
}

/// Which per-observation value a boundary mean is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Outcome,
    Treatment,
    Covariate(usize),
}

impl Column {
    #[inline]
    fn value(self, o: &Observation) -> f64 {
        match self {
            Column::Outcome => o.y,
            Column::Treatment => {
                if o.d.unwrap_or(false) {
                    1.0
                } else {
                    0.0
                }
            }
            Column::Covariate(k) => o.covariates[k],
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BandwidthOverrides {
    pub mean_left: Option<f64>,
    pub mean_right: Option<f64>,
    pub density_left: Option<f64>,
    pub density_right: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bandwidths {
    pub mean_left: f64,
    pub mean_right: f64,
    pub density_left: f64,
    pub density_right: f64,
}

impl Bandwidths {
    pub fn scaled(&self, k: f64) -> Bandwidths {
        Bandwidths {
            mean_left: k * self.mean_left,
            mean_right: k * self.mean_right,
            density_left: k * self.density_left,
            density_right: k * self.density_right,
        }
    }

    fn as_overrides(&self) -> BandwidthOverrides {
        BandwidthOverrides {
            mean_left: Some(self.mean_left),
            mean_right: Some(self.mean_right),
            density_left: Some(self.density_left),
            density_right: Some(self.density_right),
        }
    }
}

/// Fit settings for boundary estimation.
///
/// `order` is the polynomial degree for conditional means; densities fit the
/// empirical CDF with a polynomial of degree `density_order + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub kernel: KernelKind,
    pub order: usize,
    pub density_order: usize,
    pub bandwidths: BandwidthOverrides,
    pub bandwidth_rule: BandwidthRule,
    pub density: DensityOptions,
    pub min_bandwidth: f64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig {
            kernel: KernelKind::Triangular,
            order: 1,
            density_order: 1,
            bandwidths: BandwidthOverrides::default(),
            bandwidth_rule: BandwidthRule::default(),
            density: DensityOptions::default(),
            min_bandwidth: DEFAULT_MIN_BANDWIDTH,
        }
    }
}

impl BoundaryConfig {
    /// Same polynomial order for means and densities.
    pub fn with_order(order: usize) -> Self {
        BoundaryConfig {
            order,
            density_order: order,
            ..Default::default()
        }
    }

    /// Copy of the configuration with every bandwidth pinned.
    pub fn with_fixed_bandwidths(&self, bw: &Bandwidths) -> Self {
        BoundaryConfig {
            bandwidths: bw.as_overrides(),
            ..*self
        }
    }

    /// Fills unset bandwidths per side from `bandwidth_rule`.
    pub fn resolve_bandwidths(&self, data: &Dataset) -> Result<Bandwidths> {
        let o = &self.bandwidths;
        let c = data.cutoff();
        let xs = data.xs();
        let rot = |side: Side, quantity: Quantity| {
            default_bandwidth(
                &xs,
                side,
                c,
                self.kernel,
                self.bandwidth_rule,
                self.min_bandwidth,
            )
            .map_err(|e| e.on_side(side, quantity))
        };
        let pick = |given: Option<f64>, side, quantity| -> Result<f64> {
            match given {
                Some(h) if h > 0.0 && h.is_finite() => Ok(h),
                Some(h) => Err(Error::InvalidConfig(format!(
                    "bandwidth {h} must be positive"
                ))),
                None => rot(side, quantity),
            }
        };
        Ok(Bandwidths {
            mean_left: pick(o.mean_left, Side::Left, Quantity::Mean)?,
            mean_right: pick(o.mean_right, Side::Right, Quantity::Mean)?,
            density_left: pick(o.density_left, Side::Left, Quantity::Density)?,
            density_right: pick(o.density_right, Side::Right, Quantity::Density)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideCounts {
    pub mean_left: usize,
    pub mean_right: usize,
    pub density_left: usize,
    pub density_right: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryWarning {
    /// A negative fitted density was clipped to the floor.
    DensityClipped { side: Side, raw: f64 },
    /// `r > 1`: the sample points against one-sided sorting into treatment.
    RatioAboveOne { r: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEstimates {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    pub r: f64,
    pub bandwidths: Option<Bandwidths>,
    pub n_effective: Option<SideCounts>,
    pub warnings: Vec<BoundaryWarning>,
}

impl BoundaryEstimates {
    /// Estimates supplied directly (oracles, tests, user input).
    pub fn from_moments(mu_plus: f64, mu_minus: f64, f_plus: f64, f_minus: f64) -> Result<Self> {
        if !(f_plus > 0.0 && f_minus > 0.0 && f_plus.is_finite() && f_minus.is_finite()) {
            return Err(Error::InvalidInputs(format!(
                "boundary densities must be positive, got f+ = {f_plus}, f- = {f_minus}"
            )));
        }
        if !(mu_plus.is_finite() && mu_minus.is_finite()) {
            return Err(Error::InvalidInputs("boundary means must be finite".into()));
        }
        let r = f_minus / f_plus;
        let mut warnings = Vec::new();
        if r > 1.0 {
            warnings.push(BoundaryWarning::RatioAboveOne { r });
        }
        Ok(BoundaryEstimates {
            mu_plus,
            mu_minus,
            f_plus,
            f_minus,
            r,
            bandwidths: None,
            n_effective: None,
            warnings,
        })
    }

    /// Convenience constructor parameterised by the density ratio (`f_plus = 1`).
    pub fn from_ratio(mu_plus: f64, mu_minus: f64, r: f64) -> Result<Self> {
        Self::from_moments(mu_plus, mu_minus, 1.0, r)
    }

    /// Same means with the densities (and hence `r`) replaced.
    pub fn with_densities(&self, f_plus: f64, f_minus: f64) -> Self {
        let mut out = self.clone();
        out.f_plus = f_plus;
        out.f_minus = f_minus;
        out.r = f_minus / f_plus;
        out.warnings
            .retain(|w| !matches!(w, BoundaryWarning::RatioAboveOne { .. }));
        if out.r > 1.0 {
            out.warnings
                .push(BoundaryWarning::RatioAboveOne { r: out.r });
        }
        out
    }

    pub fn jump(&self) -> f64 {
        self.mu_plus - self.mu_minus
    }
}

/// Estimates `mu_plus`, `mu_minus`, `f_plus`, `f_minus` and `r` for the outcome.
pub fn estimate_boundary(data: &Dataset, cfg: &BoundaryConfig) -> Result<BoundaryEstimates> {
    BoundaryWindow::new(data, cfg)?.estimate(Column::Outcome, None)
}

/// Observations within the widest bandwidth of the cutoff, with the
/// bandwidths resolved once on the full sample.
///
/// Observations outside the window only enter the estimators through the
/// total sample size, so a nonparametric bootstrap of the full sample can be
/// drawn as a binomial count of in-window draws followed by uniform draws
/// among the window rows (see [`crate::resample`]).
pub struct BoundaryWindow<'a> {
    data: &'a Dataset,
    cfg: BoundaryConfig,
    bw: Bandwidths,
    rows: Vec<usize>,
    /// Window positions of the left/right density windows, sorted by x.
    left_sorted: Vec<usize>,
    right_sorted: Vec<usize>,
}

impl<'a> BoundaryWindow<'a> {
    pub fn new(data: &'a Dataset, cfg: &BoundaryConfig) -> Result<Self> {
        let bw = cfg.resolve_bandwidths(data)?;
        Ok(Self::with_bandwidths(data, cfg, bw))
    }

    pub fn with_bandwidths(data: &'a Dataset, cfg: &BoundaryConfig, bw: Bandwidths) -> Self {
        let c = data.cutoff();
        let lo = c - bw.mean_left.max(bw.density_left);
        let hi = c + bw.mean_right.max(bw.density_right);
        let rows: Vec<usize> = data
            .observations()
            .iter()
            .enumerate()
            .filter(|(_, o)| o.x >= lo && o.x <= hi)
            .map(|(i, _)| i)
            .collect();
        let obs = data.observations();
        let x_of = |p: usize| obs[rows[p]].x;
        let mut left_sorted: Vec<usize> = (0..rows.len())
            .filter(|&p| x_of(p) < c && x_of(p) >= c - bw.density_left)
            .collect();
        let mut right_sorted: Vec<usize> = (0..rows.len())
            .filter(|&p| x_of(p) >= c && x_of(p) <= c + bw.density_right)
            .collect();
        left_sorted.sort_by(|&a, &b| x_of(a).total_cmp(&x_of(b)));
        right_sorted.sort_by(|&a, &b| x_of(a).total_cmp(&x_of(b)));
        BoundaryWindow {
            data,
            cfg: *cfg,
            bw,
            rows,
            left_sorted,
            right_sorted,
        }
    }

    pub fn bandwidths(&self) -> &Bandwidths {
        &self.bw
    }

    pub fn config(&self) -> &BoundaryConfig {
        &self.cfg
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    /// Number of observations inside the window.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_total(&self) -> usize {
        self.data.len()
    }

    /// Window rows as dataset indices.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn side_mean(
        &self,
        side: Side,
        column: Column,
        freq: Option<&[f64]>,
    ) -> Result<LocalFitResult> {
        let obs = self.data.observations();
        let h = match side {
            Side::Left => self.bw.mean_left,
            _ => self.bw.mean_right,
        };
        let spec = FitSpec::new(self.cfg.order, h, self.cfg.kernel, side)?;
        let xs: Vec<f64> = self.rows.iter().map(|&i| obs[i].x).collect();
        let ys: Vec<f64> = self.rows.iter().map(|&i| column.value(&obs[i])).collect();
        weighted_local_poly_fit(&xs, &ys, freq, self.data.cutoff(), &spec)
            .map_err(|e| e.on_side(side, Quantity::Mean))
    }

    pub fn side_density(&self, side: Side, freq: Option<&[f64]>) -> Result<DensityEstimate> {
        let obs = self.data.observations();
        let (positions, h) = match side {
            Side::Left => (&self.left_sorted, self.bw.density_left),
            _ => (&self.right_sorted, self.bw.density_right),
        };
        let spec = FitSpec::new(self.cfg.density_order, h, self.cfg.kernel, side)?;
        let xs: Vec<f64> = positions.iter().map(|&p| obs[self.rows[p]].x).collect();
        let f: Option<Vec<f64>> = freq.map(|f| positions.iter().map(|&p| f[p]).collect());
        density_from_sorted(
            &xs,
            f.as_deref(),
            self.data.len() as f64,
            self.data.cutoff(),
            &spec,
            &self.cfg.density,
        )
        .map_err(|e| e.on_side(side, Quantity::Density))
    }

    /// `(f_plus, f_minus)` with clipping warnings.
    pub fn densities(&self, freq: Option<&[f64]>) -> Result<(DensityEstimate, DensityEstimate)> {
        let plus = self.side_density(Side::Right, freq)?;
        let minus = self.side_density(Side::Left, freq)?;
        Ok((plus, minus))
    }

    /// `(mean right of cutoff, mean left of cutoff)` for `column`.
    pub fn means(
        &self,
        column: Column,
        freq: Option<&[f64]>,
    ) -> Result<(LocalFitResult, LocalFitResult)> {
        let plus = self.side_mean(Side::Right, column, freq)?;
        let minus = self.side_mean(Side::Left, column, freq)?;
        Ok((plus, minus))
    }

    pub fn estimate(&self, column: Column, freq: Option<&[f64]>) -> Result<BoundaryEstimates> {
        let (mp, mm) = self.means(column, freq)?;
        let (fp, fm) = self.densities(freq)?;
        let r = fm.value / fp.value;
        let mut warnings = Vec::new();
        if fp.clipped {
            warnings.push(BoundaryWarning::DensityClipped {
                side: Side::Right,
                raw: fp.raw,
            });
        }
        if fm.clipped {
            warnings.push(BoundaryWarning::DensityClipped {
                side: Side::Left,
                raw: fm.raw,
            });
        }
        if r > 1.0 {
            warnings.push(BoundaryWarning::RatioAboveOne { r });
        }
        Ok(BoundaryEstimates {
            mu_plus: mp.intercept(),
            mu_minus: mm.intercept(),
            f_plus: fp.value,
            f_minus: fm.value,
            r,
            bandwidths: Some(self.bw),
            n_effective: Some(SideCounts {
                mean_left: mm.effective_n,
                mean_right: mp.effective_n,
                density_left: fm.effective_n,
                density_right: fp.effective_n,
            }),
            warnings,
        })
    }

    /// Kernel-weighted outcomes right of the cutoff within the mean bandwidth,
    /// as `(weight, y)` pairs.
    pub fn right_outcomes(&self, freq: Option<&[f64]>) -> Vec<(f64, f64)> {
        let obs = self.data.observations();
        let c = self.data.cutoff();
        let spec = FitSpec {
            order: 0,
            bandwidth: self.bw.mean_right,
            kernel: self.cfg.kernel,
            side: Side::Right,
        };
        self.rows
            .iter()
            .enumerate()
            .filter_map(|(p, &i)| {
                let w = spec.weight_at(obs[i].x, c) * freq.map_or(1.0, |f| f[p]);
                (w > 0.0).then_some((w, obs[i].y))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn normal_sample(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ys = xs.clone();
        Dataset::from_xy(&xs, &ys, 0.0, None).unwrap()
    }

    #[test]
    fn symmetric_design_is_continuous() {
        let data = normal_sample(100_000, 1);
        let be = estimate_boundary(&data, &BoundaryConfig::default()).unwrap();
        assert!((be.r - 1.0).abs() < 0.05, "r = {}", be.r);
        assert!(be.mu_plus.abs() < 0.05 && be.mu_minus.abs() < 0.05);
        assert_eq!(be.r, be.f_minus / be.f_plus);
    }

    #[test]
    fn one_sided_data_fails_on_the_empty_side() {
        let xs: Vec<f64> = (1..100).map(|i| i as f64 / 100.0).collect();
        let data = Dataset::from_xy(&xs, &xs, 0.0, None).unwrap();
        let err = estimate_boundary(&data, &BoundaryConfig::default()).unwrap_err();
        assert_eq!(err.side(), Some(Side::Left));
        assert!(matches!(err.root(), Error::InsufficientData { .. }));
    }

    #[test]
    fn ratio_invariant_to_running_variable_scale() {
        let data = normal_sample(20_000, 2);
        let cfg = BoundaryConfig::default();
        let be = estimate_boundary(&data, &cfg).unwrap();
        let kappa = 2.5;
        let scaled = data.rescaled_running(kappa, 0.0);
        let cfg_scaled = cfg.with_fixed_bandwidths(&be.bandwidths.unwrap().scaled(kappa));
        let be_scaled = estimate_boundary(&scaled, &cfg_scaled).unwrap();
        assert!((be.r - be_scaled.r).abs() < 1e-9);
        assert!((be.f_plus / kappa - be_scaled.f_plus).abs() < 1e-9);
    }

    #[test]
    fn outcome_shift_moves_means_only() {
        let data = normal_sample(20_000, 3);
        let cfg = BoundaryConfig::default();
        let be = estimate_boundary(&data, &cfg).unwrap();
        let shifted = estimate_boundary(&data.shifted_outcome(4.0), &cfg).unwrap();
        assert!((shifted.mu_plus - be.mu_plus - 4.0).abs() < 1e-9);
        assert!((shifted.mu_minus - be.mu_minus - 4.0).abs() < 1e-9);
        assert_eq!(shifted.f_plus, be.f_plus);
        assert_eq!(shifted.f_minus, be.f_minus);
    }

    #[test]
    fn dataset_validation() {
        let range = OutcomeRange::new(0.0, 1.0).unwrap();
        assert!(Dataset::from_xy(&[0.0], &[2.0], 0.0, Some(range)).is_err());
        assert!(OutcomeRange::new(1.0, 0.0).is_err());
        let mixed = vec![
            Observation {
                d: Some(true),
                ..Observation::new(0.1, 0.0)
            },
            Observation::new(0.2, 0.0),
        ];
        assert!(Dataset::new(mixed, vec![], 0.0, None).is_err());
    }

    #[test]
    fn ratio_above_one_is_flagged_not_truncated() {
        let be = BoundaryEstimates::from_moments(0.5, 0.4, 1.0, 1.3).unwrap();
        assert_eq!(be.r, 1.3);
        assert!(be
            .warnings
            .iter()
            .any(|w| matches!(w, BoundaryWarning::RatioAboveOne { .. })));
    }
}
