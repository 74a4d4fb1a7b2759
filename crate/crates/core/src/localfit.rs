//! Kernel-weighted local polynomial regression and local polynomial density
//! estimation at a boundary point.
//!
//! Fits are computed on the rescaled regressor `u = (x - eval) / h`, which
//! keeps the normal equations well conditioned; coefficients are mapped back
//! to running-variable units before they are returned.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Side};

/// Highest polynomial order accepted by [`FitSpec`].
pub const MAX_ORDER: usize = 4;

/// Density estimates below this value are clipped to it.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-6;

/// Fraction of duplicated in-window running-variable values above which the
/// support is treated as discrete.
pub const DEFAULT_DUPLICATE_THRESHOLD: f64 = 0.2;

/// Lower limit applied to rule-of-thumb bandwidths.
pub const DEFAULT_MIN_BANDWIDTH: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    #[default]
    Triangular,
    Uniform,
    Epanechnikov,
}

impl KernelKind {
    /// Kernel weight at `u`; zero outside `[-1, 1]`.
    pub fn weight(self, u: f64) -> f64 {
        let a = u.abs();
        if !(a <= 1.0) {
            return 0.0;
        }
        match self {
            KernelKind::Triangular => 1.0 - a,
            KernelKind::Uniform => 0.5,
            KernelKind::Epanechnikov => 0.75 * (1.0 - a * a),
        }
    }

    /// `(R(K), mu_2(K))`: integral of `K^2` and second moment.
    fn roughness_and_variance(self) -> (f64, f64) {
        match self {
            KernelKind::Triangular => (2.0 / 3.0, 1.0 / 6.0),
            KernelKind::Uniform => (0.5, 1.0 / 3.0),
            KernelKind::Epanechnikov => (0.6, 0.2),
        }
    }

    /// Ratio of this kernel's canonical bandwidth to the Gaussian one; converts
    /// a Gaussian-kernel bandwidth into an equivalent one for this kernel.
    pub fn canonical_factor(self) -> f64 {
        let (r, m2) = self.roughness_and_variance();
        let gaussian = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
        (r / (m2 * m2) / gaussian).powf(0.2)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelKind::Triangular => "triangular",
            KernelKind::Uniform => "uniform",
            KernelKind::Epanechnikov => "epanechnikov",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "triangular" | "tri" => Ok(KernelKind::Triangular),
            "uniform" | "rectangular" => Ok(KernelKind::Uniform),
            "epanechnikov" | "epa" => Ok(KernelKind::Epanechnikov),
            other => Err(Error::InvalidConfig(format!("unknown kernel `{other}`"))),
        }
    }
}

pub fn kernel_weight(u: f64, kernel: KernelKind) -> f64 {
    kernel.weight(u)
}

/// Order, bandwidth, kernel and side of a single local fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub order: usize,
    pub bandwidth: f64,
    pub kernel: KernelKind,
    pub side: Side,
}

impl FitSpec {
    pub fn new(order: usize, bandwidth: f64, kernel: KernelKind, side: Side) -> Result<Self> {
        let spec = FitSpec {
            order,
            bandwidth,
            kernel,
            side,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order > MAX_ORDER {
            return Err(Error::InvalidConfig(format!(
                "polynomial order {} exceeds {MAX_ORDER}",
                self.order
            )));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive and finite, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }

    /// Kernel weight of `x` for a fit at `eval`, honouring the side restriction.
    #[inline]
    pub(crate) fn weight_at(&self, x: f64, eval: f64) -> f64 {
        let u = (x - eval) / self.bandwidth;
        let on_side = match self.side {
            Side::Left => x < eval,
            Side::Right => x >= eval,
            Side::Interior => true,
        };
        if on_side {
            self.kernel.weight(u)
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalFitResult {
    /// Polynomial coefficients in powers of `(x - eval)`; the first entry is
    /// the level at the evaluation point.
    pub coefficients: Vec<f64>,
    /// Observations (with multiplicity) carrying nonzero kernel weight.
    pub effective_n: usize,
    pub residual_scale: f64,
}

impl LocalFitResult {
    pub fn intercept(&self) -> f64 {
        self.coefficients[0]
    }
}

/// Weighted least squares of `y` on powers of `(x - eval)` using kernel weights
/// restricted to the requested side.
pub fn local_poly_fit(
    points: &[(f64, f64)],
    eval_point: f64,
    spec: &FitSpec,
) -> Result<LocalFitResult> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    weighted_local_poly_fit(&xs, &ys, None, eval_point, spec)
}

/// [`local_poly_fit`] with optional frequency weights (bootstrap multiplicities).
pub(crate) fn weighted_local_poly_fit(
    xs: &[f64],
    ys: &[f64],
    freq: Option<&[f64]>,
    eval: f64,
    spec: &FitSpec,
) -> Result<LocalFitResult> {
    spec.validate()?;
    debug_assert_eq!(xs.len(), ys.len());
    let h = spec.bandwidth;
    let dim = spec.order + 1;

    let mut used: Vec<(f64, f64, f64)> = Vec::new();
    let mut count = 0.0;
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let m = freq.map_or(1.0, |f| f[i]);
        if m <= 0.0 {
            continue;
        }
        let k = spec.weight_at(x, eval);
        if k > 0.0 {
            used.push(((x - eval) / h, y, k * m));
            count += m;
        }
    }
    let effective_n = count.round() as usize;
    if effective_n < dim {
        return Err(Error::InsufficientData {
            needed: dim,
            found: effective_n,
        });
    }

    let beta = solve_weighted(&used, dim)?;

    let mut rss = 0.0;
    let mut wsum = 0.0;
    for &(u, y, w) in &used {
        let r = y - horner(&beta, u);
        rss += w * r * r;
        wsum += w;
    }

    let mut scale = 1.0;
    let coefficients = beta
        .iter()
        .map(|b| {
            let c = b / scale;
            scale *= h;
            c
        })
        .collect();

    Ok(LocalFitResult {
        coefficients,
        effective_n,
        residual_scale: (rss / wsum).sqrt(),
    })
}

fn horner(beta: &[f64], u: f64) -> f64 {
    beta.iter().rev().fold(0.0, |acc, b| acc * u + b)
}

/// Solves the weighted normal equations for `(u, y, w)` triples.
fn solve_weighted(points: &[(f64, f64, f64)], dim: usize) -> Result<Vec<f64>> {
    let mut moments = vec![0.0; 2 * dim - 1];
    let mut rhs = DVector::<f64>::zeros(dim);
    for &(u, y, w) in points {
        let mut p = w;
        for (k, m) in moments.iter_mut().enumerate() {
            *m += p;
            if k < dim {
                rhs[k] += p * y;
            }
            p *= u;
        }
    }
    let gram = DMatrix::<f64>::from_fn(dim, dim, |i, j| moments[i + j]);

    let eig = gram.clone().symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(0.0_f64, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= max * 1e-13 {
        return Err(Error::SingularDesign);
    }
    let chol = gram.cholesky().ok_or(Error::SingularDesign)?;
    Ok(chol.solve(&rhs).iter().copied().collect())
}

/// Tuning for [`boundary_density_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    pub floor: f64,
    pub duplicate_threshold: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            floor: DEFAULT_DENSITY_FLOOR,
            duplicate_threshold: DEFAULT_DUPLICATE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    /// Estimate after clipping at the floor.
    pub value: f64,
    /// Fitted derivative before clipping.
    pub raw: f64,
    pub clipped: bool,
    pub effective_n: usize,
}

/// Density at `eval_point` as the first-derivative coefficient of a local
/// polynomial of degree `order + 1` fitted to the empirical CDF.
pub fn boundary_density(xs: &[f64], eval_point: f64, spec: &FitSpec) -> Result<DensityEstimate> {
    boundary_density_with(xs, eval_point, spec, &DensityOptions::default())
}

pub fn boundary_density_with(
    xs: &[f64],
    eval_point: f64,
    spec: &FitSpec,
    opts: &DensityOptions,
) -> Result<DensityEstimate> {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    density_from_sorted(&sorted, None, xs.len() as f64, eval_point, spec, opts)
}

/// Density estimate from ascending `sorted_xs` with optional frequency weights
/// aligned to them. `n_total` is the size of the full sample the empirical
/// CDF is normalised by; observations outside the slice only shift the CDF by
/// a constant, which the intercept absorbs.
pub(crate) fn density_from_sorted(
    sorted_xs: &[f64],
    freq: Option<&[f64]>,
    n_total: f64,
    eval: f64,
    spec: &FitSpec,
    opts: &DensityOptions,
) -> Result<DensityEstimate> {
    spec.validate()?;
    let dim = spec.order + 2;
    let h = spec.bandwidth;

    // (u, ecdf, weight) with ties sharing the CDF value at the end of their run.
    let mut used: Vec<(f64, f64, f64)> = Vec::new();
    let mut rows = 0usize;
    let mut distinct = 0usize;
    let mut count = 0.0;
    let mut cum = 0.0;
    let mut i = 0;
    while i < sorted_xs.len() {
        let x = sorted_xs[i];
        let mut j = i;
        let mut run_mass = 0.0;
        let mut run_rows = 0usize;
        while j < sorted_xs.len() && sorted_xs[j] == x {
            let m = freq.map_or(1.0, |f| f[j]);
            if m > 0.0 {
                run_mass += m;
                run_rows += 1;
            }
            j += 1;
        }
        cum += run_mass;
        let k = spec.weight_at(x, eval);
        if k > 0.0 && run_mass > 0.0 {
            let f = cum / n_total;
            let u = (x - eval) / h;
            used.push((u, f, k * run_mass));
            rows += run_rows;
            distinct += 1;
            count += run_mass;
        }
        i = j;
    }

    if rows >= 2 {
        let duplicate_fraction = 1.0 - distinct as f64 / rows as f64;
        if duplicate_fraction > opts.duplicate_threshold {
            return Err(Error::DegenerateSupport { duplicate_fraction });
        }
    }
    if distinct < dim {
        return Err(Error::InsufficientData {
            needed: dim,
            found: distinct,
        });
    }

    let beta = solve_weighted(&used, dim)?;
    let raw = beta[1] / h;
    let clipped = !(raw >= opts.floor);
    Ok(DensityEstimate {
        value: if clipped { opts.floor } else { raw },
        raw,
        clipped,
        effective_n: count.round() as usize,
    })
}

/// Rule-of-thumb bandwidth `1.06 * sd * n^(-1/5)` from the observations on
/// one side of `cutoff` (`x < cutoff` left, `x >= cutoff` right, all for
/// interior).
pub fn rot_bandwidth(xs: &[f64], side: Side, cutoff: f64) -> Result<f64> {
    rot_bandwidth_with_floor(xs, side, cutoff, DEFAULT_MIN_BANDWIDTH)
}

pub fn rot_bandwidth_with_floor(xs: &[f64], side: Side, cutoff: f64, floor: f64) -> Result<f64> {
    let on_side = |x: f64| match side {
        Side::Left => x < cutoff,
        Side::Right => x >= cutoff,
        Side::Interior => true,
    };
    let (n, sum) = xs
        .iter()
        .filter(|&&x| on_side(x))
        .fold((0usize, 0.0), |(n, s), &x| (n + 1, s + x));
    if n < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: n,
        });
    }
    let mean = sum / n as f64;
    let ss: f64 = xs
        .iter()
        .filter(|&&x| on_side(x))
        .map(|&x| (x - mean) * (x - mean))
        .sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    Ok((1.06 * sd * (n as f64).powf(-0.2)).max(floor))
}

/// How unset bandwidths are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthRule {
    /// Plain [`rot_bandwidth`].
    RuleOfThumb,
    /// Scale `min(sd, IQR / 1.349)` in the rule-of-thumb formula, multiplied by
    /// the kernel's [`KernelKind::canonical_factor`].
    #[default]
    RobustScaled,
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BandwidthRule::RuleOfThumb => "rot",
            BandwidthRule::RobustScaled => "robust",
        })
    }
}

impl FromStr for BandwidthRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rot" | "rule_of_thumb" => Ok(BandwidthRule::RuleOfThumb),
            "robust" | "robust_scaled" => Ok(BandwidthRule::RobustScaled),
            other => Err(Error::InvalidConfig(format!(
                "unknown bandwidth rule `{other}`"
            ))),
        }
    }
}

/// Default bandwidth for one side under `rule`.
pub fn default_bandwidth(
    xs: &[f64],
    side: Side,
    cutoff: f64,
    kernel: KernelKind,
    rule: BandwidthRule,
    floor: f64,
) -> Result<f64> {
    if rule == BandwidthRule::RuleOfThumb {
        return rot_bandwidth_with_floor(xs, side, cutoff, floor);
    }
    let mut v: Vec<f64> = xs
        .iter()
        .copied()
        .filter(|&x| match side {
            Side::Left => x < cutoff,
            Side::Right => x >= cutoff,
            Side::Interior => true,
        })
        .collect();
    let n = v.len();
    if n < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: n,
        });
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let sd = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt();
    v.sort_by(f64::total_cmp);
    let quantile = |p: f64| {
        let pos = p * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    };
    let iqr = quantile(0.75) - quantile(0.25);
    let scale = if iqr > 0.0 { sd.min(iqr / 1.349) } else { sd };
    Ok((kernel.canonical_factor() * 1.06 * scale * (n as f64).powf(-0.2)).max(floor))
}
