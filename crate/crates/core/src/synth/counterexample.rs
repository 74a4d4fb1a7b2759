//! Monotone manipulation that keeps the density smooth at the cutoff while
//! the conditional mean jumps.
//!
//! `X* ~ U[-1, 1]`, cutoff 0. Units with `X*` in `[-1, -2/3)` move up by 1,
//! units in `[-2/3, -1/3)` move up by 1/3; `Y = X*` (plus optional noise).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{assemble, Latent, TypedSample};
use crate::boundary::OutcomeRange;
use crate::error::{Error, Result};

pub fn gen_counterexample_e(n: usize, seed: u64, noise_sd: f64) -> Result<TypedSample> {
    if n == 0 {
        return Err(Error::InvalidParams("n must be at least 1".into()));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "noise_sd = {noise_sd} must be >= 0"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let x_star: f64 = rng.random_range(-1.0..=1.0);
        let x = if x_star < -2.0 / 3.0 {
            x_star + 1.0
        } else if x_star < -1.0 / 3.0 {
            x_star + 1.0 / 3.0
        } else {
            x_star
        };
        let y = if noise_sd > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            x_star + noise_sd * z
        } else {
            x_star
        };
        let manipulated = x != x_star;
        let latent = Latent {
            x_star,
            manipulated,
            t_type: if manipulated { 3 } else { 0 },
            y0: y,
            y1: y,
        };
        rows.push((x, y, latent));
    }
    let range = (noise_sd == 0.0).then(|| OutcomeRange {
        low: -1.0,
        high: 1.0,
    });
    assemble(rows, 0.0, range)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_limits() {
        use crate::error::Side;
        use crate::localfit::{local_poly_fit, FitSpec, KernelKind};
        let ts = gen_counterexample_e(1_000_000, 5, 0.0).unwrap();
        let pts = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
            ts.data()
                .observations()
                .iter()
                .filter(|o| o.x > lo && o.x < hi)
                .map(|o| (o.x, o.y))
                .collect()
        };
        let mean = |v: &[(f64, f64)]| v.iter().map(|p| p.1).sum::<f64>() / v.len() as f64;
        let (left, right) = (pts(-0.02, 0.0), pts(0.0, 0.02));
        // E[Y | X = x] is x - 1/6 on the left and x - 1/2 on the right, so the
        // raw window means sit half a window away from the limits.
        assert!((mean(&left) - (-1.0 / 6.0 - 0.01)).abs() < 0.005);
        assert!((mean(&right) - (-0.5 + 0.01)).abs() < 0.01);
        let limit = |v: &[(f64, f64)], side| {
            let spec = FitSpec::new(1, 0.02, KernelKind::Uniform, side).unwrap();
            local_poly_fit(v, 0.0, &spec).unwrap().intercept()
        };
        assert!((limit(&left, Side::Left) + 1.0 / 6.0).abs() < 0.01);
        assert!((limit(&right, Side::Right) + 0.5).abs() < 0.01);
    }

    #[test]
    fn monotone_manipulation() {
        let ts = gen_counterexample_e(10_000, 6, 0.1).unwrap();
        for (o, l) in ts.data().observations().iter().zip(ts.latents()) {
            assert!(o.x >= l.x_star);
            assert_eq!(l.manipulated, o.x > l.x_star);
        }
    }

    #[test]
    fn bins_next_to_cutoff_are_balanced() {
        let ts = gen_counterexample_e(1_000_000, 7, 0.0).unwrap();
        let count = |lo: f64, hi: f64| {
            ts.data()
                .observations()
                .iter()
                .filter(|o| o.x >= lo && o.x < hi)
                .count() as f64
        };
        let (a, b) = (count(-0.01, 0.0), count(0.0, 0.01));
        assert!((a - b).abs() < 2.0 * (a + b).sqrt(), "{a} vs {b}");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(gen_counterexample_e(0, 1, 0.0).is_err());
        assert!(gen_counterexample_e(10, 1, -1.0).is_err());
    }
}
