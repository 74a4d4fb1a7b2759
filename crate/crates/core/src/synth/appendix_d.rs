//! Binary-outcome design with one-sided precise manipulation from below.
//!
//! `X* ~ N(0, 1)`, cutoff 0, `Y(d) = 1{mu_d(X*) >= eps}` with
//! `mu_0(x) = Phi(x - 1)` and `mu_1(x) = Phi(x - 0.5)`. A unit with
//! `X* < 0` manipulates when `U < p` and then reports `X = V ~ Exp(lambda)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::quad::integrate;
use super::{assemble, Latent, TypedSample};
use crate::boundary::{BoundaryEstimates, OutcomeRange};
use crate::bounds::{
    crude_bounds, sharp_type2_bounds_with, BinaryOutcome, BoundsOptions, TypeAssumption,
    DEFAULT_GRID_SIZE,
};
use crate::error::{Error, Result};

const QUAD_TOL: f64 = 1e-8;
const LOWER_LIMIT: f64 = -8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppendixDSpec {
    pub p: f64,
    pub lambda: f64,
    pub n: usize,
    pub seed: u64,
}

impl AppendixDSpec {
    pub fn validate(&self) -> Result<()> {
        validate_params(self.p, self.lambda)
    }
}

fn validate_params(p: f64, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParams(format!("p = {p} outside [0, 1]")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    Ok(())
}

fn mu(d: bool, x: f64) -> f64 {
    let n = Normal::standard();
    n.cdf(if d { x - 0.5 } else { x - 1.0 })
}

pub fn gen_appendix_d(spec: &AppendixDSpec) -> Result<TypedSample> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let exp = Exp::new(spec.lambda).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let mut rows = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let x_star: f64 = StandardNormal.sample(&mut rng);
        let eps: f64 = rng.random();
        let u: f64 = rng.random();
        let v: f64 = exp.sample(&mut rng);
        let attempts = u < spec.p;
        let manipulated = x_star < 0.0 && attempts;
        let x = if manipulated { v } else { x_star };
        let y0 = f64::from(u8::from(mu(false, x_star) >= eps));
        let y1 = f64::from(u8::from(mu(true, x_star) >= eps));
        let y = if x >= 0.0 { y1 } else { y0 };
        let latent = Latent {
            x_star,
            manipulated,
            t_type: if attempts { 2 } else { 0 },
            y0,
            y1,
        };
        rows.push((x, y, latent));
    }
    assemble(rows, 0.0, Some(OutcomeRange::unit()))
}

/// Population quantities and bounds for one `(p, lambda)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub p: f64,
    pub lambda: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    pub r: f64,
    pub theta_true: f64,
    pub crude_lower: f64,
    pub crude_upper: f64,
    pub sharp_lower: f64,
    pub sharp_upper: f64,
}

impl OracleRow {
    pub fn boundary(&self) -> BoundaryEstimates {
        BoundaryEstimates::from_moments(self.mu_plus, self.mu_minus, self.f_plus, self.f_minus)
            .expect("oracle densities are positive")
    }
}

pub fn oracle_appendix_d(p: f64, lambda: f64) -> Result<OracleRow> {
    validate_params(p, lambda)?;
    let n = Normal::standard();
    let phi0 = n.pdf(0.0);
    let f_plus = phi0 + 0.5 * lambda * p;
    let f_minus = (1.0 - p) * phi0;
    let w = phi0 / f_plus;
    let tail = 2.0 * integrate(|x| mu(true, x) * n.pdf(x), LOWER_LIMIT, 0.0, QUAD_TOL)?;
    let mu_plus = w * mu(true, 0.0) + (1.0 - w) * tail;
    let mu_minus = mu(false, 0.0);
    let be = BoundaryEstimates::from_moments(mu_plus, mu_minus, f_plus, f_minus)?;
    let opts = BoundsOptions::default();
    let crude = crude_bounds(&be, TypeAssumption::Type2, OutcomeRange::unit(), &opts)?;
    let (sharp, _) = sharp_type2_bounds_with(
        &BinaryOutcome { mu_plus },
        &be,
        OutcomeRange::unit(),
        DEFAULT_GRID_SIZE,
        &opts,
    )?;
    Ok(OracleRow {
        p,
        lambda,
        mu_plus,
        mu_minus,
        f_plus,
        f_minus,
        r: be.r,
        theta_true: mu(true, 0.0) - mu(false, 0.0),
        crude_lower: crude.lower,
        crude_upper: crude.upper,
        sharp_lower: sharp.lower,
        sharp_upper: sharp.upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_manipulation_without_p() {
        let ts = gen_appendix_d(&AppendixDSpec {
            p: 0.0,
            lambda: 0.05,
            n: 5000,
            seed: 3,
        })
        .unwrap();
        for (o, l) in ts.data().observations().iter().zip(ts.latents()) {
            assert_eq!(o.x, l.x_star);
        }
    }

    #[test]
    fn manipulation_share_and_direction() {
        let ts = gen_appendix_d(&AppendixDSpec {
            p: 0.1,
            lambda: 0.05,
            n: 1_000_000,
            seed: 4,
        })
        .unwrap();
        let obs = ts.data().observations();
        let mut below = 0usize;
        let mut moved = 0usize;
        for (o, l) in obs.iter().zip(ts.latents()) {
            assert_eq!(l.manipulated, o.x != l.x_star);
            if l.x_star >= 0.0 {
                assert!(!l.manipulated);
            }
            if l.manipulated {
                assert!(o.x >= 0.0);
            }
            if l.x_star < 0.0 {
                below += 1;
                moved += usize::from(l.manipulated);
            }
        }
        let share = moved as f64 / below as f64;
        assert!((share - 0.1).abs() < 0.003, "share {share}");
    }

    #[test]
    fn invalid_params() {
        assert!(oracle_appendix_d(1.5, 0.1).is_err());
        assert!(oracle_appendix_d(0.1, 0.0).is_err());
    }

    #[test]
    fn theta_true_constant() {
        for p in [0.0, 0.1, 0.3] {
            for lambda in [0.05, 0.3] {
                let row = oracle_appendix_d(p, lambda).unwrap();
                assert!((row.theta_true - 0.150).abs() < 0.001);
            }
        }
    }
}
