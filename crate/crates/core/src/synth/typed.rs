//! Mixtures of unit types 0–4 with fixed manipulation templates.
//!
//! Every unit draws `X* ~ N(c, 1)` and a type `T`; outcomes are
//! `Y(d) = (1 - a) mu_d(X* - c) + a eta` with `eta ~ U(0, 1)`, so `Y` lies in
//! `[0, 1]`. Manipulations always move `X` by more than `gap`.
//!
//! * Type 0: never manipulates.
//! * Type 1: with probability `type1_prob`, shifts by `±(gap + Gamma)` with a
//!   fair-coin sign, independently of `X*` and outcomes.
//! * Type 2: units with `X* < c` attempt with probability `type2_prob` and land
//!   at `max(c, X* + gap) + Exp(type2_rate)`.
//! * Type 3: units with `X*` in `[c - type3_reach, c)` attempt with probability
//!   `type3_prob` and move up by `gap + Gamma`; some attempts stay below `c`.
//! * Type 4: every unit attempts with probability `type4_prob`, independently
//!   of `X*`, and lands at `c + Exp(type4_rate)` (redrawn until the move
//!   exceeds `gap`).

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{assemble, Latent, TypedSample};
use crate::boundary::OutcomeRange;
use crate::error::{Error, Result};

/// Type label (0–4) to population share.
pub type TypeShares = BTreeMap<u8, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypedParams {
    pub cutoff: f64,
    pub gap: f64,
    pub noise_weight: f64,
    pub type1_prob: f64,
    pub type1_shape: f64,
    pub type1_scale: f64,
    pub type2_prob: f64,
    pub type2_rate: f64,
    pub type3_prob: f64,
    pub type3_reach: f64,
    pub type3_shape: f64,
    pub type3_scale: f64,
    pub type4_prob: f64,
    pub type4_rate: f64,
}

impl Default for TypedParams {
    fn default() -> Self {
        TypedParams {
            cutoff: 0.0,
            gap: 0.1,
            noise_weight: 0.1,
            type1_prob: 0.5,
            type1_shape: 2.0,
            type1_scale: 0.1,
            type2_prob: 0.3,
            type2_rate: 1.0,
            type3_prob: 0.5,
            type3_reach: 1.0,
            type3_shape: 2.0,
            type3_scale: 0.25,
            type4_prob: 0.2,
            type4_rate: 1.0,
        }
    }
}

impl TypedParams {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("noise_weight", self.noise_weight),
            ("type1_prob", self.type1_prob),
            ("type2_prob", self.type2_prob),
            ("type3_prob", self.type3_prob),
            ("type4_prob", self.type4_prob),
        ];
        for (name, v) in probs {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParams(format!("{name} = {v} outside [0, 1]")));
            }
        }
        let positive = [
            ("type1_shape", self.type1_shape),
            ("type1_scale", self.type1_scale),
            ("type2_rate", self.type2_rate),
            ("type3_reach", self.type3_reach),
            ("type3_shape", self.type3_shape),
            ("type3_scale", self.type3_scale),
            ("type4_rate", self.type4_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        if !(self.gap >= 0.0 && self.gap.is_finite() && self.cutoff.is_finite()) {
            return Err(Error::InvalidParams(
                "gap must be >= 0 and cutoff finite".into(),
            ));
        }
        Ok(())
    }

    /// Mean of `Y(d)` given `X* = x`.
    pub fn outcome_mean(&self, d: bool, x_star: f64) -> f64 {
        let n = Normal::standard();
        let shift = if d { 0.5 } else { 1.0 };
        (1.0 - self.noise_weight) * n.cdf(x_star - self.cutoff - shift) + 0.5 * self.noise_weight
    }
}

fn validate_shares(shares: &TypeShares) -> Result<[f64; 5]> {
    let mut w = [0.0; 5];
    for (&t, &s) in shares {
        if t > 4 {
            return Err(Error::InvalidWeights(format!("unknown type {t}")));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidWeights(format!("share {s} for type {t}")));
        }
        w[t as usize] = s;
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!(
            "shares sum to {total}, not 1"
        )));
    }
    Ok(w)
}

fn map_err<E: std::fmt::Display>(e: E) -> Error {
    Error::InvalidParams(e.to_string())
}

pub fn gen_typed(
    shares: &TypeShares,
    params: &TypedParams,
    n: usize,
    seed: u64,
) -> Result<TypedSample> {
    let weights = validate_shares(shares)?;
    params.validate()?;
    let c = params.cutoff;
    let g = params.gap;
    let gamma1 = Gamma::new(params.type1_shape, params.type1_scale).map_err(map_err)?;
    let gamma3 = Gamma::new(params.type3_shape, params.type3_scale).map_err(map_err)?;
    let exp2 = Exp::new(params.type2_rate).map_err(map_err)?;
    let exp4 = Exp::new(params.type4_rate).map_err(map_err)?;
    let mut cum = [0.0; 5];
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        cum[k] = acc;
    }
    let n01 = Normal::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let pick: f64 = rng.random::<f64>() * acc;
        let t = cum
            .iter()
            .position(|&cw| pick < cw)
            .unwrap_or_else(|| weights.iter().rposition(|&w| w > 0.0).unwrap_or(0))
            as u8;
        let z: f64 = StandardNormal.sample(&mut rng);
        let x_star = c + z;
        let eta: f64 = rng.random();
        let attempt: f64 = rng.random();
        let x = match t {
            1 if attempt < params.type1_prob => {
                let size = g + gamma1.sample(&mut rng);
                if rng.random::<bool>() {
                    x_star + size
                } else {
                    x_star - size
                }
            }
            2 if x_star < c && attempt < params.type2_prob => {
                c.max(x_star + g) + exp2.sample(&mut rng)
            }
            3 if x_star < c && x_star >= c - params.type3_reach && attempt < params.type3_prob => {
                x_star + g + gamma3.sample(&mut rng)
            }
            4 if attempt < params.type4_prob => loop {
                let land = c + exp4.sample(&mut rng);
                if (land - x_star).abs() > g {
                    break land;
                }
            },
            _ => x_star,
        };
        let a = params.noise_weight;
        let y0 = (1.0 - a) * n01.cdf(z - 1.0) + a * eta;
        let y1 = (1.0 - a) * n01.cdf(z - 0.5) + a * eta;
        let y = if x >= c { y1 } else { y0 };
        rows.push((
            x,
            y,
            Latent {
                x_star,
                manipulated: x != x_star,
                t_type: t,
                y0,
                y1,
            },
        ));
    }
    assemble(rows, c, Some(OutcomeRange::unit()))
}
