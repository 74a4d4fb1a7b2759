//! Exact trimming extremes of a finite distribution by vertex enumeration.
//!
//! A sub-distribution `q` with `0 <= q_i <= p_i` and total mass `tau` is an
//! extreme point of its polytope only if at most one atom is split. The
//! extreme means are therefore attained at one of: a set `S` of full atoms
//! plus a partial atom `j` outside `S` carrying the remaining mass.

use crate::error::{Error, Result};

pub const MAX_ENUMERATION_ATOMS: usize = 20;

/// `(g_L, g_U)`: smallest and largest mean of any mass-`tau` sub-distribution
/// of `dist`, given as `(value, probability)` atoms.
pub fn brute_force_trimming(dist: &[(f64, f64)], tau: f64) -> Result<(f64, f64)> {
    if dist.is_empty() {
        return Err(Error::InvalidDistribution("no atoms".into()));
    }
    if dist.len() > MAX_ENUMERATION_ATOMS {
        return Err(Error::InvalidDistribution(format!(
            "{} atoms exceed the enumeration limit of {MAX_ENUMERATION_ATOMS}",
            dist.len()
        )));
    }
    if dist
        .iter()
        .any(|&(y, p)| !y.is_finite() || !p.is_finite() || p < 0.0)
    {
        return Err(Error::InvalidDistribution(
            "atoms need finite values and probabilities >= 0".into(),
        ));
    }
    let total: f64 = dist.iter().map(|a| a.1).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidDistribution(format!(
            "tau = {tau} outside (0, 1]"
        )));
    }
    let k = dist.len();
    let slack = 1e-12;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut consider = |mass: f64, sum: f64| {
        let m = sum / mass;
        lo = lo.min(m);
        hi = hi.max(m);
    };
    for set in 0u32..(1 << k) {
        let (mut mass, mut sum) = (0.0, 0.0);
        for (i, &(y, p)) in dist.iter().enumerate() {
            if set & (1 << i) != 0 {
                mass += p;
                sum += p * y;
            }
        }
        let rest = tau - mass;
        if rest.abs() <= slack && mass > 0.0 {
            consider(mass, sum);
            continue;
        }
        if rest < 0.0 {
            continue;
        }
        for (j, &(y, p)) in dist.iter().enumerate() {
            if set & (1 << j) == 0 && rest <= p + slack && rest > 0.0 {
                let part = rest.min(p);
                consider(mass + part, sum + part * y);
            }
        }
    }
    if !lo.is_finite() {
        return Err(Error::Invariant("no feasible trimming found".into()));
    }
    Ok((lo, hi))
}
