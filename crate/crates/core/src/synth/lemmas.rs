//! Mixture identities linking observed boundary moments to latent ones,
//! evaluated with window averages on a sample that carries latents.

use serde::{Deserialize, Serialize};

use super::{Latent, TypedSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Ordering condition under which a smooth density is equivalent to smooth
/// conditional means, with the observed jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub d: u8,
    pub condition_holds: bool,
    pub mean_jump: f64,
    pub density_jump: f64,
    /// `Some(true)` when both jumps are significant or both are not; only
    /// evaluated when the ordering condition holds.
    pub consistent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub window: f64,
    pub manipulation_fraction: f64,
    pub checks: Vec<IdentityCheck>,
    pub ordering: Vec<OrderingCheck>,
}

impl LemmaReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn check(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    n: f64,
    s: [f64; 2],
    ss: [f64; 2],
}

impl Acc {
    fn add(&mut self, l: &Latent) {
        self.n += 1.0;
        for (k, y) in [l.y0, l.y1].into_iter().enumerate() {
            self.s[k] += y;
            self.ss[k] += y * y;
        }
    }

    fn mean(&self, d: usize) -> Option<f64> {
        (self.n > 0.0).then(|| self.s[d] / self.n)
    }

    fn var_of_mean(&self, d: usize) -> f64 {
        if self.n < 2.0 {
            return f64::INFINITY;
        }
        let m = self.s[d] / self.n;
        ((self.ss[d] / self.n - m * m).max(0.0)) / self.n
    }
}

/// Window sums for one sub-population.
#[derive(Debug, Default)]
struct Windows {
    n: f64,
    right: Acc,
    right_manip: Acc,
    left: Acc,
    star: Acc,
    star_nonmanip: Acc,
    star_left: Acc,
    star_left_manip: Acc,
    union: Acc,
}

fn collect(ts: &TypedSample, h: f64, keep: impl Fn(u8) -> bool) -> Windows {
    let c = ts.data().cutoff();
    let mut w = Windows::default();
    for (o, l) in ts.data().observations().iter().zip(ts.latents()) {
        if !keep(l.t_type) {
            continue;
        }
        w.n += 1.0;
        let in_right = o.x >= c && o.x < c + h;
        let in_left = o.x >= c - h && o.x < c;
        let in_star = (l.x_star - c).abs() < h;
        if in_right {
            w.right.add(l);
            if l.manipulated {
                w.right_manip.add(l);
            }
        }
        if in_left {
            w.left.add(l);
        }
        if in_star {
            w.star.add(l);
            if !l.manipulated {
                w.star_nonmanip.add(l);
            }
        }
        if l.x_star >= c - h && l.x_star < c {
            w.star_left.add(l);
            if l.manipulated {
                w.star_left_manip.add(l);
            }
        }
        if in_star || (l.manipulated && (o.x - c).abs() < h) {
            w.union.add(l);
        }
    }
    w
}

struct Checks(Vec<IdentityCheck>);

impl Checks {
    fn push(&mut self, name: String, lhs: f64, rhs: f64) {
        self.0.push(IdentityCheck {
            name,
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
        });
    }
}

/// Evaluates the mixture identities for every unit type present.
///
/// Each identity for type `k` in 2–4 is checked on the units of types 0 and
/// `k`; a sample without such types is checked against all of them.
pub fn verify_lemma_moments(ts: &TypedSample, window: f64) -> Result<LemmaReport> {
    if !ts.has_latents() {
        return Err(Error::MissingLatents);
    }
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "window {window} must be positive"
        )));
    }
    let h = window;
    let shares = ts.type_shares();
    let only_type0 = shares[2..].iter().all(|&s| s == 0.0);
    let mut checks = Checks(Vec::new());
    let mut ordering = Vec::new();
    for k in 2..=4u8 {
        if !only_type0 && shares[k as usize] == 0.0 {
            continue;
        }
        let w = collect(ts, h, |t| t == 0 || t == k);
        if w.right.n == 0.0 || w.left.n == 0.0 || w.star.n == 0.0 {
            return Err(Error::InsufficientData {
                needed: 1,
                found: 0,
            });
        }
        let f_plus = w.right.n / (w.n * h);
        let f_minus = w.left.n / (w.n * h);
        let f_star = w.star.n / (2.0 * w.n * h);
        for d in 0..2usize {
            let m = |a: &Acc, fallback: f64| a.mean(d).unwrap_or(fallback);
            let mr = m(&w.right, 0.0);
            let ml = m(&w.left, 0.0);
            let ms = m(&w.star, 0.0);
            match k {
                2 => {
                    let a = f_star / f_plus;
                    checks.push(
                        format!("lemma2 right d={d}"),
                        mr,
                        a * ms + (1.0 - a) * m(&w.right_manip, ms),
                    );
                    let b = f_star / f_minus;
                    checks.push(
                        format!("lemma2 left d={d}"),
                        ml,
                        b * ms + (1.0 - b) * m(&w.star_left_manip, ms),
                    );
                    ordering.push(ordering_check(&w, d, f_plus, f_minus, h));
                }
                3 => {
                    let mu = m(&w.union, 0.0);
                    checks.push(format!("lemma3 right d={d}"), mr, mu);
                    let a = f_plus / f_minus;
                    checks.push(
                        format!("lemma3 left d={d}"),
                        ml,
                        a * mu + (1.0 - a) * m(&w.star_left_manip, mu),
                    );
                }
                _ => {
                    let mn = m(&w.star_nonmanip, 0.0);
                    let r = f_minus / f_plus;
                    checks.push(format!("lemma4 left d={d}"), ml, mn);
                    checks.push(
                        format!("lemma4 right d={d}"),
                        mr,
                        r * mn + (1.0 - r) * m(&w.right_manip, mn),
                    );
                }
            }
        }
        if k == 2 {
            checks.push(
                "fraction manipulated right".into(),
                w.right_manip.n / w.right.n,
                1.0 - f_star / f_plus,
            );
            if w.star_left.n > 0.0 {
                checks.push(
                    "fraction manipulated below".into(),
                    w.star_left_manip.n / w.star_left.n,
                    1.0 - f_minus / f_star,
                );
            }
        }
    }
    Ok(LemmaReport {
        window,
        manipulation_fraction: ts.manipulation_fraction(),
        checks: checks.0,
        ordering,
    })
}

fn ordering_check(w: &Windows, d: usize, f_plus: f64, f_minus: f64, h: f64) -> OrderingCheck {
    let sig = |diff: f64, var: f64| diff.abs() > 3.0 * var.sqrt();
    let (rm, s, lm) = (&w.right_manip, &w.star, &w.star_left_manip);
    let ordered = match (rm.mean(d), s.mean(d), lm.mean(d)) {
        (Some(a), Some(b), Some(c)) => {
            let ab = sig(a - b, rm.var_of_mean(d) + s.var_of_mean(d));
            let bc = sig(b - c, s.var_of_mean(d) + lm.var_of_mean(d));
            ab && bc && ((a < b && b < c) || (a > b && b > c))
        }
        _ => false,
    };
    let mean_jump = w.right.mean(d).unwrap_or(0.0) - w.left.mean(d).unwrap_or(0.0);
    let density_jump = f_plus - f_minus;
    let consistent = ordered.then(|| {
        let mean_sig = sig(mean_jump, w.right.var_of_mean(d) + w.left.var_of_mean(d));
        let dens_var = (w.right.n + w.left.n) / (w.n * h).powi(2);
        mean_sig == sig(density_jump, dens_var)
    });
    OrderingCheck {
        d: d as u8,
        condition_holds: ordered,
        mean_jump,
        density_jump,
        consistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_appendix_d, gen_typed, AppendixDSpec, TypeShares, TypedParams};

    #[test]
    fn type0_collapses() {
        let ts = gen_typed(
            &TypeShares::from([(0, 1.0)]),
            &TypedParams::default(),
            4_000_000,
            1,
        )
        .unwrap();
        let rep = verify_lemma_moments(&ts, 0.02).unwrap();
        assert_eq!(rep.manipulation_fraction, 0.0);
        assert_eq!(rep.checks.len(), 14);
        assert!(rep.max_residual() < 0.01, "{:?}", rep.checks);
    }

    #[test]
    fn appendix_d_identities() {
        let ts = gen_appendix_d(&AppendixDSpec {
            p: 0.3,
            lambda: 0.3,
            n: 400_000,
            seed: 2,
        })
        .unwrap();
        let rep = verify_lemma_moments(&ts, 0.05).unwrap();
        assert!(rep.check("lemma2 right d=1").is_some());
        assert!(rep.max_residual() < 0.03, "{:?}", rep.checks);
    }

    #[test]
    fn needs_latents() {
        let ts = gen_appendix_d(&AppendixDSpec {
            p: 0.3,
            lambda: 0.3,
            n: 100,
            seed: 2,
        })
        .unwrap();
        let bare = TypedSample::new(ts.data().clone(), Vec::new()).unwrap();
        assert_eq!(
            verify_lemma_moments(&bare, 0.02).unwrap_err(),
            Error::MissingLatents
        );
    }
}
