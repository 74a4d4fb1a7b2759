//! Density discontinuity and covariate balance tests, and the sequential
//! protocol that runs the balance tests only after the density test accepts.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::boundary::{BoundaryConfig, BoundaryWindow, Column, Dataset};
use crate::error::{Error, Result};
use crate::resample::{
    collect_successes, derive_seed, run_replicates, std_dev, window_multiplicities,
};

pub const MIN_REPLICATIONS: usize = 50;
pub const DEFAULT_REPLICATIONS: usize = 500;
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    AsymptoticNormal,
    Bootstrap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// `estimate / se`.
    pub statistic: f64,
    /// Two-sided normal p-value.
    pub p_value: f64,
    pub method: TestMethod,
    pub replications: usize,
    /// Right limit minus left limit.
    pub estimate: f64,
    pub se: f64,
    pub failed_replications: usize,
    /// Bootstrap distribution without spread; reported as `t = 0`, `p = 1`.
    pub degenerate_se: bool,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }

    fn from_draws(estimate: f64, draws: &[f64], failed: usize) -> Self {
        let se = std_dev(draws);
        let replications = draws.len() + failed;
        let scale = estimate
            .abs()
            .max(draws.iter().fold(0.0, |m, d| m.max(d.abs())));
        if !(se > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
            return TestResult {
                statistic: 0.0,
                p_value: 1.0,
                method: TestMethod::Bootstrap,
                replications,
                estimate,
                se,
                failed_replications: failed,
                degenerate_se: true,
            };
        }
        let statistic = estimate / se;
        TestResult {
            statistic,
            p_value: two_sided_p(statistic),
            method: TestMethod::Bootstrap,
            replications,
            estimate,
            se,
            failed_replications: failed,
            degenerate_se: false,
        }
    }
}

pub fn two_sided_p(t: f64) -> f64 {
    (2.0 * Normal::standard().cdf(-t.abs())).clamp(0.0, 1.0)
}

fn check_replications(b: usize) -> Result<()> {
    if b < MIN_REPLICATIONS {
        return Err(Error::InvalidConfig(format!(
            "bootstrap count {b} is below the minimum of {MIN_REPLICATIONS}"
        )));
    }
    Ok(())
}

/// Tests `f(c+) = f(c-)` with a bootstrap standard error of `f+ - f-`.
pub fn density_discontinuity_test(
    data: &Dataset,
    cfg: &BoundaryConfig,
    b: usize,
    seed: u64,
) -> Result<TestResult> {
    check_replications(b)?;
    let window = BoundaryWindow::new(data, cfg)?;
    let (fp, fm) = window.densities(None)?;
    let results = run_replicates(b, seed, |rng| {
        let freq = window_multiplicities(rng, window.n_total(), window.len());
        let (p, m) = window.densities(Some(&freq))?;
        Ok(p.value - m.value)
    });
    let (draws, failed) = collect_successes(results)?;
    Ok(TestResult::from_draws(fp.value - fm.value, &draws, failed))
}

/// Tests `E[W | X = c+] = E[W | X = c-]` for one covariate.
pub fn balance_test(
    data: &Dataset,
    covariate: &str,
    cfg: &BoundaryConfig,
    b: usize,
    seed: u64,
) -> Result<TestResult> {
    let k = data.covariate_index(covariate)?;
    let column = Column::Covariate(k);
    check_replications(b)?;
    let window = BoundaryWindow::new(data, cfg)?;
    let obs = data.observations();
    let mut values = window.rows().iter().map(|&i| obs[i].covariates[k]);
    let first = values.next();
    if first.is_none() || values.all(|v| Some(v) == first) {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            method: TestMethod::Bootstrap,
            replications: 0,
            estimate: 0.0,
            se: 0.0,
            failed_replications: 0,
            degenerate_se: true,
        });
    }
    let jump = |freq: Option<&[f64]>| -> Result<f64> {
        let (plus, minus) = window.means(column, freq)?;
        Ok(plus.intercept() - minus.intercept())
    };
    let estimate = jump(None)?;
    let results = run_replicates(b, seed, |rng| {
        let freq = window_multiplicities(rng, window.n_total(), window.len());
        jump(Some(&freq))
    });
    let (draws, failed) = collect_successes(results)?;
    Ok(TestResult::from_draws(estimate, &draws, failed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub boundary: BoundaryConfig,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub covariates: Vec<String>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            boundary: BoundaryConfig::default(),
            replications: DEFAULT_REPLICATIONS,
            alpha: DEFAULT_ALPHA,
            seed: 0,
            covariates: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Density test rejected: report bounds.
    UseBounds,
    /// Density and balance tests accepted.
    PointIdentified,
    /// Density accepted but some covariate is unbalanced.
    DesignSuspect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOutcome {
    pub density: TestResult,
    /// Present only when the density test accepted.
    pub balance: Option<Vec<(String, TestResult)>>,
    pub verdict: Verdict,
    pub alpha: f64,
}

/// Density test first; covariate balance tests only if it accepts at `alpha`.
///
/// Each test uses its own seed derived from `cfg.seed` and the test label.
pub fn run_sequential_protocol(data: &Dataset, cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "alpha = {} outside (0, 1)",
            cfg.alpha
        )));
    }
    check_replications(cfg.replications)?;
    for name in &cfg.covariates {
        data.covariate_index(name)?;
    }
    let density = density_discontinuity_test(
        data,
        &cfg.boundary,
        cfg.replications,
        derive_seed(cfg.seed, "density"),
    )?;
    if density.rejects(cfg.alpha) {
        return Ok(ProtocolOutcome {
            density,
            balance: None,
            verdict: Verdict::UseBounds,
            alpha: cfg.alpha,
        });
    }
    let mut balance = Vec::with_capacity(cfg.covariates.len());
    for name in &cfg.covariates {
        let seed = derive_seed(cfg.seed, &format!("balance:{name}"));
        let t = balance_test(data, name, &cfg.boundary, cfg.replications, seed)?;
        balance.push((name.clone(), t));
    }
    let verdict = if balance.iter().any(|(_, t)| t.rejects(cfg.alpha)) {
        Verdict::DesignSuspect
    } else {
        Verdict::PointIdentified
    };
    Ok(ProtocolOutcome {
        density,
        balance: Some(balance),
        verdict,
        alpha: cfg.alpha,
    })
}
