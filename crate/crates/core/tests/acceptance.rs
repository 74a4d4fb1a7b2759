//! Acceptance checks, one PASS/FAIL line each. Exits nonzero on any failure.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use rdd_bounds::boundary::{estimate_boundary, BoundaryConfig, BoundaryEstimates, OutcomeRange};
use rdd_bounds::bounds::{
    binary_sharp_gfuncs, fuzzy_bounds, sharp_type2_bounds_with, type2_bounds, type3_bounds,
    type4_bounds, BinaryOutcome, BoundsOptions, FuzzyInputs, TrimmingModel, WeightedOutcomes,
};
use rdd_bounds::cli::{self, OracleOutput, RunConfig};
use rdd_bounds::diagnostics::density_discontinuity_test;
use rdd_bounds::inference::imbens_manski_ci;
use rdd_bounds::synth::{
    brute_force_trimming, gen_appendix_d, gen_counterexample_e, gen_typed, verify_lemma_moments,
    AppendixDSpec, TypeShares, TypedParams,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

const PUBLISHED: [[f64; 7]; 4] = [
    [0.1, 0.05, 0.060, 0.185, 0.060, 0.185, 0.894],
    [0.1, 0.3, 0.032, 0.190, 0.032, 0.190, 0.867],
    [0.3, 0.05, -0.170, 0.286, -0.168, 0.286, 0.687],
    [0.3, 0.3, -0.287, 0.303, -0.254, 0.303, 0.629],
];

fn oracle_rows() -> Vec<rdd_bounds::synth::OracleRow> {
    match cli::oracle(None, None).expect("oracle table") {
        OracleOutput::Table(rows) => rows,
        OracleOutput::One(row) => vec![row],
    }
}

fn oracle_table() -> Outcome {
    let t0 = Instant::now();
    let rows = oracle_rows();
    let secs = t0.elapsed().as_secs_f64();
    if rows.len() != 4 {
        return Err(format!("{} rows", rows.len()));
    }
    let mut worst = 0.0f64;
    for (row, want) in rows.iter().zip(PUBLISHED) {
        if row.p != want[0] || row.lambda != want[1] {
            return Err(format!("row order: ({}, {})", row.p, row.lambda));
        }
        let got = [
            row.crude_lower,
            row.crude_upper,
            row.sharp_lower,
            row.sharp_upper,
            row.r,
        ];
        for (g, w) in got.iter().zip(&want[2..]) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure(
        worst <= 0.003 && secs < 10.0,
        format!("max deviation {worst:.5}, {secs:.3} s"),
    )
}

fn theta_true() -> Outcome {
    let rows = oracle_rows();
    let worst = rows
        .iter()
        .map(|r| (r.theta_true - 0.150).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 0.001, format!("max |theta - 0.150| = {worst:.5}"))
}

fn end_to_end() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("appendix_d.csv");
    let t0 = Instant::now();
    let ts = gen_appendix_d(&AppendixDSpec {
        p: 0.1,
        lambda: 0.05,
        n: 200_000,
        seed: 1,
    })
    .map_err(|e| e.to_string())?;
    ts.save_csv(&path).map_err(|e| e.to_string())?;
    let mut cfg = RunConfig::new(0.0);
    cfg.y_min = Some(0.0);
    cfg.y_max = Some(1.0);
    cfg.boot = 200;
    cfg.seed = 1;
    let report = cli::analyze(&cfg, &path).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let oracle = &oracle_rows()[0];
    let block = report
        .orders
        .iter()
        .find(|b| b.order == 1)
        .ok_or("no order-1 block")?;
    let set = &block.identified_set.set;
    let err = (set.lower - oracle.crude_lower)
        .abs()
        .max((set.upper - oracle.crude_upper).abs());
    ensure(
        err <= 0.03 && secs < 60.0,
        format!(
            "[{:.4}, {:.4}] vs [{:.4}, {:.4}], max error {err:.4}, {secs:.1} s",
            set.lower, set.upper, oracle.crude_lower, oracle.crude_upper
        ),
    )
}

fn binary_equality() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for r in [0.5, 0.7, 0.9] {
        for i in 0..9 {
            let mu_plus = (1.0 - r) + (2.0 * r - 1.0) * f64::from(i) / 8.0;
            for mu_minus in [0.1, 0.35, 0.5, 0.65, 0.9] {
                let be = BoundaryEstimates::from_ratio(mu_plus, mu_minus, r)
                    .map_err(|e| e.to_string())?;
                let crude = type2_bounds(&be, 0.0, 1.0).map_err(|e| e.to_string())?;
                let (sharp, _) = sharp_type2_bounds_with(
                    &BinaryOutcome { mu_plus },
                    &be,
                    OutcomeRange::unit(),
                    201,
                    &BoundsOptions::default(),
                )
                .map_err(|e| e.to_string())?;
                worst = worst
                    .max((sharp.lower - crude.lower).abs())
                    .max((sharp.upper - crude.upper).abs());
                cases += 1;
            }
        }
    }
    ensure(worst <= 1e-9, format!("{cases} cases, max gap {worst:.2e}"))
}

fn random_atoms(rng: &mut ChaCha8Rng, lo: f64, hi: f64, k: usize) -> Vec<(f64, f64)> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter()
        .map(|w| (rng.random_range(lo..=hi), w / total))
        .collect()
}

fn structural_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = BoundsOptions::default();
    for i in 0..10_000 {
        let y_l = rng.random_range(-5.0..5.0);
        let y_u = y_l + rng.random_range(0.1..5.0);
        let k = rng.random_range(1..=6);
        let atoms = random_atoms(&mut rng, y_l, y_u, k);
        let model = WeightedOutcomes::from_atoms(&atoms).map_err(|e| e.to_string())?;
        let mu_plus = model.mean();
        let mu_minus = rng.random_range(y_l..=y_u);
        let r = if i % 10 == 0 {
            1.0
        } else {
            rng.random_range(0.05..=1.0)
        };
        let be = BoundaryEstimates::from_ratio(mu_plus, mu_minus, r).map_err(|e| e.to_string())?;
        let t2 = type2_bounds(&be, y_l, y_u).map_err(|e| e.to_string())?;
        let t3 = type3_bounds(&be, y_l, y_u).map_err(|e| e.to_string())?;
        let t4 = type4_bounds(&be, y_l, y_u).map_err(|e| e.to_string())?;
        let span = y_u - y_l;
        let tol = 1e-9 * (1.0 + span / r);
        let fail = |what: &str| {
            Err(format!(
                "{what} at mu+ {mu_plus}, mu- {mu_minus}, r {r}, y [{y_l}, {y_u}]"
            ))
        };
        if !near(t2.lower, t3.lower.min(t4.lower), tol)
            || !near(t2.upper, t3.upper.max(t4.upper), tol)
        {
            return fail("Type 2 is not the branchwise envelope");
        }
        if !near(t3.width(), (1.0 - r) * span, tol) {
            return fail("Type 3 width");
        }
        if !near(t4.width(), (1.0 / r - 1.0) * span, tol) {
            return fail("Type 4 width");
        }
        if r == 1.0
            && [t2.width(), t3.width(), t4.width()]
                .iter()
                .any(|w| w.abs() > tol)
        {
            return fail("nonzero width at r = 1");
        }
        let (sharp, _) = sharp_type2_bounds_with(
            &model,
            &be,
            OutcomeRange::new(y_l, y_u).map_err(|e| e.to_string())?,
            201,
            &opts,
        )
        .map_err(|e| e.to_string())?;
        if sharp.lower < t2.lower - tol || sharp.upper > t2.upper + tol {
            return fail("sharp set not inside crude set");
        }
    }
    Ok("10000 tuples".into())
}

fn fuzzy_reduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let y_l = rng.random_range(-3.0..3.0);
        let y_u = y_l + rng.random_range(0.1..4.0);
        let mu_plus = rng.random_range(y_l..=y_u);
        let mu_minus = rng.random_range(y_l..=y_u);
        let f_plus = rng.random_range(0.1..3.0);
        let f_minus = f_plus * rng.random_range(0.05..=1.0);
        let be = BoundaryEstimates::from_moments(mu_plus, mu_minus, f_plus, f_minus)
            .map_err(|e| e.to_string())?;
        let fz = fuzzy_bounds(
            &FuzzyInputs {
                be: be.clone(),
                d_plus: 1.0,
                d_minus: 0.0,
            },
            y_l,
            y_u,
        )
        .map_err(|e| e.to_string())?;
        let t2 = type2_bounds(&be, y_l, y_u).map_err(|e| e.to_string())?;
        worst = worst
            .max((fz.lower - t2.lower).abs())
            .max((fz.upper - t2.upper).abs());
    }
    ensure(worst <= 1e-12, format!("1000 inputs, max gap {worst:.2e}"))
}

fn trimming_oracle() -> Outcome {
    let mut worst_grid = 0.0f64;
    for i in 0..=100 {
        let mu = f64::from(i) / 100.0;
        for j in 1..=100 {
            let tau = f64::from(j) / 100.0;
            let (bl, bu) = brute_force_trimming(&[(0.0, 1.0 - mu), (1.0, mu)], tau)
                .map_err(|e| e.to_string())?;
            let (gl, gu) = binary_sharp_gfuncs(mu, tau);
            worst_grid = worst_grid.max((bl - gl).abs()).max((bu - gu).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_emp = 0.0f64;
    for _ in 0..100 {
        let k = rng.random_range(1..=10);
        let atoms = random_atoms(&mut rng, -2.0, 2.0, k);
        let model = WeightedOutcomes::from_atoms(&atoms).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            let tau = rng.random_range(0.01..=1.0);
            let (bl, bu) = brute_force_trimming(&atoms, tau).map_err(|e| e.to_string())?;
            let (gl, gu) = model.trimmed_means(tau);
            worst_emp = worst_emp.max((bl - gl).abs()).max((bu - gu).abs());
        }
    }
    ensure(
        worst_grid <= 1e-12 && worst_emp <= 1e-9,
        format!("binary grid gap {worst_grid:.2e}, random distributions gap {worst_emp:.2e}"),
    )
}

fn counterexample() -> Outcome {
    let cfg = BoundaryConfig::with_order(1);
    let runs = 100u64;
    let mut quiet = 0;
    let (mut jump, mut left, mut right) = (0.0, 0.0, 0.0);
    let mut per_run_ok = 0;
    for s in 0..runs {
        let ts = gen_counterexample_e(1_000_000, 10_000 + s, 0.0).map_err(|e| e.to_string())?;
        let be = estimate_boundary(ts.data(), &cfg).map_err(|e| e.to_string())?;
        let test =
            density_discontinuity_test(ts.data(), &cfg, 200, s).map_err(|e| e.to_string())?;
        if test.statistic.abs() < 1.96 {
            quiet += 1;
        }
        if near(be.jump(), -1.0 / 3.0, 0.02)
            && near(be.mu_minus, -1.0 / 6.0, 0.01)
            && near(be.mu_plus, -0.5, 0.01)
        {
            per_run_ok += 1;
        }
        jump += be.jump();
        left += be.mu_minus;
        right += be.mu_plus;
    }
    let k = runs as f64;
    let (jump, left, right) = (jump / k, left / k, right / k);
    let share = f64::from(quiet) / k;
    ensure(
        share >= 0.85
            && near(jump, -1.0 / 3.0, 0.02)
            && near(left, -1.0 / 6.0, 0.01)
            && near(right, -0.5, 0.01),
        format!(
            "|t| < 1.96 in {quiet}/{runs}; mean jump {jump:.4}, left {left:.4}, right {right:.4}; \
             {per_run_ok}/{runs} runs within tolerance individually"
        ),
    )
}

fn lemma_identities() -> Outcome {
    let presets: [(&str, TypeShares); 3] = [
        ("type 0", TypeShares::from([(0, 1.0)])),
        ("type 0+2", TypeShares::from([(0, 0.7), (2, 0.3)])),
        ("type 0+4", TypeShares::from([(0, 0.7), (4, 0.3)])),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, (name, shares)) in presets.iter().enumerate() {
        let ts = gen_typed(shares, &TypedParams::default(), 1_000_000, 20 + i as u64)
            .map_err(|e| e.to_string())?;
        let rep = verify_lemma_moments(&ts, 0.02).map_err(|e| e.to_string())?;
        let worst = rep.max_residual();
        ok &= worst < 0.02 && !rep.checks.is_empty();
        if shares.contains_key(&2) {
            let frac = rep
                .check("fraction manipulated right")
                .ok_or("fraction identity missing")?;
            ok &= frac.residual < 0.02;
        }
        parts.push(format!("{name} max {worst:.4}"));
    }
    ensure(ok, parts.join(", "))
}

fn published_width() -> Outcome {
    let be = BoundaryEstimates::from_ratio(0.5, 0.5, 0.792).map_err(|e| e.to_string())?;
    let w = type4_bounds(&be, 0.0, 1.0)
        .map_err(|e| e.to_string())?
        .width();
    let published = 0.627 - 0.363;
    ensure(
        near(w, 0.2626, 5e-5) && near(w, published, 0.005),
        format!("width {w:.4} vs published {published:.3}"),
    )
}

fn run_bin(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rdd-bounds"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = dir.path().join("data.csv");
    let data_s = data.to_str().ok_or("path")?;
    let sim = |threads: &str| {
        run_bin(&[
            "--threads",
            threads,
            "simulate",
            "appendix-d",
            "--n",
            "20000",
            "--seed",
            "9",
            "--p",
            "0.3",
            "--lambda",
            "0.3",
            "--covariates",
        ])
    };
    let sims = [sim("1")?, sim("1")?, sim("4")?];
    if sims.iter().any(|s| s != &sims[0]) {
        return Err("simulate output differs".into());
    }
    std::fs::write(&data, &sims[0]).map_err(|e| e.to_string())?;
    let analyze = |threads: &str, out: &Path| -> Result<Vec<u8>, String> {
        run_bin(&[
            "--threads",
            threads,
            "analyze",
            data_s,
            "--cutoff",
            "0",
            "--y-min",
            "0",
            "--y-max",
            "1",
            "--boot",
            "100",
            "--seed",
            "3",
            "--sharp",
            "--covariate",
            "w_noise",
            "--out",
            out.to_str().ok_or("path")?,
        ])?;
        std::fs::read(out).map_err(|e| e.to_string())
    };
    let reports = [
        analyze("1", &dir.path().join("a.json"))?,
        analyze("1", &dir.path().join("b.json"))?,
        analyze("4", &dir.path().join("c.json"))?,
        analyze("8", &dir.path().join("d.json"))?,
    ];
    ensure(
        reports.iter().all(|r| r == &reports[0]),
        format!(
            "simulate {} bytes x3, analyze {} bytes x4 at 1/1/4/8 threads",
            sims[0].len(),
            reports[0].len()
        ),
    )
}

fn imbens_manski_limits() -> Outcome {
    let n = Normal::standard();
    let mut worst_point = 0.0f64;
    let mut worst_wide = 0.0f64;
    for alpha in [0.01, 0.05, 0.1] {
        let point = imbens_manski_ci(0.3, 0.3, 0.05, 0.05, alpha).map_err(|e| e.to_string())?;
        worst_point = worst_point.max((point.c_bar - n.inverse_cdf(1.0 - alpha / 2.0)).abs());
        let wide = imbens_manski_ci(0.0, 1.0, 1e-3, 1e-3, alpha).map_err(|e| e.to_string())?;
        worst_wide = worst_wide.max((wide.c_bar - n.inverse_cdf(1.0 - alpha)).abs());
    }
    ensure(
        worst_point <= 1e-4 && worst_wide <= 1e-3,
        format!("point-identified gap {worst_point:.2e}, width/SE 1e3 gap {worst_wide:.2e}"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("oracle table reproduction", oracle_table),
        ("true effect in the oracle", theta_true),
        ("end-to-end estimation", end_to_end),
        ("binary sharp equals crude", binary_equality),
        ("structural bound identities", structural_identities),
        ("fuzzy reduction", fuzzy_reduction),
        ("trimming oracle equivalence", trimming_oracle),
        ("smooth-density counterexample", counterexample),
        ("mixture identity residuals", lemma_identities),
        ("published Type 4 width", published_width),
        ("determinism", determinism),
        ("Imbens-Manski limits", imbens_manski_limits),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = check();
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({secs:.1} s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
