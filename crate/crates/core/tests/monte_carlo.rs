use rdd_bounds::boundary::BoundaryConfig;
use rdd_bounds::bounds::TypeAssumption;
use rdd_bounds::diagnostics::{balance_test, density_discontinuity_test};
use rdd_bounds::inference::{bootstrap_bounds, BootstrapConfig, FitConfig, RMode};
use rdd_bounds::resample::std_dev;
use rdd_bounds::synth::{gen_appendix_d, gen_typed, AppendixDSpec, TypeShares, TypedParams};

fn appendix_d(p: f64, lambda: f64, n: usize, seed: u64) -> rdd_bounds::synth::TypedSample {
    gen_appendix_d(&AppendixDSpec { p, lambda, n, seed }).unwrap()
}

#[test]
fn density_test_size_and_power() {
    let cfg = BoundaryConfig::default();
    let reps = 100;
    let mut rejections = 0;
    for s in 0..reps {
        let ts = gen_typed(
            &TypeShares::from([(0, 1.0)]),
            &TypedParams::default(),
            20_000,
            100 + s,
        )
        .unwrap();
        let t = density_discontinuity_test(ts.data(), &cfg, 100, s).unwrap();
        rejections += usize::from(t.rejects(0.05));
    }
    let size = rejections as f64 / reps as f64;
    assert!(size <= 0.12, "size {size}");

    let mut rejections = 0;
    for s in 0..50 {
        let ts = appendix_d(0.3, 0.3, 20_000, 200 + s);
        let t = density_discontinuity_test(ts.data(), &cfg, 100, s).unwrap();
        rejections += usize::from(t.rejects(0.05));
    }
    assert!(rejections >= 40, "power {rejections}/50");
}

#[test]
fn balance_test_size() {
    let cfg = BoundaryConfig::default();
    let reps = 100;
    let mut rejections = 0;
    let mut xstar_rejections = 0;
    for s in 0..reps {
        let ts = appendix_d(0.3, 0.3, 20_000, 300 + s).with_covariates(s);
        let t = balance_test(ts.data(), "w_noise", &cfg, 100, s).unwrap();
        rejections += usize::from(t.rejects(0.05));
        if s < 20 {
            let t = balance_test(ts.data(), "w_xstar", &cfg, 100, s).unwrap();
            xstar_rejections += usize::from(t.rejects(0.05));
        }
    }
    let size = rejections as f64 / reps as f64;
    assert!(size <= 0.12, "size {size}");
    assert!(xstar_rejections >= 15, "{xstar_rejections}/20");
}

#[test]
fn bootstrap_se_tracks_sampling_spread_and_covers() {
    let fit = FitConfig::default();
    let reps = 60;
    let (mut lows, mut highs, mut se_l, mut se_h) = (Vec::new(), Vec::new(), 0.0, 0.0);
    let mut covered = 0;
    for s in 0..reps {
        let ts = appendix_d(0.1, 0.3, 100_000, 400 + s);
        let cfg = BootstrapConfig {
            replications: 100,
            seed: s,
            r_mode: RMode::Random,
            alpha: 0.05,
        };
        let b = bootstrap_bounds(ts.data(), TypeAssumption::Type2, &cfg, &fit).unwrap();
        lows.push(b.point.lower);
        highs.push(b.point.upper);
        se_l += b.se_lower / reps as f64;
        se_h += b.se_upper / reps as f64;
        if b.point.is_informative() {
            covered += usize::from(b.imbens_manski(0.05).unwrap().contains(0.14988));
        }
    }
    let (sd_l, sd_h) = (std_dev(&lows), std_dev(&highs));
    assert!(
        (se_l / sd_l - 1.0).abs() < 0.35,
        "lower: se {se_l} vs sd {sd_l}"
    );
    assert!(
        (se_h / sd_h - 1.0).abs() < 0.35,
        "upper: se {se_h} vs sd {sd_h}"
    );
    assert!(
        covered as f64 / reps as f64 >= 0.9,
        "coverage {covered}/{reps}"
    );
}
