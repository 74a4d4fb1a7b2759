//! The full report on a simulated manipulated sample: density and balance
//! tests, boundary estimates, bounds and confidence intervals per order.

use rdd_bounds::cli::{analyze_dataset, RunConfig};
use rdd_bounds::synth::{gen_appendix_d, oracle_appendix_d, AppendixDSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (p, lambda) = (0.1, 0.05);
    let ts = gen_appendix_d(&AppendixDSpec {
        p,
        lambda,
        n: 200_000,
        seed: 11,
    })?
    .with_covariates(11);

    let mut cfg = RunConfig::new(0.0);
    cfg.y_min = Some(0.0);
    cfg.y_max = Some(1.0);
    cfg.boot = 200;
    cfg.columns.covariates = vec!["w_noise".into()];
    let report = analyze_dataset(ts.data(), &cfg)?;

    let proto = &report.protocol;
    println!(
        "density test (order {}): t = {:.2}, p = {:.2e} -> {:?}",
        proto.order, proto.density.statistic, proto.density.p_value, proto.verdict
    );
    let oracle = oracle_appendix_d(p, lambda)?;
    println!(
        "population: r = {:.3}, set [{:.3}, {:.3}]",
        oracle.r, oracle.crude_lower, oracle.crude_upper
    );
    for block in &report.orders {
        let set = &block.identified_set;
        let ci = set.ci_fixed_r.as_ref();
        println!(
            "order {}: r = {:.3}, set [{:.3}, {:.3}], 95% CI {}",
            block.order,
            block.r,
            set.set.lower,
            set.set.upper,
            ci.map_or("none".to_string(), |c| format!(
                "[{:.3}, {:.3}]",
                c.lo, c.hi
            ))
        );
    }
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
