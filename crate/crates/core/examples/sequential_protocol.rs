//! Density test first, then covariate balance only when the density test
//! does not reject.

use rdd_bounds::diagnostics::{run_sequential_protocol, ProtocolConfig};
use rdd_bounds::synth::{gen_appendix_d, gen_typed, AppendixDSpec, TypeShares, TypedParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ProtocolConfig {
        replications: 200,
        covariates: vec!["w_noise".into(), "w_xstar".into()],
        ..ProtocolConfig::default()
    };

    let clean = gen_typed(
        &TypeShares::from([(0, 1.0)]),
        &TypedParams::default(),
        50_000,
        3,
    )?
    .with_covariates(3);
    let manipulated = gen_appendix_d(&AppendixDSpec {
        p: 0.3,
        lambda: 0.3,
        n: 50_000,
        seed: 1,
    })?
    .with_covariates(1);

    for (name, ts) in [("no manipulation", clean), ("manipulation", manipulated)] {
        let out = run_sequential_protocol(ts.data(), &cfg)?;
        println!(
            "{name}: density p = {:.3}, verdict {:?}",
            out.density.p_value, out.verdict
        );
        for (cov, t) in out.balance.iter().flatten() {
            println!(
                "  balance {cov}: t = {:.2}, p = {:.3}",
                t.statistic, t.p_value
            );
        }
    }
    Ok(())
}
