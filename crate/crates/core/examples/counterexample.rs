//! Manipulation that leaves the running-variable density smooth: the density
//! test stays quiet while the conditional mean jumps by -1/3.

use rdd_bounds::boundary::{estimate_boundary, BoundaryConfig};
use rdd_bounds::cli::plot_bins;
use rdd_bounds::diagnostics::density_discontinuity_test;
use rdd_bounds::localfit::KernelKind;
use rdd_bounds::synth::gen_counterexample_e;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ts = gen_counterexample_e(1_000_000, 3, 0.0)?;
    let cfg = BoundaryConfig::default();
    let test = density_discontinuity_test(ts.data(), &cfg, 200, 3)?;
    let be = estimate_boundary(ts.data(), &cfg)?;
    println!(
        "density test: t = {:.2}, p = {:.3}",
        test.statistic, test.p_value
    );
    println!(
        "mean limits: left {:.4} (-1/6), right {:.4} (-1/2), jump {:.4}",
        be.mu_minus,
        be.mu_plus,
        be.jump()
    );
    println!("manipulated share: {:.3}", ts.manipulation_fraction());
    for b in plot_bins(&ts.data().xs(), 0.0, 0.05, KernelKind::Triangular)?
        .iter()
        .filter(|b| b.bin_left.abs() < 0.2)
    {
        println!(
            "[{:6.2}, {:6.2}) {:7} {:.3}",
            b.bin_left,
            b.bin_right,
            b.count,
            b.fitted_density.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
