//! One-sided local polynomial fits: a boundary mean and a boundary density.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdd_bounds::error::Side;
use rdd_bounds::localfit::{
    boundary_density, default_bandwidth, local_poly_fit, BandwidthRule, FitSpec, KernelKind,
    DEFAULT_MIN_BANDWIDTH,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<f64> = (0..50_000).map(|_| rng.random_range(0.0..1.0)).collect();
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| (x, 1.0 + 2.0 * x + 0.1 * rng.random_range(-1.0..1.0)))
        .collect();

    let h = default_bandwidth(
        &xs,
        Side::Right,
        0.0,
        KernelKind::Triangular,
        BandwidthRule::RobustScaled,
        DEFAULT_MIN_BANDWIDTH,
    )?;
    let spec = FitSpec::new(1, h, KernelKind::Triangular, Side::Right)?;
    let fit = local_poly_fit(&pts, 0.0, &spec)?;
    println!("bandwidth {h:.4}");
    println!(
        "mean at 0+: {:.4} (truth 1), slope {:.4} (truth 2), {} points in window",
        fit.intercept(),
        fit.coefficients[1],
        fit.effective_n
    );

    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let dens = boundary_density(&sorted, 0.0, &spec)?;
    println!("density at 0+: {:.4} (truth 1)", dens.value);
    Ok(())
}
