//! Sharp Type 2 bounds by trimming versus the crude interval, for a binary
//! outcome (where they coincide) and a continuous one (where they do not).

use rdd_bounds::boundary::{BoundaryEstimates, OutcomeRange};
use rdd_bounds::bounds::{
    sharp_type2_bounds, sharp_type2_bounds_with, type2_bounds, BinaryOutcome, BoundsOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let be = BoundaryEstimates::from_ratio(0.4, 0.2, 0.7)?;
    let crude = type2_bounds(&be, 0.0, 1.0)?;
    let (sharp, _) = sharp_type2_bounds_with(
        &BinaryOutcome { mu_plus: 0.4 },
        &be,
        OutcomeRange::unit(),
        201,
        &BoundsOptions::default(),
    )?;
    println!(
        "binary:     crude [{:.4}, {:.4}]  sharp [{:.4}, {:.4}]",
        crude.lower, crude.upper, sharp.lower, sharp.upper
    );

    let window: Vec<(f64, f64)> = (0..=100)
        .map(|i| {
            let y = f64::from(i) / 100.0;
            (1.0, y)
        })
        .collect();
    let be = BoundaryEstimates::from_ratio(0.5, 0.3, 0.7)?;
    let crude = type2_bounds(&be, 0.0, 1.0)?;
    let (sharp, curve) = sharp_type2_bounds(&window, &be, 0.0, 1.0, 201)?;
    println!(
        "continuous: crude [{:.4}, {:.4}]  sharp [{:.4}, {:.4}] over {} grid points",
        crude.lower,
        crude.upper,
        sharp.lower,
        sharp.upper,
        curve.len()
    );
    Ok(())
}
