//! Bounds on the treatment effect among compliers when treatment take-up
//! also jumps at the cutoff.

use rdd_bounds::boundary::BoundaryEstimates;
use rdd_bounds::bounds::{fuzzy_bounds, type2_bounds, FuzzyInputs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let be = BoundaryEstimates::from_moments(0.45, 0.25, 0.42, 0.36)?;
    println!("r = {:.3}", be.r);
    for (d_plus, d_minus) in [(1.0, 0.0), (0.9, 0.1), (0.7, 0.2)] {
        let fi = FuzzyInputs {
            be: be.clone(),
            d_plus,
            d_minus,
        };
        let b = fuzzy_bounds(&fi, 0.0, 1.0)?;
        println!(
            "take-up {d_plus:.1} vs {d_minus:.1}: [{:.4}, {:.4}] ({:?})",
            b.lower, b.upper, b.status
        );
    }
    let sharp = type2_bounds(&be, 0.0, 1.0)?;
    println!(
        "sharp design Type 2: [{:.4}, {:.4}]",
        sharp.lower, sharp.upper
    );
    Ok(())
}
