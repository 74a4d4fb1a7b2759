//! Intersecting Type 2 bounds computed within covariate strata.

use rdd_bounds::boundary::BoundaryEstimates;
use rdd_bounds::bounds::{covariate_bounds, type2_bounds};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let strata = [
        ("young", 0.42, 0.25, 0.80),
        ("middle", 0.47, 0.28, 0.90),
        ("old", 0.40, 0.22, 0.75),
    ];
    let mut per = Vec::new();
    for (name, mu_plus, mu_minus, r) in strata {
        let b = type2_bounds(
            &BoundaryEstimates::from_ratio(mu_plus, mu_minus, r)?,
            0.0,
            1.0,
        )?;
        println!("{name:>6}: [{:.4}, {:.4}]", b.lower, b.upper);
        per.push((name.to_string(), b));
    }
    let all = covariate_bounds(&per)?;
    println!("intersection: [{:.4}, {:.4}]", all.lower, all.upper);
    Ok(())
}
