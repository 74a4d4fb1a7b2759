//! Confidence intervals for a partially identified effect: the critical
//! value moves from the two-sided to the one-sided quantile as the set widens.

use rdd_bounds::inference::{im_critical_value, imbens_manski_ci};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for delta in [0.0, 0.5, 1.0, 2.0, 5.0, 1000.0] {
        println!(
            "width/se {delta:7.1}: c = {:.4}",
            im_critical_value(delta, 0.05)
        );
    }
    let ci = imbens_manski_ci(0.06, 0.19, 0.02, 0.03, 0.05)?;
    println!(
        "set [0.06, 0.19] -> 95% CI [{:.4}, {:.4}] (c = {:.4})",
        ci.lo, ci.hi, ci.c_bar
    );
    Ok(())
}
