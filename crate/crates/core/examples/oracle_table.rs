//! Population bounds of the binary-outcome design for the four published
//! `(p, lambda)` pairs.

use rdd_bounds::cli::ORACLE_TABLE;
use rdd_bounds::synth::oracle_appendix_d;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("    p  lambda      r   crude lower/upper    sharp lower/upper   theta");
    for (p, lambda) in ORACLE_TABLE {
        let row = oracle_appendix_d(p, lambda)?;
        println!(
            "{p:5.2} {lambda:7.2} {:6.3}   [{:7.3}, {:6.3}]     [{:7.3}, {:6.3}]   {:.3}",
            row.r,
            row.crude_lower,
            row.crude_upper,
            row.sharp_lower,
            row.sharp_upper,
            row.theta_true
        );
    }
    Ok(())
}
