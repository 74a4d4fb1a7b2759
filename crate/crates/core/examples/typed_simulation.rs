//! Simulating typed samples and writing them as CSV with latent columns.

use rdd_bounds::cli::{latent_summary, simulate, SimulateOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SimulateOptions {
        n: 5,
        seed: 2,
        covariates: true,
        ..SimulateOptions::default()
    };
    for dgp in ["typed", "appendix-d", "counterexample-e"] {
        let ts = simulate(dgp, &opts)?;
        println!("{dgp}: {}", latent_summary(&ts));
        print!("{}", ts.to_csv_string()?);
    }
    Ok(())
}
