//! A compact version of the reference simulation study: runs the seeded
//! harness over a small size grid and prints, per measure and size, the
//! consistency and normality diagnostics.
//!
//! ```sh
//! cargo run --release --example reference_study
//! ```

use phidiv::montecarlo::{run, SimulationConfig};

fn main() -> phidiv::Result<()> {
    let mut config = SimulationConfig::reference_defaults(7);
    config.sizes = vec![100, 1000, 10_000];
    config.replications = 500;

    let report = run(&config)?;
    println!(
        "{:<18} {:>6} {:>10} {:>10} {:>9} {:>8} {:>8} {:>9} {:>9}",
        "measure", "size", "true", "mean", "bias", "std_mean", "std_sd", "ks_p", "coverage"
    );
    for cell in &report.cells {
        let std = cell.standardized.as_ref().expect("nondegenerate cells");
        println!(
            "{:<18} {:>6} {:>10.5} {:>10.5} {:>9.5} {:>8.3} {:>8.3} {:>9.4} {:>9.3}",
            cell.measure,
            cell.size,
            cell.true_value,
            cell.mean_estimate,
            cell.bias,
            std.mean,
            std.sd,
            std.ks_p_value.expect("replications >= 8"),
            cell.ci_coverage,
        );
    }
    Ok(())
}
