//! Repeated simulate-and-fit study: bias, spread and classification error.
//!
//! ```text
//! cargo run --release --example monte_carlo_study -- [SCENARIO] [N] [REPS]
//! ```

use recurmix::report::{mc_raw_report, mc_summary_report};
use recurmix::{builtin_scenario, run_mc, EmConfig};

fn main() -> recurmix::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "mixed".into());
    let n: usize = args.next().map_or(Ok(300), |v| v.parse()).map_err(|e| recurmix::Error::Input(format!("N: {e}")))?;
    let reps: usize = args.next().map_or(Ok(10), |v| v.parse()).map_err(|e| recurmix::Error::Input(format!("REPS: {e}")))?;

    let scenario = builtin_scenario(&name, n, 7)?;
    let cfg = EmConfig::default();
    let mc = run_mc(&scenario, reps, &cfg)?;

    println!("{} replications of {} with n = {} ({} failed)", mc.reps, mc.scenario, mc.n_subjects, mc.n_failed);
    println!("{:<10} {:>8} {:>9} {:>8} {:>9}", "parameter", "truth", "mean", "sd", "bias");
    for p in &mc.parameters {
        println!("{:<10} {:>8.3} {:>9.4} {:>8.4} {:>+9.4}", p.name, p.truth, p.mean, p.sd, p.bias);
    }
    println!("classification error: mean {:.4}, sd {:.4}", mc.error_mean, mc.error_sd);

    // The same numbers as machine-readable reports.
    let raw = mc_raw_report(&mc, &cfg);
    let summary = mc_summary_report(&mc, &cfg);
    println!("\nraw table has {} rows and columns {:?}", raw.rows.len(), raw.columns);
    print!("\n{}", summary.render());
    Ok(())
}
