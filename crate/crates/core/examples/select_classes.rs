//! Chooses the number of classes by BIC (larger is better).

use recurmix::{builtin_scenario, select_k, simulate_cohort, EmConfig};

fn main() -> recurmix::Result<()> {
    let scenario = builtin_scenario("well_separated", 400, 8)?;
    let data = simulate_cohort(&scenario)?.subjects;

    let sel = select_k(&data, 1, 4, &EmConfig::with_seed(1))?;
    println!("{:>2} {:>8} {:>12} {:>12}", "K", "n_params", "loglik", "BIC");
    for e in &sel.entries {
        match (e.loglik(), e.bic(sel.d, sel.n)) {
            (Some(ll), Some(b)) => println!("{:>2} {:>8} {:>12.3} {:>12.3}", e.k, e.n_params, ll, b),
            _ => println!("{:>2} {:>8} failed: {}", e.k, e.n_params, e.error.as_deref().unwrap_or("?")),
        }
    }
    println!("chosen K = {}", sel.chosen_k);
    Ok(())
}
