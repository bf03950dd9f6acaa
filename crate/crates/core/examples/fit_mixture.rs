//! Fits a two-class mixture by EM and compares it with the generating model.

use recurmix::evaluation::{parameter_names, parameter_vector};
use recurmix::{align_labels, builtin_scenario, classification_error, classify, fit, simulate_cohort, EmConfig};

fn main() -> recurmix::Result<()> {
    let scenario = builtin_scenario("well_separated", 500, 3)?;
    let cohort = simulate_cohort(&scenario)?;

    let cfg = EmConfig::with_seed(11);
    let report = fit(&cohort.subjects, 2, &cfg)?;
    println!(
        "best of {} restarts: restart {}, log-likelihood {:.4}, {} iterations, converged {}",
        report.restarts.len(),
        report.best_restart,
        report.loglik(),
        report.n_iterations,
        report.converged
    );

    // Mixture labels are arbitrary; match fitted classes to the truth first.
    let perm = align_labels(&report.model, &scenario.model)?;
    let aligned = report.model.permuted(&perm)?;
    let names = parameter_names(2, scenario.model.dim());
    println!("{:<10} {:>8} {:>10}", "parameter", "truth", "estimate");
    for ((name, truth), est) in names.iter().zip(parameter_vector(&scenario.model)).zip(parameter_vector(&aligned)) {
        println!("{name:<10} {truth:>8.3} {est:>10.4}");
    }
    println!("weights: {:?}", aligned.weights());

    let labels = classify(&report.posteriors);
    let err = classification_error(&labels, &cohort.labels, 2)?;
    println!("misclassification after best relabeling: {:.3}", err);

    let r = report.posteriors.row(0);
    println!("posterior of {}: {:?}", cohort.subjects[0].id(), r);
    Ok(())
}
