//! Simulates a built-in scenario and writes it in the dataset format.
//!
//! ```text
//! cargo run --example simulate_cohort -- [OUT_DIR]
//! ```

use std::path::PathBuf;

use recurmix::io::{write_labels, LABELS_FILE};
use recurmix::{builtin_scenario, simulate_cohort, write_dataset_dir, Dataset};

fn main() -> recurmix::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("recurmix-simulate"), PathBuf::from);
    std::fs::create_dir_all(&out).map_err(|e| recurmix::Error::io(&out, e))?;

    let scenario = builtin_scenario("well_separated", 200, 42)?;
    let cohort = simulate_cohort(&scenario)?;

    for (k, class) in scenario.model.classes().iter().enumerate() {
        let members: Vec<_> = cohort
            .subjects
            .iter()
            .zip(&cohort.labels)
            .filter(|(_, &l)| l == k)
            .map(|(s, _)| s)
            .collect();
        let events: usize = members.iter().map(|s| s.n_events()).sum();
        println!(
            "class {}: gamma1={} gamma2={} beta={:?} -> {} subjects, {:.2} events per subject",
            k + 1,
            class.gamma1(),
            class.gamma2(),
            class.beta(),
            members.len(),
            events as f64 / members.len().max(1) as f64
        );
    }

    let first = &cohort.subjects[0];
    println!("{} (tau {}): x = {:?}, events at {:?}", first.id(), first.tau(), first.covariates(), first.event_times());

    let ds = Dataset::new(cohort.subjects, scenario.covariate_names.clone())?;
    let (subjects, events) = write_dataset_dir(&ds, &out)?;
    write_labels(&ds, &cohort.labels, &out.join(LABELS_FILE))?;
    println!("wrote {} and {}", subjects.display(), events.display());
    Ok(())
}
