//! Defines a three-class design in the scenario file format and simulates it.
//!
//! The same text saved to a file works with `recurmix simulate --scenario FILE`.

use recurmix::io::{format_scenario, parse_scenario};
use recurmix::simulate_cohort;

const SCENARIO: &str = "\
name = three_rates
n = 600
seed = 5
tau = 3
generators = bernoulli(0.4); normal(0, 1)
covariates = treated, severity
K = 3
d = 2
pi = 0.5, 0.3, 0.2
class1.gamma1 = 0.4
class1.gamma2 = 1
class1.beta = -0.5, 0.2
class2.gamma1 = 1.5
class2.gamma2 = 1.4
class2.beta = -0.3, 0.4
class3.gamma1 = 4
class3.gamma2 = 0.7
class3.beta = 0, 0.6
";

fn main() -> recurmix::Result<()> {
    let scenario = parse_scenario(SCENARIO, "inline scenario")?;
    let cohort = simulate_cohort(&scenario)?;

    for k in 0..scenario.model.k() {
        let (count, events) = cohort
            .subjects
            .iter()
            .zip(&cohort.labels)
            .filter(|(_, &l)| l == k)
            .fold((0usize, 0usize), |(c, e), (s, _)| (c + 1, e + s.n_events()));
        println!("class {}: {count} subjects, {events} events", k + 1);
    }

    // Round-trips through the text format.
    let text = format_scenario(&scenario);
    assert_eq!(parse_scenario(&text, "formatted")?, scenario);
    print!("\n{text}");
    Ok(())
}
