//! Loads a saved model and computes posterior class probabilities for new subjects.

use recurmix::io::parse_model;
use recurmix::{classify, e_step, Subject};

const MODEL: &str = "\
# two-class model, covariates sex and standardized age
covariates = sex, age
K = 2
d = 2
pi = 0.45, 0.55
class1.gamma1 = 0.52
class1.gamma2 = 0.85
class1.beta = -0.47, 0.28
class2.gamma1 = 2.4
class2.gamma2 = 1.3
class2.beta = -0.2, 0.35
";

fn main() -> recurmix::Result<()> {
    let model = parse_model(MODEL, "inline model")?;

    let subjects = vec![
        Subject::new("quiet", 1.99, vec![1.6], vec![1.0, -0.5])?,
        Subject::new("frequent", 1.99, vec![0.2, 0.5, 0.9, 1.1, 1.4, 1.8], vec![0.0, 0.8])?,
        Subject::new("short", 0.75, vec![0.3], vec![0.0, 0.0])?,
    ];

    let post = e_step(&subjects, &model)?;
    let labels = classify(&post);
    for (i, s) in subjects.iter().enumerate() {
        let row = post.row(i);
        println!(
            "{:<9} {} events over {:.2} years: P(class 1) = {:.3}, P(class 2) = {:.3} -> class {}",
            s.id(),
            s.n_events(),
            s.tau(),
            row[0],
            row[1],
            labels[i] + 1
        );
    }
    Ok(())
}
