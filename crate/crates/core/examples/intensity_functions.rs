//! Evaluates the class intensity, cumulative intensity and log-densities.
//!
//! The parameters are of the size reported for an elderly cohort with sex
//! and age as covariates.

use recurmix::{
    class_log_density, cumulative_intensity, intensity, mixture_log_density, ClassParams, MixtureModel, Subject,
};

fn main() -> recurmix::Result<()> {
    let frail = ClassParams::new(0.52, 0.85, vec![-0.47, 0.28])?;
    let robust = ClassParams::new(0.15, 1.1, vec![-0.2, 0.1])?;
    let x = [1.0, 0.5];

    println!("{:>5} {:>12} {:>12}", "t", "lambda(t)", "Lambda(t)");
    for t in [0.1, 0.5, 1.0, 1.5, 1.99] {
        println!("{t:>5} {:>12.5} {:>12.5}", intensity(t, &x, &frail)?, cumulative_intensity(t, &x, &frail)?);
    }

    let s = Subject::new("example", 1.99, vec![0.3, 1.2, 1.7], x.to_vec())?;
    let model = MixtureModel::new(vec![0.4, 0.6], vec![frail.clone(), robust.clone()])?;
    println!("\nlog f(s | frail)  = {:.5}", class_log_density(&s, &frail)?);
    println!("log f(s | robust) = {:.5}", class_log_density(&s, &robust)?);
    println!("log f(s) mixture  = {:.5}", mixture_log_density(&s, &model)?);
    Ok(())
}
