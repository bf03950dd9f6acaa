//! Model-based clustering of recurrent-event processes.
//!
//! Each subject's events form a counting process whose intensity, within
//! latent class `k`, is Weibull-shaped in calendar time and modulated by
//! covariates: `λ_k(t | x) = γ1_k γ2_k t^(γ2_k − 1) exp(x·β_k)`. Subjects are
//! right-censored at a fixed time `τ`. The crate simulates such cohorts, fits
//! the `K`-class mixture by EM with a Newton-Raphson M-step, chooses `K` by
//! BIC, and runs Monte Carlo studies of the estimator.
//!
//! ```no_run
//! use recurmix::{builtin_scenario, fit, simulate_cohort, EmConfig};
//!
//! let scenario = builtin_scenario("well_separated", 500, 7)?;
//! let cohort = simulate_cohort(&scenario)?;
//! let report = fit(&cohort.subjects, 2, &EmConfig::with_seed(7))?;
//! println!("log-likelihood {}", report.loglik());
//! # Ok::<(), recurmix::Error>(())
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod io;
pub mod model;
pub mod report;
pub mod seeding;
pub mod selection;
pub mod simulation;

pub use error::{Error, Result};
pub use estimation::{
    classify, e_step, fit, m_step_class, run_em, update_weights, EmConfig, EmRun, FitReport,
};
pub use evaluation::{align_labels, classification_error, run_mc, McReport};
pub use io::{read_dataset, read_dataset_dir, write_dataset, write_dataset_dir, Dataset};
pub use model::{
    class_log_density, cumulative_intensity, intensity, mixture_log_density, total_log_likelihood,
    ClassParams, MixtureModel, PosteriorMatrix, Subject,
};
pub use selection::{bic, n_params, select_k, SelectionReport};
pub use simulation::{builtin_scenario, simulate_cohort, simulate_subject, Cohort, Scenario};
