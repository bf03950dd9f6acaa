//! Monte Carlo harness: repeated simulate → fit, label alignment,
//! estimate summaries and classification error.
//!
//! Two distinct matchings are used. Parameter summaries align fitted classes
//! to the truth by distance in `(log γ1, log γ2, β)`, so bias stays defined
//! even when classification is poor. Classification error independently takes
//! the best label permutation of the confusion counts.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{classify, fit, EmConfig};
use crate::model::{ClassParams, MixtureModel};
use crate::seeding::{derive_seed, TAG_REPLICATION};
use crate::simulation::{simulate_cohort, Scenario};

/// Brute-force permutation search is used up to this many classes.
pub const MAX_PERMUTATION_K: usize = 8;

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                extend(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 || k > MAX_PERMUTATION_K {
        return Err(Error::Input(format!(
            "label alignment supports 1 ≤ K ≤ {MAX_PERMUTATION_K}, got {k}"
        )));
    }
    Ok(())
}

fn squared_distance(a: &ClassParams, b: &ClassParams) -> f64 {
    a.to_log_vector()
        .iter()
        .zip(b.to_log_vector())
        .map(|(x, y)| (x - y).powi(2))
        .sum()
}

/// Permutation `perm` with fitted class `perm[j]` matched to true class `j`.
///
/// `fitted.permuted(&perm)` is then aligned to `truth`. Ties keep the first
/// permutation in lexicographic order, so identical inputs give the identity.
pub fn align_labels(fitted: &MixtureModel, truth: &MixtureModel) -> Result<Vec<usize>> {
    if fitted.k() != truth.k() || fitted.dim() != truth.dim() {
        return Err(Error::Input(format!(
            "cannot align a K={} d={} fit with a K={} d={} truth",
            fitted.k(),
            fitted.dim(),
            truth.k(),
            truth.dim()
        )));
    }
    let k = truth.k();
    check_k(k)?;
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            (0..k)
                .map(|i| squared_distance(&fitted.classes()[i], &truth.classes()[j]))
                .collect()
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in permutations(k) {
        let total: f64 = perm.iter().enumerate().map(|(j, &i)| cost[j][i]).sum();
        if best.as_ref().is_none_or(|(b, _)| total < *b) {
            best = Some((total, perm));
        }
    }
    Ok(best.expect("at least one permutation").1)
}

/// Smallest misclassification fraction over all relabelings of `pred`.
pub fn classification_error(pred: &[usize], truth: &[usize], k: usize) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Input(format!(
            "{} predicted labels vs {} true labels",
            pred.len(),
            truth.len()
        )));
    }
    check_k(k)?;
    if pred.is_empty() {
        return Ok(0.0);
    }
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(Error::Input(format!("label out of range for K = {k}")));
        }
        confusion[p][t] += 1;
    }
    let best_hits = permutations(k)
        .iter()
        .map(|perm| (0..k).map(|p| confusion[p][perm[p]]).sum::<usize>())
        .max()
        .unwrap_or(0);
    Ok(1.0 - best_hits as f64 / pred.len() as f64)
}

/// Column names of the structural parameters, class-major:
/// `gamma1_k, gamma2_k, beta1_k … betad_k`.
pub fn parameter_names(k: usize, d: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(k * (2 + d));
    for c in 1..=k {
        names.push(format!("gamma1_{c}"));
        names.push(format!("gamma2_{c}"));
        for j in 1..=d {
            names.push(format!("beta{j}_{c}"));
        }
    }
    names
}

/// Structural parameters in the order of [`parameter_names`].
pub fn parameter_vector(model: &MixtureModel) -> Vec<f64> {
    model
        .classes()
        .iter()
        .flat_map(|c| {
            let mut v = vec![c.gamma1(), c.gamma2()];
            v.extend_from_slice(c.beta());
            v
        })
        .collect()
}

/// One Monte Carlo replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub index: usize,
    pub seed: u64,
    pub outcome: std::result::Result<ReplicationFit, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationFit {
    /// Aligned structural estimates, ordered as [`parameter_names`].
    pub estimates: Vec<f64>,
    /// Aligned mixing weights.
    pub weights: Vec<f64>,
    pub classification_error: f64,
    pub loglik: f64,
    pub n_iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSummary {
    pub name: String,
    pub truth: f64,
    pub mean: f64,
    pub sd: f64,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub scenario: String,
    pub k: usize,
    pub n_subjects: usize,
    pub reps: usize,
    pub seed: u64,
    pub replications: Vec<Replication>,
    pub parameters: Vec<ParameterSummary>,
    pub error_mean: f64,
    pub error_sd: f64,
    pub n_failed: usize,
}

impl McReport {
    pub fn successful(&self) -> impl Iterator<Item = &ReplicationFit> {
        self.replications.iter().filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterSummary> {
        self.parameters.iter().find(|p| p.name == name)
    }
}

/// Mean and sample standard deviation (`n − 1` denominator; 0 for fewer than 2 values).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Per-parameter summaries from per-replication estimate rows.
pub fn summarize(names: &[String], truth: &[f64], rows: &[Vec<f64>]) -> Vec<ParameterSummary> {
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            let (mean, sd) = mean_sd(&column);
            ParameterSummary {
                name: name.clone(),
                truth: truth[j],
                mean,
                sd,
                bias: mean - truth[j],
            }
        })
        .collect()
}

/// Seed of replication `r` for a base seed.
pub fn replication_seed(base: u64, r: usize) -> u64 {
    derive_seed(derive_seed(base, TAG_REPLICATION), r as u64)
}

/// Runs `reps` independent replications of simulate → fit with `K = scenario K`.
///
/// Replication `r` simulates with seed [`replication_seed`]`(sc.seed, r)` and fits
/// with a seed derived from it; `cfg.seed` is not used. Failed fits are counted
/// and excluded from the summaries.
pub fn run_mc(sc: &Scenario, reps: usize, cfg: &EmConfig) -> Result<McReport> {
    if reps == 0 {
        return Err(Error::Input("at least one replication is required".into()));
    }
    sc.validate()?;
    cfg.validate()?;
    let truth = &sc.model;
    let k = truth.k();
    check_k(k)?;

    let replications: Vec<Replication> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let seed = replication_seed(sc.seed, r);
            let outcome = replicate(sc, seed, cfg).map_err(|e| e.to_string());
            Replication {
                index: r,
                seed,
                outcome,
            }
        })
        .collect();

    let names = parameter_names(k, truth.dim());
    let truth_vec = parameter_vector(truth);
    let rows: Vec<Vec<f64>> = replications
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .map(|f| f.estimates.clone())
        .collect();
    let errors: Vec<f64> = replications
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .map(|f| f.classification_error)
        .collect();
    let (error_mean, error_sd) = mean_sd(&errors);
    let n_failed = replications.iter().filter(|r| r.outcome.is_err()).count();

    Ok(McReport {
        scenario: sc.name.clone(),
        k,
        n_subjects: sc.n_subjects,
        reps,
        seed: sc.seed,
        parameters: summarize(&names, &truth_vec, &rows),
        replications,
        error_mean,
        error_sd,
        n_failed,
    })
}

fn replicate(sc: &Scenario, seed: u64, cfg: &EmConfig) -> Result<ReplicationFit> {
    let cohort = simulate_cohort(&sc.resized(sc.n_subjects, seed))?;
    let fit_cfg = EmConfig {
        seed: derive_seed(seed, 1),
        ..cfg.clone()
    };
    let report = fit(&cohort.subjects, sc.model.k(), &fit_cfg)?;
    let perm = align_labels(&report.model, &sc.model)?;
    let aligned = report.model.permuted(&perm)?;
    let pred = classify(&report.posteriors);
    Ok(ReplicationFit {
        estimates: parameter_vector(&aligned),
        weights: aligned.weights().to_vec(),
        classification_error: classification_error(&pred, &cohort.labels, sc.model.k())?,
        loglik: report.loglik(),
        n_iterations: report.n_iterations,
        converged: report.converged,
    })
}
