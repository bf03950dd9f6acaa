//! Maximum-likelihood fitting of Weibull-intensity mixtures by EM.
//!
//! Each EM iteration computes responsibilities in log space, updates the
//! mixing weights in closed form (column means of the responsibilities), then
//! maximizes each class's weighted log-likelihood with a safeguarded
//! Newton-Raphson in `(log γ1, log γ2, β)`. Restarts begin from random
//! partitions of the subjects and the best final log-likelihood wins.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    check_dimensions, log_sum_exp, ClassParams, MixtureModel, PosteriorMatrix, Subject,
    SubjectStats,
};
use crate::seeding::{derive_seed, stream_rng, TAG_RESTART};

/// Allowed per-iteration log-likelihood decrease before EM is considered non-monotone.
pub const MONOTONICITY_SLACK: f64 = 1e-8;

const MAX_HALVINGS: usize = 30;
/// Relative size below which a predicted objective gain is treated as rounding noise.
const ROUNDOFF: f64 = 1e-12;
/// Optimizer coordinates beyond this magnitude are treated as a boundary solution.
const PARAM_BOUND: f64 = 30.0;

/// EM and Newton controls.
#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub max_iterations: usize,
    /// Stop once the log-likelihood increase falls below this (absolute).
    pub tol: f64,
    pub n_restarts: usize,
    pub newton_max_steps: usize,
    /// Newton stops when the gradient norm falls below this.
    pub newton_tol: f64,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tol: 1e-6,
            n_restarts: 10,
            newton_max_steps: 50,
            newton_tol: 1e-8,
            seed: 0,
        }
    }
}

impl EmConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.newton_tol > 0.0) {
            return Err(Error::Input("tolerances must be positive".into()));
        }
        if self.max_iterations == 0 || self.n_restarts == 0 || self.newton_max_steps == 0 {
            return Err(Error::Input("iteration and restart counts must be at least 1".into()));
        }
        Ok(())
    }
}

/// How a single EM run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum RunOutcome {
    Converged,
    MaxIterations,
    /// A component collapsed; the run was abandoned.
    Degenerate {
        component: usize,
        weight: f64,
        expected_count: f64,
    },
    Failed(String),
}

impl RunOutcome {
    pub fn is_usable(&self) -> bool {
        matches!(self, RunOutcome::Converged | RunOutcome::MaxIterations)
    }
}

/// One EM run from a given starting model.
#[derive(Debug, Clone, PartialEq)]
pub struct EmRun {
    pub model: MixtureModel,
    /// Log-likelihood of the current model at the start of each iteration.
    pub loglik_trace: Vec<f64>,
    pub n_iterations: usize,
    pub outcome: RunOutcome,
    pub warnings: Vec<String>,
}

impl EmRun {
    pub fn final_loglik(&self) -> Option<f64> {
        self.loglik_trace.last().copied()
    }

    /// Largest decrease between consecutive trace entries (0 if monotone).
    pub fn max_decrease(&self) -> f64 {
        self.loglik_trace
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

/// Per-restart diagnostics kept in a [`FitReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct RestartSummary {
    pub index: usize,
    pub final_loglik: Option<f64>,
    pub n_iterations: usize,
    pub outcome: RunOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: MixtureModel,
    pub posteriors: PosteriorMatrix,
    pub loglik_trace: Vec<f64>,
    pub converged: bool,
    pub n_iterations: usize,
    pub best_restart: usize,
    pub restarts: Vec<RestartSummary>,
    pub warnings: Vec<String>,
}

impl FitReport {
    pub fn loglik(&self) -> f64 {
        *self.loglik_trace.last().expect("trace is never empty")
    }
}

/// Mixing weights from responsibilities plus any components below `1/(10n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightUpdate {
    pub weights: Vec<f64>,
    pub degenerate: Vec<usize>,
}

/// `π_k = Σ_i ρ_ik / n`.
pub fn update_weights(posteriors: &PosteriorMatrix) -> WeightUpdate {
    let n = posteriors.rows() as f64;
    let k = posteriors.cols();
    let mut sums = vec![0.0; k];
    for row in posteriors.iter_rows() {
        for (s, r) in sums.iter_mut().zip(row) {
            *s += r;
        }
    }
    let weights: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let floor = 1.0 / (10.0 * n);
    let degenerate = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w < floor)
        .map(|(k, _)| k)
        .collect();
    WeightUpdate {
        weights,
        degenerate,
    }
}

/// Hard labels `argmax_k ρ_ik` (0-based); ties go to the lowest index.
pub fn classify(posteriors: &PosteriorMatrix) -> Vec<usize> {
    posteriors
        .iter_rows()
        .map(|row| {
            let mut best = 0;
            for (k, &r) in row.iter().enumerate().skip(1) {
                if r > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Responsibilities `ρ_ik ∝ π_k p(t_i | X_i; θ_k)`, computed in log space.
pub fn e_step(data: &[Subject], model: &MixtureModel) -> Result<PosteriorMatrix> {
    check_dimensions(data, model.dim())?;
    let stats: Vec<SubjectStats> = data.iter().map(SubjectStats::from_subject).collect();
    let ids: Vec<&str> = data.iter().map(Subject::id).collect();
    Ok(e_step_stats(&stats, &ids, model)?.0)
}

/// Responsibilities and the total log-likelihood of `model`.
fn e_step_stats(
    stats: &[SubjectStats],
    ids: &[&str],
    model: &MixtureModel,
) -> Result<(PosteriorMatrix, f64)> {
    let k = model.k();
    let log_weights: Vec<f64> = model.weights().iter().map(|w| w.ln()).collect();
    let thetas: Vec<Vec<f64>> = model.classes().iter().map(ClassParams::to_log_vector).collect();

    let rows: Vec<Result<(Vec<f64>, f64)>> = stats
        .par_iter()
        .zip(ids.par_iter())
        .map(|(s, id)| {
            let terms: Vec<f64> = log_weights
                .iter()
                .zip(&thetas)
                .map(|(lw, th)| lw + s.log_density(th))
                .collect();
            let total = log_sum_exp(&terms);
            if !total.is_finite() {
                return Err(Error::Numerical(format!(
                    "all components underflow for subject {id}"
                )));
            }
            let mut row: Vec<f64> = terms.iter().map(|t| (t - total).exp()).collect();
            // Renormalize so the row sums to one to machine precision.
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|r| *r = (*r / sum).min(1.0));
            Ok((row, total))
        })
        .collect();

    let mut values = Vec::with_capacity(stats.len() * k);
    let mut loglik = 0.0;
    for r in rows {
        let (row, total) = r?;
        values.extend(row);
        loglik += total;
    }
    Ok((PosteriorMatrix::new(stats.len(), k, values)?, loglik))
}

/// Weighted per-class objective `Σ_i w_i ℓ(s_i; θ)` in `(log γ1, log γ2, β)`.
#[derive(Debug, Clone)]
pub struct ClassObjective<'a> {
    stats: &'a [SubjectStats],
    weights: &'a [f64],
}

impl<'a> ClassObjective<'a> {
    pub fn new(stats: &'a [SubjectStats], weights: &'a [f64]) -> Result<Self> {
        if stats.len() != weights.len() {
            return Err(Error::Input(format!(
                "{} subjects but {} weights",
                stats.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::Input("responsibility weights must lie in [0, 1]".into()));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::Input("all responsibility weights are zero".into()));
        }
        Ok(Self { stats, weights })
    }

    fn active(&self) -> impl Iterator<Item = (&SubjectStats, f64)> {
        self.stats
            .iter()
            .zip(self.weights.iter().copied())
            .filter(|(_, w)| *w > 0.0)
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        self.active().map(|(s, w)| w * s.log_density(theta)).sum()
    }

    pub fn derivatives(&self, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let p = theta.len();
        let mut value = 0.0;
        let mut grad = DVector::zeros(p);
        let mut hess = DMatrix::zeros(p, p);
        for (s, w) in self.active() {
            value += s.accumulate_derivatives(theta, w, &mut grad, &mut hess);
        }
        for r in 0..p {
            for c in 0..r {
                hess[(r, c)] = hess[(c, r)];
            }
        }
        (value, grad, hess)
    }

    /// Weighted number of observed events.
    pub fn weighted_events(&self) -> f64 {
        self.active().map(|(s, w)| w * s.n_events).sum()
    }
}

/// Result of one per-class maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFit {
    pub params: ClassParams,
    pub objective: f64,
    pub gradient_norm: f64,
    pub steps: usize,
    /// Gradient norm reached `newton_tol`.
    pub converged: bool,
    /// The optimum sits on the edge of the parameter space (e.g. `γ1 → 0`).
    pub boundary: bool,
}

/// Maximizes `Σ_i ρ_ik ℓ(s_i; θ_k)` starting from `start`.
pub fn m_step_class(
    data: &[Subject],
    weights_col: &[f64],
    start: &ClassParams,
    cfg: &EmConfig,
) -> Result<ClassFit> {
    check_dimensions(data, start.dim())?;
    let stats: Vec<SubjectStats> = data.iter().map(SubjectStats::from_subject).collect();
    let objective = ClassObjective::new(&stats, weights_col)?;
    maximize(&objective, start.to_log_vector(), cfg)
}

/// Safeguarded Newton-Raphson on a [`ClassObjective`].
pub fn maximize(objective: &ClassObjective<'_>, start: Vec<f64>, cfg: &EmConfig) -> Result<ClassFit> {
    let p = start.len();
    let mut theta = DVector::from_vec(start);
    let (mut f, mut g, mut h) = objective.derivatives(theta.as_slice());
    if !f.is_finite() {
        return Err(Error::ParameterOverflow(format!(
            "objective is {f} at the starting point {:?}",
            theta.as_slice()
        )));
    }
    let mut steps = 0;
    let mut boundary = false;

    while steps < cfg.newton_max_steps && g.norm() > cfg.newton_tol {
        let direction = ascent_direction(&h, &g);
        let gain = g.dot(&direction);
        if gain >= 0.0 && gain <= ROUNDOFF * f.abs().max(1.0) {
            // The predicted gain is below the resolution of `f`, so value
            // comparisons carry no information. Take the Newton step and stop.
            let next = &theta + &direction;
            let (nf, ng, _) = objective.derivatives(next.as_slice());
            if nf.is_finite() && ng.norm() <= g.norm() {
                theta = next;
                (f, g) = (nf, ng);
                steps += 1;
            }
            break;
        }
        let accepted = line_search(objective, &theta, &direction, f)
            .or_else(|| {
                let scaled = &g / g.norm().max(1.0);
                line_search(objective, &theta, &scaled, f)
            });
        let Some(next) = accepted else {
            // No step improves the objective at working precision.
            break;
        };
        theta = next;
        steps += 1;
        (f, g, h) = objective.derivatives(theta.as_slice());
        if !f.is_finite() {
            return Err(Error::ParameterOverflow(format!(
                "objective became {f} at {:?}",
                theta.as_slice()
            )));
        }
        if theta.iter().any(|v| v.abs() > PARAM_BOUND) {
            boundary = true;
            break;
        }
    }

    let gradient_norm = g.norm();
    if objective.weighted_events() == 0.0 {
        boundary = true;
    }
    let params = ClassParams::from_log_vector(theta.as_slice())
        .map_err(|e| Error::ParameterOverflow(e.to_string()))?;
    debug_assert_eq!(params.dim() + 2, p);
    Ok(ClassFit {
        params,
        objective: f,
        gradient_norm,
        steps,
        converged: gradient_norm <= cfg.newton_tol,
        boundary,
    })
}

/// Solves `(−H + μI) δ = g`, raising `μ` until `−H + μI` is positive definite.
fn ascent_direction(hess: &DMatrix<f64>, grad: &DVector<f64>) -> DVector<f64> {
    let neg = -hess;
    if let Some(chol) = neg.clone().cholesky() {
        return chol.solve(grad);
    }
    let scale = neg.diagonal().abs().max().max(1.0);
    let mut mu = 1e-8 * scale;
    let p = grad.len();
    for _ in 0..60 {
        let shifted = &neg + DMatrix::identity(p, p) * mu;
        if let Some(chol) = shifted.cholesky() {
            return chol.solve(grad);
        }
        mu *= 10.0;
    }
    grad.clone()
}

/// Step halving until the objective does not decrease.
fn line_search(
    objective: &ClassObjective<'_>,
    theta: &DVector<f64>,
    direction: &DVector<f64>,
    current: f64,
) -> Option<DVector<f64>> {
    if direction.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut t = 1.0;
    for _ in 0..=MAX_HALVINGS {
        let trial = theta + direction * t;
        let value = objective.value(trial.as_slice());
        if value.is_finite() && value >= current && trial != *theta {
            return Some(trial);
        }
        t *= 0.5;
    }
    None
}

/// Degeneracy rule for a restart: weight below `1/(10n)`, or (for `K ≥ 2`)
/// fewer than `d + 3` expected subjects in a class.
fn degenerate_component(update: &WeightUpdate, n: usize, d: usize) -> Option<(usize, f64, f64)> {
    let k = update.weights.len();
    update.weights.iter().enumerate().find_map(|(c, &w)| {
        let expected = w * n as f64;
        let too_small = update.degenerate.contains(&c) || (k > 1 && expected < (d + 3) as f64);
        too_small.then_some((c, w, expected))
    })
}

/// Runs EM from `initial` until convergence, the iteration cap, or degeneracy.
pub fn run_em(data: &[Subject], initial: &MixtureModel, cfg: &EmConfig) -> Result<EmRun> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Input("dataset is empty".into()));
    }
    check_dimensions(data, initial.dim())?;
    let stats: Vec<SubjectStats> = data.iter().map(SubjectStats::from_subject).collect();
    let ids: Vec<&str> = data.iter().map(Subject::id).collect();
    Ok(run_em_stats(&stats, &ids, initial.clone(), cfg))
}

fn run_em_stats(
    stats: &[SubjectStats],
    ids: &[&str],
    initial: MixtureModel,
    cfg: &EmConfig,
) -> EmRun {
    let n = stats.len();
    let d = initial.dim();
    let mut model = initial;
    let mut trace: Vec<f64> = Vec::new();
    let mut warnings = Vec::new();

    for iteration in 0..cfg.max_iterations {
        let (posteriors, loglik) = match e_step_stats(stats, ids, &model) {
            Ok(v) => v,
            Err(e) => return failed(model, trace, iteration, warnings, e),
        };
        if let Some(&prev) = trace.last() {
            if loglik < prev - MONOTONICITY_SLACK {
                warnings.push(format!(
                    "iteration {iteration}: log-likelihood decreased by {:.3e}",
                    prev - loglik
                ));
            }
        }
        trace.push(loglik);
        if trace.len() >= 2 && loglik - trace[trace.len() - 2] < cfg.tol {
            return EmRun {
                model,
                loglik_trace: trace,
                n_iterations: iteration,
                outcome: RunOutcome::Converged,
                warnings,
            };
        }

        let update = update_weights(&posteriors);
        if let Some((component, weight, expected_count)) = degenerate_component(&update, n, d) {
            return EmRun {
                model,
                loglik_trace: trace,
                n_iterations: iteration,
                outcome: RunOutcome::Degenerate {
                    component,
                    weight,
                    expected_count,
                },
                warnings,
            };
        }

        let columns: Vec<Vec<f64>> = (0..model.k()).map(|c| posteriors.column(c)).collect();
        let fits: Vec<Result<ClassFit>> = model
            .classes()
            .par_iter()
            .zip(columns.par_iter())
            .map(|(c, col)| {
                let objective = ClassObjective::new(stats, col)?;
                maximize(&objective, c.to_log_vector(), cfg)
            })
            .collect();
        let mut classes = Vec::with_capacity(model.k());
        for (c, fit) in fits.into_iter().enumerate() {
            match fit {
                Ok(fit) => {
                    if fit.boundary {
                        warnings.push(format!(
                            "iteration {iteration}: class {} reached a parameter boundary",
                            c + 1
                        ));
                    }
                    classes.push(fit.params);
                }
                Err(e) => return failed(model, trace, iteration, warnings, e),
            }
        }
        model = match MixtureModel::new(normalize(update.weights), classes) {
            Ok(m) => m,
            Err(e) => return failed(model, trace, iteration, warnings, e),
        };
    }

    // Iteration cap reached: report the log-likelihood of the final model.
    let n_iterations = cfg.max_iterations;
    match e_step_stats(stats, ids, &model) {
        Ok((_, loglik)) => {
            trace.push(loglik);
            EmRun {
                model,
                loglik_trace: trace,
                n_iterations,
                outcome: RunOutcome::MaxIterations,
                warnings,
            }
        }
        Err(e) => failed(model, trace, n_iterations, warnings, e),
    }
}

fn failed(
    model: MixtureModel,
    trace: Vec<f64>,
    n_iterations: usize,
    warnings: Vec<String>,
    err: Error,
) -> EmRun {
    EmRun {
        model,
        loglik_trace: trace,
        n_iterations,
        outcome: RunOutcome::Failed(err.to_string()),
        warnings,
    }
}

fn normalize(mut w: Vec<f64>) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// Starting point for a class fitted to hard-assigned members.
fn crude_start(stats: &[SubjectStats], weights: &[f64], d: usize) -> Vec<f64> {
    let (events, exposure) = stats
        .iter()
        .zip(weights)
        .fold((0.0, 0.0), |(e, x), (s, w)| (e + w * s.n_events, x + w * s.log_tau.exp()));
    let rate = if events > 0.0 { events / exposure } else { 0.5 / exposure.max(1e-12) };
    let mut theta = vec![0.0; 2 + d];
    theta[0] = rate.ln();
    theta
}

/// Initial model from a uniformly random partition; `π` starts uniform.
pub fn random_partition_start(
    data: &[Subject],
    k: usize,
    seed: u64,
    restart: usize,
    cfg: &EmConfig,
) -> Result<MixtureModel> {
    let stats: Vec<SubjectStats> = data.iter().map(SubjectStats::from_subject).collect();
    let d = data.first().map_or(0, Subject::dim);
    partition_start(&stats, d, k, seed, restart, cfg)
}

fn partition_start(
    stats: &[SubjectStats],
    d: usize,
    k: usize,
    seed: u64,
    restart: usize,
    cfg: &EmConfig,
) -> Result<MixtureModel> {
    let mut rng = stream_rng(derive_seed(seed, TAG_RESTART), restart as u64);
    let labels: Vec<usize> = (0..stats.len()).map(|_| rng.random_range(0..k)).collect();
    let mut classes = Vec::with_capacity(k);
    for c in 0..k {
        let w: Vec<f64> = labels.iter().map(|&l| if l == c { 1.0 } else { 0.0 }).collect();
        let objective = ClassObjective::new(stats, &w)
            .map_err(|_| Error::Input(format!("random partition left class {} empty", c + 1)))?;
        let fit = maximize(&objective, crude_start(stats, &w, d), cfg)?;
        classes.push(fit.params);
    }
    MixtureModel::new(vec![1.0 / k as f64; k], classes)
}

/// Fits a `K`-class mixture with `cfg.n_restarts` random-partition restarts.
pub fn fit(data: &[Subject], k: usize, cfg: &EmConfig) -> Result<FitReport> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::Input("K must be at least 1".into()));
    }
    if data.len() < k {
        return Err(Error::Input(format!("{} subjects cannot support K = {k}", data.len())));
    }
    let d = data[0].dim();
    check_dimensions(data, d)?;
    let stats: Vec<SubjectStats> = data.iter().map(SubjectStats::from_subject).collect();
    let ids: Vec<&str> = data.iter().map(Subject::id).collect();

    // A restart whose initialization fails has no run to report.
    let runs: Vec<std::result::Result<EmRun, String>> = (0..cfg.n_restarts)
        .into_par_iter()
        .map(|r| {
            partition_start(&stats, d, k, cfg.seed, r, cfg)
                .map(|init| run_em_stats(&stats, &ids, init, cfg))
                .map_err(|e| format!("initialization: {e}"))
        })
        .collect();

    let restarts: Vec<RestartSummary> = runs
        .iter()
        .enumerate()
        .map(|(index, run)| match run {
            Ok(run) => RestartSummary {
                index,
                final_loglik: run.final_loglik(),
                n_iterations: run.n_iterations,
                outcome: run.outcome.clone(),
            },
            Err(msg) => RestartSummary {
                index,
                final_loglik: None,
                n_iterations: 0,
                outcome: RunOutcome::Failed(msg.clone()),
            },
        })
        .collect();

    let mut best: Option<(usize, f64)> = None;
    for r in &restarts {
        if !r.outcome.is_usable() {
            continue;
        }
        let ll = r.final_loglik.unwrap_or(f64::NEG_INFINITY);
        if best.is_none_or(|(_, b)| ll > b) {
            best = Some((r.index, ll));
        }
    }
    let Some((best, _)) = best else {
        let detail: Vec<String> = restarts
            .iter()
            .map(|r| format!("restart {}: {:?}", r.index, r.outcome))
            .collect();
        return Err(Error::FitFailure(format!(
            "all {} restarts failed for K = {k}: {}",
            cfg.n_restarts,
            detail.join("; ")
        )));
    };

    let run = runs
        .into_iter()
        .nth(best)
        .and_then(std::result::Result::ok)
        .expect("best restart ran");
    let (posteriors, _) = e_step_stats(&stats, &ids, &run.model)?;
    Ok(FitReport {
        converged: run.outcome == RunOutcome::Converged,
        model: run.model,
        posteriors,
        loglik_trace: run.loglik_trace,
        n_iterations: run.n_iterations,
        best_restart: best,
        restarts,
        warnings: run.warnings,
    })
}
