//! Domain types and likelihood mathematics for Weibull-intensity mixtures.
//!
//! A subject in class `k` follows a counting process with intensity
//!
//! ```text
//! λ_k(t | x) = γ1_k · γ2_k · t^(γ2_k − 1) · exp(x·β_k)
//! ```
//!
//! in calendar time, observed on `(0, τ]`. Its cumulative intensity is
//! `Λ_k(τ | x) = γ1_k · τ^γ2_k · exp(x·β_k)` and the class log-density of an
//! observed path is `Σ_j log λ_k(t_j) − Λ_k(τ)`.
//!
//! All likelihood work is in log space.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on `Σ π_k = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;
/// Tolerance on each posterior row summing to one.
pub const POSTERIOR_ROW_TOL: f64 = 1e-10;

/// One individual's observation window, event times and covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    id: String,
    tau: f64,
    event_times: Vec<f64>,
    covariates: Vec<f64>,
}

impl Subject {
    /// Builds a subject, checking `0 < t_1 < … < t_n ≤ τ`.
    ///
    /// Events exactly at `τ` are accepted since censoring is administrative.
    pub fn new(
        id: impl Into<String>,
        tau: f64,
        event_times: Vec<f64>,
        covariates: Vec<f64>,
    ) -> Result<Self> {
        let id = id.into();
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Domain(format!(
                "subject {id}: observation end tau must be positive and finite, got {tau}"
            )));
        }
        let mut prev = 0.0;
        for (j, &t) in event_times.iter().enumerate() {
            if !t.is_finite() || t <= prev {
                return Err(Error::Domain(format!(
                    "subject {id}: event {j} at {t} is not strictly after {prev}"
                )));
            }
            if t > tau {
                return Err(Error::Domain(format!(
                    "subject {id}: event {j} at {t} lies beyond tau = {tau}"
                )));
            }
            prev = t;
        }
        if let Some(bad) = covariates.iter().find(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "subject {id}: non-finite covariate {bad}"
            )));
        }
        Ok(Self {
            id,
            tau,
            event_times,
            covariates,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn event_times(&self) -> &[f64] {
        &self.event_times
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn n_events(&self) -> usize {
        self.event_times.len()
    }

    /// Covariate dimension `d`.
    pub fn dim(&self) -> usize {
        self.covariates.len()
    }
}

/// Per-class Weibull scale/shape and covariate effects.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassParams {
    gamma1: f64,
    gamma2: f64,
    beta: Vec<f64>,
}

impl ClassParams {
    pub fn new(gamma1: f64, gamma2: f64, beta: Vec<f64>) -> Result<Self> {
        if !(gamma1.is_finite() && gamma1 > 0.0) {
            return Err(Error::Domain(format!(
                "gamma1 must be positive and finite, got {gamma1}"
            )));
        }
        if !(gamma2.is_finite() && gamma2 > 0.0) {
            return Err(Error::Domain(format!(
                "gamma2 must be positive and finite, got {gamma2}"
            )));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::Domain("beta entries must be finite".into()));
        }
        Ok(Self {
            gamma1,
            gamma2,
            beta,
        })
    }

    /// Builds parameters from the unconstrained vector `(log γ1, log γ2, β…)`.
    pub fn from_log_vector(theta: &[f64]) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::Input(format!(
                "parameter vector needs at least 2 entries, got {}",
                theta.len()
            )));
        }
        Self::new(theta[0].exp(), theta[1].exp(), theta[2..].to_vec())
    }

    /// The unconstrained vector `(log γ1, log γ2, β…)` used by the optimizer.
    pub fn to_log_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 + self.beta.len());
        v.push(self.gamma1.ln());
        v.push(self.gamma2.ln());
        v.extend_from_slice(&self.beta);
        v
    }

    /// Weibull scale `γ1`.
    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    /// Weibull shape `γ2`.
    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    /// Linear predictor `x·β`.
    pub fn linear_predictor(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.beta.len() {
            return Err(Error::Input(format!(
                "covariate length {} does not match beta length {}",
                x.len(),
                self.beta.len()
            )));
        }
        Ok(dot(x, &self.beta))
    }
}

/// `K` classes with mixing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    weights: Vec<f64>,
    classes: Vec<ClassParams>,
}

impl MixtureModel {
    pub fn new(weights: Vec<f64>, classes: Vec<ClassParams>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Input("a mixture needs at least one class".into()));
        }
        if weights.len() != classes.len() {
            return Err(Error::Input(format!(
                "{} weights for {} classes",
                weights.len(),
                classes.len()
            )));
        }
        if let Some(w) = weights.iter().find(|&&w| !(w > 0.0 && w <= 1.0)) {
            return Err(Error::Input(format!("mixing weight {w} outside (0, 1]")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Input(format!("mixing weights sum to {total}, not 1")));
        }
        let d = classes[0].dim();
        if classes.iter().any(|c| c.dim() != d) {
            return Err(Error::Input(
                "all classes must share the same covariate dimension".into(),
            ));
        }
        Ok(Self { weights, classes })
    }

    /// A single-class model.
    pub fn single(params: ClassParams) -> Self {
        Self {
            weights: vec![1.0],
            classes: vec![params],
        }
    }

    /// Number of classes `K`.
    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn dim(&self) -> usize {
        self.classes[0].dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn classes(&self) -> &[ClassParams] {
        &self.classes
    }

    /// Reorders classes so that new class `j` is old class `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.k())?;
        Ok(Self {
            weights: perm.iter().map(|&p| self.weights[p]).collect(),
            classes: perm.iter().map(|&p| self.classes[p].clone()).collect(),
        })
    }
}

/// `n × K` responsibilities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    n: usize,
    k: usize,
    values: Vec<f64>,
}

impl PosteriorMatrix {
    pub fn new(n: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 || values.len() != n * k {
            return Err(Error::Input(format!(
                "posterior matrix {n}x{k} cannot hold {} values",
                values.len()
            )));
        }
        for (i, row) in values.chunks(k).enumerate() {
            if row.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
                return Err(Error::Input(format!("row {i} has entries outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > POSTERIOR_ROW_TOL {
                return Err(Error::Input(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self { n, k, values })
    }

    /// Builds from row vectors.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Input("ragged posterior rows".into()));
        }
        Self::new(rows.len(), k, rows.concat())
    }

    /// Hard assignments as a 0/1 matrix.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        let mut values = vec![0.0; labels.len() * k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::Input(format!("label {l} out of range for K = {k}")));
            }
            values[i * k + l] = 1.0;
        }
        Self::new(labels.len(), k, values)
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.k + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, k)).collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.k)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_permutation(perm: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    if perm.len() != k {
        return Err(Error::Input(format!("permutation of length {} for K = {k}", perm.len())));
    }
    for &p in perm {
        if p >= k || seen[p] {
            return Err(Error::Input(format!("{perm:?} is not a permutation of 0..{k}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// `log Σ exp(v)` with a max shift. Returns `-inf` for an empty or all-`-inf` slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Intensity `λ(t | x) = γ1 γ2 t^(γ2−1) exp(x·β)`.
pub fn intensity(t: f64, x: &[f64], params: &ClassParams) -> Result<f64> {
    Ok(log_intensity(t, x, params)?.exp())
}

/// `log λ(t | x)`; errors for `t <= 0`, where the intensity is zero or singular.
pub fn log_intensity(t: f64, x: &[f64], params: &ClassParams) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "intensity is defined for t > 0 only, got t = {t}"
        )));
    }
    let eta = params.linear_predictor(x)?;
    Ok(params.gamma1.ln() + params.gamma2.ln() + (params.gamma2 - 1.0) * t.ln() + eta)
}

/// Closed-form `Λ(τ | x) = γ1 τ^γ2 exp(x·β)`.
pub fn cumulative_intensity(tau: f64, x: &[f64], params: &ClassParams) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!(
            "cumulative intensity is defined for tau > 0 only, got {tau}"
        )));
    }
    let eta = params.linear_predictor(x)?;
    Ok((params.gamma1.ln() + params.gamma2 * tau.ln() + eta).exp())
}

/// `Σ_j log λ(t_j) − Λ(τ)` for one subject under one class.
pub fn class_log_density(subject: &Subject, params: &ClassParams) -> Result<f64> {
    let x = subject.covariates();
    let mut total = 0.0;
    for &t in subject.event_times() {
        total += log_intensity(t, x, params)?;
    }
    Ok(total - cumulative_intensity(subject.tau(), x, params)?)
}

/// Per-class terms `log π_k + ℓ_k(subject)`.
pub fn weighted_class_log_densities(subject: &Subject, model: &MixtureModel) -> Result<Vec<f64>> {
    model
        .weights()
        .iter()
        .zip(model.classes())
        .map(|(w, c)| Ok(w.ln() + class_log_density(subject, c)?))
        .collect()
}

/// `log Σ_k π_k exp(ℓ_k)`, computed by log-sum-exp.
pub fn mixture_log_density(subject: &Subject, model: &MixtureModel) -> Result<f64> {
    let terms = weighted_class_log_densities(subject, model)?;
    let value = log_sum_exp(&terms);
    if !value.is_finite() {
        return Err(Error::Numerical(format!(
            "mixture density of subject {} is not finite",
            subject.id()
        )));
    }
    Ok(value)
}

/// Sum of mixture log-densities over a dataset.
pub fn total_log_likelihood(data: &[Subject], model: &MixtureModel) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Input("dataset is empty".into()));
    }
    check_dimensions(data, model.dim())?;
    data.iter().map(|s| mixture_log_density(s, model)).sum()
}

/// Errors unless every subject has covariate dimension `d`.
pub fn check_dimensions(data: &[Subject], d: usize) -> Result<()> {
    match data.iter().find(|s| s.dim() != d) {
        Some(s) => Err(Error::Input(format!(
            "subject {} has {} covariates, expected {d}",
            s.id(),
            s.dim()
        ))),
        None => Ok(()),
    }
}

/// Sufficient statistics of one subject for the class log-density.
///
/// `ℓ(θ) = n(a + b) + (e^b − 1) S + n η − exp(a + e^b log τ + η)` with
/// `a = log γ1`, `b = log γ2`, `S = Σ log t_j`, `η = x·β`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectStats {
    pub n_events: f64,
    pub sum_log_times: f64,
    pub log_tau: f64,
    pub covariates: Vec<f64>,
}

impl SubjectStats {
    pub fn from_subject(s: &Subject) -> Self {
        Self {
            n_events: s.n_events() as f64,
            sum_log_times: s.event_times().iter().map(|t| t.ln()).sum(),
            log_tau: s.tau().ln(),
            covariates: s.covariates().to_vec(),
        }
    }

    /// Class log-density at the unconstrained point `(log γ1, log γ2, β…)`.
    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let (a, b) = (theta[0], theta[1]);
        let eta = dot(&self.covariates, &theta[2..]);
        let shape = b.exp();
        let cum = (a + shape * self.log_tau + eta).exp();
        self.n_events * (a + b + eta) + (shape - 1.0) * self.sum_log_times - cum
    }

    /// Value, gradient and Hessian of the class log-density in `(log γ1, log γ2, β)`.
    pub fn log_density_derivatives(&self, theta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let p = theta.len();
        let mut grad = DVector::zeros(p);
        let mut hess = DMatrix::zeros(p, p);
        let value = self.accumulate_derivatives(theta, 1.0, &mut grad, &mut hess);
        for r in 0..p {
            for c in 0..r {
                hess[(r, c)] = hess[(c, r)];
            }
        }
        (value, grad, hess)
    }

    /// Adds `w` times the gradient to `grad` and `w` times the upper triangle
    /// of the Hessian to `hess`; returns `w` times the value.
    pub fn accumulate_derivatives(
        &self,
        theta: &[f64],
        w: f64,
        grad: &mut DVector<f64>,
        hess: &mut DMatrix<f64>,
    ) -> f64 {
        let (a, b) = (theta[0], theta[1]);
        let x = &self.covariates;
        let eta = dot(x, &theta[2..]);
        let shape = b.exp();
        let cum = (a + shape * self.log_tau + eta).exp();
        let n = self.n_events;
        let value = n * (a + b + eta) + (shape - 1.0) * self.sum_log_times - cum;

        // dΛ/db = Λ · e^b log τ
        let u = shape * self.log_tau;
        let wc = w * cum;
        grad[0] += w * (n - cum);
        grad[1] += w * (n + shape * self.sum_log_times - cum * u);
        hess[(0, 0)] -= wc;
        hess[(0, 1)] -= wc * u;
        hess[(1, 1)] += w * shape * self.sum_log_times - wc * u * (u + 1.0);
        for j in 0..x.len() {
            grad[2 + j] += w * (n - cum) * x[j];
            hess[(0, 2 + j)] -= wc * x[j];
            hess[(1, 2 + j)] -= wc * u * x[j];
            for l in j..x.len() {
                hess[(2 + j, 2 + l)] -= wc * x[j] * x[l];
            }
        }
        w * value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn well_separated_class1() -> ClassParams {
        ClassParams::new(3.0, 2.0, vec![0.4, -0.8]).unwrap()
    }

    #[test]
    fn intensity_examples() {
        let unit = ClassParams::new(1.0, 1.0, vec![0.0, 0.0]).unwrap();
        assert_relative_eq!(intensity(0.7, &[3.0, -2.0], &unit).unwrap(), 1.0, epsilon = 1e-15);

        let table1 = ClassParams::new(0.52, 0.85, vec![-0.47, 0.28]).unwrap();
        assert_relative_eq!(intensity(1.0, &[0.0, 0.0], &table1).unwrap(), 0.442, epsilon = 1e-12);

        let v = intensity(0.5, &[1.0, 0.0], &well_separated_class1()).unwrap();
        assert_relative_eq!(v, 4.475474092923811, max_relative = 1e-12);
    }

    #[test]
    fn intensity_rejects_bad_inputs() {
        let p = well_separated_class1();
        assert!(matches!(intensity(0.0, &[0.0, 0.0], &p), Err(Error::Domain(_))));
        assert!(matches!(intensity(-1.0, &[0.0, 0.0], &p), Err(Error::Domain(_))));
        assert!(matches!(intensity(1.0, &[0.0], &p), Err(Error::Input(_))));
        let sub_unit_shape = ClassParams::new(1.0, 0.5, vec![]).unwrap();
        assert!(intensity(0.0, &[], &sub_unit_shape).is_err());
    }

    #[test]
    fn cumulative_intensity_examples() {
        let unit = ClassParams::new(1.0, 1.0, vec![]).unwrap();
        assert_relative_eq!(cumulative_intensity(2.0, &[], &unit).unwrap(), 2.0, epsilon = 1e-15);
        let v = cumulative_intensity(1.99, &[0.0, 0.0], &well_separated_class1()).unwrap();
        assert_relative_eq!(v, 11.8803, max_relative = 1e-12);
        assert!(cumulative_intensity(0.0, &[0.0, 0.0], &well_separated_class1()).is_err());
    }

    #[test]
    fn class_log_density_examples() {
        let unit = ClassParams::new(1.0, 1.0, vec![]).unwrap();
        let empty = Subject::new("a", 1.0, vec![], vec![]).unwrap();
        assert_relative_eq!(class_log_density(&empty, &unit).unwrap(), -1.0, epsilon = 1e-15);
        let one = Subject::new("b", 1.0, vec![0.5], vec![]).unwrap();
        assert_relative_eq!(class_log_density(&one, &unit).unwrap(), -1.0, epsilon = 1e-15);

        // log(6·0.3) + log(6·0.8) − 3·1.99², evaluated independently.
        let s = Subject::new("c", 1.99, vec![0.3, 0.8], vec![1.0, 0.5]).unwrap();
        let v = class_log_density(&s, &well_separated_class1()).unwrap();
        assert_relative_eq!(v, -9.723897417184036, max_relative = 1e-12);
    }

    #[test]
    fn stats_path_matches_direct_formula() {
        let s = Subject::new("c", 1.99, vec![0.3, 0.8, 1.7], vec![1.0, 0.5]).unwrap();
        let p = ClassParams::new(0.7, 1.3, vec![0.2, -0.6]).unwrap();
        let stats = SubjectStats::from_subject(&s);
        let direct = class_log_density(&s, &p).unwrap();
        assert_relative_eq!(stats.log_density(&p.to_log_vector()), direct, max_relative = 1e-13);
        let (v, _, _) = stats.log_density_derivatives(&p.to_log_vector());
        assert_relative_eq!(v, direct, max_relative = 1e-13);
    }

    #[test]
    fn mixture_degenerate_cases() {
        let s = Subject::new("c", 1.99, vec![0.3, 0.8], vec![1.0, 0.5]).unwrap();
        let p = well_separated_class1();
        let single = MixtureModel::single(p.clone());
        assert_eq!(
            mixture_log_density(&s, &single).unwrap(),
            class_log_density(&s, &p).unwrap()
        );
        let dup = MixtureModel::new(vec![0.5, 0.5], vec![p.clone(), p.clone()]).unwrap();
        assert_relative_eq!(
            mixture_log_density(&s, &dup).unwrap(),
            class_log_density(&s, &p).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn mixture_matches_naive_summation() {
        let s = Subject::new("c", 1.99, vec![0.3, 0.8, 1.5], vec![1.0, 0.5]).unwrap();
        let c1 = well_separated_class1();
        let c2 = ClassParams::new(1.0, 1.0, vec![0.9, 0.3]).unwrap();
        let model = MixtureModel::new(vec![0.3, 0.7], vec![c1.clone(), c2.clone()]).unwrap();
        let naive = (0.3 * class_log_density(&s, &c1).unwrap().exp()
            + 0.7 * class_log_density(&s, &c2).unwrap().exp())
        .ln();
        assert_relative_eq!(mixture_log_density(&s, &model).unwrap(), naive, max_relative = 1e-12);
    }

    #[test]
    fn total_log_likelihood_is_additive() {
        let s1 = Subject::new("a", 1.99, vec![0.3], vec![1.0, 0.5]).unwrap();
        let s2 = Subject::new("b", 1.99, vec![], vec![0.0, -1.5]).unwrap();
        let model = MixtureModel::new(
            vec![0.5, 0.5],
            vec![well_separated_class1(), ClassParams::new(1.0, 1.0, vec![0.9, 0.3]).unwrap()],
        )
        .unwrap();
        let one = total_log_likelihood(std::slice::from_ref(&s1), &model).unwrap();
        assert_eq!(one, mixture_log_density(&s1, &model).unwrap());
        let base = total_log_likelihood(&[s1.clone(), s2.clone()], &model).unwrap();
        let twice = total_log_likelihood(&[s1.clone(), s2.clone(), s1, s2], &model).unwrap();
        assert_relative_eq!(twice, 2.0 * base, max_relative = 1e-14);
        assert!(matches!(total_log_likelihood(&[], &model), Err(Error::Input(_))));
    }

    #[test]
    fn subject_invariants() {
        assert!(Subject::new("a", 1.0, vec![0.5, 0.5], vec![]).is_err());
        assert!(Subject::new("a", 1.0, vec![0.0], vec![]).is_err());
        assert!(Subject::new("a", 1.0, vec![1.2], vec![]).is_err());
        assert!(Subject::new("a", 0.0, vec![], vec![]).is_err());
        assert!(Subject::new("a", 1.0, vec![0.2, 1.0], vec![]).is_ok());
    }

    #[test]
    fn mixture_invariants() {
        let p = ClassParams::new(1.0, 1.0, vec![0.0]).unwrap();
        let q = ClassParams::new(1.0, 1.0, vec![0.0, 1.0]).unwrap();
        assert!(MixtureModel::new(vec![0.4, 0.5], vec![p.clone(), p.clone()]).is_err());
        assert!(MixtureModel::new(vec![0.5, 0.5], vec![p.clone(), q]).is_err());
        assert!(MixtureModel::new(vec![1.0, 0.0], vec![p.clone(), p.clone()]).is_err());
        assert!(ClassParams::new(0.0, 1.0, vec![]).is_err());
        assert!(ClassParams::new(1.0, -1.0, vec![]).is_err());
    }

    #[test]
    fn log_sum_exp_edges() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_relative_eq!(log_sum_exp(&[-1000.0, -1000.0]), -1000.0 + 2f64.ln(), max_relative = 1e-15);
    }
}
