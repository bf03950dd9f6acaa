//! Synthetic cohorts drawn from a Weibull-intensity mixture.
//!
//! Event times are generated by exact inversion of the cumulative
//! intensity: from the current time `s`, the next event solves
//! `Λ(t) − Λ(s) = E` with `E ~ Exp(1)`. Observation stops at a fixed
//! administrative time `τ` (Type I censoring).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Exp1, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{ClassParams, MixtureModel, Subject};
use crate::seeding::{derive_seed, stream_rng, TAG_COHORT};

/// Administrative censoring time of the built-in scenarios, in years.
pub const BUILTIN_TAU: f64 = 1.99;

/// Generator for one covariate column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovariateSpec {
    Bernoulli { p: f64 },
    Normal { mean: f64, sd: f64 },
}

impl CovariateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CovariateSpec::Bernoulli { p } if !(0.0..=1.0).contains(&p) => {
                Err(Error::Input(format!("bernoulli probability {p} outside [0, 1]")))
            }
            CovariateSpec::Normal { mean, sd } if !(mean.is_finite() && sd.is_finite() && sd >= 0.0) => {
                Err(Error::Input(format!("invalid normal({mean}, {sd})")))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CovariateSpec::Bernoulli { p } => {
                let b = Bernoulli::new(p).expect("validated probability");
                if b.sample(rng) { 1.0 } else { 0.0 }
            }
            CovariateSpec::Normal { mean, sd } => {
                Normal::new(mean, sd).expect("validated normal").sample(rng)
            }
        }
    }
}

impl fmt::Display for CovariateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CovariateSpec::Bernoulli { p } => write!(f, "bernoulli({p})"),
            CovariateSpec::Normal { mean, sd } => write!(f, "normal({mean}, {sd})"),
        }
    }
}

impl FromStr for CovariateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Input(format!("unrecognized covariate generator '{s}'"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim().to_ascii_lowercase();
        let args: Vec<f64> = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let spec = match (name.as_str(), args.as_slice()) {
            ("bernoulli", [p]) => CovariateSpec::Bernoulli { p: *p },
            ("normal", [mean, sd]) => CovariateSpec::Normal { mean: *mean, sd: *sd },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The two simulation designs shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinScenario {
    WellSeparated,
    Mixed,
}

impl BuiltinScenario {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinScenario::WellSeparated => "well_separated",
            BuiltinScenario::Mixed => "mixed",
        }
    }

    /// True class parameters, class 1 then class 2.
    pub fn classes(&self) -> [ClassParams; 2] {
        let (c1, c2) = match self {
            BuiltinScenario::WellSeparated => ((3.0, 2.0, 0.4, -0.8), (1.0, 1.0, 0.9, 0.3)),
            BuiltinScenario::Mixed => ((2.0, 2.0, 0.5, -0.8), (1.5, 1.2, 0.9, 0.3)),
        };
        let mk = |(g1, g2, b1, b2): (f64, f64, f64, f64)| {
            ClassParams::new(g1, g2, vec![b1, b2]).expect("built-in parameters are valid")
        };
        [mk(c1), mk(c2)]
    }
}

impl FromStr for BuiltinScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "well_separated" => Ok(BuiltinScenario::WellSeparated),
            "mixed" => Ok(BuiltinScenario::Mixed),
            other => Err(Error::Input(format!(
                "unknown scenario '{other}' (expected well_separated or mixed)"
            ))),
        }
    }
}

/// A full simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: MixtureModel,
    pub tau: f64,
    pub covariates: Vec<CovariateSpec>,
    pub covariate_names: Vec<String>,
    pub n_subjects: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Input(format!("tau must be positive, got {}", self.tau)));
        }
        if self.covariates.len() != self.model.dim() {
            return Err(Error::Input(format!(
                "{} covariate generators for a model of dimension {}",
                self.covariates.len(),
                self.model.dim()
            )));
        }
        if self.covariate_names.len() != self.covariates.len() {
            return Err(Error::Input("one name per covariate generator is required".into()));
        }
        if self.n_subjects == 0 {
            return Err(Error::Input("a scenario needs at least one subject".into()));
        }
        self.covariates.iter().try_for_each(CovariateSpec::validate)
    }

    /// Same design, different size and seed.
    pub fn resized(&self, n_subjects: usize, seed: u64) -> Self {
        Self {
            n_subjects,
            seed,
            ..self.clone()
        }
    }
}

/// Built-in design by name: `well_separated` or `mixed`.
///
/// Both use `π = (0.5, 0.5)`, `τ = 1.99`, `X1 ~ Bernoulli(0.5)` and `X2 ~ N(0, 1)`.
pub fn builtin_scenario(name: &str, n: usize, seed: u64) -> Result<Scenario> {
    let which: BuiltinScenario = name.parse()?;
    let model = MixtureModel::new(vec![0.5, 0.5], which.classes().to_vec())?;
    let sc = Scenario {
        name: which.name().to_string(),
        model,
        tau: BUILTIN_TAU,
        covariates: vec![
            CovariateSpec::Bernoulli { p: 0.5 },
            CovariateSpec::Normal { mean: 0.0, sd: 1.0 },
        ],
        covariate_names: vec!["x1".into(), "x2".into()],
        n_subjects: n,
        seed,
    };
    sc.validate()?;
    Ok(sc)
}

/// Event times on `(0, τ]` for one subject with covariates `x`.
pub fn simulate_event_times<R: Rng + ?Sized>(
    params: &ClassParams,
    x: &[f64],
    tau: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    let rate = params.gamma1() * params.linear_predictor(x)?.exp();
    let shape = params.gamma2();
    let mut times = Vec::new();
    // Track Λ-scale position s^γ2 to avoid repeated powers.
    let mut scaled = 0.0;
    let mut last = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        scaled += e / rate;
        let t = scaled.powf(1.0 / shape);
        if !(t <= tau) {
            break;
        }
        if t > last {
            times.push(t);
            last = t;
        }
    }
    Ok(times)
}

/// One simulated subject.
pub fn simulate_subject<R: Rng + ?Sized>(
    id: impl Into<String>,
    params: &ClassParams,
    x: Vec<f64>,
    tau: f64,
    rng: &mut R,
) -> Result<Subject> {
    let times = simulate_event_times(params, &x, tau, rng)?;
    Subject::new(id, tau, times, x)
}

/// A simulated cohort with its true (0-based) class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub subjects: Vec<Subject>,
    pub labels: Vec<usize>,
}

/// Draws every subject's class, covariates and events; subject `i` uses its own RNG stream.
pub fn simulate_cohort(sc: &Scenario) -> Result<Cohort> {
    sc.validate()?;
    let base = derive_seed(sc.seed, TAG_COHORT);
    let width = sc.n_subjects.to_string().len();
    let drawn: Vec<Result<(Subject, usize)>> = (0..sc.n_subjects)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(base, i as u64);
            let label = draw_class(sc.model.weights(), &mut rng);
            let x: Vec<f64> = sc.covariates.iter().map(|c| c.sample(&mut rng)).collect();
            let id = format!("s{:0width$}", i + 1);
            let subject = simulate_subject(id, &sc.model.classes()[label], x, sc.tau, &mut rng)?;
            Ok((subject, label))
        })
        .collect();
    let mut subjects = Vec::with_capacity(sc.n_subjects);
    let mut labels = Vec::with_capacity(sc.n_subjects);
    for d in drawn {
        let (s, l) = d?;
        subjects.push(s);
        labels.push(l);
    }
    Ok(Cohort { subjects, labels })
}

fn draw_class<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    weights.len() - 1
}
