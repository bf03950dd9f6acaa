//! Choosing the number of classes by BIC.
//!
//! BIC is written as a penalized log-likelihood to be maximized:
//! `BIC = ℓ − (K(3 + d) − 1)/2 · log n`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::{fit, EmConfig, FitReport};
use crate::model::Subject;
use crate::seeding::{derive_seed, TAG_SELECTION};

/// Free parameters of a `K`-class model with `d` covariates: `K(3 + d) − 1`.
pub fn n_params(k: usize, d: usize) -> usize {
    k * (3 + d) - 1
}

/// Penalized log-likelihood; larger is better.
pub fn bic(loglik: f64, k: usize, d: usize, n: usize) -> f64 {
    loglik - n_params(k, d) as f64 / 2.0 * (n as f64).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionEntry {
    pub k: usize,
    pub n_params: usize,
    /// `None` when every restart for this `K` failed.
    pub fit: Option<FitReport>,
    pub error: Option<String>,
}

impl SelectionEntry {
    pub fn loglik(&self) -> Option<f64> {
        self.fit.as_ref().map(FitReport::loglik)
    }

    pub fn bic(&self, d: usize, n: usize) -> Option<f64> {
        self.loglik().map(|ll| bic(ll, self.k, d, n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub entries: Vec<SelectionEntry>,
    pub chosen_k: usize,
    pub n: usize,
    pub d: usize,
}

impl SelectionReport {
    pub fn chosen(&self) -> &SelectionEntry {
        self.entries
            .iter()
            .find(|e| e.k == self.chosen_k)
            .expect("chosen K is one of the entries")
    }
}

/// Seed used for the `K`-class fit inside a sweep.
pub fn seed_for_k(base: u64, k: usize) -> u64 {
    derive_seed(derive_seed(base, TAG_SELECTION), k as u64)
}

/// Fits every `K` in `k_min..=k_max` and picks the largest BIC.
///
/// A `K` whose restarts all fail is recorded and skipped. Ties favor the smaller `K`.
pub fn select_k(data: &[Subject], k_min: usize, k_max: usize, cfg: &EmConfig) -> Result<SelectionReport> {
    if data.is_empty() {
        return Err(Error::Input("dataset is empty".into()));
    }
    if k_min == 0 || k_min > k_max || k_max > data.len() {
        return Err(Error::Input(format!(
            "K range [{k_min}, {k_max}] must lie within [1, {}]",
            data.len()
        )));
    }
    let n = data.len();
    let d = data[0].dim();
    let entries: Vec<SelectionEntry> = (k_min..=k_max)
        .into_par_iter()
        .map(|k| {
            let cfg_k = EmConfig {
                seed: seed_for_k(cfg.seed, k),
                ..cfg.clone()
            };
            match fit(data, k, &cfg_k) {
                Ok(report) => SelectionEntry {
                    k,
                    n_params: n_params(k, d),
                    fit: Some(report),
                    error: None,
                },
                Err(e) => SelectionEntry {
                    k,
                    n_params: n_params(k, d),
                    fit: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let mut chosen: Option<(usize, f64)> = None;
    for e in &entries {
        if let Some(b) = e.bic(d, n) {
            if chosen.is_none_or(|(_, best)| b > best) {
                chosen = Some((e.k, b));
            }
        }
    }
    let Some((chosen_k, _)) = chosen else {
        return Err(Error::FitFailure(format!(
            "no K in [{k_min}, {k_max}] could be fitted"
        )));
    };
    Ok(SelectionReport {
        entries,
        chosen_k,
        n,
        d,
    })
}
