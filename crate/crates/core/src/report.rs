//! Text reports: a `#`-prefixed header block of `key: value` lines followed
//! by a CSV table. A stream may hold several reports separated by a blank line.

use crate::error::{Error, Result};
use crate::estimation::{classify, EmConfig, FitReport};
use crate::evaluation::{McReport, ParameterSummary};
use crate::io::{fmt_f64, Dataset};
use crate::model::PosteriorMatrix;
use crate::selection::{bic, n_params, SelectionReport};

pub const BIC_CONVENTION: &str = "loglik - n_params/2 * ln(n), larger is better";

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            header: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.header.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Column `name` parsed as numbers.
    pub fn numeric_column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .column_index(name)
            .ok_or_else(|| Error::Input(format!("report has no column '{name}'")))?;
        self.rows
            .iter()
            .map(|r| {
                r[j].parse()
                    .map_err(|_| Error::Input(format!("non-numeric '{}' in column {name}", r[j])))
            })
            .collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = Vec::new();
        let mut body = String::new();
        for line in text.lines() {
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta.split_once(':').unwrap_or((meta, ""));
                header.push((k.trim().to_string(), v.trim().to_string()));
            } else if !line.trim().is_empty() {
                body.push_str(line);
                body.push('\n');
            }
        }
        let mut rdr = csv::ReaderBuilder::new().from_reader(body.as_bytes());
        let bad = |e: csv::Error| Error::Input(format!("malformed report table: {e}"));
        let columns = rdr.headers().map_err(bad)?.iter().map(str::to_string).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|r| r.iter().map(str::to_string).collect()).map_err(bad))
            .collect::<Result<_>>()?;
        Ok(Self {
            header,
            columns,
            rows,
        })
    }
}

/// Renders several reports separated by blank lines.
pub fn render_all(reports: &[Report]) -> String {
    reports.iter().map(Report::render).collect::<Vec<_>>().join("\n")
}

/// Splits a multi-report stream on blank lines and parses each part.
pub fn parse_all(text: &str) -> Result<Vec<Report>> {
    text.split("\n\n")
        .filter(|part| !part.trim().is_empty())
        .map(Report::parse)
        .collect()
}

fn config_meta(r: &mut Report, cfg: &EmConfig) {
    r.meta("seed", cfg.seed)
        .meta("max_iterations", cfg.max_iterations)
        .meta("tol", fmt_f64(cfg.tol))
        .meta("n_restarts", cfg.n_restarts)
        .meta("newton_max_steps", cfg.newton_max_steps)
        .meta("newton_tol", fmt_f64(cfg.newton_tol));
}

/// Fitted parameters, one row per class.
pub fn fit_report(fit: &FitReport, ds: &Dataset, cfg: &EmConfig) -> Report {
    let mut cols = vec!["class".to_string(), "pi".into(), "gamma1".into(), "gamma2".into()];
    cols.extend(ds.covariate_names.iter().map(|n| format!("beta_{n}")));
    let mut r = Report {
        columns: cols,
        ..Report::default()
    };
    let (k, d, n) = (fit.model.k(), ds.dim(), ds.len());
    r.meta("report", "fit").meta("K", k).meta("d", d).meta("n", n);
    config_meta(&mut r, cfg);
    r.meta("loglik", fmt_f64(fit.loglik()))
        .meta("n_params", n_params(k, d))
        .meta("bic", fmt_f64(bic(fit.loglik(), k, d, n)))
        .meta("bic_convention", BIC_CONVENTION)
        .meta("converged", fit.converged)
        .meta("n_iterations", fit.n_iterations)
        .meta("best_restart", fit.best_restart);
    for s in &fit.restarts {
        let ll = s.final_loglik.map_or("NA".to_string(), fmt_f64);
        r.meta(
            &format!("restart_{}", s.index),
            format!("{:?} loglik={ll} iterations={}", s.outcome, s.n_iterations),
        );
    }
    for w in &fit.warnings {
        r.meta("warning", w);
    }
    let counts = class_sizes(&fit.posteriors);
    for (c, (w, p)) in fit.model.weights().iter().zip(fit.model.classes()).enumerate() {
        let mut row = vec![(c + 1).to_string(), fmt_f64(*w), fmt_f64(p.gamma1()), fmt_f64(p.gamma2())];
        row.extend(p.beta().iter().map(|&b| fmt_f64(b)));
        r.push(row);
        r.meta(&format!("class_{}_size", c + 1), counts[c]);
    }
    r
}

fn class_sizes(post: &PosteriorMatrix) -> Vec<usize> {
    let mut counts = vec![0; post.cols()];
    for l in classify(post) {
        counts[l] += 1;
    }
    counts
}

/// `id,label,rho_1..rho_K` with 1-based labels.
pub fn posterior_report(ds: &Dataset, post: &PosteriorMatrix) -> Report {
    let mut cols = vec!["id".to_string(), "label".into()];
    cols.extend((1..=post.cols()).map(|k| format!("rho_{k}")));
    let mut r = Report {
        columns: cols,
        ..Report::default()
    };
    r.meta("report", "classify").meta("n", ds.len()).meta("K", post.cols());
    r.meta("label_rule", "argmax posterior, ties to the lowest class");
    for ((s, row), label) in ds.subjects.iter().zip(post.iter_rows()).zip(classify(post)) {
        let mut rec = vec![s.id().to_string(), (label + 1).to_string()];
        rec.extend(row.iter().map(|&v| fmt_f64(v)));
        r.push(rec);
    }
    r
}

pub fn trace_report(fit: &FitReport) -> Report {
    let mut r = Report::new(&["iteration", "loglik"]);
    r.meta("report", "trace");
    for (i, ll) in fit.loglik_trace.iter().enumerate() {
        r.push(vec![i.to_string(), fmt_f64(*ll)]);
    }
    r
}

pub fn selection_report(sel: &SelectionReport, cfg: &EmConfig) -> Report {
    let mut r = Report::new(&["K", "loglik", "n_params", "bic", "status"]);
    r.meta("report", "select").meta("n", sel.n).meta("d", sel.d);
    config_meta(&mut r, cfg);
    r.meta("bic_convention", BIC_CONVENTION).meta("chosen_K", sel.chosen_k);
    for e in &sel.entries {
        let (ll, b, status) = match (&e.fit, &e.error) {
            (Some(f), _) => (
                fmt_f64(f.loglik()),
                fmt_f64(bic(f.loglik(), e.k, sel.d, sel.n)),
                if f.converged { "converged" } else { "max_iterations" }.to_string(),
            ),
            (None, err) => (
                "NA".into(),
                "NA".into(),
                format!("failed: {}", err.as_deref().unwrap_or("unknown")),
            ),
        };
        r.push(vec![e.k.to_string(), ll, e.n_params.to_string(), b, status]);
    }
    r
}

fn mc_meta(r: &mut Report, mc: &McReport, cfg: &EmConfig) {
    r.meta("scenario", &mc.scenario)
        .meta("n", mc.n_subjects)
        .meta("reps", mc.reps)
        .meta("seed", mc.seed)
        .meta("max_iterations", cfg.max_iterations)
        .meta("tol", fmt_f64(cfg.tol))
        .meta("n_restarts", cfg.n_restarts)
        .meta("newton_max_steps", cfg.newton_max_steps)
        .meta("newton_tol", fmt_f64(cfg.newton_tol))
        .meta("alignment", "parameters: min squared distance in (log gamma1, log gamma2, beta)")
        .meta("error_matching", "best label permutation of the confusion counts");
}

/// One row per replication with aligned estimates.
pub fn mc_raw_report(mc: &McReport, cfg: &EmConfig) -> Report {
    let names: Vec<String> = mc.parameters.iter().map(|p| p.name.clone()).collect();
    let k = mc.k;
    let mut cols: Vec<String> = ["rep", "seed", "status", "error", "loglik", "iterations", "converged"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    cols.extend((1..=k).map(|c| format!("pi_{c}")));
    cols.extend(names.iter().cloned());
    let mut r = Report {
        columns: cols,
        ..Report::default()
    };
    r.meta("report", "mc_raw");
    mc_meta(&mut r, mc, cfg);
    for rep in &mc.replications {
        let mut row = vec![rep.index.to_string(), rep.seed.to_string()];
        match &rep.outcome {
            Ok(f) => {
                row.extend([
                    "ok".to_string(),
                    fmt_f64(f.classification_error),
                    fmt_f64(f.loglik),
                    f.n_iterations.to_string(),
                    f.converged.to_string(),
                ]);
                row.extend(f.weights.iter().map(|&w| fmt_f64(w)));
                row.extend(f.estimates.iter().map(|&v| fmt_f64(v)));
            }
            Err(msg) => {
                row.push(format!("failed: {}", msg.replace(['\n', '\r'], " ")));
                row.extend(std::iter::repeat_n("NA".to_string(), 4 + k + names.len()));
            }
        }
        r.push(row);
    }
    r
}

/// Per-parameter mean, SD and bias, plus the classification error summary.
pub fn mc_summary_report(mc: &McReport, cfg: &EmConfig) -> Report {
    let mut r = Report::new(&["parameter", "truth", "mean", "sd", "bias"]);
    r.meta("report", "mc_summary");
    mc_meta(&mut r, mc, cfg);
    r.meta("n_failed", mc.n_failed)
        .meta("error_mean", fmt_f64(mc.error_mean))
        .meta("error_sd", fmt_f64(mc.error_sd));
    for ParameterSummary { name, truth, mean, sd, bias } in &mc.parameters {
        r.push(vec![name.clone(), fmt_f64(*truth), fmt_f64(*mean), fmt_f64(*sd), fmt_f64(*bias)]);
    }
    r
}
