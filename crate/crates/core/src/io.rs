//! Dataset, model and scenario file formats.
//!
//! A dataset is two comma-separated files:
//!
//! ```text
//! subjects.csv   id,tau,<cov1>,...,<covd>     one row per subject
//! events.csv     id,time                      one row per event (long format)
//! ```
//!
//! Times are in years. Models and scenarios are line-oriented `key = value`
//! text; `#` starts a comment.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::{ClassParams, MixtureModel, Subject};
use crate::simulation::{CovariateSpec, Scenario};

pub const SUBJECTS_FILE: &str = "subjects.csv";
pub const EVENTS_FILE: &str = "events.csv";
pub const LABELS_FILE: &str = "labels.csv";

/// Subjects sharing one covariate layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub subjects: Vec<Subject>,
    pub covariate_names: Vec<String>,
}

impl Dataset {
    pub fn new(subjects: Vec<Subject>, covariate_names: Vec<String>) -> Result<Self> {
        let d = covariate_names.len();
        crate::model::check_dimensions(&subjects, d)?;
        let mut seen = std::collections::HashSet::new();
        if let Some(s) = subjects.iter().find(|s| !seen.insert(s.id())) {
            return Err(Error::Input(format!("duplicate subject id '{}'", s.id())));
        }
        Ok(Self {
            subjects,
            covariate_names,
        })
    }

    pub fn dim(&self) -> usize {
        self.covariate_names.len()
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn parse_f64(field: &str, path: &Path, line: usize, what: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line,
        message: format!("malformed {what} '{field}'"),
    })
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: e.to_string(),
    }
}

/// Reads and merges a subjects file and an events file.
pub fn read_dataset(subjects_path: &Path, events_path: &Path) -> Result<Dataset> {
    let mut rdr = reader(subjects_path)?;
    let headers = rdr.headers().map_err(|e| csv_error(subjects_path, e))?.clone();
    if headers.len() < 2 || &headers[0] != "id" || &headers[1] != "tau" {
        return Err(Error::Parse {
            path: subjects_path.display().to_string(),
            line: 1,
            message: "header must start with 'id,tau'".into(),
        });
    }
    let covariate_names: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let d = covariate_names.len();

    struct Row {
        id: String,
        tau: f64,
        x: Vec<f64>,
        line: usize,
    }
    let mut rows: Vec<Row> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(subjects_path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != d + 2 {
            return Err(Error::Parse {
                path: subjects_path.display().to_string(),
                line,
                message: format!("expected {} fields, found {}", d + 2, rec.len()),
            });
        }
        let id = rec[0].to_string();
        let tau = parse_f64(&rec[1], subjects_path, line, "tau")?;
        let x = (0..d)
            .map(|j| parse_f64(&rec[j + 2], subjects_path, line, &covariate_names[j]))
            .collect::<Result<Vec<_>>>()?;
        if index.insert(id.clone(), rows.len()).is_some() {
            return Err(Error::Parse {
                path: subjects_path.display().to_string(),
                line,
                message: format!("duplicate subject id '{id}'"),
            });
        }
        rows.push(Row { id, tau, x, line });
    }

    let mut times: Vec<Vec<f64>> = vec![Vec::new(); rows.len()];
    let mut rdr = reader(events_path)?;
    let headers = rdr.headers().map_err(|e| csv_error(events_path, e))?.clone();
    if headers.len() != 2 || &headers[0] != "id" || &headers[1] != "time" {
        return Err(Error::Parse {
            path: events_path.display().to_string(),
            line: 1,
            message: "header must be 'id,time'".into(),
        });
    }
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(events_path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let event_err = |message: String| Error::Parse {
            path: events_path.display().to_string(),
            line,
            message,
        };
        let Some(&i) = index.get(&rec[0]) else {
            return Err(event_err(format!("event for unknown subject '{}'", &rec[0])));
        };
        let t = parse_f64(&rec[1], events_path, line, "time")?;
        if !(t > 0.0) || t > rows[i].tau {
            return Err(event_err(format!(
                "event time {t} outside (0, {}] for subject '{}'",
                rows[i].tau, rows[i].id
            )));
        }
        times[i].push(t);
    }

    let mut subjects = Vec::with_capacity(rows.len());
    for (row, mut t) in rows.into_iter().zip(times) {
        t.sort_by(f64::total_cmp);
        let line = row.line;
        let s = Subject::new(row.id, row.tau, t, row.x).map_err(|e| Error::Parse {
            path: subjects_path.display().to_string(),
            line,
            message: e.to_string(),
        })?;
        subjects.push(s);
    }
    Dataset::new(subjects, covariate_names)
}

/// Reads `subjects.csv` and `events.csv` from a directory.
pub fn read_dataset_dir(dir: &Path) -> Result<Dataset> {
    read_dataset(&dir.join(SUBJECTS_FILE), &dir.join(EVENTS_FILE))
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn write_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}

/// Writes a dataset; numbers round-trip exactly through [`read_dataset`].
pub fn write_dataset(ds: &Dataset, subjects_path: &Path, events_path: &Path) -> Result<()> {
    let mut w = writer(subjects_path)?;
    let mut header = vec!["id".to_string(), "tau".to_string()];
    header.extend(ds.covariate_names.iter().cloned());
    w.write_record(&header).map_err(|e| write_err(subjects_path, e))?;
    for s in &ds.subjects {
        let mut rec = vec![s.id().to_string(), fmt_f64(s.tau())];
        rec.extend(s.covariates().iter().map(|&v| fmt_f64(v)));
        w.write_record(&rec).map_err(|e| write_err(subjects_path, e))?;
    }
    w.flush().map_err(|e| Error::io(subjects_path, e))?;

    let mut w = writer(events_path)?;
    w.write_record(["id", "time"]).map_err(|e| write_err(events_path, e))?;
    for s in &ds.subjects {
        for &t in s.event_times() {
            w.write_record([s.id(), &fmt_f64(t)]).map_err(|e| write_err(events_path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(events_path, e))
}

/// Writes `subjects.csv` and `events.csv` into `dir`, creating it if needed.
pub fn write_dataset_dir(ds: &Dataset, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (s, e) = (dir.join(SUBJECTS_FILE), dir.join(EVENTS_FILE));
    write_dataset(ds, &s, &e)?;
    Ok((s, e))
}

/// Writes true labels (1-based) as `id,label`.
pub fn write_labels(ds: &Dataset, labels: &[usize], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["id", "label"]).map_err(|e| write_err(path, e))?;
    for (s, l) in ds.subjects.iter().zip(labels) {
        w.write_record([s.id(), &(l + 1).to_string()]).map_err(|e| write_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads `id,label` (1-based) into 0-based labels in file order.
pub fn read_labels(path: &Path) -> Result<Vec<(String, usize)>> {
    let mut rdr = reader(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let label: usize = rec[1].parse().ok().filter(|&l| l >= 1).ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line,
            message: format!("malformed label '{}'", &rec[1]),
        })?;
        out.push((rec[0].to_string(), label - 1));
    }
    Ok(out)
}

/// Parsed `key = value` lines, keeping the line number of each key.
#[derive(Debug, Default)]
pub struct KeyValues {
    origin: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl KeyValues {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: i + 1,
                    message: format!("expected 'key = value', found '{line}'"),
                });
            };
            let key = k.trim().to_string();
            if entries.insert(key.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: i + 1,
                    message: format!("duplicate key '{key}'"),
                });
            }
        }
        Ok(Self {
            origin: origin.to_string(),
            entries,
        })
    }

    fn err(&self, key: &str, message: String) -> Error {
        Error::Parse {
            path: self.origin.clone(),
            line: self.entries.get(key).map_or(0, |(l, _)| *l),
            message,
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| self.err(key, format!("missing key '{key}'")))
    }

    pub fn number<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.require(key)?;
        v.parse().map_err(|_| self.err(key, format!("malformed value '{v}' for '{key}'")))
    }

    pub fn numbers(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.require(key)?;
        if v.is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| self.err(key, format!("malformed number '{}' in '{key}'", p.trim())))
            })
            .collect()
    }

    pub fn list(&self, key: &str) -> Vec<String> {
        self.get(key)
            .filter(|v| !v.is_empty())
            .map(|v| v.split(',').map(|s| s.trim().to_string()).collect())
            .unwrap_or_default()
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(", ")
}

fn model_lines(model: &MixtureModel, out: &mut String) {
    out.push_str(&format!("K = {}\n", model.k()));
    out.push_str(&format!("d = {}\n", model.dim()));
    out.push_str(&format!("pi = {}\n", join(model.weights())));
    for (k, c) in model.classes().iter().enumerate() {
        let k = k + 1;
        out.push_str(&format!("class{k}.gamma1 = {}\n", fmt_f64(c.gamma1())));
        out.push_str(&format!("class{k}.gamma2 = {}\n", fmt_f64(c.gamma2())));
        out.push_str(&format!("class{k}.beta = {}\n", join(c.beta())));
    }
}

fn model_from(kv: &KeyValues) -> Result<MixtureModel> {
    let k: usize = kv.number("K")?;
    let d: usize = kv.number("d")?;
    let weights = kv.numbers("pi")?;
    let mut classes = Vec::with_capacity(k);
    for c in 1..=k {
        let beta = kv.numbers(&format!("class{c}.beta"))?;
        if beta.len() != d {
            return Err(kv.err(
                &format!("class{c}.beta"),
                format!("class {c} has {} betas, expected d = {d}", beta.len()),
            ));
        }
        let params = ClassParams::new(
            kv.number(&format!("class{c}.gamma1"))?,
            kv.number(&format!("class{c}.gamma2"))?,
            beta,
        )
        .map_err(|e| kv.err(&format!("class{c}.gamma1"), e.to_string()))?;
        classes.push(params);
    }
    MixtureModel::new(weights, classes).map_err(|e| kv.err("pi", e.to_string()))
}

/// Renders a model as `key = value` text.
pub fn format_model(model: &MixtureModel, covariate_names: &[String]) -> String {
    let mut out = String::from("# recurmix mixture model\n");
    if !covariate_names.is_empty() {
        out.push_str(&format!("covariates = {}\n", covariate_names.join(", ")));
    }
    model_lines(model, &mut out);
    out
}

pub fn parse_model(text: &str, origin: &str) -> Result<MixtureModel> {
    model_from(&KeyValues::parse(text, origin)?)
}

pub fn read_model(path: &Path) -> Result<MixtureModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, &path.display().to_string())
}

pub fn write_model(model: &MixtureModel, covariate_names: &[String], path: &Path) -> Result<()> {
    fs::write(path, format_model(model, covariate_names)).map_err(|e| Error::io(path, e))
}

/// Renders a scenario; covariate generators are separated by `;`.
pub fn format_scenario(sc: &Scenario) -> String {
    let mut out = String::from("# recurmix simulation scenario\n");
    out.push_str(&format!("name = {}\n", sc.name));
    out.push_str(&format!("n = {}\n", sc.n_subjects));
    out.push_str(&format!("seed = {}\n", sc.seed));
    out.push_str(&format!("tau = {}\n", fmt_f64(sc.tau)));
    let gens: Vec<String> = sc.covariates.iter().map(ToString::to_string).collect();
    out.push_str(&format!("generators = {}\n", gens.join("; ")));
    out.push_str(&format!("covariates = {}\n", sc.covariate_names.join(", ")));
    model_lines(&sc.model, &mut out);
    out
}

pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario> {
    let kv = KeyValues::parse(text, origin)?;
    let covariates: Vec<CovariateSpec> = kv
        .get("generators")
        .filter(|g| !g.is_empty())
        .map(|g| g.split(';').map(str::parse).collect::<Result<Vec<_>>>())
        .transpose()
        .map_err(|e| kv.err("generators", e.to_string()))?
        .unwrap_or_default();
    let mut names = kv.list("covariates");
    if names.is_empty() {
        names = (1..=covariates.len()).map(|j| format!("x{j}")).collect();
    }
    let sc = Scenario {
        name: kv.get("name").unwrap_or("custom").to_string(),
        model: model_from(&kv)?,
        tau: kv.number("tau")?,
        covariates,
        covariate_names: names,
        n_subjects: kv.number("n")?,
        seed: kv.get("seed").map_or(Ok(0), |_| kv.number("seed"))?,
    };
    sc.validate().map_err(|e| kv.err("generators", e.to_string()))?;
    Ok(sc)
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, &path.display().to_string())
}
