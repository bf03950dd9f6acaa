//! Command-line front end: `simulate`, `fit`, `select`, `classify` and `mc`.
//!
//! Exit codes: 0 on success, 2 on input or usage errors, 3 when fitting fails.
//! `RECURMIX_THREADS` caps worker threads (0 or unset means automatic).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::estimation::{e_step, fit, EmConfig};
use crate::evaluation::run_mc;
use crate::io::{
    read_dataset_dir, read_model, read_scenario, write_dataset_dir, write_labels, write_model,
    Dataset, LABELS_FILE,
};
use crate::report::{
    fit_report, mc_raw_report, mc_summary_report, posterior_report, render_all, selection_report,
    trace_report, Report,
};
use crate::selection::select_k;
use crate::simulation::{builtin_scenario, simulate_cohort, Scenario};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FIT: i32 = 3;

pub const THREADS_ENV: &str = "RECURMIX_THREADS";

#[derive(Debug, Parser)]
#[command(name = "recurmix", version, about = "Mixtures of Weibull-intensity recurrent-event processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a cohort and write subjects.csv, events.csv and labels.csv.
    Simulate {
        /// `well_separated`, `mixed`, or a path to a scenario file.
        #[arg(long)]
        scenario: String,
        /// Number of subjects (required for built-in scenarios).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a K-class mixture by EM.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "K", visible_alias = "k")]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        em: EmArgs,
        /// Also write model.txt, posteriors.csv, trace.csv and fit.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep K and pick the largest BIC.
    Select {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1)]
        kmin: usize,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        em: EmArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Posterior class probabilities under a saved model.
    Classify {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo study: repeated simulate and fit.
    Mc {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        em: EmArgs,
        /// Also write mc_raw.csv and mc_summary.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct EmArgs {
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iterations: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long = "newton-max-steps", default_value_t = 50)]
    newton_max_steps: usize,
    #[arg(long = "newton-tol", default_value_t = 1e-8)]
    newton_tol: f64,
}

impl EmArgs {
    fn config(&self, seed: u64) -> Result<EmConfig> {
        let cfg = EmConfig {
            max_iterations: self.max_iterations,
            tol: self.tol,
            n_restarts: self.restarts,
            newton_max_steps: self.newton_max_steps,
            newton_tol: self.newton_tol,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Worker count from `RECURMIX_THREADS`; `None` means automatic.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::Input(format!("{THREADS_ENV}='{v}' is not a thread count"))),
        },
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() { EXIT_INPUT } else { EXIT_FIT }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn cli_main<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker pool: {e}");
            return EXIT_INPUT;
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(text) => match stdout.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "error: writing output: {e}");
                EXIT_INPUT
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn load_scenario(spec: &str, n: Option<usize>, seed: Option<u64>) -> Result<Scenario> {
    match spec {
        "well_separated" | "mixed" => {
            let n = n.ok_or_else(|| Error::Input("--n is required for built-in scenarios".into()))?;
            builtin_scenario(spec, n, seed.unwrap_or(0))
        }
        path => {
            let sc = read_scenario(Path::new(path))?;
            Ok(sc.resized(n.unwrap_or(sc.n_subjects), seed.unwrap_or(sc.seed)))
        }
    }
}

fn run(command: Command) -> Result<String> {
    match command {
        Command::Simulate { scenario, n, seed, out } => {
            let sc = load_scenario(&scenario, n, seed)?;
            let cohort = simulate_cohort(&sc)?;
            let ds = Dataset::new(cohort.subjects, sc.covariate_names.clone())?;
            write_dataset_dir(&ds, &out)?;
            write_labels(&ds, &cohort.labels, &out.join(LABELS_FILE))?;
            write_text(&out.join("scenario.txt"), &crate::io::format_scenario(&sc))?;

            let mut r = Report::new(&["class", "n_subjects", "n_events"]);
            r.meta("report", "simulate")
                .meta("scenario", &sc.name)
                .meta("n", sc.n_subjects)
                .meta("seed", sc.seed)
                .meta("tau", sc.tau);
            for k in 0..sc.model.k() {
                let members = ds.subjects.iter().zip(&cohort.labels).filter(|(_, &l)| l == k);
                let (count, events) = members.fold((0, 0), |(c, e), (s, _)| (c + 1, e + s.n_events()));
                r.push(vec![(k + 1).to_string(), count.to_string(), events.to_string()]);
            }
            Ok(r.render())
        }
        Command::Fit { data, k, seed, em, out } => {
            let cfg = em.config(seed)?;
            let ds = read_dataset_dir(&data)?;
            let report = fit(&ds.subjects, k, &cfg)?;
            let text = fit_report(&report, &ds, &cfg).render();
            if let Some(dir) = out {
                ensure_dir(&dir)?;
                write_model(&report.model, &ds.covariate_names, &dir.join("model.txt"))?;
                write_text(&dir.join("fit.csv"), &text)?;
                write_text(&dir.join("posteriors.csv"), &posterior_report(&ds, &report.posteriors).render())?;
                write_text(&dir.join("trace.csv"), &trace_report(&report).render())?;
            }
            Ok(text)
        }
        Command::Select { data, kmin, kmax, seed, em, out } => {
            let cfg = em.config(seed)?;
            let ds = read_dataset_dir(&data)?;
            let sel = select_k(&ds.subjects, kmin, kmax, &cfg)?;
            let text = selection_report(&sel, &cfg).render();
            if let Some(dir) = out {
                ensure_dir(&dir)?;
                write_text(&dir.join("select.csv"), &text)?;
                if let Some(f) = &sel.chosen().fit {
                    write_model(&f.model, &ds.covariate_names, &dir.join("model.txt"))?;
                }
            }
            Ok(text)
        }
        Command::Classify { data, model, out } => {
            let ds = read_dataset_dir(&data)?;
            let model = read_model(&model)?;
            if model.dim() != ds.dim() {
                return Err(Error::Input(format!(
                    "model has d = {} but the dataset has {} covariates",
                    model.dim(),
                    ds.dim()
                )));
            }
            let post = e_step(&ds.subjects, &model)?;
            let text = posterior_report(&ds, &post).render();
            if let Some(dir) = out {
                ensure_dir(&dir)?;
                write_text(&dir.join("classify.csv"), &text)?;
            }
            Ok(text)
        }
        Command::Mc { scenario, n, reps, seed, em, out } => {
            let cfg = em.config(seed)?;
            let sc = load_scenario(&scenario, n, Some(seed))?;
            let mc = run_mc(&sc, reps, &cfg)?;
            let raw = mc_raw_report(&mc, &cfg);
            let summary = mc_summary_report(&mc, &cfg);
            if let Some(dir) = out {
                ensure_dir(&dir)?;
                write_text(&dir.join("mc_raw.csv"), &raw.render())?;
                write_text(&dir.join("mc_summary.csv"), &summary.render())?;
            }
            Ok(render_all(&[raw, summary]))
        }
    }
}
