use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use recurmix::report::{parse_all, Report};
use tempfile::TempDir;

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_recurmix"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("RECURMIX_THREADS", t),
        None => cmd.env_remove("RECURMIX_THREADS"),
    };
    cmd.output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args, None);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn simulate(dir: &Path, scenario: &str, n: &str, seed: &str) {
    ok(&["simulate", "--scenario", scenario, "--n", n, "--seed", seed, "--out", dir.to_str().unwrap()]);
}

#[test]
fn simulate_writes_dataset_and_summary() {
    let dir = TempDir::new().unwrap();
    let out = ok(&["simulate", "--scenario", "mixed", "--n", "40", "--seed", "3", "--out", dir.path().to_str().unwrap()]);
    let r = Report::parse(&out).unwrap();
    assert_eq!(r.header_value("scenario"), Some("mixed"));
    let counts: f64 = r.numeric_column("n_subjects").unwrap().iter().sum();
    assert_eq!(counts, 40.0);
    for f in ["subjects.csv", "events.csv", "labels.csv", "scenario.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let ds = recurmix::read_dataset_dir(dir.path()).unwrap();
    assert_eq!(ds.len(), 40);
}

#[test]
fn fit_is_byte_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "well_separated", "150", "11");
    let data = dir.path().to_str().unwrap();
    let args = ["fit", "--data", data, "--K", "2", "--seed", "7"];
    let a = run(&args, Some("1"));
    let b = run(&args, Some("4"));
    let c = run(&args, None);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let r = Report::parse(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(r.header_value("seed"), Some("7"));
    assert!(r.header_value("bic_convention").is_some());
}

#[test]
fn fit_out_dir_feeds_classify() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "well_separated", "80", "2");
    let data = dir.path().to_str().unwrap();
    let out = dir.path().join("fit");
    ok(&["fit", "--data", data, "--K", "2", "--restarts", "3", "--out", out.to_str().unwrap()]);
    for f in ["model.txt", "fit.csv", "posteriors.csv", "trace.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let model = out.join("model.txt");
    let text = ok(&["classify", "--data", data, "--model", model.to_str().unwrap()]);
    let r = Report::parse(&text).unwrap();
    assert_eq!(r.rows.len(), 80);
    // The saved model reproduces the posteriors written by fit.
    let saved = Report::parse(&fs::read_to_string(out.join("posteriors.csv")).unwrap()).unwrap();
    assert_eq!(saved.rows, r.rows);
}

#[test]
fn select_prints_one_bic_per_k() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "well_separated", "120", "4");
    let text = ok(&["select", "--data", dir.path().to_str().unwrap(), "--kmin", "1", "--kmax", "3", "--restarts", "3"]);
    let r = Report::parse(&text).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!(r.header_value("chosen_K").is_some());
    assert!(r.column_index("bic").is_some() && r.column_index("n_params").is_some());
    assert_eq!(r.numeric_column("n_params").unwrap(), vec![4.0, 9.0, 14.0]);
}

#[test]
fn mc_summary_matches_raw_table() {
    let text = ok(&["mc", "--scenario", "mixed", "--n", "60", "--reps", "3", "--seed", "1", "--restarts", "2"]);
    let reports = parse_all(&text).unwrap();
    assert_eq!(reports.len(), 2);
    let (raw, summary) = (&reports[0], &reports[1]);
    assert_eq!(raw.rows.len(), 3);
    let ok_rows: Vec<&Vec<String>> = raw.rows.iter().filter(|r| r[2] == "ok").collect();
    let j = raw.column_index("gamma1_1").unwrap();
    let vals: Vec<f64> = ok_rows.iter().map(|r| r[j].parse().unwrap()).collect();
    let (mean, _) = recurmix::evaluation::mean_sd(&vals);
    let row = summary.rows.iter().find(|r| r[0] == "gamma1_1").unwrap();
    assert_eq!(row[2].parse::<f64>().unwrap(), mean);
    let again = ok(&["mc", "--scenario", "mixed", "--n", "60", "--reps", "3", "--seed", "1", "--restarts", "2"]);
    assert_eq!(text, again);
}

#[test]
fn usage_and_input_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let unknown = run(&["fit", "--data", d, "--K", "2", "--bogus"], None);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));

    let missing = run(&["fit", "--data", d, "--K", "2"], None);
    assert_eq!(missing.status.code(), Some(2));

    fs::write(dir.path().join("subjects.csv"), "id,tau,x\na,2,1\nb,2,not-a-number\n").unwrap();
    fs::write(dir.path().join("events.csv"), "id,time\na,1\n").unwrap();
    let corrupt = run(&["fit", "--data", d, "--K", "1"], None);
    assert_eq!(corrupt.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&corrupt.stderr).contains("subjects.csv:3:"));

    let bad_threads = run(&["fit", "--data", d, "--K", "1"], Some("many"));
    assert_eq!(bad_threads.status.code(), Some(2));

    assert_eq!(run(&["--help"], None).status.code(), Some(0));
}

#[test]
fn fit_failure_exits_with_three() {
    let dir = TempDir::new().unwrap();
    simulate(dir.path(), "well_separated", "10", "1");
    let out = run(&["fit", "--data", dir.path().to_str().unwrap(), "--K", "3"], None);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}
