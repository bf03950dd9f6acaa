use proptest::prelude::*;
use recurmix::evaluation::{mean_sd, parameter_names};
use recurmix::report::{mc_raw_report, mc_summary_report, parse_all, render_all, Report};
use recurmix::seeding::stream_rng;
use recurmix::simulation::BuiltinScenario;
use recurmix::{align_labels, builtin_scenario, classification_error, run_mc, ClassParams, EmConfig, MixtureModel};
use rand::Rng;

fn truth3() -> MixtureModel {
    let [a, b] = BuiltinScenario::WellSeparated.classes();
    let c = ClassParams::new(0.5, 0.6, vec![-0.2, 0.8]).unwrap();
    MixtureModel::new(vec![0.3, 0.3, 0.4], vec![a, b, c]).unwrap()
}

fn jitter(m: &MixtureModel, scale: f64, rng: &mut impl Rng) -> MixtureModel {
    let classes = m
        .classes()
        .iter()
        .map(|c| {
            let v: Vec<f64> = c.to_log_vector().iter().map(|x| x + scale * (rng.random::<f64>() - 0.5)).collect();
            ClassParams::from_log_vector(&v).unwrap()
        })
        .collect();
    MixtureModel::new(m.weights().to_vec(), classes).unwrap()
}

/// Exhaustive search written out by hand for K = 3.
fn brute_force_3(fitted: &MixtureModel, truth: &MixtureModel) -> Vec<usize> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let cost = |p: &[usize; 3]| -> f64 {
        (0..3)
            .map(|j| {
                let f = fitted.classes()[p[j]].to_log_vector();
                let t = truth.classes()[j].to_log_vector();
                f.iter().zip(&t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            })
            .sum()
    };
    perms.iter().min_by(|a, b| cost(a).total_cmp(&cost(b))).unwrap().to_vec()
}

#[test]
fn alignment_matches_exhaustive_search() {
    let truth = truth3();
    let mut rng = stream_rng(1, 0);
    for perm in [[0, 1, 2], [2, 0, 1], [1, 0, 2]] {
        for _ in 0..20 {
            let noisy = jitter(&truth, 0.6, &mut rng).permuted(&perm).unwrap();
            let found = align_labels(&noisy, &truth).unwrap();
            assert_eq!(found, brute_force_3(&noisy, &truth));
        }
    }
    assert_eq!(align_labels(&truth, &truth).unwrap(), vec![0, 1, 2]);
    let swapped = truth.permuted(&[1, 0, 2]).unwrap();
    assert_eq!(align_labels(&swapped, &truth).unwrap(), vec![1, 0, 2]);
}

#[test]
fn perfect_and_swapped_predictions_have_zero_error() {
    let truth = vec![0, 1, 1, 0, 2, 2, 1];
    assert_eq!(classification_error(&truth, &truth, 3).unwrap(), 0.0);
    let swapped: Vec<usize> = truth.iter().map(|&l| [1, 2, 0][l]).collect();
    assert_eq!(classification_error(&swapped, &truth, 3).unwrap(), 0.0);
    assert!(classification_error(&[0, 1], &[0], 2).is_err());
}

fn labels(k: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..60).prop_flat_map(move |n| (prop::collection::vec(0..k, n), prop::collection::vec(0..k, n)))
}

proptest! {
    #[test]
    fn error_is_relabel_invariant_and_bounded(
        (pred, truth) in labels(3),
        perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
    ) {
        let e = classification_error(&pred, &truth, 3).unwrap();
        let relabelled: Vec<usize> = pred.iter().map(|&l| perm[l]).collect();
        prop_assert_eq!(classification_error(&relabelled, &truth, 3).unwrap(), e);
        let relabelled_truth: Vec<usize> = truth.iter().map(|&l| perm[l]).collect();
        prop_assert_eq!(classification_error(&pred, &relabelled_truth, 3).unwrap(), e);
        prop_assert!(e <= 1.0 - 1.0 / 3.0 + 1e-12);
    }

    #[test]
    fn two_class_error_is_at_most_half((pred, truth) in labels(2)) {
        prop_assert!(classification_error(&pred, &truth, 2).unwrap() <= 0.5);
    }
}

#[test]
fn monte_carlo_is_deterministic_and_summaries_recompute_from_raw() {
    let sc = builtin_scenario("well_separated", 120, 5).unwrap();
    let cfg = EmConfig { n_restarts: 3, ..EmConfig::default() };
    let a = run_mc(&sc, 4, &cfg).unwrap();
    let b = run_mc(&sc, 4, &cfg).unwrap();
    assert_eq!(a, b);
    let seeds: Vec<u64> = a.replications.iter().map(|r| r.seed).collect();
    assert!(seeds.windows(2).all(|w| w[0] != w[1]));

    let text = render_all(&[mc_raw_report(&a, &cfg), mc_summary_report(&a, &cfg)]);
    let reports = parse_all(&text).unwrap();
    let (raw, summary) = (&reports[0], &reports[1]);
    let ok: Vec<usize> = (0..raw.rows.len()).filter(|&i| raw.rows[i][2] == "ok").collect();
    assert_eq!(summary.header_value("n_failed").unwrap(), (raw.rows.len() - ok.len()).to_string());

    let column = |r: &Report, name: &str| -> Vec<f64> {
        let j = r.column_index(name).unwrap();
        ok.iter().map(|&i| r.rows[i][j].parse().unwrap()).collect()
    };
    let (em, es) = mean_sd(&column(raw, "error"));
    assert_eq!(summary.header_value("error_mean").unwrap().parse::<f64>().unwrap(), em);
    assert_eq!(summary.header_value("error_sd").unwrap().parse::<f64>().unwrap(), es);
    for (row, name) in summary.rows.iter().zip(parameter_names(2, 2)) {
        assert_eq!(row[0], name);
        let (mean, sd) = mean_sd(&column(raw, &name));
        assert_eq!(row[2].parse::<f64>().unwrap(), mean, "{name}");
        assert_eq!(row[3].parse::<f64>().unwrap(), sd, "{name}");
        let truth: f64 = row[1].parse().unwrap();
        assert_eq!(row[4].parse::<f64>().unwrap(), mean - truth, "{name}");
    }
}
