use proptest::prelude::*;
use recurmix::model::log_sum_exp;
use recurmix::{
    class_log_density, cumulative_intensity, intensity, mixture_log_density, ClassParams,
    MixtureModel, Subject,
};

fn params(d: usize) -> impl Strategy<Value = ClassParams> {
    (0.2f64..4.0, 0.4f64..3.0, prop::collection::vec(-1.0f64..1.0, d))
        .prop_map(|(g1, g2, b)| ClassParams::new(g1, g2, b).unwrap())
}

fn subject(d: usize) -> impl Strategy<Value = Subject> {
    (
        0.5f64..3.0,
        prop::collection::vec(0.01f64..1.0, 0..8),
        prop::collection::vec(-2.0f64..2.0, d),
    )
        .prop_map(|(tau, fracs, x)| {
            let mut times: Vec<f64> = fracs.iter().map(|f| f * tau).collect();
            times.sort_by(f64::total_cmp);
            times.dedup();
            Subject::new("p", tau, times, x).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn intensity_is_positive_and_finite(t in 1e-3f64..10.0, p in params(2), x in prop::collection::vec(-2.0f64..2.0, 2)) {
        let v = intensity(t, &x, &p).unwrap();
        prop_assert!(v > 0.0 && v.is_finite());
    }

    #[test]
    fn cumulative_derivative_matches_intensity(t in 0.05f64..5.0, p in params(2), x in prop::collection::vec(-2.0f64..2.0, 2)) {
        let h = 1e-6 * t;
        let fd = (cumulative_intensity(t + h, &x, &p).unwrap() - cumulative_intensity(t - h, &x, &p).unwrap()) / (2.0 * h);
        let exact = intensity(t, &x, &p).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact, "fd {fd} vs {exact}");
        prop_assert!(cumulative_intensity(t + h, &x, &p).unwrap() > cumulative_intensity(t, &x, &p).unwrap());
    }

    #[test]
    fn mixture_density_is_sandwiched(s in subject(2), a in params(2), b in params(2), w in 0.05f64..0.95) {
        let model = MixtureModel::new(vec![w, 1.0 - w], vec![a.clone(), b.clone()]).unwrap();
        let la = class_log_density(&s, &a).unwrap();
        let lb = class_log_density(&s, &b).unwrap();
        let m = mixture_log_density(&s, &model).unwrap();
        let slack = 1e-12 * m.abs().max(1.0);
        prop_assert!(m <= la.max(lb) + slack);
        prop_assert!(m >= la.min(lb) + w.min(1.0 - w).ln() - slack);
    }

    #[test]
    fn log_sum_exp_matches_naive(v in prop::collection::vec(-30.0f64..30.0, 1..6)) {
        let naive = v.iter().map(|x| x.exp()).sum::<f64>().ln();
        let lse = log_sum_exp(&v);
        prop_assert!((lse - naive).abs() <= 1e-12 * naive.abs().max(1e-300) + 1e-14);
    }

    #[test]
    fn covariate_permutation_invariance(s in subject(3), p in params(3)) {
        let perm = [2usize, 0, 1];
        let x: Vec<f64> = perm.iter().map(|&j| s.covariates()[j]).collect();
        let beta: Vec<f64> = perm.iter().map(|&j| p.beta()[j]).collect();
        let s2 = Subject::new("q", s.tau(), s.event_times().to_vec(), x).unwrap();
        let p2 = ClassParams::new(p.gamma1(), p.gamma2(), beta).unwrap();
        let a = class_log_density(&s, &p).unwrap();
        let b = class_log_density(&s2, &p2).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }
}

#[test]
fn extreme_log_densities_stay_finite() {
    // Far from the data, naive summation underflows but log-sum-exp does not.
    let s = Subject::new("x", 1.99, (1..=200).map(|i| i as f64 * 0.0099).collect(), vec![]).unwrap();
    let a = ClassParams::new(1e-3, 1.0, vec![]).unwrap();
    let b = ClassParams::new(1e-4, 1.0, vec![]).unwrap();
    let model = MixtureModel::new(vec![0.5, 0.5], vec![a.clone(), b]).unwrap();
    let la = class_log_density(&s, &a).unwrap();
    assert!(la.exp() == 0.0);
    let m = mixture_log_density(&s, &model).unwrap();
    assert!(m.is_finite() && m < la);
}
