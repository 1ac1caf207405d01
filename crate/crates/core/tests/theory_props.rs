use proptest::prelude::*;

use itca::theory::{lda_delta, lda_limit_delta, oracle_delta};

fn omega_pair() -> impl Strategy<Value = (f64, f64)> {
    (0.001f64..0.998, 0.0f64..1.0).prop_map(|(a, frac)| (a, (1.0 - a) * (0.001 + 0.998 * frac)))
}

proptest! {
    #[test]
    fn oracle_delta_is_symmetric((p1, p2) in omega_pair()) {
        prop_assert_eq!(oracle_delta(p1, p2).unwrap(), oracle_delta(p2, p1).unwrap());
    }

    #[test]
    fn lda_deltas_are_symmetric((p1, p2) in omega_pair(), sep in 0.5f64..20.0) {
        let (a, b) = (lda_delta(p1, p2, sep).unwrap(), lda_delta(p2, p1, sep).unwrap());
        prop_assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
        prop_assert_eq!(lda_limit_delta(p1, p2).unwrap(), lda_limit_delta(p2, p1).unwrap());
    }
}

#[test]
fn equal_proportions_change_sign_at_a_quarter() {
    for i in 1..500 {
        let p = i as f64 * 1e-3;
        let d = oracle_delta(p, p).unwrap();
        match i.cmp(&250) {
            std::cmp::Ordering::Less => assert!(d > 0.0, "p = {p}: {d}"),
            std::cmp::Ordering::Greater => assert!(d < 0.0, "p = {p}: {d}"),
            std::cmp::Ordering::Equal => assert!(d.abs() < 1e-15, "{d}"),
        }
    }
}

#[test]
fn lda_full_form_reaches_its_limit() {
    let grid = itca::theory::grid_points(&itca::theory::Domain::OMEGA, 40);
    let sup = grid
        .iter()
        .map(|&(p1, p2)| (lda_delta(p1, p2, 50.0).unwrap() - lda_limit_delta(p1, p2).unwrap()).abs())
        .fold(0.0, f64::max);
    assert!(sup < 1e-6, "sup gap {sup}");
}

#[test]
fn simulated_oracle_matches_closed_form() {
    // Folds of one dataset share its sample proportions, so the error is
    // taken across independent datasets.
    const DATASETS: usize = 10;
    for (i, &(p1, p2)) in [(0.1, 0.2), (0.25, 0.25), (0.3, 0.15), (0.05, 0.6)].iter().enumerate() {
        let spec = itca::ClassifierSpec::oracle(vec![0, 1], vec![p1, p2, 1.0 - p1 - p2]).with_seed(i as u64);
        let mut plan = itca::theory::EmpiricalPlan::new(spec);
        plan.n = 100_000;
        plan.d = 2;
        let means: Vec<f64> = (0..DATASETS)
            .map(|rep| {
                plan.seed = (100 * i + rep) as u64;
                itca::theory::empirical_delta(&plan, p1, p2).unwrap().mean
            })
            .collect();
        let summary = itca::CriterionReport::from_folds(itca::CriterionName::Itca, means);
        let want = oracle_delta(p1, p2).unwrap();
        assert!(
            (summary.mean - want).abs() <= 3.0 * summary.stderr,
            "({p1}, {p2}): simulated {} ± {}, closed form {want}",
            summary.mean,
            summary.stderr
        );
    }
}
