use proptest::prelude::*;

use smoothkm::data::nearest_labels;
use smoothkm::engine::{fkm_step, lloyd_step, run, skm_step, SkmConfig};
use smoothkm::objectives::evaluate_objective;
use smoothkm::{CentroidSet, DataMatrix, SmootherSpec};

fn instance() -> impl Strategy<Value = (DataMatrix, CentroidSet)> {
    (1usize..=3, 1usize..=4, 2usize..=25).prop_flat_map(|(p, k, n)| {
        (
            prop::collection::vec(-5.0f64..5.0, n * p),
            prop::collection::vec(-5.0f64..5.0, k * p),
        )
            .prop_map(move |(x, c)| (DataMatrix::new(n, p, x).unwrap(), CentroidSet::new(k, p, c).unwrap()))
    })
}

proptest! {
    #[test]
    fn hardmin_step_is_lloyd_step((x, c) in instance()) {
        // only when every cluster keeps at least one point (no reseed)
        let labels = nearest_labels(&x, &c).unwrap();
        prop_assume!((0..c.n_clusters()).all(|k| labels.contains(&k)));
        let a = skm_step(&x, &c, SmootherSpec::hard()).unwrap().centroids;
        let b = lloyd_step(&x, &c).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= 1e-12);
    }

    #[test]
    fn fkm_matches_pnorm((x, c) in instance(), m in 1.1f64..5.0) {
        let a = fkm_step(&x, &c, m).unwrap();
        let b = skm_step(&x, &c, SmootherSpec::p_norm(1.0 / (m - 1.0)).unwrap()).unwrap().centroids;
        prop_assert!(a.max_abs_diff(&b) <= 1e-9);
    }

    #[test]
    fn concave_step_never_increases_objective((x, c) in instance(), param in 0.1f64..5.0) {
        for spec in [SmootherSpec::log_sum_exp(param).unwrap(), SmootherSpec::p_norm(param).unwrap(), SmootherSpec::hard()] {
            let step = skm_step(&x, &c, spec).unwrap();
            let after = evaluate_objective(&x, &step.centroids, spec).unwrap().value;
            prop_assert!(after <= step.objective + 1e-9 * step.objective.abs().max(1.0), "{spec}");
        }
    }

    #[test]
    fn boltzmann_weight_columns_sum_to_one((x, c) in instance(), alpha in 0.1f64..5.0) {
        let step = skm_step(&x, &c, SmootherSpec::boltzmann(alpha).unwrap()).unwrap();
        for s in step.weights.column_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
    }
}

#[test]
fn run_is_deterministic_and_picks_lowest_objective() {
    let rows: Vec<Vec<f64>> = (0..120)
        .map(|i| {
            let t = i as f64;
            vec![(t * 0.37).sin() * 4.0 + (i % 3) as f64 * 6.0, (t * 0.91).cos() * 2.0]
        })
        .collect();
    let x = DataMatrix::from_rows(&rows).unwrap();
    let cfg = SkmConfig::new(SmootherSpec::log_sum_exp(1.0).unwrap())
        .with_restarts(6)
        .with_seed(11);
    let a = run(&x, 3, &cfg).unwrap();
    let b = run(&x, 3, &cfg).unwrap();
    assert_eq!(a, b);
    for r in 0..6 {
        let single = run(&x, 3, &cfg.with_restarts(r + 1)).unwrap();
        assert!(a.objective <= single.objective);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let c = pool.install(|| run(&x, 3, &cfg).unwrap());
    assert_eq!(a, c);
}
