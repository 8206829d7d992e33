mod common;

use avgdist::metric::{average_distance, distortion, shortest_path_metric, validate_metric, Violation};
use avgdist::transforms::{apply_transform, MetricTransform};
use avgdist::{FiniteMetric, WeightedGraph};
use proptest::prelude::*;

#[test]
fn shortest_paths_on_small_graphs() {
    let path = WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
    assert_eq!(shortest_path_metric(&path, None).unwrap().get(0, 2), 2.0);

    let tri = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]).unwrap();
    let m = shortest_path_metric(&tri, None).unwrap();
    let oracle = common::floyd(3, &tri.edges);
    assert_eq!(m.get(0, 2), 2.0);
    assert_eq!(m.get(0, 2), oracle[2]);

    let isolated = WeightedGraph::new(2, vec![]).unwrap();
    assert_eq!(shortest_path_metric(&isolated, Some(5.0)).unwrap().get(0, 1), 5.0);
    assert!(shortest_path_metric(&isolated, None).is_err());
}

#[test]
fn validation_witnesses() {
    assert!(validate_metric(&FiniteMetric::uniform(4, 1.0)).is_empty());
    let bad = FiniteMetric::new(3, vec![0.0, 1.0, 10.0, 1.0, 0.0, 1.0, 10.0, 1.0, 0.0]);
    let v = match bad {
        Ok(m) => validate_metric(&m),
        Err(_) => return,
    };
    assert!(v.contains(&Violation::Triangle { i: 0, j: 1, k: 2 }));
}

#[test]
fn asymmetric_matrix_is_reported() {
    let rows = vec![vec![0.0, 1.0], vec![2.0, 0.0]];
    match FiniteMetric::from_rows(&rows) {
        Ok(m) => assert!(matches!(validate_metric(&m)[0], Violation::Symmetry { .. })),
        Err(_) => {}
    }
}

#[test]
fn averages() {
    let two = FiniteMetric::uniform(2, 1.0);
    assert_eq!(average_distance(&two, &[0, 1]), 0.5);
    assert_eq!(average_distance(&two, &[1, 1, 1]), 0.0);
    for n in 1..8 {
        let u = FiniteMetric::uniform(n, 1.0);
        let pts: Vec<usize> = (0..n).collect();
        assert!((average_distance(&u, &pts) - (n as f64 - 1.0) / n as f64).abs() < 1e-12);
    }
}

#[test]
fn snowflake_and_truncation() {
    let m = FiniteMetric::line(&[0.0, 1.0, 4.0]);
    let s = apply_transform(&m, &MetricTransform::Snowflake { theta: 0.5 }).unwrap();
    assert_eq!((s.get(0, 1), s.get(0, 2)), (1.0, 2.0));
    let five = FiniteMetric::line(&[0.0, 2.0, 5.0]);
    let t = apply_transform(&five, &MetricTransform::Truncation { tau: std::f64::consts::PI }).unwrap();
    assert_eq!(t.get(0, 2), std::f64::consts::PI);
    assert_eq!(t.get(0, 1), 2.0);
    assert_eq!(apply_transform(&m, &MetricTransform::Identity).unwrap(), m);
}

#[test]
fn distortion_examples() {
    let m = FiniteMetric::line(&[0.0, 1.0, 2.0]);
    let id = [0, 1, 2];
    assert!((distortion(&m, &m, &id).unwrap().distortion - 1.0).abs() < 1e-12);
    let doubled = m.scaled(2.0);
    assert!((distortion(&m, &doubled, &id).unwrap().distortion - 1.0).abs() < 1e-12);
    // Pair ratios 1, 0.5, 0.75.
    let squeezed = FiniteMetric::line(&[0.0, 1.0, 1.5]);
    let d = distortion(&m, &squeezed, &id).unwrap();
    assert!((d.distortion - 2.0).abs() < 1e-12);
    assert!((d.expansion - 1.0).abs() < 1e-12 && (d.contraction - 0.5).abs() < 1e-12);
}

fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (2usize..9).prop_flat_map(|n| {
        let edge = (0..n, 0..n, 0.1f64..10.0);
        (Just(n), proptest::collection::vec(edge, 0..20))
    })
}

proptest! {
    #[test]
    fn dijkstra_matches_floyd((n, edges) in random_graph()) {
        let g = WeightedGraph::new(n, edges.clone()).unwrap();
        let cap = 1e6;
        let m = shortest_path_metric(&g, Some(cap)).unwrap();
        let oracle = common::floyd(n, &edges);
        for i in 0..n {
            for j in 0..n {
                let want = oracle[i * n + j].min(cap);
                prop_assert!((m.get(i, j) - want).abs() <= 1e-9 * want.max(1.0));
            }
        }
        prop_assert!(validate_metric(&m).is_empty());
    }

    #[test]
    fn transforms_preserve_metrics(
        coords in proptest::collection::vec(-5.0f64..5.0, 2..8),
        theta in 0.05f64..1.0,
        tau in 0.1f64..4.0,
    ) {
        let m = FiniteMetric::line(&coords);
        for phi in [MetricTransform::Snowflake { theta }, MetricTransform::Truncation { tau }, MetricTransform::Log1p] {
            let t = apply_transform(&m, &phi).unwrap();
            prop_assert!(validate_metric(&t).is_empty());
        }
    }
}
