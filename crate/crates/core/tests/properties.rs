//! Randomized invariants of the metrics, dynamics and graph construction.

use polarlab::dynamics::{consensus_value, degroot_step};
use polarlab::graph::{largest_component, validate};
use polarlab::metrics::{bimodality, local_agreement, profile_histogram, profile_matrix, variance};
use polarlab::spectral::sign_normalize;
use polarlab::{DeviationDynamics, Graph};
use proptest::prelude::*;

fn graph_strategy() -> impl Strategy<Value = Graph> {
    (3usize..25)
        .prop_flat_map(|n| {
            let pair = (0..n, 0..n, 0.1f64..4.0);
            (Just(n), prop::collection::vec(pair, n..4 * n))
        })
        .prop_filter_map("needs an edge", |(n, raw)| {
            let edges: Vec<_> = raw.into_iter().filter(|(u, v, _)| u != v).collect();
            if edges.is_empty() {
                return None;
            }
            Some(largest_component(&Graph::from_edges(n, edges).ok()?))
        })
}

fn opinions(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, n)
}

fn graph_and_opinions() -> impl Strategy<Value = (Graph, Vec<f64>)> {
    graph_strategy().prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), opinions(n))
    })
}

proptest! {
    #[test]
    fn degroot_preserves_degree_weighted_mean((g, z) in graph_and_opinions()) {
        let c = consensus_value(&g, &z).unwrap();
        let next = degroot_step(&g, &z).unwrap();
        let c1 = consensus_value(&g, &next).unwrap();
        prop_assert!((c - c1).abs() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn degroot_stays_within_the_opinion_range((g, z) in graph_and_opinions()) {
        let (lo, hi) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
        for x in degroot_step(&g, &z).unwrap().iter() {
            prop_assert!(*x >= lo - 1e-12 && *x <= hi + 1e-12);
        }
    }

    #[test]
    fn deviation_form_matches_raw_iteration((g, z) in graph_and_opinions(), steps in 0usize..30) {
        let mut d = DeviationDynamics::new(&g, &z).unwrap();
        let mut raw = z.clone();
        for _ in 0..steps {
            d.step();
            raw = degroot_step(&g, &raw).unwrap().into_inner();
        }
        for (a, b) in d.opinions().iter().zip(&raw) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn local_agreement_is_a_fraction((g, z) in graph_and_opinions()) {
        let la = local_agreement(&g, &z).unwrap();
        prop_assert!((0.0..=1.0).contains(&la));
    }

    #[test]
    fn bimodality_is_bounded(z in prop::collection::vec(-5.0f64..5.0, 2..60)) {
        if let Ok(b) = bimodality(&z) {
            prop_assert!(b > 0.0 && b <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn variance_scales_quadratically(z in prop::collection::vec(-5.0f64..5.0, 1..40), c in -4.0f64..4.0) {
        let scaled: Vec<f64> = z.iter().map(|x| c * x).collect();
        prop_assert!((variance(&scaled) - c * c * variance(&z)).abs() <= 1e-9 * (1.0 + variance(&z)));
    }

    #[test]
    fn histogram_counts_every_node(cols in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 12), 1..6)) {
        let s = profile_matrix(&cols).unwrap();
        let hist = profile_histogram(&s).unwrap();
        prop_assert_eq!(hist.len(), 1 << cols.len());
        prop_assert_eq!(hist.values().sum::<usize>(), 12);
    }

    #[test]
    fn sign_normalize_makes_first_nonzero_positive(x in prop::collection::vec(-3.0f64..3.0, 1..20)) {
        if let Ok(y) = sign_normalize(&x) {
            prop_assert!(*y.iter().find(|v| **v != 0.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn largest_component_is_connected(g in graph_strategy()) {
        prop_assert!(validate(&g).connected);
        prop_assert!(g.is_symmetric());
    }
}
