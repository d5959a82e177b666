use std::collections::BTreeSet;

use proptest::prelude::*;
use triprof::ego::{ego_parallel, ego_serial};
use triprof::local::compute_profiles;
use triprof::oracle;
use triprof::profile::{choose2, choose3};
use triprof::sampling::{sample_edges, unbiased_estimate, SampleParams};
use triprof::theory::evaluate_polynomials;
use triprof::{load_edge_list, load_edge_list_with, Engine, UndirectedGraph, VertexId};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = UndirectedGraph> {
    (3..=max_n).prop_flat_map(|n| {
        proptest::collection::vec((0..n as VertexId, 0..n as VertexId), 0..n * 3)
            .prop_map(move |edges| UndirectedGraph::from_edges(n, edges).unwrap())
    })
}

fn labelled_edges(g: &UndirectedGraph) -> BTreeSet<(String, String)> {
    g.edge_pairs()
        .iter()
        .map(|&(u, w)| {
            let (a, b) = (g.label(u).to_owned(), g.label(w).to_owned());
            if a < b {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pipeline_matches_oracle(g in graph_strategy(24), workers in 1usize..4) {
        let engine = Engine::new(workers).unwrap();
        let run = compute_profiles(&engine, &g).unwrap();
        prop_assert_eq!(run.global, oracle::brute_force_profile(&g).unwrap());
        prop_assert_eq!(&run.locals, &oracle::brute_force_local(&g).unwrap());
        let n = g.vertex_count() as u64;
        prop_assert_eq!(run.global.total(), choose3(n));
        for lp in &run.locals {
            prop_assert_eq!(lp.total(), choose2(n - 1));
        }
    }

    #[test]
    fn ego_methods_match_oracle(g in graph_strategy(20)) {
        let engine = Engine::new(2).unwrap();
        let centers: Vec<VertexId> = (0..g.vertex_count() as VertexId).collect();
        let serial = ego_serial(&engine, &g, &centers).unwrap();
        let parallel = ego_parallel(&engine, &g, &centers).unwrap();
        prop_assert_eq!(&serial, &parallel);
        let mut f3 = 0;
        for (v, p) in &serial {
            prop_assert_eq!(*p, oracle::brute_force_ego(&g, *v).unwrap());
            prop_assert_eq!(p.total() as u128, choose3(g.degree(*v) as u64));
            f3 += p.f3;
        }
        prop_assert_eq!(f3, 4 * oracle::brute_force_four_cliques(&g).unwrap());
    }

    #[test]
    fn common_neighbors_match_brute_force(g in graph_strategy(30)) {
        for &(u, w) in g.edge_pairs() {
            let expected: Vec<VertexId> = (0..g.vertex_count() as VertexId)
                .filter(|&x| g.has_edge(u, x) && g.has_edge(w, x))
                .collect();
            prop_assert_eq!(g.common_neighbors(u, w).unwrap(), expected);
        }
    }

    #[test]
    fn canonical_round_trip(g in graph_strategy(30)) {
        let mut text = Vec::new();
        g.write_canonical(&mut text).unwrap();
        let back = load_edge_list_with(&text[..], Some(g.vertex_count())).unwrap();
        prop_assert_eq!(back.vertex_count(), g.vertex_count());
        prop_assert_eq!(back.edge_count(), g.edge_count());
        let original: BTreeSet<(String, String)> = g
            .edge_pairs()
            .iter()
            .map(|&(u, w)| {
                let (a, b) = (u.to_string(), w.to_string());
                if a < b { (a, b) } else { (b, a) }
            })
            .collect();
        prop_assert_eq!(labelled_edges(&back), original);
    }

    #[test]
    fn masked_polynomials_match_pipeline(g in graph_strategy(20), p in 0.05f64..1.0, seed in any::<u64>()) {
        let engine = Engine::new(1).unwrap();
        let (sample, mask) = sample_edges(&g, SampleParams::new(p, seed).unwrap()).unwrap();
        let values = evaluate_polynomials(&g, &mask).unwrap();
        prop_assert_eq!(values.residuals(g.vertex_count() as u64), Default::default());
        prop_assert_eq!(values.sampled_profile(), compute_profiles(&engine, &sample).unwrap().global);
        let est = unbiased_estimate(values.sampled_profile().to_f64(), p).unwrap();
        let total = choose3(g.vertex_count() as u64) as f64;
        prop_assert!((est.total() - total).abs() <= 1e-9 * total.max(1.0));
    }
}

#[test]
fn loader_reports_line_numbers() {
    let text = "# header\n1 2\n\n2 3 4\n";
    match load_edge_list(text.as_bytes()) {
        Err(triprof::Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
}
