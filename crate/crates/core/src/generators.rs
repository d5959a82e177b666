//! Seeded graph families used by tests, benchmarks and the CLI.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{UndirectedGraph, VertexId};

pub fn complete(n: usize) -> UndirectedGraph {
    let n32 = n as VertexId;
    let edges = (0..n32).flat_map(|u| (u + 1..n32).map(move |w| (u, w)));
    UndirectedGraph::from_edges(n, edges).expect("ids in range")
}

pub fn cycle(n: usize) -> UndirectedGraph {
    let n32 = n as VertexId;
    let edges = (0..n32).map(|v| (v, (v + 1) % n32));
    UndirectedGraph::from_edges(n, edges).expect("ids in range")
}

/// `K_{1,leaves}` with the center at id 0.
pub fn star(leaves: usize) -> UndirectedGraph {
    let edges = (1..=leaves as VertexId).map(|v| (0, v));
    UndirectedGraph::from_edges(leaves + 1, edges).expect("ids in range")
}

/// `G(n, q)`: every pair present independently with probability `q`.
pub fn erdos_renyi(n: usize, q: f64, seed: u64) -> UndirectedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as VertexId {
        for w in u + 1..n as VertexId {
            if rng.gen::<f64>() < q {
                edges.push((u, w));
            }
        }
    }
    UndirectedGraph::from_edges(n, edges).expect("ids in range")
}

/// Co-authorship style graph: a union of small cliques ("papers") over
/// `n` vertices, grown until at least `target_edges` distinct edges exist.
///
/// Group sizes are drawn from 2..=7 with small groups most likely, and members
/// are drawn with a heavy-tailed preference for low ids, which gives a skewed
/// degree sequence and plenty of triangles.
pub fn clique_union(n: usize, target_edges: usize, seed: u64) -> UndirectedGraph {
    assert!(n >= 7, "clique_union needs at least 7 vertices");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<(VertexId, VertexId)> = HashSet::with_capacity(target_edges * 2);
    let mut edges = Vec::with_capacity(target_edges + 32);
    let mut group: Vec<VertexId> = Vec::with_capacity(8);
    const SIZE_WEIGHTS: [(usize, u32); 6] = [(2, 30), (3, 28), (4, 20), (5, 12), (6, 6), (7, 4)];
    let total_weight: u32 = SIZE_WEIGHTS.iter().map(|&(_, w)| w).sum();

    while edges.len() < target_edges {
        let mut pick = rng.gen_range(0..total_weight);
        let mut size = 2;
        for &(s, w) in &SIZE_WEIGHTS {
            if pick < w {
                size = s;
                break;
            }
            pick -= w;
        }
        group.clear();
        while group.len() < size {
            let u: f64 = rng.gen();
            let v = ((n as f64) * u.powf(1.6)) as VertexId;
            let v = v.min(n as VertexId - 1);
            if !group.contains(&v) {
                group.push(v);
            }
        }
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                let e = (group[i].min(group[j]), group[i].max(group[j]));
                if seen.insert(e) {
                    edges.push(e);
                }
            }
        }
    }
    UndirectedGraph::from_edges(n, edges).expect("ids in range")
}
