//! Local (per-vertex) and global 3-profiles by edge pivoting.
//!
//! One scatter computes four scalars per edge from the two sorted neighbor
//! lists; one gather folds them into the six vertex-role counts. Global counts
//! are a third of the vertex sums, since every triple is seen from each of its
//! three vertices.

use serde::Serialize;

use crate::engine::{Engine, WireSize};
use crate::error::{Error, Result};
use crate::graph::{intersection_count, EdgeRef, UndirectedGraph, VertexId};
use crate::profile::{choose2, ExactProfile};

/// Per-edge counts for `e = {u, w}`, `u < w`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeScalars {
    /// `|Γ(u) ∩ Γ(w)|`: triangles through `e`.
    pub tri: u32,
    /// Wedges centered at `u` with `e` as one arm.
    pub wedge_at_u: u32,
    /// Wedges centered at `w` with `e` as one arm.
    pub wedge_at_w: u32,
    /// Vertices adjacent to neither endpoint: single-edge triples on `e`.
    pub iso: u32,
}

impl EdgeScalars {
    /// Wedge count centered at `v`, where `v` is one endpoint and `other` the second.
    #[inline]
    pub fn wedge_at(&self, v: VertexId, other: VertexId) -> u32 {
        if v < other {
            self.wedge_at_u
        } else {
            self.wedge_at_w
        }
    }

    /// Wedge count centered at the endpoint opposite `v`.
    #[inline]
    pub fn wedge_opposite(&self, v: VertexId, other: VertexId) -> u32 {
        self.wedge_at(other, v)
    }
}

impl WireSize for EdgeScalars {
    fn wire_bytes(&self) -> usize {
        4 * std::mem::size_of::<u32>()
    }
}

/// Counts of triples containing one vertex, by the vertex's role.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LocalProfile {
    pub n0: u64,
    /// `v` is an endpoint of the lone edge.
    pub n1_e: u64,
    /// `v` is disconnected from the lone edge.
    pub n1_d: u64,
    /// `v` is a wedge endpoint.
    pub n2_e: u64,
    /// `v` is the wedge center.
    pub n2_c: u64,
    pub n3: u64,
}

impl LocalProfile {
    /// `(n0, n1_e, n1_d, n2_e, n2_c, n3)`.
    pub fn to_array(&self) -> [u64; 6] {
        [self.n0, self.n1_e, self.n1_d, self.n2_e, self.n2_c, self.n3]
    }

    pub fn total(&self) -> u64 {
        self.to_array().iter().sum()
    }
}

/// Scalars for a single edge.
#[inline]
pub fn edge_scalars(g: &UndirectedGraph, e: EdgeRef) -> EdgeScalars {
    let du = g.degree(e.u) as u32;
    let dw = g.degree(e.w) as u32;
    let tri = intersection_count(g.neighbors(e.u), g.neighbors(e.w)) as u32;
    EdgeScalars {
        tri,
        wedge_at_u: du - tri - 1,
        wedge_at_w: dw - tri - 1,
        iso: g.vertex_count() as u32 - (du + dw - tri),
    }
}

pub fn scatter_edge_scalars(engine: &Engine, g: &UndirectedGraph) -> Vec<EdgeScalars> {
    engine.edge_map("scatter:edge-scalars", g, |e| edge_scalars(g, e))
}

#[derive(Clone, Copy, Default)]
struct RoleSums {
    tri: u64,
    center: u64,
    endpoint: u64,
    iso: u64,
}

pub fn gather_local_profiles(
    engine: &Engine,
    g: &UndirectedGraph,
    scalars: &[EdgeScalars],
) -> Result<Vec<LocalProfile>> {
    let sums = engine.vertex_reduce(
        "gather:local-profile",
        g,
        scalars,
        None,
        RoleSums::default,
        |acc, v, other, s| {
            let own = s.wedge_at(v, other) as u64;
            acc.tri += s.tri as u64;
            acc.center += own;
            acc.endpoint += s.wedge_at_u as u64 + s.wedge_at_w as u64 - own;
            acc.iso += s.iso as u64;
        },
    )?;
    let n = g.vertex_count() as u64;
    let m = g.edge_count() as u64;
    let triples_at_v = choose2(n.saturating_sub(1));
    let mut out = vec![LocalProfile::default(); g.vertex_count()];
    engine.try_apply("apply:local-profile", &mut out, |v, slot| {
        *slot = apply_local(v, &sums[v as usize], g.degree(v) as u64, m, triples_at_v)?;
        Ok(())
    })?;
    Ok(out)
}

fn apply_local(
    v: VertexId,
    sums: &RoleSums,
    degree: u64,
    edges: u64,
    triples_at_v: u64,
) -> Result<LocalProfile> {
    let fail = |what: &str| Error::integrity(format!("vertex {v}: {what}"));
    if !sums.tri.is_multiple_of(2) {
        return Err(fail("odd triangle sum"));
    }
    if !sums.center.is_multiple_of(2) {
        return Err(fail("odd wedge-center sum"));
    }
    let n3 = sums.tri / 2;
    let n2_c = sums.center / 2;
    let n2_e = sums.endpoint;
    let n1_e = sums.iso;
    let n1_d = edges
        .checked_sub(degree + n3 + n2_e)
        .ok_or_else(|| fail("negative disconnected-edge count"))?;
    let n0 = triples_at_v
        .checked_sub(n1_e + n1_d + n2_e + n2_c + n3)
        .ok_or_else(|| fail("negative empty-triple count"))?;
    Ok(LocalProfile {
        n0,
        n1_e,
        n1_d,
        n2_e,
        n2_c,
        n3,
    })
}

/// Global profile as one third of the summed vertex roles.
pub fn global_profile_from_local(locals: &[LocalProfile]) -> Result<ExactProfile> {
    let mut sums = [0u128; 4];
    for lp in locals {
        sums[0] += lp.n0 as u128;
        sums[1] += (lp.n1_e + lp.n1_d) as u128;
        sums[2] += (lp.n2_e + lp.n2_c) as u128;
        sums[3] += lp.n3 as u128;
    }
    if let Some(i) = sums.iter().position(|s| s % 3 != 0) {
        return Err(Error::integrity(format!(
            "vertex sum of class {i} is {}, not divisible by 3",
            sums[i]
        )));
    }
    Ok(ExactProfile::from_array(sums.map(|s| s / 3)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRun {
    pub locals: Vec<LocalProfile>,
    pub global: ExactProfile,
}

/// Full pipeline: scatter, gather, then aggregate.
pub fn compute_profiles(engine: &Engine, g: &UndirectedGraph) -> Result<ProfileRun> {
    let scalars = scatter_edge_scalars(engine, g);
    let locals = gather_local_profiles(engine, g, &scalars)?;
    let global = global_profile_from_local(&locals)?;
    Ok(ProfileRun { locals, global })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleCounts {
    pub per_vertex: Vec<u64>,
    pub global: u128,
}

/// Per-vertex and global triangle counts only; the baseline the full profile
/// is timed against.
pub fn count_triangles_only(engine: &Engine, g: &UndirectedGraph) -> Result<TriangleCounts> {
    let tri = engine.edge_map("scatter:triangles", g, |e| {
        intersection_count(g.neighbors(e.u), g.neighbors(e.w)) as u32
    });
    let sums = engine.vertex_reduce(
        "gather:triangles",
        g,
        &tri,
        None,
        || 0u64,
        |acc, _, _, t| *acc += *t as u64,
    )?;
    let mut per_vertex = Vec::with_capacity(sums.len());
    let mut total: u128 = 0;
    for (v, s) in sums.into_iter().enumerate() {
        if !s.is_multiple_of(2) {
            return Err(Error::integrity(format!("vertex {v}: odd triangle sum")));
        }
        per_vertex.push(s / 2);
        total += (s / 2) as u128;
    }
    if !total.is_multiple_of(3) {
        return Err(Error::integrity("triangle vertex sum not divisible by 3"));
    }
    Ok(TriangleCounts {
        per_vertex,
        global: total / 3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::oracle;

    fn engine() -> Engine {
        Engine::new(2).unwrap()
    }

    #[test]
    fn scalar_examples() {
        let e = engine();
        for s in scatter_edge_scalars(&e, &generators::complete(4)) {
            assert_eq!(
                s,
                EdgeScalars {
                    tri: 2,
                    wedge_at_u: 0,
                    wedge_at_w: 0,
                    iso: 0
                }
            );
        }
        for s in scatter_edge_scalars(&e, &generators::cycle(5)) {
            assert_eq!(
                s,
                EdgeScalars {
                    tri: 0,
                    wedge_at_u: 1,
                    wedge_at_w: 1,
                    iso: 1
                }
            );
        }
        // center is vertex 0, the canonical u of every star edge
        for s in scatter_edge_scalars(&e, &generators::star(3)) {
            assert_eq!(
                s,
                EdgeScalars {
                    tri: 0,
                    wedge_at_u: 2,
                    wedge_at_w: 0,
                    iso: 0
                }
            );
        }
    }

    #[test]
    fn scalar_invariants() {
        let g = generators::erdos_renyi(50, 0.2, 8);
        for (e, s) in g.edges().zip(scatter_edge_scalars(&engine(), &g)) {
            assert_eq!(s.tri + s.wedge_at_u + 1, g.degree(e.u) as u32);
            assert_eq!(s.tri + s.wedge_at_w + 1, g.degree(e.w) as u32);
        }
    }

    #[test]
    fn local_examples() {
        let e = engine();
        let c5 = compute_profiles(&e, &generators::cycle(5)).unwrap();
        for lp in &c5.locals {
            assert_eq!(lp.to_array(), [0, 2, 1, 2, 1, 0]);
        }
        let star = compute_profiles(&e, &generators::star(3)).unwrap();
        assert_eq!(star.locals[0].to_array(), [0, 0, 0, 0, 3, 0]);
        for leaf in &star.locals[1..] {
            assert_eq!(leaf.to_array(), [1, 0, 0, 2, 0, 0]);
        }
        let k4 = compute_profiles(&e, &generators::complete(4)).unwrap();
        for lp in &k4.locals {
            assert_eq!(lp.to_array(), [0, 0, 0, 0, 0, 3]);
        }
    }

    #[test]
    fn global_examples() {
        let e = engine();
        let k4 = compute_profiles(&e, &generators::complete(4)).unwrap();
        assert_eq!(k4.global.to_array(), [0, 0, 0, 4]);
        let c5 = compute_profiles(&e, &generators::cycle(5)).unwrap();
        assert_eq!(c5.global.to_array(), [0, 5, 5, 0]);
        let empty3 = UndirectedGraph::from_edges(3, []).unwrap();
        assert_eq!(
            compute_profiles(&e, &empty3).unwrap().global.to_array(),
            [1, 0, 0, 0]
        );
    }

    #[test]
    fn degenerate_sizes() {
        let e = engine();
        for n in 0..3 {
            let g = generators::complete(n);
            let run = compute_profiles(&e, &g).unwrap();
            assert_eq!(run.global.to_array(), [0; 4]);
            assert!(run.locals.iter().all(|lp| lp.total() == 0));
        }
        // isolated vertex: every edge is disconnected from it
        let g = UndirectedGraph::from_edges(5, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let run = compute_profiles(&e, &g).unwrap();
        assert_eq!(run.locals[4].n1_d, 3);
        assert_eq!(run.locals, oracle::brute_force_local(&g).unwrap());
    }

    #[test]
    fn triangles_only_examples() {
        let e = engine();
        let k4 = count_triangles_only(&e, &generators::complete(4)).unwrap();
        assert_eq!(k4.per_vertex, vec![3; 4]);
        assert_eq!(k4.global, 4);
        let c5 = count_triangles_only(&e, &generators::cycle(5)).unwrap();
        assert_eq!(c5.per_vertex, vec![0; 5]);
        assert_eq!(c5.global, 0);
    }

    #[test]
    fn triangles_only_agrees_with_full_pipeline() {
        let e = engine();
        for seed in 0..5 {
            let g = generators::erdos_renyi(80, 0.15, seed);
            let full = compute_profiles(&e, &g).unwrap();
            let tri = count_triangles_only(&e, &g).unwrap();
            assert_eq!(tri.global, full.global.n3);
            let n3: Vec<u64> = full.locals.iter().map(|lp| lp.n3).collect();
            assert_eq!(tri.per_vertex, n3);
        }
    }

    #[test]
    fn odd_sums_are_integrity_errors() {
        let g = generators::cycle(5);
        let mut scalars = scatter_edge_scalars(&engine(), &g);
        scalars[0].tri = 1;
        let err = gather_local_profiles(&engine(), &g, &scalars).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
        let bad = LocalProfile {
            n3: 1,
            ..Default::default()
        };
        assert!(global_profile_from_local(&[bad]).is_err());
    }
}
