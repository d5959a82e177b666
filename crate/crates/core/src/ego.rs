//! Ego 3-profiles: the 3-profile of the subgraph induced by a center's
//! neighbors (center excluded).
//!
//! [`ego_serial`] materializes each ego graph and runs the local pipeline on
//! it, one center at a time. [`ego_parallel`] handles all centers in shared
//! phases: pivot sums over incident edges give three linear equations in the
//! four unknowns `f0..f3`, and a per-edge 4-clique count pins down `f3`.
//!
//! With `w(e)` the wedges centered at `v` through edge `e = {v, a}` and `t(e)`
//! the triangles on `e`, summing over the edges incident to `v`:
//!
//! ```text
//! Σ C(w, 2) = 3 f0 + f1
//! Σ C(t, 2) = f2 + 3 f3
//! Σ w * t   = 2 f1 + 2 f2
//! ```

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{Engine, WireSize, ID_BYTES};
use crate::error::{Error, Result};
use crate::graph::{intersect_into, EdgeRef, UndirectedGraph, VertexId};
use crate::local::{compute_profiles, edge_scalars, EdgeScalars};
use crate::profile::{choose2, choose3};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EgoProfile {
    pub f0: u64,
    pub f1: u64,
    pub f2: u64,
    pub f3: u64,
}

impl EgoProfile {
    pub fn to_array(&self) -> [u64; 4] {
        [self.f0, self.f1, self.f2, self.f3]
    }

    pub fn total(&self) -> u64 {
        self.f0 + self.f1 + self.f2 + self.f3
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PivotSums {
    pub p1: u64,
    pub p2: u64,
    pub p3: u64,
}

/// Edges among the neighbors of one center, as sorted `(a, b)` pairs with `a < b`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NeighborEdgeList(Vec<(VertexId, VertexId)>);

impl NeighborEdgeList {
    pub fn from_pairs(mut pairs: Vec<(VertexId, VertexId)>) -> Self {
        for p in pairs.iter_mut() {
            *p = (p.0.min(p.1), p.0.max(p.1));
        }
        pairs.sort_unstable();
        pairs.dedup();
        NeighborEdgeList(pairs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(VertexId, VertexId)] {
        &self.0
    }

    #[inline]
    pub fn contains(&self, a: VertexId, b: VertexId) -> bool {
        self.0.binary_search(&(a.min(b), a.max(b))).is_ok()
    }
}

/// Scatter record of the first ego phase.
struct PivotRecord {
    scalars: EdgeScalars,
    common: Vec<VertexId>,
}

impl WireSize for PivotRecord {
    fn wire_bytes(&self) -> usize {
        self.scalars.wire_bytes() + self.common.len() * ID_BYTES
    }
}

/// Result of [`ego_parallel_detailed`], aligned with the de-duplicated centers.
#[derive(Clone, Debug, PartialEq)]
pub struct EgoParallelRun {
    pub centers: Vec<VertexId>,
    pub profiles: Vec<EgoProfile>,
    pub pivots: Vec<PivotSums>,
    pub neighbor_edge_counts: Vec<usize>,
}

/// Removes repeated centers, keeping first occurrences, and validates ids.
pub fn dedup_centers(g: &UndirectedGraph, centers: &[VertexId]) -> Result<Vec<VertexId>> {
    let mut seen = vec![false; g.vertex_count()];
    let mut out = Vec::with_capacity(centers.len());
    for &c in centers {
        g.check_vertex(c)?;
        if !std::mem::replace(&mut seen[c as usize], true) {
            out.push(c);
        }
    }
    Ok(out)
}

/// One center at a time: build the ego graph, then run the local pipeline on it.
pub fn ego_serial(
    engine: &Engine,
    g: &UndirectedGraph,
    centers: &[VertexId],
) -> Result<Vec<(VertexId, EgoProfile)>> {
    let centers = dedup_centers(g, centers)?;
    let mark = engine.phase_mark();
    let mut out = Vec::with_capacity(centers.len());
    for &v in &centers {
        let start = Instant::now();
        let ego = g.induced_subgraph(g.neighbors(v))?;
        engine.record(
            "ego-serial:induce",
            start,
            (ego.graph.edge_count() * 2 * ID_BYTES) as u64,
            0,
        );
        let global = compute_profiles(engine, &ego.graph)?.global;
        let narrow = |x: u128| {
            u64::try_from(x).map_err(|_| Error::integrity(format!("center {v}: count overflow")))
        };
        out.push((
            v,
            EgoProfile {
                f0: narrow(global.n0)?,
                f1: narrow(global.n1)?,
                f2: narrow(global.n2)?,
                f3: narrow(global.n3)?,
            },
        ));
    }
    engine.coalesce_since(mark);
    Ok(out)
}

/// All centers at once via edge pivots and per-edge 4-clique counts.
pub fn ego_parallel(
    engine: &Engine,
    g: &UndirectedGraph,
    centers: &[VertexId],
) -> Result<Vec<(VertexId, EgoProfile)>> {
    let run = ego_parallel_detailed(engine, g, centers)?;
    Ok(run.centers.into_iter().zip(run.profiles).collect())
}

pub fn ego_parallel_detailed(
    engine: &Engine,
    g: &UndirectedGraph,
    centers: &[VertexId],
) -> Result<EgoParallelRun> {
    let centers = dedup_centers(g, centers)?;
    const NOT_CENTER: u32 = u32::MAX;
    let mut slot = vec![NOT_CENTER; g.vertex_count()];
    for (i, &c) in centers.iter().enumerate() {
        slot[c as usize] = i as u32;
    }
    let is_center = |v: VertexId| slot[v as usize] != NOT_CENTER;

    // Scatter 1: scalars plus common-neighbor lists, only where a center will read them.
    let records: Vec<Option<PivotRecord>> = engine.edge_map("ego:scatter-pivots", g, |e| {
        if !(is_center(e.u) || is_center(e.w)) {
            return None;
        }
        let mut common = Vec::new();
        intersect_into(g.neighbors(e.u), g.neighbors(e.w), &mut common);
        Some(PivotRecord {
            scalars: edge_scalars(g, e),
            common,
        })
    });

    // Gather 1: pivot sums and the raw neighbor-edge list of each center.
    let gathered = engine.vertex_reduce(
        "ego:gather-pivots",
        g,
        &records,
        Some(&centers),
        || (PivotSums::default(), Vec::new()),
        |(sums, pairs), v, a, rec| {
            let rec = rec.as_ref().expect("records exist for every center edge");
            let w = rec.scalars.wedge_at(v, a) as u64;
            let t = rec.scalars.tri as u64;
            sums.p1 += choose2(w);
            sums.p2 += choose2(t);
            sums.p3 += w * t;
            pairs.extend(rec.common.iter().map(|&p| (a.min(p), a.max(p))));
        },
    )?;

    // Apply 1: each edge (a, p) of the ego graph was reported once from each end.
    let start = Instant::now();
    let (pivots, lists): (Vec<PivotSums>, Vec<NeighborEdgeList>) = engine
        .install(|| {
            gathered
                .into_par_iter()
                .zip(centers.par_iter())
                .map(|((sums, raw), &v)| {
                    let raw_len = raw.len();
                    let list = NeighborEdgeList::from_pairs(raw);
                    if raw_len != 2 * list.len() {
                        return Err(Error::integrity(format!(
                            "center {v}: {raw_len} neighbor-edge reports for {} edges",
                            list.len()
                        )));
                    }
                    Ok((sums, list))
                })
                .collect::<Result<Vec<_>>>()
        })?
        .into_iter()
        .unzip();
    engine.record("ego:apply-neighbor-edges", start, 0, 0);

    // Scatter 2: each edge sees the neighbor-edge list of a center endpoint
    // and counts the 4-cliques through it.
    let shipped: u64 = g
        .edges()
        .map(|e| {
            [e.u, e.w]
                .iter()
                .filter(|&&x| is_center(x))
                .map(|&x| (lists[slot[x as usize] as usize].len() * 2 * ID_BYTES) as u64)
                .sum::<u64>()
        })
        .sum();
    engine.record("ego:scatter-neighbor-edges", Instant::now(), shipped, 0);
    let cliques: Vec<Option<u64>> = engine.edge_map("ego:scatter-cliques", g, |e| {
        let owner = if is_center(e.u) { e.u } else { e.w };
        if !is_center(owner) {
            return None;
        }
        let rec = records[e.index].as_ref().expect("record for center edge");
        Some(clique_count_from(
            &rec.common,
            &lists[slot[owner as usize] as usize],
        ))
    });
    drop(records);

    // Gather 2 and apply: f3 from the clique counts, then solve the pivot system.
    let clique_sums = engine.vertex_reduce(
        "ego:gather-cliques",
        g,
        &cliques,
        Some(&centers),
        || 0u64,
        |acc, _, _, n4| *acc += n4.expect("clique count for center edge"),
    )?;
    let solved: Vec<Result<EgoProfile>> = engine.vertex_map("ego:apply-solve", &centers, |v| {
        let i = slot[v as usize] as usize;
        solve_pivots(v, &pivots[i], clique_sums[i], g.degree(v) as u64)
    });
    let profiles = solved.into_iter().collect::<Result<Vec<_>>>()?;
    let neighbor_edge_counts = lists.iter().map(NeighborEdgeList::len).collect();
    Ok(EgoParallelRun {
        centers,
        profiles,
        pivots,
        neighbor_edge_counts,
    })
}

fn solve_pivots(v: VertexId, s: &PivotSums, clique_sum: u64, degree: u64) -> Result<EgoProfile> {
    let fail = |what: &str| Error::integrity(format!("center {v}: {what}"));
    if !clique_sum.is_multiple_of(3) {
        return Err(fail("4-clique sum not divisible by 3"));
    }
    let f3 = clique_sum / 3;
    let f2 =
        s.p2.checked_sub(3 * f3)
            .ok_or_else(|| fail("negative f2"))?;
    if !s.p3.is_multiple_of(2) {
        return Err(fail("odd wedge-triangle pivot sum"));
    }
    let f1 = (s.p3 / 2)
        .checked_sub(f2)
        .ok_or_else(|| fail("negative f1"))?;
    let rest = s.p1.checked_sub(f1).ok_or_else(|| fail("negative f0"))?;
    if rest % 3 != 0 {
        return Err(fail("empty-triple pivot sum not divisible by 3"));
    }
    let profile = EgoProfile {
        f0: rest / 3,
        f1,
        f2,
        f3,
    };
    if profile.total() as u128 != choose3(degree) {
        return Err(fail("ego counts do not sum to C(deg, 3)"));
    }
    Ok(profile)
}

/// Unordered pairs of `common` that are edges of the neighbor-edge list.
fn clique_count_from(common: &[VertexId], cn: &NeighborEdgeList) -> u64 {
    let mut n = 0;
    for (i, &a) in common.iter().enumerate() {
        for &b in &common[i + 1..] {
            if cn.contains(a, b) {
                n += 1;
            }
        }
    }
    n
}

/// Number of 4-cliques containing `e`, given the neighbor-edge list of one of
/// its endpoints.
pub fn per_edge_clique_count(g: &UndirectedGraph, e: EdgeRef, cn_u: &NeighborEdgeList) -> u64 {
    let mut common = Vec::new();
    intersect_into(g.neighbors(e.u), g.neighbors(e.w), &mut common);
    clique_count_from(&common, cn_u)
}

/// Neighbor-edge list of `v` computed directly from adjacency.
pub fn neighbor_edge_list(g: &UndirectedGraph, v: VertexId) -> NeighborEdgeList {
    let nb = g.neighbors(v);
    let mut pairs = Vec::new();
    let mut scratch = Vec::new();
    for &a in nb {
        scratch.clear();
        intersect_into(g.neighbors(a), nb, &mut scratch);
        pairs.extend(scratch.iter().filter(|&&b| b > a).map(|&b| (a, b)));
    }
    NeighborEdgeList(pairs)
}
