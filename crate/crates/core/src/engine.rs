//! Synchronous scatter/gather executor.
//!
//! A scatter phase maps every edge to a record; a gather phase folds, for each
//! vertex, the records of its incident edges. Both run on a dedicated rayon
//! pool. Outputs never depend on the worker count: scatter results are written
//! by edge ordinal and each vertex folds its own edges in adjacency order.
//!
//! Communication is accounted arithmetically. A scatter "sends" the wire size
//! of every record it produces; a gather "receives" the wire size of every
//! record consumed, once per consuming endpoint.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, UndirectedGraph, VertexId};

/// Width of a vertex id on the (emulated) wire.
pub const ID_BYTES: usize = 4;

/// Number of bytes a record occupies when shipped between phases.
pub trait WireSize {
    fn wire_bytes(&self) -> usize;
}

macro_rules! fixed_width {
    ($($t:ty),*) => {
        $(impl WireSize for $t {
            #[inline]
            fn wire_bytes(&self) -> usize {
                std::mem::size_of::<$t>()
            }
        })*
    };
}
fixed_width!(u8, u16, u32, u64, u128, i64, f64);

impl WireSize for bool {
    fn wire_bytes(&self) -> usize {
        1
    }
}

impl<T: WireSize> WireSize for Option<T> {
    #[inline]
    fn wire_bytes(&self) -> usize {
        self.as_ref().map_or(0, WireSize::wire_bytes)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseStats {
    pub name: String,
    #[serde(rename = "seconds")]
    pub elapsed: f64,
    pub bytes_scattered: u64,
    pub bytes_gathered: u64,
    #[serde(rename = "workers")]
    pub worker_count: usize,
}

pub struct Engine {
    pool: rayon::ThreadPool,
    workers: usize,
    phases: Mutex<Vec<PhaseStats>>,
}

impl Engine {
    pub fn new(workers: usize) -> Result<Self> {
        if workers == 0 {
            return Err(Error::usage("worker count must be at least 1"));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .thread_name(|i| format!("triprof-worker-{i}"))
            .build()
            .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))?;
        Ok(Engine {
            pool,
            workers,
            phases: Mutex::new(Vec::new()),
        })
    }

    /// One worker per available hardware thread.
    pub fn with_available_parallelism() -> Result<Self> {
        let n = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self::new(n)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `f` inside the engine's pool so nested rayon work uses its workers.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Scatter: `out[e.index] = f(e)` for every edge.
    pub fn edge_map<R, F>(&self, name: &str, g: &UndirectedGraph, f: F) -> Vec<R>
    where
        R: Send + WireSize,
        F: Fn(EdgeRef) -> R + Sync,
    {
        let start = Instant::now();
        let pairs = g.edge_pairs();
        let out: Vec<R> = self.pool.install(|| {
            pairs
                .par_iter()
                .enumerate()
                .map(|(index, &(u, w))| f(EdgeRef { u, w, index }))
                .collect()
        });
        let bytes = out.iter().map(|r| r.wire_bytes() as u64).sum();
        self.record(name, start, bytes, 0);
        out
    }

    /// Gather: for each vertex `v` (all of them, or only `vertices` when given),
    /// folds `fold(acc, v, other, &per_edge[e])` over incident edges `e = {v, other}`
    /// in adjacency order. With a vertex subset the output is aligned with it.
    pub fn vertex_reduce<R, A, I, F>(
        &self,
        name: &str,
        g: &UndirectedGraph,
        per_edge: &[R],
        vertices: Option<&[VertexId]>,
        init: I,
        fold: F,
    ) -> Result<Vec<A>>
    where
        R: Sync + WireSize,
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, VertexId, VertexId, &R) + Sync,
    {
        if per_edge.len() != g.edge_count() {
            return Err(Error::usage(format!(
                "{name}: {} edge records for a graph with {} edges",
                per_edge.len(),
                g.edge_count()
            )));
        }
        if let Some(vs) = vertices {
            for &v in vs {
                g.check_vertex(v)?;
            }
        }
        let start = Instant::now();
        let bytes = AtomicU64::new(0);
        let one = |v: VertexId| {
            let mut acc = init();
            let mut received = 0u64;
            for (other, e) in g.incident(v) {
                let rec = &per_edge[e];
                received += rec.wire_bytes() as u64;
                fold(&mut acc, v, other, rec);
            }
            bytes.fetch_add(received, Ordering::Relaxed);
            acc
        };
        let out: Vec<A> = self.pool.install(|| match vertices {
            None => (0..g.vertex_count() as VertexId)
                .into_par_iter()
                .map(one)
                .collect(),
            Some(vs) => vs.par_iter().map(|&v| one(v)).collect(),
        });
        self.record(name, start, 0, bytes.into_inner());
        Ok(out)
    }

    /// Apply: a per-vertex computation with no communication.
    pub fn vertex_map<A, F>(&self, name: &str, vertices: &[VertexId], f: F) -> Vec<A>
    where
        A: Send,
        F: Fn(VertexId) -> A + Sync,
    {
        let start = Instant::now();
        let out = self
            .pool
            .install(|| vertices.par_iter().map(|&v| f(v)).collect());
        self.record(name, start, 0, 0);
        out
    }

    /// Apply over all vertices, writing `out[v]` in place; stops at the first error.
    pub fn try_apply<A, F>(&self, name: &str, out: &mut [A], f: F) -> Result<()>
    where
        A: Send,
        F: Fn(VertexId, &mut A) -> Result<()> + Sync,
    {
        let start = Instant::now();
        let res = self.pool.install(|| {
            out.par_iter_mut()
                .enumerate()
                .try_for_each(|(v, slot)| f(v as VertexId, slot))
        });
        self.record(name, start, 0, 0);
        res
    }

    /// Records a phase run outside the scatter/gather helpers.
    pub fn record(&self, name: &str, start: Instant, scattered: u64, gathered: u64) {
        let stats = PhaseStats {
            name: name.to_owned(),
            elapsed: start.elapsed().as_secs_f64(),
            bytes_scattered: scattered,
            bytes_gathered: gathered,
            worker_count: self.workers,
        };
        self.phases.lock().expect("phase log poisoned").push(stats);
    }

    /// Position in the phase log, for use with [`coalesce_since`](Self::coalesce_since).
    pub fn phase_mark(&self) -> usize {
        self.phases.lock().expect("phase log poisoned").len()
    }

    /// Merges phases logged after `mark` that share a name, summing times and
    /// byte counters, in order of first appearance.
    pub fn coalesce_since(&self, mark: usize) {
        let mut log = self.phases.lock().expect("phase log poisoned");
        let at = mark.min(log.len());
        let tail = log.split_off(at);
        let mut merged: Vec<PhaseStats> = Vec::new();
        for p in tail {
            match merged.iter_mut().find(|m| m.name == p.name) {
                Some(m) => {
                    m.elapsed += p.elapsed;
                    m.bytes_scattered += p.bytes_scattered;
                    m.bytes_gathered += p.bytes_gathered;
                }
                None => merged.push(p),
            }
        }
        log.extend(merged);
    }

    pub fn phases(&self) -> Vec<PhaseStats> {
        self.phases.lock().expect("phase log poisoned").clone()
    }

    pub fn take_phases(&self) -> Vec<PhaseStats> {
        std::mem::take(&mut *self.phases.lock().expect("phase log poisoned"))
    }
}

impl std::fmt::Debug for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Engine")
            .field("workers", &self.workers)
            .finish()
    }
}
