//! Brute-force reference counts.
//!
//! Everything here works from a dense adjacency bit matrix built from the edge
//! pairs alone and enumerates vertex subsets directly. Nothing is shared with
//! the scatter/gather pipelines, so agreement between the two is meaningful.

use crate::ego::EgoProfile;
use crate::error::{Error, Result};
use crate::graph::{UndirectedGraph, VertexId};
use crate::local::LocalProfile;
use crate::profile::ExactProfile;

pub const DEFAULT_VERTEX_CAP: usize = 256;
pub const DEFAULT_CLIQUE_CAP: usize = 128;
pub const DEFAULT_DEGREE_CAP: usize = 512;

struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn from_graph(g: &UndirectedGraph) -> Self {
        let n = g.vertex_count();
        let words = n.div_ceil(64);
        let mut m = BitMatrix {
            n,
            words,
            bits: vec![0; n * words],
        };
        for &(u, w) in g.edge_pairs() {
            m.set(u as usize, w as usize);
            m.set(w as usize, u as usize);
        }
        m
    }

    fn set(&mut self, a: usize, b: usize) {
        self.bits[a * self.words + b / 64] |= 1 << (b % 64);
    }

    #[inline]
    fn get(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    fn row(&self, a: usize) -> Vec<usize> {
        (0..self.n).filter(|&b| self.get(a, b)).collect()
    }
}

fn cap_check(what: &str, size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(Error::usage(format!(
            "{what} {size} exceeds oracle cap {cap}"
        )))
    } else {
        Ok(())
    }
}

/// Global 3-profile by classifying all `C(|V|, 3)` triples.
pub fn brute_force_profile(g: &UndirectedGraph) -> Result<ExactProfile> {
    brute_force_profile_capped(g, DEFAULT_VERTEX_CAP)
}

pub fn brute_force_profile_capped(g: &UndirectedGraph, cap: usize) -> Result<ExactProfile> {
    cap_check("vertex count", g.vertex_count(), cap)?;
    let m = BitMatrix::from_graph(g);
    let mut classes = [0u128; 4];
    for i in 0..m.n {
        for j in i + 1..m.n {
            for k in j + 1..m.n {
                let edges = m.get(i, j) as usize + m.get(i, k) as usize + m.get(j, k) as usize;
                classes[edges] += 1;
            }
        }
    }
    Ok(ExactProfile::from_array(classes))
}

/// Per-vertex role census over every triple containing the vertex.
pub fn brute_force_local(g: &UndirectedGraph) -> Result<Vec<LocalProfile>> {
    brute_force_local_capped(g, DEFAULT_VERTEX_CAP)
}

pub fn brute_force_local_capped(g: &UndirectedGraph, cap: usize) -> Result<Vec<LocalProfile>> {
    cap_check("vertex count", g.vertex_count(), cap)?;
    let m = BitMatrix::from_graph(g);
    let mut out = vec![LocalProfile::default(); m.n];
    for (v, lp) in out.iter_mut().enumerate() {
        for a in 0..m.n {
            for b in a + 1..m.n {
                if a == v || b == v {
                    continue;
                }
                let va = m.get(v, a);
                let vb = m.get(v, b);
                let ab = m.get(a, b);
                match (va as u8 + vb as u8, ab) {
                    (0, false) => lp.n0 += 1,
                    (0, true) => lp.n1_d += 1,
                    (1, false) => lp.n1_e += 1,
                    (1, true) => lp.n2_e += 1,
                    (2, false) => lp.n2_c += 1,
                    (2, true) => lp.n3 += 1,
                    _ => unreachable!(),
                }
            }
        }
    }
    Ok(out)
}

/// 3-profile of the subgraph induced by the neighbors of `v`.
pub fn brute_force_ego(g: &UndirectedGraph, v: VertexId) -> Result<EgoProfile> {
    brute_force_ego_capped(g, v, DEFAULT_DEGREE_CAP)
}

pub fn brute_force_ego_capped(g: &UndirectedGraph, v: VertexId, cap: usize) -> Result<EgoProfile> {
    g.check_vertex(v)?;
    let m = BitMatrix::from_graph(g);
    let nb = m.row(v as usize);
    cap_check("degree", nb.len(), cap)?;
    let mut classes = [0u64; 4];
    for i in 0..nb.len() {
        for j in i + 1..nb.len() {
            for k in j + 1..nb.len() {
                let (a, b, c) = (nb[i], nb[j], nb[k]);
                let edges = m.get(a, b) as usize + m.get(a, c) as usize + m.get(b, c) as usize;
                classes[edges] += 1;
            }
        }
    }
    let [f0, f1, f2, f3] = classes;
    Ok(EgoProfile { f0, f1, f2, f3 })
}

/// Number of 4-cliques, by enumerating all 4-subsets.
pub fn brute_force_four_cliques(g: &UndirectedGraph) -> Result<u64> {
    brute_force_four_cliques_capped(g, DEFAULT_CLIQUE_CAP)
}

pub fn brute_force_four_cliques_capped(g: &UndirectedGraph, cap: usize) -> Result<u64> {
    cap_check("vertex count", g.vertex_count(), cap)?;
    let m = BitMatrix::from_graph(g);
    let n = m.n;
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in c + 1..n {
                    if m.get(a, b)
                        && m.get(a, c)
                        && m.get(a, d)
                        && m.get(b, c)
                        && m.get(b, d)
                        && m.get(c, d)
                    {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::profile::{choose2, choose3};

    #[test]
    fn golden_global_profiles() {
        assert_eq!(
            brute_force_profile(&generators::complete(4))
                .unwrap()
                .to_array(),
            [0, 0, 0, 4]
        );
        assert_eq!(
            brute_force_profile(&generators::cycle(5))
                .unwrap()
                .to_array(),
            [0, 5, 5, 0]
        );
        let edge_plus_isolated = UndirectedGraph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(
            brute_force_profile(&edge_plus_isolated).unwrap().to_array(),
            [0, 1, 0, 0]
        );
    }

    #[test]
    fn local_census_examples() {
        let c5 = brute_force_local(&generators::cycle(5)).unwrap();
        for lp in &c5 {
            assert_eq!(lp.to_array(), [0, 2, 1, 2, 1, 0]);
        }
        let star = brute_force_local(&generators::star(3)).unwrap();
        assert_eq!(star[0].to_array(), [0, 0, 0, 0, 3, 0]);
        assert_eq!(star[1].to_array(), [1, 0, 0, 2, 0, 0]);
    }

    #[test]
    fn local_sums_and_aggregation() {
        for seed in 0..10 {
            let g = generators::erdos_renyi(20, 0.3, seed);
            let locals = brute_force_local(&g).unwrap();
            let n = g.vertex_count() as u64;
            let mut sums = [0u64; 4];
            for lp in &locals {
                assert_eq!(lp.total(), choose2(n - 1));
                sums[0] += lp.n0;
                sums[1] += lp.n1_e + lp.n1_d;
                sums[2] += lp.n2_e + lp.n2_c;
                sums[3] += lp.n3;
            }
            let global = brute_force_profile(&g).unwrap();
            assert_eq!(global.total(), choose3(n));
            assert_eq!(
                sums.map(|s| s as u128 / 3),
                global.to_array(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn ego_examples() {
        let k13 = generators::star(3);
        assert_eq!(
            brute_force_ego(&k13, 0).unwrap(),
            EgoProfile {
                f0: 1,
                f1: 0,
                f2: 0,
                f3: 0
            }
        );
        assert_eq!(
            brute_force_ego(&generators::complete(4), 0).unwrap(),
            EgoProfile {
                f0: 0,
                f1: 0,
                f2: 0,
                f3: 1
            }
        );
        assert_eq!(
            brute_force_ego(&generators::cycle(5), 2).unwrap(),
            EgoProfile::default()
        );
        assert_eq!(
            brute_force_ego(&generators::star(3), 1).unwrap(),
            EgoProfile::default()
        );
    }

    #[test]
    fn four_clique_counts() {
        assert_eq!(
            brute_force_four_cliques(&generators::complete(4)).unwrap(),
            1
        );
        assert_eq!(
            brute_force_four_cliques(&generators::complete(5)).unwrap(),
            5
        );
        assert_eq!(brute_force_four_cliques(&generators::cycle(5)).unwrap(), 0);
    }

    #[test]
    fn caps_are_enforced() {
        let big = generators::cycle(300);
        assert!(matches!(brute_force_profile(&big), Err(Error::Usage(_))));
        assert!(brute_force_four_cliques(&generators::cycle(129)).is_err());
        assert!(brute_force_ego_capped(&generators::star(5), 0, 4).is_err());
    }
}
