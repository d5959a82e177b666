//! Bernoulli edge sparsification and the unbiased profile estimator.
//!
//! Sampling keeps each edge independently with probability `p`. A triple of
//! type `H_j` in the original graph lands in type `H_i` of the sample with
//! probability `C(j, i) p^i (1-p)^(j-i)`, which gives an upper-triangular
//! transition matrix `M(p)`. The estimator applies `M(p)^-1` to the sampled
//! profile.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::UndirectedGraph;
use crate::profile::{EstimatedProfile, ProfileVector};

/// Edges per independently seeded block of the keep stream.
const MASK_BLOCK: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleParams {
    pub p: f64,
    pub seed: u64,
}

impl SampleParams {
    pub fn new(p: f64, seed: u64) -> Result<Self> {
        check_probability(p)?;
        Ok(SampleParams { p, seed })
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::usage(format!(
            "sampling probability {p} is outside (0, 1]"
        )))
    }
}

/// Per-edge keep indicators, indexed by edge ordinal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleMask(Vec<bool>);

impl SampleMask {
    pub fn all(edge_count: usize, keep: bool) -> Self {
        SampleMask(vec![keep; edge_count])
    }

    pub fn from_vec(bits: Vec<bool>) -> Self {
        SampleMask(bits)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn kept(&self) -> usize {
        self.0.iter().filter(|&&k| k).count()
    }

    #[inline]
    pub fn get(&self, edge: usize) -> bool {
        self.0[edge]
    }
}

/// Keep decisions for edges `0..edge_count`.
///
/// Edge `i` reads the `i`-th 64-bit word of a ChaCha8 stream keyed by `seed`.
/// Blocks seek to their first word, so the decision for an edge depends only on
/// `(seed, i)` and never on how the work is split across workers.
pub fn sample_mask(edge_count: usize, params: SampleParams) -> Result<SampleMask> {
    check_probability(params.p)?;
    let mut bits = vec![false; edge_count];
    bits.par_chunks_mut(MASK_BLOCK)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            // each edge consumes one u64 = two 32-bit stream words
            rng.set_word_pos((block * MASK_BLOCK) as u128 * 2);
            for keep in chunk {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                *keep = u < params.p;
            }
        });
    Ok(SampleMask(bits))
}

/// Samples every edge of `g` independently; the sample keeps all vertices.
pub fn sample_edges(
    g: &UndirectedGraph,
    params: SampleParams,
) -> Result<(UndirectedGraph, SampleMask)> {
    let mask = sample_mask(g.edge_count(), params)?;
    Ok((g.edge_filtered(mask.as_slice()), mask))
}

/// `M(p)`: entry `[i][j]` is the probability that an `H_j` triple becomes `H_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionMatrix(pub [[f64; 4]; 4]);

impl TransitionMatrix {
    pub fn apply(&self, n: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(n).map(|(m, x)| m * x).sum();
        }
        out
    }

    pub fn column_sums(&self) -> [f64; 4] {
        let mut s = [0.0; 4];
        for row in &self.0 {
            for (j, x) in row.iter().enumerate() {
                s[j] += x;
            }
        }
        s
    }
}

pub fn transition_matrix(p: f64) -> TransitionMatrix {
    let q = 1.0 - p;
    TransitionMatrix([
        [1.0, q, q * q, q * q * q],
        [0.0, p, 2.0 * p * q, 3.0 * p * q * q],
        [0.0, 0.0, p * p, 3.0 * p * p * q],
        [0.0, 0.0, 0.0, p * p * p],
    ])
}

/// Unbiased estimate of the original profile from the sampled profile `y`.
///
/// `x0` is taken as the complement `Σy − x1 − x2 − x3`, which is the same
/// expression as the direct formula and keeps the total exact up to rounding.
pub fn unbiased_estimate(y: ProfileVector<f64>, p: f64) -> Result<EstimatedProfile> {
    check_probability(p)?;
    let q = 1.0 - p;
    let (p2, p3) = (p * p, p * p * p);
    let x3 = y.n3 / p3;
    let x2 = y.n2 / p2 - 3.0 * q / p3 * y.n3;
    let x1 = y.n1 / p - 2.0 * q / p2 * y.n2 + 3.0 * q * q / p3 * y.n3;
    let total = y.n0 + y.n1 + y.n2 + y.n3;
    let x0 = total - (x1 + x2 + x3);
    Ok(ProfileVector {
        n0: x0,
        n1: x1,
        n2: x2,
        n3: x3,
    })
}

/// `E[Y] = M(p) n`.
pub fn expected_sampled_profile(n: ProfileVector<f64>, p: f64) -> Result<EstimatedProfile> {
    check_probability(p)?;
    Ok(ProfileVector::from_array(
        transition_matrix(p).apply(n.to_array()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn p_one_keeps_everything() {
        let g = generators::erdos_renyi(30, 0.3, 2);
        for seed in [0, 1, 99] {
            let (sub, mask) = sample_edges(&g, SampleParams::new(1.0, seed).unwrap()).unwrap();
            assert_eq!(mask.kept(), g.edge_count());
            assert_eq!(sub, g);
        }
    }

    #[test]
    fn masks_are_replayable() {
        let params = SampleParams::new(0.5, 1234).unwrap();
        let a = sample_mask(100_000, params).unwrap();
        let b = sample_mask(100_000, params).unwrap();
        assert_eq!(a, b);
        // a prefix of a longer stream is the shorter stream
        let c = sample_mask(40_000, params).unwrap();
        assert_eq!(&a.as_slice()[..40_000], c.as_slice());
        let d = sample_mask(100_000, SampleParams::new(0.5, 1235).unwrap()).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn mask_independent_of_pool_size() {
        let params = SampleParams::new(0.3, 77).unwrap();
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(6)
            .build()
            .unwrap();
        let a = one.install(|| sample_mask(70_001, params).unwrap());
        let b = many.install(|| sample_mask(70_001, params).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn c5_kept_edges_mean_matches_binomial() {
        let c5 = generators::cycle(5);
        let runs = 10_000;
        let kept: Vec<f64> = (0..runs)
            .map(|s| {
                let (_, m) = sample_edges(&c5, SampleParams::new(0.5, s).unwrap()).unwrap();
                m.kept() as f64
            })
            .collect();
        let mean = kept.iter().sum::<f64>() / runs as f64;
        // Binomial(5, 0.5): sd = sqrt(1.25)
        let se = (5.0f64 * 0.25).sqrt() / (runs as f64).sqrt();
        assert!((mean - 2.5).abs() <= 3.0 * se, "mean {mean}");
    }

    #[test]
    fn invalid_probability_is_rejected() {
        for p in [0.0, -0.5, 1.5, f64::NAN] {
            assert!(matches!(SampleParams::new(p, 0), Err(Error::Usage(_))));
            assert!(unbiased_estimate(ProfileVector::default(), p).is_err());
        }
    }

    #[test]
    fn transition_matrix_examples() {
        let id = transition_matrix(1.0);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(id.0[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        let half = transition_matrix(0.5);
        let col: Vec<f64> = (0..4).map(|i| half.0[i][3]).collect();
        assert_eq!(col, vec![0.125, 0.375, 0.375, 0.125]);
        for p in [0.01, 0.3, 0.5, 0.9] {
            for s in transition_matrix(p).column_sums() {
                assert!(close(s, 1.0, 1e-15));
            }
        }
    }

    #[test]
    fn estimator_examples() {
        let y = ProfileVector::from_array([3.0, 5.0, 7.0, 11.0]);
        assert_eq!(unbiased_estimate(y, 1.0).unwrap(), y);
        let x = unbiased_estimate(ProfileVector::from_array([0.0, 0.0, 0.0, 1.0]), 0.5).unwrap();
        assert_eq!(x.to_array(), [-1.0, 6.0, -12.0, 8.0]);
    }

    #[test]
    fn expected_profile_examples() {
        let k4 = ProfileVector::from_array([0.0, 0.0, 0.0, 4.0]);
        let e = expected_sampled_profile(k4, 0.5).unwrap();
        assert_eq!(e.to_array(), [0.5, 1.5, 1.5, 0.5]);
        assert_eq!(expected_sampled_profile(k4, 1.0).unwrap(), k4);
    }

    /// Solves `M(p) x = y` by back substitution; independent of the closed form.
    fn back_substitute(p: f64, y: [f64; 4]) -> [f64; 4] {
        let m = transition_matrix(p).0;
        let mut x = [0.0; 4];
        for i in (0..4).rev() {
            let tail: f64 = (i + 1..4).map(|j| m[i][j] * x[j]).sum();
            x[i] = (y[i] - tail) / m[i][i];
        }
        x
    }

    proptest! {
        #[test]
        fn estimator_inverts_transition(
            n in prop::array::uniform4(0u32..1_000_000),
            p in 0.05f64..=1.0,
        ) {
            let n = ProfileVector::from_array(n.map(|v| v as f64));
            let x = unbiased_estimate(expected_sampled_profile(n, p).unwrap(), p).unwrap();
            for (a, b) in x.to_array().iter().zip(n.to_array()) {
                prop_assert!(close(*a, b, 1e-7), "{a} vs {b}");
            }
        }

        #[test]
        fn estimator_matches_back_substitution(
            y in prop::array::uniform4(0u32..1_000_000),
            p in 0.05f64..=1.0,
        ) {
            let y = y.map(|v| v as f64);
            let x = unbiased_estimate(ProfileVector::from_array(y), p).unwrap().to_array();
            let scale = y.iter().sum::<f64>() / p.powi(3);
            for (a, b) in x.iter().zip(back_substitute(p, y)) {
                prop_assert!((a - b).abs() <= 1e-9 * (1.0 + scale), "{a} vs {b}");
            }
        }

        #[test]
        fn estimator_preserves_total(
            y in prop::array::uniform4(0u64..1_000_000_000),
            p in 0.01f64..=1.0,
        ) {
            let y = ProfileVector::from_array(y.map(|v| v as f64));
            let x = unbiased_estimate(y, p).unwrap();
            let scale = x.to_array().iter().map(|v| v.abs()).fold(y.total(), f64::max);
            prop_assert!((x.total() - y.total()).abs() <= 1e-12 * scale);
        }
    }
}
