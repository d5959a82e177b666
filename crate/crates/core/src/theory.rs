//! Sparsifier analysis: per-edge extremes, the concentration conditions on
//! `(p, ε)`, and exact evaluation of the indicator polynomials that describe a
//! sampled profile in terms of the keep variables `t_e`.
//!
//! For a mask `t`, summing over the single-edge triples, wedges `(e, f)` and
//! triangles `(e, f, g)` of the original graph:
//!
//! ```text
//! S1 = Σ_H1 t_e            D1 = Σ_wedge (t_e + t_f)      D2 = Σ_wedge t_e t_f
//! T1 = Σ_tri (t_e+t_f+t_g) T2 = Σ_tri (t_e t_f + t_f t_g + t_g t_e)
//! Y3 = Σ_tri t_e t_f t_g
//! Y1 = S1 + D1 - 2 D2 + T1 - 2 T2 + 3 Y3
//! Y2 = D2 + T2 - 3 Y3
//! ```

use serde::Serialize;

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::graph::{intersect_into, UndirectedGraph, VertexId};
use crate::local::scatter_edge_scalars;
use crate::profile::{choose2, choose3, ExactProfile};
use crate::sampling::{check_probability, SampleMask};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EdgeExtremes {
    /// Largest number of single-edge triples on one edge.
    pub alpha: u64,
    /// Largest number of wedges containing one edge.
    pub beta: u64,
    /// Largest number of triangles containing one edge.
    pub delta: u64,
}

pub fn edge_extremes(engine: &Engine, g: &UndirectedGraph) -> Result<EdgeExtremes> {
    if g.edge_count() == 0 {
        return Err(Error::usage("edge extremes need at least one edge"));
    }
    let scalars = scatter_edge_scalars(engine, g);
    Ok(scalars
        .iter()
        .fold(EdgeExtremes::default(), |acc, s| EdgeExtremes {
            alpha: acc.alpha.max(s.iso as u64),
            beta: acc.beta.max(s.wedge_at_u as u64 + s.wedge_at_w as u64),
            delta: acc.delta.max(s.tri as u64),
        }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    E,
    Two,
}

impl LogBase {
    fn ln_scale(self) -> f64 {
        match self {
            LogBase::E => 1.0,
            LogBase::Two => std::f64::consts::LN_2,
        }
    }

    /// `log(m^k)`, evaluated as `k · log m`.
    fn log_pow(self, m: f64, k: f64) -> f64 {
        k * m.ln() / self.ln_scale()
    }
}

/// Which statement of the conditions to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionForm {
    /// The simplified four inequalities.
    Final,
    /// The form before redundant max-terms were dropped.
    PreFinal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoremInputs {
    pub p: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub log_base: LogBase,
    pub form: ConditionForm,
}

impl TheoremInputs {
    pub fn new(p: f64, epsilon: f64, gamma: f64) -> Self {
        TheoremInputs {
            p,
            epsilon,
            gamma,
            log_base: LogBase::E,
            form: ConditionForm::Final,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionValue {
    pub name: &'static str,
    /// `None` when the left side divides by a zero count.
    pub lhs: Option<f64>,
    pub rhs: f64,
    pub satisfied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub conditions: Vec<ConditionValue>,
    pub feasible: bool,
    pub p: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub log_base: LogBase,
    pub form: ConditionForm,
    pub edge_count: u64,
    pub extremes: EdgeExtremes,
    /// `12 ε C(|V|, 3)`.
    pub error_bound: f64,
    /// `1 - 1/m^γ`.
    pub confidence: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

/// `a_k = 8^k √(k!)`.
pub fn kim_vu_constant(k: u32) -> f64 {
    let factorial: f64 = (1..=k).map(f64::from).product();
    8f64.powi(k as i32) * factorial.sqrt()
}

/// Evaluates the four sufficient conditions for `‖X − n‖∞ ≤ 12ε C(|V|,3)` with
/// probability at least `1 − m^−γ`.
///
/// A left side whose denominator involves a zero count (or vanishing extremes)
/// is reported as unsatisfied with a diagnostic instead of dividing by zero.
pub fn check_theorem_conditions(
    profile: &ExactProfile,
    extremes: &EdgeExtremes,
    edge_count: u64,
    inputs: TheoremInputs,
) -> Result<TheoremReport> {
    check_probability(inputs.p)?;
    if !(inputs.epsilon > 0.0 && inputs.epsilon.is_finite()) {
        return Err(Error::usage(format!(
            "epsilon {} must be positive",
            inputs.epsilon
        )));
    }
    if !(inputs.gamma > 0.0 && inputs.gamma.is_finite()) {
        return Err(Error::usage(format!(
            "gamma {} must be positive",
            inputs.gamma
        )));
    }
    if edge_count == 0 {
        return Err(Error::usage("theorem conditions need at least one edge"));
    }

    let (p, eps, gamma) = (inputs.p, inputs.epsilon, inputs.gamma);
    let m = edge_count as f64;
    let (a1, a2, a3) = (kim_vu_constant(1), kim_vu_constant(2), kim_vu_constant(3));
    let lb = inputs.log_base;
    let eps2 = eps * eps;
    let rhs_empty = a3 * a3 * lb.log_pow(m, 2.0 + gamma).powi(6) / eps2;
    let rhs_tri = rhs_empty;
    let rhs_edge = a1 * a1 * lb.log_pow(m, gamma).powi(2) / eps2;
    let rhs_wedge = a2 * a2 * lb.log_pow(m, 1.0 + gamma).powi(4) / eps2;

    let n0 = profile.n0 as f64;
    let n1 = profile.n1 as f64;
    let n2 = profile.n2 as f64;
    let n3 = profile.n3 as f64;
    let (alpha, beta, delta) = (
        extremes.alpha as f64,
        extremes.beta as f64,
        extremes.delta as f64,
    );

    let zero = |what: &str| Err::<f64, String>(format!("{what} is zero; condition cannot hold"));
    let need = |count: f64, what: &str| {
        if count > 0.0 {
            Ok(())
        } else {
            Err(format!("{what} is zero; condition cannot hold"))
        }
    };

    let empty_lhs = {
        let worst = alpha.max(beta).max(delta);
        if worst > 0.0 {
            Ok(n0 / (3.0 * worst))
        } else {
            zero("max(alpha, beta, delta)")
        }
    };
    let tri_lhs = need(n3, "n3").map(|_| p / (1.0 / n3.cbrt()).max(delta / n3));
    let (edge_lhs, wedge_lhs) = match inputs.form {
        ConditionForm::Final => (
            need(n1, "n1").and_then(|_| {
                if alpha > 0.0 {
                    Ok(p / (alpha / n1))
                } else {
                    zero("alpha")
                }
            }),
            need(n2, "n2").map(|_| p / (beta / n2).max(1.0 / n2.sqrt())),
        ),
        ConditionForm::PreFinal => (
            need(n1, "n1")
                .and_then(|_| need(n2, "n2"))
                .and_then(|_| need(n3, "n3"))
                .and_then(|_| {
                    let d = (alpha / n1).max(beta / (2.0 * n2)).max(delta / (3.0 * n3));
                    if d > 0.0 {
                        Ok(p / d)
                    } else {
                        zero("max(alpha/n1, beta/2n2, delta/3n3)")
                    }
                }),
            need(n2, "n2").and_then(|_| need(n3, "n3")).map(|_| {
                let d = (beta / n2)
                    .max(2.0 * delta / (3.0 * n3))
                    .max(1.0 / n2.sqrt())
                    .max(1.0 / n3.sqrt());
                p / d
            }),
        ),
    };

    let cond = |name, lhs: std::result::Result<f64, String>, rhs: f64| match lhs {
        Ok(l) => ConditionValue {
            name,
            lhs: Some(l),
            rhs,
            satisfied: l >= rhs,
            diagnostic: None,
        },
        Err(msg) => ConditionValue {
            name,
            lhs: None,
            rhs,
            satisfied: false,
            diagnostic: Some(msg),
        },
    };
    let conditions = vec![
        cond("empty", empty_lhs, rhs_empty),
        cond("triangle", tri_lhs, rhs_tri),
        cond("edge", edge_lhs, rhs_edge),
        cond("wedge", wedge_lhs, rhs_wedge),
    ];
    let feasible = conditions.iter().all(|c| c.satisfied);
    let total = profile.total() as f64;
    Ok(TheoremReport {
        conditions,
        feasible,
        p,
        epsilon: eps,
        gamma,
        log_base: lb,
        form: inputs.form,
        edge_count,
        extremes: *extremes,
        error_bound: 12.0 * eps * total,
        confidence: 1.0 - m.powf(-gamma),
        a1,
        a2,
        a3,
    })
}

/// Exact values of the indicator polynomials for one mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PolynomialValues {
    pub y0: u128,
    pub y1: u128,
    pub y2: u128,
    pub y3: u128,
    pub s1: u128,
    pub d1: u128,
    pub d2: u128,
    pub t1: u128,
    pub t2: u128,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IdentityResiduals {
    /// `y1 − (s1 + d1 − 2 d2 + t1 − 2 t2 + 3 y3)`
    pub y1: i128,
    /// `y2 − (d2 + t2 − 3 y3)`
    pub y2: i128,
    /// `y0 + y1 + y2 + y3 − C(|V|, 3)`
    pub total: i128,
}

impl PolynomialValues {
    pub fn sampled_profile(&self) -> ExactProfile {
        ExactProfile::from_array([self.y0, self.y1, self.y2, self.y3])
    }

    pub fn residuals(&self, vertex_count: u64) -> IdentityResiduals {
        let i = |x: u128| x as i128;
        IdentityResiduals {
            y1: i(self.y1)
                - (i(self.s1) + i(self.d1) - 2 * i(self.d2) + i(self.t1) - 2 * i(self.t2)
                    + 3 * i(self.y3)),
            y2: i(self.y2) - (i(self.d2) + i(self.t2) - 3 * i(self.y3)),
            total: i(self.y0 + self.y1 + self.y2 + self.y3) - i(choose3(vertex_count)),
        }
    }
}

/// Number of wedges plus triangles the polynomial evaluation will enumerate.
pub fn enumeration_size(g: &UndirectedGraph) -> u128 {
    (0..g.vertex_count() as VertexId)
        .map(|v| choose2(g.degree(v) as u64) as u128)
        .sum()
}

/// Evaluates all polynomials on `mask` by enumerating the single-edge triples,
/// wedges and triangles of the original graph.
///
/// Cost is proportional to the number of connected triples, so this is meant
/// for graphs small enough that `Σ C(deg, 2)` is manageable.
pub fn evaluate_polynomials(g: &UndirectedGraph, mask: &SampleMask) -> Result<PolynomialValues> {
    if mask.len() != g.edge_count() {
        return Err(Error::usage(format!(
            "mask has {} entries for a graph with {} edges",
            mask.len(),
            g.edge_count()
        )));
    }
    let t = |e: usize| mask.get(e) as u128;
    let mut pv = PolynomialValues::default();
    let mut h1 = 0u128;
    let mut wedges = 0u128;
    let mut triangles = 0u128;
    let n = g.vertex_count();

    // Single-edge triples: edge e plus a vertex adjacent to neither endpoint.
    let mut union_mark = vec![u32::MAX; n];
    for e in g.edges() {
        let mut seen = 0u64;
        for &x in g.neighbors(e.u).iter().chain(g.neighbors(e.w)) {
            if union_mark[x as usize] != e.index as u32 {
                union_mark[x as usize] = e.index as u32;
                seen += 1;
            }
        }
        let iso = n as u128 - seen as u128;
        h1 += iso;
        pv.s1 += iso * t(e.index);
        pv.y0 += iso * (1 - t(e.index));
        pv.y1 += iso * t(e.index);
    }

    // Wedges: center c with non-adjacent neighbors a < b.
    for c in 0..n as VertexId {
        let arms: Vec<(VertexId, usize)> = g.incident(c).collect();
        for (i, &(a, ea)) in arms.iter().enumerate() {
            for &(b, eb) in &arms[i + 1..] {
                if g.has_edge(a, b) {
                    continue;
                }
                wedges += 1;
                let (te, tf) = (t(ea), t(eb));
                pv.d1 += te + tf;
                pv.d2 += te * tf;
                pv.y0 += (1 - te) * (1 - tf);
                pv.y1 += te * (1 - tf) + tf * (1 - te);
                pv.y2 += te * tf;
            }
        }
    }

    // Triangles u < w < x.
    let mut common = Vec::new();
    for e in g.edges() {
        common.clear();
        intersect_into(g.neighbors(e.u), g.neighbors(e.w), &mut common);
        for &x in common.iter().filter(|&&x| x > e.w) {
            triangles += 1;
            let ef = g.edge_index(e.u, x).expect("triangle edge");
            let eg = g.edge_index(e.w, x).expect("triangle edge");
            let (a, b, c) = (t(e.index), t(ef), t(eg));
            pv.t1 += a + b + c;
            pv.t2 += a * b + b * c + c * a;
            pv.y3 += a * b * c;
            pv.y0 += (1 - a) * (1 - b) * (1 - c);
            pv.y1 += a * (1 - b) * (1 - c) + b * (1 - a) * (1 - c) + c * (1 - a) * (1 - b);
            pv.y2 += a * b * (1 - c) + b * c * (1 - a) + a * (1 - b) * c;
        }
    }

    let n0 = choose3(n as u64)
        .checked_sub(h1 + wedges + triangles)
        .ok_or_else(|| Error::integrity("more connected triples than triples"))?;
    pv.y0 += n0;
    Ok(pv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::oracle;
    use crate::sampling::{sample_mask, SampleParams};

    fn engine() -> Engine {
        Engine::new(1).unwrap()
    }

    /// Per-edge census straight from the definition, no shared code.
    fn census_extremes(g: &UndirectedGraph) -> EdgeExtremes {
        let n = g.vertex_count() as VertexId;
        let mut out = EdgeExtremes::default();
        for e in g.edges() {
            let (mut iso, mut wedge, mut tri) = (0, 0, 0);
            for x in (0..n).filter(|&x| x != e.u && x != e.w) {
                match (g.has_edge(x, e.u), g.has_edge(x, e.w)) {
                    (false, false) => iso += 1,
                    (true, true) => tri += 1,
                    _ => wedge += 1,
                }
            }
            out.alpha = out.alpha.max(iso);
            out.beta = out.beta.max(wedge);
            out.delta = out.delta.max(tri);
        }
        out
    }

    #[test]
    fn extremes_examples() {
        let e = engine();
        let k4 = edge_extremes(&e, &generators::complete(4)).unwrap();
        assert_eq!(
            k4,
            EdgeExtremes {
                alpha: 0,
                beta: 0,
                delta: 2
            }
        );
        let c5 = edge_extremes(&e, &generators::cycle(5)).unwrap();
        assert_eq!(
            c5,
            EdgeExtremes {
                alpha: 1,
                beta: 2,
                delta: 0
            }
        );
        let star = edge_extremes(&e, &generators::star(3)).unwrap();
        assert_eq!(
            star,
            EdgeExtremes {
                alpha: 0,
                beta: 2,
                delta: 0
            }
        );
        let empty = UndirectedGraph::from_edges(3, []).unwrap();
        assert!(matches!(edge_extremes(&e, &empty), Err(Error::Usage(_))));
    }

    #[test]
    fn extremes_match_census() {
        for seed in 0..30 {
            let g = generators::erdos_renyi(30, [0.05, 0.2, 0.5][seed as usize % 3], seed);
            if g.edge_count() == 0 {
                continue;
            }
            let got = edge_extremes(&engine(), &g).unwrap();
            assert_eq!(got, census_extremes(&g), "seed {seed}");
            let dmax = g.max_degree() as u64;
            assert!(got.alpha <= g.vertex_count() as u64);
            assert!(got.beta <= 2 * (dmax - 1));
            assert!(got.delta < dmax);
        }
    }

    #[test]
    fn kim_vu_constants() {
        assert_eq!(kim_vu_constant(1), 8.0);
        assert!((kim_vu_constant(2) - 64.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((kim_vu_constant(3) - 512.0 * 6f64.sqrt()).abs() < 1e-9);
    }

    fn c5_report(eps: f64) -> TheoremReport {
        let c5 = generators::cycle(5);
        let profile = oracle::brute_force_profile(&c5).unwrap();
        let ext = edge_extremes(&engine(), &c5).unwrap();
        check_theorem_conditions(&profile, &ext, 5, TheoremInputs::new(0.5, eps, 1.0)).unwrap()
    }

    #[test]
    fn c5_is_infeasible() {
        let r = c5_report(0.1);
        assert!(!r.feasible);
        assert_eq!(r.conditions.len(), 4);
        // n3 = 0 makes the triangle condition vacuous
        let tri = &r.conditions[1];
        assert!(tri.lhs.is_none() && tri.diagnostic.is_some());
        // the rest are finite but far below their thresholds
        for c in [&r.conditions[0], &r.conditions[2], &r.conditions[3]] {
            assert!(c.lhs.unwrap() < c.rhs, "{c:?}");
        }
        assert_eq!(r.error_bound, 12.0 * 0.1 * 10.0);
        assert_eq!(r.confidence, 1.0 - 1.0 / 5.0);
    }

    #[test]
    fn doubling_epsilon_quarters_every_threshold() {
        let a = c5_report(0.1);
        let b = c5_report(0.2);
        for (x, y) in a.conditions.iter().zip(&b.conditions) {
            assert_eq!(y.rhs, x.rhs / 4.0);
            assert_eq!(x.lhs, y.lhs);
        }
    }

    #[test]
    fn thresholds_follow_the_stated_formulas() {
        // m = 100, gamma = 1, eps = 1, natural log
        let profile = ExactProfile::from_array([1000, 100, 10, 1]);
        let ext = EdgeExtremes {
            alpha: 5,
            beta: 3,
            delta: 1,
        };
        let r = check_theorem_conditions(&profile, &ext, 100, TheoremInputs::new(1.0, 1.0, 1.0))
            .unwrap();
        let l = 100f64.ln();
        let a3 = 512.0 * 6f64.sqrt();
        let a2 = 64.0 * 2f64.sqrt();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * y.abs();
        assert!(close(r.conditions[0].rhs, a3 * a3 * (3.0 * l).powi(6)));
        assert!(close(r.conditions[2].rhs, 64.0 * l * l));
        assert!(close(r.conditions[3].rhs, a2 * a2 * (2.0 * l).powi(4)));
        assert!(close(r.conditions[0].lhs.unwrap(), 1000.0 / 15.0));
        assert!(close(r.conditions[1].lhs.unwrap(), 1.0));
        assert!(close(r.conditions[2].lhs.unwrap(), 20.0));
        // max(3/10, 1/sqrt(10)) = 1/sqrt(10)
        assert!(close(r.conditions[3].lhs.unwrap(), 10f64.sqrt()));

        let base2 = TheoremInputs {
            log_base: LogBase::Two,
            ..TheoremInputs::new(1.0, 1.0, 1.0)
        };
        let r2 = check_theorem_conditions(&profile, &ext, 100, base2).unwrap();
        let l2 = 100f64.log2();
        assert!(close(r2.conditions[2].rhs, 64.0 * l2 * l2));

        let pre = TheoremInputs {
            form: ConditionForm::PreFinal,
            ..TheoremInputs::new(1.0, 1.0, 1.0)
        };
        let r3 = check_theorem_conditions(&profile, &ext, 100, pre).unwrap();
        // max(5/100, 3/20, 1/3) = 1/3
        assert!(close(r3.conditions[2].lhs.unwrap(), 3.0));
        // max(3/10, 2/3, 1/sqrt(10), 1) = 1
        assert!(close(r3.conditions[3].lhs.unwrap(), 1.0));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let profile = ExactProfile::from_array([1, 1, 1, 1]);
        let ext = EdgeExtremes::default();
        for (p, e, g) in [
            (0.0, 0.1, 1.0),
            (0.5, 0.0, 1.0),
            (0.5, 0.1, -1.0),
            (1.2, 0.1, 1.0),
        ] {
            let res = check_theorem_conditions(&profile, &ext, 10, TheoremInputs::new(p, e, g));
            assert!(matches!(res, Err(Error::Usage(_))));
        }
    }

    #[test]
    fn polynomials_on_full_and_empty_masks() {
        let g = generators::erdos_renyi(25, 0.3, 3);
        let n = oracle::brute_force_profile(&g).unwrap();
        let full = evaluate_polynomials(&g, &SampleMask::all(g.edge_count(), true)).unwrap();
        assert_eq!(full.sampled_profile(), n);
        assert_eq!(
            [full.s1, full.d1, full.d2, full.t1, full.t2],
            [n.n1, 2 * n.n2, n.n2, 3 * n.n3, 3 * n.n3]
        );
        let none = evaluate_polynomials(&g, &SampleMask::all(g.edge_count(), false)).unwrap();
        assert_eq!(none.sampled_profile().to_array(), [choose3(25), 0, 0, 0]);
        assert_eq!([none.s1, none.d1, none.d2, none.t1, none.t2], [0; 5]);
    }

    #[test]
    fn identities_hold_and_match_masked_profile() {
        for seed in 0..40u64 {
            let g = generators::erdos_renyi(20, 0.1 + 0.02 * seed as f64, seed);
            let mask = sample_mask(g.edge_count(), SampleParams::new(0.6, seed).unwrap()).unwrap();
            let pv = evaluate_polynomials(&g, &mask).unwrap();
            assert_eq!(pv.residuals(20), IdentityResiduals::default());
            let sampled = g.edge_filtered(mask.as_slice());
            assert_eq!(
                pv.sampled_profile(),
                oracle::brute_force_profile(&sampled).unwrap()
            );
        }
    }

    #[test]
    fn mask_length_is_checked() {
        let g = generators::cycle(5);
        assert!(matches!(
            evaluate_polynomials(&g, &SampleMask::all(4, true)),
            Err(Error::Usage(_))
        ));
        assert_eq!(enumeration_size(&g), 5);
    }
}
