//! Minimax over hidden-state models for one fixed pair of settings.
//!
//! With u_i = p_i·L_i the reconstruction constraints leave two free
//! quantities, s = p_a and w = u_a:
//!
//! ```text
//! p = (s, 1 − t_C1 − t_D1 + s, t_D1 − s, t_C1 − s)
//! u = (w, w − (m_D1 − m_C2), m_D1 − w, m_C1 − w)        m = t·v
//! ```
//!
//! For fixed s, minimizing max_i |u_i|/p_i over w is a weighted smallest
//! enclosing ball of four anchor points, solved exactly by enumerating active
//! sets. The resulting value is convex in s, so the outer problem is a
//! golden-section search.

use super::assemblage::Assemblage;
use super::ensemble::{HiddenState, HiddenStateEnsemble, ResponseMap, SteeringVerdict};
use crate::quantum::{BlochVector, Outcome};

/// Hidden states lighter than this are dropped from reported ensembles.
pub const DROP_PROBABILITY: f64 = 1e-12;

const HIDDEN_LABELS: [&str; 4] = ["a", "b", "c", "d"];

/// The (s, w) solution space of one assemblage.
#[derive(Debug, Clone, Copy)]
pub struct SolutionSpace {
    t: [f64; 4],
    m: [BlochVector; 4],
    pub lo: f64,
    pub hi: f64,
}

/// An optimal point of the solution space.
#[derive(Debug, Clone, Copy)]
pub struct SqhsmSolution {
    pub s: f64,
    pub w: BlochVector,
    pub radius: f64,
}

impl SolutionSpace {
    /// `weights` and `moments` (t·v) in C1, C2, D1, D2 order. Only C1, C2 and
    /// D1 enter; D2 is implied by no-signaling.
    pub fn new(weights: [f64; 4], moments: [BlochVector; 4]) -> Self {
        let (tc1, td1) = (weights[0], weights[2]);
        let lo = (tc1 + td1 - 1.0).max(0.0);
        let hi = tc1.min(td1).max(lo);
        Self {
            t: weights,
            m: moments,
            lo,
            hi,
        }
    }

    pub fn from_assemblage(asm: &Assemblage) -> Self {
        Self::new(asm.weights(), asm.moments())
    }

    pub fn probabilities(&self, s: f64) -> [f64; 4] {
        let (tc1, td1) = (self.t[0], self.t[2]);
        [s, 1.0 - tc1 - td1 + s, td1 - s, tc1 - s].map(|p| p.max(0.0))
    }

    /// Points q_i with |u_i| = |w − q_i|.
    pub fn anchors(&self) -> [BlochVector; 4] {
        let [mc1, mc2, md1, _] = self.m;
        [BlochVector::ZERO, md1 - mc2, md1, mc1]
    }

    pub fn hidden_moments(&self, w: BlochVector) -> [BlochVector; 4] {
        let [mc1, mc2, md1, _] = self.m;
        [w, mc2 - md1 + w, md1 - w, mc1 - w]
    }

    /// max_i |u_i|/p_i at (s, w).
    pub fn objective(&self, s: f64, w: BlochVector) -> f64 {
        weighted_max(&self.anchors(), &self.probabilities(s), w)
    }

    /// min over w of the objective at fixed s.
    pub fn inner(&self, s: f64) -> (f64, BlochVector) {
        weighted_center(&self.anchors(), &self.probabilities(s))
    }

    pub fn solve(&self) -> SqhsmSolution {
        let (lo, hi) = (self.lo, self.hi);
        let g = |s: f64| self.inner(s).0;
        let mut best_s = lo;
        let mut best = g(lo);
        let g_hi = g(hi);
        if g_hi < best {
            best = g_hi;
            best_s = hi;
        }
        if hi - lo > 1e-15 {
            let (s, v) = golden_section(g, lo, hi);
            if v < best {
                best = v;
                best_s = s;
            }
        }
        let (radius, w) = self.inner(best_s);
        debug_assert!((radius - best).abs() <= 1e-12 * (1.0 + best));
        SqhsmSolution { s: best_s, w, radius }
    }

    /// Hidden-state ensemble at (s, w), with negligible states dropped.
    pub fn ensemble(&self, s: f64, w: BlochVector) -> HiddenStateEnsemble {
        let p = self.probabilities(s);
        let u = self.hidden_moments(w);
        let canonical = ResponseMap::canonical();
        let mut entries = Vec::with_capacity(4);
        let mut outcomes: Vec<[Outcome; 2]> = Vec::with_capacity(4);
        for i in 0..4 {
            if p[i] <= DROP_PROBABILITY {
                continue;
            }
            entries.push(HiddenState {
                label: HIDDEN_LABELS[i].into(),
                probability: p[i],
                point: u[i] / p[i],
            });
            outcomes.push(canonical.outcomes[i]);
        }
        let super_quantum = entries.iter().any(|e| e.point.norm() > 1.0 + crate::quantum::EPS_TOL);
        HiddenStateEnsemble {
            entries,
            response: ResponseMap { outcomes },
            super_quantum,
        }
    }
}

fn golden_section<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..200 {
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = g(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn weighted_max(q: &[BlochVector; 4], p: &[f64; 4], w: BlochVector) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        let d = (w - q[i]).norm();
        if d == 0.0 {
            continue;
        }
        let r = if p[i] > 0.0 { d / p[i] } else { f64::INFINITY };
        worst = worst.max(r);
    }
    worst
}

/// min over w of max_i |w − q_i|/p_i.
///
/// At the optimum the active terms are equal, and the active anchors span
/// the subspace containing w, so every candidate from a 1-, 2-, 3- or
/// 4-point active set is enumerated and the best one kept.
pub(crate) fn weighted_center(q: &[BlochVector; 4], p: &[f64; 4]) -> (f64, BlochVector) {
    let mut best = (f64::INFINITY, q[0]);
    let mut consider = |w: BlochVector| {
        if w.is_finite() {
            let v = weighted_max(q, p, w);
            if v < best.0 {
                best = (v, w);
            }
        }
    };
    for qi in q {
        consider(*qi);
    }
    for i in 0..4 {
        for j in i + 1..4 {
            let s = p[i] + p[j];
            if s > 0.0 {
                consider((q[i] * p[j] + q[j] * p[i]) / s);
            }
        }
    }
    for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
        let d1 = q[j] - q[i];
        let d2 = q[k] - q[i];
        let (g11, g12, g22) = (d1.dot(d1), d1.dot(d2), d2.dot(d2));
        let det = g11 * g22 - g12 * g12;
        if det <= 1e-13 * g11 * g22 || det == 0.0 {
            continue;
        }
        let solve = |r1: f64, r2: f64| {
            let a = (g22 * r1 - g12 * r2) / det;
            let b = (g11 * r2 - g12 * r1) / det;
            d1 * a + d2 * b
        };
        let y0 = solve(0.5 * g11, 0.5 * g22);
        let y1 = solve(-0.5 * (p[j] * p[j] - p[i] * p[i]), -0.5 * (p[k] * p[k] - p[i] * p[i]));
        for r2 in equal_ratio_roots(y0, y1, p[i]) {
            consider(q[i] + y0 + y1 * r2);
        }
    }
    {
        let d = [q[1] - q[0], q[2] - q[0], q[3] - q[0]];
        let m = nalgebra::Matrix3::from_fn(|r, c| d[r].to_array()[c]);
        let scale = d.iter().map(|v| v.norm()).product::<f64>();
        if scale > 0.0 && m.determinant().abs() > 1e-12 * scale {
            if let Some(inv) = m.try_inverse() {
                let rhs0 = nalgebra::Vector3::from_fn(|r, _| 0.5 * d[r].norm_squared());
                let rhs1 = nalgebra::Vector3::from_fn(|r, _| -0.5 * (p[r + 1] * p[r + 1] - p[0] * p[0]));
                let a0 = inv * rhs0;
                let a1 = inv * rhs1;
                let y0 = BlochVector::new(a0[0], a0[1], a0[2]);
                let y1 = BlochVector::new(a1[0], a1[1], a1[2]);
                for r2 in equal_ratio_roots(y0, y1, p[0]) {
                    consider(q[0] + y0 + y1 * r2);
                }
            }
        }
    }
    best
}

/// Non-negative roots R of |y0 + R·y1|² = R·p².
fn equal_ratio_roots(y0: BlochVector, y1: BlochVector, p: f64) -> Vec<f64> {
    let a = y1.norm_squared();
    let b = 2.0 * y0.dot(y1) - p * p;
    let c = y0.norm_squared();
    let mut out = Vec::with_capacity(2);
    if a <= 1e-300 {
        if b != 0.0 {
            out.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            out.push(-b / (2.0 * a));
        } else {
            let qq = -0.5 * (b + b.signum() * disc.sqrt());
            out.push(qq / a);
            if qq != 0.0 {
                out.push(c / qq);
            }
        }
    }
    out.retain(|r| r.is_finite() && *r >= 0.0);
    out
}

/// r(ρ) for the assemblage's pair of settings, with the minimizing ensemble.
pub fn sqhsm_radius(asm: &Assemblage) -> SteeringVerdict {
    let space = SolutionSpace::from_assemblage(asm);
    let sol = space.solve();
    let ens = space.ensemble(sol.s, sol.w);
    SteeringVerdict::for_assemblage(asm, sol.radius, Some(ens), sol.radius.is_finite())
}
