//! Explicit local hidden state models for the steered party A in the
//! one-way region, their validation, and the preparation of individual
//! hidden states as two-term mixtures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{BlochVector, FamilyParams, MeasurementSetting, Side, TwoQubitState, EPS_TOL};
use crate::steering::{
    classify, conditional_assemblage, Assemblage, HiddenState, HiddenStateEnsemble, ResponseMap, SteeringClass,
    SteeringVerdict,
};

/// Denominators 1 + P_x·Q_x below this dispatch to the three-state model.
pub const SINGULAR_THRESHOLD: f64 = 1e-10;
/// Tolerance of the collinearity check behind the barycentric probabilities.
pub const COLLINEARITY_TOL: f64 = 1e-8;

/// Minor radii of A's conditional-state ellipsoid and hidden-state ellipsoid.
/// Both ellipsoids have semi-axis 1 along x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidParams {
    /// r_e = 2η − 1
    pub r_e: f64,
    /// R_e = |(2η − 1)/cos 2θ|
    #[serde(rename = "R_e")]
    pub hidden_r_e: f64,
}

impl EllipsoidParams {
    pub fn new(theta: f64, eta: f64) -> Result<Self> {
        let p = FamilyParams::new(theta, eta)?;
        Ok(Self {
            r_e: p.visibility(),
            hidden_r_e: (p.visibility() / p.cos2()).abs(),
        })
    }

    /// x² + (y² + z²)/r_e² − 1
    pub fn cs_residual(&self, v: BlochVector) -> f64 {
        v.x * v.x + (v.y * v.y + v.z * v.z) / (self.r_e * self.r_e) - 1.0
    }

    /// x² + (y² + z²)/R_e² − 1
    pub fn hidden_residual(&self, v: BlochVector) -> f64 {
        v.x * v.x + (v.y * v.y + v.z * v.z) / (self.hidden_r_e * self.hidden_r_e) - 1.0
    }
}

fn check_region(theta: f64, eta: f64) -> Result<()> {
    if classify(theta, eta)? == SteeringClass::TwoWayAsymmetric {
        return Err(Error::Region {
            theta,
            eta,
            region: "one-way",
        });
    }
    Ok(())
}

/// A's conditional states when B measures along `settings`.
pub fn alice_assemblage(theta: f64, eta: f64, settings: [MeasurementSetting; 2]) -> Result<Assemblage> {
    let rho = TwoQubitState::family(theta, eta)?;
    conditional_assemblage(&rho, settings, Side::A)
}

/// Hidden state shared by conditional states P and Q.
fn hidden_point(p: BlochVector, q: BlochVector, ce: f64) -> BlochVector {
    let den = 1.0 + p.x * q.x;
    let x = (p.x + q.x) / den;
    if ce.abs() < 1e-12 {
        // All conditional states lie on the x axis; y and z vanish by continuity.
        return BlochVector::new(x, 0.0, 0.0);
    }
    BlochVector::new(
        x,
        (p.y * q.z + p.z * q.y) / (den * ce),
        (p.z * q.z - p.y * q.y) / (den * ce),
    )
}

/// Returns |PQ| split at `m`: the ratio |mQ|/|PQ|, after checking that m lies
/// on the segment PQ.
fn barycentric(p: BlochVector, q: BlochVector, m: BlochVector) -> Result<f64> {
    let pq = p.distance(q);
    if pq < 1e-14 {
        return Ok(0.5);
    }
    let off = (q - p).cross(m - p).norm() / pq;
    if off > COLLINEARITY_TOL {
        return Err(Error::Reconstruction(off));
    }
    Ok(m.distance(q) / pq)
}

/// Four-state model of A's assemblage for B measuring `settings`.
///
/// Each hidden state sits at the point fixed by its two conditional states;
/// probabilities are barycentric coordinates along the segments a–c and
/// b–d, scaled by |BD2|/|D1D2| and |BD1|/|D1D2|. When a pair of conditional
/// states is antipodal and pure, the three-state model is returned instead.
pub fn construct_lhsm(theta: f64, eta: f64, settings: [MeasurementSetting; 2]) -> Result<HiddenStateEnsemble> {
    check_region(theta, eta)?;
    let asm = alice_assemblage(theta, eta, settings)?;
    let [c1, c2, d1, d2] = asm.blochs();
    let pairs = [(c1, d1), (c2, d2), (c2, d1), (c1, d2)];
    if let Some(k) = pairs
        .iter()
        .position(|(p, q)| (1.0 + p.x * q.x).abs() < SINGULAR_THRESHOLD)
    {
        return singular_from_assemblage(&asm, k);
    }
    let fp = FamilyParams::new(theta, eta)?;
    let ce = fp.cos2() * fp.visibility();
    let [a, b, c, d] = pairs.map(|(p, q)| hidden_point(p, q, ce));

    let bu = asm.unconditional();
    let d1d2 = d1.distance(d2);
    let [_, _, td1, td2] = asm.weights();
    let (w1, w2) = if d1d2 > 1e-12 {
        (bu.distance(d2) / d1d2, bu.distance(d1) / d1d2)
    } else {
        (td1, td2)
    };
    let pa = w1 * barycentric(a, c, d1)?;
    let pc = w1 * barycentric(c, a, d1)?;
    let pb = w2 * barycentric(b, d, d2)?;
    let pd = w2 * barycentric(d, b, d2)?;

    let entries = [("a", pa, a), ("b", pb, b), ("c", pc, c), ("d", pd, d)]
        .into_iter()
        .map(|(l, p, pt)| HiddenState {
            label: l.into(),
            probability: p,
            point: pt,
        })
        .collect();
    HiddenStateEnsemble::new(entries, ResponseMap::canonical())
}

/// Settings (±sin 2θ, 0, cos 2θ) for which one of A's conditional states
/// per setting is pure.
pub fn singular_settings(theta: f64) -> Result<[MeasurementSetting; 2]> {
    let (s, c) = ((2.0 * theta).sin(), (2.0 * theta).cos());
    Ok([
        MeasurementSetting::along("n1", BlochVector::new(s, 0.0, c))?,
        MeasurementSetting::along("n2", BlochVector::new(-s, 0.0, c))?,
    ])
}

/// Three-state model for B measuring the singular settings.
pub fn construct_lhsm_singular(theta: f64, eta: f64) -> Result<HiddenStateEnsemble> {
    check_region(theta, eta)?;
    let asm = alice_assemblage(theta, eta, singular_settings(theta)?)?;
    let [c1, c2, d1, d2] = asm.blochs();
    let pairs = [(c1, d1), (c2, d2), (c2, d1), (c1, d2)];
    let k = pairs
        .iter()
        .position(|(p, q)| (1.0 + p.x * q.x).abs() < SINGULAR_THRESHOLD)
        .ok_or_else(|| Error::Singular("no antipodal pure pair; use construct_lhsm".into()))?;
    singular_from_assemblage(&asm, k)
}

/// Drops hidden state `k` (a, b, c, d order), whose two conditional states
/// P, Q are antipodal pure states. The neighbours sharing P or Q coincide
/// with them and carry their full weight; the opposite state follows from
/// reconstruction.
fn singular_from_assemblage(asm: &Assemblage, k: usize) -> Result<HiddenStateEnsemble> {
    // Member indices (C1, C2, D1, D2) = (0, 1, 2, 3) used by each hidden state.
    const USES: [(usize, usize); 4] = [(0, 2), (1, 3), (1, 2), (0, 3)];
    const LABELS: [&str; 4] = ["a", "b", "c", "d"];
    // The neighbour sharing the first member, the one sharing the second, and the opposite.
    const NEIGHBOURS: [(usize, usize, usize); 4] = [(3, 2, 1), (2, 3, 0), (1, 0, 3), (0, 1, 2)];
    let t = asm.weights();
    let v = asm.blochs();
    let (pm, qm) = USES[k];
    let (np, nq, opp) = NEIGHBOURS[k];
    let mut points = [BlochVector::ZERO; 4];
    let mut probs = [0.0; 4];
    points[np] = v[pm];
    probs[np] = t[pm];
    points[nq] = v[qm];
    probs[nq] = t[qm];
    probs[opp] = 1.0 - t[pm] - t[qm];
    if probs[opp] < -EPS_TOL {
        return Err(Error::Singular(format!("negative weight {}", probs[opp])));
    }
    probs[opp] = probs[opp].max(0.0);
    // The opposite state shares one member with each neighbour; use the first.
    let (op, _) = USES[opp];
    let partner = if USES[np].0 == op || USES[np].1 == op { np } else { nq };
    if probs[opp] > 0.0 {
        points[opp] = (v[op] * t[op] - points[partner] * probs[partner]) / probs[opp];
    }
    let mut entries = Vec::with_capacity(3);
    let mut outcomes = Vec::with_capacity(3);
    let canonical = ResponseMap::canonical();
    for i in 0..4 {
        if i == k {
            continue;
        }
        entries.push(HiddenState {
            label: LABELS[i].into(),
            probability: probs[i],
            point: points[i],
        });
        outcomes.push(canonical.outcomes[i]);
    }
    HiddenStateEnsemble::new(entries, ResponseMap { outcomes })
}

/// Reconstruction errors of an ensemble against an assemblage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// |Σ p_i − t| per conditional state (C1, C2, D1, D2).
    pub weight_errors: [f64; 4],
    /// |Σ p_i·L_i − t·v| per conditional state.
    pub bloch_errors: [f64; 4],
    pub probability_sum_error: f64,
    pub max_norm: f64,
    pub physical: bool,
    pub passed: bool,
}

impl ValidationReport {
    pub fn max_weight_error(&self) -> f64 {
        self.weight_errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_bloch_error(&self) -> f64 {
        self.bloch_errors.iter().copied().fold(0.0, f64::max)
    }
}

pub fn validate_lhsm(ens: &HiddenStateEnsemble, asm: &Assemblage, tol: f64) -> Result<ValidationReport> {
    if ens.entries.len() != ens.response.len() || ens.is_empty() {
        return Err(Error::Schema(format!(
            "{} hidden states, {} response rows",
            ens.entries.len(),
            ens.response.len()
        )));
    }
    let rec = ens.reconstruct();
    let weight_errors = std::array::from_fn(|i| (rec[i].0 - asm.members()[i].weight).abs());
    let bloch_errors = std::array::from_fn(|i| (rec[i].1 - asm.members()[i].moment()).norm());
    let probability_sum_error = (ens.probability_sum() - 1.0).abs();
    let max_norm = ens.max_norm();
    let physical = max_norm <= 1.0 + tol.max(EPS_TOL);
    let mut report = ValidationReport {
        weight_errors,
        bloch_errors,
        probability_sum_error,
        max_norm,
        physical,
        passed: false,
    };
    report.passed = physical
        && report.max_weight_error() <= tol
        && report.max_bloch_error() <= tol
        && probability_sum_error <= tol
        && ens.entries.iter().all(|e| e.probability >= -tol);
    Ok(report)
}

/// The minimizing ensemble of an unsteerable verdict, which is then a
/// physical model for the assemblage the verdict was computed from.
pub fn ensemble_from_verdict(v: &SteeringVerdict) -> Option<HiddenStateEnsemble> {
    if v.steerable {
        return None;
    }
    v.minimizing_ensemble.clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    /// |H⟩ = |0⟩, Bloch point +z
    H,
    /// |V⟩ = |1⟩, Bloch point −z
    V,
}

impl Pole {
    pub fn bloch(self) -> BlochVector {
        match self {
            Pole::H => BlochVector::Z,
            Pole::V => -BlochVector::Z,
        }
    }
}

/// ρ_G = μ|φ_α⟩⟨φ_α| + ν|pole⟩⟨pole| with |φ_α⟩ = cos α|H⟩ + sin α|V⟩,
/// preceded by a rotation by `azimuth` about z when G has a y component.
/// Weights satisfy μ + ν = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenStateDecomposition {
    pub alpha: f64,
    pub mu: f64,
    pub nu: f64,
    pub pole: Pole,
    pub azimuth: f64,
}

impl HiddenStateDecomposition {
    /// Bloch point of the mixture.
    pub fn reconstruct(&self) -> BlochVector {
        let (s2, c2) = (2.0 * self.alpha).sin_cos();
        let xz = BlochVector::new(s2, 0.0, c2) * self.mu + self.pole.bloch() * self.nu;
        let (sa, ca) = self.azimuth.sin_cos();
        BlochVector::new(xz.x * ca, xz.x * sa, xz.z)
    }
}

pub fn decompose_hidden_state(point: BlochVector) -> Result<HiddenStateDecomposition> {
    let n = point.norm();
    if !point.is_finite() || n > 1.0 + EPS_TOL {
        return Err(Error::NonPhysical(n));
    }
    let rxy = point.x.hypot(point.y);
    let azimuth = if rxy > 0.0 { point.y.atan2(point.x) } else { 0.0 };
    let (gx, gz) = (rxy, point.z);
    let (pole, p) = if gz >= 0.0 { (Pole::H, 1.0) } else { (Pole::V, -1.0) };
    let den = 2.0 * (1.0 - p * gz);
    if den <= 1e-15 {
        return Ok(HiddenStateDecomposition {
            alpha: 0.0,
            mu: 0.0,
            nu: 1.0,
            pole,
            azimuth,
        });
    }
    let mu = ((gx * gx + (gz - p) * (gz - p)) / den).clamp(0.0, 1.0);
    let nu = 1.0 - mu;
    let alpha = if mu > 0.0 { 0.5 * gx.atan2(gz - p * nu) } else { 0.0 };
    Ok(HiddenStateDecomposition {
        alpha,
        mu,
        nu,
        pole,
        azimuth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steering::sqhsm_radius;
    use std::f64::consts::FRAC_PI_4;

    fn xz() -> [MeasurementSetting; 2] {
        [MeasurementSetting::x(), MeasurementSetting::z()]
    }

    #[test]
    fn one_way_anchor_state_has_physical_model() {
        let ens = construct_lhsm(0.442, 0.658, xz()).unwrap();
        let asm = alice_assemblage(0.442, 0.658, xz()).unwrap();
        let rep = validate_lhsm(&ens, &asm, 1e-9).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(ens.len(), 4);
        let ell = EllipsoidParams::new(0.442, 0.658).unwrap();
        for e in &ens.entries {
            assert!(ell.hidden_residual(e.point).abs() < 1e-8);
        }
        for m in asm.members() {
            assert!(ell.cs_residual(m.bloch).abs() < 1e-9);
        }
    }

    #[test]
    fn two_way_region_rejected() {
        assert!(matches!(construct_lhsm(0.775, 0.989, xz()), Err(Error::Region { .. })));
    }

    #[test]
    fn singular_three_state_model() {
        let ens = construct_lhsm_singular(0.328, 0.629).unwrap();
        assert_eq!(ens.len(), 3);
        let asm = alice_assemblage(0.328, 0.629, singular_settings(0.328).unwrap()).unwrap();
        let rep = validate_lhsm(&ens, &asm, 1e-9).unwrap();
        assert!(rep.passed, "{rep:?}");
        let fp = FamilyParams::new(0.328, 0.629).unwrap();
        let third = ens.entries.iter().map(|e| e.point).find(|p| p.x.abs() < 1e-9).unwrap();
        assert!((third.z - fp.visibility() / fp.cos2()).abs() < 1e-12);
    }

    #[test]
    fn steerable_verdict_yields_no_model() {
        let rho = TwoQubitState::family(FRAC_PI_4, 1.0).unwrap();
        let asm = conditional_assemblage(&rho, xz(), Side::B).unwrap();
        let v = sqhsm_radius(&asm);
        assert!(ensemble_from_verdict(&v).is_none());
        let rep = validate_lhsm(v.minimizing_ensemble.as_ref().unwrap(), &asm, 1e-9).unwrap();
        assert!(!rep.physical && !rep.passed);
    }

    #[test]
    fn perturbed_probabilities_fail() {
        let mut ens = construct_lhsm(0.442, 0.658, xz()).unwrap();
        let asm = alice_assemblage(0.442, 0.658, xz()).unwrap();
        ens.entries[0].probability += 0.05;
        ens.entries[1].probability -= 0.05;
        assert!(!validate_lhsm(&ens, &asm, 1e-3).unwrap().passed);
    }

    #[test]
    fn decomposition_examples() {
        let d = decompose_hidden_state(BlochVector::Z).unwrap();
        assert_eq!((d.mu, d.nu, d.pole), (0.0, 1.0, Pole::H));
        let d = decompose_hidden_state(BlochVector::X).unwrap();
        assert!((d.mu - 1.0).abs() < 1e-15 && d.nu.abs() < 1e-15);
        assert!((d.alpha - FRAC_PI_4).abs() < 1e-15);
        for g in [
            BlochVector::new(0.3, 0.0, -0.5),
            BlochVector::ZERO,
            BlochVector::new(-0.2, 0.4, 0.1),
            -BlochVector::Z,
        ] {
            let d = decompose_hidden_state(g).unwrap();
            assert!((d.reconstruct() - g).norm() < 1e-12, "{g}");
            assert!(d.mu >= 0.0 && d.nu >= 0.0);
        }
        assert!(decompose_hidden_state(BlochVector::new(1.0, 1.0, 0.0)).is_err());
    }
}
