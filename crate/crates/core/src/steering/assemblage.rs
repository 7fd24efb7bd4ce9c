use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    projector, BlochVector, MeasurementSetting, Outcome, QubitOperator, Side, TwoQubitState, EPS_TOL,
};

/// Who steers whom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Alice measures, Bob's conditional states are examined.
    AToB,
    /// Bob measures, Alice's conditional states are examined.
    BToA,
}

impl Direction {
    pub fn steered(self) -> Side {
        match self {
            Direction::AToB => Side::B,
            Direction::BToA => Side::A,
        }
    }

    pub fn measuring(self) -> Side {
        self.steered().other()
    }

    pub fn from_steered(side: Side) -> Self {
        match side {
            Side::B => Direction::AToB,
            Side::A => Direction::BToA,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::AToB => Direction::BToA,
            Direction::BToA => Direction::AToB,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::AToB => "ab",
            Direction::BToA => "ba",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ab" | "a->b" | "atob" => Ok(Direction::AToB),
            "ba" | "b->a" | "btoa" => Ok(Direction::BToA),
            other => Err(Error::Domain(format!("unknown direction `{other}`"))),
        }
    }
}

/// Labels of the four members, in storage order.
pub const MEMBER_LABELS: [&str; 4] = ["C1", "C2", "D1", "D2"];

/// Index of the member produced by `outcome` of setting `setting` (0 or 1).
pub fn member_index(setting: usize, outcome: Outcome) -> usize {
    2 * setting + outcome.index()
}

/// One normalized conditional state together with its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalState {
    pub setting: usize,
    pub outcome: Outcome,
    /// t = Tr ρ̃
    pub weight: f64,
    /// Bloch vector of ρ̃/t; the origin when t = 0.
    pub bloch: BlochVector,
}

impl ConditionalState {
    /// t·v, the Bloch moment of the unnormalized state.
    pub fn moment(&self) -> BlochVector {
        self.bloch * self.weight
    }

    pub fn label(&self) -> &'static str {
        MEMBER_LABELS[member_index(self.setting, self.outcome)]
    }

    pub fn unnormalized(&self) -> QubitOperator {
        QubitOperator::from_weighted_bloch(self.weight, self.moment())
    }
}

/// Four conditional states: two settings × two outcomes, stored as
/// C1 = (n1, 0), C2 = (n1, 1), D1 = (n2, 0), D2 = (n2, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assemblage {
    pub steered: Side,
    pub settings: [MeasurementSetting; 2],
    members: [ConditionalState; 4],
}

impl Assemblage {
    /// Builds and validates an assemblage from `(weight, bloch)` pairs in
    /// C1, C2, D1, D2 order.
    pub fn new(steered: Side, settings: [MeasurementSetting; 2], parts: [(f64, BlochVector); 4]) -> Result<Self> {
        Self::with_tolerance(steered, settings, parts, EPS_TOL)
    }

    /// As [`Assemblage::new`], with a custom tolerance for the weight,
    /// no-signaling and physicality checks.
    pub fn with_tolerance(
        steered: Side,
        settings: [MeasurementSetting; 2],
        parts: [(f64, BlochVector); 4],
        tol: f64,
    ) -> Result<Self> {
        let asm = Self::from_parts_unchecked(steered, settings, parts);
        asm.check(tol)?;
        Ok(asm)
    }

    pub(crate) fn from_parts_unchecked(
        steered: Side,
        settings: [MeasurementSetting; 2],
        parts: [(f64, BlochVector); 4],
    ) -> Self {
        let members = std::array::from_fn(|i| ConditionalState {
            setting: i / 2,
            outcome: if i % 2 == 0 { Outcome::Zero } else { Outcome::One },
            weight: parts[i].0,
            bloch: parts[i].1,
        });
        Self {
            steered,
            settings,
            members,
        }
    }

    fn check(&self, tol: f64) -> Result<()> {
        for m in &self.members {
            if !(m.weight.is_finite() && m.bloch.is_finite()) {
                return Err(Error::InvalidAssemblage("non-finite entries".into()));
            }
            if m.weight < -tol || m.weight > 1.0 + tol {
                return Err(Error::InvalidAssemblage(format!(
                    "weight of {} is {}",
                    m.label(),
                    m.weight
                )));
            }
            if m.bloch.norm() > 1.0 + tol {
                return Err(Error::InvalidAssemblage(format!(
                    "{} has Bloch norm {}",
                    m.label(),
                    m.bloch.norm()
                )));
            }
        }
        for s in 0..2 {
            let sum = self.members[2 * s].weight + self.members[2 * s + 1].weight;
            if (sum - 1.0).abs() > tol {
                return Err(Error::InvalidAssemblage(format!(
                    "normalization: weights of setting {} sum to {sum}",
                    s + 1
                )));
            }
        }
        let gap = self.signaling_gap();
        if gap > tol {
            return Err(Error::InvalidAssemblage(format!("no-signaling (gap {gap:e})")));
        }
        Ok(())
    }

    pub fn members(&self) -> &[ConditionalState; 4] {
        &self.members
    }

    pub fn member(&self, setting: usize, outcome: Outcome) -> &ConditionalState {
        &self.members[member_index(setting, outcome)]
    }

    pub fn weights(&self) -> [f64; 4] {
        self.members.map(|m| m.weight)
    }

    pub fn blochs(&self) -> [BlochVector; 4] {
        self.members.map(|m| m.bloch)
    }

    pub fn moments(&self) -> [BlochVector; 4] {
        self.members.map(|m| m.moment())
    }

    pub fn direction(&self) -> Direction {
        Direction::from_steered(self.steered)
    }

    /// Σκ t·v for setting `s`: the unconditional Bloch vector it implies.
    pub fn marginal(&self, s: usize) -> BlochVector {
        self.members[2 * s].moment() + self.members[2 * s + 1].moment()
    }

    /// Norm of the difference between the two implied unconditional states,
    /// including the weight sums.
    pub fn signaling_gap(&self) -> f64 {
        let dv = (self.marginal(0) - self.marginal(1)).norm();
        let w0 = self.members[0].weight + self.members[1].weight;
        let w1 = self.members[2].weight + self.members[3].weight;
        dv.max((w0 - w1).abs())
    }

    /// Unconditional Bloch vector (average of both settings' marginals).
    pub fn unconditional(&self) -> BlochVector {
        (self.marginal(0) + self.marginal(1)) * 0.5
    }

    /// Least-squares projection onto the no-signaling, normalized subspace:
    /// weights are renormalized per setting and the moment residual is split
    /// evenly across the four members. States are not clipped, so a projected
    /// member may sit marginally outside the ball.
    pub fn projected_no_signaling(&self) -> Self {
        let mut w = self.weights();
        for s in 0..2 {
            let sum = w[2 * s] + w[2 * s + 1];
            if sum > 0.0 {
                w[2 * s] /= sum;
                w[2 * s + 1] /= sum;
            } else {
                w[2 * s] = 0.5;
                w[2 * s + 1] = 0.5;
            }
        }
        let mut m: [BlochVector; 4] = std::array::from_fn(|i| self.members[i].bloch * w[i]);
        let delta = (m[0] + m[1] - m[2] - m[3]) * 0.25;
        m[0] -= delta;
        m[1] -= delta;
        m[2] += delta;
        m[3] += delta;
        let parts = std::array::from_fn(|i| {
            let v = if w[i] > 0.0 { m[i] / w[i] } else { BlochVector::ZERO };
            (w[i], v)
        });
        Self::from_parts_unchecked(self.steered, self.settings.clone(), parts)
    }

    /// Same weights, Bloch vectors replaced.
    pub fn with_blochs(&self, blochs: [BlochVector; 4]) -> Self {
        let parts = std::array::from_fn(|i| (self.members[i].weight, blochs[i]));
        Self::from_parts_unchecked(self.steered, self.settings.clone(), parts)
    }

    /// Mixes every conditional state with white noise of equal weight:
    /// (ρ̃ + t·Tr[ρ̃]·I/2)/(1 + t). Bloch vectors shrink by 1/(1 + t).
    pub fn deflated(&self, t: f64) -> Self {
        let k = 1.0 / (1.0 + t);
        self.with_blochs(self.blochs().map(|v| v * k))
    }
}

/// Conditional states of the `steered` party when the other party measures
/// along `settings`.
pub fn conditional_assemblage(
    rho: &TwoQubitState,
    settings: [MeasurementSetting; 2],
    steered: Side,
) -> Result<Assemblage> {
    let (n1, n2) = (settings[0].direction, settings[1].direction);
    if n1.dot(n2).abs() >= 1.0 - 1e-12 {
        return Err(Error::DegenerateSettings);
    }
    let measured = steered.other();
    let mut parts = [(0.0, BlochVector::ZERO); 4];
    for (s, setting) in settings.iter().enumerate() {
        for k in Outcome::BOTH {
            let pi = projector(setting, k)?;
            let cond = rho.conditional_operator(measured, &pi);
            let t = cond.trace().max(0.0);
            parts[member_index(s, k)] = (t, cond.bloch());
        }
    }
    Ok(Assemblage::from_parts_unchecked(steered, settings, parts))
}
