use serde::{Deserialize, Serialize};

use super::assemblage::{member_index, Assemblage, Direction};
use crate::error::{Error, Result};
use crate::quantum::{BlochVector, MeasurementSetting, Outcome, EPS_TOL};

/// Deterministic responses: for each hidden state, the outcome it produces
/// for setting 1 and for setting 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseMap {
    pub outcomes: Vec<[Outcome; 2]>,
}

impl ResponseMap {
    /// a → {C1, D1}, b → {C2, D2}, c → {C2, D1}, d → {C1, D2}.
    pub fn canonical() -> Self {
        use Outcome::{One, Zero};
        Self {
            outcomes: vec![[Zero, Zero], [One, One], [One, Zero], [Zero, One]],
        }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Hidden-state indices activated by `outcome` of `setting`.
    pub fn activated_by(&self, setting: usize, outcome: Outcome) -> Vec<usize> {
        self.outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| o[setting] == outcome)
            .map(|(i, _)| i)
            .collect()
    }

    /// P(κ|n, i) as a 4 × n table of zeros and ones, rows in C1, C2, D1, D2 order.
    pub fn table(&self) -> [Vec<u8>; 4] {
        std::array::from_fn(|row| {
            let (s, k) = (row / 2, row % 2);
            self.outcomes.iter().map(|o| u8::from(o[s].index() == k)).collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    pub label: String,
    pub probability: f64,
    pub point: BlochVector,
}

/// Hidden states {p_i, ρ_i} together with their deterministic responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenStateEnsemble {
    pub entries: Vec<HiddenState>,
    pub response: ResponseMap,
    pub super_quantum: bool,
}

impl HiddenStateEnsemble {
    pub fn new(entries: Vec<HiddenState>, response: ResponseMap) -> Result<Self> {
        if entries.len() != response.len() {
            return Err(Error::Schema(format!(
                "{} hidden states but {} response rows",
                entries.len(),
                response.len()
            )));
        }
        if entries.is_empty() {
            return Err(Error::Schema("empty ensemble".into()));
        }
        for e in &entries {
            if !(e.probability.is_finite() && e.point.is_finite()) {
                return Err(Error::Schema(format!("non-finite hidden state {}", e.label)));
            }
            if e.probability < -EPS_TOL || e.probability > 1.0 + EPS_TOL {
                return Err(Error::Schema(format!(
                    "probability of {} is {}",
                    e.label, e.probability
                )));
            }
        }
        let total: f64 = entries.iter().map(|e| e.probability).sum();
        if (total - 1.0).abs() > EPS_TOL {
            return Err(Error::Schema(format!("probabilities sum to {total}")));
        }
        let super_quantum = entries.iter().any(|e| e.point.norm() > 1.0 + EPS_TOL);
        Ok(Self {
            entries,
            response,
            super_quantum,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.point.norm()).fold(0.0, f64::max)
    }

    pub fn probability_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    /// (Σ p_i, Σ p_i·point_i) over the hidden states activated by each
    /// outcome, in C1, C2, D1, D2 order.
    pub fn reconstruct(&self) -> [(f64, BlochVector); 4] {
        let mut out = [(0.0, BlochVector::ZERO); 4];
        for (e, o) in self.entries.iter().zip(&self.response.outcomes) {
            for (s, k) in o.iter().enumerate() {
                let slot = &mut out[member_index(s, *k)];
                slot.0 += e.probability;
                slot.1 += e.point * e.probability;
            }
        }
        out
    }
}

/// Result of a steering-radius computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringVerdict {
    pub radius: f64,
    pub direction: Direction,
    pub settings: [MeasurementSetting; 2],
    pub steerable: bool,
    /// radius − 1
    pub robustness: f64,
    pub minimizing_ensemble: Option<HiddenStateEnsemble>,
    pub converged: bool,
}

/// Radii this close to one are reported as exactly one.
pub const UNIT_RADIUS_TOL: f64 = 1e-9;

impl SteeringVerdict {
    pub fn new(
        radius: f64,
        direction: Direction,
        settings: [MeasurementSetting; 2],
        minimizing_ensemble: Option<HiddenStateEnsemble>,
        converged: bool,
    ) -> Self {
        let radius = if (radius - 1.0).abs() <= UNIT_RADIUS_TOL {
            1.0
        } else {
            radius
        };
        Self {
            radius,
            direction,
            settings,
            steerable: radius > 1.0,
            robustness: radius - 1.0,
            minimizing_ensemble,
            converged,
        }
    }

    pub(crate) fn for_assemblage(
        asm: &Assemblage,
        radius: f64,
        ens: Option<HiddenStateEnsemble>,
        converged: bool,
    ) -> Self {
        Self::new(radius, asm.direction(), asm.settings.clone(), ens, converged)
    }
}
