use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

use super::{BlochVector, EPS_TOL};
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A 2×2 Hermitian operator on one qubit.
///
/// Unnormalized conditional states are also represented with this type, so
/// the trace is not required to be one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitOperator {
    m: Matrix2<C64>,
}

impl QubitOperator {
    pub fn identity() -> Self {
        Self { m: Matrix2::identity() }
    }

    /// Wraps a matrix, checking Hermiticity to within `EPS_TOL`.
    pub fn from_matrix(m: Matrix2<C64>) -> Result<Self> {
        let dev = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > EPS_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: Matrix2<C64>) -> Self {
        Self { m }
    }

    /// (I + v·σ)/2. Accepts super-quantum `v`.
    pub fn from_bloch(v: BlochVector) -> Self {
        let m = Matrix2::new(
            c(0.5 * (1.0 + v.z), 0.0),
            c(0.5 * v.x, -0.5 * v.y),
            c(0.5 * v.x, 0.5 * v.y),
            c(0.5 * (1.0 - v.z), 0.0),
        );
        Self { m }
    }

    /// (t·I + m·σ)/2, the unnormalized operator with weight `t` and Bloch moment `m`.
    pub fn from_weighted_bloch(weight: f64, moment: BlochVector) -> Self {
        let m = Matrix2::new(
            c(0.5 * (weight + moment.z), 0.0),
            c(0.5 * moment.x, -0.5 * moment.y),
            c(0.5 * moment.x, 0.5 * moment.y),
            c(0.5 * (weight - moment.z), 0.0),
        );
        Self { m }
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        (self.m[(0, 0)] + self.m[(1, 1)]).re
    }

    /// Bloch moment (Tr[ρσx], Tr[ρσy], Tr[ρσz]); equals t·v for weight t.
    pub fn moment(&self) -> BlochVector {
        let off = self.m[(1, 0)] + self.m[(0, 1)].conj();
        BlochVector::new(off.re, off.im, (self.m[(0, 0)] - self.m[(1, 1)]).re)
    }

    /// Bloch vector of the normalized operator. Zero-trace operators map to the origin.
    pub fn bloch(&self) -> BlochVector {
        let t = self.trace();
        if t.abs() <= f64::MIN_POSITIVE {
            BlochVector::ZERO
        } else {
            self.moment() / t
        }
    }

    pub fn determinant(&self) -> f64 {
        (self.m[(0, 0)] * self.m[(1, 1)] - self.m[(0, 1)] * self.m[(1, 0)]).re
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let t = self.trace();
        let r = self.moment().norm();
        [0.5 * (t - r), 0.5 * (t + r)]
    }

    /// Unit trace, Hermitian and positive semi-definite within `EPS_TOL`.
    pub fn is_density(&self) -> bool {
        (self.trace() - 1.0).abs() <= EPS_TOL && self.eigenvalues()[0] >= -EPS_TOL
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { m: self.m * c(k, 0.0) }
    }
}

impl std::ops::Add for QubitOperator {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { m: self.m + o.m }
    }
}

/// Bloch vector of a normalized qubit operator.
pub fn density_to_bloch(rho: &QubitOperator) -> BlochVector {
    rho.bloch()
}

/// The operator (I + v·σ)/2.
pub fn bloch_to_density(v: BlochVector) -> QubitOperator {
    QubitOperator::from_bloch(v)
}

/// Outcome κ of a projective qubit measurement; κ = 0 projects onto +n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Zero,
    One,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Zero, Outcome::One];

    pub fn from_index(k: u8) -> Result<Self> {
        match k {
            0 => Ok(Outcome::Zero),
            1 => Ok(Outcome::One),
            _ => Err(Error::Domain(format!("outcome must be 0 or 1, got {k}"))),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// (-1)^κ
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Zero => 1.0,
            Outcome::One => -1.0,
        }
    }
}

/// A projective measurement direction with a short label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    pub label: String,
    pub direction: BlochVector,
}

impl MeasurementSetting {
    pub fn new(label: impl Into<String>, direction: BlochVector) -> Result<Self> {
        if !direction.is_finite() || (direction.norm() - 1.0).abs() > EPS_TOL {
            return Err(Error::Domain(format!(
                "measurement direction must be a unit vector, |n| = {}",
                direction.norm()
            )));
        }
        Ok(Self {
            label: label.into(),
            direction,
        })
    }

    /// Normalizes `direction` before constructing the setting.
    pub fn along(label: impl Into<String>, direction: BlochVector) -> Result<Self> {
        let unit = direction
            .normalized()
            .ok_or_else(|| Error::Domain("zero measurement direction".into()))?;
        Self::new(label, unit)
    }

    pub fn x() -> Self {
        Self {
            label: "x".into(),
            direction: BlochVector::X,
        }
    }

    pub fn y() -> Self {
        Self {
            label: "y".into(),
            direction: BlochVector::Y,
        }
    }

    pub fn z() -> Self {
        Self {
            label: "z".into(),
            direction: BlochVector::Z,
        }
    }
}

/// Π_{κ|n} = [I + (-1)^κ n·σ]/2.
pub fn projector(setting: &MeasurementSetting, outcome: Outcome) -> Result<QubitOperator> {
    let n = setting.direction;
    if (n.norm() - 1.0).abs() > EPS_TOL {
        return Err(Error::Domain(format!("non-unit direction |n| = {}", n.norm())));
    }
    Ok(QubitOperator::from_bloch(n * outcome.sign()))
}

/// Closed-form fidelity of two qubit states given by Bloch vectors:
/// Tr(ρσ) + 2√(det ρ det σ).
pub fn bloch_fidelity(r: BlochVector, s: BlochVector) -> f64 {
    let dr = (1.0 - r.norm_squared()).max(0.0);
    let ds = (1.0 - s.norm_squared()).max(0.0);
    (0.5 * (1.0 + r.dot(s) + (dr * ds).sqrt())).clamp(0.0, 1.0)
}
