use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use super::qubit::{c, C64};
use super::{QubitOperator, EPS_TOL};
use crate::error::{Error, Result};

/// Which party a reduction or measurement refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Parameters (θ, η) of the state η|Ψ(θ)⟩⟨Ψ(θ)| + (1−η)|Φ(θ)⟩⟨Φ(θ)|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub theta: f64,
    pub eta: f64,
}

impl FamilyParams {
    pub fn new(theta: f64, eta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
            return Err(Error::Domain(format!("theta = {theta} not in [0, pi/2]")));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Domain(format!("eta = {eta} not in [0, 1]")));
        }
        Ok(Self {
            theta: theta.min(FRAC_PI_2),
            eta,
        })
    }

    /// Maps η < 1/2 onto 1 − η. A σx flip on qubit A swaps |Ψ⟩ and |Φ⟩, so
    /// the two parameter points are related by a local unitary.
    pub fn reflected(self) -> Self {
        Self {
            theta: self.theta,
            eta: self.eta.max(1.0 - self.eta),
        }
    }

    /// sin 2θ
    pub fn sin2(self) -> f64 {
        (2.0 * self.theta).sin()
    }

    /// cos 2θ
    pub fn cos2(self) -> f64 {
        (2.0 * self.theta).cos()
    }

    /// 2η − 1
    pub fn visibility(self) -> f64 {
        2.0 * self.eta - 1.0
    }

    /// Closed-form concurrence |sin 2θ|·|2η − 1|.
    pub fn concurrence(self) -> f64 {
        (self.sin2() * self.visibility()).abs()
    }
}

/// A two-qubit density operator in the basis |00⟩, |01⟩, |10⟩, |11⟩ with
/// qubit A as the left tensor factor.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    m: Matrix4<C64>,
    family: Option<FamilyParams>,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity (all within `EPS_TOL`).
    pub fn from_matrix(m: Matrix4<C64>) -> Result<Self> {
        let dev = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > EPS_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > EPS_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let min = hermitian_eigenvalues(&to_dynamic(&m))[0];
        if min < -EPS_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self {
            family: detect_family(&m),
            m,
        })
    }

    /// Hermitizes, clips negative eigenvalues to zero and renormalizes.
    /// Used for matrices reconstructed from noisy data.
    pub fn from_matrix_clipped(m: Matrix4<C64>) -> Result<Self> {
        let h = (m + m.adjoint()) * c(0.5, 0.0);
        let clipped = psd_project(&to_dynamic(&h));
        let tr = clipped.trace().re;
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::InvalidTrace(tr));
        }
        let mut out = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out[(i, j)] = clipped[(i, j)] / tr;
            }
        }
        Ok(Self {
            family: detect_family(&out),
            m: out,
        })
    }

    /// η|Ψ(θ)⟩⟨Ψ(θ)| + (1−η)|Φ(θ)⟩⟨Φ(θ)| with |Ψ(θ)⟩ = cosθ|00⟩ + sinθ|11⟩ and
    /// |Φ(θ)⟩ = cosθ|10⟩ + sinθ|01⟩.
    pub fn family(theta: f64, eta: f64) -> Result<Self> {
        let params = FamilyParams::new(theta, eta)?;
        let (s, co) = params.theta.sin_cos();
        let psi = [co, 0.0, 0.0, s];
        let phi = [0.0, s, co, 0.0];
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let v = params.eta * psi[i] * psi[j] + (1.0 - params.eta) * phi[i] * phi[j];
                m[(i, j)] = c(v, 0.0);
            }
        }
        Ok(Self {
            m,
            family: Some(params),
        })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            m: Matrix4::identity() * c(0.25, 0.0),
            family: None,
        }
    }

    /// ρa ⊗ ρb
    pub fn product(a: &QubitOperator, b: &QubitOperator) -> Result<Self> {
        let (ma, mb) = (a.matrix(), b.matrix());
        let mut m = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        m[(2 * i + k, 2 * j + l)] = ma[(i, j)] * mb[(k, l)];
                    }
                }
            }
        }
        Self::from_matrix(m)
    }

    /// Parses the plain-text format: 16 lines `re im`, row-major. Blank lines
    /// and lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut vals = Vec::with_capacity(16);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Domain(format!("line {}: expected `re im`", lineno + 1)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Domain(format!("line {}: {e}", lineno + 1)))
            };
            let re = parse(parts.next())?;
            let im = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::Domain(format!("line {}: trailing tokens", lineno + 1)));
            }
            vals.push(c(re, im));
        }
        if vals.len() != 16 {
            return Err(Error::Domain(format!(
                "state file must contain 16 entries, found {}",
                vals.len()
            )));
        }
        Self::from_matrix(Matrix4::from_row_slice(&vals))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for i in 0..4 {
            for j in 0..4 {
                let z = self.m[(i, j)];
                out.push_str(&format!("{:.17e} {:.17e}\n", z.re, z.im));
            }
        }
        out
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.m
    }

    pub fn family_params(&self) -> Option<FamilyParams> {
        self.family
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&to_dynamic(&self.m))
    }

    /// Tr_A (side = A) or Tr_B (side = B).
    pub fn partial_trace(&self, traced: Side) -> QubitOperator {
        let mut r = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                r[(i, j)] = match traced {
                    Side::A => self.m[(i, j)] + self.m[(2 + i, 2 + j)],
                    Side::B => self.m[(2 * i, 2 * j)] + self.m[(2 * i + 1, 2 * j + 1)],
                };
            }
        }
        QubitOperator::from_matrix_unchecked(r)
    }

    /// Unnormalized state left on the other party after `measured` applies the
    /// effect `effect`: Tr_A[ρ(E⊗I)] when A measures, Tr_B[ρ(I⊗E)] when B does.
    pub fn conditional_operator(&self, measured: Side, effect: &QubitOperator) -> QubitOperator {
        let e = effect.matrix();
        let mut r = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = c(0.0, 0.0);
                for k in 0..2 {
                    for l in 0..2 {
                        acc += match measured {
                            Side::A => self.m[(2 * k + i, 2 * l + j)] * e[(l, k)],
                            Side::B => self.m[(2 * i + k, 2 * j + l)] * e[(l, k)],
                        };
                    }
                }
                r[(i, j)] = acc;
            }
        }
        QubitOperator::from_matrix_unchecked(r)
    }

    /// Conjugates with U ⊗ I (side A) or I ⊗ U (side B).
    pub fn apply_local_unitary(&self, side: Side, u: &Matrix2<C64>) -> Self {
        let id = Matrix2::<C64>::identity();
        let (a, b) = match side {
            Side::A => (*u, id),
            Side::B => (id, *u),
        };
        let mut k = Matrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        k[(2 * i + p, 2 * j + q)] = a[(i, j)] * b[(p, q)];
                    }
                }
            }
        }
        Self {
            m: k * self.m * k.adjoint(),
            family: None,
        }
    }

    /// The same state with parties exchanged (ρ_BA).
    pub fn swapped(&self) -> Self {
        let perm = [0usize, 2, 1, 3];
        let mut m = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[(perm[i], perm[j])] = self.m[(i, j)];
            }
        }
        Self { m, family: None }
    }
}

/// Recognizes matrices of the (θ, η) family: cos²θ = ρ₀₀ + ρ₂₂ and
/// η = ρ₀₀ + ρ₃₃, accepted when the rebuilt family state matches within
/// `EPS_TOL`.
fn detect_family(m: &Matrix4<C64>) -> Option<FamilyParams> {
    let cos2 = (m[(0, 0)].re + m[(2, 2)].re).clamp(0.0, 1.0);
    let eta = (m[(0, 0)].re + m[(3, 3)].re).clamp(0.0, 1.0);
    let candidate = TwoQubitState::family(cos2.sqrt().acos(), eta).ok()?;
    let dev = (candidate.m - m).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (dev <= EPS_TOL).then_some(candidate.family).flatten()
}

/// λρ + (1 − λ)I/4.
pub fn apply_white_noise(rho: &TwoQubitState, lambda: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda = {lambda} not in [0, 1]")));
    }
    let mixed = Matrix4::<C64>::identity() * c(0.25, 0.0);
    Ok(TwoQubitState {
        m: rho.m * c(lambda, 0.0) + mixed * c(1.0 - lambda, 0.0),
        family: None,
    })
}

/// (θ, η) → ρ, see [`TwoQubitState::family`].
pub fn make_family_state(theta: f64, eta: f64) -> Result<TwoQubitState> {
    TwoQubitState::family(theta, eta)
}

/// Tr_A or Tr_B of a two-qubit state.
pub fn partial_trace(rho: &TwoQubitState, traced: Side) -> QubitOperator {
    rho.partial_trace(traced)
}

/// Density operators that can be handed to [`fidelity`].
pub trait DensityOperator {
    fn to_dmatrix(&self) -> DMatrix<C64>;
}

impl DensityOperator for QubitOperator {
    fn to_dmatrix(&self) -> DMatrix<C64> {
        to_dynamic(self.matrix())
    }
}

impl DensityOperator for TwoQubitState {
    fn to_dmatrix(&self) -> DMatrix<C64> {
        to_dynamic(self.matrix())
    }
}

/// Uhlmann fidelity [Tr √(√ρ σ √ρ)]².
pub fn fidelity<D: DensityOperator>(rho: &D, sigma: &D) -> Result<f64> {
    let a = rho.to_dmatrix();
    let b = sigma.to_dmatrix();
    for m in [&a, &b] {
        let min = hermitian_eigenvalues(m)[0];
        if min < -EPS_TOL {
            return Err(Error::NotPositive(min));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > EPS_TOL {
            return Err(Error::InvalidTrace(tr));
        }
    }
    let sa = psd_sqrt(&a);
    let inner = &sa * &b * &sa;
    let root: f64 = hermitian_eigenvalues(&inner)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    Ok((root * root).clamp(0.0, 1.0))
}

fn to_dynamic<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> DMatrix<C64> {
    DMatrix::from_fn(N, N, |i, j| m[(i, j)])
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn spectral_map(m: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| c(f(l), 0.0)));
    v * d * v.adjoint()
}

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    spectral_map(m, |l| l.max(0.0).sqrt())
}

fn psd_project(m: &DMatrix<C64>) -> DMatrix<C64> {
    spectral_map(m, |l| l.max(0.0))
}
