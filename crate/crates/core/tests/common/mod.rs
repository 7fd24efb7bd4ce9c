//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Complex, Matrix4};

pub type C = Complex<f64>;

const GOLDEN_STEPS: usize = 50;

fn golden<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_STEPS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Brute-force SQHSM radius from weights and unnormalized moments in
/// C1, C2, D1, D2 order.
///
/// Hidden states: a = (C1, D1), b = (C1, D2), c = (C2, D1), d = (C2, D2).
/// With p_a = s and u_a = w every other probability and moment follows from
/// the marginal constraints. Every level is minimized by a golden-section
/// search: over w_z, w_y, w_x (convex) and then s.
pub fn oracle_radius(t: [f64; 4], m: [[f64; 3]; 4]) -> f64 {
    let [tc1, _, td1, _] = t;
    let lo = (tc1 + td1 - 1.0).max(0.0);
    let hi = tc1.min(td1);
    if hi - lo < 1e-14 {
        return inner(lo, t, m);
    }
    golden(|s| inner(s, t, m), lo, hi)
}

fn inner(s: f64, t: [f64; 4], m: [[f64; 3]; 4]) -> f64 {
    golden(
        |wx| golden(|wy| golden(|wz| objective(s, [wx, wy, wz], t, m), -2.0, 2.0), -2.0, 2.0),
        -2.0,
        2.0,
    )
}

fn objective(s: f64, w: [f64; 3], t: [f64; 4], m: [[f64; 3]; 4]) -> f64 {
    let [tc1, _, td1, _] = t;
    let [mc1, mc2, md1, _] = m;
    let p = [s, tc1 - s, td1 - s, 1.0 - tc1 - td1 + s];
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let add = |a: [f64; 3], b: [f64; 3]| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
    let u = [w, sub(mc1, w), sub(md1, w), add(sub(mc2, md1), w)];
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        let n = (u[i][0] * u[i][0] + u[i][1] * u[i][1] + u[i][2] * u[i][2]).sqrt();
        if p[i] <= 1e-15 {
            if n > 1e-12 {
                return f64::INFINITY;
            }
            continue;
        }
        worst = worst.max(n / p[i]);
    }
    worst
}

/// The family state built directly from its kets.
pub fn family_matrix(theta: f64, eta: f64) -> Matrix4<C> {
    let (s, c) = theta.sin_cos();
    let psi = [c, 0.0, 0.0, s];
    let phi = [0.0, s, c, 0.0];
    Matrix4::from_fn(|i, j| C::new(eta * psi[i] * psi[j] + (1.0 - eta) * phi[i] * phi[j], 0.0))
}

fn sorted_eigs(m: &Matrix4<C>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C::new(0.5, 0.0);
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Wootters concurrence: max(0, λ1 − λ2 − λ3 − λ4) with λ² the eigenvalues
/// of ρ(σy⊗σy)ρ*(σy⊗σy), descending. They are taken from the Hermitian
/// √ρ ρ̃ √ρ, which has the same spectrum.
pub fn wootters_concurrence(rho: &Matrix4<C>) -> f64 {
    let mut yy = Matrix4::<C>::zeros();
    yy[(0, 3)] = C::new(-1.0, 0.0);
    yy[(1, 2)] = C::new(1.0, 0.0);
    yy[(2, 1)] = C::new(1.0, 0.0);
    yy[(3, 0)] = C::new(-1.0, 0.0);
    let tilde = yy * rho.conjugate() * yy;
    let eig = ((rho + rho.adjoint()) * C::new(0.5, 0.0)).symmetric_eigen();
    let root = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| C::new(l.max(0.0).sqrt(), 0.0)));
    let sqrt_rho = eig.eigenvectors * root * eig.eigenvectors.adjoint();
    let mut lam: Vec<f64> = sorted_eigs(&(sqrt_rho * tilde * sqrt_rho))
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    lam.reverse();
    (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0)
}

/// Smallest eigenvalue of the partial transpose on B.
pub fn min_partial_transpose_eig(rho: &Matrix4<C>) -> f64 {
    let pt = Matrix4::from_fn(|i, j| {
        let (a, b) = (i / 2, i % 2);
        let (c, d) = (j / 2, j % 2);
        rho[(2 * a + d, 2 * c + b)]
    });
    sorted_eigs(&pt)[0]
}
