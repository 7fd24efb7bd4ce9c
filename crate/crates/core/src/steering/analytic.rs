use std::f64::consts::{FRAC_PI_4, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quantum::FamilyParams;

/// A closed-form radius, with a flag for parameters where the state is
/// separable and the value 1 is returned by convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticRadius {
    pub value: f64,
    pub trivial: bool,
}

impl AnalyticRadius {
    fn trivial() -> Self {
        Self {
            value: 1.0,
            trivial: true,
        }
    }
}

/// Half-width of the window around θ = π/4 where the A→B closed form is
/// replaced by interpolation.
pub const QUARTER_PI_WINDOW: f64 = 2e-3;

fn is_trivial(p: &FamilyParams) -> bool {
    (p.sin2() * p.visibility()).abs() < 1e-12
}

/// Closed form for η ∈ (1/2, 1]. Both numerator and denominator vanish at
/// θ = π/4.
fn closed_form_ab(theta: f64, eta: f64) -> f64 {
    let c4 = (4.0 * theta).cos();
    let c8 = (8.0 * theta).cos();
    let v2 = (1.0 - 2.0 * eta).powi(2);
    let t1 = 13.0 - 36.0 * eta + 36.0 * eta * eta + 4.0 * (8.0 * eta * eta - 8.0 * eta + 1.0) * c4 - v2 * c8;
    let inner = 3.0
        - 8.0 * eta * (eta - 1.0) * (26.0 * eta * eta - 26.0 * eta + 9.0)
        - 4.0 * v2 * (12.0 * eta * eta - 12.0 * eta + 1.0) * c4
        + v2 * v2 * c8;
    let t2 = SQRT_2 * (c4 - 1.0) * inner.max(0.0).sqrt();
    let ratio = ((t1 + t2) / (1.0 + c4)).max(0.0);
    ratio.sqrt() / (2.0 * SQRT_2 * (2.0 * eta - 1.0))
}

/// A→B steering radius of the family state at settings {x, z}.
///
/// Near θ = π/4 the closed form loses precision, so it is evaluated at
/// π/4 ± h and π/4 ± 2h (h = [`QUARTER_PI_WINDOW`]) and interpolated with
/// the cubic through those four nodes.
pub fn analytic_radius_ab(theta: f64, eta: f64) -> Result<AnalyticRadius> {
    let p = FamilyParams::new(theta, eta)?.reflected();
    if is_trivial(&p) {
        return Ok(AnalyticRadius::trivial());
    }
    let h = QUARTER_PI_WINDOW;
    let value = if (p.theta - FRAC_PI_4).abs() < h {
        let nodes = [-2.0, -1.0, 1.0, 2.0].map(|k| FRAC_PI_4 + k * h);
        let values = nodes.map(|t| closed_form_ab(t, p.eta));
        lagrange(&nodes, &values, p.theta)
    } else {
        closed_form_ab(p.theta, p.eta)
    };
    Ok(AnalyticRadius { value, trivial: false })
}

fn lagrange(xs: &[f64; 4], ys: &[f64; 4], x: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..4 {
        let mut basis = 1.0;
        for j in 0..4 {
            if i != j {
                basis *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        total += basis * ys[i];
    }
    total
}

/// B→A steering radius of the family state: √((2η−1)² + sin²2θ) when
/// |cos 2θ| < |2η−1| and exactly 1 otherwise.
pub fn analytic_radius_ba(theta: f64, eta: f64) -> Result<AnalyticRadius> {
    let p = FamilyParams::new(theta, eta)?.reflected();
    if is_trivial(&p) {
        return Ok(AnalyticRadius::trivial());
    }
    let x = p.visibility();
    if p.cos2().abs() >= x.abs() {
        return Ok(AnalyticRadius {
            value: 1.0,
            trivial: false,
        });
    }
    Ok(AnalyticRadius {
        value: x.hypot(p.sin2()),
        trivial: false,
    })
}
