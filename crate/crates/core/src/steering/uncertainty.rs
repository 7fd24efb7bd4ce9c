use serde::{Deserialize, Serialize};

use super::assemblage::Assemblage;
use super::ensemble::SteeringVerdict;
use super::sqhsm::{sqhsm_radius, SolutionSpace};
use crate::error::{Error, Result};
use crate::optim::{multi_start, NelderMeadOptions};
use crate::quantum::BlochVector;

/// A ball of possible positions for one conditional state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSphere {
    pub center: BlochVector,
    pub radius: f64,
}

impl ErrorSphere {
    pub fn new(center: BlochVector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("error radius {radius} must be finite and >= 0")));
        }
        Ok(Self { center, radius })
    }

    /// Radius √(Ex² + Ey² + Ez²).
    pub fn from_axis_errors(center: BlochVector, ex: f64, ey: f64, ez: f64) -> Self {
        Self {
            center,
            radius: (ex * ex + ey * ey + ez * ez).sqrt(),
        }
    }

    /// Spheres of the given radii centred on the assemblage's states.
    pub fn around(asm: &Assemblage, radii: [f64; 4]) -> Result<[Self; 4]> {
        let b = asm.blochs();
        let mut out = [Self {
            center: BlochVector::ZERO,
            radius: 0.0,
        }; 4];
        for i in 0..4 {
            out[i] = Self::new(b[i], radii[i])?;
        }
        Ok(out)
    }

    pub fn contains(&self, v: BlochVector) -> bool {
        self.center.distance(v) <= self.radius + 1e-12
    }
}

/// Outcome of the error-sphere minimization: the verdict and the displaced
/// assemblage that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertainRadius {
    pub verdict: SteeringVerdict,
    pub displaced: Assemblage,
}

#[derive(Debug, Clone, Copy)]
pub struct UncertaintyOptions {
    pub nm: NelderMeadOptions,
    pub restarts: usize,
}

impl Default for UncertaintyOptions {
    fn default() -> Self {
        Self {
            nm: NelderMeadOptions {
                max_evals: 6000,
                f_tol: 1e-12,
                x_tol: 1e-10,
            },
            restarts: 4,
        }
    }
}

const FEASIBILITY_TOL: f64 = 1e-9;
const PENALTY: f64 = 1e4;

/// Minimax radius over all no-signaling assemblages whose states lie in the
/// given spheres, with weights held at their measured values.
pub fn radius_with_uncertainty(asm: &Assemblage, errors: &[ErrorSphere; 4]) -> Result<SteeringVerdict> {
    Ok(radius_with_uncertainty_detailed(asm, errors, &UncertaintyOptions::default())?.verdict)
}

/// C1, C2 and D1 move inside their spheres; D2 follows from no-signaling
/// and must stay inside its own sphere and the Bloch ball.
pub fn radius_with_uncertainty_detailed(
    asm: &Assemblage,
    errors: &[ErrorSphere; 4],
    opts: &UncertaintyOptions,
) -> Result<UncertainRadius> {
    let centers = asm.blochs();
    for (e, c) in errors.iter().zip(centers) {
        if e.radius < 0.0 || !e.radius.is_finite() {
            return Err(Error::Domain("negative error radius".into()));
        }
        if e.center.distance(c) > 1e-9 {
            return Err(Error::InvalidAssemblage(
                "error sphere centres do not match the assemblage".into(),
            ));
        }
    }
    let baseline = sqhsm_radius(asm);
    if errors[..3].iter().all(|e| e.radius == 0.0) {
        return Ok(UncertainRadius {
            verdict: baseline,
            displaced: asm.clone(),
        });
    }

    let t = asm.weights();
    let ball = |x: &[f64], r: f64| {
        // Smooth bijection of R³ onto the open ball of radius r.
        let v = BlochVector::new(x[0], x[1], x[2]);
        v * (r / (1.0 + v.norm_squared()).sqrt())
    };
    let displaced = |x: &[f64]| -> ([BlochVector; 4], f64) {
        let mut v = centers;
        for k in 0..3 {
            v[k] = centers[k] + ball(&x[3 * k..3 * k + 3], errors[k].radius);
        }
        let mut violation = 0.0;
        if t[3] > 0.0 {
            let m = v[0] * t[0] + v[1] * t[1] - v[2] * t[2];
            v[3] = m / t[3];
            violation += (v[3].distance(centers[3]) - errors[3].radius).max(0.0);
        }
        for (k, b) in v.iter().enumerate() {
            if t[k] > 0.0 {
                violation += (b.norm() - 1.0).max(0.0);
            }
        }
        (v, violation)
    };
    let objective = |x: &[f64]| -> f64 {
        let (v, violation) = displaced(x);
        let m = std::array::from_fn(|k| v[k] * t[k]);
        SolutionSpace::new(t, m).solve().radius + PENALTY * violation
    };

    // Starts: no displacement, and each state pulled towards the
    // unconditional point or pushed radially.
    let b = asm.unconditional();
    let mut starts = vec![vec![0.0; 9]];
    for dir_sign in [1.0, -1.0] {
        let mut s = vec![0.0; 9];
        for k in 0..3 {
            if let Some(u) = ((b - centers[k]) * dir_sign).normalized() {
                s[3 * k..3 * k + 3].copy_from_slice(&u.to_array());
            }
        }
        starts.push(s);
    }
    let step = [0.5; 9];
    let best = multi_start(objective, &starts, &step, &opts.nm, opts.restarts);

    let (v, violation) = displaced(&best.x);
    if violation > FEASIBILITY_TOL || best.value >= baseline.radius {
        return Ok(UncertainRadius {
            verdict: baseline,
            displaced: asm.clone(),
        });
    }
    let parts = std::array::from_fn(|k| (t[k], v[k]));
    let moved = Assemblage::from_parts_unchecked(asm.steered, asm.settings.clone(), parts);
    let mut verdict = sqhsm_radius(&moved);
    verdict.converged = best.converged;
    Ok(UncertainRadius {
        verdict,
        displaced: moved,
    })
}
