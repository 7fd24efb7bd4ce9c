//! White-noise tolerance of A→B steering and fidelity floors that certify
//! one-way steering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rayon::prelude::*;

use crate::optim::{nelder_mead_restarts, NelderMeadOptions};
use crate::quantum::{
    apply_white_noise, bloch_fidelity, fidelity, BlochVector, FamilyParams, MeasurementSetting, Side, TwoQubitState,
};
use crate::steering::{classify, conditional_assemblage, Assemblage, SolutionSpace, SteeringClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaMin {
    pub value: f64,
    /// Separable parameters: no noise can be tolerated and 1 is returned.
    pub trivial: bool,
}

/// Smallest λ for which λρ + (1 − λ)I/4 is A→B steerable at {x, z}
/// (closed form).
pub fn lambda_min(theta: f64, eta: f64) -> Result<LambdaMin> {
    let p = FamilyParams::new(theta, eta)?;
    if p.concurrence() < 1e-12 {
        return Ok(LambdaMin {
            value: 1.0,
            trivial: true,
        });
    }
    let (c4, c8) = ((4.0 * theta).cos(), (8.0 * theta).cos());
    let s2 = p.sin2().powi(2);
    let v2 = (1.0 - 2.0 * eta).powi(2);
    let e = (eta - 1.0) * eta;
    let radicand = (-2.0 * e - 1.0) * s2 * s2 * (v2 * c4 + 4.0 * e - 1.0);
    let num = 4.0 * (v2 * c4 + 2.0 * radicand.max(0.0).sqrt() + v2);
    let den = v2 * c8 + 28.0 * e - 4.0 * c4 + 11.0;
    Ok(LambdaMin {
        value: (num / den).clamp(0.0, 1.0),
        trivial: false,
    })
}

fn xz() -> [MeasurementSetting; 2] {
    [MeasurementSetting::x(), MeasurementSetting::z()]
}

/// A→B radius at {x, z} of the noisy family state.
pub fn noisy_radius(theta: f64, eta: f64, lambda: f64) -> Result<f64> {
    let rho = apply_white_noise(&TwoQubitState::family(theta, eta)?, lambda)?;
    let asm = conditional_assemblage(&rho, xz(), Side::B)?;
    Ok(SolutionSpace::from_assemblage(&asm).solve().radius)
}

/// λ at which the noisy {x, z} radius crosses one, found by bisection.
pub fn noise_crossing(theta: f64, eta: f64) -> Result<f64> {
    if noisy_radius(theta, eta, 1.0)? <= 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if noisy_radius(theta, eta, mid)? > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceFidelity {
    pub lambda_min: f64,
    /// F(λ_min ρ + (1 − λ_min)I/4, ρ)
    pub fidelity: f64,
}

/// Attached to source-fidelity reports.
pub const SOURCE_FIDELITY_CAVEAT: &str =
    "assumes the only deviation from the ideal state is white noise; other errors can break the bound";

fn require_one_way(theta: f64, eta: f64) -> Result<()> {
    if classify(theta, eta)? != SteeringClass::OneWayAToB {
        return Err(Error::Region {
            theta,
            eta,
            region: "one-way",
        });
    }
    Ok(())
}

/// Fidelity of the boundary noisy state to the ideal one.
pub fn min_source_fidelity(theta: f64, eta: f64) -> Result<SourceFidelity> {
    require_one_way(theta, eta)?;
    let lam = lambda_min(theta, eta)?.value;
    let rho = TwoQubitState::family(theta, eta)?;
    let noisy = apply_white_noise(&rho, lam)?;
    Ok(SourceFidelity {
        lambda_min: lam,
        fidelity: fidelity(&noisy, &rho)?,
    })
}

/// Which side of the radius-one boundary a fidelity floor guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FloorKind {
    /// Every assemblage above the floor is steerable.
    Steerable,
    /// Every assemblage above the floor is unsteerable.
    Unsteerable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityFloor {
    pub value: f64,
    /// Constraint violation left at the best point found.
    pub residual: f64,
    /// Radius of the adversarial assemblage minus one.
    pub margin: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Objective evaluations per local run of the floor searches.
pub const EVALS_PER_RUN: usize = 4_000;

/// Feasible runs whose best values agree to this count as converged.
pub const FLOOR_AGREEMENT: f64 = 1e-3;

fn min_fidelity(v: &[BlochVector; 4], v0: &[BlochVector; 4]) -> f64 {
    (0..4)
        .map(|k| bloch_fidelity(v[k], v0[k]))
        .fold(f64::INFINITY, f64::min)
}

/// Result of one local run: min-fidelity, constraint residual, radius.
#[derive(Debug, Clone, Copy)]
struct Run {
    value: f64,
    residual: f64,
    radius: f64,
    evals: usize,
}

const FEASIBLE: f64 = 1e-7;

fn summarize(runs: &[Run]) -> FidelityFloor {
    let evaluations = runs.iter().map(|r| r.evals).sum();
    let mut feasible: Vec<&Run> = runs.iter().filter(|r| r.residual <= FEASIBLE).collect();
    feasible.sort_by(|a, b| b.value.total_cmp(&a.value));
    match feasible.as_slice() {
        [] => {
            let least = runs
                .iter()
                .min_by(|a, b| a.residual.total_cmp(&b.residual))
                .expect("at least one run");
            FidelityFloor {
                value: least.value,
                residual: least.residual,
                margin: least.radius - 1.0,
                evaluations,
                converged: false,
            }
        }
        [best, rest @ ..] => FidelityFloor {
            value: best.value,
            residual: best.residual,
            margin: best.radius - 1.0,
            evaluations,
            converged: rest.first().is_some_and(|r| best.value - r.value <= FLOOR_AGREEMENT),
        },
    }
}

/// Highest min-fidelity reachable by an assemblage on the wrong side of the
/// radius-one boundary. Above it every assemblage lies on the `kind` side.
///
/// The search is a lower estimate of that supremum, not a certificate.
/// Runs are nested in `budget`, so a larger budget can only raise it.
pub fn fidelity_floor(nominal: &Assemblage, kind: FloorKind, budget: usize, seed: u64) -> FidelityFloor {
    let runs = (budget / EVALS_PER_RUN).max(1);
    match kind {
        FloorKind::Steerable => unsteerable_search(nominal, runs, seed),
        FloorKind::Unsteerable => steerable_search(nominal, runs, seed),
    }
}

fn perturbed_starts(first: &[f64], n: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![first.to_vec()];
    while starts.len() < n {
        starts.push(first.iter().map(|x| x + rng.random_range(-scale..scale)).collect());
    }
    starts
}

/// Searches unsteerable assemblages through their hidden-state models:
/// four probabilities and four points in the unit ball, one per
/// deterministic response (C1 D1, C1 D2, C2 D1, C2 D2). The reachable set
/// is convex, so simplex runs from the nominal ensemble suffice.
fn unsteerable_search(nominal: &Assemblage, runs: usize, seed: u64) -> FidelityFloor {
    const GROUPS: [[usize; 2]; 4] = [[0, 1], [2, 3], [0, 2], [1, 3]];
    let v0 = nominal.blochs();
    let unpack = |x: &[f64]| -> ([f64; 4], [BlochVector; 4]) {
        let n2: f64 = x[..4].iter().map(|z| z * z).sum::<f64>().max(1e-300);
        let p: [f64; 4] = std::array::from_fn(|i| x[i] * x[i] / n2);
        let h: [BlochVector; 4] = std::array::from_fn(|i| {
            let y = BlochVector::new(x[4 + 3 * i], x[5 + 3 * i], x[6 + 3 * i]);
            y / y.norm().max(1.0)
        });
        let mut t = [0.0; 4];
        let mut v = [BlochVector::ZERO; 4];
        for (j, g) in GROUPS.iter().enumerate() {
            t[j] = p[g[0]] + p[g[1]];
            let m = h[g[0]] * p[g[0]] + h[g[1]] * p[g[1]];
            v[j] = if t[j] > 1e-14 { m / t[j] } else { BlochVector::ZERO };
        }
        (t, v)
    };
    let objective = |x: &[f64]| {
        let (t, v) = unpack(x);
        if t.iter().any(|&w| w <= 1e-14) {
            return 0.0;
        }
        -min_fidelity(&v, &v0)
    };

    // Nominal optimal ensemble shrunk into the unit ball. Solver order is
    // (C1 D1, C2 D2, C2 D1, C1 D2).
    let space = SolutionSpace::from_assemblage(nominal);
    let sol = space.solve();
    let p = space.probabilities(sol.s);
    let u = space.hidden_moments(sol.w);
    let mut x0 = vec![0.0; 16];
    for (i, k) in [0, 3, 2, 1].into_iter().enumerate() {
        x0[i] = p[k].max(0.0).sqrt();
        let h = if p[k] > 1e-12 { u[k] / p[k] } else { BlochVector::ZERO };
        let h = h / h.norm().max(1.0);
        x0[4 + 3 * i..7 + 3 * i].copy_from_slice(&h.to_array());
    }
    let opts = NelderMeadOptions {
        max_evals: EVALS_PER_RUN / 2,
        f_tol: 1e-14,
        x_tol: 1e-12,
    };
    let results: Vec<Run> = perturbed_starts(&x0, runs, 0.1, seed)
        .par_iter()
        .map(|x| {
            let m = nelder_mead_restarts(objective, x, &[0.05; 16], &opts, 1);
            let (t, v) = unpack(&m.x);
            let mom = std::array::from_fn(|k| v[k] * t[k]);
            let r = SolutionSpace::new(t, mom).solve().radius;
            Run {
                value: -m.value,
                residual: (r - 1.0).max(0.0),
                radius: r,
                evals: m.evals,
            }
        })
        .collect();
    summarize(&results)
}

/// Constrained search over steerable assemblages near the nominal one:
/// maximize f subject to every state having fidelity at least f, radius at
/// least one, and D2 (fixed by no-signaling) staying physical.
fn steerable_search(nominal: &Assemblage, runs: usize, seed: u64) -> FidelityFloor {
    let t0 = nominal.weights();
    let v0 = nominal.blochs();
    // x = (f, ΔtC1, ΔtD1, ΔvC1, ΔvC2, ΔvD1)
    let unpack = move |x: &[f64]| -> ([f64; 4], [BlochVector; 4]) {
        let (tc1, td1) = (t0[0] + x[1], t0[2] + x[2]);
        let t = [tc1, 1.0 - tc1, td1, 1.0 - td1];
        let mut v = v0;
        for k in 0..3 {
            v[k] = v0[k] + BlochVector::new(x[3 + 3 * k], x[4 + 3 * k], x[5 + 3 * k]);
        }
        v[3] = (v[0] * t[0] + v[1] * t[1] - v[2] * t[2]) / t[3];
        (t, v)
    };
    let radius = move |x: &[f64]| {
        let (t, v) = unpack(x);
        SolutionSpace::new(t, std::array::from_fn(|k| v[k] * t[k]))
            .solve()
            .radius
    };
    let constraint = move |k: usize| {
        move |x: &[f64], _: &mut ()| -> f64 {
            if k == 8 {
                return radius(x) - 1.0;
            }
            let (_, v) = unpack(x);
            if k < 4 {
                bloch_fidelity(v[k], v0[k]) - x[0]
            } else {
                1.0 - v[k - 4].norm()
            }
        }
    };
    let constraints: Vec<_> = (0..9).map(constraint).collect();
    let margin = 1e-6;
    let mut bounds = vec![
        (0.0, 1.0),
        (margin - t0[0], 1.0 - margin - t0[0]),
        (margin - t0[2], 1.0 - margin - t0[2]),
    ];
    bounds.extend([(-2.0, 2.0); 9]);

    let mut x0 = [0.0; 12];
    x0[0] = 0.9;
    let starts: Vec<Vec<f64>> = perturbed_starts(&x0[1..], runs, 0.05, seed)
        .into_iter()
        .map(|s| std::iter::once(x0[0]).chain(s).collect())
        .collect();
    let results: Vec<Run> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let rho = if i % 2 == 0 { 0.05 } else { 0.02 };
            let out = cobyla::minimize(
                |x: &[f64], _: &mut ()| -x[0],
                x,
                &bounds,
                &constraints,
                (),
                EVALS_PER_RUN,
                cobyla::RhoBeg::All(rho),
                Some(cobyla::StopTols {
                    ftol_rel: 1e-12,
                    ..Default::default()
                }),
            );
            let x = match out {
                Ok((_, x, _)) | Err((_, x, _)) => x,
            };
            let residual = constraints
                .iter()
                .map(|c| (-c(&x, &mut ())).max(0.0))
                .fold(0.0, f64::max);
            let (_, v) = unpack(&x);
            Run {
                value: min_fidelity(&v, &v0),
                residual,
                radius: radius(&x),
                evals: EVALS_PER_RUN,
            }
        })
        .collect();
    summarize(&results)
}

/// Minimum radius over assemblages whose states keep at least fidelity
/// `floors[j]` to the nominal state j, with the nominal weights. The
/// regions are larger than counting-statistics spheres of comparable
/// fidelity, so this radius sits below the sphere-based one.
pub fn fidelity_region_radius(
    nominal: &Assemblage,
    floors: [f64; 4],
    runs: usize,
    seed: u64,
) -> Result<FidelityRegionRadius> {
    if floors.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(Error::Domain(format!(
            "fidelity floors must lie in [0, 1], got {floors:?}"
        )));
    }
    let t = nominal.weights();
    let v0 = nominal.blochs();
    let unpack = move |x: &[f64]| -> [BlochVector; 4] {
        let mut v = v0;
        for k in 0..3 {
            v[k] = v0[k] + BlochVector::new(x[3 * k], x[3 * k + 1], x[3 * k + 2]);
        }
        if t[3] > 0.0 {
            v[3] = (v[0] * t[0] + v[1] * t[1] - v[2] * t[2]) / t[3];
        }
        v
    };
    let radius = move |x: &[f64]| {
        let v = unpack(x);
        SolutionSpace::new(t, std::array::from_fn(|k| v[k] * t[k]))
            .solve()
            .radius
    };
    let constraint = move |k: usize| {
        move |x: &[f64], _: &mut ()| -> f64 {
            let v = unpack(x);
            if k < 4 {
                bloch_fidelity(v[k], v0[k]) - floors[k]
            } else {
                1.0 - v[k - 4].norm()
            }
        }
    };
    let constraints: Vec<_> = (0..8).map(constraint).collect();
    let bounds = [(-2.0, 2.0); 9];
    let results: Vec<(f64, f64)> = perturbed_starts(&[0.0; 9], runs.max(1), 0.05, seed)
        .par_iter()
        .map(|x0| {
            let out = cobyla::minimize(
                |x: &[f64], _: &mut ()| radius(x),
                x0,
                &bounds,
                &constraints,
                (),
                EVALS_PER_RUN,
                cobyla::RhoBeg::All(0.02),
                Some(cobyla::StopTols {
                    ftol_rel: 1e-12,
                    ..Default::default()
                }),
            );
            let x = match out {
                Ok((_, x, _)) | Err((_, x, _)) => x,
            };
            let residual = constraints
                .iter()
                .map(|c| (-c(&x, &mut ())).max(0.0))
                .fold(0.0, f64::max);
            (radius(&x), residual)
        })
        .collect();
    let baseline = SolutionSpace::from_assemblage(nominal).solve().radius;
    let best = results
        .iter()
        .filter(|(_, res)| *res <= FEASIBLE)
        .map(|(r, _)| *r)
        .fold(baseline, f64::min);
    Ok(FidelityRegionRadius {
        radius: best,
        nominal_radius: baseline,
        feasible_runs: results.iter().filter(|(_, res)| *res <= FEASIBLE).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityRegionRadius {
    /// Smallest raw radius found inside the fidelity regions.
    pub radius: f64,
    pub nominal_radius: f64,
    pub feasible_runs: usize,
}

/// (F_Bob, F_Alice) at settings {x, z}.
pub fn cs_fidelity_floors(theta: f64, eta: f64, budget: usize) -> Result<(FidelityFloor, FidelityFloor)> {
    require_one_way(theta, eta)?;
    let rho = TwoQubitState::family(theta, eta)?;
    let bob = conditional_assemblage(&rho, xz(), Side::B)?;
    let alice = conditional_assemblage(&rho, xz(), Side::A)?;
    let half = (budget / 2).max(1);
    Ok((
        fidelity_floor(&bob, FloorKind::Steerable, half, 0x05ee_db0b),
        fidelity_floor(&alice, FloorKind::Unsteerable, half, 0x5eed_a11ce),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseThresholds {
    pub lambda_min: f64,
    pub f_source_min: f64,
    pub f_bob: FidelityFloor,
    pub f_alice: FidelityFloor,
    /// max(F_Alice, F_Bob)
    pub f_one_way: f64,
}

pub fn noise_thresholds(theta: f64, eta: f64, budget: usize) -> Result<NoiseThresholds> {
    let src = min_source_fidelity(theta, eta)?;
    let (f_bob, f_alice) = cs_fidelity_floors(theta, eta, budget)?;
    Ok(NoiseThresholds {
        lambda_min: src.lambda_min,
        f_source_min: src.fidelity,
        f_bob,
        f_alice,
        f_one_way: f_bob.value.max(f_alice.value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn bell_lambda_min() {
        let l = lambda_min(FRAC_PI_4, 1.0).unwrap();
        assert!((l.value - 0.5f64.sqrt()).abs() < 1e-12, "{}", l.value);
        assert!((noise_crossing(FRAC_PI_4, 1.0).unwrap() - l.value).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_crossing() {
        for (t, e) in [(5.0 * PI / 48.0, 0.8), (0.5, 0.7), (1.1, 0.9)] {
            let a = lambda_min(t, e).unwrap().value;
            let b = noise_crossing(t, e).unwrap();
            assert!((a - b).abs() < 1e-6, "{t} {e}: {a} vs {b}");
        }
    }

    #[test]
    fn trivial_parameters_tolerate_no_noise() {
        let l = lambda_min(0.0, 0.8).unwrap();
        assert!(l.trivial && l.value == 1.0);
    }

    #[test]
    fn source_floor_in_range() {
        let s = min_source_fidelity(5.0 * PI / 48.0, 0.8).unwrap();
        assert!(s.fidelity > 0.9 && s.fidelity < 1.0, "{s:?}");
        assert!(min_source_fidelity(0.775, 0.989).is_err());
    }

    #[test]
    fn floors_are_ordered_and_below_one() {
        let (bob, alice) = cs_fidelity_floors(5.0 * PI / 48.0, 0.8, 16_000).unwrap();
        for f in [bob, alice] {
            assert!(f.value > 0.9 && f.value < 1.0, "{f:?}");
            assert!(f.residual <= 1e-7);
        }
        assert!(cs_fidelity_floors(0.775, 0.989, 16_000).is_err());
    }

    #[test]
    fn fidelity_regions_shrink_the_radius() {
        let rho = TwoQubitState::family(0.488, 0.727).unwrap();
        let asm = conditional_assemblage(&rho, xz(), Side::B).unwrap();
        let full = fidelity_region_radius(&asm, [1.0; 4], 2, 0).unwrap();
        // A fidelity slack of 1e-7 still allows displacements of order 3e-4.
        assert!((full.radius - full.nominal_radius).abs() < 2e-3, "{full:?}");
        let loose = fidelity_region_radius(&asm, [0.993; 4], 4, 0).unwrap();
        assert!(loose.radius < full.radius - 1e-3, "{loose:?}");
    }
}
