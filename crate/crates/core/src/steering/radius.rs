use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use super::assemblage::{conditional_assemblage, Assemblage, Direction};
use super::ensemble::SteeringVerdict;
use super::sqhsm::{sqhsm_radius, SolutionSpace};
use crate::error::Result;
use crate::optim::{nelder_mead_restarts, NelderMeadOptions};
use crate::quantum::{projector, BlochVector, MeasurementSetting, Outcome, TwoQubitState};

/// How the maximization over pairs of settings is carried out.
#[derive(Debug, Clone, PartialEq)]
pub enum SettingsSearch {
    /// Family states: {x, z}, plus for B→A the pair (±sin 2θ, 0, cos 2θ)
    /// that makes one conditional state of each setting pure. Other states
    /// fall back to the default exhaustive search.
    Auto,
    Fixed([MeasurementSetting; 2]),
    Exhaustive(ExhaustiveOptions),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExhaustiveOptions {
    /// Polar samples on [0, π/2], both ends included.
    pub polar: usize,
    /// Azimuth samples on [0, 2π).
    pub azimuthal: usize,
    /// Number of best grid pairs polished by a local simplex search.
    pub refine: usize,
}

impl Default for ExhaustiveOptions {
    fn default() -> Self {
        Self {
            polar: 24,
            azimuthal: 24,
            refine: 6,
        }
    }
}

/// R(ρ) for the given direction, using [`SettingsSearch::Auto`].
pub fn steering_radius(rho: &TwoQubitState, direction: Direction) -> Result<SteeringVerdict> {
    steering_radius_with(rho, direction, &SettingsSearch::Auto)
}

/// R(ρ) = max(1, max over settings of r(ρ)). The floor at one is the
/// robustness being non-negative; the minimizing ensemble still belongs to
/// the best pair found.
pub fn steering_radius_with(
    rho: &TwoQubitState,
    direction: Direction,
    search: &SettingsSearch,
) -> Result<SteeringVerdict> {
    let raw = match search {
        SettingsSearch::Fixed(pair) => sqhsm_radius(&conditional_assemblage(rho, pair.clone(), direction.steered())?),
        SettingsSearch::Exhaustive(opts) => exhaustive(rho, direction, opts)?,
        SettingsSearch::Auto => match family_candidates(rho, direction) {
            Some(pairs) => best_of(rho, direction, pairs)?,
            None => exhaustive(rho, direction, &ExhaustiveOptions::default())?,
        },
    };
    Ok(floored(raw))
}

fn floored(v: SteeringVerdict) -> SteeringVerdict {
    SteeringVerdict::new(
        v.radius.max(1.0),
        v.direction,
        v.settings,
        v.minimizing_ensemble,
        v.converged,
    )
}

/// Candidate settings for family states, or `None` for other states.
pub fn family_candidates(rho: &TwoQubitState, direction: Direction) -> Option<Vec<[MeasurementSetting; 2]>> {
    let p = rho.family_params()?;
    let mut pairs = vec![[MeasurementSetting::x(), MeasurementSetting::z()]];
    if direction == Direction::BToA {
        let (s, c) = (p.sin2(), p.cos2());
        let n1 = BlochVector::new(s, 0.0, c);
        let n2 = BlochVector::new(-s, 0.0, c);
        if s.abs() > 1e-12 && n1.dot(n2).abs() < 1.0 - 1e-9 {
            pairs.push([
                MeasurementSetting::new("n1", n1).ok()?,
                MeasurementSetting::new("n2", n2).ok()?,
            ]);
        }
    }
    Some(pairs)
}

fn best_of(rho: &TwoQubitState, direction: Direction, pairs: Vec<[MeasurementSetting; 2]>) -> Result<SteeringVerdict> {
    let mut best: Option<SteeringVerdict> = None;
    for pair in pairs {
        let v = sqhsm_radius(&conditional_assemblage(rho, pair, direction.steered())?);
        if best.as_ref().is_none_or(|b| v.radius > b.radius) {
            best = Some(v);
        }
    }
    Ok(best.expect("at least one candidate pair"))
}

/// Unnormalized conditional states for one measurement direction.
#[derive(Clone, Copy)]
struct Cell {
    dir: BlochVector,
    t: [f64; 2],
    m: [BlochVector; 2],
}

fn cell(rho: &TwoQubitState, direction: Direction, n: BlochVector) -> Result<Cell> {
    let setting = MeasurementSetting::along("n", n)?;
    let mut t = [0.0; 2];
    let mut m = [BlochVector::ZERO; 2];
    for k in Outcome::BOTH {
        let op = rho.conditional_operator(direction.measuring(), &projector(&setting, k)?);
        t[k.index()] = op.trace();
        m[k.index()] = op.moment();
    }
    Ok(Cell {
        dir: setting.direction,
        t,
        m,
    })
}

fn pair_radius(a: &Cell, b: &Cell) -> f64 {
    SolutionSpace::new([a.t[0], a.t[1], b.t[0], b.t[1]], [a.m[0], a.m[1], b.m[0], b.m[1]])
        .solve()
        .radius
}

fn grid(opts: &ExhaustiveOptions) -> Vec<(f64, f64)> {
    let np = opts.polar.max(2);
    let na = opts.azimuthal.max(1);
    let mut out = vec![(0.0, 0.0)];
    for i in 1..np {
        let polar = FRAC_PI_2 * i as f64 / (np - 1) as f64;
        for j in 0..na {
            out.push((polar, 2.0 * PI * j as f64 / na as f64));
        }
    }
    out
}

/// Grid search over unordered setting pairs (r is symmetric under swapping
/// the two settings), followed by simplex polishing of the best pairs.
fn exhaustive(rho: &TwoQubitState, direction: Direction, opts: &ExhaustiveOptions) -> Result<SteeringVerdict> {
    let angles = grid(opts);
    let cells: Vec<Cell> = angles
        .iter()
        .map(|&(p, a)| cell(rho, direction, BlochVector::from_spherical(p, a)))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|i| (i + 1..cells.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| cells[i].dir.dot(cells[j].dir).abs() < 1.0 - 1e-9)
        .collect();
    let mut scored: Vec<(f64, usize)> = pairs
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| (pair_radius(&cells[i], &cells[j]), k))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut seeds: Vec<[f64; 4]> = scored
        .iter()
        .take(opts.refine.max(1))
        .map(|&(_, k)| {
            let (i, j) = pairs[k];
            [angles[i].0, angles[i].1, angles[j].0, angles[j].1]
        })
        .collect();
    // {x, z}
    seeds.push([FRAC_PI_2, 0.0, 0.0, 0.0]);

    let step = FRAC_PI_2 / (opts.polar.max(2) - 1) as f64 * 0.5;
    let nm = NelderMeadOptions {
        max_evals: 3000,
        f_tol: 1e-13,
        x_tol: 1e-9,
    };
    let objective = |x: &[f64]| -> f64 {
        let a = cell(rho, direction, BlochVector::from_spherical(x[0], x[1]));
        let b = cell(rho, direction, BlochVector::from_spherical(x[2], x[3]));
        match (a, b) {
            (Ok(a), Ok(b)) if a.dir.dot(b.dir).abs() < 1.0 - 1e-9 => -pair_radius(&a, &b),
            _ => f64::INFINITY,
        }
    };
    let refined: Vec<(f64, Vec<f64>)> = seeds
        .par_iter()
        .map(|s| {
            let m = nelder_mead_restarts(objective, s, &[step; 4], &nm, 3);
            (-m.value, m.x)
        })
        .collect();
    let (_, x) = refined
        .into_iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| a.0.total_cmp(&b.0).then(j.cmp(i)))
        .map(|(_, r)| r)
        .expect("non-empty seeds");
    let pair = [
        MeasurementSetting::along("n1", BlochVector::from_spherical(x[0], x[1]))?,
        MeasurementSetting::along("n2", BlochVector::from_spherical(x[2], x[3]))?,
    ];
    Ok(sqhsm_radius(&conditional_assemblage(rho, pair, direction.steered())?))
}

/// r(ρ) on a user-supplied assemblage, floored at one like [`steering_radius`].
pub fn assemblage_radius(asm: &Assemblage) -> SteeringVerdict {
    floored(sqhsm_radius(asm))
}
