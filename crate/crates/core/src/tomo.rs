//! Monte Carlo photon-counting tomography of conditional states.
//!
//! One party measures a steering setting, the other performs Pauli
//! tomography. Each (setting, tomography axis) cell is one integration
//! period with Poisson-distributed coincidence counts.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{bloch_fidelity, projector, BlochVector, MeasurementSetting, Outcome, TwoQubitState};
use crate::steering::{
    conditional_assemblage, radius_with_uncertainty, Assemblage, Direction, ErrorSphere, SteeringVerdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn unit(self) -> BlochVector {
        match self {
            Axis::X => BlochVector::X,
            Axis::Y => BlochVector::Y,
            Axis::Z => BlochVector::Z,
        }
    }
}

/// A tomography projector: axis and sign, written "+x", "-z", ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TomoOutcome {
    pub axis: Axis,
    pub outcome: Outcome,
}

impl fmt::Display for TomoOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.outcome {
            Outcome::Zero => '+',
            Outcome::One => '-',
        };
        let axis = match self.axis {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        };
        write!(f, "{sign}{axis}")
    }
}

impl FromStr for TomoOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Schema(format!("tomography axis must look like +x or -z, got {s:?}"));
        let mut chars = s.trim().chars();
        let outcome = match chars.next() {
            Some('+') => Outcome::Zero,
            Some('-') => Outcome::One,
            _ => return Err(bad()),
        };
        let axis = match (chars.next(), chars.next()) {
            (Some('x'), None) => Axis::X,
            (Some('y'), None) => Axis::Y,
            (Some('z'), None) => Axis::Z,
            _ => return Err(bad()),
        };
        Ok(Self { axis, outcome })
    }
}

impl TryFrom<String> for TomoOutcome {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TomoOutcome> for String {
    fn from(t: TomoOutcome) -> String {
        t.to_string()
    }
}

/// Coincidence counts for one steering outcome κ and one tomography
/// projector. CSV columns: setting, outcome, axis, counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRecord {
    pub setting: String,
    /// κ of the steering measurement, 0 or 1.
    pub outcome: u8,
    pub axis: TomoOutcome,
    pub counts: u64,
}

impl CountRecord {
    pub fn steering_outcome(&self) -> Result<Outcome> {
        Outcome::from_index(self.outcome)
    }
}

/// Generator for one (setting, axis) cell: stream `cell` of `seed`.
pub fn cell_rng(seed: u64, cell: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell);
    rng
}

fn poisson(mean: f64, rng: &mut ChaCha8Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // Mean is positive and finite here, so construction cannot fail.
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

/// Counts of one (setting, axis) cell with `mean_pairs` expected pairs.
/// `direction` says who steers whom: the steering party measures `setting`,
/// the steered party is measured along `axis`.
pub fn simulate_counts(
    rho: &TwoQubitState,
    direction: Direction,
    setting: &MeasurementSetting,
    axis: Axis,
    mean_pairs: f64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    simulate_cell(rho, direction, setting, axis, mean_pairs, &mut cell_rng(seed, 0))
}

fn simulate_cell(
    rho: &TwoQubitState,
    direction: Direction,
    setting: &MeasurementSetting,
    axis: Axis,
    mean_pairs: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<CountRecord>> {
    if !(mean_pairs > 0.0 && mean_pairs.is_finite()) {
        return Err(Error::Domain(format!(
            "mean pair count must be positive and finite, got {mean_pairs}"
        )));
    }
    let mut out = Vec::with_capacity(4);
    for k in Outcome::BOTH {
        let cond = rho.conditional_operator(direction.measuring(), &projector(setting, k)?);
        let (t, m) = (cond.trace(), cond.moment().dot(axis.unit()));
        for s in Outcome::BOTH {
            let p = (0.5 * (t + s.sign() * m)).max(0.0);
            out.push(CountRecord {
                setting: setting.label.clone(),
                outcome: k.index() as u8,
                axis: TomoOutcome { axis, outcome: s },
                counts: poisson(mean_pairs * p, rng),
            });
        }
    }
    Ok(out)
}

/// Linear-inversion estimate of one conditional state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructedState {
    pub bloch: BlochVector,
    pub error: ErrorSphere,
    /// Per-axis standard errors.
    pub axis_errors: [f64; 3],
    /// Cell counts over all counts recorded for the same setting.
    pub weight: f64,
    /// The raw estimate lay outside the Bloch ball and was scaled back.
    pub clipped: bool,
}

/// Reconstructs the state conditioned on (`setting`, `outcome`) from the
/// records of that setting. Coordinates are (n₊ − n₋)/(n₊ + n₋) with
/// Poisson error 2√(n₊n₋/N³).
pub fn reconstruct_cs(records: &[CountRecord], setting: &str, outcome: Outcome) -> Result<ReconstructedState> {
    let mut n = [[0u64; 2]; 3];
    let mut setting_total = 0u64;
    for r in records.iter().filter(|r| r.setting == setting) {
        setting_total += r.counts;
        if r.steering_outcome()? == outcome {
            n[r.axis.axis.index()][r.axis.outcome.index()] += r.counts;
        }
    }
    let mut coord = [0.0; 3];
    let mut err = [0.0; 3];
    for (a, [plus, minus]) in n.iter().enumerate() {
        let total = (plus + minus) as f64;
        if total == 0.0 {
            return Err(Error::InsufficientData(format!(
                "no counts for setting {setting}, outcome {}, axis {:?}",
                outcome.index(),
                Axis::ALL[a]
            )));
        }
        coord[a] = (*plus as f64 - *minus as f64) / total;
        err[a] = 2.0 * ((*plus as f64) * (*minus as f64) / total.powi(3)).sqrt();
    }
    let cell: u64 = n.iter().flatten().sum();
    let raw = BlochVector::from_array(coord);
    let clipped = raw.norm() > 1.0;
    let bloch = raw.clipped_to_ball();
    Ok(ReconstructedState {
        bloch,
        error: ErrorSphere::from_axis_errors(bloch, err[0], err[1], err[2]),
        axis_errors: err,
        weight: cell as f64 / setting_total as f64,
        clipped,
    })
}

/// Reconstructed assemblage with its error spheres and fidelities to the
/// nominal conditional states.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredAssemblage {
    /// As reconstructed: normalized per setting but not forced to be
    /// no-signaling.
    pub assemblage: Assemblage,
    pub nominal: Assemblage,
    pub errors: [ErrorSphere; 4],
    pub fidelities: [f64; 4],
    pub clipped: [bool; 4],
    pub records: Vec<CountRecord>,
}

impl MeasuredAssemblage {
    pub fn error_radii(&self) -> [f64; 4] {
        self.errors.map(|e| e.radius)
    }

    pub fn min_fidelity(&self) -> f64 {
        self.fidelities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Projects onto the no-signaling subspace and re-centres the spheres
    /// there.
    pub fn projected(&self) -> Result<(Assemblage, [ErrorSphere; 4])> {
        let asm = self.assemblage.projected_no_signaling();
        let spheres = ErrorSphere::around(&asm, self.error_radii())?;
        Ok((asm, spheres))
    }

    /// Conservative verdict: minimum radius over the error spheres.
    pub fn uncertain_radius(&self) -> Result<SteeringVerdict> {
        let (asm, spheres) = self.projected()?;
        radius_with_uncertainty(&asm, &spheres)
    }
}

/// Simulated experiment on the family state. `mean_pairs` is the expected
/// total pair count, split evenly over 2 settings × 3 axes; pass infinity
/// for the exact assemblage.
pub fn simulate_steering_experiment(
    theta: f64,
    eta: f64,
    direction: Direction,
    settings: [MeasurementSetting; 2],
    mean_pairs: f64,
    seed: u64,
) -> Result<MeasuredAssemblage> {
    let rho = TwoQubitState::family(theta, eta)?;
    simulate_experiment(&rho, &rho, direction, settings, mean_pairs, seed)
}

/// As [`simulate_steering_experiment`], with the source producing `actual`
/// while fidelities are taken against the assemblage of `ideal`.
pub fn simulate_experiment(
    actual: &TwoQubitState,
    ideal: &TwoQubitState,
    direction: Direction,
    settings: [MeasurementSetting; 2],
    mean_pairs: f64,
    seed: u64,
) -> Result<MeasuredAssemblage> {
    if mean_pairs.is_nan() || mean_pairs <= 0.0 {
        return Err(Error::Domain(format!(
            "mean pair count must be positive, got {mean_pairs}"
        )));
    }
    let nominal = conditional_assemblage(ideal, settings.clone(), direction.steered())?;
    if mean_pairs.is_infinite() {
        let exact = conditional_assemblage(actual, settings, direction.steered())?;
        let fidelities = std::array::from_fn(|i| bloch_fidelity(exact.blochs()[i], nominal.blochs()[i]));
        let errors = ErrorSphere::around(&exact, [0.0; 4])?;
        return Ok(MeasuredAssemblage {
            assemblage: exact,
            nominal,
            errors,
            fidelities,
            clipped: [false; 4],
            records: Vec::new(),
        });
    }

    // Records are grouped by setting label.
    if settings[0].label == settings[1].label {
        return Err(Error::Domain("measurement settings need distinct labels".into()));
    }
    let per_cell = mean_pairs / 6.0;
    let mut records = Vec::with_capacity(24);
    for (s, setting) in settings.iter().enumerate() {
        for axis in Axis::ALL {
            let mut rng = cell_rng(seed, (3 * s + axis.index()) as u64);
            records.extend(simulate_cell(actual, direction, setting, axis, per_cell, &mut rng)?);
        }
    }

    let mut parts = [(0.0, BlochVector::ZERO); 4];
    let mut errors = [ErrorSphere::from_axis_errors(BlochVector::ZERO, 0.0, 0.0, 0.0); 4];
    let mut clipped = [false; 4];
    for (s, setting) in settings.iter().enumerate() {
        for k in Outcome::BOTH {
            let i = 2 * s + k.index();
            let r = reconstruct_cs(&records, &setting.label, k)?;
            parts[i] = (r.weight, r.bloch);
            errors[i] = r.error;
            clipped[i] = r.clipped;
        }
    }
    let assemblage = Assemblage::from_parts_unchecked(direction.steered(), settings, parts);
    let fidelities = std::array::from_fn(|i| bloch_fidelity(parts[i].1, nominal.blochs()[i]));
    Ok(MeasuredAssemblage {
        assemblage,
        nominal,
        errors,
        fidelities,
        clipped,
        records,
    })
}

/// Writes count records as CSV with a header row.
pub fn write_counts_csv<W: std::io::Write>(records: &[CountRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_counts_csv<R: std::io::Read>(input: R) -> Result<Vec<CountRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    rd.deserialize()
        .map(|r| r.map_err(|e| Error::Schema(e.to_string())))
        .collect()
}
