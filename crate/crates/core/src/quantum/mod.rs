//! Small-matrix quantum calculus: Bloch vectors, qubit operators, the
//! two-qubit (θ, η) family, partial traces, fidelity and white noise.

mod bloch;
mod qubit;
mod two_qubit;

pub use bloch::BlochVector;
pub use qubit::{
    bloch_fidelity, bloch_to_density, density_to_bloch, projector, MeasurementSetting, Outcome, QubitOperator, C64,
};
pub use two_qubit::{
    apply_white_noise, fidelity, make_family_state, partial_trace, DensityOperator, FamilyParams, Side, TwoQubitState,
};

/// Tolerance for Hermiticity, trace and positivity checks.
pub const EPS_TOL: f64 = 1e-9;
