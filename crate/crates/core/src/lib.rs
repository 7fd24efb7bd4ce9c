//! Two-setting EPR steering for two-qubit states.
//!
//! - [`quantum`]: Bloch vectors, qubit and two-qubit operators, the
//!   (θ, η) state family.
//! - [`steering`]: assemblages, the steering radius and its closed forms,
//!   classification, error-sphere minimax.
//! - [`lhsm`]: explicit hidden-state models in the one-way region.
//! - [`noise`]: white-noise and conditional-state fidelity thresholds.
//! - [`tomo`]: simulated photon counting and linear-inversion tomography.
//!
//! ```
//! use qsteer::quantum::TwoQubitState;
//! use qsteer::steering::{steering_radius, Direction};
//!
//! let rho = TwoQubitState::family(0.536, 0.816)?;
//! let ab = steering_radius(&rho, Direction::AToB)?;
//! let ba = steering_radius(&rho, Direction::BToA)?;
//! assert!(ab.radius > ba.radius && ba.steerable);
//! # Ok::<(), qsteer::Error>(())
//! ```

pub mod error;
pub mod lhsm;
pub mod noise;
pub mod optim;
pub mod quantum;
pub mod steering;
pub mod tomo;

pub use error::{Error, Result};

// The guide's listings run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/radius.md")]
    mod radius {}
    #[doc = include_str!("../../../book/src/hidden-state-models.md")]
    mod hidden_state_models {}
    #[doc = include_str!("../../../book/src/noise.md")]
    mod noise {}
    #[doc = include_str!("../../../book/src/tomography.md")]
    mod tomography {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
