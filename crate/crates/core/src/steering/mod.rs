//! Conditional-state assemblages, hidden-state models and steering radii.

mod analytic;
mod assemblage;
mod classify;
mod ensemble;
mod radius;
mod sqhsm;
mod uncertainty;

pub use analytic::{analytic_radius_ab, analytic_radius_ba, AnalyticRadius, QUARTER_PI_WINDOW};
pub use assemblage::{conditional_assemblage, member_index, Assemblage, ConditionalState, Direction, MEMBER_LABELS};
pub use classify::{classify, classify_from_radii, SteeringClass};
pub use ensemble::{HiddenState, HiddenStateEnsemble, ResponseMap, SteeringVerdict, UNIT_RADIUS_TOL};
pub use radius::{
    assemblage_radius, family_candidates, steering_radius, steering_radius_with, ExhaustiveOptions, SettingsSearch,
};
pub use sqhsm::{sqhsm_radius, SolutionSpace, SqhsmSolution, DROP_PROBABILITY};
pub use uncertainty::{
    radius_with_uncertainty, radius_with_uncertainty_detailed, ErrorSphere, UncertainRadius, UncertaintyOptions,
};
