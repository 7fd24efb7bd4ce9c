use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::FamilyParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SteeringClass {
    #[serde(rename = "trivial-separable")]
    TrivialSeparable,
    #[serde(rename = "unsteerable-both")]
    UnsteerableBoth,
    #[serde(rename = "one-way-ab")]
    OneWayAToB,
    /// Only produced from measured radii; the family never steers this way alone.
    #[serde(rename = "one-way-ba")]
    OneWayBToA,
    /// Both directions steerable. For family states R(A→B) > R(B→A) here.
    #[serde(rename = "two-way-asymmetric")]
    TwoWayAsymmetric,
}

impl SteeringClass {
    pub fn as_str(self) -> &'static str {
        match self {
            SteeringClass::TrivialSeparable => "trivial-separable",
            SteeringClass::UnsteerableBoth => "unsteerable-both",
            SteeringClass::OneWayAToB => "one-way-ab",
            SteeringClass::OneWayBToA => "one-way-ba",
            SteeringClass::TwoWayAsymmetric => "two-way-asymmetric",
        }
    }
}

impl std::fmt::Display for SteeringClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SteeringClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            SteeringClass::TrivialSeparable,
            SteeringClass::UnsteerableBoth,
            SteeringClass::OneWayAToB,
            SteeringClass::OneWayBToA,
            SteeringClass::TwoWayAsymmetric,
        ]
        .into_iter()
        .find(|c| c.as_str() == s)
        .ok_or_else(|| Error::Domain(format!("unknown class `{s}`")))
    }
}

/// Analytic classification of the family state. The one-way boundary
/// |cos 2θ| = |2η − 1| is compared exactly and belongs to the one-way class.
pub fn classify(theta: f64, eta: f64) -> Result<SteeringClass> {
    let p = FamilyParams::new(theta, eta)?;
    let (s, c, x) = (p.sin2(), p.cos2(), p.visibility());
    if (s * x).abs() < 1e-12 {
        return Ok(SteeringClass::TrivialSeparable);
    }
    if c.abs() >= x.abs() {
        Ok(SteeringClass::OneWayAToB)
    } else {
        Ok(SteeringClass::TwoWayAsymmetric)
    }
}

/// Classification from two computed radii.
pub fn classify_from_radii(r_ab: f64, r_ba: f64) -> SteeringClass {
    match (r_ab > 1.0, r_ba > 1.0) {
        (true, true) => SteeringClass::TwoWayAsymmetric,
        (true, false) => SteeringClass::OneWayAToB,
        (false, true) => SteeringClass::OneWayBToA,
        (false, false) => SteeringClass::UnsteerableBoth,
    }
}
