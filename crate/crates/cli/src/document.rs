use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = "qsteer.result/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    /// A search stopped before its convergence test passed.
    Partial,
}

/// One JSON document per invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub command: Vec<String>,
    pub status: Status,
    pub seed: Option<u64>,
    pub input: Value,
    pub output: Value,
}

impl ResultDocument {
    pub fn new(command: Vec<String>, input: Value, output: Value) -> Self {
        Self {
            schema: SCHEMA.into(),
            tool: "qsteer".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            status: Status::Ok,
            seed: None,
            input: round_numbers(input),
            output: round_numbers(output),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents hold only JSON values")
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Rounds every floating-point number in `v` to 12 significant digits.
pub fn round_numbers(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round12(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(round_numbers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_numbers(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn twelve_digits() {
        assert_eq!(round12(2.0 / 3.0), 0.666666666667);
        assert_eq!(round12(1.0), 1.0);
        assert_eq!(round12(-2.5e-13), -2.5e-13);
    }

    #[test]
    fn round_trip_is_lossless() {
        let d = ResultDocument::new(
            vec!["qsteer".into(), "radius".into()],
            json!({"theta": 0.1 + 0.2}),
            json!({"r": [std::f64::consts::SQRT_2, 3], "s": "x"}),
        );
        let text = d.to_json();
        let back: ResultDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_json(), text);
    }
}
