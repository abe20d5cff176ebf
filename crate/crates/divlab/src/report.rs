//! JSON run reports and CSV tables.

use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SCHEMA: u32 = 1;

/// How an assertion's `actual` value is judged against `expected`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub relation: Relation,
    pub expected: Value,
    pub actual: Value,
    pub pass: bool,
}

impl Assertion {
    pub fn new(name: impl Into<String>, relation: Relation, expected: impl Serialize, actual: impl Serialize) -> Self {
        let expected = serde_json::to_value(expected).unwrap_or(Value::Null);
        let actual = serde_json::to_value(actual).unwrap_or(Value::Null);
        let pass = judge(relation, &expected, &actual);
        Assertion { name: name.into(), relation, expected, actual, pass }
    }

    pub fn eq(name: impl Into<String>, expected: impl Serialize, actual: impl Serialize) -> Self {
        Self::new(name, Relation::Eq, expected, actual)
    }

    /// Re-evaluates `pass` from the stored values.
    pub fn recompute(&self) -> bool {
        judge(self.relation, &self.expected, &self.actual)
    }
}

/// Numbers compare numerically, `"num/den"` strings as exact rationals, and
/// anything else only for equality.
fn judge(relation: Relation, expected: &Value, actual: &Value) -> bool {
    use std::cmp::Ordering;
    let ord = match (as_rational(actual), as_rational(expected)) {
        (Some(a), Some(e)) => Some(a.cmp(&e)),
        _ => match (actual.as_f64(), expected.as_f64()) {
            (Some(a), Some(e)) => a.partial_cmp(&e),
            _ => None,
        },
    };
    match (relation, ord) {
        (Relation::Eq, Some(o)) => o == Ordering::Equal,
        (Relation::Eq, None) => actual == expected,
        (Relation::Le, Some(o)) => o != Ordering::Greater,
        (Relation::Ge, Some(o)) => o != Ordering::Less,
        (Relation::Lt, Some(o)) => o == Ordering::Less,
        (Relation::Gt, Some(o)) => o == Ordering::Greater,
        (_, None) => false,
    }
}

fn as_rational(v: &Value) -> Option<BigRational> {
    match v {
        Value::String(s) => {
            let (num, den) = s.split_once('/').unwrap_or((s.as_str(), "1"));
            let num: BigInt = num.trim().parse().ok()?;
            let den: BigInt = den.trim().parse().ok()?;
            if den == BigInt::from(0) {
                return None;
            }
            Some(BigRational::new(num, den))
        }
        Value::Number(n) if n.is_i64() || n.is_u64() => {
            let num: BigInt = n.to_string().parse().ok()?;
            Some(BigRational::from_integer(num))
        }
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub parameters: Map<String, Value>,
    /// Seconds since the Unix epoch.
    pub started_at: u64,
    pub duration_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub results: Value,
    /// Measurements that vary run to run (timings, node counts).
    #[serde(skip_serializing_if = "Map::is_empty", default)]
    pub diagnostics: Map<String, Value>,
    pub assertions: Vec<Assertion>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        let started_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Report {
            schema: SCHEMA,
            command: command.into(),
            parameters: Map::new(),
            started_at,
            duration_seconds: 0.0,
            seed: None,
            results: Value::Null,
            diagnostics: Map::new(),
            assertions: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn diagnostic(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.diagnostics.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn set_results(&mut self, results: impl Serialize) -> Result<()> {
        self.results = serde_json::to_value(results)?;
        Ok(())
    }

    pub fn check(&mut self, assertion: Assertion) {
        self.assertions.push(assertion);
    }

    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.duration_seconds = elapsed.as_secs_f64();
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))
    }
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn judging() {
        assert!(Assertion::eq("x", 7, 7).pass);
        assert!(!Assertion::eq("x", 7, 8).pass);
        assert!(Assertion::eq("q", "1/2", "2/4").pass);
        assert!(Assertion::new("q", Relation::Le, "1/3", "1/4").pass);
        assert!(!Assertion::new("q", Relation::Lt, "1/4", "1/4").pass);
        assert!(Assertion::new("f", Relation::Le, 1e-6, 3e-7).pass);
        assert!(Assertion::eq("b", true, true).pass);
        assert!(!Assertion::new("b", Relation::Le, true, true).pass);
        assert!(Assertion::new("mixed", Relation::Ge, 7, 7.5).pass);
    }

    #[test]
    fn round_trip_recomputes() {
        let mut r = Report::new("demo");
        r.param("n", 10).check(Assertion::new("g", Relation::Ge, 7, 7));
        r.set_results(serde_json::json!({"best": 7})).unwrap();
        let back: Report = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.schema, SCHEMA);
        assert!(back.assertions.iter().all(|a| a.recompute() == a.pass));
    }
}
