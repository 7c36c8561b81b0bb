use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::io::write_atomic;

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// A formula or number stated by the underlying analysis.
    #[serde(rename = "paper-eq")]
    PaperEq,
    /// Follows from a one-line argument (identity, sign check, symmetry).
    #[serde(rename = "trivial")]
    Trivial,
    /// Computed by an independent oracle.
    #[serde(rename = "derived-oracle")]
    DerivedOracle,
}

impl Provenance {
    pub const TAGS: [&'static str; 3] = ["paper-eq", "trivial", "derived-oracle"];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|measured − expected| ≤ tolerance`.
    Within,
    /// `measured ≤ expected + tolerance`.
    AtMost,
    /// `measured ≥ expected − tolerance`.
    AtLeast,
    /// `|measured − expected| ≤ tolerance·|expected|`.
    Relative,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub provenance: Provenance,
    pub pass: bool,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        measured: f64,
        expected: f64,
        tolerance: f64,
        comparison: Comparison,
        provenance: Provenance,
    ) -> Self {
        let pass = match comparison {
            Comparison::Within => (measured - expected).abs() <= tolerance,
            Comparison::AtMost => measured <= expected + tolerance,
            Comparison::AtLeast => measured >= expected - tolerance,
            Comparison::Relative => (measured - expected).abs() <= tolerance * expected.abs(),
        };
        Self {
            name: name.into(),
            measured,
            expected,
            tolerance,
            comparison,
            provenance,
            pass,
        }
    }

    /// A yes/no outcome recorded as 1/0 against an expected 1.
    pub fn flag(name: impl Into<String>, ok: bool, provenance: Provenance) -> Self {
        Self::new(name, f64::from(u8::from(ok)), 1.0, 0.0, Comparison::Within, provenance)
    }
}

/// Outcome of one experiment. Serializes deterministically: no timestamps,
/// map keys sorted.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsReport {
    pub experiment: String,
    pub tool_version: String,
    pub config: Value,
    pub measurements: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl DiagnosticsReport {
    pub fn new(experiment: impl Into<String>, config: Value) -> Self {
        Self {
            experiment: experiment.into(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            measurements: BTreeMap::new(),
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn measure(&mut self, key: impl Into<String>, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("measurement serializes");
        self.measurements.insert(key.into(), v);
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Schema check: required top-level fields and a known provenance tag and
/// pass flag on every check.
pub fn validate_report(v: &Value) -> Result<()> {
    let bad = |m: String| Err(Error::Invariant(format!("report schema: {m}")));
    for key in ["experiment", "tool_version", "config", "measurements", "checks", "pass"] {
        if v.get(key).is_none() {
            return bad(format!("missing field {key:?}"));
        }
    }
    let Some(checks) = v["checks"].as_array() else {
        return bad("checks is not an array".into());
    };
    for (i, c) in checks.iter().enumerate() {
        match c.get("provenance").and_then(Value::as_str) {
            Some(tag) if Provenance::TAGS.contains(&tag) => {}
            other => return bad(format!("check {i}: bad provenance {other:?}")),
        }
        if c.get("pass").and_then(Value::as_bool).is_none() || c.get("name").and_then(Value::as_str).is_none() {
            return bad(format!("check {i}: missing name or pass flag"));
        }
        for key in ["expected", "tolerance"] {
            if c.get(key).is_none() {
                return bad(format!("check {i}: missing {key}"));
            }
        }
    }
    let all = checks.iter().all(|c| c["pass"].as_bool() == Some(true));
    if v["pass"].as_bool() != Some(all) {
        return bad("top-level pass flag disagrees with checks".into());
    }
    Ok(())
}

/// Column table written as CSV for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(f64::to_string)).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join(format!("{}.csv", self.name)), &self.to_csv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DiagnosticsReport {
        let mut r = DiagnosticsReport::new("demo", serde_json::json!({"alpha": 0.5}));
        r.measure("slope", 0.51);
        r.check(Check::new("slope", 0.51, 0.5, 0.1, Comparison::Within, Provenance::PaperEq));
        r.check(Check::new("floor", 1.0, 0.99, 0.0, Comparison::AtLeast, Provenance::Trivial));
        r
    }

    #[test]
    fn comparisons() {
        let c = |m, cmp| Check::new("x", m, 1.0, 0.1, cmp, Provenance::Trivial).pass;
        assert!(c(1.05, Comparison::Within) && !c(1.2, Comparison::Within));
        assert!(c(1.1, Comparison::AtMost) && !c(1.2, Comparison::AtMost));
        assert!(c(0.9, Comparison::AtLeast) && !c(0.8, Comparison::AtLeast));
        assert!(c(1.09, Comparison::Relative) && !c(1.2, Comparison::Relative));
        assert!(!Check::new("nan", f64::NAN, 1.0, 0.1, Comparison::Within, Provenance::Trivial).pass);
    }

    #[test]
    fn report_validates_and_is_deterministic() {
        let a = sample();
        assert!(a.pass);
        let v: Value = serde_json::from_str(&a.to_json()).unwrap();
        validate_report(&v).unwrap();
        assert_eq!(a.to_json(), sample().to_json());
        assert_eq!(v["checks"][0]["provenance"], "paper-eq");
    }

    #[test]
    fn validator_rejects_bad_reports() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        let mut w = v.clone();
        w["checks"][1]["provenance"] = "folklore".into();
        assert!(validate_report(&w).is_err());
        let mut w = v.clone();
        w["checks"][0].as_object_mut().unwrap().remove("provenance");
        assert!(validate_report(&w).is_err());
        let mut w = v.clone();
        w["pass"] = false.into();
        assert!(validate_report(&w).is_err());
        let mut w = v;
        w.as_object_mut().unwrap().remove("config");
        assert!(validate_report(&w).is_err());
    }

    #[test]
    fn failing_check_clears_pass() {
        let mut r = sample();
        r.check(Check::flag("broken", false, Provenance::Trivial));
        assert!(!r.pass);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("fit", &["y", "q"]);
        t.push(vec![0.25, 1.5e-3]);
        t.push(vec![0.125, 2.0]);
        assert_eq!(String::from_utf8(t.to_csv()).unwrap(), "y,q\n0.25,0.0015\n0.125,2\n");
    }
}
