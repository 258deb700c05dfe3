//! Machine-readable reports and the trajectory CSV.

use std::io::Write;
use std::path::Path;

use bertrand::spaces::Family;
use bertrand::BertrandParams;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::branch_sign;
use crate::CliError;

pub const ENERGY_DRIFT_BOUND: f64 = 1e-10;
pub const MOMENTUM_DRIFT_BOUND: f64 = 1e-10;
pub const ORBIT_RESIDUAL_BOUND: f64 = 1e-6;
pub const CIRCLE_MODULUS_BOUND: f64 = 1e-7;
pub const A_NORM_BOUND: f64 = 1e-9;
pub const A_DRIFT_BOUND: f64 = 1e-6;
pub const APSIDAL_BOUND: f64 = 1e-5;

/// Component drift bound for the conserved tensor; higher ranks multiply more
/// factors of `A` together.
pub fn tensor_drift_bound(n: u32) -> f64 {
    if n <= 2 {
        1e-6
    } else {
        1e-5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn measured(name: &str, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: Some(value), bound, pass: value <= bound, skipped: None, note: None }
    }

    pub fn skipped(name: &str, bound: f64, reason: impl Into<String>) -> Self {
        Self { name: name.into(), value: None, bound, pass: true, skipped: Some(reason.into()), note: None }
    }

    pub fn failed(name: &str, bound: f64, note: impl Into<String>) -> Self {
        Self { name: name.into(), value: None, bound, pass: false, skipped: None, note: Some(note.into()) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub pass: bool,
    pub params: Value,
    pub summary: Value,
    pub warnings: Vec<String>,
    pub versions: Value,
}

impl VerificationReport {
    pub fn new(checks: Vec<Check>, params: Value, summary: Value, warnings: Vec<String>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Self { checks, pass, params, summary, warnings, versions: versions() }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn versions() -> Value {
    json!({ "bertrand-cli": env!("CARGO_PKG_VERSION") })
}

pub fn params_json(p: &BertrandParams<f64>, example: Option<&str>) -> Value {
    let mut v = json!({
        "n": p.n,
        "m": p.m,
        "K": p.k,
        "G": p.g,
        "amplitude": p.amplitude,
    });
    match p.family {
        Family::TypeI => v["family"] = "type1".into(),
        Family::TypeII { d, branch } => {
            v["family"] = "type2".into();
            v["D"] = d.into();
            v["branch"] = branch_sign(branch).into();
        }
    }
    if let Some(slug) = example {
        v["example"] = slug.into();
    }
    v
}

/// JSON number, or `null` for values JSON cannot hold.
pub fn number(x: f64) -> Value {
    if x.is_finite() {
        x.into()
    } else {
        Value::Null
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub const TRAJECTORY_HEADER: [&str; 15] =
    ["t", "q1", "q2", "q3", "p1", "p2", "p3", "r", "phi_unwrapped", "k", "E", "J2", "A1", "A2", "A3"];

/// One CSV row; floats carry 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub q: [f64; 3],
    pub p: [f64; 3],
    pub r: f64,
    pub phi_unwrapped: f64,
    pub k: usize,
    pub e: f64,
    pub j2: f64,
    pub a: [f64; 3],
}

pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trajectory_csv(path: &Path, rows: &[TrajectoryRow]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(TRAJECTORY_HEADER).map_err(io)?;
    for row in rows {
        let mut rec: Vec<String> = Vec::with_capacity(15);
        rec.push(float(row.t));
        rec.extend(row.q.iter().chain(&row.p).map(|x| float(*x)));
        rec.push(float(row.r));
        rec.push(float(row.phi_unwrapped));
        rec.push(row.k.to_string());
        rec.push(float(row.e));
        rec.push(float(row.j2));
        rec.extend(row.a.iter().map(|x| float(*x)));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Prints a report to `out` as one line per check.
pub fn print_checks(out: &mut impl Write, checks: &[Check]) -> std::io::Result<()> {
    for c in checks {
        let status = match (&c.skipped, c.pass) {
            (Some(reason), _) => format!("SKIP ({reason})"),
            (None, true) => "PASS".to_string(),
            (None, false) => "FAIL".to_string(),
        };
        let value = c.value.map_or("-".to_string(), |v| format!("{v:.3e}"));
        write!(out, "{status:<6} {:<16} {value:>10} <= {:.0e}", c.name, c.bound)?;
        if let Some(note) = &c.note {
            write!(out, "  {note}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_significant_digits() {
        assert_eq!(float(0.1), "1.0000000000000001e-1");
        assert_eq!(float(-3.0), "-3.0000000000000000e0");
        let back: f64 = float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn global_pass_is_the_conjunction() {
        let ok = Check::measured("a", 1e-12, 1e-10);
        let skip = Check::skipped("b", 1e-6, "radial");
        let r = VerificationReport::new(vec![ok.clone(), skip], Value::Null, Value::Null, vec![]);
        assert!(r.pass);
        let r = VerificationReport::new(vec![ok, Check::measured("c", 2.0, 1.0)], Value::Null, Value::Null, vec![]);
        assert!(!r.pass);
        assert!(!Check::measured("nan", f64::NAN, 1.0).pass);
    }
}
