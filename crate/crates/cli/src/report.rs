use std::fmt::Write as _;

use serde_json::Value;
use staticdec_core::DefectReport;

use crate::error::CliError;

/// One named check in a suite report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub sup_defect: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_point: Vec<f64>,
}

impl Check {
    pub fn from_report(r: &DefectReport) -> Self {
        Check {
            name: r.identity.clone(),
            sup_defect: r.sup_defect,
            tolerance: r.tolerance,
            pass: r.passed,
            worst_point: r.worst_point().map(|p| p.0.clone()).unwrap_or_default(),
        }
    }

    /// A check on a single number, passing when `value ≤ tolerance`.
    pub fn scalar(name: impl Into<String>, value: f64, tolerance: f64, at: Vec<f64>) -> Self {
        let sup = if value.is_nan() { f64::INFINITY } else { value.abs() };
        Check {
            name: name.into(),
            sup_defect: sup,
            tolerance,
            pass: sup <= tolerance,
            worst_point: at,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub config: Value,
    pub ms: f64,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, checks: Vec<Check>, config: Value, ms: f64) -> Self {
        SuiteReport {
            suite: suite.into(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            config,
            ms,
        }
    }

    /// JSON with keys in the order `suite, pass, checks, config, ms`, floats
    /// written with 17 significant digits and non-finite values as `null`.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\"suite\":");
        push_str(&mut out, &self.suite);
        let _ = write!(out, ",\"pass\":{},\"checks\":[", self.pass);
        for (i, c) in self.checks.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("{\"name\":");
            push_str(&mut out, &c.name);
            out.push_str(",\"sup_defect\":");
            push_f64(&mut out, c.sup_defect);
            out.push_str(",\"tolerance\":");
            push_f64(&mut out, c.tolerance);
            let _ = write!(out, ",\"pass\":{},\"worst_point\":[", c.pass);
            for (j, x) in c.worst_point.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                push_f64(&mut out, *x);
            }
            out.push_str("]}");
        }
        out.push_str("],\"config\":");
        push_value(&mut out, &self.config);
        out.push_str(",\"ms\":");
        push_f64(&mut out, self.ms);
        out.push('}');
        out
    }

    /// Inverse of [`SuiteReport::to_json`]; `null` defects read back as `+∞`.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let bad = |what: &str| CliError::Config(format!("malformed report: {what}"));
        let v: Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let num = |x: &Value| x.as_f64().unwrap_or(f64::INFINITY);
        let checks = v["checks"]
            .as_array()
            .ok_or_else(|| bad("checks"))?
            .iter()
            .map(|c| {
                Ok(Check {
                    name: c["name"].as_str().ok_or_else(|| bad("name"))?.to_string(),
                    sup_defect: num(&c["sup_defect"]),
                    tolerance: num(&c["tolerance"]),
                    pass: c["pass"].as_bool().ok_or_else(|| bad("pass"))?,
                    worst_point: c["worst_point"]
                        .as_array()
                        .ok_or_else(|| bad("worst_point"))?
                        .iter()
                        .map(num)
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(SuiteReport {
            suite: v["suite"].as_str().ok_or_else(|| bad("suite"))?.to_string(),
            pass: v["pass"].as_bool().ok_or_else(|| bad("pass"))?,
            checks,
            config: v["config"].clone(),
            ms: num(&v["ms"]),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite {}", self.suite);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<40} sup {:.3e} tol {:.1e}",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.sup_defect,
                c.tolerance
            );
        }
        let failed = self.checks.iter().filter(|c| !c.pass).count();
        let _ = writeln!(
            out,
            "{}: {} checks, {} failed, {:.0} ms",
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            failed,
            self.ms
        );
        out
    }
}

fn push_str(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings serialize"));
}

fn push_f64(out: &mut String, x: f64) {
    if x.is_finite() {
        let _ = write!(out, "{x:.16e}");
    } else {
        out.push_str("null");
    }
}

fn push_value(out: &mut String, v: &Value) {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                push_f64(out, n.as_f64().unwrap_or(f64::NAN));
            }
        }
        Value::String(s) => push_str(out, s),
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                push_value(out, x);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, x)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                push_str(out, k);
                out.push(':');
                push_value(out, x);
            }
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}
