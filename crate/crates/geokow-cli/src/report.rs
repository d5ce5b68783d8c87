//! Report types and their JSON form.
//!
//! Field order is fixed by the struct definitions and `detail` objects use
//! sorted keys, so equal runs serialize to equal bytes apart from
//! `wall_time_s`.

use serde::Serialize;
use serde_json::{json, Value};

use geokow_core::algebra::{format_rational, Rational};
use geokow_core::numeric::C64;

use crate::config::RunConfig;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skip,
    Degenerate,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub verdict: Verdict,
    /// Largest residual or drift seen; `null` for exact checks.
    pub residual: Option<f64>,
    /// Threshold the residual is compared against.
    pub tolerance: Option<f64>,
    pub samples: usize,
    pub detail: Value,
}

impl Check {
    pub fn exact(name: &str, ok: bool, samples: usize, detail: Value) -> Self {
        Check {
            name: name.into(),
            verdict: Verdict::from_bool(ok),
            residual: None,
            tolerance: None,
            samples,
            detail,
        }
    }

    /// Passes when `residual < tol`.
    pub fn below(name: &str, residual: f64, tol: f64, samples: usize, detail: Value) -> Self {
        Check {
            name: name.into(),
            verdict: Verdict::from_bool(residual < tol),
            residual: Some(residual),
            tolerance: Some(tol),
            samples,
            detail,
        }
    }

    /// Passes when `value > tol`; used for negative controls.
    pub fn above(name: &str, value: f64, tol: f64, samples: usize, detail: Value) -> Self {
        Check {
            name: name.into(),
            verdict: Verdict::from_bool(value > tol),
            residual: Some(value),
            tolerance: Some(tol),
            samples,
            detail,
        }
    }

    pub fn with_verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Checks plus free-form observations produced by one suite.
#[derive(Clone, Debug, Default)]
pub struct SuiteOutput {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub data: serde_json::Map<String, Value>,
}

impl SuiteOutput {
    pub fn extend(&mut self, o: SuiteOutput) {
        self.checks.extend(o.checks);
        self.notes.extend(o.notes);
        self.data.extend(o.data);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
    pub degenerate: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub geokow: &'static str,
    pub schema: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub notes: Vec<String>,
    pub data: Value,
    pub versions: Versions,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(command: &str, config: RunConfig, out: SuiteOutput, wall_time_s: f64) -> Self {
        let mut summary = Summary::default();
        for c in &out.checks {
            match c.verdict {
                Verdict::Pass => summary.pass += 1,
                Verdict::Fail => summary.fail += 1,
                Verdict::Skip => summary.skip += 1,
                Verdict::Degenerate => summary.degenerate += 1,
            }
        }
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            checks: out.checks,
            summary,
            notes: out.notes,
            data: Value::Object(out.data),
            versions: Versions {
                geokow: env!("CARGO_PKG_VERSION"),
                schema: SCHEMA_VERSION,
            },
            wall_time_s,
        }
    }

    /// 0 when every non-skip check passes, 3 on a singular abort, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.degenerate > 0
            && self
                .checks
                .iter()
                .any(|c| c.detail.get("singular_abort") == Some(&json!(true)))
        {
            3
        } else if self.summary.fail > 0 || self.summary.degenerate > 0 {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn rational(r: &Rational) -> Value {
    Value::String(format_rational(r))
}

pub fn complex(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Largest element, 0 for an empty iterator.
pub fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use geokow_core::algebra::rat;
    use geokow_core::numeric::c;

    #[test]
    fn serialization_forms() {
        assert_eq!(rational(&rat(-3, 6)), json!("-1/2"));
        assert_eq!(complex(c(1.5, -2.0)), json!([1.5, -2.0]));
        assert_eq!(
            serde_json::to_value(Verdict::Degenerate).unwrap(),
            json!("degenerate")
        );
    }

    #[test]
    fn exit_codes() {
        let mk = |checks: Vec<Check>| {
            Report::new(
                "t",
                RunConfig::default(),
                SuiteOutput {
                    checks,
                    ..Default::default()
                },
                0.0,
            )
            .exit_code()
        };
        assert_eq!(mk(vec![Check::exact("a", true, 1, json!({}))]), 0);
        assert_eq!(
            mk(vec![
                Check::exact("a", true, 1, json!({})).with_verdict(Verdict::Skip)
            ]),
            0
        );
        assert_eq!(mk(vec![Check::below("a", 1.0, 0.5, 1, json!({}))]), 1);
        let sing = Check::exact("a", false, 1, json!({"singular_abort": true}))
            .with_verdict(Verdict::Degenerate);
        assert_eq!(mk(vec![sing]), 3);
    }

    #[test]
    fn below_and_above() {
        assert!(Check::below("x", 1e-9, 1e-8, 1, Value::Null).passed());
        assert!(!Check::below("x", f64::NAN, 1e-8, 1, Value::Null).passed());
        assert!(Check::above("x", 1e-2, 1e-3, 1, Value::Null).passed());
    }
}
