//! Validated run parameters shared by all commands.

use std::fmt;

use serde::Serialize;

use geokow_core::algebra::{format_rational, parse_rational, Rational};
use geokow_core::dynamics::AlphaBeta;
use geokow_core::par::Exec;
use geokow_core::pencil::{kowalevski_spec, PencilSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Parameters echoed into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    /// Pencil coefficients `a₀..a₅` as `p/q` strings.
    pub spec: Option<Vec<String>>,
    /// `l₁, l, c, k` when the pencil came from the Kowalevski dictionary.
    pub kowalevski: Option<Vec<String>>,
    pub ab: Option<String>,
    pub tau: Option<i8>,
    pub seed: u64,
    pub samples: Option<usize>,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub assoc: bool,
    pub triples: Option<usize>,
    #[serde(skip)]
    pub pencil: Option<PencilSpec>,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec: None,
            kowalevski: None,
            ab: None,
            tau: None,
            seed: 42,
            samples: None,
            t_end: 1.0,
            rtol: 1e-10,
            atol: 1e-12,
            assoc: false,
            triples: None,
            pencil: None,
            exec: Exec::Parallel,
        }
    }
}

/// Raw values as given on the command line.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    pub spec: Option<String>,
    pub kowalevski: Option<String>,
    pub ab: Option<String>,
    pub tau: Option<i8>,
    pub seed: u64,
    pub samples: Option<usize>,
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub assoc: bool,
    pub triples: Option<usize>,
    pub sequential: bool,
}

fn parse_list(s: &str, n: usize, what: &str) -> Result<Vec<Rational>, ConfigError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(ConfigError(format!(
            "{what}: expected {n} comma-separated rationals, got {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| parse_rational(p).map_err(|e| ConfigError(format!("{what}: {e}"))))
        .collect()
}

impl RawConfig {
    pub fn resolve(self) -> Result<RunConfig, ConfigError> {
        for (name, v) in [
            ("--rtol", self.rtol),
            ("--atol", self.atol),
            ("--T", self.t_end),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError(format!(
                    "{name} must be a positive finite number, got {v}"
                )));
            }
        }
        if self.samples == Some(0) || self.triples == Some(0) {
            return Err(ConfigError("sample counts must be positive".into()));
        }
        if let Some(t) = self.tau {
            if !(-1..=1).contains(&t) {
                return Err(ConfigError(format!("--tau must be -1, 0 or 1, got {t}")));
            }
        }
        if let Some(ab) = &self.ab {
            AlphaBeta::parse(ab)
                .ok_or_else(|| ConfigError(format!("--ab: unknown choice {ab:?}")))?;
        }
        let (pencil, kow) = match (&self.spec, &self.kowalevski) {
            (Some(_), Some(_)) => {
                return Err(ConfigError(
                    "--spec and --kowalevski are mutually exclusive".into(),
                ))
            }
            (Some(s), None) => {
                let a = parse_list(s, 6, "--spec")?;
                (
                    Some(PencilSpec::new(std::array::from_fn(|i| a[i].clone()))),
                    None,
                )
            }
            (None, Some(s)) => {
                let p = parse_list(s, 4, "--kowalevski")?;
                (
                    Some(kowalevski_spec(&p[0], &p[1], &p[2], &p[3])),
                    Some(p.iter().map(format_rational).collect()),
                )
            }
            (None, None) => (None, None),
        };
        Ok(RunConfig {
            spec: pencil
                .as_ref()
                .map(|p| p.coeffs().iter().map(format_rational).collect()),
            kowalevski: kow,
            ab: self.ab,
            tau: self.tau,
            seed: self.seed,
            samples: self.samples,
            t_end: self.t_end,
            rtol: self.rtol,
            atol: self.atol,
            assoc: self.assoc,
            triples: self.triples,
            pencil,
            exec: if self.sequential {
                Exec::Sequential
            } else {
                Exec::Parallel
            },
        })
    }
}

impl RunConfig {
    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw() -> RawConfig {
        RawConfig {
            seed: 42,
            t_end: 1.0,
            rtol: 1e-10,
            atol: 1e-12,
            ..Default::default()
        }
    }

    #[test]
    fn parses_spec_and_dictionary() {
        let c = RawConfig {
            spec: Some("-2,0,3,-2,2,0".into()),
            ..raw()
        }
        .resolve()
        .unwrap();
        assert_eq!(
            c.pencil.unwrap(),
            PencilSpec::from_ints([-2, 0, 3, -2, 2, 0])
        );
        let k = RawConfig {
            kowalevski: Some("1,1,1,0".into()),
            ..raw()
        }
        .resolve()
        .unwrap();
        assert_eq!(
            k.spec.unwrap(),
            ["-2/1", "0/1", "3/1", "-2/1", "2/1", "0/1"]
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RawConfig {
            spec: Some("1,2,3".into()),
            ..raw()
        }
        .resolve()
        .is_err());
        assert!(RawConfig {
            spec: Some("1,2,3,4,5,x".into()),
            ..raw()
        }
        .resolve()
        .is_err());
        assert!(RawConfig { rtol: 0.0, ..raw() }.resolve().is_err());
        assert!(RawConfig {
            atol: -1.0,
            ..raw()
        }
        .resolve()
        .is_err());
        assert!(RawConfig {
            tau: Some(2),
            ..raw()
        }
        .resolve()
        .is_err());
        assert!(RawConfig {
            ab: Some("D".into()),
            ..raw()
        }
        .resolve()
        .is_err());
        assert!(RawConfig {
            samples: Some(0),
            ..raw()
        }
        .resolve()
        .is_err());
    }
}
