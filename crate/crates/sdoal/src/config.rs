//! Flat `key = value` run configuration.
//!
//! ```text
//! # benchmark drive
//! scenario = fig5
//! delta_prime = 0.9
//! g = 0.004
//! omega = 0.1
//! omega1p = 0.05
//! omega2p = 0.1
//! kappa = 0
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sdoal_core::fock::PhaseSpaceGrid;
use sdoal_core::models::LambdaParams;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key {key:?} given twice")]
    DuplicateKey { line: usize, key: String },
    #[error("invalid value {value:?} for {key}")]
    Value { key: String, value: String },
    #[error("unknown scenario {0:?} (expected one of fig2..fig7, validate)")]
    UnknownScenario(String),
    #[error("invalid parameters: {0}")]
    Params(#[from] sdoal_core::Error),
}

/// Registered scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Conditional Mandel Q of the two atomic branches.
    Fig2,
    /// Atom-field entanglement entropy.
    Fig3,
    /// Atomic inversion `f(t)`.
    Fig4,
    /// Closed dynamics of the driven three-level model.
    Fig5,
    /// Wigner functions of the conditional field states after the closed run.
    Fig6,
    /// Trajectory ensemble of the dissipative three-level model.
    Fig7,
    /// Analytic-vs-numeric checks and parameter validity.
    Validate,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Fig2,
        Scenario::Fig3,
        Scenario::Fig4,
        Scenario::Fig5,
        Scenario::Fig6,
        Scenario::Fig7,
        Scenario::Validate,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Fig5 => "fig5",
            Scenario::Fig6 => "fig6",
            Scenario::Fig7 => "fig7",
            Scenario::Validate => "validate",
        }
    }

    /// Scenarios built on the closed forms, with time in units of `1/κ`.
    pub fn is_analytic(&self) -> bool {
        matches!(self, Scenario::Fig2 | Scenario::Fig3 | Scenario::Fig4)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| ConfigError::UnknownScenario(s.to_string()))
    }
}

/// Everything a scenario needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub params: LambdaParams,
    pub n_traj: usize,
    /// Step size; `None` picks the scenario default.
    pub dt: Option<f64>,
    /// End time; `None` picks the scenario default.
    pub t_max: Option<f64>,
    pub master_seed: u64,
    pub fock_dim: Option<usize>,
    pub wigner: PhaseSpaceGrid,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Validate,
            params: LambdaParams::BENCHMARK,
            n_traj: 20,
            dt: None,
            t_max: None,
            master_seed: 0,
            fock_dim: None,
            wigner: PhaseSpaceGrid::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

pub const KEYS: [&str; 14] = [
    "scenario",
    "delta_prime",
    "g",
    "omega",
    "omega1p",
    "omega2p",
    "kappa",
    "n_traj",
    "dt",
    "t_max",
    "master_seed",
    "fock_dim",
    "wigner_extent",
    "wigner_points",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse_str(&text)
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut extent: f64 = 4.0;
        let mut points = 161;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: line_no,
                    text: raw.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::UnknownKey {
                    line: line_no,
                    key: key.to_string(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::DuplicateKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
            seen.push(known);
            match known {
                "scenario" => cfg.scenario = value.parse()?,
                "delta_prime" => cfg.params.delta_prime = parse(key, value)?,
                "g" => cfg.params.g = parse(key, value)?,
                "omega" => cfg.params.omega = parse(key, value)?,
                "omega1p" => cfg.params.omega1p = parse(key, value)?,
                "omega2p" => cfg.params.omega2p = parse(key, value)?,
                "kappa" => cfg.params.kappa = parse(key, value)?,
                "n_traj" => cfg.n_traj = parse(key, value)?,
                "dt" => cfg.dt = Some(parse(key, value)?),
                "t_max" => cfg.t_max = Some(parse(key, value)?),
                "master_seed" => cfg.master_seed = parse(key, value)?,
                "fock_dim" => cfg.fock_dim = Some(parse(key, value)?),
                "wigner_extent" => extent = parse(key, value)?,
                "wigner_points" => points = parse(key, value)?,
                _ => unreachable!(),
            }
        }
        if extent.is_nan() || extent <= 0.0 || points < 2 {
            return Err(ConfigError::Value {
                key: "wigner".into(),
                value: format!("extent {extent}, points {points}"),
            });
        }
        cfg.wigner = PhaseSpaceGrid::square(extent, points);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks parameter ranges and overrides.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate()?;
        let bad = |key: &str, value: String| ConfigError::Value {
            key: key.to_string(),
            value,
        };
        if self.n_traj == 0 {
            return Err(bad("n_traj", "0".into()));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(bad("dt", dt.to_string()));
            }
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return Err(bad("t_max", t.to_string()));
            }
        }
        if let Some(n) = self.fock_dim {
            if n < 2 {
                return Err(bad("fock_dim", n.to_string()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let cfg = RunConfig::parse_str(
            "scenario = fig7\n# comment\ndelta_prime=0.8\ng = 0.01 # inline\nomega=0.2\n\
             omega1p=0.03\nomega2p=0.04\nkappa=0.001\nn_traj=5\ndt=0.05\nt_max=100\n\
             master_seed=42\nfock_dim=12\nwigner_extent=3\nwigner_points=21\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario, Scenario::Fig7);
        assert_eq!(cfg.params.delta_prime, 0.8);
        assert_eq!(cfg.params.g, 0.01);
        assert_eq!(cfg.params.kappa, 0.001);
        assert_eq!(
            (cfg.n_traj, cfg.master_seed, cfg.fock_dim),
            (5, 42, Some(12))
        );
        assert_eq!((cfg.dt, cfg.t_max), (Some(0.05), Some(100.0)));
        assert_eq!(cfg.wigner.nx, 21);
        assert_eq!(cfg.wigner.x_max, 3.0);
    }

    #[test]
    fn defaults_to_benchmark() {
        let cfg = RunConfig::parse_str("").unwrap();
        assert_eq!(cfg.params, LambdaParams::BENCHMARK);
        assert_eq!(cfg.wigner, PhaseSpaceGrid::square(4.0, 161));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            RunConfig::parse_str("gamma = 1"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse_str("g = 1\ng = 2"),
            Err(ConfigError::DuplicateKey { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse_str("g 1"),
            Err(ConfigError::Syntax { .. })
        ));
        assert!(matches!(
            RunConfig::parse_str("scenario = fig9"),
            Err(ConfigError::UnknownScenario(_))
        ));
        assert!(matches!(
            RunConfig::parse_str("delta_prime = 1.5"),
            Err(ConfigError::Params(_))
        ));
        assert!(RunConfig::parse_str("dt = -1").is_err());
        assert!(RunConfig::parse_str("n_traj = many").is_err());
    }
}
