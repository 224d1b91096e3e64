//! Scenario files.
//!
//! ```toml
//! [game]
//! family = "mean_cvar(0.99)"
//! distribution = "exp(1)"
//! gamma1 = "2/3"
//! gamma2 = "1/3"
//! delta = 0.8
//!
//! [run]
//! grid_n = 101
//! outputs = ["table", "csv", "svg"]
//! output_dir = "out"
//! ```
//!
//! `[run]` and each of its keys are optional. Paths inside `family` and
//! `distribution` are resolved against the scenario file's directory.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bargaining::GameSpec;
use crate::distributions::LossDistribution;
use crate::error::{Error, Result};
use crate::riskmeasure::{DistortionFamily, RiskAversion};

pub const DEFAULT_GRID: usize = 101;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Table,
    Csv,
    Svg,
}

impl fmt::Display for OutputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputKind::Table => "table",
            OutputKind::Csv => "csv",
            OutputKind::Svg => "svg",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: GameSpec,
    pub grid_n: usize,
    pub outputs: BTreeSet<OutputKind>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    family: String,
    distribution: String,
    gamma1: Number,
    gamma2: Number,
    delta: Number,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    grid_n: Option<i64>,
    outputs: Option<Vec<OutputKind>>,
    output_dir: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    game: RawGame,
    #[serde(default)]
    run: RawRun,
}

/// A decimal, an integer, or a fraction `"p/q"`.
pub fn parse_number(field: &str, text: &str) -> Result<f64> {
    let bad = || Error::parse(field, format!("`{text}` is not a number or fraction"));
    let value = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            p / q
        }
        None => text.trim().parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn number(field: &str, n: &Number) -> Result<f64> {
    match n {
        Number::Float(v) => Ok(*v),
        Number::Int(v) => Ok(*v as f64),
        Number::Text(t) => parse_number(field, t),
    }
}

fn level(field: &str, n: &Number) -> Result<RiskAversion> {
    let v = number(field, n)?;
    RiskAversion::new(v).map_err(|_| Error::parse(field, format!("{v} is outside [0, 1]")))
}

impl Scenario {
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::parse("scenario", e.to_string()))?;
        let g = raw.game;
        let family = DistortionFamily::parse(&g.family, base_dir).map_err(|e| rename("game.family", e))?;
        let dist = LossDistribution::parse(&g.distribution, base_dir).map_err(|e| rename("game.distribution", e))?;
        // Every integral stops at the support bound; refuse laws that leave
        // a material part of their mean beyond it.
        dist.mean()?;
        let gamma1 = level("game.gamma1", &g.gamma1)?;
        let gamma2 = level("game.gamma2", &g.gamma2)?;
        let delta = number("game.delta", &g.delta)?;
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::parse("game.delta", format!("{delta} is outside (0, 1)")));
        }
        let spec = GameSpec::new(family, dist, gamma1, gamma2, delta)?;

        let grid_n = match raw.run.grid_n {
            None => DEFAULT_GRID,
            Some(n) if n >= 11 => n as usize,
            Some(n) => return Err(Error::parse("run.grid_n", format!("{n} is below 11"))),
        };
        let outputs = raw
            .run
            .outputs
            .map(|v| v.into_iter().collect())
            .unwrap_or_else(|| BTreeSet::from([OutputKind::Table]));
        let output_dir = raw.run.output_dir.map(|p| match base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        });
        Ok(Scenario {
            spec,
            grid_n,
            outputs,
            output_dir,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }
}

/// Keep accuracy and I/O errors as they are; report grammar errors under the
/// scenario key they came from.
fn rename(field: &str, e: Error) -> Error {
    match e {
        Error::Io { .. } | Error::Accuracy { .. } => e,
        other => Error::parse(field, other.to_string()),
    }
}
