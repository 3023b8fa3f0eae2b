//! Flat `key = value` run configuration.
//!
//! ```text
//! # circle, q = 6, five levels
//! example = circle
//! q = 6
//! gamma = 16/3
//! levels = 5
//! h0 = 0.0375
//! csv = example1_q6.csv
//! ```
//!
//! Real values accept a plain fraction `a/b`. Output paths are relative to
//! the output directory chosen on the command line.

use std::fmt;
use std::path::PathBuf;

use phasefield::element::ElementOrder;
use thiserror::Error;

pub const VALID_KEYS: [&str; 12] = [
    "example",
    "q",
    "gamma",
    "epsilon",
    "levels",
    "h0",
    "element_order",
    "cg_tol",
    "csv",
    "vtk",
    "L",
    "name",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}` (valid keys: {})", VALID_KEYS.join(", "))]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example {
    Circle,
    Sphere,
    Pretzel,
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Circle => "circle",
            Self::Sphere => "sphere",
            Self::Pretzel => "pretzel",
        })
    }
}

/// `ε` is either tied to the grid (`ε = γ h`) or fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Width {
    Gamma(f64),
    Epsilon(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub example: Example,
    pub q: usize,
    pub width: Width,
    pub levels: usize,
    pub h0: f64,
    pub element_order: ElementOrder,
    pub cg_tol: f64,
    pub csv: Option<PathBuf>,
    pub vtk: Option<PathBuf>,
    pub surface_samples: usize,
}

pub const DEFAULT_GAMMA: f64 = 16.0 / 3.0;

impl RunConfig {
    /// `γ` at level 0.
    pub fn gamma(&self) -> f64 {
        match self.width {
            Width::Gamma(g) => g,
            Width::Epsilon(e) => e / self.h0,
        }
    }
}

fn parse_real(key: &str, value: &str) -> Result<f64, ConfigError> {
    let invalid = |reason: &str| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    };
    let v = match value.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| invalid("not a number"))?;
            let b: f64 = b.trim().parse().map_err(|_| invalid("not a number"))?;
            a / b
        }
        None => value.parse().map_err(|_| invalid("not a number"))?,
    };
    if !(v.is_finite() && v > 0.0) {
        return Err(invalid("must be positive and finite"));
    }
    Ok(v)
}

fn parse_count(key: &str, value: &str) -> Result<usize, ConfigError> {
    match value.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: "must be a positive integer".into(),
        }),
    }
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: Vec<(&str, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line: i + 1,
            text: raw.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !VALID_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line: i + 1,
                key: key.to_string(),
            });
        }
        if entries.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::Duplicate {
                line: i + 1,
                key: key.to_string(),
            });
        }
        entries.push((key, value));
    }
    let get = |key: &str| entries.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);

    let example = match get("example").ok_or(ConfigError::Missing("example"))? {
        "circle" => Example::Circle,
        "sphere" => Example::Sphere,
        "pretzel" => Example::Pretzel,
        other => {
            return Err(ConfigError::InvalidValue {
                key: "example".into(),
                value: other.into(),
                reason: "expected circle, sphere or pretzel".into(),
            })
        }
    };
    let q = parse_count("q", get("q").ok_or(ConfigError::Missing("q"))?)?;
    let width = match (get("gamma"), get("epsilon")) {
        (Some(_), Some(_)) => {
            return Err(ConfigError::InvalidValue {
                key: "epsilon".into(),
                value: get("epsilon").unwrap_or_default().into(),
                reason: "give either gamma or epsilon, not both".into(),
            })
        }
        (_, Some(e)) => Width::Epsilon(parse_real("epsilon", e)?),
        (Some(g), None) => Width::Gamma(parse_real("gamma", g)?),
        (None, None) => Width::Gamma(DEFAULT_GAMMA),
    };
    let element_order = match get("element_order").unwrap_or("1") {
        "1" => ElementOrder::Linear,
        "2" => ElementOrder::Quadratic,
        other => {
            return Err(ConfigError::InvalidValue {
                key: "element_order".into(),
                value: other.into(),
                reason: "expected 1 or 2".into(),
            })
        }
    };
    Ok(RunConfig {
        name: get("name").unwrap_or(&example.to_string()).to_string(),
        example,
        q,
        width,
        levels: get("levels").map_or(Ok(1), |v| parse_count("levels", v))?,
        h0: parse_real("h0", get("h0").ok_or(ConfigError::Missing("h0"))?)?,
        element_order,
        cg_tol: get("cg_tol").map_or(Ok(1e-12), |v| parse_real("cg_tol", v))?,
        csv: get("csv").map(PathBuf::from),
        vtk: get("vtk").map(PathBuf::from),
        surface_samples: get("L").map_or(Ok(200), |v| parse_count("L", v))?,
    })
}

/// Configs shipped with the binary, by name.
pub const BUNDLED: [(&str, &str); 6] = [
    ("example1_q2", include_str!("../configs/example1_q2.conf")),
    ("example1_q6", include_str!("../configs/example1_q6.conf")),
    ("example2_q1", include_str!("../configs/example2_q1.conf")),
    ("example2_q6", include_str!("../configs/example2_q6.conf")),
    ("example1_p2", include_str!("../configs/example1_p2.conf")),
    ("example3", include_str!("../configs/example3.conf")),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}
