//! Experiment configuration: files, command-line parameters and the value
//! types shared by experiments.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    FiniteBv,
    HodgeAnomaly,
    CircleTorsion,
    HeatParametrix,
    RuelleCat,
    SubshiftZeta,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::FiniteBv,
        ExperimentId::HodgeAnomaly,
        ExperimentId::CircleTorsion,
        ExperimentId::HeatParametrix,
        ExperimentId::RuelleCat,
        ExperimentId::SubshiftZeta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::FiniteBv => "finite-bv",
            ExperimentId::HodgeAnomaly => "hodge-anomaly",
            ExperimentId::CircleTorsion => "circle-torsion",
            ExperimentId::HeatParametrix => "heat-parametrix",
            ExperimentId::RuelleCat => "ruelle-cat",
            ExperimentId::SubshiftZeta => "subshift-zeta",
        }
    }
}

impl FromStr for ExperimentId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = ExperimentId::ALL.iter().map(|e| e.name()).collect();
                CliError::Usage(format!("unknown experiment {s:?}; expected one of {}", known.join(", ")))
            })
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `pi`, `-pi/2`, `2pi/3`, `2*pi/3`, `3pi` or a plain number.
pub fn parse_angle(text: &str) -> Result<f64, String> {
    let t: String = text.trim().to_ascii_lowercase().chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let bad = || format!("cannot read {text:?} as an angle");
    let Some(pos) = t.find("pi") else { return Err(bad()) };
    let head = t[..pos].trim_end_matches('*');
    let tail = &t[pos + 2..];
    let coeff = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let den = match tail {
        "" => 1.0,
        t if t.starts_with('/') => t[1..].parse::<f64>().map_err(|_| bad())?,
        _ => return Err(bad()),
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(coeff * PI / den)
}

/// Angle given as a number or an expression in `pi`; serialized as a number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Angle(pub f64);

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Angle;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or an expression such as 2pi/3")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<Angle, E> {
                Ok(Angle(x))
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<Angle, E> {
                Ok(Angle(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<Angle, E> {
                Ok(Angle(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Angle, E> {
                parse_angle(s).map(Angle).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Reads a list of angles or a single angle.
pub fn angle_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Angle>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        List(Vec<Angle>),
        One(Angle),
    }
    Ok(match Raw::deserialize(d)? {
        Raw::List(v) => v,
        Raw::One(a) => vec![a],
    })
}

/// Parses `a:b:step` (inclusive of `b` up to rounding) or `x,y,z`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("cannot read {s:?} in grid {text:?}"));
    match parts.len() {
        1 => text.split(',').map(num).collect(),
        3 => {
            let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(h > 0.0) || b < a {
                return Err(format!("grid {text:?} needs a ≤ b and a positive step"));
            }
            let n = ((b - a) / h + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + h * i as f64).collect())
        }
        _ => Err(format!("grid {text:?} is neither a:b:step nor a list")),
    }
}

/// Real grid given as a list or as an `a:b:step` string.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Grid(pub Vec<f64>);

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<f64>),
            One(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(Grid(v)),
            Raw::One(x) => Ok(Grid(vec![x])),
            Raw::Text(s) => parse_grid(&s).map(Grid).map_err(de::Error::custom),
        }
    }
}

/// A configuration before the parameters are checked against the
/// experiment's schema.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<String>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub tolerances: Map<String, Value>,
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let is_toml = path.extension().is_some_and(|e| e == "toml");
        let at = |e: String| CliError::Usage(format!("config {}: {e}", path.display()));
        if is_toml {
            let de = toml::Deserializer::new(&text);
            serde_path_to_error::deserialize(de).map_err(|e| at(format!("{} at `{}`", e.inner(), e.path())))
        } else {
            let mut de = serde_json::Deserializer::from_str(&text);
            serde_path_to_error::deserialize(&mut de).map_err(|e| at(format!("{} at `{}`", e.inner(), e.path())))
        }
    }
}

/// Value of a `--key value` parameter: comma lists become arrays, numbers
/// and booleans are typed, anything else stays a string. Grids (`a:b:h`) and
/// matrices (`1,1;1,0`) stay strings.
pub fn cli_value(text: &str) -> Value {
    fn scalar(s: &str) -> Value {
        let s = s.trim();
        if let Ok(i) = s.parse::<i64>() {
            return Value::from(i);
        }
        if let Ok(x) = s.parse::<f64>() {
            return Value::from(x);
        }
        match s {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => Value::String(s.to_string()),
        }
    }
    if text.starts_with('[') || text.starts_with('{') {
        if let Ok(v) = serde_json::from_str(text) {
            return v;
        }
    }
    if text.contains(',') && !text.contains(':') && !text.contains(';') {
        Value::Array(text.split(',').map(scalar).collect())
    } else {
        scalar(text)
    }
}
