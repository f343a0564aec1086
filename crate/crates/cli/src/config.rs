//! Flat `key = value` scenario configuration.
//!
//! Values are resolved in layers: built-in defaults, then a preset, then a
//! config file, then `--set` overrides. Every key is known up front; anything
//! else is rejected with the line or flag that introduced it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Where a resolved value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Default,
    Preset(String),
    File { path: String, line: usize },
    Flag,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Default => write!(f, "default"),
            Origin::Preset(name) => write!(f, "preset {name}"),
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Flag => write!(f, "--set"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub field: Option<String>,
    pub message: String,
}

impl ConfigError {
    pub fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            origin: None,
            field: Some(field.to_string()),
            message: message.into(),
        }
    }

    fn at(origin: Origin, field: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            origin: Some(origin),
            field: field.map(str::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(o) = &self.origin {
            write!(f, "{o}: ")?;
        }
        if let Some(k) = &self.field {
            write!(f, "`{k}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Every accepted key, its default (empty means unset) and a short help.
pub const SCHEMA: &[(&str, &str, &str)] = &[
    ("command", "", "subcommand to run when none is given on the command line"),
    ("pulse.shape", "gaussian", "gaussian or square"),
    ("pulse.duration", "", "duration T in seconds"),
    ("pulse.bandwidth", "", "transform-limited intensity FWHM in Hz; sets T"),
    ("pulse.detuning", "0", "dimensionless detuning δ = ΔT"),
    ("pulse.detuning_hz", "", "detuning in Hz; overrides pulse.detuning"),
    ("pulse.chirp", "0", "dimensionless quadratic phase coefficient β"),
    ("pulse.chirped_bandwidth", "", "chirp the envelope up to this FWHM in Hz"),
    ("pulse.chirp_sign", "1", "sign of the chirp fixed by pulse.chirped_bandwidth"),
    ("pulse.tau0", "", "window start in units of T (shape default if unset)"),
    ("pulse.tau_end", "", "window end in units of T (shape default if unset)"),
    ("kernel.s", "6", "power law exponent, 3 or 6"),
    ("kernel.c_au", "", "C_s in atomic units; negative is attractive"),
    ("kernel.angular", "isotropic", "isotropic or aligned-dipole"),
    ("rho", "", "atom density in cm^-3"),
    ("seed", "1", "random seed"),
    ("workers", "0", "worker threads, 0 for all cores"),
    ("sweep.i_max", "0.5", "largest I/I_sat of the excitation curve"),
    ("sweep.i_points", "501", "points on the excitation curve"),
    ("sweep.rho_points", "131", "points on the density sweep from 0 to rho"),
    ("sweep.r_min_um", "0.5", "smallest pair separation in μm"),
    ("sweep.r_max_um", "20", "largest pair separation in μm"),
    ("sweep.r_points", "200", "log-spaced separations"),
    ("correlation.bandwidths", "", "comma list of chirped bandwidths in Hz"),
    ("correlation.chirp_signs", "", "comma list of chirp signs, one per bandwidth"),
    ("correlation.detunings_hz", "", "comma list of detunings in Hz"),
    ("oracle.atoms", "2", "number of atoms"),
    ("oracle.couplings", "uniform", "uniform or random"),
    ("oracle.k", "1", "all-to-all coupling k_ij for uniform couplings"),
    ("oracle.k_min", "0.01", "smallest |k_ij| for random couplings"),
    ("oracle.k_max", "1000", "largest |k_ij| for random couplings"),
    ("oracle.omega", "1", "dimensionless Rabi frequency ω = ΩT"),
    ("oracle.points", "101", "output times across the pulse window"),
    ("oracle.residual", "false", "also fit the fourth-order expansion residual"),
    ("oracle.max_atoms", "14", "refuse larger systems"),
    ("mc.samples", "200", "independent clouds"),
    ("mc.atoms", "1250", "partners per cloud"),
    ("mc.geometry", "sphere", "sphere or box"),
];

fn schema_entry(key: &str) -> Option<&'static (&'static str, &'static str, &'static str)> {
    SCHEMA.iter().find(|(k, _, _)| *k == key)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, (String, Origin)>,
}

impl Default for Config {
    fn default() -> Self {
        let values = SCHEMA
            .iter()
            .map(|(k, d, _)| (k.to_string(), (d.to_string(), Origin::Default)))
            .collect();
        Self { values }
    }
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), ConfigError> {
        if schema_entry(key).is_none() {
            let near: Vec<&str> = SCHEMA
                .iter()
                .map(|(k, _, _)| *k)
                .filter(|k| k.split('.').next() == key.split('.').next())
                .collect();
            let hint = if near.is_empty() {
                String::new()
            } else {
                format!(" (known keys here: {})", near.join(", "))
            };
            return Err(ConfigError::at(origin, Some(key), format!("unknown key{hint}")));
        }
        self.values
            .insert(key.to_string(), (value.trim().to_string(), origin));
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn merge_text(&mut self, text: &str, path: &str) -> Result<(), ConfigError> {
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let origin = Origin::File {
                path: path.to_string(),
                line: line_no,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::at(origin, None, "expected `key = value`"));
            };
            let k = k.trim();
            if k.is_empty() {
                return Err(ConfigError::at(origin, None, "missing key before `=`"));
            }
            if let Some(prev) = seen.insert(k.to_string(), line_no) {
                return Err(ConfigError::at(
                    origin,
                    Some(k),
                    format!("duplicate key, first set on line {prev}"),
                ));
            }
            self.set(k, v, origin)?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn merge_flag(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let Some((k, v)) = assignment.split_once('=') else {
            return Err(ConfigError::at(
                Origin::Flag,
                None,
                format!("expected key=value, got `{assignment}`"),
            ));
        };
        self.set(k.trim(), v, Origin::Flag)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        let (v, _) = self.values.get(key).expect("key in schema");
        if v.is_empty() {
            None
        } else {
            Some(v)
        }
    }

    pub fn origin(&self, key: &str) -> &Origin {
        &self.values.get(key).expect("key in schema").1
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let origin = match self.origin(key) {
            Origin::Default => None,
            o => Some(o.clone()),
        };
        ConfigError {
            origin,
            field: Some(key.to_string()),
            message: message.into(),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| self.error(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    pub fn require<T: FromStr>(&self, key: &str, why: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| ConfigError::field(key, format!("required {why}")))
    }

    /// A value that always has a default in the schema.
    pub fn value<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.require(key, "but unset")
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.raw(key) else {
            return Ok(None);
        };
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| self.error(key, format!("cannot parse list item `{}`: {e}", s.trim())))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn finite(&self, key: &str, v: f64) -> Result<f64, ConfigError> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.error(key, "must be finite"))
        }
    }

    pub fn positive(&self, key: &str, v: f64) -> Result<f64, ConfigError> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.error(key, format!("must be positive, got {v}")))
        }
    }

    pub fn invalid(&self, key: &str, message: impl Into<String>) -> ConfigError {
        self.error(key, message)
    }

    /// `key = value` lines for every key, unset ones included.
    pub fn resolved_lines(&self) -> Vec<String> {
        self.values
            .iter()
            .map(|(k, (v, _))| {
                if v.is_empty() {
                    format!("{k} = (unset)")
                } else {
                    format!("{k} = {v}")
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map = self
            .values
            .iter()
            .map(|(k, (v, _))| {
                let v = if v.is_empty() {
                    serde_json::Value::Null
                } else {
                    serde_json::Value::String(v.clone())
                };
                (k.clone(), v)
            })
            .collect();
        serde_json::Value::Object(map)
    }
}
