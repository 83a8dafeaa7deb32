//! Run configuration: TOML schema, loading and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use casimir_core::basis::BasisSpec;
use casimir_core::force::{QuadratureSpec, ThermalSpec};
use casimir_core::mie::{Material, Sphere};
use casimir_core::scattering::{Configuration, ScatteringMode};
use casimir_core::specfun::MAX_ORDER;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereConfig {
    /// μm.
    pub center: [f64; 3],
    /// μm.
    pub radius: f64,
    pub material: Material,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadratureSpec::default();
        Self { rel_tol: q.rel_tol, max_evals: q.max_evals }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    /// Standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub target: usize,
    /// Kelvin.
    #[serde(default)]
    pub temperature: f64,
    /// Chosen from the geometry when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmax: Option<usize>,
    #[serde(default = "closed", with = "mode_text")]
    pub mode: ScatteringMode,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub spheres: Vec<SphereConfig>,
}

fn closed() -> ScatteringMode {
    ScatteringMode::ClosedForm
}

mod mode_text {
    use casimir_core::scattering::ScatteringMode;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(mode: &ScatteringMode, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(mode)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ScatteringMode, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigErrorKind {
    /// Unreadable file.
    Io,
    /// Not valid TOML.
    Parse,
    /// Valid TOML that does not match the schema.
    Schema,
    /// Schema-conforming values that violate a constraint.
    Validation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub violations: Vec<String>,
}

impl ConfigError {
    fn single(kind: ConfigErrorKind, message: impl Into<String>) -> Self {
        Self { kind, violations: vec![message.into()] }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ConfigErrorKind::Io => "cannot read config",
            ConfigErrorKind::Parse => "config is not valid TOML",
            ConfigErrorKind::Schema => "config does not match the schema",
            ConfigErrorKind::Validation => "invalid config",
        };
        write!(f, "{kind}: {}", self.violations.join("; "))
    }
}

impl std::error::Error for ConfigError {}

/// Reads, parses and validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let config = read_config(path)?;
    config.validate()?;
    Ok(config)
}

/// Reads and parses without validating.
pub fn read_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::single(ConfigErrorKind::Io, format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

/// Parses without validating.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    if let Err(e) = text.parse::<toml::Table>() {
        return Err(ConfigError::single(ConfigErrorKind::Parse, e.to_string().trim_end()));
    }
    toml::from_str(text).map_err(|e| ConfigError::single(ConfigErrorKind::Schema, e.to_string().trim_end()))
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Every violated constraint, not only the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut v = Vec::new();
        let n = self.spheres.len();
        if n == 0 {
            v.push("spheres: at least one sphere is required".to_string());
        }
        for (i, s) in self.spheres.iter().enumerate() {
            if !(s.radius > 0.0 && s.radius.is_finite()) {
                v.push(format!("spheres[{i}].radius: must be positive and finite, got {}", s.radius));
            }
            if s.center.iter().any(|c| !c.is_finite()) {
                v.push(format!("spheres[{i}].center: coordinates must be finite"));
            }
            if let Err(e) = s.material.validate() {
                v.push(format!("spheres[{i}].material: {e}"));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&self.spheres[i], &self.spheres[j]);
                let d = (0..3).map(|k| (a.center[k] - b.center[k]).powi(2)).sum::<f64>().sqrt();
                if d <= a.radius + b.radius {
                    v.push(format!(
                        "spheres {i} and {j} overlap: center distance {d} um <= radius sum {} um",
                        a.radius + b.radius
                    ));
                }
            }
        }
        if n > 0 && self.target >= n {
            v.push(format!("target: index {} out of range for {n} spheres", self.target));
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            v.push(format!("temperature: must be finite and non-negative (K), got {}", self.temperature));
        }
        if let Some(l) = self.lmax {
            if l == 0 || l > MAX_ORDER / 4 {
                v.push(format!("lmax: must be in 1..={}, got {l}", MAX_ORDER / 4));
            }
        }
        if !(self.quadrature.rel_tol > 0.0 && self.quadrature.rel_tol.is_finite()) {
            v.push(format!("quadrature.rel_tol: must be positive, got {}", self.quadrature.rel_tol));
        }
        if self.quadrature.max_evals < 15 {
            v.push(format!("quadrature.max_evals: must be at least 15, got {}", self.quadrature.max_evals));
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { kind: ConfigErrorKind::Validation, violations: v })
        }
    }

    /// Assumes [`RunConfig::validate`] passed.
    pub fn configuration(&self) -> Configuration {
        let spheres = self.spheres.iter().map(|s| Sphere::new(s.center, s.radius, s.material)).collect();
        Configuration::new(spheres).expect("validated config")
    }

    pub fn basis(&self, config: &Configuration) -> BasisSpec {
        let lmax = self.lmax.unwrap_or_else(|| casimir_core::force::default_lmax(config));
        BasisSpec::new(lmax).expect("validated lmax")
    }

    pub fn thermal(&self) -> ThermalSpec {
        ThermalSpec::at(self.temperature)
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        QuadratureSpec { rel_tol: self.quadrature.rel_tol, max_evals: self.quadrature.max_evals }
    }

    /// SHA-256 of the canonical JSON form, output section excluded, so the
    /// hash identifies the physics and not where results are written.
    pub fn hash(&self) -> String {
        let mut physics = self.clone();
        physics.output = OutputConfig::default();
        let canonical = serde_json::to_vec(&physics).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}
