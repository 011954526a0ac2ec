use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Golden-ratio wavenumber `(√5 − 1)/2`, the default quasiperiodic modulation.
pub const GOLDEN_ALPHA: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
    Open,
}

/// Full parameter record of the generalized AAH chain.
///
/// Serialized keys match the conventional symbols (`L`, `V1`, `U`, ...);
/// every angle is in radians. `N` is only present for many-body runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(default = "default_t")]
    pub t: f64,
    #[serde(rename = "V1", default)]
    pub v1: f64,
    #[serde(rename = "V2", default)]
    pub v2: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub g: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub theta_g: f64,
    #[serde(default)]
    pub theta_h: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(rename = "U", default)]
    pub u: f64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub particles: Option<usize>,
    #[serde(default)]
    pub boundary: Boundary,
}

fn default_t() -> f64 {
    1.0
}

fn default_alpha() -> f64 {
    GOLDEN_ALPHA
}

/// Real-valued fields that a sweep axis may vary.
pub const SWEEPABLE_FIELDS: [&str; 10] = [
    "t", "V1", "V2", "alpha", "g", "h", "theta_g", "theta_h", "phi", "U",
];

impl ModelParams {
    /// Clean chain of `sites` sites: `t = 1`, golden `alpha`, everything else off.
    pub fn new(sites: usize) -> Self {
        ModelParams {
            sites,
            t: 1.0,
            v1: 0.0,
            v2: 0.0,
            alpha: GOLDEN_ALPHA,
            g: 0.0,
            h: 0.0,
            theta_g: 0.0,
            theta_h: 0.0,
            phi: 0.0,
            u: 0.0,
            particles: None,
            boundary: Boundary::Periodic,
        }
    }

    /// Half-filled many-body record, `N = L/2`.
    pub fn half_filled(sites: usize) -> Self {
        ModelParams {
            particles: Some(sites / 2),
            ..ModelParams::new(sites)
        }
    }

    pub fn is_many_body(&self) -> bool {
        self.particles.is_some()
    }

    pub fn min_sites(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => 3,
            Boundary::Open => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < self.min_sites() {
            return Err(Error::param(
                "L",
                format!(
                    "{} sites is below the minimum {} for {:?} boundary",
                    self.sites,
                    self.min_sites(),
                    self.boundary
                ),
            ));
        }
        for name in SWEEPABLE_FIELDS {
            let v = self.get(name).expect("listed field");
            if !v.is_finite() {
                return Err(Error::param(name, format!("{v} is not finite")));
            }
        }
        for (name, v) in [("V1", self.v1), ("V2", self.v2), ("U", self.u)] {
            if v < 0.0 {
                return Err(Error::param(name, format!("{v} is negative")));
            }
        }
        if let Some(n) = self.particles {
            if n > self.sites {
                return Err(Error::param(
                    "N",
                    format!("{n} particles do not fit on {} sites", self.sites),
                ));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "t" => self.t,
            "V1" => self.v1,
            "V2" => self.v2,
            "alpha" => self.alpha,
            "g" => self.g,
            "h" => self.h,
            "theta_g" => self.theta_g,
            "theta_h" => self.theta_h,
            "phi" => self.phi,
            "U" => self.u,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "t" => &mut self.t,
            "V1" => &mut self.v1,
            "V2" => &mut self.v2,
            "alpha" => &mut self.alpha,
            "g" => &mut self.g,
            "h" => &mut self.h,
            "theta_g" => &mut self.theta_g,
            "theta_h" => &mut self.theta_h,
            "phi" => &mut self.phi,
            "U" => &mut self.u,
            _ => return Err(Error::param(name, "not a real-valued model field")),
        };
        *slot = value;
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: ModelParams = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical JSON form; keys result caches and manifests.
    pub fn canonical_hash(&self) -> String {
        canonical_hash(self)
    }
}

/// Copy of `p` with the random phase shift set to `phi`.
///
/// The shift enters the cosine arguments of both the hopping and the on-site
/// modulation, undivided by `L`.
pub fn with_phase_shift(p: &ModelParams, phi: f64) -> ModelParams {
    ModelParams { phi, ..p.clone() }
}

pub(crate) fn canonical_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("plain data serializes");
    hex::encode(Sha256::digest(&bytes))
}
