//! TOML config files, one schema per subcommand.

use std::path::Path;

use anyhow::{bail, Context, Result};
use nhaah::spectral::WindingAxis;
use nhaah::sweep::{Observable, SweepSpec};
use nhaah::ModelParams;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(toml::from_str(text)?)
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut SweepSpec) {
        if let Some(w) = self.workers {
            spec.workers = w;
        }
        if let Some(s) = self.seed {
            spec.master_seed = s;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub model: ModelParams,
    #[serde(default)]
    pub output: SpectrumOutput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumOutput {
    /// Eigenstate (in spectral order) whose density profile is written.
    pub state: Option<usize>,
    /// Also write the right eigenvectors as a binary blob.
    pub eigenvectors: bool,
}

impl Default for SpectrumOutput {
    fn default() -> Self {
        SpectrumOutput {
            state: Some(0),
            eigenvectors: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub sweep: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingConfig {
    pub sweep: SweepSpec,
    pub winding: WindingSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingSection {
    pub axis: WindingAxis,
    /// Write `det H(θ)/|det H(0)|` for the first sample of every grid point.
    #[serde(default)]
    pub trajectory: bool,
    #[serde(default = "default_trajectory_points")]
    pub trajectory_points: usize,
}

fn default_trajectory_points() -> usize {
    256
}

impl WindingSection {
    pub fn observable(&self) -> Observable {
        match self.axis {
            WindingAxis::G => Observable::WindingG,
            WindingAxis::H => Observable::WindingH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MblConfig {
    /// Template sweep; `L` and `N` of its base are replaced per size.
    pub sweep: SweepSpec,
    pub mbl: MblSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MblSection {
    pub sizes: Vec<usize>,
    /// Per-size sample counts, parallel to `sizes`; defaults to the sweep's.
    #[serde(default)]
    pub samples: Option<Vec<usize>>,
    /// Column whose curves of the two smallest sizes are crossed.
    #[serde(default)]
    pub crossing: Option<String>,
    #[serde(default)]
    pub collapse: Vec<CollapseSection>,
    /// Also write the mean over sizes of every column.
    #[serde(default)]
    pub cross_size_mean: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseSection {
    pub column: String,
    pub x_c: (f64, f64),
    pub nu: (f64, f64),
}

impl MblConfig {
    /// The sweep run at system size `sites` (half filling).
    pub fn sweep_for(&self, index: usize) -> Result<SweepSpec> {
        let sites = self.mbl.sizes[index];
        let mut spec = self.sweep.clone();
        spec.base.sites = sites;
        spec.base.particles = Some(sites / 2);
        if let Some(samples) = &self.mbl.samples {
            spec.n_phi_samples = samples[index];
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mbl.sizes.is_empty() {
            bail!("mbl.sizes is empty");
        }
        if let Some(s) = &self.mbl.samples {
            if s.len() != self.mbl.sizes.len() {
                bail!(
                    "mbl.samples has {} entries but mbl.sizes has {}",
                    s.len(),
                    self.mbl.sizes.len()
                );
            }
        }
        if self.sweep.axes.len() != 1 {
            bail!("mbl sweeps take exactly one axis, got {}", self.sweep.axes.len());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelstatsConfig {
    pub sweep: SweepSpec,
    #[serde(default)]
    pub levelstats: LevelstatsSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LevelstatsSection {
    /// Fixed bin count on `[0, upper]`; Freedman–Diaconis when unset.
    pub bins: Option<usize>,
    pub upper: Option<f64>,
    pub fit_sub_wigner: bool,
}
