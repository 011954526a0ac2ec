//! Parameter-grid sweeps with random-phase averaging and an on-disk cache.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::params::{canonical_hash, SWEEPABLE_FIELDS};
use crate::model::{build_fock_basis, build_hamiltonian, with_phase_shift, ModelParams};
use crate::observables::{averaged_ee, averaged_fd, nearest_spacings, StateSelection};
use crate::spectral::{
    complex_fraction, eig, eigenvalues, max_imag, scan_base_energies, winding_number,
    BaseEnergyOptions, ModelFamily, ThetaFamily, WindingAxis, DEFAULT_IMAG_CUTOFF,
};
use crate::spectral::winding::DEFAULT_N_THETA;

/// One swept parameter: `count` evenly spaced values from `min` to `max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, count: usize) -> Self {
        Axis {
            name: name.into(),
            min,
            max,
            count,
        }
    }

    /// Axis with spacing `step` from `min` up to `max` (inclusive, rounded).
    pub fn stepped(name: &str, min: f64, max: f64, step: f64) -> Self {
        let count = ((max - min) / step).round() as usize + 1;
        Axis::new(name, min, min + step * (count - 1) as f64, count)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / last
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let field = format!("axes.{}", self.name);
        if !SWEEPABLE_FIELDS.contains(&self.name.as_str()) {
            return Err(Error::param(field, "not a sweepable model field"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::param(field, "bounds must be finite"));
        }
        match self.count {
            0 => Err(Error::param(field, "count must be at least 2")),
            1 if self.min != self.max => Err(Error::param(
                field,
                "count must be at least 2 unless min == max",
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    FdAll,
    FdMidSixth,
    FdCenterTenth,
    FIm,
    MaxImag,
    Ee,
    Spacings,
    WindingG,
    WindingH,
}

impl Observable {
    pub const ALL: [Observable; 9] = [
        Observable::FdAll,
        Observable::FdMidSixth,
        Observable::FdCenterTenth,
        Observable::FIm,
        Observable::MaxImag,
        Observable::Ee,
        Observable::Spacings,
        Observable::WindingG,
        Observable::WindingH,
    ];

    /// Column name in result tables.
    pub fn name(self) -> &'static str {
        match self {
            Observable::FdAll => "fd_all",
            Observable::FdMidSixth => "fd_mid_sixth",
            Observable::FdCenterTenth => "fd_center_tenth",
            Observable::FIm => "f_im",
            Observable::MaxImag => "max_imag",
            Observable::Ee => "ee",
            Observable::Spacings => "spacings",
            Observable::WindingG => "winding_g",
            Observable::WindingH => "winding_h",
        }
    }

    fn needs_vectors(self) -> bool {
        matches!(
            self,
            Observable::FdAll | Observable::FdMidSixth | Observable::FdCenterTenth | Observable::Ee
        )
    }

    fn winding_axis(self) -> Option<WindingAxis> {
        match self {
            Observable::WindingG => Some(WindingAxis::G),
            Observable::WindingH => Some(WindingAxis::H),
            _ => None,
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Observable::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::param("observables", format!("unknown observable {s:?}")))
    }
}

/// How the per-sample phase shifts are drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiStreams {
    /// Independent phases at every grid point.
    #[default]
    PerGridPoint,
    /// The same `n_phi_samples` phases at every grid point.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub n_theta: usize,
    pub imag_cutoff: f64,
    pub base_energy: BaseEnergyOptions,
    pub ee_fraction: f64,
    pub phi_streams: PhiStreams,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            n_theta: DEFAULT_N_THETA,
            imag_cutoff: DEFAULT_IMAG_CUTOFF,
            base_energy: BaseEnergyOptions::default(),
            ee_fraction: 0.1,
            phi_streams: PhiStreams::PerGridPoint,
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ModelParams,
    pub axes: Vec<Axis>,
    pub observables: Vec<Observable>,
    #[serde(default = "one")]
    pub n_phi_samples: usize,
    /// Draw `φ` uniformly from `[0, 2π)` per sample; otherwise every sample
    /// uses `base.phi`.
    #[serde(default)]
    pub random_phi: bool,
    #[serde(default)]
    pub master_seed: u64,
    /// Worker threads; 0 uses every available core. Not part of the hash.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub settings: SweepSettings,
}

/// `φ`-sample count used when a config leaves it unset: 100 up to `L = 10`,
/// 30 at `L = 12`, 10 beyond.
pub fn default_phi_samples(sites: usize) -> usize {
    match sites {
        0..=10 => 100,
        11..=12 => 30,
        _ => 10,
    }
}

impl SweepSpec {
    pub fn new(base: ModelParams, axes: Vec<Axis>, observables: Vec<Observable>) -> Self {
        SweepSpec {
            base,
            axes,
            observables,
            n_phi_samples: 1,
            random_phi: false,
            master_seed: 0,
            workers: 0,
            settings: SweepSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::param("axes", "need one or two axes"));
        }
        for a in &self.axes {
            a.validate()?;
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(Error::param("axes", "the two axes must differ"));
        }
        if self.observables.is_empty() {
            return Err(Error::param("observables", "nothing to compute"));
        }
        if self.n_phi_samples == 0 {
            return Err(Error::param("n_phi_samples", "must be at least 1"));
        }
        if self.observables.contains(&Observable::Ee) && !self.base.is_many_body() {
            return Err(Error::param("observables", "ee needs a particle number N"));
        }
        if self.settings.n_theta < crate::spectral::winding::MIN_N_THETA {
            return Err(Error::param("settings.n_theta", "below the minimum of 64"));
        }
        for g in 0..self.grid_len() {
            self.params_at(g)?.validate()?;
        }
        Ok(())
    }

    pub fn grid_len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Axis values of grid point `g`; the last axis varies fastest.
    pub fn coords(&self, g: usize) -> Vec<f64> {
        let mut rem = g;
        let mut out = vec![0.0; self.axes.len()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            out[i] = a.values()[rem % a.count];
            rem /= a.count;
        }
        out
    }

    pub fn params_at(&self, g: usize) -> Result<ModelParams> {
        let mut p = self.base.clone();
        for (a, v) in self.axes.iter().zip(self.coords(g)) {
            p.set(&a.name, v)?;
        }
        Ok(p)
    }

    /// Phase shift of sample `k` at grid point `g`, from a counter-based
    /// ChaCha stream: seed = master seed, stream = grid index, word offset = 2k.
    pub fn phi(&self, g: usize, k: usize) -> f64 {
        if !self.random_phi {
            return self.base.phi;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(match self.settings.phi_streams {
            PhiStreams::PerGridPoint => g as u64,
            PhiStreams::Shared => 0,
        });
        rng.set_word_pos(2 * k as u128);
        rng.random::<f64>() * std::f64::consts::TAU
    }

    /// Hash of the canonical JSON form with `workers` and `n_phi_samples`
    /// cleared. Neither affects the content of row `(g, k)`, so a rerun
    /// with more samples reuses every cached row of a shorter one.
    pub fn spec_hash(&self) -> String {
        canonical_hash(&SweepSpec {
            workers: 0,
            n_phi_samples: 0,
            ..self.clone()
        })
    }
}

/// Observables of a single model instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub values: BTreeMap<String, f64>,
    /// Unit-mean nearest spacings when requested.
    pub spacings: Option<Vec<f64>>,
    /// Windings that stayed non-integral after every refinement.
    pub indeterminate: Vec<Observable>,
}

/// Builds, diagonalizes and measures one parameter record.
pub fn evaluate(p: &ModelParams, observables: &[Observable], s: &SweepSettings) -> Result<Evaluation> {
    p.validate()?;
    let mut out = Evaluation::default();
    let needs_vectors = observables.iter().any(|o| o.needs_vectors());
    let single_winding = !p.is_many_body() && observables.iter().any(|o| o.winding_axis().is_some());
    let needs_values = needs_vectors
        || single_winding
        || observables.iter().any(|o| {
            matches!(o, Observable::FIm | Observable::MaxImag | Observable::Spacings)
        });

    let mut spectrum = None;
    let mut energies: Vec<c64> = Vec::new();
    if needs_values {
        let h = build_hamiltonian(p)?;
        if needs_vectors {
            let sp = eig(&h)?;
            energies = sp.eigenvalues.clone();
            spectrum = Some(sp);
        } else {
            energies = eigenvalues(&h)?;
        }
    }

    let mut put = |o: Observable, v: f64| {
        out.values.insert(o.name().to_string(), v);
    };
    for &o in observables {
        match o {
            Observable::FdAll | Observable::FdMidSixth | Observable::FdCenterTenth => {
                let sel = match o {
                    Observable::FdAll => StateSelection::All,
                    Observable::FdMidSixth => StateSelection::MidSixthReal,
                    _ => StateSelection::CenterTenthComplex,
                };
                let r = averaged_fd(spectrum.as_ref().expect("vectors computed"), sel)?;
                put(o, r.averaged);
            }
            Observable::FIm => put(o, complex_fraction(&energies, s.imag_cutoff)),
            Observable::MaxImag => put(o, max_imag(&energies)),
            Observable::Ee => {
                let n = p.particles.ok_or_else(|| Error::param("N", "ee needs a particle number"))?;
                let basis = build_fock_basis(p.sites, n)?;
                let sp = spectrum.as_ref().expect("vectors computed");
                put(o, averaged_ee(sp, &basis, s.ee_fraction)?);
            }
            Observable::Spacings => {
                out.spacings = Some(nearest_spacings(&energies)?.normalized);
            }
            Observable::WindingG | Observable::WindingH => {
                let axis = o.winding_axis().expect("winding observable");
                let family = ModelFamily::new(p, axis)?;
                let w = if p.is_many_body() {
                    match winding_number(&family, axis, c64::new(0.0, 0.0), s.n_theta) {
                        Ok(r) => Some(r.w),
                        Err(Error::IndeterminateWinding(msg)) => {
                            log::debug!("{o} indeterminate: {msg}");
                            None
                        }
                        Err(e) => return Err(e),
                    }
                } else {
                    let theta_zero = family.params_at(0.0);
                    let base = if theta_zero == *p {
                        energies.clone()
                    } else {
                        eigenvalues(&family.matrix(0.0)?)?
                    };
                    scan_base_energies(&family, axis, &base, &s.base_energy, s.n_theta)?
                        .headline
                        .map(|r| r.w)
                };
                match w {
                    Some(w) => put(o, w as f64),
                    None => out.indeterminate.push(o),
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub grid: usize,
    pub sample: usize,
    pub coords: Vec<f64>,
    pub phi: f64,
    pub values: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacings: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indeterminate: Vec<Observable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Sample means at one grid point. Winding columns also get a `<name>_abs`
/// column holding the mean of `|w|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAverage {
    pub grid: usize,
    pub coords: Vec<f64>,
    pub values: BTreeMap<String, f64>,
    /// Samples contributing to each column.
    pub samples: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub spec_hash: String,
    pub code_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub wall_seconds: f64,
    pub cache_hits: usize,
    pub computed_jobs: usize,
    pub failed_jobs: usize,
    pub indeterminate_windings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub spec: SweepSpec,
    /// Ordered by grid point, then sample.
    pub rows: Vec<Row>,
    pub averages: Vec<GridAverage>,
    pub manifest: SweepManifest,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Per-job result files go under `<cache_dir>/<spec hash>/`.
    pub cache_dir: Option<PathBuf>,
    /// Reuse cached rows instead of recomputing them.
    pub resume: bool,
}

impl RunOptions {
    pub fn cached(dir: impl Into<PathBuf>) -> Self {
        RunOptions {
            cache_dir: Some(dir.into()),
            resume: true,
        }
    }
}

fn cache_file(dir: &Path, hash: &str, g: usize, k: usize) -> PathBuf {
    dir.join(hash).join(format!("g{g}_s{k}.json"))
}

/// Write-then-rename so readers never see a partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().expect("cache files live in a directory");
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("row"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

/// Runs every (grid point, sample) job on a worker pool and aggregates in
/// job order, so the table does not depend on the worker count.
pub fn run_sweep(spec: &SweepSpec, opts: &RunOptions) -> Result<ResultTable> {
    spec.validate()?;
    let started_unix = unix_now();
    let clock = Instant::now();
    let hash = spec.spec_hash();
    let jobs: Vec<(usize, usize)> = (0..spec.grid_len())
        .flat_map(|g| (0..spec.n_phi_samples).map(move |k| (g, k)))
        .collect();
    let hits = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);

    let run_job = |&(g, k): &(usize, usize)| -> Row {
        let path = opts.cache_dir.as_ref().map(|d| cache_file(d, &hash, g, k));
        if let (Some(path), true) = (&path, opts.resume) {
            if let Ok(bytes) = fs::read(path) {
                match serde_json::from_slice::<Row>(&bytes) {
                    Ok(row) if row.grid == g && row.sample == k => {
                        hits.fetch_add(1, Ordering::Relaxed);
                        return row;
                    }
                    _ => log::warn!("ignoring unreadable cache entry {}", path.display()),
                }
            }
        }
        let phi = spec.phi(g, k);
        let mut row = Row {
            grid: g,
            sample: k,
            coords: spec.coords(g),
            phi,
            values: BTreeMap::new(),
            spacings: None,
            indeterminate: Vec::new(),
            error: None,
        };
        let result = spec
            .params_at(g)
            .and_then(|p| evaluate(&with_phase_shift(&p, phi), &spec.observables, &spec.settings));
        match result {
            Ok(ev) => {
                row.values = ev.values;
                row.spacings = ev.spacings;
                row.indeterminate = ev.indeterminate;
                if let Some(path) = &path {
                    let written = serde_json::to_vec(&row)
                        .map_err(Error::from)
                        .and_then(|bytes| write_atomic(path, &bytes));
                    if let Err(e) = written {
                        log::warn!("could not cache {}: {e}", path.display());
                    }
                }
            }
            Err(e) => {
                log::warn!("job (grid {g}, sample {k}) failed: {e}");
                row.error = Some(e.to_string());
            }
        }
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if n % 50 == 0 || n == jobs.len() {
            log::info!("{n}/{} jobs", jobs.len());
        }
        row
    };

    let rows: Vec<Row> = if spec.workers == 0 {
        jobs.par_iter().map(run_job).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(|| jobs.par_iter().map(run_job).collect())
    };

    let averages = average_rows(spec, &rows);
    let cache_hits = hits.into_inner();
    let failed_jobs = rows.iter().filter(|r| r.error.is_some()).count();
    let indeterminate_windings = rows.iter().map(|r| r.indeterminate.len()).sum();
    Ok(ResultTable {
        spec: spec.clone(),
        averages,
        manifest: SweepManifest {
            spec_hash: hash,
            code_version: env!("CARGO_PKG_VERSION").into(),
            started_unix,
            finished_unix: unix_now(),
            wall_seconds: clock.elapsed().as_secs_f64(),
            cache_hits,
            computed_jobs: rows.len() - cache_hits,
            failed_jobs,
            indeterminate_windings,
        },
        rows,
    })
}

fn average_rows(spec: &SweepSpec, rows: &[Row]) -> Vec<GridAverage> {
    let per = spec.n_phi_samples;
    rows.chunks(per)
        .enumerate()
        .map(|(g, chunk)| {
            let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
            for row in chunk {
                for (name, &v) in &row.values {
                    let e = sums.entry(name.clone()).or_insert((0.0, 0));
                    e.0 += v;
                    e.1 += 1;
                    if name.starts_with("winding_") {
                        let e = sums.entry(format!("{name}_abs")).or_insert((0.0, 0));
                        e.0 += v.abs();
                        e.1 += 1;
                    }
                }
            }
            GridAverage {
                grid: g,
                coords: spec.coords(g),
                values: sums.iter().map(|(k, &(s, n))| (k.clone(), s / n as f64)).collect(),
                samples: sums.into_iter().map(|(k, (_, n))| (k, n)).collect(),
            }
        })
        .collect()
}

/// Sample mean of integer windings.
pub fn mean_winding(w: &[i64]) -> f64 {
    if w.is_empty() {
        return f64::NAN;
    }
    w.iter().sum::<i64>() as f64 / w.len() as f64
}

/// φ-averaged winding at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingAverage {
    pub coords: Vec<f64>,
    pub mean: f64,
    pub mean_abs: f64,
    pub samples: usize,
    pub indeterminate: usize,
}

/// First coordinate along the first axis at which every determinate sample
/// has `w = 0`, i.e. where the averaged winding first reaches zero.
/// Sporadic nonzero samples further along do not move it.
pub fn winding_transition(averages: &[WindingAverage]) -> Option<f64> {
    averages
        .iter()
        .find(|a| a.samples > 0 && a.mean_abs == 0.0)
        .map(|a| a.coords[0])
}

impl ResultTable {
    /// Per-grid-point averages of a winding column; indeterminate samples
    /// are excluded from the means and counted separately.
    pub fn winding_averages(&self, axis: WindingAxis) -> Vec<WindingAverage> {
        let o = match axis {
            WindingAxis::G => Observable::WindingG,
            WindingAxis::H => Observable::WindingH,
        };
        let per = self.spec.n_phi_samples;
        self.rows
            .chunks(per)
            .map(|chunk| {
                let w: Vec<i64> = chunk
                    .iter()
                    .filter_map(|r| r.values.get(o.name()).map(|&v| v as i64))
                    .collect();
                let abs: Vec<i64> = w.iter().map(|x| x.abs()).collect();
                WindingAverage {
                    coords: chunk[0].coords.clone(),
                    mean: mean_winding(&w),
                    mean_abs: mean_winding(&abs),
                    samples: w.len(),
                    indeterminate: chunk.iter().filter(|r| r.indeterminate.contains(&o)).count(),
                }
            })
            .collect()
    }

    /// `(x, mean)` of a column along the first axis.
    pub fn curve(&self, column: &str) -> Vec<(f64, f64)> {
        self.averages
            .iter()
            .filter_map(|a| a.values.get(column).map(|&v| (a.coords[0], v)))
            .collect()
    }

    pub fn average(&self, grid: usize, column: &str) -> Option<f64> {
        self.averages.get(grid)?.values.get(column).copied()
    }

    /// Unit-mean spacings of every sample at a grid point, concatenated.
    pub fn pooled_spacings(&self, grid: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.grid == grid)
            .filter_map(|r| r.spacings.as_deref())
            .flatten()
            .copied()
            .collect()
    }

    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = self
            .averages
            .iter()
            .flat_map(|a| a.values.keys().cloned())
            .collect();
        cols.sort();
        cols.dedup();
        cols
    }

    fn axis_header(&self) -> String {
        self.spec
            .axes
            .iter()
            .map(|a| a.name.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    fn metadata(&self) -> Vec<(&'static str, String)> {
        vec![
            ("spec_hash", self.manifest.spec_hash.clone()),
            ("n_phi_samples", self.spec.n_phi_samples.to_string()),
            ("master_seed", self.spec.master_seed.to_string()),
        ]
    }

    /// One line per (grid point, sample).
    pub fn write_rows_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let cols = self.columns();
        crate::spectral::export::write_metadata(w, &self.metadata())?;
        writeln!(w, "grid,sample,{},phi,{},error", self.axis_header(), cols.join(","))?;
        for r in &self.rows {
            let coords: Vec<String> = r.coords.iter().map(f64::to_string).collect();
            let vals: Vec<String> = cols
                .iter()
                .map(|c| r.values.get(c).map_or(String::new(), f64::to_string))
                .collect();
            let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            writeln!(
                w,
                "{},{},{},{},{},{err}",
                r.grid,
                r.sample,
                coords.join(","),
                r.phi,
                vals.join(",")
            )?;
        }
        Ok(())
    }

    /// One line per grid point with sample means.
    pub fn write_averages_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let cols = self.columns();
        crate::spectral::export::write_metadata(w, &self.metadata())?;
        writeln!(w, "grid,{},{}", self.axis_header(), cols.join(","))?;
        for a in &self.averages {
            let coords: Vec<String> = a.coords.iter().map(f64::to_string).collect();
            let vals: Vec<String> = cols
                .iter()
                .map(|c| a.values.get(c).map_or(String::new(), f64::to_string))
                .collect();
            writeln!(w, "{},{},{}", a.grid, coords.join(","), vals.join(","))?;
        }
        Ok(())
    }

    /// Writes `<stem>_rows.csv`, `<stem>_averages.csv` and
    /// `<stem>_manifest.json` into `dir`; returns the paths.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let rows = dir.join(format!("{stem}_rows.csv"));
        let avgs = dir.join(format!("{stem}_averages.csv"));
        let manifest = dir.join(format!("{stem}_manifest.json"));
        self.write_rows_csv(&mut std::io::BufWriter::new(fs::File::create(&rows)?))?;
        self.write_averages_csv(&mut std::io::BufWriter::new(fs::File::create(&avgs)?))?;
        fs::write(&manifest, serde_json::to_vec_pretty(&self.manifest)?)?;
        Ok(vec![rows, avgs, manifest])
    }
}

/// Runs a sweep that includes a winding observable and returns the
/// φ-averaged windings per grid point.
pub fn averaged_winding(spec: &SweepSpec, axis: WindingAxis, opts: &RunOptions) -> Result<Vec<WindingAverage>> {
    let wanted = match axis {
        WindingAxis::G => Observable::WindingG,
        WindingAxis::H => Observable::WindingH,
    };
    if !spec.observables.contains(&wanted) {
        return Err(Error::param("observables", format!("{wanted} is not requested")));
    }
    Ok(run_sweep(spec, opts)?.winding_averages(axis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        let mut spec = SweepSpec::new(
            ModelParams {
                v2: 0.5,
                g: 0.5,
                u: 2.0,
                ..ModelParams::half_filled(6)
            },
            vec![Axis::new("V1", 1.0, 6.0, 3)],
            vec![Observable::FdAll, Observable::FIm, Observable::Ee, Observable::Spacings],
        );
        spec.n_phi_samples = 3;
        spec.random_phi = true;
        spec.master_seed = 7;
        spec
    }

    #[test]
    fn axis_values_hit_endpoints() {
        let a = Axis::stepped("V1", 2.5, 4.0, 0.05);
        assert_eq!(a.count, 31);
        let v = a.values();
        assert_eq!((v[0], v[30]), (2.5, 4.0));
        assert_eq!(Axis::new("V1", 2.0, 2.0, 1).values(), vec![2.0]);
    }

    #[test]
    fn spec_validation() {
        let mut s = small_spec();
        assert!(s.validate().is_ok());
        s.axes[0].name = "L".into();
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.axes[0].count = 1;
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.axes[0].min = -1.0;
        assert!(s.validate().is_err(), "negative V1 at a grid point");
        let mut s = small_spec();
        s.base.particles = None;
        assert!(s.validate().is_err(), "ee without N");
        assert!("nonsense".parse::<Observable>().is_err());
        assert_eq!("winding_g".parse::<Observable>().unwrap(), Observable::WindingG);
    }

    #[test]
    fn grid_order_last_axis_fastest() {
        let mut s = small_spec();
        s.axes.push(Axis::new("V2", 0.0, 1.0, 2));
        assert_eq!(s.grid_len(), 6);
        assert_eq!(s.coords(1), vec![1.0, 1.0]);
        assert_eq!(s.coords(2), vec![3.5, 0.0]);
    }

    #[test]
    fn phases_are_counter_based() {
        let s = small_spec();
        let a = s.phi(1, 2);
        assert_eq!(a, s.phi(1, 2));
        assert_ne!(a, s.phi(2, 2));
        assert!((0.0..std::f64::consts::TAU).contains(&a));
        let mut shared = small_spec();
        shared.settings.phi_streams = PhiStreams::Shared;
        assert_eq!(shared.phi(0, 1), shared.phi(2, 1));
        let mut fixed = small_spec();
        fixed.random_phi = false;
        fixed.base.phi = 0.3;
        assert_eq!(fixed.phi(2, 1), 0.3);
    }

    #[test]
    fn winding_transition_is_first_zero() {
        let at = |x: f64, mean_abs: f64| WindingAverage {
            coords: vec![x],
            mean: mean_abs,
            mean_abs,
            samples: 10,
            indeterminate: 0,
        };
        let a = [at(1.0, 0.8), at(2.0, 0.1), at(3.0, 0.0), at(4.0, 0.1), at(5.0, 0.0)];
        assert_eq!(winding_transition(&a), Some(3.0));
        assert_eq!(winding_transition(&a[..2]), None);
        let empty = WindingAverage { samples: 0, ..at(0.5, 0.0) };
        assert_eq!(winding_transition(&[empty, at(1.0, 0.0)]), Some(1.0));
    }

    #[test]
    fn hash_ignores_workers_and_sample_count() {
        let a = small_spec();
        let mut b = a.clone();
        b.workers = 3;
        assert_eq!(a.spec_hash(), b.spec_hash());
        b.n_phi_samples += 5;
        assert_eq!(a.spec_hash(), b.spec_hash());
        b.master_seed = 8;
        assert_ne!(a.spec_hash(), b.spec_hash());
    }

    #[test]
    fn single_point_equals_direct_evaluation() {
        let mut s = small_spec();
        s.axes = vec![Axis::new("V1", 2.0, 2.0, 1)];
        s.n_phi_samples = 1;
        let t = run_sweep(&s, &RunOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 1);
        let p = with_phase_shift(&s.params_at(0).unwrap(), s.phi(0, 0));
        let direct = evaluate(&p, &s.observables, &s.settings).unwrap();
        assert_eq!(t.rows[0].values, direct.values);
        assert_eq!(t.rows[0].spacings, direct.spacings);
        assert_eq!(t.averages[0].values, direct.values);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = small_spec();
        let first = run_sweep(&s, &RunOptions::cached(dir.path())).unwrap();
        assert_eq!(first.manifest.computed_jobs, 9);
        let second = run_sweep(&s, &RunOptions::cached(dir.path())).unwrap();
        assert_eq!(second.manifest.cache_hits, 9);
        assert_eq!(second.manifest.computed_jobs, 0);
        assert_eq!(first.averages, second.averages);
        assert_eq!(first.rows, second.rows);
    }

    #[test]
    fn failures_are_recorded_per_row() {
        // half filling at L = 20 passes validation but exceeds the dense budget
        let mut s = SweepSpec::new(
            ModelParams::half_filled(20),
            vec![Axis::new("V1", 1.0, 2.0, 2)],
            vec![Observable::FIm],
        );
        s.n_phi_samples = 2;
        let t = run_sweep(&s, &RunOptions::default()).unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.manifest.failed_jobs, 4);
        assert!(t.rows[0].error.as_deref().unwrap().contains("budget"));
        assert!(t.averages[0].values.is_empty());
    }

    #[test]
    fn csv_layout() {
        let mut s = small_spec();
        s.observables = vec![Observable::FIm, Observable::MaxImag];
        let t = run_sweep(&s, &RunOptions::default()).unwrap();
        let mut buf = Vec::new();
        t.write_averages_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
        assert_eq!(header, "grid,V1,f_im,max_imag");
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
        let mut buf = Vec::new();
        t.write_rows_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("grid,sample,V1,phi,f_im,max_imag,error"));
    }

    #[test]
    fn winding_means() {
        assert_eq!(mean_winding(&[0, 0, 0]), 0.0);
        assert_eq!(mean_winding(&[1, 0, 1, 0]), 0.5);
    }
}
