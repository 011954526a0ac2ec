//! Spectral winding numbers of `det[H(θ) − E_B]` around a base energy.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::Array2;
use num_complex::Complex64 as c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::det::{log_det_phase, wrap_angle, LogDet};
use crate::error::{Error, Result};
use crate::model::{
    build_fock_basis, build_many_body, build_single_particle, single_particle_ring, Boundary,
    FockBasis, ModelParams,
};
use crate::observables::spacing::nearest_spacing_raw;

pub const DEFAULT_N_THETA: usize = 256;
pub const MIN_N_THETA: usize = 64;
/// Cap on determinant evaluations per loop, refinements included.
pub const MAX_THETA_POINTS: usize = 1 << 14;
/// Accepted distance of the accumulated phase from an integer.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-3;

/// Which flux angle is swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindingAxis {
    G,
    H,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingResult {
    pub nu: WindingAxis,
    pub e_b: c64,
    pub w: i64,
    /// Accumulated argument over `2π` before rounding.
    pub raw_phase: f64,
    /// Number of determinant evaluations on the final loop.
    pub n_theta: usize,
}

/// A loop of matrices `θ ↦ H(θ)`, `θ ∈ [0, 2π]`.
pub trait ThetaFamily: Sync {
    fn matrix(&self, theta: f64) -> Result<Array2<c64>>;

    fn log_det(&self, theta: f64, e_b: c64) -> Result<LogDet> {
        log_det_phase(&self.matrix(theta)?, e_b)
    }
}

/// The model with `θ_g` or `θ_h` replaced by the loop parameter.
#[derive(Debug, Clone)]
pub struct ModelFamily {
    params: ModelParams,
    axis: WindingAxis,
    basis: Option<FockBasis>,
}

impl ModelFamily {
    pub fn new(params: &ModelParams, axis: WindingAxis) -> Result<Self> {
        params.validate()?;
        let basis = match params.particles {
            Some(n) => Some(build_fock_basis(params.sites, n)?),
            None => None,
        };
        Ok(ModelFamily {
            params: params.clone(),
            axis,
            basis,
        })
    }

    pub fn axis(&self) -> WindingAxis {
        self.axis
    }

    pub fn params_at(&self, theta: f64) -> ModelParams {
        let mut p = self.params.clone();
        match self.axis {
            WindingAxis::G => p.theta_g = theta,
            WindingAxis::H => p.theta_h = theta,
        }
        p
    }
}

impl ThetaFamily for ModelFamily {
    fn matrix(&self, theta: f64) -> Result<Array2<c64>> {
        let p = self.params_at(theta);
        match &self.basis {
            Some(b) => Ok(build_many_body(&p, b)?.matrix),
            None => Ok(build_single_particle(&p)?.matrix),
        }
    }

    fn log_det(&self, theta: f64, e_b: c64) -> Result<LogDet> {
        let p = self.params_at(theta);
        match &self.basis {
            Some(b) => log_det_phase(&build_many_body(&p, b)?.matrix, e_b),
            None if p.boundary == Boundary::Periodic => {
                single_particle_ring(&p)?.log_det_shifted(e_b)
            }
            None => log_det_phase(&build_single_particle(&p)?.matrix, e_b),
        }
    }
}

fn arg_at<F: ThetaFamily + ?Sized>(family: &F, theta: f64, e_b: c64) -> Result<f64> {
    match family.log_det(theta, e_b) {
        Ok(d) => Ok(d.arg),
        Err(Error::Singular { .. }) => Err(Error::IndeterminateWinding(format!(
            "E_B = {e_b} lies on an eigenvalue trail at theta = {theta:.6}"
        ))),
        Err(e) => Err(e),
    }
}

struct Accumulator<'a, F: ?Sized> {
    family: &'a F,
    e_b: c64,
    evaluations: AtomicUsize,
}

impl<F: ThetaFamily + ?Sized> Accumulator<'_, F> {
    /// Phase increment over `[a, b]`, bisecting while a single step turns by
    /// more than π/2.
    fn increment(&self, a: f64, arg_a: f64, b: f64, arg_b: f64) -> Result<f64> {
        let d = wrap_angle(arg_b - arg_a);
        if d.abs() <= PI / 2.0 {
            return Ok(d);
        }
        if b - a <= 2.0 * PI / MAX_THETA_POINTS as f64
            || self.evaluations.load(Ordering::Relaxed) >= MAX_THETA_POINTS
        {
            return Err(Error::IndeterminateWinding(format!(
                "phase jumps by {d:.3} rad within theta in [{a:.6}, {b:.6}] at the refinement cap"
            )));
        }
        let m = 0.5 * (a + b);
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let arg_m = arg_at(self.family, m, self.e_b)?;
        Ok(self.increment(a, arg_a, m, arg_m)? + self.increment(m, arg_m, b, arg_b)?)
    }

    fn total(&self, n: usize) -> Result<f64> {
        let thetas: Vec<f64> = (0..=n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        let args: Vec<f64> = thetas
            .par_iter()
            .map(|&th| arg_at(self.family, th, self.e_b))
            .collect::<Result<_>>()?;
        self.evaluations.fetch_add(n + 1, Ordering::Relaxed);
        // ordered reduction keeps the sum bit-reproducible
        let mut total = 0.0;
        for k in 0..n {
            total += self.increment(thetas[k], args[k], thetas[k + 1], args[k + 1])?;
        }
        Ok(total)
    }
}

/// Winding number `w = (1/2π) ∮ d arg det[H(θ) − E_B]`.
///
/// Starts from a uniform grid of `n_theta` steps, bisects any step whose
/// phase increment exceeds π/2, and doubles the grid when the accumulated
/// phase misses an integer by more than [`INTEGRALITY_TOLERANCE`].
pub fn winding_number<F: ThetaFamily + ?Sized>(
    family: &F,
    nu: WindingAxis,
    e_b: c64,
    n_theta: usize,
) -> Result<WindingResult> {
    if n_theta < MIN_N_THETA {
        return Err(Error::param(
            "n_theta",
            format!("{n_theta} is below the minimum {MIN_N_THETA}"),
        ));
    }
    let mut n = n_theta;
    loop {
        let acc = Accumulator {
            family,
            e_b,
            evaluations: AtomicUsize::new(0),
        };
        let last_failure = match acc.total(n) {
            Ok(total) => {
                let raw_phase = total / (2.0 * PI);
                let w = raw_phase.round();
                if (raw_phase - w).abs() < INTEGRALITY_TOLERANCE {
                    return Ok(WindingResult {
                        nu,
                        e_b,
                        w: w as i64,
                        raw_phase,
                        n_theta: acc.evaluations.into_inner(),
                    });
                }
                Error::IndeterminateWinding(format!(
                    "accumulated phase {raw_phase:.6} is not integral"
                ))
            }
            Err(e @ Error::IndeterminateWinding(_)) => e,
            Err(e) => return Err(e),
        };
        if 2 * n > MAX_THETA_POINTS {
            return Err(last_failure);
        }
        n *= 2;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseEnergyOptions {
    /// Single-linkage threshold in units of the median nearest-neighbour spacing.
    pub cluster_factor: f64,
    /// Clusters whose imaginary parts spread by less than this are treated as real.
    pub min_imag_spread: f64,
    /// Clusters whose imaginary spread is below this fraction of their real
    /// spread are treated as real bands carrying finite-size noise.
    pub min_aspect: f64,
    /// Clusters whose imaginary spread is below this fraction of the real
    /// extent of the whole spectrum are treated as real.
    pub min_relative_spread: f64,
    /// Keep at most this many clusters, widest imaginary spread first.
    pub max_candidates: usize,
}

impl Default for BaseEnergyOptions {
    fn default() -> Self {
        BaseEnergyOptions {
            cluster_factor: 5.0,
            min_imag_spread: 1e-10,
            min_aspect: 1e-2,
            min_relative_spread: 1e-3,
            max_candidates: 8,
        }
    }
}

/// Candidate base energies: the centroid of every eigenvalue cluster with a
/// genuinely nonzero imaginary spread, followed by `E_B = 0`.
pub fn select_base_energies(eigenvalues: &[c64], opts: &BaseEnergyOptions) -> Vec<c64> {
    let n = eigenvalues.len();
    let mut out = Vec::new();
    if n >= 2 {
        let mut spacings = nearest_spacing_raw(eigenvalues);
        spacings.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            spacings[n / 2]
        } else {
            0.5 * (spacings[n / 2 - 1] + spacings[n / 2])
        };
        let threshold = opts.cluster_factor * median;

        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                if (eigenvalues[i] - eigenvalues[j]).norm() <= threshold {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = clusters.len();
                clusters.push(Vec::new());
            }
            clusters[slot[r]].push(i);
        }
        let (re_lo, re_hi) = eigenvalues
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z.re), hi.max(z.re)));
        let floor = opts.min_imag_spread.max(opts.min_relative_spread * (re_hi - re_lo));
        let mut rings: Vec<(f64, c64)> = Vec::new();
        for members in clusters {
            let spread = |part: fn(&c64) -> f64| {
                let (lo, hi) = members
                    .iter()
                    .map(|&i| part(&eigenvalues[i]))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
                hi - lo
            };
            let (im_spread, re_spread) = (spread(|z| z.im), spread(|z| z.re));
            if im_spread > floor && im_spread > opts.min_aspect * re_spread {
                let centroid: c64 =
                    members.iter().map(|&i| eigenvalues[i]).sum::<c64>() / members.len() as f64;
                rings.push((im_spread, centroid));
            }
        }
        // Stable sort keeps spectral order among equally wide clusters.
        rings.sort_by(|a, b| b.0.total_cmp(&a.0));
        out.extend(rings.into_iter().take(opts.max_candidates).map(|r| r.1));
    }
    out.push(c64::new(0.0, 0.0));
    out
}

/// Windings at every candidate base energy plus the headline value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseEnergyScan {
    pub candidates: Vec<c64>,
    /// `None` where the winding was indeterminate.
    pub windings: Vec<Option<WindingResult>>,
    /// Determinate candidate with the largest `|w|` (first one on ties).
    pub headline: Option<WindingResult>,
}

pub fn scan_base_energies<F: ThetaFamily + ?Sized>(
    family: &F,
    nu: WindingAxis,
    eigenvalues: &[c64],
    opts: &BaseEnergyOptions,
    n_theta: usize,
) -> Result<BaseEnergyScan> {
    let candidates = select_base_energies(eigenvalues, opts);
    let mut windings = Vec::with_capacity(candidates.len());
    for &e_b in &candidates {
        match winding_number(family, nu, e_b, n_theta) {
            Ok(r) => windings.push(Some(r)),
            Err(Error::IndeterminateWinding(msg)) => {
                log::debug!("indeterminate winding at E_B = {e_b}: {msg}");
                windings.push(None)
            }
            Err(e) => return Err(e),
        }
    }
    let headline = windings
        .iter()
        .flatten()
        .fold(None::<WindingResult>, |best, r| match best {
            Some(b) if b.w.abs() >= r.w.abs() => Some(b),
            _ => Some(*r),
        });
    Ok(BaseEnergyScan {
        candidates,
        windings,
        headline,
    })
}

/// `det H(θ) / |det H(0)|` on a uniform grid of `n_theta + 1` points closing
/// the loop at `2π`.
pub fn det_trajectory<F: ThetaFamily + ?Sized>(
    family: &F,
    n_theta: usize,
) -> Result<Vec<(f64, c64)>> {
    let zero = c64::new(0.0, 0.0);
    let thetas: Vec<f64> = (0..=n_theta)
        .map(|k| 2.0 * PI * k as f64 / n_theta as f64)
        .collect();
    let dets: Vec<LogDet> = thetas
        .par_iter()
        .map(|&th| family.log_det(th, zero))
        .collect::<Result<_>>()?;
    let reference = dets[0].log_abs;
    Ok(thetas
        .into_iter()
        .zip(dets)
        .map(|(th, d)| (th, c64::from_polar((d.log_abs - reference).exp(), d.arg)))
        .collect())
}
