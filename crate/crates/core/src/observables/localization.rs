use ndarray::ArrayView1;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FockBasis;
use crate::spectral::eig::spectral_order;
use crate::spectral::Spectrum;

/// Which eigenstates enter an average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSelection {
    All,
    /// `D/6` states whose `Re E` is closest to the median `Re E`.
    MidSixthReal,
    /// `D/10` states nearest the spectral centroid in the complex plane.
    CenterTenthComplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    /// `η_n` of the selected states, in spectral order.
    pub per_state: Vec<f64>,
    pub averaged: f64,
    pub selection: StateSelection,
}

/// Inverse participation ratio `Σ_j |ψ_j|⁴` of the normalized state.
pub fn ipr(state: ArrayView1<'_, c64>) -> Result<f64> {
    let norm2: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(Error::param("state", "zero vector"));
    }
    Ok(state.iter().map(|z| (z.norm_sqr() / norm2).powi(2)).sum())
}

/// Fractal dimension `η = −ln(IPR) / ln D`.
pub fn fractal_dimension(state: ArrayView1<'_, c64>) -> Result<f64> {
    let d = state.len();
    if d < 2 {
        return Err(Error::param("state", "fractal dimension needs D >= 2"));
    }
    Ok(-ipr(state)?.ln() / (d as f64).ln())
}

/// `|ψ_j|²` per site, normalized to sum to one.
pub fn density_profile(state: ArrayView1<'_, c64>) -> Vec<f64> {
    let norm2: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    state.iter().map(|z| z.norm_sqr() / norm2).collect()
}

/// Mean occupation `⟨n_j⟩` of every site in a many-body state.
pub fn site_occupation(state: ArrayView1<'_, c64>, basis: &FockBasis) -> Result<Vec<f64>> {
    if state.len() != basis.dim() {
        return Err(Error::param(
            "state",
            format!("length {} does not match basis dimension {}", state.len(), basis.dim()),
        ));
    }
    let norm2: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(Error::param("state", "zero vector"));
    }
    let mut n = vec![0.0; basis.sites()];
    for (amp, &word) in state.iter().zip(basis.states()) {
        let w = amp.norm_sqr() / norm2;
        for (j, nj) in n.iter_mut().enumerate() {
            if word >> j & 1 == 1 {
                *nj += w;
            }
        }
    }
    Ok(n)
}

fn selection_count(dim: usize, fraction: f64) -> usize {
    let k = (dim as f64 * fraction).floor() as usize;
    if k == 0 {
        dim
    } else if k > dim {
        log::warn!("selection of {k} states exceeds dimension {dim}; using all");
        dim
    } else {
        k
    }
}

/// Indices of the `⌊D·fraction⌋` states (all of them if that is zero) with
/// `Re E` closest to the median real part.
pub fn select_mid_real(eigenvalues: &[c64], fraction: f64) -> Vec<usize> {
    let n = eigenvalues.len();
    let mut re: Vec<f64> = eigenvalues.iter().map(|e| e.re).collect();
    re.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        re[n / 2]
    } else {
        0.5 * (re[n / 2 - 1] + re[n / 2])
    };
    nearest_indices(eigenvalues, selection_count(n, fraction), |e| (e.re - median).abs())
}

/// Indices of the `⌊D·fraction⌋` states nearest the centroid `ΣE/D`.
pub fn select_center_complex(eigenvalues: &[c64], fraction: f64) -> Vec<usize> {
    let n = eigenvalues.len();
    let centroid = eigenvalues.iter().sum::<c64>() / n as f64;
    nearest_indices(eigenvalues, selection_count(n, fraction), |e| (e - centroid).norm())
}

fn nearest_indices(eigenvalues: &[c64], k: usize, dist: impl Fn(&c64) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| {
        dist(&eigenvalues[a])
            .total_cmp(&dist(&eigenvalues[b]))
            .then(spectral_order(&eigenvalues[a], &eigenvalues[b]))
    });
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

pub fn select_states(eigenvalues: &[c64], selection: StateSelection) -> Vec<usize> {
    match selection {
        StateSelection::All => (0..eigenvalues.len()).collect(),
        StateSelection::MidSixthReal => select_mid_real(eigenvalues, 1.0 / 6.0),
        StateSelection::CenterTenthComplex => select_center_complex(eigenvalues, 0.1),
    }
}

pub fn averaged_fd(s: &Spectrum, selection: StateSelection) -> Result<FdReport> {
    if s.dim() == 0 {
        return Err(Error::param("spectrum", "empty"));
    }
    let per_state = select_states(&s.eigenvalues, selection)
        .into_iter()
        .map(|n| fractal_dimension(s.vector(n)))
        .collect::<Result<Vec<f64>>>()?;
    let averaged = per_state.iter().sum::<f64>() / per_state.len() as f64;
    Ok(FdReport {
        per_state,
        averaged,
        selection,
    })
}
