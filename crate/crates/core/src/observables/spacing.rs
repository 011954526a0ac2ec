use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nearest-neighbour spacings in the complex plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingSample {
    pub raw: Vec<f64>,
    /// `raw` rescaled to unit mean.
    pub normalized: Vec<f64>,
    pub mean_raw: f64,
    /// Spacings that are exactly zero (degenerate eigenvalues); kept in the sample.
    pub degenerate: usize,
}

/// `s_n = min_{m≠n} |E_n − E_m|` for every `n`.
///
/// Walks outwards from each point in order of real part and stops in each
/// direction once the real separation alone exceeds the best distance found.
pub fn nearest_spacing_raw(eigenvalues: &[c64]) -> Vec<f64> {
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].re.total_cmp(&eigenvalues[b].re));
    let mut best = vec![f64::INFINITY; n];
    for (pos, &i) in order.iter().enumerate() {
        let e = eigenvalues[i];
        let mut closest = f64::INFINITY;
        for &j in &order[pos + 1..] {
            if eigenvalues[j].re - e.re > closest {
                break;
            }
            closest = closest.min((eigenvalues[j] - e).norm());
        }
        for &j in order[..pos].iter().rev() {
            if e.re - eigenvalues[j].re > closest {
                break;
            }
            closest = closest.min((eigenvalues[j] - e).norm());
        }
        best[i] = closest;
    }
    best
}

pub fn nearest_spacings(eigenvalues: &[c64]) -> Result<SpacingSample> {
    if eigenvalues.len() < 2 {
        return Err(Error::param("eigenvalues", "need at least two levels"));
    }
    let raw = nearest_spacing_raw(eigenvalues);
    let degenerate = raw.iter().filter(|&&s| s == 0.0).count();
    let mean_raw = raw.iter().sum::<f64>() / raw.len() as f64;
    let normalized = normalize_unit_mean(&raw);
    Ok(SpacingSample {
        raw,
        normalized,
        mean_raw,
        degenerate,
    })
}

/// Rescales to unit mean; an all-zero sample is returned unchanged.
pub fn normalize_unit_mean(s: &[f64]) -> Vec<f64> {
    let mean = s.iter().sum::<f64>() / s.len().max(1) as f64;
    if mean > 0.0 {
        s.iter().map(|x| x / mean).collect()
    } else {
        s.to_vec()
    }
}
