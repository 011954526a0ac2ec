//! Spacing histograms and the sub-Wigner fit.

use serde::{Deserialize, Serialize};

use super::reference::SubWignerParams;
use crate::error::{Error, Result};
use crate::numerics::{nelder_mead, NelderMeadOptions};

/// Density-normalized histogram on `[0, edges.last()]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// `counts / (total · width)`; integrates to one over the binned range.
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn with_bins(values: &[f64], bins: usize, upper: f64) -> Result<Self> {
        if values.is_empty() || bins == 0 || !(upper > 0.0) {
            return Err(Error::param("histogram", "need samples, bins >= 1 and a positive range"));
        }
        let width = upper / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            let k = ((v / width).floor().max(0.0) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let total = values.len() as f64;
        Ok(Histogram {
            edges: (0..=bins).map(|k| k as f64 * width).collect(),
            density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
            counts,
        })
    }

    /// Bin width `2·IQR·n^{−1/3}` over `[0, max]`; Sturges' rule when the
    /// interquartile range vanishes.
    pub fn freedman_diaconis(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("histogram", "no samples"));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let quantile = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let (i, frac) = (pos.floor() as usize, pos.fract());
            v[i] + frac * (v[(i + 1).min(v.len() - 1)] - v[i])
        };
        let upper = v[v.len() - 1].max(f64::MIN_POSITIVE);
        let width = 2.0 * (quantile(0.75) - quantile(0.25)) / (v.len() as f64).cbrt();
        let bins = if width > 0.0 {
            ((upper / width).ceil() as usize).clamp(1, 10_000)
        } else {
            ((v.len() as f64).log2().ceil() as usize + 1).max(1)
        };
        Self::with_bins(values, bins, upper)
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn nonempty_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Mean squared difference between the density and `pdf` at bin centers.
    pub fn residual(&self, pdf: impl Fn(f64) -> f64) -> f64 {
        let centers = self.centers();
        centers
            .iter()
            .zip(&self.density)
            .map(|(&s, &d)| (pdf(s) - d).powi(2))
            .sum::<f64>()
            / centers.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubWignerFit {
    pub params: SubWignerParams,
    /// [`Histogram::residual`] at the fitted parameters.
    pub residual: f64,
}

/// Least-squares fit of `a·s^b·e^{−c·s²}` to a histogram, with `a` fixed by
/// normalization and `(ln b, ln c)` searched by Nelder–Mead from several
/// starting points inside `[−6, 6]²`.
pub fn fit_sub_wigner(h: &Histogram) -> Result<SubWignerFit> {
    if h.nonempty_bins() < 10 {
        return Err(Error::param(
            "histogram",
            format!("{} nonempty bins, need at least 10", h.nonempty_bins()),
        ));
    }
    let cost = |x: &[f64]| {
        if x.iter().any(|v| v.abs() > 6.0) {
            return f64::INFINITY;
        }
        let p = SubWignerParams::normalized(x[0].exp(), x[1].exp());
        h.residual(|s| p.pdf(s))
    };
    let opts = NelderMeadOptions {
        max_evaluations: 4000,
        f_tolerance: 1e-14,
        x_tolerance: 1e-8,
    };
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for start in [[0.0, 0.0], [1.0, 0.5], [-1.0, -0.5], [1.5, 1.5]] {
        let r = nelder_mead(cost, &start, &[0.5, 0.5], &opts);
        if best.as_ref().is_none_or(|b| r.value < b.1) {
            best = Some((r.x, r.value, r.converged));
        }
    }
    let (x, residual, converged) = best.expect("at least one start");
    if !converged || !residual.is_finite() {
        return Err(Error::FitFailed { residual });
    }
    Ok(SubWignerFit {
        params: SubWignerParams::normalized(x[0].exp(), x[1].exp()),
        residual,
    })
}
