//! Finite-size scaling collapse `x → (x − x_c)·L^{1/ν}`.

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{nelder_mead, NelderMeadOptions};

/// Points on the common scaled support at which the curves are compared.
pub const COLLAPSE_SAMPLES: usize = 64;
const GRID_STEPS: usize = 21;

/// One curve per system size `L`.
pub type SizeCurves = BTreeMap<usize, Vec<(f64, f64)>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseFit {
    pub x_c: f64,
    pub nu: f64,
    pub cost: f64,
    /// `(x_c, ν, cost)` of every evaluated point with a finite cost.
    pub search_trace: Vec<(f64, f64, f64)>,
}

impl CollapseFit {
    /// Trace points whose cost is within `factor` of the minimum.
    pub fn basin(&self, factor: f64) -> impl Iterator<Item = &(f64, f64, f64)> {
        let limit = self.cost * factor;
        self.search_trace.iter().filter(move |p| p.2 <= limit)
    }
}

fn interpolate(c: &[(f64, f64)], x: f64) -> f64 {
    let i = c.partition_point(|p| p.0 < x).clamp(1, c.len() - 1);
    let (a, b) = (c[i - 1], c[i]);
    if b.0 == a.0 {
        return a.1;
    }
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

fn scaled(curves: &SizeCurves, x_c: f64, nu: f64) -> Vec<(usize, Vec<(f64, f64)>)> {
    curves
        .iter()
        .map(|(&l, c)| {
            let factor = (l as f64).powf(1.0 / nu);
            let mut s: Vec<(f64, f64)> = c.iter().map(|&(x, y)| ((x - x_c) * factor, y)).collect();
            s.sort_by(|a, b| a.0.total_cmp(&b.0));
            (l, s)
        })
        .collect()
}

/// Mean squared deviation of each scaled curve from the pointwise mean of
/// all of them, on `COLLAPSE_SAMPLES` points of the overlap of the scaled
/// supports. `nu = ∞` compares the unscaled curves.
pub fn collapse_cost(curves: &SizeCurves, x_c: f64, nu: f64) -> Result<f64> {
    if curves.len() < 2 {
        return Err(Error::Collapse("need at least two system sizes".into()));
    }
    if let Some((l, _)) = curves.iter().find(|(_, c)| c.len() < 2) {
        return Err(Error::Collapse(format!("curve for L = {l} has fewer than two points")));
    }
    let s = scaled(curves, x_c, nu);
    let lo = s.iter().map(|(_, c)| c[0].0).fold(f64::NEG_INFINITY, f64::max);
    let hi = s.iter().map(|(_, c)| c[c.len() - 1].0).fold(f64::INFINITY, f64::min);
    if !(lo < hi) {
        let sizes: Vec<String> = s
            .iter()
            .map(|(l, c)| format!("L={l} [{:.3}, {:.3}]", c[0].0, c[c.len() - 1].0))
            .collect();
        return Err(Error::Collapse(format!(
            "scaled supports do not overlap at x_c = {x_c}, nu = {nu}: {}",
            sizes.join(", ")
        )));
    }
    let mut total = 0.0;
    for k in 0..COLLAPSE_SAMPLES {
        let x = lo + (hi - lo) * k as f64 / (COLLAPSE_SAMPLES - 1) as f64;
        let ys: Vec<f64> = s.iter().map(|(_, c)| interpolate(c, x)).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        total += ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64;
    }
    Ok(total / COLLAPSE_SAMPLES as f64)
}

/// Grid search over the box `x_c_range × nu_range`, then Nelder–Mead from the
/// best grid point confined to the same box. Returns the lowest-cost point
/// ever evaluated.
pub fn scaling_collapse(
    curves: &SizeCurves,
    x_c_range: (f64, f64),
    nu_range: (f64, f64),
) -> Result<CollapseFit> {
    if !(x_c_range.0 <= x_c_range.1 && 0.0 < nu_range.0 && nu_range.0 <= nu_range.1) {
        return Err(Error::param("collapse", "empty search box or non-positive nu"));
    }
    let trace = RefCell::new(Vec::new());
    let first_error = RefCell::new(None);
    let eval = |x_c: f64, nu: f64| match collapse_cost(curves, x_c, nu) {
        Ok(c) => {
            trace.borrow_mut().push((x_c, nu, c));
            c
        }
        Err(e) => {
            first_error.borrow_mut().get_or_insert(e);
            f64::INFINITY
        }
    };
    let at = |range: (f64, f64), k: usize| {
        range.0 + (range.1 - range.0) * k as f64 / (GRID_STEPS - 1) as f64
    };
    for i in 0..GRID_STEPS {
        for j in 0..GRID_STEPS {
            eval(at(x_c_range, i), at(nu_range, j));
        }
    }
    let best = trace.borrow().iter().copied().min_by(|a, b| a.2.total_cmp(&b.2));
    let Some((x0, n0, _)) = best else {
        return Err(first_error
            .into_inner()
            .unwrap_or_else(|| Error::Collapse("no finite cost".into())));
    };

    let inside = |x: &[f64]| {
        (x_c_range.0..=x_c_range.1).contains(&x[0]) && (nu_range.0..=nu_range.1).contains(&x[1])
    };
    let refined = nelder_mead(
        |x| if inside(x) { eval(x[0], x[1]) } else { f64::INFINITY },
        &[x0, n0],
        &[
            (x_c_range.1 - x_c_range.0).max(1e-3) / (GRID_STEPS - 1) as f64,
            (nu_range.1 - nu_range.0).max(1e-3) / (GRID_STEPS - 1) as f64,
        ],
        &NelderMeadOptions {
            max_evaluations: 400,
            f_tolerance: 1e-14,
            x_tolerance: 1e-6,
        },
    );
    log::debug!("collapse refinement converged: {}", refined.converged);
    let trace = trace.into_inner();
    let (x_c, nu, cost) = trace
        .iter()
        .copied()
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("trace is nonempty");
    Ok(CollapseFit {
        x_c,
        nu,
        cost,
        search_trace: trace,
    })
}
