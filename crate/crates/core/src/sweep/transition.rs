//! Reading transition points off sampled curves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionCriterion {
    /// One curve crossing the midpoint between its two plateaus.
    HalfCrossing,
    /// Two curves (two system sizes) crossing each other.
    SizeCrossing,
}

pub const MIN_CURVE_POINTS: usize = 5;

fn sorted(curve: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut c = curve.to_vec();
    c.sort_by(|a, b| a.0.total_cmp(&b.0));
    c
}

fn summary(curve: &[(f64, f64)]) -> String {
    let (lo, hi) = curve
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    format!(
        "{} points, x in [{}, {}], y in [{lo:.4}, {hi:.4}]",
        curve.len(),
        curve.first().map_or(f64::NAN, |p| p.0),
        curve.last().map_or(f64::NAN, |p| p.0),
    )
}

/// First sign change of `d` along `xs`, linearly interpolated.
fn first_zero(xs: &[f64], d: &[f64]) -> Option<f64> {
    if let Some(i) = d.iter().position(|&v| v == 0.0) {
        return Some(xs[i]);
    }
    d.windows(2).zip(xs.windows(2)).find_map(|(dv, xv)| {
        (dv[0].signum() != dv[1].signum())
            .then(|| xv[0] + (xv[1] - xv[0]) * dv[0] / (dv[0] - dv[1]))
    })
}

/// `x` where `y` crosses halfway between the means of the outer 20% of
/// points on either side.
pub fn half_crossing(curve: &[(f64, f64)]) -> Result<f64> {
    if curve.len() < MIN_CURVE_POINTS {
        return Err(Error::param(
            "curve",
            format!("{} points, need at least {MIN_CURVE_POINTS}", curve.len()),
        ));
    }
    let c = sorted(curve);
    let k = ((0.2 * c.len() as f64).round() as usize).max(1);
    let left = c[..k].iter().map(|p| p.1).sum::<f64>() / k as f64;
    let right = c[c.len() - k..].iter().map(|p| p.1).sum::<f64>() / k as f64;
    let mid = 0.5 * (left + right);
    let xs: Vec<f64> = c.iter().map(|p| p.0).collect();
    let d: Vec<f64> = c.iter().map(|p| p.1 - mid).collect();
    if left == right {
        return Err(Error::NoCrossing(format!("flat curve: {}", summary(&c))));
    }
    first_zero(&xs, &d).ok_or_else(|| Error::NoCrossing(summary(&c)))
}

fn interpolate(c: &[(f64, f64)], x: f64) -> Option<f64> {
    let i = c.partition_point(|p| p.0 < x);
    if i < c.len() && c[i].0 == x {
        return Some(c[i].1);
    }
    if i == 0 || i == c.len() {
        return None;
    }
    let (a, b) = (c[i - 1], c[i]);
    Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
}

/// First crossing, from the left, of two curves over their common `x` range.
pub fn size_crossing(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    if a.len() < MIN_CURVE_POINTS || b.len() < MIN_CURVE_POINTS {
        return Err(Error::param(
            "curve",
            format!("need at least {MIN_CURVE_POINTS} points per curve"),
        ));
    }
    let (a, b) = (sorted(a), sorted(b));
    let (xs, d): (Vec<f64>, Vec<f64>) = a
        .iter()
        .filter_map(|&(x, y)| interpolate(&b, x).map(|yb| (x, y - yb)))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::NoCrossing("curves do not overlap in x".into()));
    }
    first_zero(&xs, &d).ok_or_else(|| {
        Error::NoCrossing(format!("first: {}; second: {}", summary(&a), summary(&b)))
    })
}

/// Dispatches on `criterion`: one curve for a half crossing, two for a size crossing.
pub fn detect_transition(curves: &[Vec<(f64, f64)>], criterion: TransitionCriterion) -> Result<f64> {
    match (criterion, curves) {
        (TransitionCriterion::HalfCrossing, [c]) => half_crossing(c),
        (TransitionCriterion::SizeCrossing, [a, b]) => size_crossing(a, b),
        (TransitionCriterion::HalfCrossing, _) => {
            Err(Error::param("curves", "half crossing takes exactly one curve"))
        }
        (TransitionCriterion::SizeCrossing, _) => {
            Err(Error::param("curves", "size crossing takes exactly two curves"))
        }
    }
}
