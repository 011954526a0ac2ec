//! Analytic nearest-spacing laws and Kolmogorov–Smirnov distances.
//!
//! All laws here have unit mean spacing, so they compare directly with
//! [`SpacingSample::normalized`](super::SpacingSample).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::spacing::SpacingSample;
use crate::error::{Error, Result};
use crate::numerics::integrate;

pub const DEFAULT_GINIBRE_TRUNCATION: usize = 300;
pub const MIN_GINIBRE_TRUNCATION: usize = 50;

/// Unscaled Ginibre spacing density truncated at `n_trunc`:
///
/// `p(s) = ∏_{n<N} Q_n(s²) · Σ_{n<N} 2s·π_n(s²)/Q_n(s²)`
///
/// where `π_n(x) = xⁿe^{−x}/n!` and `Q_n(x) = Σ_{m≤n} π_m(x)`, i.e.
/// `e_n(x)e^{−x}` with `e_n` the truncated exponential series. The product
/// is accumulated as a sum of logarithms.
pub fn ginibre_p(s: f64, n_trunc: usize) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let x = s * s;
    let mut pmf = (-x).exp();
    let mut cdf = pmf;
    let mut log_prod = 0.0;
    let mut sum = 0.0;
    for n in 1..n_trunc {
        pmf *= x / n as f64;
        cdf += pmf;
        log_prod += cdf.ln();
        sum += 2.0 * s * pmf / cdf;
    }
    log_prod.exp() * sum
}

/// Mean spacing `c = ∫ s p(s) ds` of the unscaled density.
pub fn ginibre_c(n_trunc: usize) -> f64 {
    if n_trunc == DEFAULT_GINIBRE_TRUNCATION {
        static C: OnceLock<f64> = OnceLock::new();
        return *C.get_or_init(|| mean_of(|s| ginibre_p(s, DEFAULT_GINIBRE_TRUNCATION)));
    }
    mean_of(|s| ginibre_p(s, n_trunc))
}

fn mean_of(p: impl Fn(f64) -> f64) -> f64 {
    // the density is below 1e-30 past s = 8
    integrate(&|s| s * p(s), 0.0, 8.0, 1e-13)
}

/// Rescaled Ginibre density `P(s) = c·p(c·s)`, normalized to unit mean.
pub fn ginibre_pdf(s: f64, n_trunc: usize) -> f64 {
    let c = ginibre_c(n_trunc);
    c * ginibre_p(c * s, n_trunc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    GinibreComplex,
    PoissonReal,
    PoissonComplex,
    SubWigner,
}

impl ReferenceKind {
    pub const ALL: [ReferenceKind; 4] = [
        ReferenceKind::GinibreComplex,
        ReferenceKind::PoissonReal,
        ReferenceKind::PoissonComplex,
        ReferenceKind::SubWigner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::GinibreComplex => "ginibre_complex",
            ReferenceKind::PoissonReal => "poisson_real",
            ReferenceKind::PoissonComplex => "poisson_complex",
            ReferenceKind::SubWigner => "sub_wigner",
        }
    }
}

impl fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ReferenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReferenceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::param("kind", format!("unknown reference distribution {s:?}")))
    }
}

/// `a·s^b·e^{−c·s²}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubWignerParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SubWignerParams {
    /// The `a` that makes the density integrate to one.
    pub fn normalized(b: f64, c: f64) -> Self {
        let e = 0.5 * (b + 1.0);
        let a = (2f64.ln() + e * c.ln() - ln_gamma(e)).exp();
        SubWignerParams { a, b, c }
    }

    pub fn pdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return if self.b == 0.0 { self.a } else { 0.0 };
        }
        self.a * s.powf(self.b) * (-self.c * s * s).exp()
    }
}

/// Pointwise density of a reference law. Ginibre uses the default truncation.
pub fn reference_pdf(kind: ReferenceKind, s: f64, sub_wigner: Option<SubWignerParams>) -> Result<f64> {
    Ok(match kind {
        ReferenceKind::GinibreComplex => ginibre_pdf(s, DEFAULT_GINIBRE_TRUNCATION),
        ReferenceKind::PoissonReal => poisson_real(s),
        ReferenceKind::PoissonComplex => poisson_complex(s),
        ReferenceKind::SubWigner => sub_wigner
            .ok_or_else(|| Error::param("sub_wigner", "parameters (a, b, c) are required"))?
            .pdf(s),
    })
}

fn poisson_real(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        (-s).exp()
    }
}

fn poisson_complex(s: f64) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        0.5 * PI * s * (-0.25 * PI * s * s).exp()
    }
}

const CDF_STEP: f64 = 1e-3;

/// A reference law with its CDF tabulated once on construction.
#[derive(Debug, Clone)]
pub struct ReferenceDistribution {
    pub kind: ReferenceKind,
    pub sub_wigner: Option<SubWignerParams>,
    pub n_trunc: usize,
    ginibre_scale: f64,
    cdf_table: Vec<f64>,
}

impl ReferenceDistribution {
    pub fn new(kind: ReferenceKind, sub_wigner: Option<SubWignerParams>, n_trunc: usize) -> Result<Self> {
        if kind == ReferenceKind::SubWigner {
            match sub_wigner {
                Some(p) if p.b > -1.0 && p.c > 0.0 && p.a > 0.0 => {}
                Some(_) => return Err(Error::param("sub_wigner", "need a > 0, b > -1, c > 0")),
                None => return Err(Error::param("sub_wigner", "parameters (a, b, c) are required")),
            }
        }
        if kind == ReferenceKind::GinibreComplex && n_trunc < MIN_GINIBRE_TRUNCATION {
            return Err(Error::param(
                "n_trunc",
                format!("{n_trunc} is below {MIN_GINIBRE_TRUNCATION}"),
            ));
        }
        let mut r = ReferenceDistribution {
            kind,
            sub_wigner,
            n_trunc,
            ginibre_scale: if kind == ReferenceKind::GinibreComplex {
                ginibre_c(n_trunc)
            } else {
                1.0
            },
            cdf_table: Vec::new(),
        };
        r.cdf_table = r.tabulate();
        Ok(r)
    }

    pub fn ginibre() -> Self {
        Self::new(ReferenceKind::GinibreComplex, None, DEFAULT_GINIBRE_TRUNCATION)
            .expect("default truncation is valid")
    }

    pub fn poisson_real() -> Self {
        Self::new(ReferenceKind::PoissonReal, None, 0).expect("no parameters")
    }

    pub fn poisson_complex() -> Self {
        Self::new(ReferenceKind::PoissonComplex, None, 0).expect("no parameters")
    }

    pub fn sub_wigner(p: SubWignerParams) -> Result<Self> {
        Self::new(ReferenceKind::SubWigner, Some(p), 0)
    }

    pub fn pdf(&self, s: f64) -> f64 {
        match self.kind {
            ReferenceKind::GinibreComplex => {
                self.ginibre_scale * ginibre_p(self.ginibre_scale * s, self.n_trunc)
            }
            ReferenceKind::PoissonReal => poisson_real(s),
            ReferenceKind::PoissonComplex => poisson_complex(s),
            ReferenceKind::SubWigner => self.sub_wigner.expect("checked on construction").pdf(s),
        }
    }

    /// Cumulative Simpson panels of width `CDF_STEP` until the remaining
    /// mass is negligible.
    fn tabulate(&self) -> Vec<f64> {
        let mut table = vec![0.0];
        let mut total = 0.0;
        let mut f_lo = self.pdf(0.0);
        let mut s = 0.0;
        loop {
            let f_mid = self.pdf(s + 0.5 * CDF_STEP);
            let f_hi = self.pdf(s + CDF_STEP);
            let panel = CDF_STEP / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
            total += panel;
            table.push(total);
            s += CDF_STEP;
            f_lo = f_hi;
            let tail_done = s > 2.0 && (1.0 - total).abs() < 1e-12 || s > 2.0 && panel < 1e-18;
            if tail_done || s > 200.0 {
                break;
            }
        }
        table
    }

    /// Tabulated CDF, linearly interpolated; one past the table.
    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let pos = s / CDF_STEP;
        let i = pos.floor() as usize;
        if i + 1 >= self.cdf_table.len() {
            return 1.0;
        }
        let frac = pos - i as f64;
        self.cdf_table[i] + frac * (self.cdf_table[i + 1] - self.cdf_table[i])
    }
}

/// Kolmogorov–Smirnov statistic between the unit-mean spacings of `sample`
/// and the reference CDF.
pub fn distribution_distance(sample: &SpacingSample, reference: &ReferenceDistribution) -> f64 {
    ks_statistic(&sample.normalized, |s| reference.cdf(s))
}

/// `sup |F_n − F|` for an empirical sample against a CDF.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
