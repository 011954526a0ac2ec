//! Determinants in log-polar form.
//!
//! `det(H − E_B)` for `D` in the thousands over- or underflows `f64` long
//! before it becomes numerically meaningless, so every routine here returns
//! `ln|det|` and `arg det` separately.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

/// `det = exp(log_abs + i·arg)` with `arg ∈ (−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub arg: f64,
}

impl LogDet {
    pub fn to_complex(self) -> c64 {
        c64::from_polar(self.log_abs.exp(), self.arg)
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y == -PI {
        PI
    } else {
        y
    }
}

/// `ln|det(H − E_B)|` and `arg det(H − E_B)` from an LU factorization with
/// partial pivoting.
///
/// Fails with [`Error::Singular`] when a pivot vanishes relative to the
/// matrix scale; callers should move `E_B` off the spectrum.
pub fn log_det_phase(h: &Array2<c64>, e_b: c64) -> Result<LogDet> {
    let n = h.nrows();
    if n != h.ncols() {
        return Err(Error::param("H", "matrix is not square"));
    }
    if n == 0 {
        return Ok(LogDet {
            log_abs: 0.0,
            arg: 0.0,
        });
    }
    let mut a = h.as_standard_layout().into_owned();
    for i in 0..n {
        a[[i, i]] -= e_b;
    }
    let scale = a.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let tiny = scale * f64::EPSILON * n as f64;
    let data = a.as_slice_mut().expect("standard layout");

    let mut log_abs = 0.0;
    let mut arg = 0.0;
    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|r| (r, data[r * n + k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmag <= tiny || pmag == 0.0 {
            return Err(Error::Singular { e_b });
        }
        if p != k {
            for c in 0..n {
                data.swap(k * n + c, p * n + c);
            }
            arg += PI;
        }
        let pivot = data[k * n + k];
        log_abs += pmag.ln();
        arg += pivot.arg();
        let inv = 1.0 / pivot;
        let (upper, lower) = data.split_at_mut((k + 1) * n);
        let pivot_row = &upper[k * n + k + 1..k * n + n];
        for row in lower.chunks_exact_mut(n) {
            let f = row[k] * inv;
            if f == c64::new(0.0, 0.0) {
                continue;
            }
            row[k] = f;
            for (x, &u) in row[k + 1..].iter_mut().zip(pivot_row) {
                *x -= f * u;
            }
        }
    }
    Ok(LogDet {
        log_abs,
        arg: wrap_angle(arg),
    })
}

/// Tridiagonal matrix with optional corner couplings.
///
/// `lower[j]` is entry `(j+1 mod n, j)` and `upper[j]` is entry
/// `(j, j+1 mod n)`; the last element of each is the corner (zero for an open
/// chain).
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub diag: Vec<c64>,
    pub lower: Vec<c64>,
    pub upper: Vec<c64>,
}

impl CyclicTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Array2<c64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for j in 0..n {
            m[[j, j]] += self.diag[j];
            let k = (j + 1) % n;
            if k != j {
                m[[k, j]] += self.lower[j];
                m[[j, k]] += self.upper[j];
            }
        }
        m
    }

    /// `det(M − E_B)` in O(n) from continuants plus the two winding-cycle
    /// terms. Requires `n ≥ 3`.
    pub fn log_det_shifted(&self, e_b: c64) -> Result<LogDet> {
        let n = self.dim();
        if n < 3 {
            return log_det_phase(&self.to_dense(), e_b);
        }
        let d: Vec<c64> = self.diag.iter().map(|&x| x - e_b).collect();
        let couple: Vec<c64> = (0..n - 1).map(|j| self.upper[j] * self.lower[j]).collect();

        let mut terms = vec![continuant(&d, &couple)];
        let beta = self.lower[n - 1];
        let gamma = self.upper[n - 1];
        let bg = beta * gamma;
        if bg != c64::new(0.0, 0.0) {
            let inner = continuant(&d[1..n - 1], &couple[1..n - 2]);
            terms.push(inner.times(-bg));
        }
        let cycle_sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        if beta != c64::new(0.0, 0.0) {
            terms.push(LogTerm::product(self.lower[..n - 1].iter().copied()).times(beta * cycle_sign));
        }
        if gamma != c64::new(0.0, 0.0) {
            terms.push(LogTerm::product(self.upper[..n - 1].iter().copied()).times(gamma * cycle_sign));
        }
        LogTerm::sum(&terms).ok_or(Error::Singular { e_b })
    }
}

/// `value = mantissa · e^{log_scale}`; `mantissa == 0` encodes zero.
#[derive(Debug, Clone, Copy)]
struct LogTerm {
    mantissa: c64,
    log_scale: f64,
}

impl LogTerm {
    fn times(self, z: c64) -> LogTerm {
        LogTerm {
            mantissa: self.mantissa * z,
            log_scale: self.log_scale,
        }
        .renormalized()
    }

    fn renormalized(self) -> LogTerm {
        let m = self.mantissa.norm();
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        LogTerm {
            mantissa: self.mantissa / m,
            log_scale: self.log_scale + m.ln(),
        }
    }

    fn product(factors: impl Iterator<Item = c64>) -> LogTerm {
        let mut log_scale = 0.0;
        let mut phase = c64::new(1.0, 0.0);
        for f in factors {
            let m = f.norm();
            if m == 0.0 {
                return LogTerm {
                    mantissa: c64::new(0.0, 0.0),
                    log_scale: 0.0,
                };
            }
            log_scale += m.ln();
            phase *= f / m;
        }
        LogTerm {
            mantissa: phase / phase.norm(),
            log_scale,
        }
    }

    fn sum(terms: &[LogTerm]) -> Option<LogDet> {
        let live: Vec<&LogTerm> = terms.iter().filter(|t| t.mantissa.norm() > 0.0).collect();
        let top = live.iter().map(|t| t.log_scale).fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return None;
        }
        let s: c64 = live
            .iter()
            .map(|t| t.mantissa * (t.log_scale - top).exp())
            .sum();
        if s.norm() == 0.0 {
            return None;
        }
        Some(LogDet {
            log_abs: top + s.norm().ln(),
            arg: s.arg(),
        })
    }
}

/// Determinant of the open tridiagonal block with diagonal `d` and
/// off-diagonal products `couple[j] = upper[j]·lower[j]`.
fn continuant(d: &[c64], couple: &[c64]) -> LogTerm {
    let mut prev = c64::new(0.0, 0.0);
    let mut cur = c64::new(1.0, 0.0);
    let mut log_scale = 0.0;
    for (k, &dk) in d.iter().enumerate() {
        let next = if k == 0 {
            dk * cur
        } else {
            dk * cur - couple[k - 1] * prev
        };
        prev = cur;
        cur = next;
        let s = cur.norm().max(prev.norm());
        if s > 1e100 || (s < 1e-100 && s > 0.0) {
            cur /= s;
            prev /= s;
            log_scale += s.ln();
        }
    }
    LogTerm {
        mantissa: cur,
        log_scale,
    }
    .renormalized()
}
