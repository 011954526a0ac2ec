use std::cmp::Ordering;

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, EigVals, SolveH};
use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

/// Relative residual above which a decomposition is flagged as degraded.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Eigenvalues with unit-norm right eigenvectors (as columns), sorted by real
/// part and then imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<c64>,
    pub right_vectors: Array2<c64>,
    /// `max_n ‖H v_n − E_n v_n‖_∞`.
    pub residual: f64,
    /// Set when `residual ≥ RESIDUAL_TOLERANCE · ‖H‖_∞`.
    pub degraded: bool,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, n: usize) -> ndarray::ArrayView1<'_, c64> {
        self.right_vectors.column(n)
    }
}

fn check(h: &Array2<c64>) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::param("H", "matrix is not square"));
    }
    if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::param("H", "matrix has non-finite entries"));
    }
    Ok(())
}

fn lapack_failure(h: &Array2<c64>, e: ndarray_linalg::error::LinalgError) -> Error {
    Error::NoConvergence {
        dim: h.nrows(),
        reason: e.to_string(),
    }
}

pub(crate) fn spectral_order(a: &c64, b: &c64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// `‖H‖_∞`, the maximum absolute row sum.
pub fn inf_norm(h: &Array2<c64>) -> f64 {
    h.rows()
        .into_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Diagonal gauge `D⁻¹ H D` that makes `|a_ij| = |a_ji|` on every bond
/// in the least-squares sense, from a graph-Laplacian solve for `ln D`.
///
/// Open nonreciprocal chains are similar to symmetric matrices only through
/// factors like `e^{g·j}`; the driver's own power-of-two balancing leaves a
/// skew that grows exponentially along the chain and ruins the eigenvalues.
/// Returns `None` when no bond is skewed on balance (periodic rings, Hermitian
/// input), so those matrices reach LAPACK untouched.
fn gauge(h: &Array2<c64>) -> Option<(Array2<c64>, Vec<f64>)> {
    let n = h.nrows();
    let mut lap = Array2::<f64>::zeros((n, n));
    let mut rhs = Array1::<f64>::zeros(n);
    for i in 0..n {
        for j in 0..i {
            let (up, down) = (h[[i, j]].norm(), h[[j, i]].norm());
            if up == 0.0 || down == 0.0 {
                continue;
            }
            let skew = 0.5 * (up / down).ln();
            rhs[i] += skew;
            rhs[j] -= skew;
            lap[[i, j]] -= 1.0;
            lap[[j, i]] -= 1.0;
            lap[[i, i]] += 1.0;
            lap[[j, j]] += 1.0;
        }
    }
    if rhs.iter().all(|b| b.abs() < 1e-12) {
        return None;
    }
    // The regularizer only fixes the free constant of each connected block;
    // any diagonal D is an exact similarity, so its accuracy is immaterial.
    lap.diag_mut().mapv_inplace(|x| x + 1e-9);
    let x = lap.solveh_into(rhs).ok()?;
    let d: Vec<f64> = x.iter().map(|v| v.exp()).collect();
    let b = Array2::from_shape_fn((n, n), |(i, j)| h[[i, j]] * (d[j] / d[i]));
    Some((b, d))
}

/// Full eigendecomposition of a dense nonsymmetric matrix.
///
/// Real input also goes through the complex driver: the real Hessenberg QR
/// of the linked LAPACK returns garbage for large nonreciprocal rings, so
/// real eigenvalues carry round-off imaginary parts of order `ε‖H‖`.
pub fn eig(h: &Array2<c64>) -> Result<Spectrum> {
    check(h)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: vec![],
            right_vectors: Array2::zeros((0, 0)),
            residual: 0.0,
            degraded: false,
        });
    }
    let (vals, vecs): (Array1<c64>, Array2<c64>) = match gauge(h) {
        None => h.eig().map_err(|e| lapack_failure(h, e))?,
        Some((b, d)) => {
            let (vals, mut vecs) = b.eig().map_err(|e| lapack_failure(h, e))?;
            for (mut row, &di) in vecs.rows_mut().into_iter().zip(&d) {
                row.mapv_inplace(|z| z * di);
            }
            (vals, vecs)
        }
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| spectral_order(&vals[a], &vals[b]));
    let eigenvalues: Vec<c64> = order.iter().map(|&i| vals[i]).collect();
    let mut right_vectors = vecs.select(Axis(1), &order);
    for mut col in right_vectors.columns_mut() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.mapv_inplace(|z| z / norm);
        }
    }

    let mut r = h.dot(&right_vectors);
    for (n, mut col) in r.columns_mut().into_iter().enumerate() {
        col.scaled_add(-eigenvalues[n], &right_vectors.column(n));
    }
    let residual = r.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let degraded = !(residual < RESIDUAL_TOLERANCE * inf_norm(h).max(f64::MIN_POSITIVE));
    Ok(Spectrum {
        eigenvalues,
        right_vectors,
        residual,
        degraded,
    })
}

/// Eigenvalues only, in the same sorted order as [`eig`].
pub fn eigenvalues(h: &Array2<c64>) -> Result<Vec<c64>> {
    check(h)?;
    if h.nrows() == 0 {
        return Ok(vec![]);
    }
    let vals: Array1<c64> = match gauge(h) {
        None => h.eigvals(),
        Some((b, _)) => b.eigvals(),
    }
    .map_err(|e| lapack_failure(h, e))?;
    let mut v = vals.to_vec();
    v.sort_by(spectral_order);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr1;

    #[test]
    fn diagonal_matrix() {
        let h = Array2::from_diag(&arr1(&[c64::new(2.0, 1.0), c64::new(1.0, 0.0)]));
        let s = eig(&h).unwrap();
        assert_eq!(s.eigenvalues, vec![c64::new(1.0, 0.0), c64::new(2.0, 1.0)]);
        assert!((s.right_vectors[[1, 0]].norm() - 1.0).abs() < 1e-15);
        assert!((s.right_vectors[[0, 1]].norm() - 1.0).abs() < 1e-15);
        assert!(!s.degraded);
    }

    #[test]
    fn uniform_ring() {
        let mut h = Array2::<c64>::zeros((3, 3));
        for j in 0..3 {
            h[[(j + 1) % 3, j]] = c64::new(1.0, 0.0);
            h[[j, (j + 1) % 3]] = c64::new(1.0, 0.0);
        }
        let e = eigenvalues(&h).unwrap();
        let expect = [-1.0, -1.0, 2.0];
        for (a, b) in e.iter().zip(expect) {
            assert!((a - c64::new(b, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn random_matrix_residual_and_norms() {
        let mut state = 17u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let h = Array2::from_shape_fn((8, 8), |_| c64::new(next(), next()));
        let s = eig(&h).unwrap();
        assert!(s.residual < RESIDUAL_TOLERANCE * inf_norm(&h));
        for c in s.right_vectors.columns() {
            let n: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        // explicit residual recomputation
        for (n, e) in s.eigenvalues.iter().enumerate() {
            let v = s.right_vectors.column(n);
            let r = h.dot(&v) - v.mapv(|z| z * e);
            assert!(r.iter().all(|z| z.norm() <= s.residual + 1e-15));
        }
        let again = eig(&h).unwrap();
        assert_eq!(again.eigenvalues, s.eigenvalues);
    }

    #[test]
    fn large_nonreciprocal_ring_is_accurate() {
        let p = crate::model::ModelParams {
            g: 0.5,
            v1: 3.5,
            ..crate::model::ModelParams::new(610)
        };
        let h = crate::model::build_single_particle(&p).unwrap().matrix;
        let s = eig(&h).unwrap();
        assert!(!s.degraded, "residual {}", s.residual);
        // Localized phase: the periodic spectrum is real.
        assert!(s.eigenvalues.iter().all(|z| z.im.abs() < 1e-10));
        let mut conj: Vec<c64> = s.eigenvalues.iter().map(|z| z.conj()).collect();
        conj.sort_by(spectral_order);
        for (a, b) in conj.iter().zip(&s.eigenvalues) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn open_chain_spectrum_is_gauge_invariant() {
        use crate::model::{build_single_particle, Boundary, ModelParams};
        let at = |g: f64| {
            let p = ModelParams { g, v1: 1.0, v2: 0.5, boundary: Boundary::Open, ..ModelParams::new(100) };
            let h = build_single_particle(&p).unwrap().matrix;
            (eig(&h).unwrap(), eigenvalues(&h).unwrap())
        };
        let ((skewed, values), (plain, _)) = (at(0.5), at(0.0));
        assert!(!skewed.degraded, "residual {}", skewed.residual);
        for ((a, b), c) in skewed.eigenvalues.iter().zip(&plain.eigenvalues).zip(&values) {
            assert!((a - b).norm() < 1e-8 && (a - c).norm() < 1e-8, "{a} {b} {c}");
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut h = Array2::<c64>::eye(3);
        h[[1, 2]] = c64::new(f64::NAN, 0.0);
        assert!(eig(&h).is_err());
        assert!(eigenvalues(&h).is_err());
    }
}
