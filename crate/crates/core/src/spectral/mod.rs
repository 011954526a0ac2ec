//! Dense nonsymmetric eigendecomposition, determinant phases and spectral
//! winding numbers.

pub mod det;
pub mod eig;
pub mod export;
pub mod winding;

pub use det::{log_det_phase, CyclicTridiagonal, LogDet};
pub use eig::{eig, eigenvalues, Spectrum};
pub use winding::{
    det_trajectory, scan_base_energies, select_base_energies, winding_number, BaseEnergyOptions,
    BaseEnergyScan, ModelFamily, ThetaFamily, WindingAxis, WindingResult,
};

use num_complex::Complex64 as c64;

/// Cutoff on `|Im E|` below which an eigenvalue counts as real.
pub const DEFAULT_IMAG_CUTOFF: f64 = 1e-13;

/// Fraction of eigenvalues with `|Im E| > cutoff`.
pub fn complex_fraction(eigenvalues: &[c64], cutoff: f64) -> f64 {
    if eigenvalues.is_empty() {
        return 0.0;
    }
    let complex = eigenvalues.iter().filter(|e| e.im.abs() > cutoff).count();
    complex as f64 / eigenvalues.len() as f64
}

/// Largest `|Im E|` in the spectrum.
pub fn max_imag(eigenvalues: &[c64]) -> f64 {
    eigenvalues.iter().fold(0.0, |m, e| m.max(e.im.abs()))
}
