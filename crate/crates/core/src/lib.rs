//! Numerical toolkit for the non-Hermitian generalized Aubry–André–Harper
//! chain
//!
//! `H = Σ_j [t_j e^{−g+iθ_g/L} c†_{j+1}c_j + t_j e^{g−iθ_g/L} c†_j c_{j+1} + Δ_j n_j + U n_j n_{j+1}]`
//!
//! with `t_j = t + V2 cos(2π(j+½)α + θ_h/L + φ)` and
//! `Δ_j = V1 cos(2πjα + θ_h/L + φ + ih)`.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`] builds single-particle and fixed-`N` many-body matrices.
//! - [`spectral`] diagonalizes them and computes determinant winding numbers.
//! - [`observables`] turns spectra into fractal dimensions, entanglement
//!   entropies and level-spacing statistics.
//! - [`sweep`] runs cached, φ-averaged parameter grids and extracts
//!   transition points and scaling collapses.
//!
//! ```
//! use nhaah::model::{build_single_particle, ModelParams};
//! use nhaah::spectral::{complex_fraction, eig, DEFAULT_IMAG_CUTOFF};
//!
//! let p = ModelParams { v1: 1.0, g: 0.5, ..ModelParams::new(89) };
//! let s = eig(&build_single_particle(&p)?.matrix)?;
//! // Below the localization threshold almost every level is complex.
//! assert!(complex_fraction(&s.eigenvalues, DEFAULT_IMAG_CUTOFF) > 0.9);
//! # Ok::<(), nhaah::Error>(())
//! ```

pub mod error;
pub mod model;
pub mod numerics;
pub mod observables;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{ModelParams, Boundary};
pub use spectral::{Spectrum, WindingAxis, WindingResult};
pub use sweep::{run_sweep, ResultTable, SweepSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/localization.md")]
    mod localization {}
    #[doc = include_str!("../../../book/src/level_statistics.md")]
    mod level_statistics {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
