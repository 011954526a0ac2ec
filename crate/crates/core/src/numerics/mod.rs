//! Small numerical helpers: quadrature and derivative-free minimization.

pub mod nelder_mead;
pub mod quad;

pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use quad::{integrate, integrate_to_infinity};
