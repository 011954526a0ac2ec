//! The generalized AAH chain: parameter record, single-particle and
//! fixed-particle-number many-body Hamiltonians.

pub mod fock;
pub mod lattice;
pub mod many_body;
pub mod params;

pub use fock::{build_fock_basis, build_fock_basis_with_budget, FockBasis};
pub use lattice::{
    build_single_particle, hopping_amplitude, onsite_potential, single_particle_ring,
    SingleParticleHamiltonian,
};
pub use many_body::{build_many_body, ManyBodyHamiltonian};
pub use params::{with_phase_shift, Boundary, ModelParams, GOLDEN_ALPHA};

use ndarray::Array2;
use num_complex::Complex64 as c64;

use crate::error::Result;

/// Dense Hamiltonian for `p`: many-body when `N` is set, single-particle otherwise.
pub fn build_hamiltonian(p: &ModelParams) -> Result<Array2<c64>> {
    match p.particles {
        Some(n) => {
            let basis = build_fock_basis(p.sites, n)?;
            Ok(build_many_body(p, &basis)?.matrix)
        }
        None => Ok(build_single_particle(p)?.matrix),
    }
}
