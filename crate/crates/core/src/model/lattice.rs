use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64 as c64;

use super::params::{Boundary, ModelParams};
use crate::error::Result;
use crate::spectral::det::CyclicTridiagonal;

/// Modulated hopping `t_j = t + V2·cos[2π(j+½)α + θ_h/L + φ]`.
pub fn hopping_amplitude(j: usize, p: &ModelParams) -> f64 {
    let arg = 2.0 * PI * (j as f64 + 0.5) * p.alpha + p.theta_h / p.sites as f64 + p.phi;
    p.t + p.v2 * arg.cos()
}

/// Complex on-site potential `Δ_j = V1·cos(2πjα + θ_h/L + φ + i·h)`.
pub fn onsite_potential(j: usize, p: &ModelParams) -> c64 {
    let arg = 2.0 * PI * j as f64 * p.alpha + p.theta_h / p.sites as f64 + p.phi;
    p.v1 * c64::new(arg, p.h).cos()
}

/// Amplitudes of `c†_{j+1} c_j` and `c†_j c_{j+1}` on bond `j`.
pub fn bond_amplitudes(j: usize, p: &ModelParams) -> (c64, c64) {
    let tj = hopping_amplitude(j, p);
    let twist = p.theta_g / p.sites as f64;
    let forward = tj * c64::new(-p.g, twist).exp();
    let backward = tj * c64::new(p.g, -twist).exp();
    (forward, backward)
}

/// Dense single-particle Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleHamiltonian {
    pub matrix: Array2<c64>,
}

impl SingleParticleHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// The single-particle Hamiltonian in banded form; the seam bond `L−1 → 0`
/// is the corner coupling and is dropped for open boundaries.
pub fn single_particle_ring(p: &ModelParams) -> Result<CyclicTridiagonal> {
    p.validate()?;
    let l = p.sites;
    let diag = (0..l).map(|j| onsite_potential(j, p)).collect();
    let (mut lower, mut upper): (Vec<c64>, Vec<c64>) =
        (0..l).map(|j| bond_amplitudes(j, p)).unzip();
    if p.boundary == Boundary::Open {
        lower[l - 1] = c64::new(0.0, 0.0);
        upper[l - 1] = c64::new(0.0, 0.0);
    }
    Ok(CyclicTridiagonal { diag, lower, upper })
}

pub fn build_single_particle(p: &ModelParams) -> Result<SingleParticleHamiltonian> {
    Ok(SingleParticleHamiltonian {
        matrix: single_particle_ring(p)?.to_dense(),
    })
}
