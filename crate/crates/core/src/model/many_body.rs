use ndarray::Array2;
use num_complex::Complex64 as c64;

use super::fock::FockBasis;
use super::lattice::{bond_amplitudes, onsite_potential};
use super::params::{Boundary, ModelParams};
use crate::error::{Error, Result};

/// Dense many-body Hamiltonian in one fixed-`N` block.
#[derive(Debug, Clone, PartialEq)]
pub struct ManyBodyHamiltonian {
    pub matrix: Array2<c64>,
    pub basis: FockBasis,
}

impl ManyBodyHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Bonds `(j, j+1 mod L)`; the seam bond is included only for periodic
/// boundaries.
pub(crate) fn bonds(p: &ModelParams) -> impl Iterator<Item = (usize, usize)> {
    let l = p.sites;
    let n_bonds = match p.boundary {
        Boundary::Periodic => l,
        Boundary::Open => l - 1,
    };
    (0..n_bonds).map(move |j| (j, (j + 1) % l))
}

/// Diagonal element `Σ_j Δ_j n_j + U Σ_j n_j n_{j+1}` of one occupation word.
pub fn diagonal_energy(word: u32, p: &ModelParams, potential: &[c64]) -> c64 {
    let occ = |j: usize| (word >> j) & 1 == 1;
    let mut e: c64 = (0..p.sites).filter(|&j| occ(j)).map(|j| potential[j]).sum();
    let pairs = bonds(p).filter(|&(j, k)| occ(j) && occ(k)).count();
    e += p.u * pairs as f64;
    e
}

/// Builds `H` in the basis `b`.
///
/// Fermion operators are ordered by ascending site index, so a hop across the
/// periodic seam passes the other `N − 1` particles and picks up
/// `(−1)^{N−1}`; interior hops carry no sign.
pub fn build_many_body(p: &ModelParams, b: &FockBasis) -> Result<ManyBodyHamiltonian> {
    p.validate()?;
    if p.sites != b.sites() || p.particles != Some(b.particles()) {
        return Err(Error::param(
            "N",
            format!(
                "basis (L={}, N={}) does not match params (L={}, N={:?})",
                b.sites(),
                b.particles(),
                p.sites,
                p.particles
            ),
        ));
    }
    let l = p.sites;
    let potential: Vec<c64> = (0..l).map(|j| onsite_potential(j, p)).collect();
    let amplitudes: Vec<(c64, c64)> = (0..l).map(|j| bond_amplitudes(j, p)).collect();
    let seam_sign = if b.particles() % 2 == 1 { 1.0 } else { -1.0 };

    let dim = b.dim();
    let mut m = Array2::<c64>::zeros((dim, dim));
    for (col, &word) in b.states().iter().enumerate() {
        m[[col, col]] = diagonal_energy(word, p, &potential);
        for (j, k) in bonds(p) {
            let occ_j = (word >> j) & 1 == 1;
            let occ_k = (word >> k) & 1 == 1;
            if occ_j == occ_k {
                continue;
            }
            let target = word ^ (1 << j) ^ (1 << k);
            let row = b.index_of(target).expect("hop conserves particle number");
            let sign = if k == 0 { seam_sign } else { 1.0 };
            let (forward, backward) = amplitudes[j];
            // occ_j: c†_k c_j moves j → k; otherwise c†_j c_k moves k → j
            let amp = if occ_j { forward } else { backward };
            m[[row, col]] += amp * sign;
        }
    }
    Ok(ManyBodyHamiltonian { matrix: m, basis: b.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fock::build_fock_basis;
    use crate::model::lattice::build_single_particle;
    use approx::assert_relative_eq;

    fn params(l: usize, n: usize) -> ModelParams {
        ModelParams {
            particles: Some(n),
            ..ModelParams::new(l)
        }
    }

    #[test]
    fn one_particle_sector_is_first_quantized() {
        let p = ModelParams {
            v1: 1.1,
            v2: 0.4,
            g: 0.3,
            h: 0.2,
            theta_g: 0.7,
            phi: 1.9,
            ..params(7, 1)
        };
        let mb = build_many_body(&p, &build_fock_basis(7, 1).unwrap()).unwrap();
        let sp = build_single_particle(&ModelParams { particles: None, ..p }).unwrap();
        assert_eq!(mb.matrix, sp.matrix);
    }

    #[test]
    fn interaction_counts_adjacent_pairs_with_wrap() {
        let p = ModelParams { u: 2.0, ..params(4, 2) };
        let b = build_fock_basis(4, 2).unwrap();
        let h = build_many_body(&p, &b).unwrap().matrix;
        let diag = |w: u32| h[[b.index_of(w).unwrap(), b.index_of(w).unwrap()]].re;
        assert_eq!(diag(0b0011), 2.0);
        assert_eq!(diag(0b1001), 2.0); // n_3 n_0 across the seam
        assert_eq!(diag(0b0101), 0.0);
        assert_eq!(diag(0b1010), 0.0);

        let open = ModelParams { boundary: Boundary::Open, ..p };
        let h = build_many_body(&open, &b).unwrap().matrix;
        let i = b.index_of(0b1001).unwrap();
        assert_eq!(h[[i, i]].re, 0.0);
    }

    #[test]
    fn seam_sign_follows_parity() {
        // N = 2: hopping 0b0011's particle at site 0 back to site 3 crosses the seam.
        let p = params(4, 2);
        let b = build_fock_basis(4, 2).unwrap();
        let h = build_many_body(&p, &b).unwrap().matrix;
        let from = b.index_of(0b0011).unwrap();
        let to = b.index_of(0b1010).unwrap();
        assert_eq!(h[[to, from]], c64::new(-1.0, 0.0));
        let interior = b.index_of(0b0101).unwrap();
        assert_eq!(h[[interior, from]], c64::new(1.0, 0.0));

        let p = params(5, 3);
        let b = build_fock_basis(5, 3).unwrap();
        let h = build_many_body(&p, &b).unwrap().matrix;
        let from = b.index_of(0b00111).unwrap();
        let to = b.index_of(0b10110).unwrap();
        assert_eq!(h[[to, from]], c64::new(1.0, 0.0));
    }

    #[test]
    fn trace_equals_potential_plus_interaction() {
        let p = ModelParams {
            v1: 1.7,
            v2: 0.5,
            h: 0.3,
            u: 2.0,
            g: 0.5,
            phi: 0.9,
            ..params(8, 4)
        };
        let b = build_fock_basis(8, 4).unwrap();
        let h = build_many_body(&p, &b).unwrap().matrix;
        let trace: c64 = h.diag().sum();

        // Every site is occupied in C(L−1, N−1) words and every bond pair in
        // C(L−2, N−2) words.
        let occ = crate::model::fock::binomial(7, 3) as f64;
        let pair = crate::model::fock::binomial(6, 2) as f64;
        let oracle: c64 = (0..8).map(|j| onsite_potential(j, &p)).sum::<c64>() * occ
            + c64::new(p.u * 8.0 * pair, 0.0);
        assert_relative_eq!(trace.re, oracle.re, epsilon = 1e-11);
        assert_relative_eq!(trace.im, oracle.im, epsilon = 1e-11);
    }

    #[test]
    fn mismatched_basis_rejected() {
        let b = build_fock_basis(6, 3).unwrap();
        assert!(build_many_body(&params(6, 2), &b).is_err());
        assert!(build_many_body(&ModelParams::new(6), &b).is_err());
    }

    #[test]
    fn hermitian_limit() {
        let p = ModelParams { v1: 3.0, v2: 0.5, u: 2.0, phi: 0.3, ..params(8, 4) };
        let h = build_many_body(&p, &build_fock_basis(8, 4).unwrap()).unwrap().matrix;
        let dev = h
            .indexed_iter()
            .map(|((i, j), z)| (z - h[[j, i]].conj()).norm())
            .fold(0.0f64, f64::max);
        assert!(dev < 1e-14);
    }
}
