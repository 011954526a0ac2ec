use crate::error::{Error, Result};

/// Largest lattice the dense many-body path accepts.
pub const MAX_FOCK_SITES: usize = 24;

/// Default memory budget for one dense `D×D` complex matrix (1 GiB).
pub const DEFAULT_DENSE_BUDGET: u128 = 1 << 30;

/// Fixed-particle-number occupation basis.
///
/// Bit `j` of a word is the occupation of site `j`. Words are stored in
/// ascending numeric order, so the ordinal of a word is found by binary search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    sites: usize,
    particles: usize,
    states: Vec<u32>,
}

impl FockBasis {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn index_of(&self, word: u32) -> Option<usize> {
        self.states.binary_search(&word).ok()
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

pub fn build_fock_basis(sites: usize, particles: usize) -> Result<FockBasis> {
    build_fock_basis_with_budget(sites, particles, DEFAULT_DENSE_BUDGET)
}

/// Enumerates all `N`-particle words on `L` sites, refusing bases whose dense
/// complex Hamiltonian (`16·D²` bytes) would exceed `budget`.
pub fn build_fock_basis_with_budget(
    sites: usize,
    particles: usize,
    budget: u128,
) -> Result<FockBasis> {
    if sites > MAX_FOCK_SITES {
        return Err(Error::param(
            "L",
            format!("{sites} sites exceeds the dense many-body cap of {MAX_FOCK_SITES}"),
        ));
    }
    if particles > sites {
        return Err(Error::param(
            "N",
            format!("{particles} particles do not fit on {sites} sites"),
        ));
    }
    let dim = binomial(sites, particles);
    let bytes = 16 * dim * dim;
    if bytes > budget {
        return Err(Error::OverBudget {
            dim: dim as usize,
            bytes,
            budget,
        });
    }

    let mut states = Vec::with_capacity(dim as usize);
    if particles == 0 {
        states.push(0);
    } else {
        // Gosper's hack: next larger word with the same popcount.
        let limit = 1u64 << sites;
        let mut w: u64 = (1u64 << particles) - 1;
        while w < limit {
            states.push(w as u32);
            let c = w & w.wrapping_neg();
            let r = w + c;
            w = (((r ^ w) >> 2) / c) | r;
        }
    }
    debug_assert_eq!(states.len() as u128, dim);
    Ok(FockBasis {
        sites,
        particles,
        states,
    })
}
