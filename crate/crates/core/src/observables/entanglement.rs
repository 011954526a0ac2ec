use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1};
use ndarray_linalg::SVD;
use num_complex::Complex64 as c64;

use super::localization::select_center_complex;
use crate::error::{Error, Result};
use crate::model::FockBasis;
use crate::spectral::Spectrum;

/// Schmidt structure of a fixed-`N` basis cut into sites `[0, cut)` and
/// `[cut, L)`. Each left-particle-number sector is a dense coefficient block.
#[derive(Debug, Clone)]
pub struct Bipartition {
    cut: usize,
    dim: usize,
    sectors: Vec<Sector>,
}

#[derive(Debug, Clone)]
struct Sector {
    rows: usize,
    cols: usize,
    /// (basis index, row, col)
    entries: Vec<(usize, usize, usize)>,
}

impl Bipartition {
    pub fn new(basis: &FockBasis, cut: usize) -> Result<Self> {
        if cut == 0 || cut >= basis.sites() {
            return Err(Error::param(
                "cut",
                format!("{cut} is outside (0, {})", basis.sites()),
            ));
        }
        let mask = (1u32 << cut) - 1;
        let mut by_count: BTreeMap<u32, (BTreeMap<u32, usize>, BTreeMap<u32, usize>, Vec<(usize, u32, u32)>)> =
            BTreeMap::new();
        for (i, &w) in basis.states().iter().enumerate() {
            let (left, right) = (w & mask, w >> cut);
            let sector = by_count.entry(left.count_ones()).or_default();
            let n_left = sector.0.len();
            sector.0.entry(left).or_insert(n_left);
            let n_right = sector.1.len();
            sector.1.entry(right).or_insert(n_right);
            sector.2.push((i, left, right));
        }
        let sectors = by_count
            .into_values()
            .map(|(lefts, rights, words)| Sector {
                rows: lefts.len(),
                cols: rights.len(),
                entries: words
                    .into_iter()
                    .map(|(i, l, r)| (i, lefts[&l], rights[&r]))
                    .collect(),
            })
            .collect();
        Ok(Bipartition {
            cut,
            dim: basis.dim(),
            sectors,
        })
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    /// Squared Schmidt values across all sectors, summing to one.
    pub fn schmidt_weights(&self, state: ArrayView1<'_, c64>) -> Result<Vec<f64>> {
        if state.len() != self.dim {
            return Err(Error::param("state", "length does not match the basis"));
        }
        let mut weights = Vec::new();
        for s in &self.sectors {
            let mut m = Array2::<c64>::zeros((s.rows, s.cols));
            for &(i, r, c) in &s.entries {
                m[[r, c]] = state[i];
            }
            let (_, sv, _) = m.svd(false, false).map_err(|e| Error::NoConvergence {
                dim: s.rows.max(s.cols),
                reason: e.to_string(),
            })?;
            weights.extend(sv.iter().map(|x| x * x));
        }
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            return Err(Error::param("state", "zero vector"));
        }
        Ok(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn entropy(&self, state: ArrayView1<'_, c64>) -> Result<f64> {
        Ok(von_neumann(&self.schmidt_weights(state)?))
    }
}

/// `−Σ p ln p` with `0·ln 0 = 0`.
pub fn von_neumann(weights: &[f64]) -> f64 {
    weights
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Half-chain (or any cut) von Neumann entropy of a many-body state.
pub fn entanglement_entropy(
    state: ArrayView1<'_, c64>,
    basis: &FockBasis,
    cut: usize,
) -> Result<f64> {
    Bipartition::new(basis, cut)?.entropy(state)
}

/// Mean half-chain entropy per site, `S/L`, over the `D·fraction` states
/// nearest the spectral centroid.
pub fn averaged_ee(s: &Spectrum, basis: &FockBasis, fraction: f64) -> Result<f64> {
    let bip = Bipartition::new(basis, basis.sites() / 2)?;
    let chosen = select_center_complex(&s.eigenvalues, fraction);
    let total = chosen
        .iter()
        .map(|&n| bip.entropy(s.vector(n)))
        .sum::<Result<f64>>()?;
    Ok(total / chosen.len() as f64 / basis.sites() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_fock_basis;
    use ndarray::Array1;
    use ndarray_linalg::{Eigh, UPLO};

    fn random_state(dim: usize, seed: u64) -> Array1<c64> {
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let v = Array1::from_shape_fn(dim, |_| c64::new(next(), next()));
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v / c64::new(n, 0.0)
    }

    /// Explicit reduced density matrix on the block `keep` (bit mask of
    /// sites), eigendecomposed.
    fn dense_entropy(state: &Array1<c64>, basis: &FockBasis, keep: u32) -> f64 {
        let l = basis.sites();
        let kept: Vec<usize> = (0..l).filter(|j| keep >> j & 1 == 1).collect();
        let traced: Vec<usize> = (0..l).filter(|j| keep >> j & 1 == 0).collect();
        let compress = |w: u32, sites: &[usize]| {
            sites
                .iter()
                .enumerate()
                .fold(0usize, |acc, (b, &j)| acc | (((w >> j) & 1) as usize) << b)
        };
        let dk = 1 << kept.len();
        let mut rho = Array2::<c64>::zeros((dk, dk));
        for (i, &wi) in basis.states().iter().enumerate() {
            for (j, &wj) in basis.states().iter().enumerate() {
                if compress(wi, &traced) == compress(wj, &traced) {
                    rho[[compress(wi, &kept), compress(wj, &kept)]] += state[i] * state[j].conj();
                }
            }
        }
        let (ev, _) = rho.eigh(UPLO::Lower).unwrap();
        von_neumann(&ev.iter().map(|&x| x.max(0.0)).collect::<Vec<_>>())
    }

    #[test]
    fn product_state_has_zero_entropy() {
        let b = build_fock_basis(6, 3).unwrap();
        let mut v = Array1::<c64>::zeros(b.dim());
        v[b.index_of(0b010101).unwrap()] = c64::new(1.0, 0.0);
        assert_eq!(entanglement_entropy(v.view(), &b, 3).unwrap(), 0.0);
    }

    #[test]
    fn bell_like_pair_gives_ln2() {
        let b = build_fock_basis(4, 2).unwrap();
        let mut v = Array1::<c64>::zeros(b.dim());
        let amp = c64::new(0.5f64.sqrt(), 0.0);
        // |10⟩_left|01⟩_right and |01⟩_left|10⟩_right, left = sites 0,1
        v[b.index_of(0b1001).unwrap()] = amp;
        v[b.index_of(0b0110).unwrap()] = -amp;
        let s = entanglement_entropy(v.view(), &b, 2).unwrap();
        assert!((s - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn bad_cut_rejected() {
        let b = build_fock_basis(4, 2).unwrap();
        let v = Array1::<c64>::from_elem(6, c64::new(1.0, 0.0));
        assert!(entanglement_entropy(v.view(), &b, 0).is_err());
        assert!(entanglement_entropy(v.view(), &b, 4).is_err());
    }

    #[test]
    fn matches_dense_density_matrix() {
        let b = build_fock_basis(6, 3).unwrap();
        for seed in 0..4 {
            let v = random_state(b.dim(), seed);
            let s = entanglement_entropy(v.view(), &b, 3).unwrap();
            let left = dense_entropy(&v, &b, 0b000111);
            let right = dense_entropy(&v, &b, 0b111000);
            assert!((s - left).abs() < 1e-10, "{s} vs {left}");
            assert!((left - right).abs() < 1e-10);
        }
    }

    #[test]
    fn uneven_cut_matches_dense() {
        let b = build_fock_basis(7, 3).unwrap();
        let v = random_state(b.dim(), 11);
        let s = entanglement_entropy(v.view(), &b, 2).unwrap();
        assert!((s - dense_entropy(&v, &b, 0b0000011)).abs() < 1e-10);
    }
}
