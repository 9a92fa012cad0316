use std::collections::BTreeMap;

use super::operator::digits;
use super::state::QuantumState;
use crate::scalar::Real;

/// Joint and marginal photon-number distributions of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonStatistics<T: Real> {
    pub dims: Vec<usize>,
    /// Joint probability keyed by per-mode occupation.
    pub joint: BTreeMap<Vec<usize>, T>,
    /// `marginals[mode][n]` = probability of `n` photons in `mode`.
    pub marginals: Vec<Vec<T>>,
    /// Probability missing from the truncated space (`1 - sum`, plus any
    /// leakage recorded on the state).
    pub leakage: T,
}

impl<T: Real> PhotonStatistics<T> {
    pub fn probability(&self, occupations: &[usize]) -> T {
        self.joint.get(occupations).copied().unwrap_or_else(T::zero)
    }

    pub fn marginal(&self, mode: usize, n: usize) -> T {
        self.marginals
            .get(mode)
            .and_then(|m| m.get(n))
            .copied()
            .unwrap_or_else(T::zero)
    }

    pub fn mean(&self, mode: usize) -> T {
        self.marginals[mode]
            .iter()
            .enumerate()
            .map(|(n, &p)| T::from_usize_lossy(n) * p)
            .sum()
    }

    pub fn total(&self) -> T {
        self.joint.values().copied().sum()
    }
}

/// Number-basis populations `P(n_0, n_1, ...) = <n|rho|n>`.
pub fn photon_statistics<T: Real>(state: &QuantumState<T>) -> PhotonStatistics<T> {
    let dims = state.dims().to_vec();
    let pops = state.populations();
    let mut joint = BTreeMap::new();
    let mut marginals: Vec<Vec<T>> = dims.iter().map(|&d| vec![T::zero(); d]).collect();
    for (i, &p) in pops.iter().enumerate() {
        let occ = digits(i, &dims);
        for (m, &n) in occ.iter().enumerate() {
            marginals[m][n] += p;
        }
        joint.insert(occ, p);
    }
    let total: T = pops.iter().copied().sum();
    let leakage = (T::one() - total).max(T::zero()) + state.leakage();
    PhotonStatistics {
        dims,
        joint,
        marginals,
        leakage,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::state::coherent_state;
    use num_complex::Complex;

    #[test]
    fn vacuum_statistics() {
        let s = QuantumState::<f64>::vacuum(&[5]).unwrap();
        let st = photon_statistics(&s);
        assert_eq!(st.probability(&[0]), 1.0);
        assert_eq!(st.leakage, 0.0);
    }

    #[test]
    fn coherent_two_photon() {
        let s = coherent_state::<f64>(Complex::new(1.0, 0.0), 20).unwrap();
        let st = photon_statistics(&s);
        let expected = (-1f64).exp() / 2.0;
        assert!((st.marginal(0, 2) - expected).abs() < 1e-12);
        assert!((st.marginal(0, 2) - 0.1839).abs() < 1e-4);
    }

    #[test]
    fn two_mode_fock() {
        let s = QuantumState::<f64>::fock(&[3, 3], &[1, 1]).unwrap();
        let st = photon_statistics(&s);
        assert_eq!(st.probability(&[1, 1]), 1.0);
        assert_eq!(st.marginal(0, 1), 1.0);
        assert_eq!(st.marginal(1, 1), 1.0);
        assert!((st.total() - 1.0).abs() < 1e-15);
    }
}
