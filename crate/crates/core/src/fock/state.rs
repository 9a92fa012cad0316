use num_traits::{One, Zero};

use super::operator::{check_dims, digits, flat_index, Operator};
use crate::error::FockError;
use crate::scalar::{cr, Real, C};

/// Pure vector or density matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum StateRepr<T: Real> {
    Pure(Vec<C<T>>),
    Mixed(Operator<T>),
}

/// Quantum state over a tensor product of truncated modes.
///
/// `leakage` records probability dropped by truncation when the state was
/// built (for example the Poisson tail of a coherent state) before
/// renormalisation.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState<T: Real> {
    dims: Vec<usize>,
    repr: StateRepr<T>,
    leakage: T,
}

fn trace_tol<T: Real>(n: usize) -> T {
    T::lit(1e-9).max(T::epsilon() * T::from_usize_lossy(n) * T::lit(100.0))
}

fn herm_tol<T: Real>(n: usize) -> T {
    T::lit(1e-12).max(T::epsilon() * T::from_usize_lossy(n) * T::lit(10.0))
}

impl<T: Real> QuantumState<T> {
    /// Normalised pure state; the norm must be 1 within 1e-9.
    pub fn pure(dims: &[usize], psi: Vec<C<T>>) -> Result<Self, FockError> {
        let n = check_dims(dims)?;
        if psi.len() != n {
            return Err(FockError::InvalidState(format!(
                "vector length {} does not match dims {:?}",
                psi.len(),
                dims
            )));
        }
        let norm: T = psi.iter().map(|c| c.norm_sqr()).sum();
        if (norm - T::one()).abs() > trace_tol(n) {
            return Err(FockError::InvalidState(format!(
                "norm {norm} differs from 1"
            )));
        }
        Ok(Self {
            dims: dims.to_vec(),
            repr: StateRepr::Pure(psi),
            leakage: T::zero(),
        })
    }

    /// Density matrix with unit trace and hermiticity checked.
    pub fn mixed(rho: Operator<T>) -> Result<Self, FockError> {
        let n = rho.dim();
        let tr = rho.trace();
        if (tr.re - T::one()).abs() > trace_tol(n) || tr.im.abs() > trace_tol(n) {
            return Err(FockError::InvalidState(format!(
                "trace {tr} differs from 1"
            )));
        }
        let h = rho.hermiticity_residual();
        if h > herm_tol(n) {
            return Err(FockError::InvalidState(format!(
                "hermiticity residual {h:e}"
            )));
        }
        Ok(Self {
            dims: rho.dims().to_vec(),
            repr: StateRepr::Mixed(rho),
            leakage: T::zero(),
        })
    }

    /// Wraps a density matrix produced by a trusted computation (integrator,
    /// partial trace) without re-validating it.
    pub fn from_density_unchecked(rho: Operator<T>) -> Self {
        Self {
            dims: rho.dims().to_vec(),
            repr: StateRepr::Mixed(rho),
            leakage: T::zero(),
        }
    }

    pub fn with_leakage(mut self, leakage: T) -> Self {
        self.leakage = leakage;
        self
    }

    /// Fock basis state `|n_0, n_1, ...>`.
    pub fn fock(dims: &[usize], occupations: &[usize]) -> Result<Self, FockError> {
        let n = check_dims(dims)?;
        if occupations.len() != dims.len() || occupations.iter().zip(dims).any(|(&k, &d)| k >= d) {
            return Err(FockError::InvalidArgument(format!(
                "occupations {occupations:?} do not fit dims {dims:?}"
            )));
        }
        let mut psi = vec![C::zero(); n];
        psi[flat_index(occupations, dims)] = C::one();
        Self::pure(dims, psi)
    }

    pub fn vacuum(dims: &[usize]) -> Result<Self, FockError> {
        Self::fock(dims, &vec![0; dims.len()])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn repr(&self) -> &StateRepr<T> {
        &self.repr
    }

    pub fn leakage(&self) -> T {
        self.leakage
    }

    /// Density matrix `rho` (outer product for pure states).
    pub fn density(&self) -> Operator<T> {
        match &self.repr {
            StateRepr::Mixed(rho) => rho.clone(),
            StateRepr::Pure(psi) => Operator::from_fn(&self.dims, |i, j| psi[i] * psi[j].conj())
                .expect("dims validated"),
        }
    }

    pub fn trace(&self) -> T {
        match &self.repr {
            StateRepr::Mixed(rho) => rho.trace().re,
            StateRepr::Pure(psi) => psi.iter().map(|c| c.norm_sqr()).sum(),
        }
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> T {
        match &self.repr {
            StateRepr::Pure(psi) => {
                let n: T = psi.iter().map(|c| c.norm_sqr()).sum();
                n * n
            }
            StateRepr::Mixed(rho) => rho.data().iter().map(|c| c.norm_sqr()).sum(),
        }
    }

    pub fn hermiticity_residual(&self) -> T {
        match &self.repr {
            StateRepr::Pure(_) => T::zero(),
            StateRepr::Mixed(rho) => rho.hermiticity_residual(),
        }
    }

    /// Smallest eigenvalue of the density matrix (checked on demand).
    pub fn min_eigenvalue(&self) -> T {
        match &self.repr {
            StateRepr::Pure(_) => T::zero(),
            StateRepr::Mixed(rho) => rho.min_eigenvalue(),
        }
    }

    /// `<op>` (real part for hermitian operators).
    pub fn expect(&self, op: &Operator<T>) -> Result<C<T>, FockError> {
        if op.dims() != self.dims.as_slice() {
            return Err(FockError::DimensionMismatch {
                expected: self.dims.clone(),
                found: op.dims().to_vec(),
            });
        }
        match &self.repr {
            StateRepr::Mixed(rho) => op.expect(rho),
            StateRepr::Pure(psi) => {
                let out = op.apply(psi)?;
                Ok(psi.iter().zip(&out).map(|(a, b)| a.conj() * b).sum())
            }
        }
    }

    /// Probability of each flattened basis state (the density diagonal).
    pub fn populations(&self) -> Vec<T> {
        match &self.repr {
            StateRepr::Pure(psi) => psi.iter().map(|c| c.norm_sqr()).collect(),
            StateRepr::Mixed(rho) => (0..rho.dim()).map(|i| rho.get(i, i).re).collect(),
        }
    }

    /// Tensor product in the given mode order.
    pub fn tensor(states: &[QuantumState<T>]) -> Result<Self, FockError> {
        let (first, rest) = states
            .split_first()
            .ok_or_else(|| FockError::InvalidArgument("tensor of an empty list".into()))?;
        let mut acc = first.clone();
        for s in rest {
            let mut dims = acc.dims.clone();
            dims.extend_from_slice(&s.dims);
            let leakage = T::one() - (T::one() - acc.leakage) * (T::one() - s.leakage);
            let repr = match (&acc.repr, &s.repr) {
                (StateRepr::Pure(a), StateRepr::Pure(b)) => StateRepr::Pure(
                    a.iter()
                        .flat_map(|&x| b.iter().map(move |&y| x * y))
                        .collect(),
                ),
                _ => StateRepr::Mixed(acc.density().kron(&s.density())),
            };
            acc = Self {
                dims,
                repr,
                leakage,
            };
        }
        Ok(acc)
    }

    /// Reduced state over the modes in `keep` (sorted ascending in the output).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self, FockError> {
        if keep.is_empty() {
            return Err(FockError::InvalidArgument(
                "partial trace needs at least one kept mode".into(),
            ));
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        if keep.windows(2).any(|w| w[0] == w[1]) {
            return Err(FockError::InvalidArgument(
                "duplicate mode in keep list".into(),
            ));
        }
        if let Some(&bad) = keep.iter().find(|&&k| k >= self.dims.len()) {
            return Err(FockError::ModeOutOfRange {
                index: bad,
                modes: self.dims.len(),
            });
        }
        let traced: Vec<usize> = (0..self.dims.len()).filter(|m| !keep.contains(m)).collect();
        let kdims: Vec<usize> = keep.iter().map(|&m| self.dims[m]).collect();
        let tdims: Vec<usize> = traced.iter().map(|&m| self.dims[m]).collect();
        let nk: usize = kdims.iter().product();
        let nt: usize = tdims.iter().product();
        // full[k][t]
        let mut full = vec![0usize; nk * nt];
        for k in 0..nk {
            let kd = digits(k, &kdims);
            for t in 0..nt {
                let td = if tdims.is_empty() {
                    vec![]
                } else {
                    digits(t, &tdims)
                };
                let mut occ = vec![0; self.dims.len()];
                for (i, &m) in keep.iter().enumerate() {
                    occ[m] = kd[i];
                }
                for (i, &m) in traced.iter().enumerate() {
                    occ[m] = td[i];
                }
                full[k * nt + t] = flat_index(&occ, &self.dims);
            }
        }
        let mut out = Operator::zeros(&kdims)?;
        match &self.repr {
            StateRepr::Pure(psi) => {
                for r in 0..nk {
                    for c in 0..nk {
                        let v: C<T> = (0..nt)
                            .map(|t| psi[full[r * nt + t]] * psi[full[c * nt + t]].conj())
                            .sum();
                        out.set(r, c, v);
                    }
                }
            }
            StateRepr::Mixed(rho) => {
                for r in 0..nk {
                    for c in 0..nk {
                        let v: C<T> = (0..nt)
                            .map(|t| rho.get(full[r * nt + t], full[c * nt + t]))
                            .sum();
                        out.set(r, c, v);
                    }
                }
            }
        }
        Ok(Self {
            dims: kdims,
            repr: StateRepr::Mixed(out),
            leakage: self.leakage,
        })
    }

    /// Applies `U rho U^dagger`; `U` need not be unitary (truncated maps).
    pub fn transform(&self, u: &Operator<T>) -> Result<Self, FockError> {
        if u.dims() != self.dims.as_slice() {
            return Err(FockError::DimensionMismatch {
                expected: self.dims.clone(),
                found: u.dims().to_vec(),
            });
        }
        let repr = match &self.repr {
            StateRepr::Pure(psi) => StateRepr::Pure(u.apply(psi)?),
            StateRepr::Mixed(rho) => StateRepr::Mixed(u.try_matmul(rho)?.try_matmul(&u.dagger())?),
        };
        Ok(Self {
            dims: self.dims.clone(),
            repr,
            leakage: self.leakage,
        })
    }

    /// Mixture `w*self + (1-w)*other`.
    pub fn mix(&self, other: &Self, w: T) -> Result<Self, FockError> {
        if self.dims != other.dims {
            return Err(FockError::DimensionMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        let rho = &self.density().scale_real(w) + &other.density().scale_real(T::one() - w);
        Ok(Self::from_density_unchecked(rho))
    }
}

/// Coherent state `|alpha>` truncated to `dim` levels and renormalised.
///
/// Requires `|alpha|^2 <= dim/4`; the pre-renormalisation tail weight is kept
/// as the state's leakage.
pub fn coherent_state<T: Real>(alpha: C<T>, dim: usize) -> Result<QuantumState<T>, FockError> {
    check_dims(&[dim])?;
    let alpha_sq = alpha.norm_sqr();
    let limit = T::from_usize_lossy(dim) / T::lit(4.0);
    if alpha_sq > limit {
        let required = (4.0 * alpha_sq.to_f64_lossy()).ceil().max(2.0) as usize;
        return Err(FockError::TruncationTooSmall {
            alpha_sq: alpha_sq.to_f64_lossy(),
            dim,
            required,
        });
    }
    let mut psi = Vec::with_capacity(dim);
    let mut c = cr((-alpha_sq / T::lit(2.0)).exp());
    psi.push(c);
    for n in 1..dim {
        c = c * alpha / cr(T::from_usize_lossy(n).sqrt());
        psi.push(c);
    }
    let kept: T = psi.iter().map(|x| x.norm_sqr()).sum();
    let leakage = (T::one() - kept).max(T::zero());
    let norm = kept.sqrt();
    for x in &mut psi {
        *x /= cr(norm);
    }
    Ok(QuantumState::pure(&[dim], psi)?.with_leakage(leakage))
}
