use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

use crate::error::FockError;
use crate::scalar::{cr, Real, C};

/// Dense complex matrix acting on a tensor product of truncated bosonic modes.
///
/// Mode 0 is the leftmost tensor factor and the slowest-varying index of the
/// flattened basis. Storage is row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T: Real> {
    dims: Vec<usize>,
    n: usize,
    data: Vec<C<T>>,
}

pub(crate) fn check_dims(dims: &[usize]) -> Result<usize, FockError> {
    if dims.is_empty() {
        return Err(FockError::InvalidArgument("empty mode list".into()));
    }
    for &d in dims {
        if d < 2 {
            return Err(FockError::InvalidDimension(d));
        }
    }
    Ok(dims.iter().product())
}

/// Per-mode occupation digits of a flattened basis index.
pub fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
    out
}

/// Flattened basis index of per-mode occupations.
pub fn flat_index(occupations: &[usize], dims: &[usize]) -> usize {
    occupations
        .iter()
        .zip(dims)
        .fold(0, |acc, (&n, &d)| acc * d + n)
}

impl<T: Real> Operator<T> {
    pub fn zeros(dims: &[usize]) -> Result<Self, FockError> {
        let n = check_dims(dims)?;
        Ok(Self {
            dims: dims.to_vec(),
            n,
            data: vec![C::zero(); n * n],
        })
    }

    pub fn identity(dims: &[usize]) -> Result<Self, FockError> {
        let mut op = Self::zeros(dims)?;
        for i in 0..op.n {
            op.data[i * op.n + i] = C::one();
        }
        Ok(op)
    }

    pub fn from_fn(
        dims: &[usize],
        mut f: impl FnMut(usize, usize) -> C<T>,
    ) -> Result<Self, FockError> {
        let mut op = Self::zeros(dims)?;
        let n = op.n;
        for i in 0..n {
            for j in 0..n {
                op.data[i * n + j] = f(i, j);
            }
        }
        Ok(op)
    }

    /// Wraps row-major data; fails unless `data.len() == prod(dims)^2`.
    pub fn from_row_major(dims: &[usize], data: Vec<C<T>>) -> Result<Self, FockError> {
        let n = check_dims(dims)?;
        if data.len() != n * n {
            return Err(FockError::InvalidArgument(format!(
                "matrix data has {} entries, expected {}",
                data.len(),
                n * n
            )));
        }
        Ok(Self {
            dims: dims.to_vec(),
            n,
            data,
        })
    }

    /// Diagonal operator with entries `f(i)`.
    pub fn diagonal(dims: &[usize], f: impl Fn(usize) -> C<T>) -> Result<Self, FockError> {
        let mut op = Self::zeros(dims)?;
        for i in 0..op.n {
            op.data[i * op.n + i] = f(i);
        }
        Ok(op)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Side length of the matrix.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[C<T>] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C<T>> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        self.data[i * self.n + j] = v;
    }

    fn same_shape(&self, other: &Self) -> Result<(), FockError> {
        if self.dims != other.dims {
            return Err(FockError::DimensionMismatch {
                expected: self.dims.clone(),
                found: other.dims.clone(),
            });
        }
        Ok(())
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self, FockError> {
        self.same_shape(other)?;
        let n = self.n;
        let mut out = vec![C::zero(); n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, &b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(Self {
            dims: self.dims.clone(),
            n,
            data: out,
        })
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            dims: self.dims.clone(),
            n: self.n,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(cr(s))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let n = self.n;
        let mut data = vec![C::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Self {
            dims: self.dims.clone(),
            n,
            data,
        }
    }

    pub fn trace(&self) -> C<T> {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self, FockError> {
        Ok(&self.try_matmul(other)? - &other.try_matmul(self)?)
    }

    /// `tr(self * rho)`.
    pub fn expect(&self, rho: &Self) -> Result<C<T>, FockError> {
        self.same_shape(rho)?;
        let n = self.n;
        let mut acc = C::zero();
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if !a.is_zero() {
                    acc += a * rho.data[k * n + i];
                }
            }
        }
        Ok(acc)
    }

    /// Matrix-vector product.
    pub fn apply(&self, psi: &[C<T>]) -> Result<Vec<C<T>>, FockError> {
        if psi.len() != self.n {
            return Err(FockError::InvalidArgument(format!(
                "vector length {} does not match operator dimension {}",
                psi.len(),
                self.n
            )));
        }
        Ok((0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(psi)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Largest elementwise `|A - A^dagger|`.
    pub fn hermiticity_residual(&self) -> T {
        let n = self.n;
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|a| a.norm()).fold(T::zero(), T::max)
    }

    /// Kronecker product `self ⊗ other`, dims concatenated.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.n, other.n);
        let nm = n * m;
        let mut data = vec![C::zero(); nm * nm];
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                if a.is_zero() {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        data[(i * m + k) * nm + j * m + l] = a * other.data[k * m + l];
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, n: nm, data }
    }

    /// Smallest eigenvalue of the hermitian part `(A + A^dagger)/2`.
    pub fn min_eigenvalue(&self) -> T {
        let n = self.n;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            let h = (self.get(i, j) + self.get(j, i).conj()) * cr(T::lit(0.5));
            nalgebra::Complex::new(h.re.to_f64_lossy(), h.im.to_f64_lossy())
        });
        let eig = m.symmetric_eigenvalues();
        T::lit(eig.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// Matrix exponential by scaling and squaring of a Taylor series.
    pub fn expm(&self) -> Self {
        let norm1 = (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).norm()).sum::<T>())
            .fold(T::zero(), T::max);
        let mut squarings = 0u32;
        let mut scale = T::one();
        while norm1 * scale > T::lit(0.25) {
            scale *= T::lit(0.5);
            squarings += 1;
        }
        let a = self.scale_real(scale);
        let id = Self::identity(&self.dims).expect("dims already validated");
        let mut result = id.clone();
        let mut term = id;
        for k in 1..=18 {
            term = term
                .try_matmul(&a)
                .expect("same shape")
                .scale_real(T::one() / T::from_usize_lossy(k));
            result = &result + &term;
            if term.max_abs() < T::epsilon() * T::lit(1e-3) {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.try_matmul(&result).expect("same shape");
        }
        result
    }

    /// Operator power `A^k`.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(&self.dims).expect("dims already validated");
        for _ in 0..k {
            out = out.try_matmul(self).expect("same shape");
        }
        out
    }

    /// Returns the matrix with the mode grouping replaced; the total size must match.
    pub fn with_dims(mut self, dims: &[usize]) -> Result<Self, FockError> {
        let n = check_dims(dims)?;
        if n != self.n {
            return Err(FockError::DimensionMismatch {
                expected: self.dims,
                found: dims.to_vec(),
            });
        }
        self.dims = dims.to_vec();
        Ok(self)
    }
}

impl<T: Real> Add for &Operator<T> {
    type Output = Operator<T>;
    fn add(self, rhs: Self) -> Operator<T> {
        assert_eq!(self.dims, rhs.dims, "operator dims differ");
        Operator {
            dims: self.dims.clone(),
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl<T: Real> Sub for &Operator<T> {
    type Output = Operator<T>;
    fn sub(self, rhs: Self) -> Operator<T> {
        assert_eq!(self.dims, rhs.dims, "operator dims differ");
        Operator {
            dims: self.dims.clone(),
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

impl<T: Real> Mul for &Operator<T> {
    type Output = Operator<T>;
    fn mul(self, rhs: Self) -> Operator<T> {
        self.try_matmul(rhs).expect("operator dims differ")
    }
}

/// Bosonic annihilation operator on a single mode truncated to `dim` levels.
pub fn destroy<T: Real>(dim: usize) -> Result<Operator<T>, FockError> {
    let mut op = Operator::zeros(&[dim])?;
    for n in 1..dim {
        op.set(n - 1, n, cr(T::from_usize_lossy(n).sqrt()));
    }
    Ok(op)
}

pub fn create<T: Real>(dim: usize) -> Result<Operator<T>, FockError> {
    Ok(destroy::<T>(dim)?.dagger())
}

/// Photon-number operator `a^dagger a`.
pub fn number<T: Real>(dim: usize) -> Result<Operator<T>, FockError> {
    Operator::diagonal(&[dim], |n| cr(T::from_usize_lossy(n)))
}

pub fn identity<T: Real>(dim: usize) -> Result<Operator<T>, FockError> {
    Operator::identity(&[dim])
}

/// Kronecker product of an ordered list of operators.
pub fn tensor<T: Real>(ops: &[Operator<T>]) -> Result<Operator<T>, FockError> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| FockError::InvalidArgument("tensor of an empty list".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, op| acc.kron(op)))
}

/// Lifts a single-mode operator onto `dims`, acting on `mode`.
pub fn embed<T: Real>(
    op: &Operator<T>,
    mode: usize,
    dims: &[usize],
) -> Result<Operator<T>, FockError> {
    check_dims(dims)?;
    if mode >= dims.len() {
        return Err(FockError::ModeOutOfRange {
            index: mode,
            modes: dims.len(),
        });
    }
    if op.dims() != [dims[mode]] {
        return Err(FockError::DimensionMismatch {
            expected: vec![dims[mode]],
            found: op.dims().to_vec(),
        });
    }
    let left: usize = dims[..mode].iter().product();
    let right: usize = dims[mode + 1..].iter().product();
    let mut out = op.clone();
    if right > 1 {
        out = out.kron(&Operator::identity(&[right]).expect("right > 1"));
    }
    if left > 1 {
        out = Operator::identity(&[left]).expect("left > 1").kron(&out);
    }
    out.with_dims(dims)
}

/// Lifts a two-mode operator (dims `[dims[m0], dims[m1]]`) onto `dims`, acting
/// on the ordered pair `(m0, m1)`.
pub fn embed_pair<T: Real>(
    op: &Operator<T>,
    modes: (usize, usize),
    dims: &[usize],
) -> Result<Operator<T>, FockError> {
    let total = check_dims(dims)?;
    let (m0, m1) = modes;
    for m in [m0, m1] {
        if m >= dims.len() {
            return Err(FockError::ModeOutOfRange {
                index: m,
                modes: dims.len(),
            });
        }
    }
    if m0 == m1 {
        return Err(FockError::InvalidArgument("pair modes must differ".into()));
    }
    let (d0, d1) = (dims[m0], dims[m1]);
    if op.dims() != [d0, d1] {
        return Err(FockError::DimensionMismatch {
            expected: vec![d0, d1],
            found: op.dims().to_vec(),
        });
    }
    let mut out = Operator::zeros(dims)?;
    let pair_n = d0 * d1;
    let nz: Vec<(usize, usize, C<T>)> = (0..pair_n)
        .flat_map(|r| (0..pair_n).map(move |c| (r, c)))
        .filter_map(|(r, c)| {
            let v = op.get(r, c);
            (!v.is_zero()).then_some((r, c, v))
        })
        .collect();
    for base in 0..total {
        let occ = digits(base, dims);
        if occ[m0] != 0 || occ[m1] != 0 {
            continue;
        }
        for &(r, c, v) in &nz {
            let mut ro = occ.clone();
            ro[m0] = r / d1;
            ro[m1] = r % d1;
            let mut co = occ.clone();
            co[m0] = c / d1;
            co[m1] = c % d1;
            out.set(flat_index(&ro, dims), flat_index(&co, dims), v);
        }
    }
    Ok(out)
}

/// `a^dagger^k a^k` on a single mode.
pub fn normal_power<T: Real>(dim: usize, k: u32) -> Result<Operator<T>, FockError> {
    Operator::diagonal(&[dim], |n| {
        let v = (0..k as usize).fold(1.0, |acc, j| acc * (n as f64 - j as f64).max(0.0));
        cr(T::lit(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(dim: usize, n: usize) -> Vec<C<f64>> {
        let mut v = vec![C::zero(); dim];
        v[n] = C::one();
        v
    }

    #[test]
    fn destroy_small_dims() {
        let a2 = destroy::<f64>(2).unwrap();
        assert_eq!(a2.get(0, 1), C::one());
        assert_eq!(a2.get(1, 0), C::zero());
        assert_eq!(a2.get(0, 0), C::zero());
        let a3 = destroy::<f64>(3).unwrap();
        assert_eq!(a3.get(0, 1), C::one());
        assert!((a3.get(1, 2).re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(a3.data().iter().filter(|x| !x.is_zero()).count(), 2);
    }

    #[test]
    fn destroy_lowers_fock_state() {
        let a = destroy::<f64>(8).unwrap();
        let out = a.apply(&basis(8, 5)).unwrap();
        let mut expected = basis(8, 4);
        expected[4] *= 5f64.sqrt();
        for (x, y) in out.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn destroy_rejects_dim_below_two() {
        assert_eq!(destroy::<f64>(1), Err(FockError::InvalidDimension(1)));
        assert_eq!(destroy::<f64>(0), Err(FockError::InvalidDimension(0)));
    }

    #[test]
    fn canonical_commutator_except_corner() {
        for dim in 2..12 {
            let a = destroy::<f64>(dim).unwrap();
            let comm = a.commutator(&a.dagger()).unwrap();
            for n in 0..dim - 1 {
                assert!(
                    (comm.get(n, n) - C::one()).norm() < 1e-12,
                    "dim {dim} n {n}"
                );
            }
        }
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let id = tensor(&[identity::<f64>(2).unwrap(), identity(3).unwrap()]).unwrap();
        assert_eq!(id.dims(), &[2, 3]);
        let id6 = Operator::<f64>::identity(&[6]).unwrap();
        assert_eq!(id.data(), id6.data());
    }

    #[test]
    fn tensor_empty_list_is_error() {
        assert!(matches!(
            tensor::<f64>(&[]),
            Err(FockError::InvalidArgument(_))
        ));
    }

    #[test]
    fn number_tensor_identity_expectation() {
        let dims = [3, 6];
        let op = tensor(&[number::<f64>(3).unwrap(), identity(6).unwrap()]).unwrap();
        let mut psi = vec![C::zero(); 18];
        psi[flat_index(&[2, 5], &dims)] = C::one();
        let out = op.apply(&psi).unwrap();
        let e: C<f64> = psi.iter().zip(&out).map(|(a, b)| a.conj() * b).sum();
        assert!((e.re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn embed_examples() {
        let dims = [3, 3];
        let a0 = embed(&destroy::<f64>(3).unwrap(), 0, &dims).unwrap();
        let mut psi = vec![C::zero(); 9];
        psi[flat_index(&[1, 0], &dims)] = C::one();
        let out = a0.apply(&psi).unwrap();
        assert!((out[flat_index(&[0, 0], &dims)] - C::one()).norm() < 1e-15);

        let n1 = embed(&number::<f64>(3).unwrap(), 1, &dims).unwrap();
        let mut psi = vec![C::zero(); 9];
        psi[flat_index(&[0, 2], &dims)] = C::one();
        let e = n1.apply(&psi).unwrap()[flat_index(&[0, 2], &dims)];
        assert!((e.re - 2.0).abs() < 1e-15);

        assert!(matches!(
            embed(&destroy::<f64>(3).unwrap(), 2, &dims),
            Err(FockError::ModeOutOfRange { .. })
        ));
    }

    #[test]
    fn embedded_operators_on_distinct_modes_commute() {
        let dims = [3, 4];
        let a = embed(&destroy::<f64>(3).unwrap(), 0, &dims).unwrap();
        let b = embed(&create::<f64>(4).unwrap(), 1, &dims).unwrap();
        assert!(a.commutator(&b).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn embed_pair_matches_kron_in_order() {
        let a = destroy::<f64>(3).unwrap();
        let b = number::<f64>(4).unwrap();
        let pair = a.kron(&b);
        let dims = [3, 2, 4];
        let direct = tensor(&[a.clone(), identity(2).unwrap(), b.clone()]).unwrap();
        let via = embed_pair(&pair, (0, 2), &dims).unwrap();
        assert!(direct.max_abs_diff(&via) < 1e-15);
        let swapped = embed_pair(&b.kron(&a), (2, 0), &dims).unwrap();
        assert!(direct.max_abs_diff(&swapped) < 1e-15);
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(theta (a^dagger b - a b^dagger)) restricted to one photon is a rotation.
        let x = Operator::<f64>::from_fn(&[2], |i, j| match (i, j) {
            (0, 1) => cr(-0.3),
            (1, 0) => cr(0.3),
            _ => C::zero(),
        })
        .unwrap();
        let u = x.expm();
        assert!((u.get(0, 0).re - 0.3f64.cos()).abs() < 1e-14);
        assert!((u.get(1, 0).re - 0.3f64.sin()).abs() < 1e-14);
    }

    #[test]
    fn min_eigenvalue_of_projector() {
        let p = Operator::<f64>::diagonal(&[3], |i| cr(if i == 0 { 1.0 } else { 0.0 })).unwrap();
        assert!(p.min_eigenvalue().abs() < 1e-14);
        let m = p.scale_real(-2.0);
        assert!((m.min_eigenvalue() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let a = destroy::<f32>(4).unwrap();
        let comm = a.commutator(&a.dagger()).unwrap();
        assert!((comm.get(2, 2).re - 1.0).abs() < 1e-6);
    }
}
