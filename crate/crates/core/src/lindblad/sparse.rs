use num_traits::Zero;

use crate::fock::Operator;
use crate::scalar::{Real, C};

/// Coordinate-list view of an operator, used on the integrator's hot path.
#[derive(Clone, Debug)]
pub(crate) struct SparseOp<T: Real> {
    pub n: usize,
    /// `(row, col, value)` sorted by row.
    pub entries: Vec<(usize, usize, C<T>)>,
}

impl<T: Real> SparseOp<T> {
    pub fn from_dense(op: &Operator<T>) -> Self {
        let n = op.dim();
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = op.get(i, j);
                (!v.is_zero()).then_some((i, j, v))
            })
            .collect();
        Self { n, entries }
    }

    /// `out += s * (A * x)` with `x` dense row-major `n x n`.
    pub fn left_mul_acc(&self, s: C<T>, x: &[C<T>], out: &mut [C<T>]) {
        let n = self.n;
        for &(i, k, v) in &self.entries {
            let f = s * v;
            let src = &x[k * n..(k + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (d, &a) in dst.iter_mut().zip(src) {
                *d += f * a;
            }
        }
    }

    /// `out += s * (x * A^dagger)`.
    pub fn right_mul_dagger_acc(&self, s: C<T>, x: &[C<T>], out: &mut [C<T>]) {
        let n = self.n;
        // (x A^dagger)_{ij} = sum_k x_{ik} conj(A_{jk})
        for &(j, k, v) in &self.entries {
            let f = s * v.conj();
            for i in 0..n {
                out[i * n + j] += f * x[i * n + k];
            }
        }
    }

    /// `tr(A x)`.
    pub fn trace_product(&self, x: &[C<T>]) -> C<T> {
        let n = self.n;
        self.entries.iter().map(|&(i, k, v)| v * x[k * n + i]).sum()
    }
}
