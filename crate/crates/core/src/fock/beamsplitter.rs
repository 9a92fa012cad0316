use num_traits::Zero;

use super::operator::{embed_pair, Operator};
use super::state::QuantumState;
use crate::error::FockError;
use crate::scalar::{cr, Real, C};

/// Result of a beamsplitter transformation on a truncated state.
#[derive(Clone, Debug)]
pub struct BeamsplitterOutput<T: Real> {
    pub state: QuantumState<T>,
    /// Probability that left the truncated space (photons pushed above `dim - 1`).
    pub leaked: T,
}

impl<T: Real> BeamsplitterOutput<T> {
    pub fn has_leakage(&self, tol: T) -> bool {
        self.leaked > tol
    }
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp()
}

/// Two-mode beamsplitter map on `[dim, dim]`.
///
/// Output modes are `b1 = cos(theta) a1 + sin(theta) a2` and
/// `b2 = -sin(theta) a1 + cos(theta) a2`, so `theta = pi/4` sends the
/// symmetric superposition to port 1 and the antisymmetric one to port 2.
/// Blocks with total photon number `N <= dim - 1` are exactly unitary; higher
/// blocks lose the components that do not fit.
pub fn beamsplitter_matrix<T: Real>(dim: usize, theta: T) -> Result<Operator<T>, FockError> {
    let dims = [dim, dim];
    let mut u = Operator::zeros(&dims)?;
    let (s, c) = theta.to_f64_lossy().sin_cos();
    for n1 in 0..dim {
        for n2 in 0..dim {
            let total = n1 + n2;
            let mut amp = vec![0.0f64; total + 1];
            // (c x - s y)^n1 (s x + c y)^n2, x = b1^dagger, y = b2^dagger
            for j in 0..=n1 {
                let a = binomial(n1, j) * c.powi(j as i32) * (-s).powi((n1 - j) as i32);
                for k in 0..=n2 {
                    let b = binomial(n2, k) * s.powi(k as i32) * c.powi((n2 - k) as i32);
                    amp[j + k] += a * b;
                }
            }
            let norm_in = 0.5 * (ln_factorial(n1) + ln_factorial(n2));
            for (m, &a) in amp.iter().enumerate() {
                let m2 = total - m;
                if m >= dim || m2 >= dim || a == 0.0 {
                    continue;
                }
                let v = a * (0.5 * (ln_factorial(m) + ln_factorial(m2)) - norm_in).exp();
                u.set(m * dim + m2, n1 * dim + n2, cr(T::lit(v)));
            }
        }
    }
    Ok(u)
}

/// Applies a beamsplitter with mixing angle `theta` to the ordered mode pair.
pub fn beamsplitter_map<T: Real>(
    state: &QuantumState<T>,
    modes: (usize, usize),
    theta: T,
) -> Result<BeamsplitterOutput<T>, FockError> {
    let dims = state.dims();
    for m in [modes.0, modes.1] {
        if m >= dims.len() {
            return Err(FockError::ModeOutOfRange {
                index: m,
                modes: dims.len(),
            });
        }
    }
    if dims[modes.0] != dims[modes.1] {
        return Err(FockError::InvalidArgument(format!(
            "beamsplitter modes have unequal dims {} and {}",
            dims[modes.0], dims[modes.1]
        )));
    }
    let pair = beamsplitter_matrix(dims[modes.0], theta)?;
    let u = if dims.len() == 2 && modes == (0, 1) {
        pair
    } else {
        embed_pair(&pair, modes, dims)?
    };
    let before = state.trace();
    let out = state.transform(&u)?;
    let leaked = (before - out.trace()).max(T::zero());
    Ok(BeamsplitterOutput { state: out, leaked })
}

/// 50/50 beamsplitter (`theta = pi/4`).
pub fn balanced_beamsplitter<T: Real>(
    state: &QuantumState<T>,
    modes: (usize, usize),
) -> Result<BeamsplitterOutput<T>, FockError> {
    beamsplitter_map(state, modes, T::FRAC_PI_4())
}

#[allow(dead_code)]
fn is_block_unitary<T: Real>(u: &Operator<T>, dim: usize) -> bool {
    let ud = u.dagger();
    let p = ud.try_matmul(u).expect("same dims");
    for i in 0..dim * dim {
        for j in 0..dim * dim {
            let (ni, nj) = (i / dim + i % dim, j / dim + j % dim);
            if ni >= dim || nj >= dim {
                continue;
            }
            let expect = if i == j { C::from(T::one()) } else { C::zero() };
            if (p.get(i, j) - expect).norm() > T::lit(1e-10) {
                return false;
            }
        }
    }
    true
}
