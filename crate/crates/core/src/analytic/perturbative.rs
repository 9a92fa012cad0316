//! Second-order Heisenberg-picture perturbation theory for the collective
//! photon numbers.
//!
//! With `P = a+^dag^2 a-^2` and `Q_x = a_x^dag^2 a_x^2`, the second-order parts
//! of the number operators are
//!
//! ```text
//! n+^(2) = f1+ Q+ + f2+ Q- + f3+ Q+ n- + f4+ n+ Q-
//! n-^(2) = f1- Q- + f2- Q+ + f3- Q- n+ + f4- n- Q+
//! ```
//!
//! Each coefficient solves `f' = -R f + c e^{-(Gamma+2gamma)t} phi(rho, t)` with
//! `phi(r, t) = (e^{rt} - 1)/r`, so in closed form
//! `f = c e^{-Rt} psi(b + rho, b, t)` where `b = R - Gamma - 2gamma` and
//! `psi(x, y, t) = (phi(x, t) - phi(y, t)) / (x - y)`. That form has no poles
//! and backs up the expanded expressions whenever one of their denominators
//! vanishes.

use super::PairGenParams;
use crate::scalar::{decay_diff, expm1_over, Real};

/// Which collective mode's number operator the coefficients belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Symmetric (pumped) mode.
    Plus,
    /// Antisymmetric (pair) mode.
    Minus,
}

/// `f1..f4` of one branch at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondOrderCoefficients<T: Real> {
    pub f1: T,
    pub f2: T,
    pub f3: T,
    pub f4: T,
}

impl<T: Real> SecondOrderCoefficients<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.f1, self.f2, self.f3, self.f4]
    }
}

/// `<n+(t)>` through second order on a coherent pump with the pair mode in vacuum.
pub fn n_plus_perturbative<T: Real>(t: T, p: &PairGenParams<T>) -> T {
    let (g, big) = (p.gamma, p.big_gamma);
    let gp = big + g;
    let zeroth = p.alpha0_sq * (-gp * t).exp();
    if gp == T::zero() {
        return zeroth;
    }
    // e^{-2Gp t}(gamma + Gamma e^{Gp t} - Gp e^{Gamma t})/(Gamma gamma)
    //   = D(Gp, Gamma + 2gamma) - D(Gamma + 2gamma, 2Gp)
    let mid = big + T::lit(2.0) * g;
    let shape = decay_diff(gp, mid, t) - decay_diff(mid, T::lit(2.0) * gp, t);
    zeroth - p.pair_strength() / (T::lit(2.0) * gp) * shape
}

/// `<n-(t)>` through second order on a coherent pump with the pair mode in vacuum.
pub fn n_minus_perturbative<T: Real>(t: T, p: &PairGenParams<T>) -> T {
    let (g, big) = (p.gamma, p.big_gamma);
    let k = p.pair_strength();
    if g == T::zero() {
        // (U^2|alpha|^4 / 4 Gamma^2)(1 - e^{-Gamma t})^2, finite at Gamma = 0
        let sat = t * expm1_over(-big * t);
        return T::lit(0.25) * k * sat * sat;
    }
    // e^{-2Gp t}(eta Gamma + gamma zeta)/(Gamma Gp) = D(gamma, Gamma+2gamma) - D(Gamma+2gamma, 2Gp)
    let mid = big + T::lit(2.0) * g;
    let shape = decay_diff(g, mid, t) - decay_diff(mid, T::lit(2.0) * (big + g), t);
    k / (T::lit(2.0) * (T::lit(2.0) * big + g)) * shape
}

/// `f1..f4` of the chosen branch at time `t`.
///
/// The expanded closed forms are used where they are well conditioned; when
/// a denominator falls below `1e-9` of the rate scale, or an intermediate
/// exponential would overflow, the pole-free integral form is used instead.
pub fn second_order_coefficients<T: Real>(t: T, p: &PairGenParams<T>, branch: Branch) -> SecondOrderCoefficients<T> {
    expanded(t, p, branch).unwrap_or_else(|| integral_form(t, p, branch))
}

fn rates<T: Real>(p: &PairGenParams<T>, branch: Branch) -> (T, T, T) {
    let gp = p.big_gamma + p.gamma;
    let gm = p.gamma;
    match branch {
        // (sign, Gamma_mirror, Gamma_same)
        Branch::Plus => (T::one(), gm, gp),
        Branch::Minus => (-T::one(), gp, gm),
    }
}

pub(crate) fn expanded<T: Real>(t: T, p: &PairGenParams<T>, branch: Branch) -> Option<SecondOrderCoefficients<T>> {
    let (g, big) = (p.gamma, p.big_gamma);
    let (s, gmir, gsame) = rates(p, branch);
    let two = T::lit(2.0);
    let scale = big + g;
    let mid = big + two * g;
    let den1 = s * big + gmir;
    let den2 = T::lit(3.0) * gmir - two * g - big;
    let tiny = T::lit(1e-9) * scale;
    if !(scale > T::zero())
        || [big, gmir, den1, den2, g, mid].iter().any(|d| d.abs() < tiny)
        || T::lit(2.0) * mid * t > T::lit(600.0)
    {
        return None;
    }
    let u2 = p.u * p.u;
    let env = (-mid * t).exp();
    let e_mir = (gmir * t).exp();
    let e_sbig = (s * big * t).exp();
    let f1 = s * u2 * env / (two * big * gmir * den1)
        * (gmir * (T::one() - (-s * big * t).exp()) + s * big * (T::one() - e_mir));
    let f2 = -s * u2 * env / (two * big * gmir * den2)
        * (mid * (T::one() - e_mir) + gmir * (two * e_mir + e_sbig - T::lit(3.0)));
    let f3 = -u2 * (-(two * gsame + gmir) * t).exp() / (g * scale * mid)
        * (gmir + gsame * (mid * t).exp() - mid * (gsame * t).exp());
    let f4 = u2 * (-(two * gmir + gsame) * t).exp() / (two * gmir * gmir) * (e_mir - T::one()).powi(2);
    Some(SecondOrderCoefficients { f1, f2, f3, f4 })
}

pub(crate) fn integral_form<T: Real>(t: T, p: &PairGenParams<T>, branch: Branch) -> SecondOrderCoefficients<T> {
    let (g, big) = (p.gamma, p.big_gamma);
    let (_, gmir, gsame) = rates(p, branch);
    let u2 = p.u * p.u;
    let half = T::lit(0.5);
    let mid = big + T::lit(2.0) * g;
    let f = |coef: T, r: T| coef * weighted_psi(r - mid, gmir, r, t);
    let (r1, r2) = (T::lit(2.0) * gsame, T::lit(2.0) * gmir);
    let (r3, r4) = (T::lit(2.0) * gsame + gmir, T::lit(2.0) * gmir + gsame);
    SecondOrderCoefficients {
        f1: f(-half * u2, r1),
        f2: f(half * u2, r2),
        f3: f(-u2, r3),
        f4: f(u2, r4),
    }
}

/// `e^{-Rt} psi(b + rho, b, t)`.
fn weighted_psi<T: Real>(b: T, rho: T, r: T, t: T) -> T {
    if (rho * t).abs() > T::lit(1e-3) {
        (weighted_phi(b + rho, r, t) - weighted_phi(b, r, t)) / rho
    } else {
        // psi = sum_k rho^{k-1}/k! t^{k+1} J_k(bt)
        let mut sum = T::zero();
        let mut fact = T::one();
        for k in 1..=4 {
            fact *= T::from_usize_lossy(k);
            sum += rho.powi(k as i32 - 1) / fact * t.powi(k as i32 + 1) * weighted_j(k, b * t, r * t);
        }
        sum
    }
}

/// `e^{-Rt} (e^{bt} - 1)/b`.
fn weighted_phi<T: Real>(b: T, r: T, t: T) -> T {
    decay_diff(r - b, r, t)
}

/// `e^{-y} J_k(x)` with `J_k(x) = int_0^1 s^k e^{xs} ds`.
fn weighted_j<T: Real>(k: usize, x: T, y: T) -> T {
    let w = (-y).exp();
    if x.abs() <= T::lit(4.0) {
        // sum_m x^m / (m! (k + m + 1))
        let mut term = T::one();
        let mut sum = T::zero();
        for m in 0..60 {
            sum += term / T::from_usize_lossy(k + m + 1);
            term = term * x / T::from_usize_lossy(m + 1);
            if term.abs() < T::epsilon() * sum.abs() * T::lit(1e-2) {
                break;
            }
        }
        w * sum
    } else {
        let ex = (x - y).exp();
        let mut j = (ex - w) / x;
        for i in 1..=k {
            j = (ex - T::from_usize_lossy(i) * j) / x;
        }
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{p2_lossless, p2_with_loss, p1_with_loss, pump_photon_number};
    use proptest::prelude::*;

    /// The coefficient ODEs, integrated with fixed-step RK4 alongside the
    /// first-order amplitude. The first-order term is `(iU/2) a(t) (P^dag - P)`
    /// (sign flipped for the minus branch) with `a' = e^{-G_same t} - (Gamma + 2gamma) a`.
    fn ode_oracle(t_end: f64, p: &PairGenParams<f64>, branch: Branch) -> [f64; 4] {
        let (g, big, u) = (p.gamma, p.big_gamma, p.u);
        let (gp, gm) = (big + g, g);
        let (gsame, gmir) = match branch {
            Branch::Plus => (gp, gm),
            Branch::Minus => (gm, gp),
        };
        let mid = big + 2.0 * g;
        let rates = [2.0 * gsame, 2.0 * gmir, 2.0 * gsame + gmir, 2.0 * gmir + gsame];
        let coefs = [-0.5 * u, 0.5 * u, -u, u];
        let rhs = |t: f64, y: &[f64; 5]| -> [f64; 5] {
            let da = (-gsame * t).exp() - mid * y[0];
            let src = u * y[0];
            [
                da,
                -rates[0] * y[1] + coefs[0] * src,
                -rates[1] * y[2] + coefs[1] * src,
                -rates[2] * y[3] + coefs[2] * src,
                -rates[3] * y[4] + coefs[3] * src,
            ]
        };
        let steps = 20_000;
        let h = t_end / steps as f64;
        let mut y = [0.0; 5];
        for i in 0..steps {
            let t = i as f64 * h;
            let add = |a: &[f64; 5], k: &[f64; 5], s: f64| -> [f64; 5] { std::array::from_fn(|j| a[j] + s * k[j]) };
            let k1 = rhs(t, &y);
            let k2 = rhs(t + h / 2.0, &add(&y, &k1, h / 2.0));
            let k3 = rhs(t + h / 2.0, &add(&y, &k2, h / 2.0));
            let k4 = rhs(t + h, &add(&y, &k3, h));
            y = std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        }
        [y[1], y[2], y[3], y[4]]
    }

    fn close(a: f64, b: f64, rel: f64, floor: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()) + floor
    }

    #[test]
    fn coefficients_vanish_at_zero() {
        let p = PairGenParams::<f64>::new(0.3, 1.0, 20.0, 2.0).unwrap();
        for b in [Branch::Plus, Branch::Minus] {
            let e = expanded(0.0, &p, b).unwrap();
            let s = integral_form(0.0, &p, b);
            for v in e.as_array().into_iter().chain(s.as_array()) {
                assert!(v.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn expanded_matches_ode_oracle() {
        for (g, big) in [(1.0, 20.0), (0.3, 2.0), (2.0, 0.7), (1.0, 100.0)] {
            let p = PairGenParams::<f64>::new(0.4, g, big, 1.0).unwrap();
            for b in [Branch::Plus, Branch::Minus] {
                for t in [0.05, 0.5, 2.0] {
                    let oracle = ode_oracle(t, &p, b);
                    let got = expanded(t, &p, b).unwrap().as_array();
                    for (x, y) in got.iter().zip(oracle) {
                        assert!(close(*x, y, 1e-7, 1e-14), "{b:?} g={g} G={big} t={t}: {x} vs {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn integral_form_matches_expanded() {
        for (g, big) in [(1.0, 20.0), (0.3, 2.0), (2.0, 0.7)] {
            let p = PairGenParams::<f64>::new(0.4, g, big, 1.0).unwrap();
            for b in [Branch::Plus, Branch::Minus] {
                for t in [1e-4, 0.05, 0.5, 3.0] {
                    let e = expanded(t, &p, b).unwrap().as_array();
                    let s = integral_form(t, &p, b).as_array();
                    for (x, y) in e.iter().zip(s) {
                        assert!(close(*x, y, 1e-9, 1e-16), "{b:?} t={t}: {x} vs {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_rates_fall_back_to_the_limit() {
        // gamma = 0 and Gamma = gamma hit printed denominators.
        for (g, big) in [(0.0, 5.0), (1.5, 1.5), (1e-12, 5.0)] {
            let p = PairGenParams::<f64>::new(0.4, g, big, 1.0).unwrap();
            for b in [Branch::Plus, Branch::Minus] {
                let got = second_order_coefficients(0.8, &p, b).as_array();
                let oracle = ode_oracle(0.8, &p, b);
                for (x, y) in got.iter().zip(oracle) {
                    assert!(x.is_finite());
                    assert!(close(*x, y, 1e-7, 1e-14), "{b:?} g={g} G={big}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn large_times_do_not_overflow() {
        let p = PairGenParams::<f64>::new(1e-3, 1.0, 400.0, 1.0).unwrap();
        for b in [Branch::Plus, Branch::Minus] {
            let c = second_order_coefficients(50.0, &p, b);
            assert!(c.as_array().iter().all(|v| v.is_finite()));
        }
        assert!(n_minus_perturbative(50.0, &p).is_finite());
        assert!(n_plus_perturbative(50.0, &p).is_finite());
    }

    fn printed_n_plus(t: f64, p: &PairGenParams<f64>) -> f64 {
        let (g, big) = (p.gamma, p.big_gamma);
        let k = p.pair_strength();
        p.alpha0_sq * (-(big + g) * t).exp()
            - k / (2.0 * big * g * (big + g))
                * (-2.0 * (big + g) * t).exp()
                * (g + big * ((big + g) * t).exp() - (big + g) * (big * t).exp())
    }

    fn printed_n_minus(t: f64, p: &PairGenParams<f64>) -> f64 {
        let (g, big) = (p.gamma, p.big_gamma);
        let k = p.pair_strength();
        let eta = ((2.0 * big + g) * t).exp() - 2.0 * (big * t).exp() + 1.0;
        let zeta = 1.0 - (big * t).exp();
        k / (2.0 * big * (2.0 * big + g)) * (-2.0 * (big + g) * t).exp() / (big + g) * (eta * big + g * zeta)
    }

    #[test]
    fn collective_numbers_match_printed_forms() {
        for (g, big) in [(1.0, 20.0), (0.3, 2.0), (1.0, 400.0)] {
            let p = PairGenParams::<f64>::new(0.05, g, big, 2.0).unwrap();
            // The printed forms multiply e^{+Gamma t} by e^{-2 Gamma t}; keep them representable.
            for t in [0.01, 0.1, 0.5, 1.0].into_iter().filter(|t| big * t < 40.0) {
                let (a, b) = (n_plus_perturbative(t, &p), printed_n_plus(t, &p));
                assert!(close(a, b, 1e-10, 0.0), "g={g} G={big} t={t}: {a} vs {b}");
                assert!(close(n_minus_perturbative(t, &p), printed_n_minus(t, &p), 1e-9, 0.0));
            }
        }
    }

    #[test]
    fn expectations_reassemble_from_coefficients() {
        let p = PairGenParams::<f64>::new(0.05, 1.0, 20.0, 2.0).unwrap();
        let a4 = p.alpha0_sq * p.alpha0_sq;
        for t in [0.05, 0.3, 1.0] {
            let minus = second_order_coefficients(t, &p, Branch::Minus).f2 * a4;
            assert!(close(minus, n_minus_perturbative(t, &p), 1e-9, 0.0));
            let plus = pump_photon_number(t, &p) + second_order_coefficients(t, &p, Branch::Plus).f1 * a4;
            assert!(close(plus, n_plus_perturbative(t, &p), 1e-9, 0.0));
        }
    }

    #[test]
    fn plus_examples() {
        let free = PairGenParams::<f64>::new(0.0, 1.0, 20.0, 3.0).unwrap();
        assert_eq!(n_plus_perturbative(0.4, &free), pump_photon_number(0.4, &free));
        let p = PairGenParams::<f64>::new(0.05, 1.0, 20.0, 1.0).unwrap();
        assert!((n_plus_perturbative(0.0, &p) - 1.0).abs() < 1e-16);
        // lambda = 0.0025: the correction stays below 1e-4 of the pump for Gamma t <= 10.
        for i in 1..=100 {
            let t = 0.5 * i as f64 / 100.0;
            let rel = (n_plus_perturbative(t, &p) - pump_photon_number(t, &p)).abs() / 1.0;
            assert!(rel < 1e-4);
        }
        // gamma = 0 is a removable singularity of the printed form.
        let lossless = PairGenParams::<f64>::new(0.05, 0.0, 20.0, 1.0).unwrap();
        let near = PairGenParams::<f64>::new(0.05, 1e-7, 20.0, 1.0).unwrap();
        assert!(close(n_plus_perturbative(0.3, &lossless), n_plus_perturbative(0.3, &near), 1e-6, 0.0));
    }

    #[test]
    fn minus_examples() {
        let p = PairGenParams::<f64>::new(0.05, 0.05, 20.0, 2.0).unwrap();
        assert_eq!(n_minus_perturbative(0.0, &p), 0.0);
        let q = PairGenParams::<f64>::new(1e-3, 1.0 / 400.0, 1.0, 10.0).unwrap();
        let lhs = n_minus_perturbative(6.0, &q);
        let rhs = 2.0 * p2_with_loss(6.0, &q) + p1_with_loss(6.0, &q);
        assert!((lhs / rhs - 1.0).abs() < 1e-2, "{lhs} vs {rhs}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn lossless_identity(u in 0.0f64..2.0, big in 1e-3f64..1e3, a in 0.0f64..1e3, t in 0.0f64..10.0) {
            let p = PairGenParams::<f64>::new(u, 0.0, big, a).unwrap();
            let lhs = n_minus_perturbative(t, &p);
            let rhs = 2.0 * p2_lossless(t, &p);
            prop_assert!((lhs - rhs).abs() <= 4.0 * f64::EPSILON * rhs.abs(), "{} vs {}", lhs, rhs);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn stable_and_expanded_agree(g in 0.01f64..5.0, big in 0.01f64..50.0, t in 0.0f64..3.0) {
            let p = PairGenParams::<f64>::new(0.2, g, big, 1.0).unwrap();
            for b in [Branch::Plus, Branch::Minus] {
                if let Some(e) = expanded(t, &p, b) {
                    let s = integral_form(t, &p, b);
                    for (x, y) in e.as_array().iter().zip(s.as_array()) {
                        prop_assert!(close(*x, y, 1e-6, 1e-13), "{:?} {} vs {}", b, x, y);
                    }
                }
            }
        }
    }
}
