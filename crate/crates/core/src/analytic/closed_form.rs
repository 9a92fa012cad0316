use serde::Serialize;

use super::PairGenParams;
use crate::error::AnalyticError;
use crate::scalar::{expm1_over, Real};

/// `(1 - e^{-Gamma t}) / Gamma`, equal to `t` at `Gamma = 0`.
fn saturation<T: Real>(big_gamma: T, t: T) -> T {
    t * expm1_over(-big_gamma * t)
}

/// Residual pump photons `|alpha_+(0)|^2 e^{-(Gamma+gamma) t}`.
pub fn pump_photon_number<T: Real>(t: T, p: &PairGenParams<T>) -> T {
    p.alpha0_sq * (-p.symmetric_decay() * t).exp()
}

/// Pair probability without linear loss, `(1/8) U^2 |alpha|^4 (1 - e^{-Gamma t})^2 / Gamma^2`.
pub fn p2_lossless<T: Real>(t: T, p: &PairGenParams<T>) -> T {
    let s = saturation(p.big_gamma, t);
    T::lit(0.125) * p.pair_strength() * s * s
}

/// Pair probability with linear loss: [`p2_lossless`] times `e^{-2 gamma t}`.
pub fn p2_with_loss<T: Real>(t: T, p: &PairGenParams<T>) -> T {
    p2_lossless(t, p) * (T::lit(-2.0) * p.gamma * t).exp()
}

/// Single-photon probability from pair decay,
/// `(1/4)(U^2|alpha|^4/Gamma^2) e^{-gamma t}[1 - e^{-gamma t} - (2gamma/Gamma)(1 - e^{-Gamma t}) + (gamma/2Gamma)(1 - e^{-2Gamma t})]`.
///
/// Leading order in `gamma/Gamma`; at `gamma t` of order one it deviates from
/// the exact rate-equation solution by a few percent of its peak. For
/// `t < gamma/Gamma^2` the truncated bracket dips below zero by
/// `O(gamma^2 t^2)`; the result is clamped at 0.
pub fn p1_with_loss<T: Real>(t: T, p: &PairGenParams<T>) -> T {
    let (g, big) = (p.gamma, p.big_gamma);
    if g == T::zero() {
        return T::zero();
    }
    let bracket = -(-g * t).exp_m1() - T::lit(2.0) * g * saturation(big, t) + g * saturation(T::lit(2.0) * big, t);
    (T::lit(0.25) * p.pair_strength() / (big * big) * (-g * t).exp() * bracket).max(T::zero())
}

/// `-(1/Gamma) ln(gamma/Gamma)`, the leading-log position of the `P_2` maximum.
pub fn t_max<T: Real>(p: &PairGenParams<T>) -> Result<T, AnalyticError> {
    if p.gamma == T::zero() {
        return Err(AnalyticError::NoMaximum);
    }
    if !(p.gamma < p.big_gamma) {
        return Err(AnalyticError::InvalidParams(format!(
            "t_max needs 0 < gamma < Gamma, got gamma = {}, Gamma = {}",
            p.gamma, p.big_gamma
        )));
    }
    Ok(-(p.gamma / p.big_gamma).ln() / p.big_gamma)
}

/// Admissible interaction times for pump rejection level `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperationalWindow<T: Real> {
    /// Shortest time at which residual pump photons drop to `delta` times the pair number.
    pub t_min: T,
    /// `1/gamma`; beyond it linear loss erodes the pairs.
    pub t_max_bound: T,
    pub feasible: bool,
}

/// `T_min = (1/Gamma) ln(4 Gamma^2 / (U^2 |alpha_+(0)|^2 delta))`, clamped at 0.
pub fn operational_window<T: Real>(p: &PairGenParams<T>, delta: T) -> Result<OperationalWindow<T>, AnalyticError> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(AnalyticError::InvalidParams(format!("delta must be > 0, got {delta}")));
    }
    if !(p.big_gamma > T::zero()) {
        return Err(AnalyticError::InvalidParams("operational window needs Gamma > 0".into()));
    }
    let arg = T::lit(4.0) * p.big_gamma * p.big_gamma / (p.u * p.u * p.alpha0_sq * delta);
    let t_min = (arg.ln() / p.big_gamma).max(T::zero());
    let t_max_bound = if p.gamma > T::zero() {
        T::one() / p.gamma
    } else {
        T::infinity()
    };
    Ok(OperationalWindow {
        t_min,
        t_max_bound,
        feasible: t_min < t_max_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig2(big: f64) -> PairGenParams<f64> {
        PairGenParams::<f64>::new(1e-10, 1.0, big, 1e10).unwrap()
    }

    #[test]
    fn pump_examples() {
        let p = fig2(400.0);
        assert_eq!(pump_photon_number(0.0, &p), 1e10);
        let half = PairGenParams::<f64>::new(0.0, 1.0, 0.0, 8.0).unwrap();
        assert!((pump_photon_number(2f64.ln(), &half) - 4.0).abs() < 1e-14);
        let at = pump_photon_number(0.086, &p);
        assert!((at / 1.06e-5 - 1.0).abs() < 0.01, "{at}");
    }

    #[test]
    fn p2_examples() {
        let p = fig2(400.0);
        assert_eq!(p2_lossless(0.0, &p), 0.0);
        let sat = 0.125 * 1e-20 * 1e20 / 400f64.powi(2);
        assert!((p2_lossless(1e3, &p) - sat).abs() < 1e-12 * sat);
        let tm = t_max(&p).unwrap();
        let twice = 2.0 * p2_with_loss(tm, &p);
        assert!((twice / 1.51e-6 - 1.0).abs() < 0.01, "{twice}");
        let none = PairGenParams::<f64>::new(0.0, 1.0, 400.0, 1e10).unwrap();
        assert_eq!(p2_with_loss(0.3, &none), 0.0);
        assert!(p2_with_loss(60.0, &p) < 1e-50);
    }

    #[test]
    fn p2_lossless_finite_at_zero_gamma() {
        let p = PairGenParams::<f64>::new(0.2, 0.0, 0.0, 1.0).unwrap();
        assert!((p2_lossless(2.0, &p) - 0.125 * 0.04 * 4.0).abs() < 1e-15);
    }

    #[test]
    fn p1_examples() {
        let p = fig2(400.0);
        assert_eq!(p1_with_loss(0.0, &p), 0.0);
        let lossless = PairGenParams::<f64>::new(1e-10, 0.0, 400.0, 1e10).unwrap();
        assert_eq!(p1_with_loss(0.5, &lossless), 0.0);
        let e1 = (-1f64).exp();
        let direct = 0.25 / 160000.0 * e1 * (1.0 - e1 - 2.0 / 400.0 + 1.0 / 800.0);
        assert!((p1_with_loss(1.0, &p) / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t_max_examples() {
        assert!((t_max(&fig2(400.0)).unwrap() - 0.014979).abs() < 1e-6);
        assert!((t_max(&fig2(200.0)).unwrap() - 0.026492).abs() < 1e-6);
        let lossless = PairGenParams::<f64>::new(1.0, 0.0, 4.0, 1.0).unwrap();
        assert_eq!(t_max(&lossless), Err(AnalyticError::NoMaximum));
        let inverted = PairGenParams::<f64>::new(1.0, 5.0, 4.0, 1.0).unwrap();
        assert!(matches!(t_max(&inverted), Err(AnalyticError::InvalidParams(_))));
    }

    #[test]
    fn window_examples() {
        let w = operational_window(&fig2(400.0), 0.1).unwrap();
        assert!((w.t_min - (6.4e16f64).ln() / 400.0).abs() < 1e-12);
        assert!((w.t_min - 0.0967).abs() < 1e-4);
        assert!(w.feasible);
        let strong = PairGenParams::<f64>::new(1e-4, 1.0, 400.0, 1e11).unwrap();
        let w10 = operational_window(&strong, 0.1).unwrap();
        let base = PairGenParams::<f64>::new(1e-4, 1.0, 400.0, 1e10).unwrap();
        let w1 = operational_window(&base, 0.1).unwrap();
        assert!((w1.t_min - w10.t_min - 10f64.ln() / 400.0).abs() < 1e-12);
        let huge = PairGenParams::<f64>::new(1e3, 1.0, 1.0, 10.0).unwrap();
        let w = operational_window(&huge, 1.0).unwrap();
        assert_eq!(w.t_min, 0.0);
        assert!(w.feasible);
        assert!(operational_window(&huge, 0.0).is_err());
    }

    #[test]
    fn window_meets_its_definition() {
        let p = PairGenParams::<f64>::new(1e-12, 0.1, 1000.0, 1e12).unwrap();
        let w = operational_window(&p, 0.05).unwrap();
        assert!(w.t_min < 0.1);
        let ratio = pump_photon_number(w.t_min, &p) / (2.0 * p2_with_loss(w.t_min, &p));
        assert!((ratio / 0.05 - 1.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn single_precision_agrees() {
        let p64 = fig2(400.0);
        let p32 = PairGenParams::<f32>::new(1e-10, 1.0, 400.0, 1e10).unwrap();
        let a = p2_with_loss(0.02f32, &p32) as f64;
        let b = p2_with_loss(0.02, &p64);
        assert!((a / b - 1.0).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn probabilities_are_non_negative(
            u in 0.0f64..1.0, g in 0.0f64..5.0, big in 0.1f64..1e3, a in 0.0f64..10.0, t in 0.0f64..20.0,
        ) {
            let p = PairGenParams::<f64>::new(u, g, big, a).unwrap();
            prop_assert!(p2_with_loss(t, &p) >= 0.0);
            prop_assert!(p1_with_loss(t, &p) >= 0.0);
        }

        #[test]
        fn pump_is_monotone(g in 0.0f64..5.0, big in 0.0f64..1e3, t in 0.0f64..5.0, dt in 1e-6f64..1.0) {
            let p = PairGenParams::<f64>::new(0.1, g, big, 3.0).unwrap();
            prop_assert!(pump_photon_number(t + dt, &p) <= pump_photon_number(t, &p));
        }

        #[test]
        fn lossless_limit_matches(u in 0.0f64..1.0, big in 0.1f64..1e3, a in 0.0f64..10.0, t in 0.0f64..5.0) {
            let p = PairGenParams::<f64>::new(u, 0.0, big, a).unwrap();
            prop_assert_eq!(p2_with_loss(t, &p), p2_lossless(t, &p));
        }
    }
}
