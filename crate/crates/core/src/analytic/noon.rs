use num_complex::Complex;
use serde::Serialize;

use super::PairGenParams;
use crate::scalar::{Real, C};

/// Pair-location probabilities behind the output couplers of the NOON device.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoonProbabilities<T: Real> {
    /// One photon in each antisymmetric mode.
    pub p11: T,
    /// Both photons in the upper antisymmetric mode.
    pub p20: T,
    /// Both photons in the lower antisymmetric mode.
    pub p02: T,
    /// `p20 + p02`.
    pub same_mode: T,
    /// `p11 / (p11 + same_mode) = sin^2(2 v T)`.
    pub ratio: T,
}

/// Long-time (`Gamma T >> 1`) weak-pump pair-location probabilities.
///
/// With `C = (1/8) U^2 |alpha(0)|^4 / Gamma^2`, times `e^{-2 gamma T}` when
/// `with_loss`, `p11 = 2C sin^2(2vT)` and `p20 = p02 = C cos^2(2vT)`. At `v = 0`
/// each half is an independent two-mode source with pair probability `C`.
pub fn noon_probabilities<T: Real>(t: T, p: &PairGenParams<T>, with_loss: bool) -> NoonProbabilities<T> {
    let mut c = T::lit(0.125) * p.pair_strength() / (p.big_gamma * p.big_gamma);
    if with_loss {
        c *= (T::lit(-2.0) * p.gamma * t).exp();
    }
    let phase = T::lit(2.0) * p.v * t;
    let (s2, c2) = (phase.sin().powi(2), phase.cos().powi(2));
    NoonProbabilities {
        p11: T::lit(2.0) * c * s2,
        p20: c * c2,
        p02: c * c2,
        same_mode: T::lit(2.0) * c * c2,
        ratio: s2,
    }
}

/// Symmetric-mode amplitude `alpha(0) e^{-(Gamma+gamma)t/2 - i v t}` with real `alpha(0)`.
pub fn noon_pump_amplitude<T: Real>(t: T, p: &PairGenParams<T>) -> C<T> {
    let re = -p.symmetric_decay() * t * T::lit(0.5);
    Complex::new(re, -p.v * t).exp() * p.alpha0_sq.sqrt()
}
