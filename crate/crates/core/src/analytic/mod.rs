//! Closed-form weak-pump results for the dissipatively filtered pair source.
//!
//! All rates share one reference unit (the engine's), `t` is in its inverse.
//! The expansion parameter is `lambda = U |alpha_+(0)|^2 / Gamma`; every
//! formula here is leading order in `lambda` and degrades as it approaches 1.

mod closed_form;
mod noon;
mod perturbative;

use serde::{Deserialize, Serialize};

use crate::error::AnalyticError;
use crate::scalar::Real;

pub use closed_form::{
    operational_window, p1_with_loss, p2_lossless, p2_with_loss, pump_photon_number, t_max, OperationalWindow,
};
pub use noon::{noon_probabilities, noon_pump_amplitude, NoonProbabilities};
pub use perturbative::{
    n_minus_perturbative, n_plus_perturbative, second_order_coefficients, Branch, SecondOrderCoefficients,
};

/// Model constants of the two-mode source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairGenParams<T: Real> {
    /// Kerr rate.
    #[serde(rename = "U")]
    pub u: T,
    /// Linear loss of each waveguide.
    pub gamma: T,
    /// Engineered loss of the symmetric mode.
    #[serde(rename = "Gamma")]
    pub big_gamma: T,
    /// Initial pump photon number `|alpha_+(0)|^2`.
    pub alpha0_sq: T,
    /// Coupling between the two halves of the NOON device.
    #[serde(default = "zero")]
    pub v: T,
}

fn zero<T: Real>() -> T {
    T::zero()
}

impl<T: Real> PairGenParams<T> {
    pub fn new(u: T, gamma: T, big_gamma: T, alpha0_sq: T) -> Result<Self, AnalyticError> {
        let p = Self {
            u,
            gamma,
            big_gamma,
            alpha0_sq,
            v: T::zero(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_v(mut self, v: T) -> Self {
        self.v = v;
        self
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        for (name, x) in [
            ("U", self.u),
            ("gamma", self.gamma),
            ("Gamma", self.big_gamma),
            ("alpha0_sq", self.alpha0_sq),
        ] {
            if !x.is_finite() || x < T::zero() {
                return Err(AnalyticError::InvalidParams(format!("{name} must be finite and >= 0, got {x}")));
            }
        }
        if !self.v.is_finite() {
            return Err(AnalyticError::InvalidParams(format!("v must be finite, got {}", self.v)));
        }
        Ok(())
    }

    /// `U |alpha_+(0)|^2 / Gamma`; infinite when `Gamma = 0` and `U > 0`.
    pub fn lambda(&self) -> T {
        if self.u == T::zero() {
            T::zero()
        } else {
            self.u * self.alpha0_sq / self.big_gamma
        }
    }

    /// `U^2 |alpha_+(0)|^4`, the common pair-generation strength.
    pub fn pair_strength(&self) -> T {
        let k = self.u * self.alpha0_sq;
        k * k
    }

    /// Total decay rate of the symmetric mode.
    pub fn symmetric_decay(&self) -> T {
        self.big_gamma + self.gamma
    }
}
