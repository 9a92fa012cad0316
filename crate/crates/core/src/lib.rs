//! Photon-pair generation with dissipative pump rejection.
//!
//! Two coupled Kerr waveguides lose their symmetric supermode to an engineered
//! reservoir; pairs created in the antisymmetric mode survive while the pump
//! is filtered out. The crate simulates the open-system dynamics, evaluates
//! the weak-pump closed forms, and turns them into waveguide design numbers.
//!
//! - [`fock`]: truncated bosonic operators and states
//! - [`lindblad`]: master-equation integrator
//! - [`analytic`]: closed-form weak-pump results
//! - [`design`]: material presets and design rules
//! - [`scenarios`]: concrete device models and quantum-vs-closed-form checks
//! - [`cli`]: the `pairgen` command line
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

// `!(x > 0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod design;
pub mod error;
pub mod fock;
pub mod lindblad;
pub mod scalar;
pub mod scenarios;

pub type Complex64 = scalar::C<f64>;
pub type FockOperator = fock::Operator<f64>;
pub type State = fock::QuantumState<f64>;
pub type Model = lindblad::LindbladModel<f64>;
pub type Series = lindblad::TimeSeries<f64>;
pub type Params = analytic::PairGenParams<f64>;
pub type Platform = design::MaterialPlatform<f64>;
pub type DesignSummary = design::DesignReport<f64>;
pub type Comparison = scenarios::ComparisonReport<f64>;
