//! Circuit-QED simulator for fluxonium and transmon qubits coupled to
//! harmonic modes: dressed-state analysis, Lindblad dynamics, bosonic
//! control and a χ/K design search.
//!
//! Units: frequencies in GHz (linear, `H/h`), times in ns, loss rates in
//! 1/µs, flux in Φ₀.

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod control;
pub mod design;
pub mod dressed;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod fock;
pub mod linalg;
pub mod optimize;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

/// `f64` instantiations of the generic types.
pub type C64 = Cx<f64>;
pub type Spec = circuit::CircuitSpec<f64>;
pub type Params = dressed::EffectiveParams<f64>;
pub type Model = dynamics::EffectiveModel<f64>;
pub type Losses = dynamics::LossRates<f64>;
pub type Density = dynamics::DensityMatrix<f64>;
pub type Grid = control::PhaseSpaceGrid<f64>;
