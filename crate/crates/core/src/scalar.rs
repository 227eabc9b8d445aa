//! Scalar abstraction shared by every numerical module.
//!
//! Everything that does arithmetic is generic over [`Real`], which is
//! implemented for `f32` and `f64`. The `f64` instantiations are exported
//! under short aliases at the crate root; physics-grade results (kHz Kerr
//! on GHz-scale spectra) need `f64`.

use std::fmt::{Debug, Display};

use num_complex::Complex;

/// Floating point type usable by the Hamiltonian builders, the eigensolver
/// and the master-equation integrator.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + faer::traits::RealField
    + Debug
    + Display
    + std::fmt::LowerExp
    + Default
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

/// Converts an `f64` literal or parameter into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 is representable in every Real type")
}

/// Converts an index or count into `T`.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize is representable in every Real type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn two_pi<T: Real>() -> T {
    T::TAU()
}

#[inline]
pub fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub fn czero<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

/// `e^{i phase}`
#[inline]
pub fn cis<T: Real>(phase: T) -> Cx<T> {
    Complex::new(phase.cos(), phase.sin())
}
