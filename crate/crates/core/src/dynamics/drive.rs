use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{cis, cx, from_usize, lit, two_pi, Cx, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveTarget {
    /// Multiplies `|e⟩⟨g|`.
    Qubit,
    /// Multiplies the storage annihilation operator.
    Storage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    /// Truncated Gaussian with `σ = T/4`, offset to vanish at both edges.
    Gaussian,
    Square,
}

/// Drive term `ε(t − t₀) e^{iφ} e^{−i2πδ(t − t₀)} X + h.c.`, where `X` is
/// `|e⟩⟨g|` or `s`. The envelope is sampled on a uniform grid (GHz) and
/// linearly interpolated; it is zero outside `[t₀, t₀ + duration]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DriveTerm<T: Real = f64> {
    pub target: DriveTarget,
    pub envelope: Vec<Cx<T>>,
    /// Sample spacing (ns).
    pub dt: T,
    /// Start time (ns).
    #[serde(default)]
    pub t0: T,
    /// GHz
    pub detuning: T,
    /// rad
    pub phase: T,
}

impl<T: Real> DriveTerm<T> {
    pub fn new(target: DriveTarget, envelope: Vec<Cx<T>>, dt: T, detuning: T, phase: T) -> Result<Self> {
        let d = Self { target, envelope, dt, t0: T::zero(), detuning, phase };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) {
            return Err(invalid("dt", "sample spacing must be positive"));
        }
        if self.envelope.len() < 2 {
            return Err(invalid("envelope", "need at least two samples"));
        }
        if self.envelope.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid("envelope", "samples must be finite"));
        }
        if !self.detuning.is_finite() || !self.phase.is_finite() || !self.t0.is_finite() {
            return Err(invalid("drive", "detuning, phase and start must be finite"));
        }
        Ok(())
    }

    pub fn starting_at(mut self, t0: T) -> Self {
        self.t0 = t0;
        self
    }

    pub fn scaled(mut self, s: T) -> Self {
        for z in &mut self.envelope {
            *z *= s;
        }
        self
    }

    pub fn duration(&self) -> T {
        self.dt * from_usize::<T>(self.envelope.len() - 1)
    }

    pub fn end(&self) -> T {
        self.t0 + self.duration()
    }

    /// Interpolated envelope at local time `tau`.
    pub fn envelope_at(&self, tau: T) -> Cx<T> {
        if tau < T::zero() || tau > self.duration() {
            return cx(T::zero(), T::zero());
        }
        let x = tau / self.dt;
        let last = self.envelope.len() - 1;
        let i = x.floor().to_usize().unwrap_or(0).min(last - 1);
        let f = x - from_usize::<T>(i);
        self.envelope[i] * (T::one() - f) + self.envelope[i + 1] * f
    }

    /// Complex coefficient of `X` at absolute time `t`.
    pub fn coefficient(&self, t: T) -> Cx<T> {
        let tau = t - self.t0;
        let e = self.envelope_at(tau);
        if e.re == T::zero() && e.im == T::zero() {
            return e;
        }
        e * cis(self.phase - two_pi::<T>() * self.detuning * tau)
    }

    /// `∫ ε dt` of the interpolated envelope.
    pub fn area(&self) -> Cx<T> {
        let half = lit::<T>(0.5);
        let mut acc = cx(T::zero(), T::zero());
        for w in self.envelope.windows(2) {
            acc += (w[0] + w[1]) * half;
        }
        acc * self.dt
    }
}

/// Envelope samples of unit peak for `shape` over `intervals` steps.
pub fn unit_envelope<T: Real>(shape: PulseShape, intervals: usize) -> Vec<Cx<T>> {
    let n = from_usize::<T>(intervals);
    match shape {
        PulseShape::Square => vec![cx(T::one(), T::zero()); intervals + 1],
        PulseShape::Gaussian => {
            // in units of the duration: centre 1/2, σ = 1/4
            let sigma = lit::<T>(0.25);
            let g = |x: T| (-(x - lit::<T>(0.5)) * (x - lit::<T>(0.5)) / (lit::<T>(2.0) * sigma * sigma)).exp();
            let edge = g(T::zero());
            (0..=intervals)
                .map(|k| cx((g(from_usize::<T>(k) / n) - edge) / (T::one() - edge), T::zero()))
                .collect()
        }
    }
}

/// Sample count used for a pulse of the given duration (ns).
fn intervals_for<T: Real>(duration: T) -> usize {
    (duration / lit::<T>(0.1)).ceil().to_usize().unwrap_or(4000).clamp(200, 4000)
}

fn pulse<T: Real>(target: DriveTarget, shape: PulseShape, duration: T, detuning: T, phase: T, area: T) -> Result<DriveTerm<T>> {
    if !(duration > T::zero()) || !duration.is_finite() {
        return Err(invalid("duration", "pulse duration must be positive"));
    }
    if !area.is_finite() {
        return Err(invalid("area", "must be finite"));
    }
    let intervals = intervals_for(duration);
    let env = unit_envelope::<T>(shape, intervals);
    let dt = duration / from_usize::<T>(intervals);
    let d = DriveTerm::new(target, env, dt, detuning, phase)?;
    let unit = d.area().re;
    // rotation angle of ε|e⟩⟨g| + h.c. under e^{-i2πHt} is 4π∫ε dt
    let scale = area / (lit::<T>(2.0) * two_pi::<T>() * unit);
    Ok(d.scaled(scale))
}

/// Qubit pulse whose on-resonance rotation angle on an isolated two-level
/// system equals `area` (rad).
pub fn qubit_pulse<T: Real>(shape: PulseShape, duration: T, detuning: T, phase: T, area: T) -> Result<DriveTerm<T>> {
    pulse(DriveTarget::Qubit, shape, duration, detuning, phase, area)
}

/// Storage drive that displaces vacuum by `|α|` (on resonance, no
/// nonlinearity), phase chosen so the displacement is `α` when `phase = arg α`.
pub fn storage_pulse<T: Real>(shape: PulseShape, duration: T, alpha: Cx<T>) -> Result<DriveTerm<T>> {
    // ε e^{iφ} s + h.c. with real ε displaces by −i2π e^{−iφ} ∫ε dt
    let mag = alpha.norm();
    let phase = -alpha.arg() - T::FRAC_PI_2();
    let d = pulse(DriveTarget::Storage, shape, duration, T::zero(), phase, T::one())?;
    let unit = d.area().re;
    Ok(d.scaled(mag / (two_pi::<T>() * unit)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_vanishes_at_edges_and_peaks_mid() {
        let e = unit_envelope::<f64>(PulseShape::Gaussian, 400);
        assert!(e[0].norm() < 1e-15 && e[400].norm() < 1e-15);
        assert!((e[200].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn calibrated_area() {
        let p = qubit_pulse(PulseShape::Gaussian, 40.0_f64, 0.0, 0.0, std::f64::consts::PI).unwrap();
        let rot = 4.0 * std::f64::consts::PI * p.area().re;
        assert!((rot - std::f64::consts::PI).abs() < 1e-12);
        assert!((p.duration() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_is_zero_outside_window() {
        let p = qubit_pulse(PulseShape::Square, 10.0_f64, 0.001, 0.3, 1.0).unwrap().starting_at(5.0);
        assert_eq!(p.coefficient(4.9), cx(0.0, 0.0));
        assert_eq!(p.coefficient(15.1), cx(0.0, 0.0));
        assert!(p.coefficient(10.0).norm() > 0.0);
    }

    #[test]
    fn rejects_non_positive_duration() {
        assert!(qubit_pulse(PulseShape::Square, 0.0_f64, 0.0, 0.0, 1.0).is_err());
    }
}
