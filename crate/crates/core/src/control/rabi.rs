use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_sector, qubit_pulse, EffectiveModel, InitialState, LossRates, PulseShape, SectorState, StorageState};
use crate::error::{invalid, Result};
use crate::scalar::{from_usize, lit, Cx, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct RabiOptions<T: Real = f64> {
    /// Gaussian pulse length (ns).
    pub duration: T,
    /// Initial ground-state population of the qubit.
    pub qubit_ground_population: T,
    pub tol: T,
}

impl<T: Real> Default for RabiOptions<T> {
    fn default() -> Self {
        Self { duration: lit::<T>(1600.0), qubit_ground_population: T::one(), tol: lit::<T>(1e-8) }
    }
}

/// Qubit excitation after a selective Gaussian pulse on photon-number peak
/// `peak`, for each amplitude (1 = π pulse on an isolated line), starting
/// from a coherent state `alpha_prep`.
pub fn power_rabi_curve<T: Real>(
    peak: usize,
    alpha_prep: Cx<T>,
    model: &EffectiveModel<T>,
    losses: &LossRates<T>,
    amplitudes: &[T],
    opts: &RabiOptions<T>,
) -> Result<Vec<T>> {
    model.validate()?;
    if peak >= model.fock_dim {
        return Err(invalid("peak", "photon-number peak outside the truncation"));
    }
    let init = InitialState::new(opts.qubit_ground_population, StorageState::coherent(alpha_prep));
    let st = SectorState::from_density(&init.density(model.fock_dim)?);
    let det = model.chi * from_usize::<T>(peak);
    let t_end = [opts.duration];
    let out: Vec<Result<T>> = amplitudes
        .par_iter()
        .map(|&a| {
            if a == T::zero() {
                let fin = evolve_sector(&st, model, &[], losses, &t_end, opts.tol)?;
                return Ok(fin[0].excited_population());
            }
            let p = qubit_pulse(PulseShape::Gaussian, opts.duration, det, T::zero(), T::PI() * a)?;
            let fin = evolve_sector(&st, model, &[p], losses, &t_end, opts.tol)?;
            Ok(fin[0].excited_population())
        })
        .collect();
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn vacuum_peak_rabi_is_cosine() {
        let model = EffectiveModel::new(1.0e-3, 0.0, 6);
        let amps: Vec<f64> = (0..9).map(|k| 0.25 * k as f64).collect();
        let p = power_rabi_curve(0, cx(0.0, 0.0), &model, &LossRates::none(), &amps, &RabiOptions::default()).unwrap();
        for (a, pe) in amps.iter().zip(&p) {
            let expect = (std::f64::consts::PI * a / 2.0).sin().powi(2);
            assert!((pe - expect).abs() < 1e-6, "a = {a}: {pe} vs {expect}");
        }
    }

    #[test]
    fn zero_amplitude_leaves_residual_excitation() {
        let model = EffectiveModel::new(1.0e-3, 0.0, 8);
        let opts = RabiOptions { qubit_ground_population: 0.9, ..RabiOptions::default() };
        let p = power_rabi_curve(2, cx(1.0, 0.0), &model, &LossRates::none(), &[0.0], &opts).unwrap();
        assert!((p[0] - 0.1_f64).abs() < 1e-10);
    }
}
