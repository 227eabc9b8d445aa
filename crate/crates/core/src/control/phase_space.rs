use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PhaseSpaceGrid;
use crate::dynamics::{displace, evolve_sector, qubit_pulse, DensityMatrix, EffectiveModel, LossRates, PulseShape, SectorState};
use crate::error::{invalid, Result};
use crate::fock::{coherent_amplitudes, displacement_elements};
use crate::linalg::CMatrix;
use crate::scalar::{from_usize, lit, Cx, Real};

/// `Q(β) = ⟨β|ρ_s|β⟩/π` with the qubit traced out.
pub fn q_function<T: Real>(rho: &DensityMatrix<T>, grid: &PhaseSpaceGrid<T>) -> PhaseSpaceGrid<T> {
    let rs = rho.storage_reduced();
    let n = rho.fock_dim();
    let vals: Vec<T> = grid
        .points()
        .par_iter()
        .map(|b| rs.expectation(&coherent_amplitudes(*b, n)).re / T::PI())
        .collect();
    let mut out = grid.clone();
    out.fill(vals);
    out
}

/// Displaced-parity Wigner function `W(β) = (2/π) Tr[D(β)† ρ_s D(β) P]`.
/// The displacement uses exact matrix elements on a padded Fock space so
/// that truncation of `ρ` does not leak into the result.
pub fn wigner_exact<T: Real>(rho: &DensityMatrix<T>, grid: &PhaseSpaceGrid<T>) -> PhaseSpaceGrid<T> {
    let rs = rho.storage_reduced();
    let vals: Vec<T> = grid.points().par_iter().map(|b| wigner_point(&rs, *b)).collect();
    let mut out = grid.clone();
    out.fill(vals);
    out
}

fn wigner_point<T: Real>(rs: &CMatrix<T>, beta: Cx<T>) -> T {
    let n = rs.rows();
    let r = from_usize::<T>(n).sqrt() + beta.norm();
    let pad = (r * r + lit::<T>(10.0) * r + lit::<T>(20.0)).ceil().to_usize().unwrap_or(n + 64);
    let rows = pad.max(n);
    // ⟨k|D(−β)|m⟩ = ⟨k|D(β)†|m⟩
    let m = displacement_elements(-beta, rows, n);
    let mut acc = T::zero();
    let mut row = vec![Cx::new(T::zero(), T::zero()); n];
    for k in 0..rows {
        // (M ρ M†)_kk = Σ_j (Σ_i M_ki ρ_ij) conj(M_kj)
        for (j, rj) in row.iter_mut().enumerate() {
            let mut s = Cx::new(T::zero(), T::zero());
            for i in 0..n {
                s += m.get(k, i) * rs.get(i, j);
            }
            *rj = s;
        }
        let mut d = T::zero();
        for (j, rj) in row.iter().enumerate() {
            d += (*rj * m.get(k, j).conj()).re;
        }
        if k % 2 == 0 {
            acc += d;
        } else {
            acc -= d;
        }
    }
    acc * lit::<T>(2.0) / T::PI()
}

/// Parity-selective tomography settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct WignerPulses<T: Real = f64> {
    /// Gaussian selective pulse length (ns).
    pub duration: T,
    /// Highest driven photon-number peak.
    pub max_peak: usize,
    /// Per-peak amplitude calibration relative to a π pulse; missing
    /// entries default to 1.
    #[serde(default)]
    pub amplitudes: Vec<T>,
    #[serde(default = "default_tol")]
    pub tol: T,
}

fn default_tol<T: Real>() -> T {
    lit::<T>(1e-8)
}

impl<T: Real> Default for WignerPulses<T> {
    fn default() -> Self {
        Self { duration: lit::<T>(1600.0), max_peak: 10, amplitudes: Vec::new(), tol: default_tol() }
    }
}

impl<T: Real> WignerPulses<T> {
    fn amplitude(&self, n: usize) -> T {
        self.amplitudes.get(n).copied().unwrap_or(T::one())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MeasuredWigner<T: Real = f64> {
    pub grid: PhaseSpaceGrid<T>,
    /// Largest photon population above the highest driven peak over the
    /// grid (displaced states).
    pub tail_max: T,
}

/// Simulated measurement-based Wigner function: displace by `−β`, drive all
/// even (then all odd) photon-number peaks with multiplexed selective π
/// pulses and read the qubit. `W = (2/π)(P_e^even − P_e^odd)`.
pub fn wigner_measured<T: Real>(
    rho: &DensityMatrix<T>,
    model: &EffectiveModel<T>,
    losses: &LossRates<T>,
    pulses: &WignerPulses<T>,
    grid: &PhaseSpaceGrid<T>,
) -> Result<MeasuredWigner<T>> {
    model.validate()?;
    if rho.fock_dim() > model.fock_dim {
        return Err(invalid("rho", "fock_dim exceeds the model truncation"));
    }
    if pulses.max_peak + 1 > model.fock_dim {
        return Err(invalid("max_peak", "driven peaks exceed the model truncation"));
    }
    let make = |parity: usize| -> Result<Vec<_>> {
        (0..=pulses.max_peak)
            .filter(|n| n % 2 == parity)
            .filter(|n| pulses.amplitude(*n) != T::zero())
            .map(|n| {
                let det = model.chi * from_usize::<T>(n);
                qubit_pulse(PulseShape::Gaussian, pulses.duration, det, T::zero(), T::PI() * pulses.amplitude(n))
            })
            .collect()
    };
    let even = make(0)?;
    let odd = make(1)?;
    let base = rho.resized(model.fock_dim);
    let t_end = [pulses.duration];
    let excite = |st: &SectorState<T>, drives: &[crate::dynamics::DriveTerm<T>]| -> Result<T> {
        if drives.is_empty() {
            return Ok(st.excited_population());
        }
        let out = evolve_sector(st, model, drives, losses, &t_end, pulses.tol)?;
        Ok(out[0].excited_population())
    };
    let results: Vec<Result<(T, T)>> = grid
        .points()
        .par_iter()
        .map(|b| {
            let d = displace(&base, -*b)?;
            let tail = d.photon_distribution()[pulses.max_peak + 1..].iter().fold(T::zero(), |a, p| a + *p);
            let st = SectorState::from_density(&d);
            let pe = excite(&st, &even)?;
            let po = excite(&st, &odd)?;
            Ok(((pe - po) * lit::<T>(2.0) / T::PI(), tail))
        })
        .collect();
    let mut vals = Vec::with_capacity(results.len());
    let mut tail_max = T::zero();
    for r in results {
        let (w, t) = r?;
        vals.push(w);
        tail_max = tail_max.max(t);
    }
    let mut out = grid.clone();
    out.fill(vals);
    Ok(MeasuredWigner { grid: out, tail_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use std::f64::consts::PI;

    fn fock(n: usize, dim: usize) -> DensityMatrix<f64> {
        let mut psi = vec![cx(0.0, 0.0); 2 * dim];
        psi[n] = cx(1.0, 0.0);
        DensityMatrix::from_pure(dim, &psi).unwrap()
    }

    #[test]
    fn origin_values() {
        let g = PhaseSpaceGrid::square(1.0, 3).unwrap();
        let w0 = wigner_exact(&fock(0, 6), &g);
        let w1 = wigner_exact(&fock(1, 6), &g);
        assert!((w0.nearest(cx(0.0, 0.0)) - 2.0 / PI).abs() < 1e-12);
        assert!((w1.nearest(cx(0.0, 0.0)) + 2.0 / PI).abs() < 1e-12);
        let q = q_function(&fock(0, 6), &g);
        assert!((q.nearest(cx(0.0, 0.0)) - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn vacuum_wigner_is_gaussian_far_from_origin() {
        // padding keeps the value exact even outside the truncated support
        let g = PhaseSpaceGrid::new((2.5, 3.5), (-0.5, 0.5), 3).unwrap();
        let w = wigner_exact(&fock(0, 4), &g);
        let expect = 2.0 / PI * (-2.0 * 9.0_f64).exp();
        assert!((w.nearest(cx(3.0, 0.0)) - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_amplitude_measurement_is_flat() {
        let model = EffectiveModel::new(1e-3, 0.0, 12);
        let pulses = WignerPulses { amplitudes: vec![0.0; 11], ..WignerPulses::default() };
        let g = PhaseSpaceGrid::square(1.0, 3).unwrap();
        let m = wigner_measured(&fock(0, 12), &model, &LossRates::none(), &pulses, &g).unwrap();
        assert!(m.grid.values.iter().flatten().all(|v| *v == 0.0));
    }
}
