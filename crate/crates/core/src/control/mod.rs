//! Protocol-level simulations on the dispersive effective model:
//! spectroscopy, calibration formulas, cavity Ramsey Kerr metrology,
//! phase-space tomography, power Rabi and SNAP state preparation.

mod phase_space;
mod rabi;
mod ramsey;
mod snap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fock::poisson_weights;
use crate::scalar::{from_usize, lit, Cx, Real};

pub use phase_space::{q_function, wigner_exact, wigner_measured, MeasuredWigner, WignerPulses};
pub use rabi::{power_rabi_curve, RabiOptions};
pub use ramsey::{
    cavity_ramsey_master, cavity_ramsey_unitary, extract_kerr_from_ramsey, FringeFit, FringeFitOptions, KerrFit,
    RamseyConfig, RamseyDataset,
};
pub use snap::{
    error_budget, ideal_snap_displacements, ideal_snap_error, incoherent_error_map, optimize_snap, prepare_snap,
    realized_block_amplitudes, simulate_snap_prep, snap_levels, ErrorBudget, SelectivePulse, SnapOptimization,
    SnapOptions, SnapPreparation, SnapPrepResult, SnapSpec,
};

/// Analytic number-split qubit spectrum, frequencies relative to the
/// vacuum qubit line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectrumModel<T: Real = f64> {
    /// GHz
    pub peak_centers: Vec<T>,
    pub weights: Vec<T>,
    /// Full width at half maximum (GHz).
    pub linewidth: T,
}

impl<T: Real> SpectrumModel<T> {
    /// Sum of unit-height Lorentzians scaled by the peak weights.
    pub fn evaluate(&self, freq: T) -> T {
        let hw = self.linewidth / lit::<T>(2.0);
        self.peak_centers
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (c, w)| {
                let x = (freq - *c) / hw;
                acc + *w / (T::one() + x * x)
            })
    }

    pub fn total_weight(&self) -> T {
        self.weights.iter().fold(T::zero(), |a, w| a + *w)
    }
}

/// Poisson-weighted peaks at `n·χ` for a coherent state `|α⟩`. Peaks are
/// kept until the remaining Poisson tail drops below 1e-12.
pub fn number_split_spectrum<T: Real>(alpha: Cx<T>, chi: T, linewidth: T) -> Result<SpectrumModel<T>> {
    if !(linewidth > T::zero()) {
        return Err(invalid("linewidth", "must be positive"));
    }
    if !chi.is_finite() || !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(invalid("alpha", "alpha and chi must be finite"));
    }
    let mean = alpha.norm_sqr();
    let cap = (mean + lit::<T>(12.0) * mean.sqrt() + lit::<T>(30.0)).ceil().to_usize().unwrap_or(64);
    let all = poisson_weights(mean, cap);
    let mut tail = T::one() - all.iter().fold(T::zero(), |a, p| a + *p);
    let mut len = all.len();
    while len > 1 && tail + all[len - 1] < lit::<T>(1e-12) {
        tail += all[len - 1];
        len -= 1;
    }
    Ok(SpectrumModel {
        peak_centers: (0..len).map(|n| chi * from_usize::<T>(n)).collect(),
        weights: all[..len].to_vec(),
        linewidth,
    })
}

/// Vacuum probability of `|α⟩`: `e^{−|α|²}`.
pub fn poisson_overlap<T: Real>(alpha: Cx<T>) -> T {
    (-alpha.norm_sqr()).exp()
}

/// AC Stark shift of the qubit line for a coherent state: `χ|α|²`.
pub fn ac_stark_detuning<T: Real>(alpha: Cx<T>, chi: T) -> T {
    chi * alpha.norm_sqr()
}

/// Real-valued function sampled on a rectangular patch of phase space.
/// `values[i][j]` belongs to `im_axis()[i]` and `re_axis()[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PhaseSpaceGrid<T: Real = f64> {
    pub re_range: (T, T),
    pub im_range: (T, T),
    pub resolution: usize,
    pub values: Vec<Vec<T>>,
}

impl<T: Real> PhaseSpaceGrid<T> {
    pub fn new(re_range: (T, T), im_range: (T, T), resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(invalid("resolution", "need at least 2 points per axis"));
        }
        if !(re_range.1 > re_range.0) || !(im_range.1 > im_range.0) {
            return Err(invalid("range", "upper bound must exceed lower bound"));
        }
        Ok(Self { re_range, im_range, resolution, values: vec![vec![T::zero(); resolution]; resolution] })
    }

    /// Square grid `[−r, r]²`.
    pub fn square(r: T, resolution: usize) -> Result<Self> {
        Self::new((-r, r), (-r, r), resolution)
    }

    fn axis(range: (T, T), n: usize) -> Vec<T> {
        let step = (range.1 - range.0) / from_usize::<T>(n - 1);
        (0..n).map(|k| range.0 + step * from_usize::<T>(k)).collect()
    }

    pub fn re_axis(&self) -> Vec<T> {
        Self::axis(self.re_range, self.resolution)
    }

    pub fn im_axis(&self) -> Vec<T> {
        Self::axis(self.im_range, self.resolution)
    }

    /// Phase-space points in row-major order.
    pub fn points(&self) -> Vec<Cx<T>> {
        let re = self.re_axis();
        self.im_axis().iter().flat_map(|y| re.iter().map(move |x| Cx::new(*x, *y))).collect()
    }

    pub fn cell_area(&self) -> T {
        let n = from_usize::<T>(self.resolution - 1);
        (self.re_range.1 - self.re_range.0) / n * ((self.im_range.1 - self.im_range.0) / n)
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> T {
        let n = self.resolution;
        let half = lit::<T>(0.5);
        let w = |k: usize| if k == 0 || k == n - 1 { half } else { T::one() };
        let mut acc = T::zero();
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                acc += *v * w(i) * w(j);
            }
        }
        acc * self.cell_area()
    }

    pub fn max(&self) -> T {
        self.values.iter().flatten().fold(T::neg_infinity(), |m, v| m.max(*v))
    }

    pub fn min(&self) -> T {
        self.values.iter().flatten().fold(T::infinity(), |m, v| m.min(*v))
    }

    /// Value at the grid point closest to `alpha`.
    pub fn nearest(&self, alpha: Cx<T>) -> T {
        let idx = |v: T, range: (T, T)| {
            let f = (v - range.0) / (range.1 - range.0) * from_usize::<T>(self.resolution - 1);
            f.round().max(T::zero()).min(from_usize::<T>(self.resolution - 1)).to_usize().unwrap_or(0)
        };
        self.values[idx(alpha.im, self.im_range)][idx(alpha.re, self.re_range)]
    }

    pub(crate) fn fill(&mut self, values: Vec<T>) {
        let n = self.resolution;
        self.values = values.chunks(n).map(|c| c.to_vec()).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn vacuum_spectrum_is_single_peak() {
        let s = number_split_spectrum(cx(0.0_f64, 0.0), 1e-3, 1e-4).unwrap();
        assert_eq!(s.peak_centers, vec![0.0]);
        assert!((s.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn split_peaks_follow_poisson() {
        let s = number_split_spectrum(cx(1.0_f64, 0.0), 1.0e-3, 1e-4).unwrap();
        assert!((s.peak_centers[1] - s.peak_centers[0] - 1.0e-3).abs() < 1e-15);
        let mut fact = 1.0;
        for n in 0..6 {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((s.weights[n] - (-1.0_f64).exp() / fact).abs() < 1e-15);
        }
        assert!((s.total_weight() - 1.0).abs() < 1e-12);
        assert!(number_split_spectrum(cx(1.0_f64, 0.0), 1e-3, 0.0).is_err());
    }

    #[test]
    fn calibration_formulas() {
        assert_eq!(poisson_overlap(cx(0.0_f64, 0.0)), 1.0);
        assert!((poisson_overlap(cx(0.6_f64, 0.8)) - (-1.0_f64).exp()).abs() < 1e-15);
        assert!((ac_stark_detuning(cx(2.0_f64, 0.0), 1.013e-3) - 4.052e-3).abs() < 1e-15);
        assert_eq!(ac_stark_detuning(cx(0.0_f64, 0.0), 1.013e-3), 0.0);
    }

    #[test]
    fn grid_axes_and_integral() {
        let mut g = PhaseSpaceGrid::square(1.0_f64, 11).unwrap();
        assert_eq!(g.re_axis()[5], 0.0);
        g.fill(vec![1.0; 121]);
        assert!((g.integral() - 4.0).abs() < 1e-12);
        assert!(PhaseSpaceGrid::square(1.0_f64, 1).is_err());
    }
}
