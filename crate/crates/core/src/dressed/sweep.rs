use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{analyze, dressed_spectrum, extract_effective_params, BareLabel, EffectiveParams};
use crate::circuit::CircuitSpec;
use crate::error::{invalid, Error, Result};
use crate::scalar::{from_usize, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub max_p: usize,
    /// Re-evaluate every point with doubled truncations and record the
    /// change in χ and K.
    pub convergence_check: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { max_p: 2, convergence_check: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SweepPoint<T: Real = f64> {
    pub flux: T,
    pub params: EffectiveParams<T>,
    /// `|g⟩ → |e⟩, |f⟩, |h⟩` frequencies with every mode empty (GHz).
    pub transitions: Vec<T>,
    /// `(|Δχ|, |ΔK|)` under doubled truncation (GHz).
    pub convergence: Option<(T, T)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FluxSweepResult<T: Real = f64> {
    pub points: Vec<SweepPoint<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> FluxSweepResult<T> {
    pub fn flux_grid(&self) -> Vec<T> {
        self.points.iter().map(|p| p.flux).collect()
    }

    pub fn params(&self) -> Vec<&EffectiveParams<T>> {
        self.points.iter().map(|p| &p.params).collect()
    }

    /// Linearly interpolated flux values where `f` changes sign.
    pub fn zero_crossings(&self, f: impl Fn(&EffectiveParams<T>) -> T) -> Vec<T> {
        let mut out = Vec::new();
        for w in self.points.windows(2) {
            let (a, b) = (f(&w[0].params), f(&w[1].params));
            if a == T::zero() {
                out.push(w[0].flux);
            } else if a * b < T::zero() {
                out.push(w[0].flux + (w[1].flux - w[0].flux) * a / (a - b));
            }
        }
        if let Some(last) = self.points.last() {
            if f(&last.params) == T::zero() {
                out.push(last.flux);
            }
        }
        out
    }
}

/// Spec with the qubit basis, kept qubit levels and every Fock space doubled.
pub fn doubled_truncation<T: Real>(spec: &CircuitSpec<T>) -> CircuitSpec<T> {
    let mut out = spec.clone();
    out.qubit_dim *= 2;
    out.qubit_levels = spec.qubit_levels.map(|l| 2 * l);
    if let crate::circuit::QubitParams::Transmon(p) = &mut out.qubit {
        p.n_cutoff *= 2;
    }
    for m in &mut out.modes {
        m.fock_dim *= 2;
    }
    out.max_dim = out.max_dim.max(out.product_dim());
    out
}

fn sweep_point<T: Real>(spec: &CircuitSpec<T>, flux: T, opts: &SweepOptions) -> Result<SweepPoint<T>> {
    let at = spec.at_flux(flux);
    let spectrum = dressed_spectrum(&at)?;
    let params = extract_effective_params(&spectrum, opts.max_p)?;
    let modes = spectrum.mode_count();
    let ground = spectrum
        .get(&BareLabel::new(0, vec![0; modes]))
        .ok_or_else(|| Error::IncompleteSpectrum("ground".into()))?
        .energy;
    let transitions = (1..=3)
        .filter_map(|q| spectrum.get(&BareLabel::new(q, vec![0; modes])).map(|s| s.energy - ground))
        .collect();
    let convergence = if opts.convergence_check {
        let fine = analyze(&doubled_truncation(&at), opts.max_p)?;
        Some(((fine.chi - params.chi).abs(), (fine.kerr - params.kerr).abs()))
    } else {
        None
    };
    Ok(SweepPoint { flux, params, transitions, convergence })
}

/// Effective parameters at every flux point, evaluated in parallel; the
/// result is independent of scheduling.
pub fn flux_sweep<T: Real>(spec: &CircuitSpec<T>, flux_grid: &[T], opts: &SweepOptions) -> Result<FluxSweepResult<T>> {
    if flux_grid.is_empty() {
        return Err(invalid("flux_grid", "grid is empty"));
    }
    if flux_grid.iter().any(|f| !f.is_finite()) || flux_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("flux_grid", "grid must be finite and strictly increasing"));
    }
    spec.validate()?;
    let points = flux_grid
        .par_iter()
        .map(|&f| sweep_point(spec, f, opts))
        .collect::<Result<Vec<_>>>()?;
    let warnings = points
        .iter()
        .flat_map(|p| p.params.warnings.iter().map(move |w| format!("flux {}: {w}", p.flux)))
        .collect();
    Ok(FluxSweepResult { points, warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PhotonDeviation<T: Real = f64> {
    pub n: usize,
    /// `ω(n) − ω(0)` with `ω(n) = E(g,n+1) − E(g,n)` (GHz).
    pub deviation: T,
    /// `n·K₂` (GHz).
    pub kerr_line: T,
}

/// Photon-number dependence of the storage frequency for `n ≤ n_max`.
///
/// The storage Fock space is padded internally so the highest requested
/// level is not distorted by the truncation edge.
pub fn photon_number_deviation<T: Real>(spec: &CircuitSpec<T>, n_max: usize) -> Result<Vec<PhotonDeviation<T>>> {
    spec.validate()?;
    let s = spec.storage_mode;
    if spec.modes[s].fock_dim <= n_max + 1 {
        return Err(Error::Truncation(format!(
            "storage fock_dim {} must exceed n_max + 1 = {}",
            spec.modes[s].fock_dim,
            n_max + 1
        )));
    }
    let mut padded = spec.clone();
    padded.modes[s].fock_dim = padded.modes[s].fock_dim.max(n_max + 8);
    padded.max_dim = padded.max_dim.max(padded.product_dim());
    let spectrum = dressed_spectrum(&padded)?;
    let e = (0..=n_max + 1)
        .map(|n| spectrum.storage_energy(0, n).ok_or_else(|| Error::IncompleteSpectrum(format!("(g, {n})"))))
        .collect::<Result<Vec<T>>>()?;
    let k2 = super::finite_difference(&e, 2);
    let w0 = e[1] - e[0];
    Ok((0..=n_max)
        .map(|n| PhotonDeviation { n, deviation: (e[n + 1] - e[n]) - w0, kerr_line: from_usize::<T>(n) * k2 })
        .collect())
}
