//! Dressed-state labeling and effective cavity-QED parameters.
//!
//! Eigenstates of a coupled Hamiltonian are labeled by the bare product
//! state `(qubit level, photon numbers)` they overlap with most. From the
//! labeled energies the effective model
//! `Ω|e⟩⟨e| + ω a†a + χ a†a|e⟩⟨e| + (K/2) a†a†aa` is read off:
//!
//! * `Ω = E(e,0) − E(g,0)`, `ω = E(g,1) − E(g,0)`
//! * `χ = E(e,1) − E(e,0) − E(g,1) + E(g,0)`
//! * `K_p = Σ_j (−1)^{j+p} C(p,j) E(g,j)`, with `K = K_2`.
//!
//! All energies are in GHz. Modes other than the storage mode are held at
//! zero photons.

mod label;
mod sweep;

pub use label::{diagonalize_and_label, label_eigensystem, BareLabel, DressedSpectrum, DressedState};
pub use sweep::{flux_sweep, photon_number_deviation, FluxSweepResult, PhotonDeviation, SweepOptions, SweepPoint};

use serde::{Deserialize, Serialize};

use crate::circuit::{build_coupled_system, CircuitSpec};
use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, Real};

/// Overlap below which a required label is reported as ambiguous.
pub const AMBIGUOUS_OVERLAP: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EffectiveParams<T: Real = f64> {
    pub omega_qubit: T,
    pub omega_storage: T,
    pub chi: T,
    pub kerr: T,
    /// `(p, K_p)` for `p = 2..=max_p`.
    pub kerr_higher: Vec<(usize, T)>,
    /// Mean `|⟨bare|dressed⟩|²` over `(g,0)`, `(e,0)`, `(g,1)`, `(e,1)`.
    pub hybridization_overlap: T,
    /// `(mode index, χ)` for every non-storage mode.
    #[serde(default)]
    pub chi_other: Vec<(usize, T)>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl<T: Real> EffectiveParams<T> {
    pub fn kerr_p(&self, p: usize) -> Option<T> {
        self.kerr_higher.iter().find(|(q, _)| *q == p).map(|&(_, k)| k)
    }
}

/// `C(p, j)` as an exact float for the small `p` used here.
fn binomial<T: Real>(p: usize, j: usize) -> T {
    let mut c = 1u128;
    for i in 0..j {
        c = c * (p - i) as u128 / (i + 1) as u128;
    }
    lit::<T>(c as f64)
}

/// `Σ_{j=0}^{p} (−1)^{j+p} C(p,j) e[j]`, accumulated from `j = p` down.
pub fn finite_difference<T: Real>(e: &[T], p: usize) -> T {
    let mut acc = T::zero();
    for j in (0..=p).rev() {
        let term = binomial::<T>(p, j) * e[j];
        if (j + p).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

pub fn extract_effective_params<T: Real>(spectrum: &DressedSpectrum<T>, max_p: usize) -> Result<EffectiveParams<T>> {
    if max_p < 2 {
        return Err(invalid("max_p", "need max_p >= 2"));
    }
    let s = spectrum.storage_mode();
    let modes = spectrum.mode_count();
    let mut warnings = Vec::new();
    let mut fetch = |q: usize, mode: usize, n: usize| -> Result<(T, T)> {
        let label = BareLabel::single(q, modes, mode, n);
        let st = spectrum
            .get(&label)
            .ok_or_else(|| Error::IncompleteSpectrum(label.to_string()))?;
        if st.overlap < lit::<T>(AMBIGUOUS_OVERLAP) {
            warnings.push(format!("ambiguous label {label}: overlap {:.3}", st.overlap));
        }
        Ok((st.energy, st.overlap))
    };

    let (g0, o_g0) = fetch(0, s, 0)?;
    let (e0, o_e0) = fetch(1, s, 0)?;
    let (g1, o_g1) = fetch(0, s, 1)?;
    let (e1, o_e1) = fetch(1, s, 1)?;
    let mut eg = vec![g0, g1];
    for n in 2..=max_p {
        eg.push(fetch(0, s, n)?.0);
    }
    let kerr_higher: Vec<(usize, T)> = (2..=max_p).map(|p| (p, finite_difference(&eg, p))).collect();

    let mut chi_other = Vec::new();
    for m in (0..modes).filter(|&m| m != s) {
        let (r_g1, _) = fetch(0, m, 1)?;
        let (r_e1, _) = fetch(1, m, 1)?;
        chi_other.push((m, (r_e1 - e0) - (r_g1 - g0)));
    }

    Ok(EffectiveParams {
        omega_qubit: e0 - g0,
        omega_storage: g1 - g0,
        chi: (e1 - e0) - (g1 - g0),
        kerr: kerr_higher[0].1,
        kerr_higher,
        hybridization_overlap: (o_g0 + o_e0 + o_g1 + o_e1) / lit::<T>(4.0),
        chi_other,
        warnings,
    })
}

/// Builds, diagonalizes and labels `spec`, then extracts its parameters.
pub fn analyze<T: Real>(spec: &CircuitSpec<T>, max_p: usize) -> Result<EffectiveParams<T>> {
    let spectrum = dressed_spectrum(spec)?;
    extract_effective_params(&spectrum, max_p)
}

/// Labeled spectrum of the full coupled Hamiltonian of `spec`.
pub fn dressed_spectrum<T: Real>(spec: &CircuitSpec<T>) -> Result<DressedSpectrum<T>> {
    let (h, basis, _) = build_coupled_system(spec)?;
    let n = h.dim();
    diagonalize_and_label(&h, &basis, spec.storage_mode, n)
}
