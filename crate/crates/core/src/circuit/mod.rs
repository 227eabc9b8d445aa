//! Truncated-basis circuit Hamiltonians: fluxonium, transmon and harmonic
//! modes, and their charge-coupled products.
//!
//! Units: every energy is a linear frequency in GHz (`E/h`). External flux
//! is given in units of the flux quantum, so `0.5` is half flux.
//!
//! Product-basis ordering is fixed: the qubit index varies slowest, then the
//! modes in the order they appear in [`CircuitSpec::modes`]. Coupled
//! Hamiltonians are assembled in the eigenbasis of the bare qubit
//! (optionally truncated to its lowest `qubit_levels` states) tensored with
//! Fock states, which is also the basis used for dressed-state labels.

mod coupled;
mod fluxonium;
mod transmon;

pub use coupled::{build_coupled_hamiltonian, build_coupled_in_basis, build_coupled_system, ProductBasis, QubitBasis};
pub use fluxonium::{build_fluxonium_operators, FluxoniumOperators};
pub use transmon::{build_transmon_hamiltonian, transmon_operators};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Default cap on the coupled product dimension.
pub const DEFAULT_MAX_DIM: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct FluxoniumParams<T: Real = f64> {
    #[serde(rename = "e_c_ghz")]
    pub e_c: T,
    #[serde(rename = "e_l_ghz")]
    pub e_l: T,
    #[serde(rename = "e_j_ghz")]
    pub e_j: T,
    /// External flux in units of the flux quantum.
    #[serde(rename = "flux_phi0")]
    pub flux: T,
    /// Number of array junctions; recorded for provenance only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_jj: Option<u32>,
}

impl<T: Real> FluxoniumParams<T> {
    pub fn new(e_c: T, e_l: T, e_j: T, flux: T) -> Self {
        Self { e_c, e_l, e_j, flux, n_jj: None }
    }

    pub fn with_flux(&self, flux: T) -> Self {
        Self { flux, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_c > T::zero()) {
            return Err(invalid("e_c", "charging energy must be positive"));
        }
        if !(self.e_l > T::zero()) {
            return Err(invalid("e_l", "inductive energy must be positive"));
        }
        if !(self.e_j >= T::zero()) {
            return Err(invalid("e_j", "Josephson energy must be non-negative"));
        }
        if !self.flux.is_finite() {
            return Err(invalid("flux", "external flux must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct TransmonParams<T: Real = f64> {
    #[serde(rename = "e_c_ghz")]
    pub e_c: T,
    #[serde(rename = "e_j_ghz")]
    pub e_j: T,
    /// Charge basis spans `-n_cutoff..=n_cutoff`.
    pub n_cutoff: usize,
}

impl<T: Real> TransmonParams<T> {
    pub fn new(e_c: T, e_j: T, n_cutoff: usize) -> Self {
        Self { e_c, e_j, n_cutoff }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_c > T::zero()) {
            return Err(invalid("e_c", "charging energy must be positive"));
        }
        if !(self.e_j > T::zero()) {
            return Err(invalid("e_j", "Josephson energy must be positive"));
        }
        if self.n_cutoff < 5 {
            return Err(Error::Truncation(format!("transmon n_cutoff {} < 5", self.n_cutoff)));
        }
        Ok(())
    }
}

/// A qubit given directly by its level energies and charge matrix
/// elements in its own eigenbasis. The charge operator is `charge` when
/// `charge_imaginary` is false and `i·charge` otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct LevelStub<T: Real = f64> {
    #[serde(rename = "energies_ghz")]
    pub energies: Vec<T>,
    pub charge: Vec<Vec<T>>,
    #[serde(default)]
    pub charge_imaginary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Real")]
pub enum QubitParams<T: Real = f64> {
    Fluxonium(FluxoniumParams<T>),
    Transmon(TransmonParams<T>),
    Levels(LevelStub<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct HarmonicModeParams<T: Real = f64> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "bare_freq_ghz")]
    pub bare_freq: T,
    #[serde(rename = "coupling_g_ghz")]
    pub coupling_g: T,
    pub fock_dim: usize,
}

impl<T: Real> HarmonicModeParams<T> {
    pub fn new(bare_freq: T, coupling_g: T, fock_dim: usize) -> Self {
        Self { name: None, bare_freq, coupling_g, fock_dim }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_owned());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bare_freq > T::zero()) {
            return Err(invalid("bare_freq", "mode frequency must be positive"));
        }
        if !self.coupling_g.is_finite() {
            return Err(invalid("coupling_g", "coupling must be finite"));
        }
        if self.fock_dim < 2 {
            return Err(Error::Truncation(format!("fock_dim {} < 2", self.fock_dim)));
        }
        Ok(())
    }
}

/// Coupling term kept in the coupled Hamiltonian.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// Full charge coupling `-i g n (a - a†)`.
    #[default]
    Charge,
    /// Excitation-conserving part only (qubit raised while a photon is
    /// absorbed and vice versa), with respect to the qubit eigenbasis.
    RotatingWave,
}

/// Device-table metadata carried alongside a circuit. Not used by the
/// Hamiltonian builders.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_r_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_storage_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_qubit_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_ramsey_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_echo_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_ground_population: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initialized_ground_population: Option<f64>,
    /// Measured half-flux values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_readout_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kerr_khz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct CircuitSpec<T: Real = f64> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub qubit: QubitParams<T>,
    pub modes: Vec<HarmonicModeParams<T>>,
    /// Size of the basis the qubit Hamiltonian is built in (harmonic
    /// oscillator levels for fluxonium; ignored for transmon and stubs).
    pub qubit_dim: usize,
    /// Number of qubit eigenstates kept in the coupled problem; all when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit_levels: Option<usize>,
    /// Index into `modes` of the storage mode.
    #[serde(default)]
    pub storage_mode: usize,
    #[serde(default)]
    pub coupling: CouplingForm,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<DeviceMetadata>,
}

fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

impl<T: Real> CircuitSpec<T> {
    pub fn new(qubit: QubitParams<T>, modes: Vec<HarmonicModeParams<T>>, qubit_dim: usize) -> Self {
        Self {
            name: None,
            qubit,
            modes,
            qubit_dim,
            qubit_levels: None,
            storage_mode: 0,
            coupling: CouplingForm::Charge,
            max_dim: DEFAULT_MAX_DIM,
            metadata: None,
        }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.qubit_levels = Some(levels);
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn fluxonium(&self) -> Option<&FluxoniumParams<T>> {
        match &self.qubit {
            QubitParams::Fluxonium(p) => Some(p),
            _ => None,
        }
    }

    /// Copy with the fluxonium flux replaced; no-op for other qubits.
    pub fn at_flux(&self, flux: T) -> Self {
        let mut out = self.clone();
        if let QubitParams::Fluxonium(p) = &mut out.qubit {
            p.flux = flux;
        }
        out
    }

    /// Number of qubit basis states before eigen-truncation.
    pub fn native_qubit_dim(&self) -> usize {
        match &self.qubit {
            QubitParams::Fluxonium(_) => self.qubit_dim,
            QubitParams::Transmon(p) => 2 * p.n_cutoff + 1,
            QubitParams::Levels(s) => s.energies.len(),
        }
    }

    /// Qubit states kept in the coupled problem.
    pub fn kept_qubit_levels(&self) -> usize {
        let native = self.native_qubit_dim();
        self.qubit_levels.map_or(native, |l| l.min(native))
    }

    pub fn product_dim(&self) -> usize {
        self.modes.iter().fold(self.kept_qubit_levels(), |acc, m| acc.saturating_mul(m.fock_dim))
    }

    pub fn validate(&self) -> Result<()> {
        match &self.qubit {
            QubitParams::Fluxonium(p) => {
                p.validate()?;
                if self.qubit_dim < 5 {
                    return Err(Error::Truncation(format!("fluxonium basis dim {} < 5", self.qubit_dim)));
                }
            }
            QubitParams::Transmon(p) => p.validate()?,
            QubitParams::Levels(s) => {
                let n = s.energies.len();
                if n < 2 {
                    return Err(invalid("qubit", "level stub needs at least two levels"));
                }
                if s.charge.len() != n || s.charge.iter().any(|r| r.len() != n) {
                    return Err(invalid("qubit", "charge matrix must be square with one row per level"));
                }
            }
        }
        if let Some(l) = self.qubit_levels {
            if l < 2 {
                return Err(Error::Truncation(format!("qubit_levels {l} < 2")));
            }
        }
        if self.modes.is_empty() {
            return Err(invalid("modes", "at least one (storage) mode is required"));
        }
        if self.storage_mode >= self.modes.len() {
            return Err(invalid("storage_mode", "index out of range"));
        }
        for m in &self.modes {
            m.validate()?;
        }
        let dim = self.product_dim();
        if dim > self.max_dim {
            return Err(Error::DimensionCap { dim, cap: self.max_dim });
        }
        Ok(())
    }
}

/// Shipped device fixtures.
pub mod fixtures {
    use super::CircuitSpec;
    use crate::error::Result;

    pub const DEVICE_A_JSON: &str = include_str!("../../fixtures/device_a.json");
    pub const DEVICE_B_JSON: &str = include_str!("../../fixtures/device_b.json");

    pub fn device_a() -> Result<CircuitSpec> {
        CircuitSpec::from_json(DEVICE_A_JSON)
    }

    pub fn device_b() -> Result<CircuitSpec> {
        CircuitSpec::from_json(DEVICE_B_JSON)
    }
}
