//! Lindblad dynamics of the rotating-frame effective model: a two-level
//! qubit `{g, e}` and a truncated storage mode.
//!
//! In the frame rotating at Ω and ω the Hamiltonian is
//! `χ n|e⟩⟨e| + (K/2) s†s†ss + drives`, with every term in GHz and time in
//! ns; states evolve as `e^{-i2πHt}`. Loss rates are given in 1/µs and
//! converted internally. Basis ordering is qubit slowest: index
//! `q·fock_dim + n` with `q = 0` for `g`.

mod drive;
mod integrator;
mod lindblad;
mod sector;
mod state;

pub use drive::{qubit_pulse, storage_pulse, DriveTarget, DriveTerm, PulseShape};
pub use integrator::{Dopri5, StepStats};
pub use lindblad::{evolve, evolve_with, EvolveOptions, Generator, Trajectory};
pub use sector::{evolve_sector, SectorState};
pub use state::{check_displacement_guard, displace, displace_storage_vector, DensityMatrix};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{lit, Cx, Real};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct EffectiveModel<T: Real = f64> {
    #[serde(rename = "chi_ghz")]
    pub chi: T,
    #[serde(rename = "kerr_ghz")]
    pub kerr: T,
    pub fock_dim: usize,
    /// Frame frequencies, kept for bookkeeping only.
    #[serde(default, rename = "omega_qubit_ghz", skip_serializing_if = "Option::is_none")]
    pub omega_qubit: Option<T>,
    #[serde(default, rename = "omega_storage_ghz", skip_serializing_if = "Option::is_none")]
    pub omega_storage: Option<T>,
}

impl<T: Real> EffectiveModel<T> {
    pub fn new(chi: T, kerr: T, fock_dim: usize) -> Self {
        Self { chi, kerr, fock_dim, omega_qubit: None, omega_storage: None }
    }

    pub fn with_fock_dim(&self, fock_dim: usize) -> Self {
        Self { fock_dim, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim
    }

    pub fn validate(&self) -> Result<()> {
        if self.fock_dim < 2 {
            return Err(Error::Truncation(format!("fock_dim {} < 2", self.fock_dim)));
        }
        if !self.chi.is_finite() || !self.kerr.is_finite() {
            return Err(invalid("model", "chi and kerr must be finite"));
        }
        Ok(())
    }

    /// Diagonal of the drift Hamiltonian (GHz).
    pub fn diagonal(&self) -> Vec<T> {
        let half = lit::<T>(0.5);
        (0..self.dim())
            .map(|i| {
                let q = i / self.fock_dim;
                let n = crate::scalar::from_usize::<T>(i % self.fock_dim);
                let mut e = half * self.kerr * n * (n - T::one());
                if q == 1 {
                    e += self.chi * n;
                }
                e
            })
            .collect()
    }
}

/// Loss rates in 1/µs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct LossRates<T: Real = f64> {
    #[serde(rename = "kappa_s_per_us")]
    pub kappa_s: T,
    #[serde(rename = "gamma_down_per_us")]
    pub gamma_down: T,
    #[serde(rename = "gamma_up_per_us")]
    pub gamma_up: T,
    #[serde(rename = "gamma_phi_per_us")]
    pub gamma_phi: T,
}

impl<T: Real> LossRates<T> {
    pub fn none() -> Self {
        Self { kappa_s: T::zero(), gamma_down: T::zero(), gamma_up: T::zero(), gamma_phi: T::zero() }
    }

    /// Rates from coherence times (µs) and the qubit's equilibrium ground
    /// population: `Γ↓ + Γ↑ = 1/T₁`, `Γ↑/(Γ↓ + Γ↑) = 1 − p_g`,
    /// `Γ_φ = 1/T₂ − 1/(2T₁)`.
    pub fn from_coherence(t1_storage: T, t1_qubit: T, t2_qubit: T, ground_population: T) -> Result<Self> {
        let two = lit::<T>(2.0);
        if !(t1_storage > T::zero() && t1_qubit > T::zero() && t2_qubit > T::zero()) {
            return Err(invalid("coherence", "lifetimes must be positive"));
        }
        if !(ground_population >= T::zero() && ground_population <= T::one()) {
            return Err(invalid("ground_population", "must lie in [0, 1]"));
        }
        if t2_qubit > two * t1_qubit {
            return Err(invalid("t2_qubit", "T2 cannot exceed 2 T1"));
        }
        let gamma1 = T::one() / t1_qubit;
        Ok(Self {
            kappa_s: T::one() / t1_storage,
            gamma_down: gamma1 * ground_population,
            gamma_up: gamma1 * (T::one() - ground_population),
            gamma_phi: T::one() / t2_qubit - gamma1 / two,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa_s", self.kappa_s),
            ("gamma_down", self.gamma_down),
            ("gamma_up", self.gamma_up),
            ("gamma_phi", self.gamma_phi),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(invalid(name, "loss rates must be finite and non-negative"));
            }
        }
        Ok(())
    }

    pub fn is_lossless(&self) -> bool {
        self.kappa_s == T::zero() && self.gamma_down == T::zero() && self.gamma_up == T::zero() && self.gamma_phi == T::zero()
    }

    /// Rates in 1/ns.
    pub fn per_ns(&self) -> Self {
        let k = lit::<T>(1e-3);
        Self { kappa_s: self.kappa_s * k, gamma_down: self.gamma_down * k, gamma_up: self.gamma_up * k, gamma_phi: self.gamma_phi * k }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "T: Real")]
pub enum StorageState<T: Real = f64> {
    Vacuum,
    Fock(usize),
    Coherent { re: T, im: T },
}

impl<T: Real> StorageState<T> {
    pub fn coherent(alpha: Cx<T>) -> Self {
        Self::Coherent { re: alpha.re, im: alpha.im }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct InitialState<T: Real = f64> {
    pub qubit_ground_population: T,
    pub storage: StorageState<T>,
}

impl<T: Real> InitialState<T> {
    pub fn ground_vacuum() -> Self {
        Self { qubit_ground_population: T::one(), storage: StorageState::Vacuum }
    }

    pub fn new(qubit_ground_population: T, storage: StorageState<T>) -> Self {
        Self { qubit_ground_population, storage }
    }

    /// `(p_g|g⟩⟨g| + (1 − p_g)|e⟩⟨e|) ⊗ |ψ⟩⟨ψ|`.
    pub fn density(&self, fock_dim: usize) -> Result<DensityMatrix<T>> {
        let p = self.qubit_ground_population;
        if !(p >= T::zero() && p <= T::one()) {
            return Err(invalid("qubit_ground_population", "must lie in [0, 1]"));
        }
        let psi = match self.storage {
            StorageState::Vacuum => crate::fock::basis_vector(0, fock_dim),
            StorageState::Fock(n) => {
                if n >= fock_dim {
                    return Err(Error::Truncation(format!("Fock state {n} needs fock_dim > {n}")));
                }
                crate::fock::basis_vector(n, fock_dim)
            }
            StorageState::Coherent { re, im } => {
                let alpha = Cx::new(re, im);
                state::check_displacement_guard(alpha, fock_dim)?;
                displace_storage_vector(&crate::fock::basis_vector(0, fock_dim), alpha)
            }
        };
        Ok(DensityMatrix::product_mixed(p, &psi))
    }
}
