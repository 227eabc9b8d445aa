use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fock::displacement_operator;
use crate::linalg::{hermitian_min_eigenvalue, CMatrix};
use crate::scalar::{cx, czero, from_usize, lit, Cx, Real};

/// Density matrix of qubit ⊗ storage, index `q·fock_dim + n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real = f64> {
    fock_dim: usize,
    data: CMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(fock_dim: usize, data: CMatrix<T>) -> Result<Self> {
        if data.rows() != 2 * fock_dim || data.cols() != 2 * fock_dim {
            return Err(invalid("rho", format!("expected {0}x{0} matrix", 2 * fock_dim)));
        }
        Ok(Self { fock_dim, data })
    }

    pub(crate) fn from_raw(fock_dim: usize, data: CMatrix<T>) -> Self {
        Self { fock_dim, data }
    }

    pub fn from_pure(fock_dim: usize, psi: &[Cx<T>]) -> Result<Self> {
        if psi.len() != 2 * fock_dim {
            return Err(invalid("psi", format!("expected length {}", 2 * fock_dim)));
        }
        Ok(Self { fock_dim, data: CMatrix::outer(psi, psi) })
    }

    /// `(p_g|g⟩⟨g| + (1 − p_g)|e⟩⟨e|) ⊗ |ψ⟩⟨ψ|` for a storage vector `ψ`.
    pub fn product_mixed(p_ground: T, psi: &[Cx<T>]) -> Self {
        let n = psi.len();
        let mut data = CMatrix::zeros(2 * n, 2 * n);
        for (q, p) in [(0, p_ground), (1, T::one() - p_ground)] {
            if p == T::zero() {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    data.set(q * n + i, q * n + j, psi[i] * psi[j].conj() * p);
                }
            }
        }
        Self { fock_dim: n, data }
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.data
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.data.get(i, j)
    }

    pub fn trace(&self) -> T {
        self.data.trace().re
    }

    pub fn purity(&self) -> T {
        self.data.trace_product(&self.data).re
    }

    pub fn hermiticity_error(&self) -> T {
        self.data.hermiticity_error()
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        hermitian_min_eigenvalue(&self.data)
    }

    /// Checks the Hermiticity, trace and positivity invariants within `tol`.
    pub fn validate(&self, tol: T) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(invalid("rho", format!("not Hermitian (error {herm:e})")));
        }
        let tr = self.trace();
        if (tr - T::one()).abs() > tol {
            return Err(invalid("rho", format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -tol {
            return Err(invalid("rho", format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn excited_population(&self) -> T {
        let n = self.fock_dim;
        (0..n).fold(T::zero(), |acc, i| acc + self.data.get(n + i, n + i).re)
    }

    /// `P(n)` traced over the qubit.
    pub fn photon_distribution(&self) -> Vec<T> {
        let n = self.fock_dim;
        (0..n).map(|i| self.data.get(i, i).re + self.data.get(n + i, n + i).re).collect()
    }

    pub fn mean_photons(&self) -> T {
        self.photon_distribution()
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (n, p)| acc + from_usize::<T>(n) * *p)
    }

    /// `Tr(ρ s)`
    pub fn storage_mean_field(&self) -> Cx<T> {
        let n = self.fock_dim;
        let mut acc = czero::<T>();
        for q in 0..2 {
            for k in 1..n {
                // Tr(ρ s) = Σ_k √k ρ_{k,k-1}
                acc += self.data.get(q * n + k, q * n + k - 1) * from_usize::<T>(k).sqrt();
            }
        }
        acc
    }

    /// Storage state with the qubit traced out.
    pub fn storage_reduced(&self) -> CMatrix<T> {
        let n = self.fock_dim;
        CMatrix::from_fn(n, n, |i, j| self.data.get(i, j) + self.data.get(n + i, n + j))
    }

    /// `⟨ψ|ρ|ψ⟩` for a full qubit ⊗ storage vector.
    pub fn fidelity_pure(&self, psi: &[Cx<T>]) -> T {
        self.data.expectation(psi).re
    }

    /// `⟨ψ|ρ_s|ψ⟩` for a storage vector, qubit traced out.
    pub fn storage_fidelity(&self, psi: &[Cx<T>]) -> T {
        self.storage_reduced().expectation(psi).re
    }

    /// `(I ⊗ U) ρ (I ⊗ U)†` for a storage operator `U`.
    pub fn apply_storage_unitary(&self, u: &CMatrix<T>) -> Self {
        let n = self.fock_dim;
        let ud = u.adjoint();
        let mut out = CMatrix::zeros(2 * n, 2 * n);
        for q in 0..2 {
            for p in 0..2 {
                let block = CMatrix::from_fn(n, n, |i, j| self.data.get(q * n + i, p * n + j));
                let b = u.matmul(&block).matmul(&ud);
                for i in 0..n {
                    for j in 0..n {
                        out.set(q * n + i, p * n + j, b.get(i, j));
                    }
                }
            }
        }
        Self { fock_dim: n, data: out }
    }

    /// `(V ⊗ I) ρ (V ⊗ I)†` for a 2×2 qubit operator `V`.
    pub fn apply_qubit_unitary(&self, v: &CMatrix<T>) -> Self {
        let n = self.fock_dim;
        let mut out = CMatrix::zeros(2 * n, 2 * n);
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = czero::<T>();
                        for c in 0..2 {
                            for d in 0..2 {
                                acc += v.get(a, c) * self.data.get(c * n + i, d * n + j) * v.get(b, d).conj();
                            }
                        }
                        out.set(a * n + i, b * n + j, acc);
                    }
                }
            }
        }
        Self { fock_dim: n, data: out }
    }

    /// `U ρ U†` for a full-space operator.
    pub fn apply_unitary(&self, u: &CMatrix<T>) -> Self {
        Self { fock_dim: self.fock_dim, data: u.matmul(&self.data).matmul(&u.adjoint()) }
    }

    /// Same state embedded in (or cut down to) a different Fock truncation.
    pub fn resized(&self, fock_dim: usize) -> Self {
        let n = self.fock_dim;
        let m = fock_dim.min(n);
        let mut out = CMatrix::zeros(2 * fock_dim, 2 * fock_dim);
        for q in 0..2 {
            for p in 0..2 {
                for i in 0..m {
                    for j in 0..m {
                        out.set(q * fock_dim + i, p * fock_dim + j, self.data.get(q * n + i, p * n + j));
                    }
                }
            }
        }
        Self { fock_dim, data: out }
    }

    /// Row-major `(re, im)` arrays for JSON export.
    pub fn to_parts(&self) -> (Vec<f64>, Vec<f64>) {
        let s = self.data.as_slice();
        (s.iter().map(|z| crate::scalar::to_f64(z.re)).collect(), s.iter().map(|z| crate::scalar::to_f64(z.im)).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct DensityMatrixJson {
    fock_dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl<T: Real> Serialize for DensityMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (re, im) = self.to_parts();
        DensityMatrixJson { fock_dim: self.fock_dim, re, im }.serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for DensityMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DensityMatrixJson::deserialize(d)?;
        let dim = 2 * raw.fock_dim;
        if raw.re.len() != dim * dim || raw.im.len() != dim * dim {
            return Err(serde::de::Error::custom("density matrix arrays have the wrong length"));
        }
        let data = CMatrix::from_fn(dim, dim, |i, j| cx(lit::<T>(raw.re[i * dim + j]), lit::<T>(raw.im[i * dim + j])));
        Ok(Self { fock_dim: raw.fock_dim, data })
    }
}

/// Rejects displacements the truncation cannot represent (`|α|² > N/4`).
pub fn check_displacement_guard<T: Real>(alpha: Cx<T>, fock_dim: usize) -> Result<()> {
    let need = lit::<T>(4.0) * alpha.norm_sqr();
    if need > from_usize::<T>(fock_dim) {
        let required = need.ceil().to_usize().unwrap_or(usize::MAX);
        return Err(Error::Truncation(format!(
            "displacement |alpha|^2 = {} needs fock_dim >= {required} (have {fock_dim})",
            alpha.norm_sqr()
        )));
    }
    Ok(())
}

/// `D(α) ρ D(α)†` acting on the storage, with `D` the exponential of
/// `α s† − α* s` on the truncated space.
pub fn displace<T: Real>(rho: &DensityMatrix<T>, alpha: Cx<T>) -> Result<DensityMatrix<T>> {
    check_displacement_guard(alpha, rho.fock_dim())?;
    if alpha == czero::<T>() {
        return Ok(rho.clone());
    }
    Ok(rho.apply_storage_unitary(&displacement_operator(alpha, rho.fock_dim())))
}

/// `D(α)|ψ⟩` for a storage vector.
pub fn displace_storage_vector<T: Real>(psi: &[Cx<T>], alpha: Cx<T>) -> Vec<Cx<T>> {
    displacement_operator(alpha, psi.len()).mul_vec(psi)
}
