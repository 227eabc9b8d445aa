//! Dense linear algebra used across the crate.
//!
//! Circuit Hamiltonians are stored as [`HermitianOperator`]s with separate
//! real and imaginary parts. With the Fock-space gauge used by the builders
//! every coupled Hamiltonian has a vanishing imaginary part, so spectra go
//! through faer's real symmetric eigensolver. Density matrices and
//! propagators use the small complex [`CMatrix`].

mod cmatrix;

pub use cmatrix::CMatrix;

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Dense Hermitian matrix `re + i·im` (`re` symmetric, `im` antisymmetric).
#[derive(Clone, Debug)]
pub struct HermitianOperator<T: Real> {
    re: Mat<T>,
    im: Option<Mat<T>>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn real(re: Mat<T>) -> Self {
        assert_eq!(re.nrows(), re.ncols(), "operator must be square");
        Self { re, im: None }
    }

    /// Operator `i·m` for a real antisymmetric `m`.
    pub fn imaginary(m: Mat<T>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        Self { re: Mat::zeros(m.nrows(), m.ncols()), im: Some(m) }
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn re(&self) -> &Mat<T> {
        &self.re
    }

    pub fn im(&self) -> Option<&Mat<T>> {
        self.im.as_ref()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_none()
    }

    /// `(re, im)` of entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> (T, T) {
        let im = self.im.as_ref().map_or(T::zero(), |m| m[(i, j)]);
        (self.re[(i, j)], im)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        let n = self.dim();
        let mut best = T::zero();
        for j in 0..n {
            for i in 0..n {
                let (a, b) = self.entry(i, j);
                best = best.max(a.hypot(b));
            }
        }
        best
    }

    /// `max |M - M†|` relative to `max |M|`.
    pub fn hermiticity_error(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for j in 0..n {
            for i in 0..n {
                let (a, b) = self.entry(i, j);
                let (c, d) = self.entry(j, i);
                worst = worst.max((a - c).hypot(b + d));
            }
        }
        let scale = self.max_abs();
        if scale > T::zero() {
            worst / scale
        } else {
            worst
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() < lit::<T>(1e-12).max(T::epsilon() * lit::<T>(64.0))
    }

    /// Full eigendecomposition; only real operators are supported.
    pub fn eigh(&self) -> Result<Eigensystem<T>> {
        if !self.is_real() {
            return Err(Error::Eigen("operator has a nonzero imaginary part".into()));
        }
        symmetric_eigen(&self.re)
    }

    /// Adds `c·I`.
    pub fn shifted(&self, c: T) -> Self {
        let mut re = self.re.clone();
        for i in 0..self.dim() {
            re[(i, i)] += c;
        }
        Self { re, im: self.im.clone() }
    }

    /// `V^T M V` for a real `V` with orthonormal columns.
    pub fn project(&self, v: &Mat<T>) -> Self {
        let vt = v.transpose();
        let re = vt * &self.re * v;
        let im = self.im.as_ref().map(|m| vt * m * v);
        Self { re, im }
    }

    /// Converts to a complex matrix.
    pub fn to_cmatrix(&self) -> CMatrix<T> {
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| {
            let (a, b) = self.entry(i, j);
            crate::scalar::cx(a, b)
        })
    }
}

/// Ascending eigenvalues with eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigensystem<T: Real> {
    pub values: Vec<T>,
    pub vectors: Mat<T>,
}

impl<T: Real> Eigensystem<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Eigendecomposition of a real symmetric matrix (lower triangle is read).
pub fn symmetric_eigen<T: Real>(m: &Mat<T>) -> Result<Eigensystem<T>> {
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values = (0..m.nrows()).map(|i| s[i]).collect();
    let vectors = evd.U().to_owned();
    Ok(Eigensystem { values, vectors })
}

/// Eigenvalues only.
pub fn symmetric_eigenvalues<T: Real>(m: &Mat<T>) -> Result<Vec<T>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Kronecker product of real matrices.
pub fn kron<T: Real>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn identity<T: Real>(n: usize) -> Mat<T> {
    Mat::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
}

/// Applies `f` to the eigenvalues of a real symmetric matrix.
pub fn symmetric_function<T: Real>(m: &Mat<T>, f: impl Fn(T) -> T) -> Result<Mat<T>> {
    let es = symmetric_eigen(m)?;
    let n = m.nrows();
    let v = &es.vectors;
    let mut out = Mat::<T>::zeros(n, n);
    for k in 0..n {
        let fk = f(es.values[k]);
        for j in 0..n {
            let vjk = v[(j, k)] * fk;
            if vjk == T::zero() {
                continue;
            }
            for i in 0..n {
                out[(i, j)] += v[(i, k)] * vjk;
            }
        }
    }
    Ok(out)
}

/// Smallest eigenvalue of a complex Hermitian matrix, via the real
/// embedding `[[A, -B], [B, A]]` whose spectrum is that of `A + iB` doubled.
pub fn hermitian_min_eigenvalue<T: Real>(m: &CMatrix<T>) -> Result<T> {
    let n = m.rows();
    let big = Mat::<T>::from_fn(2 * n, 2 * n, |i, j| {
        let z = m.get(i % n, j % n);
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let ev = symmetric_eigenvalues(&big)?;
    Ok(ev.first().copied().unwrap_or_else(T::zero))
}
