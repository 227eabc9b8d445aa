//! Harmonic-oscillator (Fock basis) operators and coherent-state helpers.

use faer::Mat;

use crate::linalg::CMatrix;
use crate::scalar::{cx, czero, from_usize, Cx, Real};

/// Truncated annihilation operator `a|n> = sqrt(n)|n-1>`.
pub fn annihilation<T: Real>(dim: usize) -> Mat<T> {
    Mat::from_fn(dim, dim, |i, j| if j == i + 1 { from_usize::<T>(j).sqrt() } else { T::zero() })
}

/// Number operator `a†a`.
pub fn number<T: Real>(dim: usize) -> Mat<T> {
    Mat::from_fn(dim, dim, |i, j| if i == j { from_usize(i) } else { T::zero() })
}

/// Complex annihilation operator.
pub fn annihilation_c<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            cx(from_usize::<T>(j).sqrt(), T::zero())
        } else {
            czero::<T>()
        }
    })
}

pub fn number_c<T: Real>(dim: usize) -> CMatrix<T> {
    CMatrix::from_fn(dim, dim, |i, j| if i == j { cx(from_usize(i), T::zero()) } else { czero::<T>() })
}

/// `|n⟩` in a space of dimension `dim`.
pub fn basis_vector<T: Real>(n: usize, dim: usize) -> Vec<Cx<T>> {
    let mut v = vec![czero::<T>(); dim];
    v[n] = cx(T::one(), T::zero());
    v
}

/// Poisson probabilities `e^{-m} m^n / n!` for `n < len`.
pub fn poisson_weights<T: Real>(mean: T, len: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(len);
    let mut p = (-mean).exp();
    for n in 0..len {
        if n > 0 {
            p = p * mean / from_usize::<T>(n);
        }
        out.push(p);
    }
    out
}

/// Fock amplitudes `e^{-|α|²/2} α^n / sqrt(n!)` of the coherent state `|α>`.
pub fn coherent_amplitudes<T: Real>(alpha: Cx<T>, len: usize) -> Vec<Cx<T>> {
    let mut out = Vec::with_capacity(len);
    let mut c = cx((-alpha.norm_sqr() / (T::one() + T::one())).exp(), T::zero());
    for n in 0..len {
        if n > 0 {
            c = c * alpha / from_usize::<T>(n).sqrt();
        }
        out.push(c);
    }
    out
}

/// Matrix elements `<m|D(α)|n>` of the untruncated displacement operator
/// for `m < rows`, `n < cols`, from the associated-Laguerre closed form.
pub fn displacement_elements<T: Real>(alpha: Cx<T>, rows: usize, cols: usize) -> CMatrix<T> {
    let x = alpha.norm_sqr();
    let pref = (-x / (T::one() + T::one())).exp();
    let mut out = CMatrix::zeros(rows, cols);
    // For m >= n: sqrt(n!/m!) α^{m-n} L_n^{(m-n)}(|α|²); for m < n the
    // mirrored formula with -α*.
    let n_max = rows.max(cols);
    for k in 0..n_max {
        // k = |m - n|, walk the diagonal band k
        let len = if k < rows { (rows - k).min(cols) } else { 0 };
        let len_up = if k < cols { (cols - k).min(rows) } else { 0 };
        let longest = len.max(len_up);
        if longest == 0 {
            continue;
        }
        let a = from_usize::<T>(k);
        let mut l_prev = T::zero();
        let mut l_cur = T::one();
        // ratio(n) = sqrt(n!/(n+k)!) * |α|^k, updated multiplicatively.
        let mut ratio = T::one();
        for j in 1..=k {
            ratio /= from_usize::<T>(j).sqrt();
        }
        let phase_down = alpha.powu(k as u32);
        let phase_up = (-alpha.conj()).powu(k as u32);
        for n in 0..longest {
            if n > 0 {
                let nf = from_usize::<T>(n);
                let two = T::one() + T::one();
                let next = ((two * nf - T::one() + a - x) * l_cur - (nf - T::one() + a) * l_prev) / nf;
                l_prev = l_cur;
                l_cur = next;
                ratio *= (nf / (nf + a)).sqrt();
            }
            let mag = pref * ratio * l_cur;
            if n < len {
                out.set(n + k, n, phase_down * mag);
            }
            if k > 0 && n < len_up {
                out.set(n, n + k, phase_up * mag);
            }
        }
    }
    out
}

/// Unitary displacement on the truncated space: `exp(α a† − α* a)`.
pub fn displacement_operator<T: Real>(alpha: Cx<T>, dim: usize) -> CMatrix<T> {
    let a = annihilation_c::<T>(dim);
    let gen = &a.adjoint().scale(alpha) - &a.scale(alpha.conj());
    gen.expm()
}
