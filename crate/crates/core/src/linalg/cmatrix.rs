use std::ops::{Add, AddAssign, Mul, Sub, SubAssign};

use crate::scalar::{cone, czero, from_usize, lit, Cx, Real};

/// Small dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![czero::<T>(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = cone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[Cx<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    /// `|v><w|`
    pub fn outer(v: &[Cx<T>], w: &[Cx<T>]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cx<T>) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: Cx<T>) {
        self.data[i * self.cols + j] += v;
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Cx<T>] {
        &mut self.data
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|z| *z = czero::<T>());
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, s: Cx<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: Cx<T>, other: &Self) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.rows.min(self.cols)).fold(czero::<T>(), |acc, i| acc + self.get(i, i))
    }

    pub fn diag(&self) -> Vec<Cx<T>> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m + z.norm_sqr()).sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |s, i| s + self.get(i, j).norm()))
            .fold(T::zero(), T::max)
    }

    /// `max |M - M†|`
    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `out = self * rhs`, reusing `out`'s storage.
    pub fn matmul_into(&self, rhs: &Self, out: &mut Self) {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        out.rows = self.rows;
        out.cols = rhs.cols;
        out.data.clear();
        out.data.resize(self.rows * rhs.cols, czero::<T>());
        let n = rhs.cols;
        for i in 0..self.rows {
            let orow = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let mut out = Self::zeros(self.rows, rhs.cols);
        self.matmul_into(rhs, &mut out);
        out
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(v).fold(czero::<T>(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `<v|M|v>` (v not conjugated by the caller).
    pub fn expectation(&self, v: &[Cx<T>]) -> Cx<T> {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (br, bc) = (rhs.rows, rhs.cols);
        Self::from_fn(self.rows * br, self.cols * bc, |i, j| {
            self.get(i / br, j / bc) * rhs.get(i % br, j % bc)
        })
    }

    /// `Tr(self * rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> Cx<T> {
        assert_eq!(self.cols, rhs.rows);
        assert_eq!(self.rows, rhs.cols);
        let mut acc = czero::<T>();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.get(i, k) * rhs.get(k, i);
            }
        }
        acc
    }

    /// Matrix exponential by scaling and squaring with a Taylor kernel.
    pub fn expm(&self) -> Self {
        assert!(self.is_square(), "expm needs a square matrix");
        let n = self.rows;
        let norm = self.one_norm();
        let half: T = lit::<T>(0.5);
        let mut squarings = 0u32;
        let mut scale = T::one();
        while norm * scale > half {
            scale *= half;
            squarings += 1;
        }
        let a = self.scale_real(scale);
        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        let mut tmp = Self::zeros(n, n);
        let tol = T::epsilon() * lit::<T>(0.01);
        for k in 1..=30usize {
            term.matmul_into(&a, &mut tmp);
            std::mem::swap(&mut term, &mut tmp);
            let inv_k = T::one() / from_usize::<T>(k);
            term.data.iter_mut().for_each(|z| *z *= inv_k);
            result += &term;
            if term.max_abs() <= tol * result.max_abs() {
                break;
            }
        }
        for _ in 0..squarings {
            result.matmul_into(&result.clone(), &mut tmp);
            std::mem::swap(&mut result, &mut tmp);
        }
        result
    }
}

impl<T: Real> Add<&CMatrix<T>> for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<T: Real> Sub<&CMatrix<T>> for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<T: Real> Mul<&CMatrix<T>> for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> AddAssign<&CMatrix<T>> for CMatrix<T> {
    fn add_assign(&mut self, rhs: &CMatrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<T: Real> SubAssign<&CMatrix<T>> for CMatrix<T> {
    fn sub_assign(&mut self, rhs: &CMatrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}
