//! Dense reference propagator shared by the integration tests: the
//! vectorized Lindbladian exponentiated by scaling and squaring.
#![allow(dead_code)]

use fluxqed::dynamics::{DensityMatrix, EffectiveModel, LossRates};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

/// Dense row-major complex matrix used only by the reference propagator.
#[derive(Clone)]
pub struct Dense {
    pub n: usize,
    pub d: Vec<C>,
}

impl Dense {
    pub fn zeros(n: usize) -> Self {
        Self { n, d: vec![C::new(0.0, 0.0); n * n] }
    }
    pub fn eye(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.d[i * n + i] = C::new(1.0, 0.0);
        }
        m
    }
    pub fn at(&self, i: usize, j: usize) -> C {
        self.d[i * self.n + j]
    }
    pub fn mul(&self, o: &Dense) -> Dense {
        let n = self.n;
        let mut r = Dense::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.d[i * n + k];
                if a == C::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    r.d[i * n + j] += a * o.d[k * n + j];
                }
            }
        }
        r
    }
    pub fn dagger(&self) -> Dense {
        let n = self.n;
        let mut r = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                r.d[j * n + i] = self.d[i * n + j].conj();
            }
        }
        r
    }
    pub fn transpose(&self) -> Dense {
        let n = self.n;
        let mut r = Dense::zeros(n);
        for i in 0..n {
            for j in 0..n {
                r.d[j * n + i] = self.d[i * n + j];
            }
        }
        r
    }
    pub fn conj(&self) -> Dense {
        Dense { n: self.n, d: self.d.iter().map(|z| z.conj()).collect() }
    }
    pub fn add(&self, o: &Dense, s: C) -> Dense {
        Dense { n: self.n, d: self.d.iter().zip(&o.d).map(|(a, b)| a + s * b).collect() }
    }
    pub fn kron(&self, o: &Dense) -> Dense {
        let (n, m) = (self.n, o.n);
        let mut r = Dense::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self.at(i, j);
                for k in 0..m {
                    for l in 0..m {
                        r.d[(i * m + k) * n * m + j * m + l] = a * o.at(k, l);
                    }
                }
            }
        }
        r
    }
    pub fn norm1(&self) -> f64 {
        (0..self.n).map(|j| (0..self.n).map(|i| self.at(i, j).norm()).sum::<f64>()).fold(0.0, f64::max)
    }
    /// Scaling and squaring with an 18-term Taylor series.
    pub fn expm(&self) -> Dense {
        let s = (self.norm1().max(1e-300).log2().ceil() + 1.0).max(0.0) as i32;
        let a = Dense { n: self.n, d: self.d.iter().map(|z| z / 2f64.powi(s)).collect() };
        let mut term = Dense::eye(self.n);
        let mut acc = Dense::eye(self.n);
        for k in 1..=18 {
            term = term.mul(&a);
            term.d.iter_mut().for_each(|z| *z /= k as f64);
            acc = acc.add(&term, C::new(1.0, 0.0));
        }
        for _ in 0..s {
            acc = acc.mul(&acc);
        }
        acc
    }
}

/// Operators on qubit ⊗ storage with the qubit index slowest.
pub fn ops(n: usize) -> (Dense, Dense, Dense) {
    let mut a = Dense::zeros(n);
    for k in 1..n {
        a.d[(k - 1) * n + k] = C::new((k as f64).sqrt(), 0.0);
    }
    let mut lower = Dense::zeros(2);
    lower.d[1] = C::new(1.0, 0.0); // |g⟩⟨e|
    let mut sz = Dense::zeros(2);
    sz.d[0] = C::new(-1.0, 0.0);
    sz.d[3] = C::new(1.0, 0.0);
    (Dense::eye(2).kron(&a), lower.kron(&Dense::eye(n)), sz.kron(&Dense::eye(n)))
}

/// Vectorized Lindbladian for constant qubit and storage drive coefficients.
pub fn liouvillian(model: &EffectiveModel<f64>, cq: C, cs: C, losses: &LossRates<f64>) -> Dense {
    let n = model.fock_dim;
    let (a, sm, sz) = ops(n);
    let dim = 2 * n;
    let num = a.dagger().mul(&a);
    let pe = sz.add(&Dense::eye(dim), C::new(1.0, 0.0));
    let mut h = num.mul(&num.add(&Dense::eye(dim), C::new(-1.0, 0.0)));
    h.d.iter_mut().for_each(|z| *z *= 0.5 * model.kerr);
    h = h.add(&pe.mul(&num), C::new(0.5 * model.chi, 0.0));
    h = h.add(&sm.dagger(), cq).add(&sm, cq.conj());
    h = h.add(&a, cs).add(&a.dagger(), cs.conj());

    let id = Dense::eye(dim);
    let mut l = h.kron(&id).add(&id.kron(&h.transpose()), C::new(-1.0, 0.0));
    l.d.iter_mut().for_each(|z| *z *= C::new(0.0, -2.0 * PI));
    let r = losses.per_ns();
    let jumps = [
        (a.clone(), r.kappa_s),
        (sm.clone(), r.gamma_down),
        (sm.dagger(), r.gamma_up),
        (sz.clone(), r.gamma_phi / 2.0),
    ];
    for (op, rate) in jumps {
        if rate == 0.0 {
            continue;
        }
        let ldl = op.dagger().mul(&op);
        let d = op
            .kron(&op.conj())
            .add(&ldl.kron(&id), C::new(-0.5, 0.0))
            .add(&id.kron(&ldl.transpose()), C::new(-0.5, 0.0));
        l = l.add(&d, C::new(rate, 0.0));
    }
    l
}

pub fn propagate(l: &Dense, rho: &DensityMatrix<f64>, t: f64) -> Vec<C> {
    let mut lt = l.clone();
    lt.d.iter_mut().for_each(|z| *z *= t);
    let p = lt.expm();
    let v = rho.matrix().as_slice();
    (0..p.n).map(|i| (0..p.n).map(|j| p.at(i, j) * v[j]).sum()).collect()
}

pub fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

