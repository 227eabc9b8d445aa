//! Derivative-free minimization and scalar root finding.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

#[derive(Clone, Copy, Debug)]
pub struct NelderMead<T: Real> {
    pub max_evals: usize,
    /// Stop when the simplex spread in `f` falls below this.
    pub ftol: T,
    /// Stop when every vertex lies within this distance of the best one.
    pub xtol: T,
}

impl<T: Real> Default for NelderMead<T> {
    fn default() -> Self {
        Self { max_evals: 2000, ftol: lit::<T>(1e-10), xtol: lit::<T>(1e-8) }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum<T: Real> {
    pub x: Vec<T>,
    pub value: T,
    pub evals: usize,
    pub converged: bool,
}

impl<T: Real> NelderMead<T> {
    /// Minimizes `f` from `x0` with initial simplex edges `step`. Uses the
    /// dimension-adaptive coefficients; NaN objective values count as +inf.
    pub fn minimize<F: FnMut(&[T]) -> T>(&self, mut f: F, x0: &[T], step: &[T]) -> Minimum<T> {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[T], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                T::infinity()
            } else {
                v
            }
        };
        if n == 0 {
            let v = eval(x0, &mut evals);
            return Minimum { x: Vec::new(), value: v, evals, converged: true };
        }
        let nf = from_usize::<T>(n);
        let one = T::one();
        let alpha = one;
        let beta = one + lit::<T>(2.0) / nf;
        let gamma = lit::<T>(0.75) - lit::<T>(0.5) / nf;
        let delta = one - one / nf;

        let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += step[i];
            simplex.push(v);
        }
        let mut values: Vec<T> = simplex.iter().map(|v| eval(v, &mut evals)).collect();
        let mut converged = false;

        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread_f = (values[n] - values[0]).abs();
            let spread_x = simplex[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (*a - *b).abs()))
                .fold(T::zero(), |m, d| m.max(d));
            if spread_f <= self.ftol && spread_x <= self.xtol {
                converged = true;
                break;
            }

            let mut centroid = vec![T::zero(); n];
            for v in &simplex[..n] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += *x / nf;
                }
            }
            let along = |s: T| -> Vec<T> {
                centroid.iter().zip(&simplex[n]).map(|(c, w)| *c + s * (*c - *w)).collect()
            };
            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr < values[0] {
                let xe = along(beta);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }
            let (xc, fc) = if fr < values[n] {
                let xc = along(gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-gamma);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }
            // shrink towards the best vertex
            for i in 1..=n {
                let v: Vec<T> = simplex[0].iter().zip(&simplex[i]).map(|(b, x)| *b + delta * (*x - *b)).collect();
                values[i] = eval(&v, &mut evals);
                simplex[i] = v;
            }
        }
        let best = (0..=n)
            .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(0);
        Minimum { x: simplex[best].clone(), value: values[best], evals, converged }
    }
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
pub fn golden_section<T: Real, F: FnMut(T) -> T>(mut f: F, mut a: T, mut b: T, tol: T, max_iter: usize) -> (T, T) {
    let r = (lit::<T>(5.0).sqrt() - T::one()) / lit::<T>(2.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect<T: Real, F: FnMut(T) -> Result<T>>(mut f: F, mut a: T, mut b: T, tol: T, max_iter: usize) -> Result<T> {
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::NotBracketed(format!(
            "f({:.6e}) = {:.3e} and f({:.6e}) = {:.3e} have the same sign",
            to_f64(a),
            to_f64(fa),
            to_f64(b),
            to_f64(fb)
        )));
    }
    for _ in 0..max_iter {
        let m = (a + b) / lit::<T>(2.0);
        if (b - a).abs() <= tol {
            return Ok(m);
        }
        let fm = f(m)?;
        if fm == T::zero() {
            return Ok(m);
        }
        if (fm > T::zero()) == (fa > T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a + b) / lit::<T>(2.0))
}
