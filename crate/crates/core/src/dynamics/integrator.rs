//! Dormand–Prince 5(4) with embedded error control.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Cx, Real};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Dopri5<T: Real> {
    pub rtol: T,
    pub atol: T,
    /// Largest step allowed (ns).
    pub h_max: T,
    pub max_steps: usize,
}

impl<T: Real> Dopri5<T> {
    pub fn new(rtol: T) -> Self {
        Self { rtol, atol: rtol * lit::<T>(1e-2), h_max: lit::<T>(1e3), max_steps: 5_000_000 }
    }

    /// Integrates `dy/dt = f(t, y)` from `t_start`, calling `observe` at each
    /// time in `outputs` (ascending, ≥ `t_start`). Steps never cross a
    /// `breakpoint`, so discontinuities in `f` are handled exactly.
    pub fn integrate<F, O>(
        &self,
        y: &mut [Cx<T>],
        t_start: T,
        outputs: &[T],
        breakpoints: &[T],
        mut f: F,
        mut observe: O,
    ) -> Result<StepStats>
    where
        F: FnMut(T, &[Cx<T>], &mut [Cx<T>]),
        O: FnMut(usize, T, &[Cx<T>]) -> Result<()>,
    {
        let n = y.len();
        let mut stats = StepStats::default();
        let mut stops: Vec<T> = outputs.iter().chain(breakpoints).copied().filter(|&s| s > t_start).collect();
        stops.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        stops.dedup();

        let mut k: Vec<Vec<Cx<T>>> = (0..7).map(|_| vec![Cx::new(T::zero(), T::zero()); n]).collect();
        let mut tmp = vec![Cx::new(T::zero(), T::zero()); n];
        let mut y5 = vec![Cx::new(T::zero(), T::zero()); n];
        let mut t = t_start;
        let mut next_out = 0;
        while next_out < outputs.len() && outputs[next_out] <= t_start {
            observe(next_out, outputs[next_out], y)?;
            next_out += 1;
        }
        if next_out == outputs.len() {
            return Ok(stats);
        }
        let t_end = outputs[outputs.len() - 1];

        f(t, y, &mut k[0]);
        stats.rhs_evals += 1;
        let mut h = self.initial_step(y, &k[0]);
        let mut fsal_valid = false;
        let mut stop_idx = 0;

        let (c, a, e) = tableau::<T>();
        let safety = lit::<T>(0.9);
        while t < t_end {
            while stop_idx < stops.len() && stops[stop_idx] <= t {
                stop_idx += 1;
            }
            let stop = stops[stop_idx];
            let mut hit_stop = false;
            h = h.min(self.h_max);
            if t + h >= stop || (stop - t - h) < lit::<T>(1e-9) * h {
                h = stop - t;
                hit_stop = true;
            }
            if h <= T::epsilon() * lit::<T>(16.0) * (t.abs() + T::one()) {
                return Err(Error::StiffIntegration { t: to_f64(t), h: to_f64(h) });
            }
            // stage times are kept strictly inside the step so a drive edge
            // at either end is seen from the correct side
            let nudge = h * lit::<T>(1e-10);
            if !fsal_valid {
                f(t + nudge, y, &mut k[0]);
                stats.rhs_evals += 1;
                fsal_valid = true;
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        if a[s][j] != T::zero() {
                            acc += kj[i] * (h * a[s][j]);
                        }
                    }
                    tmp[i] = acc;
                }
                let ts = if s >= 5 { t + h - nudge } else { t + c[s] * h };
                f(ts, &tmp, &mut k[s]);
                stats.rhs_evals += 1;
                if s == 6 {
                    y5.copy_from_slice(&tmp);
                }
            }
            // the last stage is evaluated at the fifth-order solution (FSAL)
            let mut err = T::zero();
            for i in 0..n {
                let mut d = Cx::new(T::zero(), T::zero());
                for (j, kj) in k.iter().enumerate() {
                    if e[j] != T::zero() {
                        d += kj[i] * (h * e[j]);
                    }
                }
                let scale = self.atol + self.rtol * y[i].norm().max(y5[i].norm());
                err = err.max(d.norm() / scale);
            }
            if !err.is_finite() {
                return Err(Error::IntegratorFailure { t: to_f64(t), reason: "non-finite error estimate".into() });
            }
            if err <= T::one() {
                t = if hit_stop { stop } else { t + h };
                y.copy_from_slice(&y5);
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                stats.accepted += 1;
                while next_out < outputs.len() && outputs[next_out] <= t {
                    observe(next_out, outputs[next_out], y)?;
                    next_out += 1;
                }
                let grow = if err == T::zero() { lit::<T>(5.0) } else { (safety * err.powf(lit::<T>(-0.2))).min(lit::<T>(5.0)) };
                // a clipped step says nothing about the natural step size
                if !hit_stop {
                    h *= grow.max(lit::<T>(0.2));
                }
                if hit_stop {
                    // drive may be discontinuous here
                    fsal_valid = false;
                }
            } else {
                stats.rejected += 1;
                h *= (safety * err.powf(lit::<T>(-0.2))).max(lit::<T>(0.1));
            }
            if stats.accepted + stats.rejected > self.max_steps {
                return Err(Error::IntegratorFailure { t: to_f64(t), reason: "step budget exhausted".into() });
            }
        }
        Ok(stats)
    }

    fn initial_step(&self, y: &[Cx<T>], f0: &[Cx<T>]) -> T {
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for (yi, fi) in y.iter().zip(f0) {
            let sc = self.atol + self.rtol * yi.norm();
            d0 = d0.max(yi.norm() / sc);
            d1 = d1.max(fi.norm() / sc);
        }
        let h = if d0 < lit::<T>(1e-5) || d1 < lit::<T>(1e-5) { lit::<T>(1e-3) } else { lit::<T>(0.01) * d0 / d1 };
        h.min(self.h_max)
    }
}

/// Nodes, stage matrix and error weights `b5 − b4`.
fn tableau<T: Real>() -> ([T; 7], [[T; 6]; 7], [T; 7]) {
    let f = |x: f64| lit::<T>(x);
    let c = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0].map(f);
    let a = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ]
    .map(|r| r.map(f));
    let b5 = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    let b4 = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];
    let e = [0, 1, 2, 3, 4, 5, 6].map(|i| f(b5[i] - b4[i]));
    (c, a, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn exponential_decay_and_rotation() {
        // y' = (-0.3 + 2i) y
        let lam = cx(-0.3_f64, 2.0);
        let mut y = vec![cx(1.0, 0.0)];
        let outs: Vec<f64> = (0..=10).map(|k| k as f64 * 0.5).collect();
        let mut got = Vec::new();
        Dopri5::new(1e-10)
            .integrate(&mut y, 0.0, &outs, &[], |_, y, d| d[0] = lam * y[0], |_, t, y| {
                got.push((t, y[0]));
                Ok(())
            })
            .unwrap();
        assert_eq!(got.len(), 11);
        for (t, v) in got {
            assert!((v - (lam * t).exp()).norm() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn breakpoints_handle_discontinuous_forcing() {
        // y' = 1 on [0, 1), 0 afterwards
        let mut y = vec![cx(0.0_f64, 0.0)];
        Dopri5::new(1e-9)
            .integrate(&mut y, 0.0, &[3.0], &[1.0], |t, _, d| d[0] = cx(if t < 1.0 { 1.0 } else { 0.0 }, 0.0), |_, _, _| Ok(()))
            .unwrap();
        assert!((y[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stiff_problem_reports_underflow_or_budget() {
        let mut y = vec![cx(1.0_f64, 0.0)];
        let mut solver = Dopri5::new(1e-10);
        solver.max_steps = 1000;
        let r = solver.integrate(&mut y, 0.0, &[1.0], &[], |_, y, d| d[0] = y[0] * cx(-1e9, 0.0), |_, _, _| Ok(()));
        assert!(matches!(r, Err(Error::IntegratorFailure { .. }) | Err(Error::StiffIntegration { .. })));
    }
}
