use super::integrator::{Dopri5, StepStats};
use super::{DensityMatrix, DriveTarget, DriveTerm, EffectiveModel, LossRates};
use crate::error::{invalid, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cx, czero, from_usize, lit, to_f64, two_pi, Cx, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions<T: Real> {
    /// Relative tolerance of the integrator; invariants may drift by at
    /// most ten times this per µs before the run is rejected.
    pub tol: T,
    /// Compute the smallest eigenvalue of every output state.
    pub check_positivity: bool,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        Self { tol: lit::<T>(1e-8), check_positivity: true }
    }
}

impl<T: Real> EvolveOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<T: Real = f64> {
    pub times: Vec<T>,
    pub states: Vec<DensityMatrix<T>>,
    pub stats: StepStats,
    /// Smallest eigenvalue seen over all output states (when monitored).
    pub min_eigenvalue: Option<T>,
    /// Largest `|Tr ρ − 1|` over all output states.
    pub max_trace_error: T,
}

impl<T: Real> Trajectory<T> {
    pub fn last(&self) -> &DensityMatrix<T> {
        self.states.last().expect("trajectory has at least one state")
    }
}

/// Right-hand side of the master equation
/// `dρ/dt = −i2π[H(t), ρ] + Σ_k D[L_k]ρ` for the effective model.
#[derive(Clone, Debug)]
pub struct Generator<T: Real> {
    fock_dim: usize,
    diag: Vec<T>,
    drives: Vec<DriveTerm<T>>,
    /// Rates in 1/ns.
    rates: LossRates<T>,
    sqrt_n: Vec<T>,
}

impl<T: Real> Generator<T> {
    pub fn new(model: &EffectiveModel<T>, drives: &[DriveTerm<T>], losses: &LossRates<T>) -> Result<Self> {
        model.validate()?;
        losses.validate()?;
        for d in drives {
            d.validate()?;
        }
        Ok(Self {
            fock_dim: model.fock_dim,
            diag: model.diagonal(),
            drives: drives.to_vec(),
            rates: losses.per_ns(),
            sqrt_n: (0..=model.fock_dim).map(|n| from_usize::<T>(n).sqrt()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.fock_dim
    }

    /// Times at which a drive switches on or off.
    pub fn breakpoints(&self) -> Vec<T> {
        self.drives.iter().flat_map(|d| [d.t0, d.end()]).collect()
    }

    /// Summed drive coefficients `(c_qubit, c_storage)` at time `t`.
    pub fn drive_coefficients(&self, t: T) -> (Cx<T>, Cx<T>) {
        let mut cq = czero::<T>();
        let mut cs = czero::<T>();
        for d in &self.drives {
            let c = d.coefficient(t);
            match d.target {
                DriveTarget::Qubit => cq += c,
                DriveTarget::Storage => cs += c,
            }
        }
        (cq, cs)
    }

    /// Writes `dρ/dt` for the row-major `rho` into `out`.
    pub fn apply(&self, t: T, rho: &[Cx<T>], out: &mut [Cx<T>]) {
        let n = self.fock_dim;
        let dim = 2 * n;
        let (cq, cs) = self.drive_coefficients(t);
        let has_q = cq != czero::<T>();
        let has_s = cs != czero::<T>();
        let tp = two_pi::<T>();
        let half = lit::<T>(0.5);
        let r = &self.rates;
        let at = |i: usize, j: usize| rho[i * dim + j];
        let sq = &self.sqrt_n;

        for i in 0..dim {
            let (qi, ni) = (i / n, i % n);
            for j in 0..dim {
                let (qj, nj) = (j / n, j % n);
                // [H, ρ]_ij
                let mut comm = at(i, j) * (self.diag[i] - self.diag[j]);
                if has_q {
                    let hi = if qi == 1 { cq * at(i - n, j) } else { cq.conj() * at(i + n, j) };
                    let hj = if qj == 0 { at(i, j + n) * cq } else { at(i, j - n) * cq.conj() };
                    comm += hi - hj;
                }
                if has_s {
                    let mut hi = czero::<T>();
                    if ni + 1 < n {
                        hi += cs * at(i + 1, j) * sq[ni + 1];
                    }
                    if ni > 0 {
                        hi += cs.conj() * at(i - 1, j) * sq[ni];
                    }
                    let mut hj = czero::<T>();
                    if nj > 0 {
                        hj += at(i, j - 1) * cs * sq[nj];
                    }
                    if nj + 1 < n {
                        hj += at(i, j + 1) * cs.conj() * sq[nj + 1];
                    }
                    comm += hi - hj;
                }
                // −i2π[H, ρ]
                let mut d = cx(comm.im * tp, -comm.re * tp);

                let mut decay = r.kappa_s * half * from_usize::<T>(ni + nj);
                decay += r.gamma_down * half * from_usize::<T>(qi + qj);
                decay += r.gamma_up * half * from_usize::<T>(2 - qi - qj);
                if qi != qj {
                    decay += r.gamma_phi;
                }
                d -= at(i, j) * decay;
                if r.kappa_s != T::zero() && ni + 1 < n && nj + 1 < n {
                    d += at(i + 1, j + 1) * (r.kappa_s * sq[ni + 1] * sq[nj + 1]);
                }
                if qi == 0 && qj == 0 && r.gamma_down != T::zero() {
                    d += at(i + n, j + n) * r.gamma_down;
                }
                if qi == 1 && qj == 1 && r.gamma_up != T::zero() {
                    d += at(i - n, j - n) * r.gamma_up;
                }
                out[i * dim + j] = d;
            }
        }
    }
}

/// Evolves `rho0` under the effective model and returns the state at every
/// time in `t_grid` (ns, non-decreasing, starting at or after 0).
pub fn evolve<T: Real>(
    rho0: &DensityMatrix<T>,
    model: &EffectiveModel<T>,
    drives: &[DriveTerm<T>],
    losses: &LossRates<T>,
    t_grid: &[T],
    tol: T,
) -> Result<Trajectory<T>> {
    evolve_with(rho0, model, drives, losses, t_grid, &EvolveOptions { tol, ..EvolveOptions::default() })
}

pub fn evolve_with<T: Real>(
    rho0: &DensityMatrix<T>,
    model: &EffectiveModel<T>,
    drives: &[DriveTerm<T>],
    losses: &LossRates<T>,
    t_grid: &[T],
    opts: &EvolveOptions<T>,
) -> Result<Trajectory<T>> {
    if rho0.fock_dim() != model.fock_dim {
        return Err(invalid("rho0", format!("fock_dim {} does not match model {}", rho0.fock_dim(), model.fock_dim)));
    }
    if t_grid.is_empty() || !(t_grid[0] >= T::zero()) || t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(invalid("t_grid", "must be non-empty, non-decreasing and start at or after 0"));
    }
    if !(opts.tol > T::zero()) {
        return Err(invalid("tol", "must be positive"));
    }
    rho0.validate(lit::<T>(1e-8).max(opts.tol))?;
    let gen = Generator::new(model, drives, losses)?;
    let fock_dim = model.fock_dim;
    let limit = lit::<T>(10.0) * opts.tol;

    let mut y = rho0.matrix().as_slice().to_vec();
    let mut states = Vec::with_capacity(t_grid.len());
    let mut min_eig: Option<T> = None;
    let mut max_trace_error = T::zero();
    let solver = Dopri5::new(opts.tol);
    let stats = solver.integrate(
        &mut y,
        T::zero(),
        t_grid,
        &gen.breakpoints(),
        |t, rho, out| gen.apply(t, rho, out),
        |_, t, rho| {
            let dim = 2 * fock_dim;
            let m = CMatrix::from_fn(dim, dim, |i, j| rho[i * dim + j]);
            let state = DensityMatrix::from_raw(fock_dim, m);
            let allowance = limit * (T::one() + t * lit::<T>(1e-3));
            let tr_err = (state.trace() - T::one()).abs();
            max_trace_error = max_trace_error.max(tr_err);
            if tr_err > allowance {
                return Err(Error::IntegratorFailure { t: to_f64(t), reason: format!("trace drifted by {}", to_f64(tr_err)) });
            }
            let herm = state.hermiticity_error();
            if herm > allowance {
                return Err(Error::IntegratorFailure { t: to_f64(t), reason: format!("Hermiticity error {}", to_f64(herm)) });
            }
            if opts.check_positivity {
                let e = state.min_eigenvalue()?;
                min_eig = Some(min_eig.map_or(e, |m| m.min(e)));
                if e < -allowance {
                    return Err(Error::IntegratorFailure { t: to_f64(t), reason: format!("negative eigenvalue {}", to_f64(e)) });
                }
            }
            states.push(state);
            Ok(())
        },
    )?;
    Ok(Trajectory { times: t_grid.to_vec(), states, stats, min_eigenvalue: min_eig, max_trace_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{qubit_pulse, InitialState, PulseShape, StorageState};
    use std::f64::consts::PI;

    #[test]
    fn square_pi_pulse_inverts_two_level_system() {
        let model = EffectiveModel::<f64>::new(0.0, 0.0, 2);
        let rho0 = InitialState::ground_vacuum().density(2).unwrap();
        let p = qubit_pulse(PulseShape::Square, 50.0, 0.0, 0.0, PI).unwrap();
        let tr = evolve(&rho0, &model, &[p], &LossRates::none(), &[0.0, 50.0], 1e-9).unwrap();
        assert!((tr.last().excited_population() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn thermalization_reaches_detailed_balance() {
        let losses = LossRates { kappa_s: 0.0, gamma_down: 0.5, gamma_up: 0.25, gamma_phi: 0.0 };
        let model = EffectiveModel::<f64>::new(0.001, 0.0, 3);
        let rho0 = InitialState::ground_vacuum().density(3).unwrap();
        let tr = evolve(&rho0, &model, &[], &losses, &[0.0, 60_000.0], 1e-9).unwrap();
        assert!((tr.last().excited_population() - 0.25 / 0.75).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_time_grid() {
        let model = EffectiveModel::<f64>::new(0.0, 0.0, 3);
        let rho0 = InitialState::new(1.0, StorageState::Fock(1)).density(3).unwrap();
        assert!(evolve(&rho0, &model, &[], &LossRates::none(), &[1.0, 0.5], 1e-8).is_err());
        assert!(evolve(&rho0, &model, &[], &LossRates::none(), &[], 1e-8).is_err());
    }
}
