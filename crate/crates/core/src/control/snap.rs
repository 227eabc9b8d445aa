use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    displace, evolve, qubit_pulse, DensityMatrix, DriveTerm, EffectiveModel, InitialState, LossRates, PulseShape,
};
use crate::error::{invalid, Result};
use crate::fock::{coherent_amplitudes, displacement_elements};
use crate::optimize::{golden_section, NelderMead};
use crate::scalar::{cis, cx, czero, from_usize, lit, two_pi, Cx, Real};

/// One photon-number-selective drive component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct SelectivePulse<T: Real = f64> {
    pub fock: usize,
    /// Amplitude (GHz); the rotation angle on an isolated line is
    /// `2π λ T_slow`, so `λ = 1/(2 T_slow)` is a π pulse.
    pub lambda: T,
    /// Carrier `e^{iωt}` (GHz); the resonance of peak `n` is `ω = −nχ`.
    pub omega: T,
    /// rad
    pub alpha: T,
}

/// Displacement, selective-π SNAP and displacement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct SnapSpec<T: Real = f64> {
    pub theta: Vec<T>,
    pub alpha1: Cx<T>,
    pub alpha2: Cx<T>,
    pub selective: Vec<SelectivePulse<T>>,
    /// ns
    pub t_slow: T,
    /// ns
    pub t_fast: T,
}

impl<T: Real> SnapSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_fast > T::zero()) || !(self.t_slow > self.t_fast) {
            return Err(invalid("t_slow", "need t_slow > t_fast > 0"));
        }
        Ok(())
    }

    pub fn theta_at(&self, n: usize) -> T {
        self.theta.get(n).copied().unwrap_or(T::zero())
    }

    pub fn duration(&self) -> T {
        self.t_slow + self.t_fast
    }

    /// Multiplexed selective Gaussian drives on `[0, t_slow]`.
    pub fn selective_drives(&self, chi: T) -> Result<Vec<DriveTerm<T>>> {
        let tp = two_pi::<T>();
        let half = lit::<T>(0.5);
        self.selective
            .iter()
            .map(|p| {
                let dw = p.omega + chi * from_usize::<T>(p.fock);
                let phase = p.alpha - tp * dw * self.t_slow * half;
                qubit_pulse(PulseShape::Gaussian, self.t_slow, -p.omega, phase, tp * p.lambda * self.t_slow)
            })
            .collect()
    }

    /// Unconditional Gaussian π pulse on `[t_slow, t_slow + t_fast]`.
    pub fn fast_drive(&self) -> Result<DriveTerm<T>> {
        Ok(qubit_pulse(PulseShape::Gaussian, self.t_fast, T::zero(), T::zero(), T::PI())?.starting_at(self.t_slow))
    }

    pub fn drives(&self, chi: T) -> Result<Vec<DriveTerm<T>>> {
        let mut d = self.selective_drives(chi)?;
        d.push(self.fast_drive()?);
        Ok(d)
    }
}

/// Storage vector `S(θ) D(α) |0⟩` (untruncated displacement, then cut).
fn ideal_snap_state<T: Real>(theta: &[T], alpha1: Cx<T>, dim: usize) -> Vec<Cx<T>> {
    coherent_amplitudes(alpha1, dim)
        .into_iter()
        .enumerate()
        .map(|(n, c)| c * cis(theta.get(n).copied().unwrap_or(T::zero())))
        .collect()
}

/// `|⟨ψ|D(α₂)|φ⟩|²` with exact displacement matrix elements.
fn displaced_overlap<T: Real>(target: &[Cx<T>], alpha2: Cx<T>, phi: &[Cx<T>]) -> T {
    let d = displacement_elements(alpha2, target.len(), phi.len());
    let v = d.mul_vec(phi);
    target.iter().zip(&v).fold(czero::<T>(), |a, (t, x)| a + t.conj() * *x).norm_sqr()
}

/// Error `1 − |⟨ψ|D(α₂) S(θ) D(α₁)|0⟩|²` of the ideal gate sequence.
pub fn ideal_snap_error<T: Real>(theta: &[T], alpha1: Cx<T>, alpha2: Cx<T>, target: &[Cx<T>]) -> T {
    let dim = work_dim(alpha1, alpha2, target.len());
    let phi = ideal_snap_state(theta, alpha1, dim);
    T::one() - displaced_overlap(target, alpha2, &phi)
}

fn work_dim<T: Real>(a1: Cx<T>, a2: Cx<T>, base: usize) -> usize {
    let r = a1.norm() + a2.norm() + from_usize::<T>(base).sqrt();
    (r * r + lit::<T>(8.0) * r + lit::<T>(12.0)).ceil().to_usize().unwrap_or(64).max(base)
}

/// Real displacements `(α₁, α₂)` maximizing the ideal-SNAP fidelity to the
/// target, with the resulting error. Coarse grid, then simplex refinement.
pub fn ideal_snap_displacements<T: Real>(theta: &[T], target: &[Cx<T>]) -> Result<(T, T, T)> {
    if target.is_empty() {
        return Err(invalid("target", "empty target state"));
    }
    let err = |a1: T, a2: T| ideal_snap_error(theta, cx(a1, T::zero()), cx(a2, T::zero()), target);
    let step = lit::<T>(0.05);
    let mut best = (T::zero(), T::zero(), err(T::zero(), T::zero()));
    for i in 1..=50 {
        let a1 = step * from_usize::<T>(i);
        for j in 0..=100 {
            let a2 = step * (from_usize::<T>(j) - lit::<T>(50.0));
            let e = err(a1, a2);
            if e < best.2 {
                best = (a1, a2, e);
            }
        }
    }
    let nm = NelderMead { max_evals: 800, ftol: lit::<T>(1e-14), xtol: lit::<T>(1e-9) };
    let m = nm.minimize(|x| err(x[0], x[1]), &[best.0, best.1], &[step / lit::<T>(2.0), step / lit::<T>(2.0)]);
    Ok((m.x[0], m.x[1], m.value))
}

/// Photon numbers `0..=n` whose weight exceeds `cutoff`, with `n` the
/// largest such level.
pub fn snap_levels<T: Real>(weights: &[T], cutoff: T) -> Vec<usize> {
    let top = weights.iter().rposition(|w| *w > cutoff).unwrap_or(0);
    (0..=top).collect()
}

/// Fixed-step exponential-midpoint propagation of every photon-number
/// block from `|g⟩`. Returns `(⟨g|U_n|g⟩, ⟨e|U_n|g⟩)` for `n < blocks`.
pub fn realized_block_amplitudes<T: Real>(
    spec: &SnapSpec<T>,
    model: &EffectiveModel<T>,
    blocks: usize,
    dt: T,
) -> Result<Vec<(Cx<T>, Cx<T>)>> {
    spec.validate()?;
    let drives = spec.drives(model.chi)?;
    let mut state: Vec<(Cx<T>, Cx<T>)> = vec![(cx(T::one(), T::zero()), czero::<T>()); blocks];
    let tp = two_pi::<T>();
    let half = lit::<T>(0.5);
    let stage = |state: &mut Vec<(Cx<T>, Cx<T>)>, t0: T, t1: T, h_target: T| {
        let steps = ((t1 - t0) / h_target).ceil().to_usize().unwrap_or(1).max(1);
        let h = (t1 - t0) / from_usize::<T>(steps);
        let th = tp * h;
        for k in 0..steps {
            let t = t0 + h * (from_usize::<T>(k) + half);
            let mut c = czero::<T>();
            for d in &drives {
                c += d.coefficient(t);
            }
            for (n, (a, b)) in state.iter_mut().enumerate() {
                // H = [[0, c*], [c, s]] = (s/2) I + x σx + y σy − (s/2) σz
                let s = model.chi * from_usize::<T>(n);
                let (x, y, z) = (c.re, c.im, -s * half);
                let r = (x * x + y * y + z * z).sqrt();
                let glob = cis(-th * s * half);
                let (sn, cs) = (th * r).sin_cos();
                let (u00, u01, u10, u11) = if r > T::zero() {
                    let f = sn / r;
                    (
                        cx(cs, -f * z),
                        cx(-f * y, -f * x),
                        cx(f * y, -f * x),
                        cx(cs, f * z),
                    )
                } else {
                    (cx(T::one(), T::zero()), czero::<T>(), czero::<T>(), cx(T::one(), T::zero()))
                };
                let na = (u00 * *a + u01 * *b) * glob;
                let nb = (u10 * *a + u11 * *b) * glob;
                *a = na;
                *b = nb;
            }
        }
    };
    stage(&mut state, T::zero(), spec.t_slow, dt);
    stage(&mut state, spec.t_slow, spec.duration(), dt / lit::<T>(5.0));
    let total = spec.duration();
    for (n, (a, b)) in state.iter_mut().enumerate() {
        let nf = from_usize::<T>(n);
        let kerr = cis(-tp * half * model.kerr * nf * (nf - T::one()) * total);
        *a *= kerr;
        *b *= kerr;
    }
    Ok(state)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct SnapOptions<T: Real = f64> {
    #[serde(default)]
    pub seed: u64,
    /// Coordinate-descent passes over the driven levels.
    #[serde(default = "default_sweeps")]
    pub sweeps: usize,
    /// Photon numbers with weight below this are not driven.
    #[serde(default = "default_cutoff")]
    pub level_cutoff: T,
    /// Propagation step of the selective stage (ns).
    #[serde(default = "default_dt")]
    pub dt: T,
    #[serde(default = "default_evals")]
    pub max_evals_per_level: usize,
}

fn default_sweeps() -> usize {
    4
}
fn default_cutoff<T: Real>() -> T {
    lit::<T>(1e-5)
}
fn default_dt<T: Real>() -> T {
    lit::<T>(0.5)
}
fn default_evals() -> usize {
    160
}

impl<T: Real> Default for SnapOptions<T> {
    fn default() -> Self {
        Self {
            seed: 0,
            sweeps: default_sweeps(),
            level_cutoff: default_cutoff(),
            dt: default_dt(),
            max_evals_per_level: default_evals(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SnapOptimization<T: Real = f64> {
    pub spec: SnapSpec<T>,
    /// Weighted loss-free gate infidelity on the driven subspace.
    pub infidelity: T,
    pub evals: usize,
    /// False when the infidelity stays above 0.05.
    pub converged: bool,
}

/// Infidelity `1 − |Σ_n w_n u_n e^{−iθ_n}|²` for normalized weights.
fn weighted_infidelity<T: Real>(amps: &[(Cx<T>, Cx<T>)], weights: &[T], spec: &SnapSpec<T>) -> T {
    let mut s = czero::<T>();
    for (n, ((u, _), w)) in amps.iter().zip(weights).enumerate() {
        s += *u * cis(-spec.theta_at(n)) * *w;
    }
    T::one() - s.norm_sqr()
}

/// Optimizes the selective drive parameters so that the loss-free block
/// propagators realize `S(θ)` on the photon distribution of `D(α₁)|0⟩`.
pub fn optimize_snap<T: Real>(
    theta: &[T],
    alpha1: Cx<T>,
    model: &EffectiveModel<T>,
    t_slow: T,
    t_fast: T,
    opts: &SnapOptions<T>,
) -> Result<SnapOptimization<T>> {
    model.validate()?;
    let dim = work_dim(alpha1, czero::<T>(), model.fock_dim);
    let mut weights: Vec<T> = coherent_amplitudes(alpha1, dim).iter().map(|c| c.norm_sqr()).collect();
    let levels = snap_levels(&weights, opts.level_cutoff);
    let blocks = (levels.len() + 1).min(model.fock_dim);
    if levels.len() > model.fock_dim {
        return Err(invalid("alpha1", "driven photon numbers exceed the model truncation"));
    }
    weights.truncate(blocks);
    let norm = weights.iter().fold(T::zero(), |a, w| a + *w);
    weights.iter_mut().for_each(|w| *w /= norm);

    let lambda0 = T::one() / (lit::<T>(2.0) * t_slow);
    let mut spec = SnapSpec {
        theta: theta.to_vec(),
        alpha1,
        alpha2: czero::<T>(),
        selective: levels
            .iter()
            .map(|&n| SelectivePulse {
                fock: n,
                lambda: lambda0,
                omega: -model.chi * from_usize::<T>(n),
                alpha: theta.get(n).copied().unwrap_or(T::zero()),
            })
            .collect(),
        t_slow,
        t_fast,
    };
    spec.validate()?;
    let mut evals = 0usize;
    let cost = |s: &SnapSpec<T>, evals: &mut usize| -> T {
        *evals += 1;
        match realized_block_amplitudes(s, model, blocks, opts.dt) {
            Ok(a) => weighted_infidelity(&a, &weights, s),
            Err(_) => T::infinity(),
        }
    };

    // align each block's phase with the target before the simplex passes
    for _ in 0..3 {
        let amps = realized_block_amplitudes(&spec, model, blocks, opts.dt)?;
        evals += 1;
        let mut s = czero::<T>();
        for (n, ((u, _), w)) in amps.iter().zip(&weights).enumerate() {
            s += *u * cis(-spec.theta_at(n)) * *w;
        }
        let global = s.arg();
        for p in spec.selective.iter_mut() {
            let u = amps[p.fock].0;
            if u.norm() > lit::<T>(1e-6) {
                let err = (u * cis(-spec.theta.get(p.fock).copied().unwrap_or(T::zero()) - global)).arg();
                p.alpha -= err;
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..spec.selective.len()).collect();
    let nm = NelderMead { max_evals: opts.max_evals_per_level, ftol: lit::<T>(1e-12), xtol: lit::<T>(1e-6) };
    let mut best = cost(&spec, &mut evals);
    for sweep in 0..opts.sweeps {
        if sweep > 0 {
            order.shuffle(&mut rng);
        }
        for &i in &order {
            let base = spec.clone();
            let p0 = base.selective[i];
            let x0 = [p0.lambda / lambda0, p0.omega * t_slow, p0.alpha];
            let step = [lit::<T>(0.03), lit::<T>(0.05), lit::<T>(0.05)];
            let m = nm.minimize(
                |x| {
                    let mut s = base.clone();
                    s.selective[i].lambda = x[0] * lambda0;
                    s.selective[i].omega = x[1] / t_slow;
                    s.selective[i].alpha = x[2];
                    cost(&s, &mut evals)
                },
                &x0,
                &step,
            );
            if m.value < best {
                best = m.value;
                spec.selective[i].lambda = m.x[0] * lambda0;
                spec.selective[i].omega = m.x[1] / t_slow;
                spec.selective[i].alpha = m.x[2];
            }
        }
    }
    Ok(SnapOptimization { spec, infidelity: best, evals, converged: best <= lit::<T>(0.05) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SnapPreparation<T: Real = f64> {
    pub spec: SnapSpec<T>,
    /// Error of the ideal gate sequence with the chosen displacements.
    pub ideal_error: T,
    /// Loss-free error with the optimized pulses (block propagators).
    pub realized_error: T,
    pub optimization: SnapOptimization<T>,
}

/// Chooses displacements for `target`, optimizes the selective pulses and
/// re-tunes `α₂` against the realized gate.
pub fn prepare_snap<T: Real>(
    theta: &[T],
    target: &[Cx<T>],
    model: &EffectiveModel<T>,
    t_slow: T,
    t_fast: T,
    opts: &SnapOptions<T>,
) -> Result<SnapPreparation<T>> {
    let (a1, a2, ideal_error) = ideal_snap_displacements(theta, target)?;
    let alpha1 = cx(a1, T::zero());
    let opt = optimize_snap(theta, alpha1, model, t_slow, t_fast, opts)?;
    let dim = work_dim(alpha1, cx(a2, T::zero()), target.len());
    let amps = realized_block_amplitudes(&opt.spec, model, dim.min(model.fock_dim), opts.dt)?;
    let coh = coherent_amplitudes(alpha1, dim);
    // the qubit is traced out, so both branches count
    let branch = |e: bool| -> Vec<Cx<T>> {
        (0..dim)
            .map(|n| match amps.get(n) {
                Some((u, v)) => coh[n] * if e { *v } else { *u },
                None => czero::<T>(),
            })
            .collect()
    };
    let (phi_g, phi_e) = (branch(false), branch(true));
    let span = lit::<T>(0.3);
    let (b2, f) = golden_section(
        |x| -(displaced_overlap(target, cx(x, T::zero()), &phi_g) + displaced_overlap(target, cx(x, T::zero()), &phi_e)),
        a2 - span,
        a2 + span,
        lit::<T>(1e-7),
        200,
    );
    let mut spec = opt.spec.clone();
    spec.alpha2 = cx(b2, T::zero());
    Ok(SnapPreparation { spec, ideal_error, realized_error: T::one() + f, optimization: opt })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SnapPrepResult<T: Real = f64> {
    pub rho: DensityMatrix<T>,
    /// `⟨ψ|ρ_s|ψ⟩` with the qubit traced out.
    pub fidelity: T,
}

fn padded<T: Real>(v: &[Cx<T>], dim: usize) -> Vec<Cx<T>> {
    (0..dim).map(|n| v.get(n).copied().unwrap_or(czero::<T>())).collect()
}

/// Master-equation run of `D(α₂) · SNAP · D(α₁)` on `init`, with ideal
/// instantaneous displacements and the SNAP drives under `losses`.
pub fn simulate_snap_prep<T: Real>(
    spec: &SnapSpec<T>,
    model: &EffectiveModel<T>,
    losses: &LossRates<T>,
    init: &InitialState<T>,
    target: &[Cx<T>],
    tol: T,
) -> Result<SnapPrepResult<T>> {
    spec.validate()?;
    let n = model.fock_dim;
    let rho0 = displace(&init.density(n)?, spec.alpha1)?;
    let drives = spec.drives(model.chi)?;
    let traj = evolve(&rho0, model, &drives, losses, &[spec.duration()], tol)?;
    let rho = displace(traj.last(), spec.alpha2)?;
    let psi = padded(target, n);
    let fidelity = rho.storage_fidelity(&psi);
    Ok(SnapPrepResult { rho, fidelity })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ErrorBudget<T: Real = f64> {
    pub intrinsic: T,
    /// Weighted contributions; they sum to `total − intrinsic`.
    pub per_channel: Vec<(String, T)>,
    /// Unweighted one-channel-at-a-time contributions.
    pub raw: Vec<(String, T)>,
    pub total: T,
}

/// One-channel-at-a-time error budget. The raw contribution of a loss
/// channel is its error above the loss-free run; coherent errors are the
/// loss-free run above the ideal gate sequence.
pub fn error_budget<T: Real>(
    spec: &SnapSpec<T>,
    model: &EffectiveModel<T>,
    losses: &LossRates<T>,
    init: &InitialState<T>,
    target: &[Cx<T>],
    tol: T,
) -> Result<ErrorBudget<T>> {
    let intrinsic = ideal_snap_error(&spec.theta, spec.alpha1, spec.alpha2, target);
    let perfect = InitialState { qubit_ground_population: T::one(), ..*init };
    let none = LossRates::none();
    let runs: Vec<(&str, LossRates<T>, InitialState<T>)> = vec![
        ("loss_free", none, perfect),
        ("qubit_initialization", none, *init),
        ("storage_t1", LossRates { kappa_s: losses.kappa_s, ..none }, perfect),
        ("qubit_depolarization", LossRates { gamma_down: losses.gamma_down, gamma_up: losses.gamma_up, ..none }, perfect),
        ("qubit_dephasing", LossRates { gamma_phi: losses.gamma_phi, ..none }, perfect),
        ("total", *losses, *init),
    ];
    let errs: Vec<Result<T>> = runs
        .par_iter()
        .map(|(_, l, i)| Ok(T::one() - simulate_snap_prep(spec, model, l, i, target, tol)?.fidelity))
        .collect();
    let errs: Vec<T> = errs.into_iter().collect::<Result<_>>()?;
    let base = errs[0];
    let total = errs[5];
    let mut raw: Vec<(String, T)> = runs[1..5].iter().zip(&errs[1..5]).map(|((name, _, _), e)| (name.to_string(), *e - base)).collect();
    raw.push(("coherent".to_string(), base - intrinsic));
    let sum = raw.iter().fold(T::zero(), |a, (_, e)| a + *e);
    let scale = if sum != T::zero() { (total - intrinsic) / sum } else { T::zero() };
    let per_channel = raw.iter().map(|(n, e)| (n.clone(), *e * scale)).collect();
    Ok(ErrorBudget { intrinsic, per_channel, raw, total })
}

/// Incoherent error of the selective stage on a grid of storage lifetimes
/// and qubit pure-dephasing times (µs; infinity switches a channel off).
/// Losses act during the selective pulses only; the fast pulse is run
/// loss-free. Entry `[i][j]` belongs to `t1s_grid[i]`, `tphi_grid[j]`.
pub fn incoherent_error_map<T: Real>(
    spec: &SnapSpec<T>,
    model: &EffectiveModel<T>,
    base_losses: &LossRates<T>,
    t1s_grid: &[T],
    tphi_grid: &[T],
    tol: T,
) -> Result<Vec<Vec<T>>> {
    spec.validate()?;
    if t1s_grid.is_empty() || tphi_grid.is_empty() {
        return Err(invalid("grid", "lifetime grids must be non-empty"));
    }
    if t1s_grid.iter().chain(tphi_grid).any(|t| !(*t > T::zero())) {
        return Err(invalid("grid", "lifetimes must be positive"));
    }
    let n = model.fock_dim;
    let rho0 = displace(&InitialState::ground_vacuum().density(n)?, spec.alpha1)?;
    let selective = spec.selective_drives(model.chi)?;
    // resonant with a constant phase, so it can restart the clock at zero
    let fast = spec.fast_drive()?.starting_at(T::zero());
    let mut target = ideal_snap_state(&spec.theta, spec.alpha1, n);
    let norm = target.iter().fold(T::zero(), |a, c| a + c.norm_sqr()).sqrt();
    target.iter_mut().for_each(|c| *c /= norm);

    let run = |losses: &LossRates<T>| -> Result<T> {
        let a = evolve(&rho0, model, &selective, losses, &[spec.t_slow], tol)?;
        let b = evolve(a.last(), model, std::slice::from_ref(&fast), &LossRates::none(), &[spec.t_fast], tol)?;
        Ok(T::one() - b.last().storage_fidelity(&target))
    };
    let coherent = run(&LossRates { kappa_s: T::zero(), gamma_phi: T::zero(), ..*base_losses })?;
    let cells: Vec<(usize, usize)> = (0..t1s_grid.len()).flat_map(|i| (0..tphi_grid.len()).map(move |j| (i, j))).collect();
    let out: Vec<Result<T>> = cells
        .par_iter()
        .map(|&(i, j)| {
            let rate = |t: T| if t.is_infinite() { T::zero() } else { T::one() / t };
            let l = LossRates { kappa_s: rate(t1s_grid[i]), gamma_phi: rate(tphi_grid[j]), ..*base_losses };
            Ok(run(&l)? - coherent)
        })
        .collect();
    let flat: Vec<T> = out.into_iter().collect::<Result<_>>()?;
    Ok(flat.chunks(tphi_grid.len()).map(|c| c.to_vec()).collect())
}
