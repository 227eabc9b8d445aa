use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    displace, evolve, evolve_sector, DensityMatrix, DriveTerm, EffectiveModel, InitialState, LossRates, SectorState,
    StorageState,
};
use crate::error::{invalid, Error, Result};
use crate::fock::{coherent_amplitudes, poisson_weights};
use crate::optimize::{golden_section, NelderMead};
use crate::scalar::{cis, czero, from_usize, lit, to_f64, two_pi, Cx, Real};

/// Displace–wait–displace experiment on the storage. The wait happens in
/// a frame detuned by `detuning` from the storage; the Kerr term is
/// `(K/2) s†s†ss`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct RamseyConfig<T: Real = f64> {
    pub alpha: Cx<T>,
    /// GHz
    pub detuning: T,
    /// GHz
    pub kerr: T,
    /// Dispersive shift used by the readout pulse (GHz).
    #[serde(default)]
    pub chi: T,
    /// ns, non-decreasing
    pub t_grid: Vec<T>,
    #[serde(default)]
    pub losses: Option<LossRates<T>>,
    pub fock_dim: usize,
}

impl<T: Real> RamseyConfig<T> {
    fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() || self.t_grid.windows(2).any(|w| !(w[1] >= w[0])) || !(self.t_grid[0] >= T::zero()) {
            return Err(invalid("t_grid", "must be non-empty, non-decreasing and non-negative"));
        }
        if !self.detuning.is_finite() || !self.kerr.is_finite() {
            return Err(invalid("detuning", "detuning and kerr must be finite"));
        }
        crate::dynamics::check_displacement_guard(self.alpha, self.fock_dim)
    }
}

/// Return probability `|⟨α|U(t)|α⟩|²` with
/// `U(t) = exp[−i2π(Δ s†s + (K/2) s†s†ss) t]`.
pub fn cavity_ramsey_unitary<T: Real>(cfg: &RamseyConfig<T>) -> Result<Vec<(T, T)>> {
    if cfg.losses.as_ref().is_some_and(|l| !l.is_lossless()) {
        return Err(invalid("losses", "the unitary model requires zero losses"));
    }
    cfg.validate()?;
    let amps = coherent_amplitudes(cfg.alpha, cfg.fock_dim);
    let norm = amps.iter().fold(T::zero(), |a, c| a + c.norm_sqr());
    let probs: Vec<T> = amps.iter().map(|c| c.norm_sqr() / norm).collect();
    let tp = two_pi::<T>();
    let half = lit::<T>(0.5);
    Ok(cfg
        .t_grid
        .iter()
        .map(|&t| {
            let mut s = czero::<T>();
            for (n, p) in probs.iter().enumerate() {
                let nf = from_usize::<T>(n);
                let e = cfg.detuning * nf + half * cfg.kerr * nf * (nf - T::one());
                s += cis(-tp * e * t) * *p;
            }
            (t, s.norm_sqr())
        })
        .collect())
}

/// Master-equation cavity Ramsey: displace the vacuum by `α`, wait `t`
/// under Kerr and losses, displace by `−α e^{i2πΔt}` and apply the
/// selective readout pulse on the vacuum peak. Returns `(t, P_e)`.
pub fn cavity_ramsey_master<T: Real>(cfg: &RamseyConfig<T>, selective: &DriveTerm<T>, tol: T) -> Result<Vec<(T, T)>> {
    cfg.validate()?;
    crate::dynamics::check_displacement_guard(cfg.alpha * lit::<T>(2.0), cfg.fock_dim)?;
    let losses = cfg.losses.unwrap_or_else(LossRates::none);
    let model = EffectiveModel::new(cfg.chi, cfg.kerr, cfg.fock_dim);
    let rho0 = InitialState::new(T::one(), StorageState::coherent(cfg.alpha)).density(cfg.fock_dim)?;
    let traj = evolve(&rho0, &model, &[], &losses, &cfg.t_grid, tol)?;
    let pulse = selective.clone().starting_at(T::zero());
    let t_end = [pulse.end()];
    let tp = two_pi::<T>();
    let out: Vec<Result<(T, T)>> = cfg
        .t_grid
        .par_iter()
        .zip(traj.states.par_iter())
        .map(|(&t, rho)| {
            let back = -cfg.alpha * cis(tp * cfg.detuning * t);
            let d: DensityMatrix<T> = displace(rho, back)?;
            let st = SectorState::from_density(&d);
            let fin = evolve_sector(&st, &model, std::slice::from_ref(&pulse), &losses, &t_end, tol)?;
            Ok((t, fin[0].excited_population()))
        })
        .collect();
    out.into_iter().collect()
}

/// Fringe signal for one displacement amplitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RamseyDataset<T: Real = f64> {
    pub alpha: Cx<T>,
    /// `(t, signal)` pairs, t in ns.
    pub series: Vec<(T, T)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct FringeFitOptions<T: Real = f64> {
    /// Search window for the fringe frequency (GHz).
    pub f_min: T,
    pub f_max: T,
    /// Harmonics of the fringe frequency in the periodic model.
    #[serde(default = "default_harmonics")]
    pub harmonics: usize,
    /// Datasets whose fundamental peak-to-peak amplitude falls below this
    /// are excluded.
    #[serde(default = "default_contrast")]
    pub min_contrast: T,
    /// Refine the linear estimate by fitting the return-probability model
    /// to all included datasets at once.
    #[serde(default = "default_refine")]
    pub refine: bool,
}

fn default_refine() -> bool {
    true
}

fn default_harmonics() -> usize {
    12
}

fn default_contrast<T: Real>() -> T {
    lit::<T>(0.02)
}

impl<T: Real> FringeFitOptions<T> {
    pub fn new(f_min: T, f_max: T) -> Self {
        Self { f_min, f_max, harmonics: default_harmonics(), min_contrast: default_contrast(), refine: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FringeFit<T: Real = f64> {
    pub alpha: Cx<T>,
    /// GHz
    pub frequency: T,
    pub contrast: T,
    pub residual_rms: T,
    pub included: bool,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KerrFit<T: Real = f64> {
    /// GHz
    pub kerr: T,
    /// GHz
    pub detuning_offset: T,
    /// Slope and intercept of fringe frequency vs `|α|²` (GHz). Biased at
    /// small `|α|`, where the fringe follows the 0–1 photon beat.
    pub kerr_linear: T,
    pub detuning_linear: T,
    pub fits: Vec<FringeFit<T>>,
}

/// Least-squares fit of `c₀ + Σ_h (a_h cos 2πhft + b_h sin 2πhft)` at fixed
/// `f`; returns (sum of squared residuals, coefficients).
fn harmonic_lsq<T: Real>(series: &[(T, T)], f: T, harmonics: usize) -> Option<(T, Vec<T>)> {
    let m = 2 * harmonics + 1;
    let mut ata = vec![T::zero(); m * m];
    let mut atb = vec![T::zero(); m];
    let mut row = vec![T::zero(); m];
    let tp = two_pi::<T>();
    for &(t, y) in series {
        row[0] = T::one();
        let (s1, c1) = (tp * f * t).sin_cos();
        let (mut s, mut c) = (s1, c1);
        for h in 0..harmonics {
            row[1 + 2 * h] = c;
            row[2 + 2 * h] = s;
            let (ns, nc) = (s * c1 + c * s1, c * c1 - s * s1);
            s = ns;
            c = nc;
        }
        for i in 0..m {
            atb[i] += row[i] * y;
            for j in 0..=i {
                ata[i * m + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            ata[j * m + i] = ata[i * m + j];
        }
    }
    let coef = cholesky_solve(&mut ata, &atb, m)?;
    let mut ssr = T::zero();
    for &(t, y) in series {
        let mut v = coef[0];
        for h in 0..harmonics {
            let ph = tp * f * from_usize::<T>(h + 1) * t;
            v += coef[1 + 2 * h] * ph.cos() + coef[2 + 2 * h] * ph.sin();
        }
        ssr += (y - v) * (y - v);
    }
    Some((ssr, coef))
}

fn cholesky_solve<T: Real>(a: &mut [T], b: &[T], m: usize) -> Option<Vec<T>> {
    let scale = (0..m).fold(T::zero(), |s, i| s.max(a[i * m + i]));
    let floor = scale * lit::<T>(1e-13);
    for j in 0..m {
        let mut d = a[j * m + j];
        for k in 0..j {
            d -= a[j * m + k] * a[j * m + k];
        }
        if !(d > floor) {
            return None;
        }
        let d = d.sqrt();
        a[j * m + j] = d;
        for i in j + 1..m {
            let mut s = a[i * m + j];
            for k in 0..j {
                s -= a[i * m + k] * a[j * m + k];
            }
            a[i * m + j] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..m {
        for k in 0..i {
            y[i] = y[i] - a[i * m + k] * y[k];
        }
        y[i] /= a[i * m + i];
    }
    for i in (0..m).rev() {
        for k in i + 1..m {
            y[i] = y[i] - a[k * m + i] * y[k];
        }
        y[i] /= a[i * m + i];
    }
    Some(y)
}

fn fit_fringe<T: Real>(ds: &RamseyDataset<T>, opts: &FringeFitOptions<T>) -> FringeFit<T> {
    let fail = |note: String| FringeFit {
        alpha: ds.alpha,
        frequency: T::nan(),
        contrast: T::zero(),
        residual_rms: T::nan(),
        included: false,
        note: Some(note),
    };
    if ds.series.len() < 2 * opts.harmonics + 4 {
        return fail("too few samples for the harmonic model".into());
    }
    let (t_lo, t_hi) = ds.series.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), (t, _)| (a.min(*t), b.max(*t)));
    let span = t_hi - t_lo;
    if !(span > T::zero()) {
        return fail("zero time span".into());
    }
    // the residual dip is about 1/(H·span) wide; scan well below that
    let width = opts.f_max - opts.f_min;
    let points = (width * span * from_usize::<T>(opts.harmonics) * lit::<T>(8.0))
        .ceil()
        .to_usize()
        .unwrap_or(20000)
        .clamp(16, 200_000);
    let step = width / from_usize::<T>(points);
    let ssr = |f: T| harmonic_lsq(&ds.series, f, opts.harmonics).map(|(s, _)| s).unwrap_or(T::infinity());
    let mut best = (opts.f_min, T::infinity());
    for k in 0..=points {
        let f = opts.f_min + step * from_usize::<T>(k);
        let s = ssr(f);
        if s < best.1 {
            best = (f, s);
        }
    }
    let lo = (best.0 - step).max(opts.f_min);
    let hi = (best.0 + step).min(opts.f_max);
    let (f, s) = golden_section(ssr, lo, hi, step * lit::<T>(1e-9), 200);
    let Some((_, coef)) = harmonic_lsq(&ds.series, f, opts.harmonics) else {
        return fail("singular normal equations".into());
    };
    let contrast = lit::<T>(2.0) * (coef[1] * coef[1] + coef[2] * coef[2]).sqrt();
    let rms = (s / from_usize::<T>(ds.series.len())).sqrt();
    let mut fit = FringeFit { alpha: ds.alpha, frequency: f, contrast, residual_rms: rms, included: true, note: None };
    if !(contrast >= opts.min_contrast) {
        fit.included = false;
        fit.note = Some(format!("contrast {:.3e} below threshold {:.3e}", to_f64(contrast), to_f64(opts.min_contrast)));
    } else if f <= opts.f_min + step || f >= opts.f_max - step {
        fit.included = false;
        fit.note = Some("fringe frequency at the edge of the search window".into());
    }
    fit
}

/// Fits each dataset's fringe frequency and regresses it on `|α|²`.
pub fn extract_kerr_from_ramsey<T: Real>(datasets: &[RamseyDataset<T>], opts: &FringeFitOptions<T>) -> Result<KerrFit<T>> {
    if !(opts.f_max > opts.f_min) || !(opts.f_min >= T::zero()) {
        return Err(invalid("f_min", "search window must satisfy 0 <= f_min < f_max"));
    }
    if opts.harmonics == 0 {
        return Err(invalid("harmonics", "must be at least 1"));
    }
    let fits: Vec<FringeFit<T>> = datasets.par_iter().map(|d| fit_fringe(d, opts)).collect();
    let used: Vec<(T, T)> = fits.iter().filter(|f| f.included).map(|f| (f.alpha.norm_sqr(), f.frequency)).collect();
    if used.len() < 2 {
        return Err(Error::Optimization(format!("only {} usable fringe datasets, need 2", used.len())));
    }
    let nf = from_usize::<T>(used.len());
    let mx = used.iter().fold(T::zero(), |a, p| a + p.0) / nf;
    let my = used.iter().fold(T::zero(), |a, p| a + p.1) / nf;
    let sxx = used.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.0 - mx));
    if !(sxx > T::zero()) {
        return Err(Error::Optimization("all usable datasets share one |alpha|^2".into()));
    }
    let sxy = used.iter().fold(T::zero(), |a, p| a + (p.0 - mx) * (p.1 - my));
    let kerr_linear = sxy / sxx;
    let detuning_linear = my - kerr_linear * mx;
    let (detuning_offset, kerr) = if opts.refine {
        let included: Vec<&RamseyDataset<T>> = datasets.iter().zip(&fits).filter(|(_, f)| f.included).map(|(d, _)| d).collect();
        refine_model(&included, detuning_linear, kerr_linear)
    } else {
        (detuning_linear, kerr_linear)
    };
    Ok(KerrFit { kerr, detuning_offset, kerr_linear, detuning_linear, fits })
}

/// `|Σ_n p_n e^{−i2π(Δn + (K/2)n(n−1))t}|²` for Poisson weights `p`.
fn return_probability<T: Real>(p: &[T], detuning: T, kerr: T, t: T) -> T {
    let tp = two_pi::<T>();
    let half = lit::<T>(0.5);
    let mut s = czero::<T>();
    for (n, w) in p.iter().enumerate() {
        let nf = from_usize::<T>(n);
        s += cis(-tp * (detuning * nf + half * kerr * nf * (nf - T::one())) * t) * *w;
    }
    s.norm_sqr()
}

/// Joint least-squares fit of `a_j + b_j P(t; α_j, Δ, K)` with per-dataset
/// offset and scale, started from the linear estimate.
fn refine_model<T: Real>(datasets: &[&RamseyDataset<T>], det0: T, kerr0: T) -> (T, T) {
    let weights: Vec<Vec<T>> = datasets
        .iter()
        .map(|d| {
            let m = d.alpha.norm_sqr();
            let len = (m + lit::<T>(10.0) * m.sqrt() + lit::<T>(20.0)).ceil().to_usize().unwrap_or(64);
            poisson_weights(m, len)
        })
        .collect();
    let span = datasets
        .iter()
        .flat_map(|d| d.series.iter().map(|p| p.0))
        .fold(T::zero(), |a, t| a.max(t.abs()))
        .max(T::one());
    let n_max = datasets.iter().fold(T::one(), |a, d| a.max(d.alpha.norm_sqr()));
    let (fs, ks) = (T::one() / span, T::one() / (span * n_max));
    let cost = |x: &[T]| -> T {
        let (det, kerr) = (det0 + x[0] * fs, kerr0 + x[1] * ks);
        datasets
            .par_iter()
            .zip(&weights)
            .map(|(d, p)| {
                let m: Vec<T> = d.series.iter().map(|(t, _)| return_probability(p, det, kerr, *t)).collect();
                affine_residual(&m, &d.series)
            })
            .reduce(T::zero, |a, b| a + b)
    };
    let nm = NelderMead { max_evals: 600, ftol: lit::<T>(1e-15), xtol: lit::<T>(1e-9) };
    let start = [T::zero(), T::zero()];
    let m = nm.minimize(cost, &start, &[lit::<T>(0.02), lit::<T>(0.02)]);
    if m.value < cost(&start) {
        (det0 + m.x[0] * fs, kerr0 + m.x[1] * ks)
    } else {
        (det0, kerr0)
    }
}

/// Residual sum of squares of `y ≈ a + b m` with `(a, b)` solved exactly.
fn affine_residual<T: Real>(m: &[T], series: &[(T, T)]) -> T {
    let n = from_usize::<T>(m.len());
    let mm = m.iter().fold(T::zero(), |a, v| a + *v) / n;
    let my = series.iter().fold(T::zero(), |a, v| a + v.1) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (x, (_, y)) in m.iter().zip(series) {
        let (dx, dy) = (*x - mm, *y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx > T::zero() {
        syy - sxy * sxy / sxx
    } else {
        syy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn cfg(alpha: f64, kerr: f64) -> RamseyConfig<f64> {
        RamseyConfig {
            alpha: cx(alpha, 0.0),
            detuning: 2.0e-3,
            kerr,
            chi: 1.0e-3,
            t_grid: (0..=500).map(|k| 4.0 * k as f64).collect(),
            losses: None,
            fock_dim: 40,
        }
    }

    #[test]
    fn kerr_free_fringes_match_closed_form() {
        let c = cfg(1.5, 0.0);
        for (t, p) in cavity_ramsey_unitary(&c).unwrap() {
            let x = (2.0 * std::f64::consts::PI * c.detuning * t).cos();
            assert!((p - (-2.0 * 2.25 * (1.0 - x)).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_rejects_losses() {
        let mut c = cfg(1.0, 0.0);
        c.losses = Some(LossRates { kappa_s: 0.1, ..LossRates::none() });
        assert!(cavity_ramsey_unitary(&c).is_err());
    }

    #[test]
    fn low_contrast_dataset_is_excluded() {
        let flat = RamseyDataset { alpha: cx(0.01, 0.0), series: (0..200).map(|k| (k as f64, 0.5)).collect() };
        let fit = fit_fringe(&flat, &FringeFitOptions::new(1e-3, 3e-3));
        assert!(!fit.included);
        assert!(fit.note.unwrap().contains("contrast"));
    }

    #[test]
    fn recovers_synthetic_sinusoid_frequency() {
        let ds = RamseyDataset {
            alpha: cx(1.0, 0.0),
            series: (0..400).map(|k| {
                let t = 5.0 * k as f64;
                (t, 0.5 + 0.3 * (2.0 * std::f64::consts::PI * 1.734e-3 * t + 0.4).cos())
            })
            .collect(),
        };
        let fit = fit_fringe(&ds, &FringeFitOptions { harmonics: 2, ..FringeFitOptions::new(1e-3, 3e-3) });
        assert!(fit.included);
        assert!((fit.frequency - 1.734e-3).abs() < 1e-10);
        assert!((fit.contrast - 0.6).abs() < 1e-8);
    }
}
