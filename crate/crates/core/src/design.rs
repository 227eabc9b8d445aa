//! Transmon χ–K bound and fluxonium design search at fixed dispersive
//! shift.
//!
//! `Δ` is the bare qubit `g→e` frequency minus the bare cavity frequency
//! for both qubit types; sweeps move the cavity at fixed qubit energies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{CircuitSpec, FluxoniumParams, HarmonicModeParams, QubitBasis, QubitParams};
use crate::dressed::{analyze, EffectiveParams};
use crate::error::{invalid, Error, Result};
use crate::optimize::{bisect, NelderMead};
use crate::scalar::{lit, to_f64, Real};

/// Charging-energy cap of the transmon bound (GHz).
pub const DEFAULT_E_C_MAX: f64 = 0.530;

/// Transmon dispersively coupled to a cavity, all in GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct PerturbativeTransmon<T: Real = f64> {
    pub e_c: T,
    pub g: T,
    /// Qubit minus cavity frequency.
    pub delta: T,
}

impl<T: Real> PerturbativeTransmon<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.e_c > T::zero()) {
            return Err(invalid("e_c", "must be positive"));
        }
        if !self.g.is_finite() || !self.delta.is_finite() {
            return Err(invalid("g", "g and delta must be finite"));
        }
        if self.delta == T::zero() || self.delta == self.e_c {
            return Err(invalid("delta", "formulas are singular at delta = 0 and delta = e_c"));
        }
        Ok(())
    }
}

/// `(χ, K)` with `χ ≈ −2g²E_C/(Δ(Δ−E_C))` and `K ≈ −E_C (g/Δ)⁴`.
pub fn perturbative_chi_kerr<T: Real>(p: &PerturbativeTransmon<T>) -> Result<(T, T)> {
    p.validate()?;
    let two = lit::<T>(2.0);
    let chi = -two * p.g * p.g * p.e_c / (p.delta * (p.delta - p.e_c));
    let r = p.g / p.delta;
    Ok((chi, -p.e_c * r * r * r * r))
}

/// Smallest `|K|` compatible with `χ` for a weakly hybridized transmon,
/// `χ²/(4 E_C,max)`.
pub fn transmon_bound<T: Real>(chi: T, e_c_max: T) -> Result<T> {
    if !(e_c_max > T::zero()) {
        return Err(invalid("e_c_max", "must be positive"));
    }
    Ok(chi * chi / (lit::<T>(4.0) * e_c_max))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BoundCurve<T: Real = f64> {
    pub chi_grid: Vec<T>,
    pub k_min: Vec<T>,
    pub e_c_max: T,
}

pub fn bound_curve<T: Real>(chi_grid: &[T], e_c_max: T) -> Result<BoundCurve<T>> {
    let k_min = chi_grid.iter().map(|c| transmon_bound(*c, e_c_max)).collect::<Result<_>>()?;
    Ok(BoundCurve { chi_grid: chi_grid.to_vec(), k_min, e_c_max })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KType {
    Data,
    Simulation,
}

/// One published transmon device (or flux point).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiteratureEntry {
    #[serde(rename = "k_abs_khz")]
    pub k_abs: f64,
    #[serde(rename = "chi_abs_mhz")]
    pub chi_abs: f64,
    pub k_type: KType,
    pub citation: String,
}

const LITERATURE_CSV: &str = include_str!("../fixtures/transmon_literature.csv");

pub fn parse_literature(text: &str) -> Result<Vec<LiteratureEntry>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<LiteratureEntry>().enumerate() {
        let e = row?;
        if !(e.k_abs > 0.0) || !(e.chi_abs > 0.0) {
            return Err(invalid("literature", format!("row {}: values must be positive", i + 1)));
        }
        out.push(e);
    }
    Ok(out)
}

/// The shipped transmon literature table.
pub fn literature_table() -> Result<Vec<LiteratureEntry>> {
    parse_literature(LITERATURE_CSV)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiteratureCheck {
    pub entry: LiteratureEntry,
    pub bound_khz: f64,
    pub passes: bool,
}

pub fn check_literature(entries: &[LiteratureEntry], e_c_max: f64) -> Result<Vec<LiteratureCheck>> {
    entries
        .iter()
        .map(|e| {
            let bound_khz = transmon_bound(e.chi_abs * 1e-3, e_c_max)? * 1e6;
            Ok(LiteratureCheck { entry: e.clone(), bound_khz, passes: e.k_abs >= bound_khz })
        })
        .collect()
}

/// Bare `g→e` frequency of the qubit in `spec`.
pub fn qubit_frequency<T: Real>(spec: &CircuitSpec<T>) -> Result<T> {
    let b = QubitBasis::from_spec(spec)?;
    if b.len() < 2 {
        return Err(invalid("qubit_levels", "need at least two qubit levels"));
    }
    Ok(b.energies[1] - b.energies[0])
}

fn with_storage<T: Real>(spec: &CircuitSpec<T>, omega: T, g: T) -> CircuitSpec<T> {
    let mut s = spec.clone();
    let m = &mut s.modes[s.storage_mode];
    m.bare_freq = omega;
    m.coupling_g = g;
    s
}

/// Finds `g` in `bracket` with `|χ| = |chi_target|` by bisection.
fn solve_g<T: Real>(spec: &CircuitSpec<T>, chi_target: T, bracket: (T, T), max_p: usize) -> Result<(T, EffectiveParams<T>)> {
    let target = chi_target.abs();
    let omega = spec.modes[spec.storage_mode].bare_freq;
    let f = |g: T| -> Result<T> { Ok(analyze(&with_storage(spec, omega, g), max_p)?.chi.abs() - target) };
    let tol = bracket.1 * lit::<T>(1e-9);
    let g = bisect(f, bracket.0, bracket.1, tol, 200)?;
    let p = analyze(&with_storage(spec, omega, g), max_p)?;
    Ok((g, p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FixedChiPoint<T: Real = f64> {
    /// GHz
    pub delta: T,
    /// Coupling that reaches the target; absent when the root search failed.
    pub g: Option<T>,
    pub chi: T,
    pub kerr: T,
    pub overlap: T,
    /// `(p, K_p)` for `p = 2..=5`.
    pub kerr_higher: Vec<(usize, T)>,
    pub note: Option<String>,
}

/// For each `Δ`, moves the storage to `ω_q − Δ`, tunes `g` within
/// `g_bracket` so that `|χ| = |chi_target|`, and reports `K` and the
/// bare–dressed overlap.
pub fn sweep_fixed_chi<T: Real>(
    template: &CircuitSpec<T>,
    delta_grid: &[T],
    chi_target: T,
    g_bracket: (T, T),
) -> Result<Vec<FixedChiPoint<T>>> {
    template.validate()?;
    if delta_grid.is_empty() {
        return Err(invalid("delta_grid", "must be non-empty"));
    }
    if !(chi_target != T::zero()) || !chi_target.is_finite() {
        return Err(invalid("chi_target", "must be finite and non-zero"));
    }
    if !(g_bracket.0 >= T::zero()) || !(g_bracket.1 > g_bracket.0) {
        return Err(invalid("g_bracket", "need 0 <= lo < hi"));
    }
    let fock = template.modes[template.storage_mode].fock_dim;
    if fock < 4 {
        return Err(invalid("fock_dim", "storage truncation needs at least 4 levels"));
    }
    let max_p = 5.min(fock - 1);
    let wq = qubit_frequency(template)?;
    Ok(delta_grid
        .par_iter()
        .map(|&delta| {
            let nan = T::nan();
            let fail = |note: String| FixedChiPoint {
                delta,
                g: None,
                chi: nan,
                kerr: nan,
                overlap: nan,
                kerr_higher: Vec::new(),
                note: Some(note),
            };
            let omega = wq - delta;
            if !(omega > T::zero()) {
                return fail(format!("cavity frequency {} GHz not positive", to_f64(omega)));
            }
            match solve_g(&with_storage(template, omega, T::zero()), chi_target, g_bracket, max_p) {
                Ok((g, p)) => FixedChiPoint {
                    delta,
                    g: Some(g),
                    chi: p.chi,
                    kerr: p.kerr,
                    overlap: p.hybridization_overlap,
                    kerr_higher: p.kerr_higher.clone(),
                    note: (!p.warnings.is_empty()).then(|| p.warnings.join("; ")),
                },
                Err(e) => fail(e.to_string()),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    /// `K` changes sign between neighbouring points.
    SignChange,
    /// `|K|` has a local minimum below the threshold without a sign change
    /// (a double root, as at the transmon straddling point).
    Touch,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct KerrZero<T: Real = f64> {
    pub kind: ZeroKind,
    /// Bracketing grid values; equal for a touch.
    pub delta: (T, T),
    /// Smallest overlap at the bracketing points.
    pub overlap: T,
}

/// Zeros of `K` along a fixed-χ sweep. Points without a solution break the
/// sequence. A sign change across a pole (where `|K|` exceeds `pole_ratio`
/// times `|χ|` on either side) is not a zero.
pub fn kerr_zeros<T: Real>(points: &[FixedChiPoint<T>], touch_below: T, pole_ratio: T) -> Vec<KerrZero<T>> {
    let ok = |p: &FixedChiPoint<T>| p.g.is_some() && p.kerr.is_finite();
    let mut out = Vec::new();
    for (i, w) in points.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        if !ok(a) || !ok(b) {
            continue;
        }
        let pole = a.kerr.abs() > pole_ratio * a.chi.abs() || b.kerr.abs() > pole_ratio * b.chi.abs();
        if a.kerr * b.kerr < T::zero() && !pole {
            out.push(KerrZero { kind: ZeroKind::SignChange, delta: (a.delta, b.delta), overlap: a.overlap.min(b.overlap) });
        }
        if i + 2 < points.len() {
            let c = &points[i + 2];
            if ok(c) && b.kerr.abs() < touch_below && b.kerr.abs() <= a.kerr.abs() && b.kerr.abs() <= c.kerr.abs()
                && a.kerr * b.kerr >= T::zero() && b.kerr * c.kerr >= T::zero()
            {
                out.push(KerrZero { kind: ZeroKind::Touch, delta: (b.delta, b.delta), overlap: b.overlap });
            }
        }
    }
    out
}

/// Box bounds of the fluxonium design search (GHz).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct SearchSpace<T: Real = f64> {
    pub e_c: (T, T),
    pub e_l: (T, T),
    pub e_j: (T, T),
    /// Bare cavity frequency.
    pub omega: (T, T),
    /// Bracket for the coupling root search.
    pub g: (T, T),
}

impl<T: Real> SearchSpace<T> {
    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("e_c", self.e_c), ("e_l", self.e_l), ("e_j", self.e_j), ("omega", self.omega), ("g", self.g)] {
            if !(lo >= T::zero()) || !(hi > lo) || !hi.is_finite() {
                return Err(invalid(name, "bounds must satisfy 0 <= lo < hi < inf"));
            }
        }
        if !(self.e_c.0 > T::zero()) || !(self.e_l.0 > T::zero()) || !(self.omega.0 > T::zero()) {
            return Err(invalid("bounds", "e_c, e_l and omega must stay positive"));
        }
        Ok(())
    }

    fn ranges(&self) -> [(T, T); 4] {
        [self.e_c, self.e_l, self.e_j, self.omega]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct ZeroKerrOptions<T: Real = f64> {
    #[serde(default)]
    pub seed: u64,
    /// Simplex runs; the first starts from `start` (or the box centre), the
    /// rest from seeded random points.
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_evals")]
    pub max_evals: usize,
    /// `(E_C, E_L, E_J, ω̃)` of the first start.
    #[serde(default)]
    pub start: Option<[T; 4]>,
    #[serde(default = "default_flux")]
    pub flux: T,
    #[serde(default = "default_qubit_dim")]
    pub qubit_dim: usize,
    #[serde(default = "default_levels")]
    pub qubit_levels: usize,
    #[serde(default = "default_fock")]
    pub fock_dim: usize,
}

fn default_starts() -> usize {
    3
}
fn default_evals() -> usize {
    200
}
fn default_flux<T: Real>() -> T {
    lit::<T>(0.5)
}
fn default_qubit_dim() -> usize {
    60
}
fn default_levels() -> usize {
    12
}
fn default_fock() -> usize {
    8
}

impl<T: Real> Default for ZeroKerrOptions<T> {
    fn default() -> Self {
        Self {
            seed: 0,
            starts: default_starts(),
            max_evals: default_evals(),
            start: None,
            flux: default_flux(),
            qubit_dim: default_qubit_dim(),
            qubit_levels: default_levels(),
            fock_dim: default_fock(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DesignResult<T: Real = f64> {
    pub params: CircuitSpec<T>,
    pub chi: T,
    pub kerr: T,
    pub overlap: T,
    pub kerr_higher: Vec<(usize, T)>,
    /// `|χ|` within 2% of the target and overlap above the floor.
    pub converged: bool,
    pub evals: usize,
    pub seed: u64,
}

fn fluxonium_spec<T: Real>(x: &[T; 4], g: T, opts: &ZeroKerrOptions<T>) -> CircuitSpec<T> {
    let q = QubitParams::Fluxonium(FluxoniumParams::new(x[0], x[1], x[2], opts.flux));
    let mode = HarmonicModeParams::new(x[3], g, opts.fock_dim).named("storage");
    CircuitSpec::new(q, vec![mode], opts.qubit_dim).with_levels(opts.qubit_levels)
}

/// Searches a single-mode fluxonium circuit for `|K| → 0` at
/// `|χ| = chi_target` with bare–dressed overlap at least `overlap_min`.
/// Outer simplex over `(E_C, E_L, E_J, ω̃)`, inner bisection on `g`.
pub fn optimize_zero_kerr<T: Real>(
    space: &SearchSpace<T>,
    chi_target: T,
    overlap_min: T,
    opts: &ZeroKerrOptions<T>,
) -> Result<DesignResult<T>> {
    space.validate()?;
    if !(chi_target > T::zero()) || !chi_target.is_finite() {
        return Err(invalid("chi_target", "must be positive"));
    }
    if !(overlap_min >= T::zero() && overlap_min <= T::one()) {
        return Err(invalid("overlap_min", "must lie in [0, 1]"));
    }
    if opts.starts == 0 {
        return Err(invalid("starts", "need at least one start"));
    }
    let ranges = space.ranges();
    let inside_box = |u: &[T]| -> [T; 4] { std::array::from_fn(|i| u[i].max(T::zero()).min(T::one())) };
    let to_phys = |u: &[T]| -> [T; 4] { std::array::from_fn(|i| ranges[i].0 + u[i] * (ranges[i].1 - ranges[i].0)) };
    let inside = |u: &[T]| u.iter().all(|v| *v >= T::zero() && *v <= T::one());
    let evaluate = |x: &[T; 4]| -> Option<(T, EffectiveParams<T>)> {
        solve_g(&fluxonium_spec(x, T::zero(), opts), chi_target, space.g, 5).ok()
    };
    let penalty = lit::<T>(10.0);
    let cost = |u: &[T]| -> T {
        if !inside(u) {
            return penalty * lit::<T>(10.0);
        }
        match evaluate(&to_phys(u)) {
            Some((_, p)) => {
                let short = (overlap_min - p.hybridization_overlap).max(T::zero());
                p.kerr.abs() / chi_target + penalty * short
            }
            None => penalty * lit::<T>(5.0),
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts: Vec<[T; 4]> = Vec::with_capacity(opts.starts);
    let centre = opts.start.map(|s| std::array::from_fn(|i| (s[i] - ranges[i].0) / (ranges[i].1 - ranges[i].0)));
    starts.push(centre.unwrap_or([lit::<T>(0.5); 4]));
    while starts.len() < opts.starts {
        starts.push(std::array::from_fn(|_| lit::<T>(rng.random_range(0.1..0.9))));
    }
    let nm = NelderMead { max_evals: opts.max_evals, ftol: lit::<T>(1e-9), xtol: lit::<T>(1e-7) };
    let runs: Vec<_> = starts
        .par_iter()
        .map(|u0| nm.minimize(cost, u0, &[lit::<T>(0.05); 4]))
        .collect();
    let evals = runs.iter().map(|m| m.evals).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal))
        .expect("at least one start");

    let x = to_phys(&inside_box(&best.x));
    // without a bracketed root the best effort keeps the largest coupling
    let (g, found) = match evaluate(&x) {
        Some((g, p)) => (g, Some(p)),
        None => (space.g.1, None),
    };
    let params = fluxonium_spec(&x, g, opts);
    let check = analyze(&params, 5)?;
    if let Some(found) = &found {
        let tol = lit::<T>(1e-6);
        if (check.chi - found.chi).abs() > tol || (check.kerr - found.kerr).abs() > tol {
            return Err(Error::Optimization("re-verification of the returned design disagrees".into()));
        }
    }
    let converged = found.is_some()
        && ((check.chi.abs() - chi_target) / chi_target).abs() <= lit::<T>(0.02)
        && check.hybridization_overlap >= overlap_min;
    Ok(DesignResult {
        params,
        chi: check.chi,
        kerr: check.kerr,
        overlap: check.hybridization_overlap,
        kerr_higher: check.kerr_higher,
        converged,
        evals,
        seed: opts.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_arithmetic() {
        let b = transmon_bound(1e-3_f64, DEFAULT_E_C_MAX).unwrap();
        assert!((b * 1e6 - 0.4717).abs() < 1e-4);
        assert_eq!(transmon_bound(0.0_f64, DEFAULT_E_C_MAX).unwrap(), 0.0);
        assert!((transmon_bound(2e-3_f64, 0.53).unwrap() / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn perturbative_limits() {
        let p = PerturbativeTransmon { e_c: 0.53, g: 0.0, delta: 2.0 };
        assert_eq!(perturbative_chi_kerr(&p).unwrap(), (0.0, 0.0));
        let below = perturbative_chi_kerr(&PerturbativeTransmon { e_c: 0.53, g: 0.05, delta: 0.4 }).unwrap();
        let above = perturbative_chi_kerr(&PerturbativeTransmon { e_c: 0.53, g: 0.05, delta: 0.7 }).unwrap();
        assert!(below.0 * above.0 < 0.0);
        assert!(perturbative_chi_kerr(&PerturbativeTransmon { e_c: 0.53, g: 0.05, delta: 0.53 }).is_err());
    }

    #[test]
    fn literature_rows_parse() {
        let t = literature_table().unwrap();
        assert_eq!(t.len(), 19);
        assert!(parse_literature("k_abs_khz,chi_abs_mhz,k_type,citation\n-1,1,data,x\n").is_err());
    }
}
