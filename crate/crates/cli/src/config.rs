//! Run configuration. Every block has defaults so that `{}` is a valid
//! config; unknown keys are rejected.

use std::path::{Path, PathBuf};

use fluxqed::circuit::{fixtures, CircuitSpec};
use fluxqed::dynamics::{EffectiveModel, LossRates};
use fluxqed::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Path to a circuit JSON (relative to the config file) or
    /// `builtin:device_a` / `builtin:device_b`.
    #[serde(default)]
    pub device: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub spectrum: SpectrumCfg,
    #[serde(default)]
    pub chikerr: ChiKerrCfg,
    #[serde(default)]
    pub ramsey: RamseyCfg,
    #[serde(default)]
    pub qfunc: PhaseSpaceCfg,
    #[serde(default)]
    pub wigner: WignerCfg,
    #[serde(default)]
    pub rabi: RabiCfg,
    #[serde(default)]
    pub snap: SnapCfg,
    #[serde(default)]
    pub errormap: ErrorMapCfg,
    #[serde(default)]
    pub bound: BoundCfg,
    #[serde(default)]
    pub optimize: OptimizeCfg,
    #[serde(default)]
    pub verify: VerifyCfg,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

/// Either an evenly spaced range or explicit values.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    // lists first: serde also reads a struct from a 3-element sequence
    Values(Vec<f64>),
    Range(Range),
}

impl Grid {
    pub fn range(start: f64, stop: f64, points: usize) -> Self {
        Grid::Range(Range { start, stop, points })
    }

    pub fn values(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Grid::Values(v) => v.clone(),
            Grid::Range(r) => match r.points {
                0 => Vec::new(),
                1 => vec![r.start],
                n => (0..n).map(|k| r.start + (r.stop - r.start) * k as f64 / (n - 1) as f64).collect(),
            },
        };
        if v.is_empty() {
            return Err(CliError::Config(format!("{name}: grid is empty")));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(CliError::Config(format!("{name}: grid values must be finite")));
        }
        Ok(v)
    }
}

/// Effective dispersive model; missing values come from the device
/// metadata.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCfg {
    #[serde(default)]
    pub chi_mhz: Option<f64>,
    #[serde(default)]
    pub kerr_khz: Option<f64>,
    #[serde(default)]
    pub fock_dim: Option<usize>,
}

/// Coherence numbers (µs); missing values come from the device metadata.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossCfg {
    #[serde(default)]
    pub lossless: bool,
    #[serde(default)]
    pub t1_storage_us: Option<f64>,
    #[serde(default)]
    pub t1_qubit_us: Option<f64>,
    #[serde(default)]
    pub t2_qubit_us: Option<f64>,
    #[serde(default)]
    pub thermal_ground_population: Option<f64>,
}

/// Storage state; amplitudes are `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[derive(Default)]
pub enum StateCfg {
    #[default]
    Vacuum,
    Fock { n: usize },
    Coherent { re: f64, im: f64 },
    Superposition { amplitudes: Vec<[f64; 2]> },
}


impl StateCfg {
    pub fn vector(&self, dim: usize) -> Result<Vec<C64>, CliError> {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        match self {
            StateCfg::Vacuum => v[0] = C64::new(1.0, 0.0),
            StateCfg::Fock { n } => {
                if *n >= dim {
                    return Err(CliError::Config(format!("state: Fock {n} needs fock_dim > {n}")));
                }
                v[*n] = C64::new(1.0, 0.0);
            }
            StateCfg::Coherent { re, im } => {
                fluxqed::dynamics::check_displacement_guard(C64::new(*re, *im), dim)?;
                v = fluxqed::dynamics::displace_storage_vector(&fluxqed::fock::basis_vector(0, dim), C64::new(*re, *im));
            }
            StateCfg::Superposition { amplitudes } => {
                if amplitudes.len() > dim || amplitudes.is_empty() {
                    return Err(CliError::Config("state: superposition must have 1..=fock_dim amplitudes".into()));
                }
                for (k, a) in amplitudes.iter().enumerate() {
                    v[k] = C64::new(a[0], a[1]);
                }
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(CliError::Config("state: zero vector".into()));
        }
        Ok(v.into_iter().map(|c| c / norm).collect())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumCfg {
    #[serde(default = "full_flux")]
    pub flux: Grid,
}

fn full_flux() -> Grid {
    Grid::range(0.0, 1.0, 101)
}

impl Default for SpectrumCfg {
    fn default() -> Self {
        Self { flux: full_flux() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiKerrCfg {
    #[serde(default = "chikerr_flux")]
    pub flux: Grid,
    #[serde(default = "default_max_p")]
    pub max_p: usize,
    #[serde(default)]
    pub convergence_check: bool,
}

fn chikerr_flux() -> Grid {
    Grid::range(0.40, 0.50, 51)
}
fn default_max_p() -> usize {
    3
}

impl Default for ChiKerrCfg {
    fn default() -> Self {
        Self { flux: chikerr_flux(), max_p: default_max_p(), convergence_check: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RamseyMode {
    Unitary,
    Master,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseyCfg {
    #[serde(default)]
    pub model: ModelCfg,
    #[serde(default = "ramsey_amplitudes")]
    pub amplitudes: Vec<f64>,
    #[serde(default = "ramsey_detuning")]
    pub detuning_mhz: f64,
    #[serde(default = "ramsey_times")]
    pub t_ns: Grid,
    #[serde(default = "ramsey_mode")]
    pub mode: RamseyMode,
    /// Selective readout pulse length for the master-equation mode.
    #[serde(default = "ramsey_pulse")]
    pub selective_ns: f64,
    #[serde(default = "lossless")]
    pub losses: LossCfg,
    /// Fringe-frequency search window (MHz); defaults to the detuning ± 25%.
    #[serde(default)]
    pub fit_window_mhz: Option<[f64; 2]>,
}

fn ramsey_amplitudes() -> Vec<f64> {
    vec![0.6, 1.0, 1.4, 1.8, 2.2]
}
fn ramsey_detuning() -> f64 {
    2.0
}
fn ramsey_times() -> Grid {
    Grid::range(0.0, 2000.0, 501)
}
fn ramsey_mode() -> RamseyMode {
    RamseyMode::Unitary
}
fn ramsey_pulse() -> f64 {
    4000.0
}

impl Default for RamseyCfg {
    fn default() -> Self {
        Self {
            model: ModelCfg::default(),
            amplitudes: ramsey_amplitudes(),
            detuning_mhz: ramsey_detuning(),
            t_ns: ramsey_times(),
            mode: ramsey_mode(),
            selective_ns: ramsey_pulse(),
            losses: lossless(),
            fit_window_mhz: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpaceCfg {
    #[serde(default)]
    pub state: StateCfg,
    #[serde(default = "default_fock")]
    pub fock_dim: usize,
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_fock() -> usize {
    16
}
fn default_extent() -> f64 {
    2.5
}
fn default_resolution() -> usize {
    51
}

impl Default for PhaseSpaceCfg {
    fn default() -> Self {
        Self { state: StateCfg::Vacuum, fock_dim: default_fock(), extent: default_extent(), resolution: default_resolution() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerMode {
    Exact,
    Measured,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerCfg {
    #[serde(default)]
    pub state: StateCfg,
    #[serde(default = "default_extent")]
    pub extent: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "wigner_mode")]
    pub mode: WignerMode,
    #[serde(default)]
    pub model: ModelCfg,
    #[serde(default = "lossless")]
    pub losses: LossCfg,
    #[serde(default = "wigner_pulse")]
    pub pulse_ns: f64,
    #[serde(default = "wigner_peaks")]
    pub max_peak: usize,
}

fn wigner_mode() -> WignerMode {
    WignerMode::Exact
}
fn wigner_pulse() -> f64 {
    1600.0
}
fn wigner_peaks() -> usize {
    10
}

impl Default for WignerCfg {
    fn default() -> Self {
        Self {
            state: StateCfg::Vacuum,
            extent: default_extent(),
            resolution: default_resolution(),
            mode: wigner_mode(),
            model: ModelCfg::default(),
            losses: lossless(),
            pulse_ns: wigner_pulse(),
            max_peak: wigner_peaks(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiCfg {
    #[serde(default)]
    pub model: ModelCfg,
    #[serde(default)]
    pub losses: LossCfg,
    #[serde(default = "rabi_peak")]
    pub peak: usize,
    #[serde(default = "rabi_alpha")]
    pub alpha: f64,
    #[serde(default = "rabi_amplitudes")]
    pub amplitudes: Grid,
    #[serde(default = "wigner_pulse")]
    pub duration_ns: f64,
    /// Defaults to the device's initialized ground population, else 1.
    #[serde(default)]
    pub qubit_ground_population: Option<f64>,
}

fn rabi_peak() -> usize {
    1
}
fn rabi_alpha() -> f64 {
    1.0
}
fn rabi_amplitudes() -> Grid {
    Grid::range(0.0, 2.0, 41)
}

impl Default for RabiCfg {
    fn default() -> Self {
        Self {
            model: ModelCfg::default(),
            losses: LossCfg::default(),
            peak: rabi_peak(),
            alpha: rabi_alpha(),
            amplitudes: rabi_amplitudes(),
            duration_ns: wigner_pulse(),
            qubit_ground_population: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapTarget {
    pub name: String,
    /// Fock amplitudes `[re, im]`.
    pub amplitudes: Vec<[f64; 2]>,
    /// SNAP phases per Fock level (rad).
    pub theta: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapCfg {
    #[serde(default)]
    pub model: ModelCfg,
    #[serde(default)]
    pub losses: LossCfg,
    #[serde(default = "snap_targets")]
    pub targets: Vec<SnapTarget>,
    #[serde(default = "t_slow")]
    pub t_slow_ns: f64,
    #[serde(default = "t_fast")]
    pub t_fast_ns: f64,
    /// Defaults to the device's initialized ground population, else 1.
    #[serde(default)]
    pub qubit_ground_population: Option<f64>,
    #[serde(default = "yes")]
    pub budget: bool,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn snap_targets() -> Vec<SnapTarget> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        SnapTarget { name: "fock1".into(), amplitudes: vec![[0.0, 0.0], [1.0, 0.0]], theta: vec![std::f64::consts::PI] },
        SnapTarget { name: "minus".into(), amplitudes: vec![[h, 0.0], [-h, 0.0]], theta: vec![std::f64::consts::PI] },
    ]
}
fn t_slow() -> f64 {
    1600.0
}
fn t_fast() -> f64 {
    40.0
}
fn yes() -> bool {
    true
}
fn default_tol() -> f64 {
    1e-8
}

impl Default for SnapCfg {
    fn default() -> Self {
        Self {
            model: ModelCfg::default(),
            losses: LossCfg::default(),
            targets: snap_targets(),
            t_slow_ns: t_slow(),
            t_fast_ns: t_fast(),
            qubit_ground_population: None,
            budget: true,
            tol: default_tol(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorMapCfg {
    #[serde(default)]
    pub model: ModelCfg,
    #[serde(default = "rabi_alpha")]
    pub alpha1: f64,
    #[serde(default = "pi_theta")]
    pub theta: Vec<f64>,
    /// Storage T₁ values (µs); `null` switches storage loss off.
    #[serde(default = "map_t1s")]
    pub t1_storage_us: Vec<Option<f64>>,
    /// Qubit pure-dephasing times (µs); `null` switches dephasing off.
    #[serde(default = "map_tphi")]
    pub tphi_us: Vec<Option<f64>>,
    #[serde(default = "t_slow")]
    pub t_slow_ns: f64,
    #[serde(default = "t_fast")]
    pub t_fast_ns: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn pi_theta() -> Vec<f64> {
    vec![std::f64::consts::PI]
}
fn map_t1s() -> Vec<Option<f64>> {
    vec![Some(100.0), Some(300.0), Some(1000.0)]
}
fn map_tphi() -> Vec<Option<f64>> {
    vec![Some(10.0), Some(50.0), Some(200.0)]
}

impl Default for ErrorMapCfg {
    fn default() -> Self {
        Self {
            model: ModelCfg { fock_dim: Some(14), ..ModelCfg::default() },
            alpha1: 1.0,
            theta: pi_theta(),
            t1_storage_us: map_t1s(),
            tphi_us: map_tphi(),
            t_slow_ns: t_slow(),
            t_fast_ns: t_fast(),
            tol: default_tol(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundCfg {
    #[serde(default = "bound_chi")]
    pub chi_mhz: Grid,
    #[serde(default = "e_c_max")]
    pub e_c_max_ghz: f64,
    /// CSV with columns k_abs_khz, chi_abs_mhz, k_type, citation; the
    /// shipped table when absent.
    #[serde(default)]
    pub literature: Option<PathBuf>,
}

fn bound_chi() -> Grid {
    Grid::Values((0..=40).map(|k| 10f64.powf(-2.0 + k as f64 * 0.075)).collect())
}
fn e_c_max() -> f64 {
    fluxqed::design::DEFAULT_E_C_MAX
}

impl Default for BoundCfg {
    fn default() -> Self {
        Self { chi_mhz: bound_chi(), e_c_max_ghz: e_c_max(), literature: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizeMode {
    /// Fluxonium zero-Kerr search.
    ZeroKerr,
    /// Fixed-χ detuning sweep of `template`.
    FixedChi,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeCfg {
    #[serde(default = "optimize_mode")]
    pub mode: OptimizeMode,
    #[serde(default = "chi_target")]
    pub chi_target_mhz: f64,
    #[serde(default = "overlap_min")]
    pub overlap_min: f64,
    #[serde(default = "search_space")]
    pub space: fluxqed::design::SearchSpace,
    #[serde(default)]
    pub options: fluxqed::design::ZeroKerrOptions,
    /// Circuit for the fixed-χ sweep; the storage mode's frequency and
    /// coupling are overwritten. Defaults to a half-flux fluxonium
    /// (E_C 1.19, E_L 0.556, E_J 3.04 GHz).
    #[serde(default)]
    pub template: Option<CircuitSpec>,
    #[serde(default = "delta_grid")]
    pub delta_ghz: Grid,
    #[serde(default = "g_bracket")]
    pub g_bracket_ghz: [f64; 2],
}

fn optimize_mode() -> OptimizeMode {
    OptimizeMode::ZeroKerr
}
fn chi_target() -> f64 {
    1.0
}
fn overlap_min() -> f64 {
    0.99
}
fn search_space() -> fluxqed::design::SearchSpace {
    fluxqed::design::SearchSpace { e_c: (0.8, 1.6), e_l: (0.3, 0.9), e_j: (2.0, 4.5), omega: (2.0, 4.0), g: (1e-4, 0.4) }
}
fn delta_grid() -> Grid {
    Grid::range(-3.2, -1.6, 33)
}
fn g_bracket() -> [f64; 2] {
    [1e-4, 0.4]
}

impl Default for OptimizeCfg {
    fn default() -> Self {
        Self {
            mode: optimize_mode(),
            chi_target_mhz: chi_target(),
            overlap_min: overlap_min(),
            space: search_space(),
            options: fluxqed::design::ZeroKerrOptions {
                start: Some([1.19, 0.556, 3.04, 2.875]),
                ..fluxqed::design::ZeroKerrOptions::default()
            },
            template: None,
            delta_ghz: delta_grid(),
            g_bracket_ghz: g_bracket(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[derive(Default)]
pub struct VerifyCfg {
    /// Subset of checks to run; all when empty.
    #[serde(default)]
    pub checks: Vec<String>,
}


/// Loaded configuration plus the resolved device and the bytes that feed
/// the config hash.
pub struct Loaded {
    pub cfg: RunConfig,
    pub base_dir: PathBuf,
    pub device: Option<CircuitSpec>,
    pub device_text: String,
}

pub fn load(path: Option<&Path>) -> Result<Loaded, CliError> {
    let (cfg, base_dir) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            (cfg, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (RunConfig::default(), PathBuf::from(".")),
    };
    let (device, device_text) = match cfg.device.as_deref() {
        None => (None, String::new()),
        Some("builtin:device_a") => (Some(fixtures::device_a()?), fixtures::DEVICE_A_JSON.to_string()),
        Some("builtin:device_b") => (Some(fixtures::device_b()?), fixtures::DEVICE_B_JSON.to_string()),
        Some(rel) => {
            let p = base_dir.join(rel);
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::Config(format!("device {}: {e}", p.display())))?;
            let spec = CircuitSpec::from_json(&text).map_err(|e| CliError::Config(format!("device {}: {e}", p.display())))?;
            (Some(spec), text)
        }
    };
    Ok(Loaded { cfg, base_dir, device, device_text })
}

impl Loaded {
    pub fn device(&self) -> Result<&CircuitSpec, CliError> {
        self.device.as_ref().ok_or_else(|| CliError::Config("this command needs `device`".into()))
    }

    fn metadata(&self) -> Option<&fluxqed::circuit::DeviceMetadata> {
        self.device.as_ref().and_then(|d| d.metadata.as_ref())
    }

    pub fn model(&self, m: &ModelCfg, default_fock: usize) -> Result<EffectiveModel, CliError> {
        let md = self.metadata();
        let chi = m
            .chi_mhz
            .or(md.and_then(|d| d.chi_mhz))
            .ok_or_else(|| CliError::Config("model.chi_mhz missing and no device metadata".into()))?;
        let kerr = m.kerr_khz.or(md.and_then(|d| d.kerr_khz)).unwrap_or(0.0);
        let model = EffectiveModel::new(chi * 1e-3, kerr * 1e-6, m.fock_dim.unwrap_or(default_fock));
        model.validate()?;
        Ok(model)
    }

    pub fn losses(&self, l: &LossCfg) -> Result<LossRates, CliError> {
        if l.lossless {
            return Ok(LossRates::none());
        }
        let md = self.metadata();
        let need = |v: Option<f64>, d: Option<f64>, name: &str| {
            v.or(d).ok_or_else(|| CliError::Config(format!("losses.{name} missing and no device metadata")))
        };
        let t1s = need(l.t1_storage_us, md.and_then(|d| d.t1_storage_us), "t1_storage_us")?;
        let t1q = need(l.t1_qubit_us, md.and_then(|d| d.t1_qubit_us), "t1_qubit_us")?;
        let t2 = need(l.t2_qubit_us, md.and_then(|d| d.t2_ramsey_us), "t2_qubit_us")?;
        let pg = need(l.thermal_ground_population, md.and_then(|d| d.thermal_ground_population), "thermal_ground_population")?;
        Ok(LossRates::from_coherence(t1s, t1q, t2, pg)?)
    }

    pub fn ground_population(&self, v: Option<f64>) -> f64 {
        v.or(self.metadata().and_then(|d| d.initialized_ground_population)).unwrap_or(1.0)
    }
}

fn lossless() -> LossCfg {
    LossCfg { lossless: true, ..LossCfg::default() }
}
