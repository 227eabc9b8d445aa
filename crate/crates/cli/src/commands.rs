use std::f64::consts::PI;
use std::path::PathBuf;

use fluxqed::circuit::{CircuitSpec, FluxoniumParams, HarmonicModeParams, QubitParams};
use fluxqed::control::{
    cavity_ramsey_master, cavity_ramsey_unitary, error_budget, extract_kerr_from_ramsey, incoherent_error_map, optimize_snap,
    power_rabi_curve, prepare_snap, q_function, simulate_snap_prep, wigner_exact, wigner_measured, FringeFitOptions, PhaseSpaceGrid,
    RabiOptions, RamseyConfig, RamseyDataset, SnapOptions, WignerPulses,
};
use fluxqed::design::{
    bound_curve, check_literature, kerr_zeros, literature_table, optimize_zero_kerr, parse_literature, sweep_fixed_chi, transmon_bound,
};
use fluxqed::dressed::{flux_sweep, SweepOptions};
use fluxqed::dynamics::{qubit_pulse, DensityMatrix, InitialState, LossRates, PulseShape, StorageState};
use fluxqed::export::{fixed_chi_table, flux_sweep_table, grid_csv, matrix_csv, num, spectrum_table, Header, Table};
use fluxqed::C64;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{self, Loaded, OptimizeMode, RamseyMode, WignerMode};
use crate::output::Output;
use crate::{Cli, CliError, Command};

pub const TOOL: &str = concat!("fluxqed ", env!("CARGO_PKG_VERSION"));

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let loaded = config::load(cli.config.as_deref())?;
    let jobs = cli.jobs.or(loaded.cfg.jobs);
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("jobs: {e}")))?;
    }
    let seed = cli.seed.or(loaded.cfg.seed).unwrap_or(0);
    let dir = cli.out.clone().or_else(|| loaded.cfg.out.as_ref().map(|p| loaded.base_dir.join(p))).unwrap_or_else(|| PathBuf::from("fluxqed-out"));
    let header = Header::new(TOOL, &config_hash(&loaded)?, seed).with("command", cli.command.name());
    let mut out = Output::new(dir, header, cli.emit_plots)?;
    let ctx = Ctx { loaded: &loaded, seed };
    let res = match cli.command {
        Command::Spectrum => spectrum(&ctx, &mut out),
        Command::Chikerr => chikerr(&ctx, &mut out),
        Command::Ramsey => ramsey(&ctx, &mut out),
        Command::Qfunc => qfunc(&ctx, &mut out),
        Command::Wigner => wigner(&ctx, &mut out),
        Command::Rabi => rabi(&ctx, &mut out),
        Command::Snap => snap(&ctx, &mut out),
        Command::Errormap => errormap(&ctx, &mut out),
        Command::Bound => bound(&ctx, &mut out),
        Command::Optimize => optimize(&ctx, &mut out),
        Command::Verify => crate::verify::run(&loaded.cfg.verify, &mut out),
    };
    let status = match &res {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("{e:?}"),
    };
    out.finish(cli.command.name(), &status)?;
    res
}

/// sha256 over the canonical config (all defaults filled in, without the
/// output directory and worker count) followed by the device file text.
fn config_hash(loaded: &Loaded) -> Result<String, CliError> {
    let mut cfg = loaded.cfg.clone();
    cfg.out = None;
    cfg.jobs = None;
    cfg.seed = None;
    let canonical = serde_json::to_string(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    h.update(b"\n");
    h.update(loaded.device_text.as_bytes());
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

struct Ctx<'a> {
    loaded: &'a Loaded,
    seed: u64,
}

fn spectrum(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let dev = ctx.loaded.device()?;
    let grid = ctx.loaded.cfg.spectrum.flux.values("spectrum.flux")?;
    let sweep = flux_sweep(dev, &grid, &SweepOptions::default())?;
    let t = spectrum_table(&sweep);
    out.table("spectrum.csv", &t)?;
    out.series_plot("spectrum.csv", &t, "flux_phi0", &["f_ge_ghz", "f_gf_ghz", "f_gh_ghz"])
}

fn chikerr(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let c = &ctx.loaded.cfg.chikerr;
    let dev = ctx.loaded.device()?;
    let grid = c.flux.values("chikerr.flux")?;
    let sweep = flux_sweep(dev, &grid, &SweepOptions { max_p: c.max_p, convergence_check: c.convergence_check })?;
    let t = flux_sweep_table(&sweep);
    out.table("chikerr.csv", &t)?;
    out.json(
        "chikerr.json",
        &json!({
            "kerr_zero_crossings_phi0": sweep.zero_crossings(|p| p.kerr),
            "chi_zero_crossings_phi0": sweep.zero_crossings(|p| p.chi),
            "warnings": sweep.warnings,
        }),
    )?;
    out.series_plot("chikerr.csv", &t, "flux_phi0", &["chi_ghz", "kerr_ghz"])
}

fn ramsey(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let c = &ctx.loaded.cfg.ramsey;
    let model = ctx.loaded.model(&c.model, 40)?;
    let losses = ctx.loaded.losses(&c.losses)?;
    if c.mode == RamseyMode::Unitary && !losses.is_lossless() {
        return Err(CliError::Config("ramsey: the unitary mode needs `losses.lossless`".into()));
    }
    if c.amplitudes.is_empty() {
        return Err(CliError::Config("ramsey.amplitudes: empty".into()));
    }
    let t_grid = c.t_ns.values("ramsey.t_ns")?;
    let detuning = c.detuning_mhz * 1e-3;
    let mut datasets = Vec::new();
    for &a in &c.amplitudes {
        let cfg = RamseyConfig {
            alpha: C64::new(a, 0.0),
            detuning,
            kerr: model.kerr,
            chi: model.chi,
            t_grid: t_grid.clone(),
            losses: Some(losses),
            fock_dim: model.fock_dim,
        };
        let series = match c.mode {
            RamseyMode::Unitary => cavity_ramsey_unitary(&cfg)?,
            RamseyMode::Master => {
                let pulse = qubit_pulse(PulseShape::Gaussian, c.selective_ns, 0.0, 0.0, PI)?;
                cavity_ramsey_master(&cfg, &pulse, 1e-8)?
            }
        };
        datasets.push(RamseyDataset { alpha: cfg.alpha, series });
    }
    let mut cols = vec!["t_ns".to_string()];
    cols.extend(c.amplitudes.iter().map(|a| format!("p_alpha_{}", num(*a))));
    let mut t = Table::new(&cols);
    for (i, &time) in t_grid.iter().enumerate() {
        let mut row = vec![time];
        row.extend(datasets.iter().map(|d| d.series[i].1));
        t.push(row)?;
    }
    out.table("ramsey.csv", &t)?;
    let ys: Vec<&str> = cols[1..].iter().map(String::as_str).collect();
    out.series_plot("ramsey.csv", &t, "t_ns", &ys)?;

    let [lo, hi] = c.fit_window_mhz.unwrap_or([0.75 * c.detuning_mhz.abs(), 1.25 * c.detuning_mhz.abs()]);
    let fit = extract_kerr_from_ramsey(&datasets, &FringeFitOptions::new(lo * 1e-3, hi * 1e-3))?;
    out.json(
        "ramsey_fit.json",
        &json!({
            "model_kerr_khz": model.kerr * 1e6,
            "fitted_kerr_khz": fit.kerr * 1e6,
            "fitted_detuning_mhz": fit.detuning_offset * 1e3,
            "fit": fit,
        }),
    )
}

fn phase_grid(extent: f64, resolution: usize) -> Result<PhaseSpaceGrid, CliError> {
    if !(extent > 0.0) || resolution < 2 {
        return Err(CliError::Config("phase-space grid needs extent > 0 and resolution >= 2".into()));
    }
    Ok(PhaseSpaceGrid::square(extent, resolution)?)
}

fn qfunc(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let c = &ctx.loaded.cfg.qfunc;
    let psi = c.state.vector(c.fock_dim)?;
    let rho = DensityMatrix::product_mixed(1.0, &psi);
    let q = q_function(&rho, &phase_grid(c.extent, c.resolution)?);
    out.text("qfunc.csv", &grid_csv(&q, &out.header)?)?;
    out.matrix_plot("qfunc.csv", "Re beta", "Im beta")
}

fn wigner(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let c = &ctx.loaded.cfg.wigner;
    let grid = phase_grid(c.extent, c.resolution)?;
    let (w, tail) = match c.mode {
        WignerMode::Exact => {
            let psi = c.state.vector(c.model.fock_dim.unwrap_or(16))?;
            (wigner_exact(&DensityMatrix::product_mixed(1.0, &psi), &grid), None)
        }
        WignerMode::Measured => {
            let model = ctx.loaded.model(&c.model, 16)?;
            let losses = ctx.loaded.losses(&c.losses)?;
            let psi = c.state.vector(model.fock_dim)?;
            let pulses = WignerPulses { duration: c.pulse_ns, max_peak: c.max_peak, ..WignerPulses::default() };
            let m = wigner_measured(&DensityMatrix::product_mixed(1.0, &psi), &model, &losses, &pulses, &grid)?;
            (m.grid, Some(m.tail_max))
        }
    };
    out.text("wigner.csv", &grid_csv(&w, &out.header)?)?;
    out.json(
        "wigner.json",
        &json!({
            "mode": c.mode,
            "max": w.max(),
            "min": w.min(),
            "origin": w.nearest(C64::new(0.0, 0.0)),
            "integral": w.integral(),
            "tail_max": tail,
        }),
    )?;
    out.matrix_plot("wigner.csv", "Re beta", "Im beta")
}

fn rabi(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let c = &ctx.loaded.cfg.rabi;
    let model = ctx.loaded.model(&c.model, 16)?;
    let losses = ctx.loaded.losses(&c.losses)?;
    let amps = c.amplitudes.values("rabi.amplitudes")?;
    let opts = RabiOptions {
        duration: c.duration_ns,
        qubit_ground_population: ctx.loaded.ground_population(c.qubit_ground_population),
        tol: 1e-8,
    };
    let p = power_rabi_curve(c.peak, C64::new(c.alpha, 0.0), &model, &losses, &amps, &opts)?;
    let mut t = Table::new(&["amplitude", "p_e"]);
    for (a, pe) in amps.iter().zip(p) {
        t.push(vec![*a, pe])?;
    }
    out.table("rabi.csv", &t)?;
    out.series_plot("rabi.csv", &t, "amplitude", &["p_e"])
}

fn snap(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let c = &ctx.loaded.cfg.snap;
    let model = ctx.loaded.model(&c.model, 16)?;
    let losses = ctx.loaded.losses(&c.losses)?;
    let init = InitialState::new(ctx.loaded.ground_population(c.qubit_ground_population), StorageState::Vacuum);
    if c.targets.is_empty() {
        return Err(CliError::Config("snap.targets: empty".into()));
    }
    let opts = SnapOptions { seed: ctx.seed, ..SnapOptions::default() };
    let mut reports = Vec::new();
    for tg in &c.targets {
        let target: Vec<C64> = tg.amplitudes.iter().map(|a| C64::new(a[0], a[1])).collect();
        let norm = target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(CliError::Config(format!("snap target {}: zero vector", tg.name)));
        }
        let target: Vec<C64> = target.iter().map(|z| z / norm).collect();
        let prep = prepare_snap(&tg.theta, &target, &model, c.t_slow_ns, c.t_fast_ns, &opts)?;
        let free = simulate_snap_prep(&prep.spec, &model, &LossRates::none(), &InitialState::ground_vacuum(), &target, c.tol)?;
        let lossy = simulate_snap_prep(&prep.spec, &model, &losses, &init, &target, c.tol)?;
        let budget = if c.budget { Some(error_budget(&prep.spec, &model, &losses, &init, &target, c.tol)?) } else { None };
        reports.push(json!({
            "name": tg.name,
            "alpha1": prep.spec.alpha1.re,
            "alpha2": prep.spec.alpha2.re,
            "ideal_error": prep.ideal_error,
            "realized_error": prep.realized_error,
            "loss_free_fidelity": free.fidelity,
            "fidelity": lossy.fidelity,
            "budget": budget,
            "spec": prep.spec,
            "optimizer_evals": prep.optimization.evals,
            "optimizer_converged": prep.optimization.converged,
        }));
    }
    out.json("snap.json", &json!({ "model": model, "losses": losses, "qubit_ground_population": init.qubit_ground_population, "targets": reports }))
}

fn errormap(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let c = &ctx.loaded.cfg.errormap;
    let model = ctx.loaded.model(&c.model, 14)?;
    let life = |v: &[Option<f64>], name: &str| -> Result<Vec<f64>, CliError> {
        if v.is_empty() {
            return Err(CliError::Config(format!("errormap.{name}: grid is empty")));
        }
        Ok(v.iter().map(|t| t.unwrap_or(f64::INFINITY)).collect())
    };
    let t1s = life(&c.t1_storage_us, "t1_storage_us")?;
    let tphi = life(&c.tphi_us, "tphi_us")?;
    let opts = SnapOptions { seed: ctx.seed, ..SnapOptions::default() };
    let spec = optimize_snap(&c.theta, C64::new(c.alpha1, 0.0), &model, c.t_slow_ns, c.t_fast_ns, &opts)?.spec;
    let map = incoherent_error_map(&spec, &model, &LossRates::none(), &t1s, &tphi, c.tol)?;
    out.text("errormap.csv", &matrix_csv("t1_storage_us\\tphi_us", &t1s, &tphi, &map, &out.header)?)?;
    out.matrix_plot("errormap.csv", "T_phi (us)", "T1 storage (us)")
}

fn bound(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let c = &ctx.loaded.cfg.bound;
    let chi_mhz = c.chi_mhz.values("bound.chi_mhz")?;
    let curve = bound_curve(&chi_mhz.iter().map(|x| x * 1e-3).collect::<Vec<_>>(), c.e_c_max_ghz)?;
    let mut t = Table::new(&["chi_mhz", "k_min_khz"]);
    for (x, k) in chi_mhz.iter().zip(&curve.k_min) {
        t.push(vec![*x, k * 1e6])?;
    }
    out.table("bound.csv", &t)?;
    out.series_plot("bound.csv", &t, "chi_mhz", &["k_min_khz"])?;

    let entries = match &c.literature {
        Some(p) => {
            let p = ctx.loaded.base_dir.join(p);
            let text = std::fs::read_to_string(&p).map_err(|e| CliError::Config(format!("literature {}: {e}", p.display())))?;
            parse_literature(&text)?
        }
        None => literature_table()?,
    };
    let checks = check_literature(&entries, c.e_c_max_ghz)?;
    let mut buf = out.header.comment_block().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["k_abs_khz", "chi_abs_mhz", "k_type", "citation", "bound_khz", "passes"]).map_err(csv_err)?;
        for ch in &checks {
            let kind = serde_json::to_value(ch.entry.k_type).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            w.write_record([
                num(ch.entry.k_abs),
                num(ch.entry.chi_abs),
                kind,
                ch.entry.citation.clone(),
                num(ch.bound_khz),
                ch.passes.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
    }
    out.text("literature.csv", &String::from_utf8(buf).expect("csv output is utf-8"))?;
    let passed = checks.iter().filter(|c| c.passes).count();
    out.json(
        "bound.json",
        &json!({
            "e_c_max_ghz": c.e_c_max_ghz,
            "bound_at_1mhz_khz": transmon_bound(1e-3, c.e_c_max_ghz)? * 1e6,
            "literature_passed": passed,
            "literature_total": checks.len(),
        }),
    )
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Numerical(format!("csv: {e}"))
}

fn default_template() -> CircuitSpec {
    CircuitSpec::new(QubitParams::Fluxonium(FluxoniumParams::new(1.19, 0.556, 3.04, 0.5)), vec![HarmonicModeParams::new(3.0, 0.0, 8)], 60)
        .with_levels(12)
}

fn optimize(ctx: &Ctx, out: &mut Output) -> Result<(), CliError> {
    let c = &ctx.loaded.cfg.optimize;
    let chi = c.chi_target_mhz * 1e-3;
    match c.mode {
        OptimizeMode::ZeroKerr => {
            let opts = fluxqed::design::ZeroKerrOptions { seed: ctx.seed, ..c.options.clone() };
            let r = optimize_zero_kerr(&c.space, chi, c.overlap_min, &opts)?;
            let bound = transmon_bound(chi, fluxqed::design::DEFAULT_E_C_MAX)?;
            out.json(
                "zero_kerr.json",
                &json!({
                    "chi_target_ghz": chi,
                    "overlap_min": c.overlap_min,
                    "space": c.space,
                    "options": opts,
                    "transmon_bound_ghz": bound,
                    "beats_transmon_bound": r.kerr.abs() < bound,
                    "result": r,
                }),
            )
        }
        OptimizeMode::FixedChi => {
            let template = c.template.clone().unwrap_or_else(default_template);
            let deltas = c.delta_ghz.values("optimize.delta_ghz")?;
            let pts = sweep_fixed_chi(&template, &deltas, chi, (c.g_bracket_ghz[0], c.g_bracket_ghz[1]))?;
            let t = fixed_chi_table(&pts);
            out.table("fixed_chi.csv", &t)?;
            out.series_plot("fixed_chi.csv", &t, "delta_ghz", &["kerr_ghz", "overlap"])?;
            let zeros = kerr_zeros(&pts, 1e-9, 0.01);
            let notes: Vec<_> = pts.iter().filter_map(|p| p.note.as_ref().map(|n| json!({ "delta_ghz": p.delta, "note": n }))).collect();
            out.json("fixed_chi_zeros.json", &json!({ "chi_target_ghz": chi, "zeros": zeros, "unsolved": notes }))
        }
    }
}
