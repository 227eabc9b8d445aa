//! Quick regression checks against the shipped reference devices.

use std::f64::consts::FRAC_2_PI;

use fluxqed::circuit::fixtures;
use fluxqed::control::{cavity_ramsey_unitary, extract_kerr_from_ramsey, wigner_exact, FringeFitOptions, PhaseSpaceGrid, RamseyConfig, RamseyDataset};
use fluxqed::design::{check_literature, literature_table, transmon_bound, DEFAULT_E_C_MAX};
use fluxqed::dressed::{analyze, flux_sweep, SweepOptions};
use fluxqed::dynamics::DensityMatrix;
use fluxqed::fock::basis_vector;
use fluxqed::C64;
use serde::Serialize;

use crate::config::VerifyCfg;
use crate::output::Output;
use crate::CliError;

pub const CHECKS: [&str; 6] = ["device_a", "device_b", "kerr_zero_crossing", "kerr_metrology", "transmon_bound", "wigner"];

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    expected: f64,
    tolerance: f64,
    pass: bool,
}

fn rel(name: &str, value: f64, expected: f64, tol: f64) -> Check {
    Check { name: name.into(), value, expected, tolerance: tol, pass: ((value - expected) / expected).abs() <= tol }
}

fn abs(name: &str, value: f64, expected: f64, tol: f64) -> Check {
    Check { name: name.into(), value, expected, tolerance: tol, pass: (value - expected).abs() <= tol }
}

fn group(name: &str) -> Result<Vec<Check>, CliError> {
    Ok(match name {
        "device_a" => {
            let p = analyze(&fixtures::device_a()?, 3)?;
            vec![
                rel("device_a.omega_mhz", p.omega_qubit * 1e3, 424.88, 0.01),
                rel("device_a.chi_mhz", p.chi * 1e3, 1.013, 0.10),
                rel("device_a.kerr_khz", p.kerr * 1e6, 3.60, 0.20),
            ]
        }
        "device_b" => {
            let p = analyze(&fixtures::device_b()?, 3)?;
            vec![rel("device_b.chi_mhz", p.chi * 1e3, -1.22, 0.10), rel("device_b.kerr_khz", p.kerr * 1e6, -13.5, 0.20)]
        }
        "kerr_zero_crossing" => {
            let grid: Vec<f64> = (0..=24).map(|k| 0.444 + 0.001 * k as f64).collect();
            let sweep = flux_sweep(&fixtures::device_a()?, &grid, &SweepOptions::default())?;
            let z = sweep.zero_crossings(|p| p.kerr);
            let value = if z.len() == 1 { z[0] } else { f64::NAN };
            vec![abs("device_a.kerr_zero_phi0", value, 0.456, 0.005)]
        }
        "kerr_metrology" => {
            let t_grid: Vec<f64> = (0..=500).map(|k| 4.0 * k as f64).collect();
            let mut out = Vec::new();
            for k_khz in [-13.5, -5.0, 3.6, 10.0] {
                let data = [0.6, 1.0, 1.4, 1.8, 2.2]
                    .iter()
                    .map(|a| {
                        let cfg = RamseyConfig {
                            alpha: C64::new(*a, 0.0),
                            detuning: 2e-3,
                            kerr: k_khz * 1e-6,
                            chi: 0.0,
                            t_grid: t_grid.clone(),
                            losses: None,
                            fock_dim: 40,
                        };
                        Ok(RamseyDataset { alpha: cfg.alpha, series: cavity_ramsey_unitary(&cfg)? })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let fit = extract_kerr_from_ramsey(&data, &FringeFitOptions::new(1.5e-3, 2.5e-3))?;
                out.push(rel(&format!("ramsey.kerr_{k_khz}_khz"), fit.kerr * 1e6, k_khz, 0.02));
            }
            out
        }
        "transmon_bound" => {
            let checks = check_literature(&literature_table()?, DEFAULT_E_C_MAX)?;
            let passed = checks.iter().filter(|c| c.passes).count();
            vec![
                abs("literature.passed", passed as f64, 19.0, 0.0),
                rel("bound.at_1mhz_khz", transmon_bound(1e-3, DEFAULT_E_C_MAX)? * 1e6, 0.472, 0.001),
            ]
        }
        "wigner" => {
            let grid = PhaseSpaceGrid::square(0.5, 3)?;
            let origin = |n: usize| wigner_exact(&DensityMatrix::product_mixed(1.0, &basis_vector(n, 12)), &grid).nearest(C64::new(0.0, 0.0));
            vec![abs("wigner.vacuum_origin", origin(0), FRAC_2_PI, 1e-6), abs("wigner.fock1_origin", origin(1), -FRAC_2_PI, 1e-6)]
        }
        other => return Err(CliError::Config(format!("verify: unknown check `{other}` (known: {})", CHECKS.join(", ")))),
    })
}

pub fn run(cfg: &VerifyCfg, out: &mut Output) -> Result<(), CliError> {
    let names: Vec<&str> = if cfg.checks.is_empty() { CHECKS.to_vec() } else { cfg.checks.iter().map(String::as_str).collect() };
    let mut all = Vec::new();
    for n in names {
        all.extend(group(n)?);
    }
    for c in &all {
        println!("{} {} = {} (expected {} ± {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.expected, c.tolerance);
    }
    let failed = all.iter().filter(|c| !c.pass).count();
    out.json("verify.json", &serde_json::json!({ "failed": failed, "checks": all }))?;
    if failed > 0 {
        return Err(CliError::Verify(failed));
    }
    Ok(())
}
