use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fluxqed");

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn fluxqed(args: &[&str], cfg: Option<&Path>, out: &Path) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.env_remove("FLUXQED_OUT").arg("--out").arg(out);
    if let Some(c) = cfg {
        cmd.arg("--config").arg(c);
    }
    cmd.args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Data rows of a CSV artifact, header comments and column names skipped.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    let data = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (cols, data)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (cols, data) = rows(path);
    let i = cols.iter().position(|c| c == name).unwrap();
    data.iter().map(|r| r[i]).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"device":"builtin:device_a","seed":11,"spectrum":{"flux":[0.0,0.25,0.5]}}"#);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&fluxqed(&["spectrum"], Some(&cfg), &a)), 0);
    assert_eq!(code(&fluxqed(&["spectrum"], Some(&cfg), &b)), 0);
    let fa = std::fs::read(a.join("spectrum.csv")).unwrap();
    assert_eq!(fa, std::fs::read(b.join("spectrum.csv")).unwrap());
    let text = String::from_utf8(fa).unwrap();
    for key in ["# tool: fluxqed ", "# config_sha256: ", "# seed: 11\n", "# units: "] {
        assert!(text.contains(key), "missing {key}");
    }
    assert!(std::fs::read_to_string(a.join("run.log")).unwrap().contains("unix_time"));
    assert!(!text.contains("unix_time"));
}

#[test]
fn half_flux_transition_matches_device_a() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"device":"builtin:device_a","spectrum":{"flux":{"start":0.0,"stop":1.0,"points":5}}}"#);
    let out = tmp.path().join("o");
    assert_eq!(code(&fluxqed(&["spectrum"], Some(&cfg), &out)), 0);
    let flux = column(&out.join("spectrum.csv"), "flux_phi0");
    let f = column(&out.join("spectrum.csv"), "f_ge_ghz");
    let i = flux.iter().position(|x| *x == 0.5).unwrap();
    assert!((f[i] / 0.42488 - 1.0).abs() < 0.01, "{}", f[i]);
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let empty = write_config(tmp.path(), "e.json", r#"{"device":"builtin:device_a","spectrum":{"flux":[]}}"#);
    let o = fluxqed(&["spectrum"], Some(&empty), &out);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));

    let typo = write_config(tmp.path(), "t.json", r#"{"device":"builtin:device_a","spectrm":{}}"#);
    assert_eq!(code(&fluxqed(&["spectrum"], Some(&typo), &out)), 2);

    let missing = write_config(tmp.path(), "m.json", r#"{"device":"nowhere.json"}"#);
    assert_eq!(code(&fluxqed(&["spectrum"], Some(&missing), &out)), 2);

    assert_eq!(code(&fluxqed(&["spectrum"], None, &out)), 2, "no device");
    assert_eq!(code(&fluxqed(&["nonsense"], None, &out)), 2);

    let fock = write_config(tmp.path(), "f.json", r#"{"qfunc":{"state":{"kind":"fock","n":5},"fock_dim":4}}"#);
    assert_eq!(code(&fluxqed(&["qfunc"], Some(&fock), &out)), 2);
}

#[test]
fn bound_passes_all_literature_points() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    assert_eq!(code(&fluxqed(&["bound", "--emit-plots"], None, &out)), 0);
    let d = &json(&out.join("bound.json"))["data"];
    assert_eq!(d["literature_passed"], 19);
    assert_eq!(d["literature_total"], 19);
    assert!((d["bound_at_1mhz_khz"].as_f64().unwrap() - 0.472).abs() < 1e-3);
    let lit = std::fs::read_to_string(out.join("literature.csv")).unwrap();
    assert_eq!(lit.lines().filter(|l| l.ends_with(",true")).count(), 19);
    assert!(out.join("bound.gp").exists());
}

#[test]
fn exact_vacuum_wigner_peaks_at_two_over_pi() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    assert_eq!(code(&fluxqed(&["wigner"], None, &out)), 0);
    let d = &json(&out.join("wigner.json"))["data"];
    assert!((d["max"].as_f64().unwrap() - std::f64::consts::FRAC_2_PI).abs() < 1e-6);
    let text = std::fs::read_to_string(out.join("wigner.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("im\\re,")));
}

#[test]
fn device_b_chi_at_half_flux() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"device":"builtin:device_b","chikerr":{"flux":[0.5]}}"#);
    let out = tmp.path().join("o");
    assert_eq!(code(&fluxqed(&["chikerr"], Some(&cfg), &out)), 0);
    let chi = column(&out.join("chikerr.csv"), "chi_ghz")[0];
    assert!((chi * 1e3 / -1.22 - 1.0).abs() < 0.10, "{chi}");
}

#[test]
fn device_a_kerr_crosses_zero_near_0456() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"device":"builtin:device_a","chikerr":{"flux":{"start":0.44,"stop":0.47,"points":16}}}"#);
    let out = tmp.path().join("o");
    assert_eq!(code(&fluxqed(&["chikerr"], Some(&cfg), &out)), 0);
    let z = json(&out.join("chikerr.json"))["data"]["kerr_zero_crossings_phi0"].clone();
    let z: Vec<f64> = serde_json::from_value(z).unwrap();
    assert_eq!(z.len(), 1, "{z:?}");
    assert!((z[0] - 0.456).abs() < 0.005, "{z:?}");
}

#[test]
fn uncoupled_device_has_zero_chi() {
    let tmp = TempDir::new().unwrap();
    let mut dev: serde_json::Value = serde_json::from_str(fluxqed::circuit::fixtures::DEVICE_A_JSON).unwrap();
    for m in dev["modes"].as_array_mut().unwrap() {
        m["coupling_g_ghz"] = 0.0.into();
    }
    std::fs::write(tmp.path().join("dev.json"), dev.to_string()).unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"device":"dev.json","chikerr":{"flux":[0.3,0.4,0.5]}}"#);
    let out = tmp.path().join("o");
    assert_eq!(code(&fluxqed(&["chikerr"], Some(&cfg), &out)), 0);
    assert!(column(&out.join("chikerr.csv"), "chi_ghz").iter().all(|c| c.abs() < 1e-12));
}

#[test]
fn ramsey_fit_recovers_the_model_kerr() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"device":"builtin:device_b","ramsey":{"amplitudes":[0.6,1.0,1.4,1.8,2.2]}}"#);
    let out = tmp.path().join("o");
    assert_eq!(code(&fluxqed(&["ramsey"], Some(&cfg), &out)), 0);
    let d = &json(&out.join("ramsey_fit.json"))["data"];
    let k = d["fitted_kerr_khz"].as_f64().unwrap();
    assert!((k / -13.5 - 1.0).abs() < 0.02, "{k}");
    assert_eq!(rows(&out.join("ramsey.csv")).0.len(), 6);
}

#[test]
fn flag_beats_environment_for_output_dir() {
    let tmp = TempDir::new().unwrap();
    let (env_dir, flag_dir) = (tmp.path().join("env"), tmp.path().join("flag"));
    let run = |extra: Option<&Path>| {
        let mut cmd = Command::new(BIN);
        cmd.env("FLUXQED_OUT", &env_dir);
        if let Some(d) = extra {
            cmd.arg("--out").arg(d);
        }
        cmd.arg("bound").output().unwrap()
    };
    assert_eq!(code(&run(None)), 0);
    assert!(env_dir.join("bound.csv").exists());
    assert_eq!(code(&run(Some(&flag_dir))), 0);
    assert!(flag_dir.join("bound.csv").exists());
}

#[test]
fn seed_reaches_the_optimizer_and_the_header() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        r#"{"optimize":{"options":{"starts":1,"max_evals":6,"qubit_dim":40,"qubit_levels":8,"fock_dim":6}}}"#,
    );
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&fluxqed(&["optimize", "--seed", "5"], Some(&cfg), &a)), 0);
    assert_eq!(code(&fluxqed(&["optimize", "--seed", "5"], Some(&cfg), &b)), 0);
    let ja = std::fs::read(a.join("zero_kerr.json")).unwrap();
    assert_eq!(ja, std::fs::read(b.join("zero_kerr.json")).unwrap());
    let d = json(&a.join("zero_kerr.json"));
    assert_eq!(d["header"]["seed"], "5");
    assert_eq!(d["data"]["result"]["seed"], 5);
}

#[test]
fn fixed_chi_sweep_reports_the_fluxonium_sign_change() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", r#"{"optimize":{"mode":"fixed_chi","delta_ghz":{"start":-2.6,"stop":-2.1,"points":11}}}"#);
    let out = tmp.path().join("o");
    assert_eq!(code(&fluxqed(&["optimize"], Some(&cfg), &out)), 0);
    let zeros = json(&out.join("fixed_chi_zeros.json"))["data"]["zeros"].clone();
    let zeros = zeros.as_array().unwrap();
    assert_eq!(zeros.len(), 1);
    assert_eq!(zeros[0]["kind"], "sign_change");
    assert!(zeros[0]["overlap"].as_f64().unwrap() > 0.99);
    assert_eq!(column(&out.join("fixed_chi.csv"), "delta_ghz").len(), 11);
}

#[test]
fn verify_reports_each_check_and_fails_on_device_a_chi() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let o = fluxqed(&["verify"], None, &out);
    assert_eq!(code(&o), 4);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let fails: Vec<&str> = stdout.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(fails.len(), 1, "{stdout}");
    assert!(fails[0].contains("device_a.chi_mhz"));
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 12);
    assert_eq!(json(&out.join("verify.json"))["data"]["failed"], 1);
}
