use fluxqed::dynamics::{
    evolve, evolve_sector, qubit_pulse, DensityMatrix, DriveTerm, EffectiveModel, InitialState, LossRates, PulseShape,
    SectorState, StorageState,
};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

mod common;
use common::{liouvillian, max_diff, propagate};

fn square(target_qubit: bool, duration: f64, amplitude: f64, phase: f64) -> DriveTerm<f64> {
    let target = if target_qubit { fluxqed::dynamics::DriveTarget::Qubit } else { fluxqed::dynamics::DriveTarget::Storage };
    let env = vec![C::new(amplitude, 0.0); 11];
    DriveTerm::new(target, env, duration / 10.0, 0.0, phase).unwrap()
}

fn coherence_losses() -> LossRates<f64> {
    LossRates { kappa_s: 1.0 / 12.0, gamma_down: 0.006, gamma_up: 0.002, gamma_phi: 0.05 }
}

#[test]
fn undriven_lossy_evolution_matches_matrix_exponential() {
    let model = EffectiveModel::<f64>::new(1.0e-3, -3.0e-6, 8);
    let losses = coherence_losses();
    let init = InitialState::new(0.7, StorageState::coherent(C::new(0.9, 0.4)));
    let rho0 = init.density(8).unwrap();
    let t = 3000.0;
    let traj = evolve(&rho0, &model, &[], &losses, &[0.0, t], 1e-10).unwrap();
    let l = liouvillian(&model, C::new(0.0, 0.0), C::new(0.0, 0.0), &losses);
    let reference = propagate(&l, &rho0, t);
    let err = max_diff(traj.last().matrix().as_slice(), &reference);
    assert!(err < 1e-8, "deviation {err:e}");
}

#[test]
fn driven_lossy_evolution_matches_matrix_exponential() {
    let model = EffectiveModel::<f64>::new(-1.2e-3, 1.0e-5, 10);
    let losses = coherence_losses();
    let t = 400.0;
    let drives = [square(true, t, 2.0e-3, 0.4), square(false, t, 1.5e-3, -1.1)];
    let rho0 = InitialState::<f64>::ground_vacuum().density(10).unwrap();
    let traj = evolve(&rho0, &model, &drives, &losses, &[0.0, t], 1e-10).unwrap();
    let cq = C::new(2.0e-3, 0.0) * C::from_polar(1.0, 0.4);
    let cs = C::new(1.5e-3, 0.0) * C::from_polar(1.0, -1.1);
    let l = liouvillian(&model, cq, cs, &losses);
    let reference = propagate(&l, &rho0, t);
    let err = max_diff(traj.last().matrix().as_slice(), &reference);
    assert!(err < 1e-8, "deviation {err:e}");
}

#[test]
fn closed_system_preserves_trace_and_purity() {
    let model = EffectiveModel::<f64>::new(1.0e-3, -3.6e-6, 12);
    let drives = [
        qubit_pulse(PulseShape::Gaussian, 200.0, 0.0, 0.0, PI / 2.0).unwrap(),
        qubit_pulse(PulseShape::Gaussian, 200.0, 0.0, 0.0, PI / 2.0).unwrap().starting_at(9000.0),
    ];
    let init = InitialState::new(1.0, StorageState::coherent(C::new(1.0, 0.0)));
    let rho0 = init.density(12).unwrap();
    let grid: Vec<f64> = (0..=10).map(|k| 1000.0 * k as f64).collect();
    let traj = evolve(&rho0, &model, &drives, &LossRates::none(), &grid, 1e-9).unwrap();
    for s in &traj.states {
        assert!((s.trace() - 1.0).abs() < 1e-8);
        assert!((s.purity() - 1.0).abs() < 1e-7);
        assert!(s.hermiticity_error() < 1e-12);
    }
}

#[test]
fn coherent_state_amplitude_and_vacuum_population_decay() {
    let kappa = 1.0 / 12.0;
    let model = EffectiveModel::<f64>::new(1.0e-3, 0.0, 20);
    let losses = LossRates { kappa_s: kappa, ..LossRates::none() };
    let rho0 = InitialState::new(1.0, StorageState::coherent(C::new(2.0, 0.0))).density(20).unwrap();
    let grid: Vec<f64> = (0..=5).map(|k| 1000.0 * k as f64).collect();
    let traj = evolve(&rho0, &model, &[], &losses, &grid, 1e-10).unwrap();
    // the truncated initial state sets the reference point
    let s0 = traj.states[0].storage_mean_field();
    let p0 = traj.states[0].photon_distribution()[0];
    for (t, s) in grid.iter().zip(&traj.states) {
        let decay = (-kappa * t * 1e-3).exp();
        let mf = s.storage_mean_field();
        assert!((mf - s0 * decay.sqrt()).norm() < 1e-6, "t = {t}");
        let nbar = s0.norm_sqr();
        let expect = (-nbar * decay).exp() * p0 / (-nbar).exp();
        assert!((s.photon_distribution()[0] - expect).abs() < 1e-4, "t = {t}");
    }
    let exact = 2.0 * (-kappa * 5.0 / 2.0).exp();
    assert!((traj.last().storage_mean_field().re - exact).abs() < 1e-6);
    assert!((traj.last().photon_distribution()[0] - (-4.0 * (-kappa * 5.0).exp()).exp()).abs() < 1e-4);
}

#[test]
fn pure_dephasing_decays_qubit_coherence() {
    let gamma_phi = 1.0 / 16.0;
    let model = EffectiveModel::<f64>::new(0.0, 0.0, 2);
    let losses = LossRates { gamma_phi, ..LossRates::none() };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [C::new(h, 0.0), C::new(0.0, 0.0), C::new(h, 0.0), C::new(0.0, 0.0)];
    let rho0 = DensityMatrix::from_pure(2, &psi).unwrap();
    let grid: Vec<f64> = (0..=8).map(|k| 2000.0 * k as f64).collect();
    let traj = evolve(&rho0, &model, &[], &losses, &grid, 1e-10).unwrap();
    for (t, s) in grid.iter().zip(&traj.states) {
        let expect = 0.5 * (-gamma_phi * t * 1e-3).exp();
        assert!((s.get(0, 2).norm() - expect).abs() < 1e-9);
        assert!((s.excited_population() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn halving_tolerance_changes_result_below_tolerance() {
    let model = EffectiveModel::<f64>::new(1.0e-3, -3.6e-6, 10);
    let drives = [qubit_pulse(PulseShape::Gaussian, 400.0, 1.0e-3, 0.0, PI).unwrap()];
    let rho0 = InitialState::new(0.9, StorageState::coherent(C::new(1.2, 0.0))).density(10).unwrap();
    let grid = [0.0, 400.0, 1500.0];
    let a = evolve(&rho0, &model, &drives, &coherence_losses(), &grid, 1e-7).unwrap();
    let b = evolve(&rho0, &model, &drives, &coherence_losses(), &grid, 5e-8).unwrap();
    let err = max_diff(a.last().matrix().as_slice(), b.last().matrix().as_slice());
    assert!(err < 1e-7, "deviation {err:e}");
}

fn inversion_for_fock(n: usize, pulse: &DriveTerm<f64>, model: &EffectiveModel<f64>) -> f64 {
    let psi: Vec<C> = (0..model.dim()).map(|i| C::new(if i == n { 1.0 } else { 0.0 }, 0.0)).collect();
    let rho0 = DensityMatrix::from_pure(model.fock_dim, &psi).unwrap();
    let traj = evolve(&rho0, model, std::slice::from_ref(pulse), &LossRates::none(), &[0.0, pulse.end()], 1e-9).unwrap();
    traj.last().excited_population()
}

#[test]
fn short_gaussian_pulse_is_unselective() {
    let model = EffectiveModel::<f64>::new(1.0e-3, -3.6e-6, 5);
    let pulse = qubit_pulse(PulseShape::Gaussian, 40.0, 0.0, 0.0, PI).unwrap();
    for n in 0..4 {
        let p = inversion_for_fock(n, &pulse, &model);
        assert!(p > 0.95, "n = {n}: {p}");
    }
}

#[test]
fn long_gaussian_pulse_selects_photon_number() {
    let chi = 1.0e-3;
    let model = EffectiveModel::<f64>::new(chi, 0.0, 5);
    for target in 0..3 {
        let pulse = qubit_pulse(PulseShape::Gaussian, 1600.0, target as f64 * chi, 0.0, PI).unwrap();
        for n in 0..4 {
            let p = inversion_for_fock(n, &pulse, &model);
            if n == target {
                assert!(p > 0.95, "target {target}: {p}");
            } else {
                assert!(p < 0.05, "target {target}, n = {n}: {p}");
            }
        }
    }
}

#[test]
fn sector_path_agrees_for_mixed_initial_state() {
    let model = EffectiveModel::<f64>::new(-1.22e-3, -1.35e-5, 9);
    let drives = [qubit_pulse(PulseShape::Gaussian, 800.0, -1.22e-3, 0.3, PI).unwrap().starting_at(100.0)];
    let rho0 = InitialState::new(0.9, StorageState::coherent(C::new(0.8, -0.6))).density(9).unwrap();
    let grid = [0.0, 500.0, 900.0, 2000.0];
    let losses = coherence_losses();
    let full = evolve(&rho0, &model, &drives, &losses, &grid, 1e-10).unwrap();
    let sec = evolve_sector(&SectorState::from_density(&rho0), &model, &drives, &losses, &grid, 1e-10).unwrap();
    for (f, s) in full.states.iter().zip(&sec) {
        let pf = f.photon_distribution();
        for (a, b) in pf.iter().zip(s.photon_distribution()) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!((f.excited_population() - s.excited_population()).abs() < 1e-8);
    }
}

#[test]
fn single_precision_evolution_tracks_double() {
    let m64 = EffectiveModel::<f64>::new(1.0e-3, 0.0, 4);
    let m32 = EffectiveModel::<f32>::new(1.0e-3, 0.0, 4);
    let d64 = qubit_pulse(PulseShape::Gaussian, 100.0_f64, 0.0, 0.0, PI).unwrap();
    let d32 = qubit_pulse(PulseShape::Gaussian, 100.0_f32, 0.0, 0.0, std::f32::consts::PI).unwrap();
    let r64 = InitialState::<f64>::ground_vacuum().density(4).unwrap();
    let r32 = InitialState::<f32>::ground_vacuum().density(4).unwrap();
    let a = evolve(&r64, &m64, &[d64], &LossRates::none(), &[0.0, 100.0], 1e-9).unwrap();
    let b = evolve(&r32, &m32, &[d32], &LossRates::none(), &[0.0, 100.0], 1e-4).unwrap();
    assert!((a.last().excited_population() - b.last().excited_population() as f64).abs() < 1e-3);
}
