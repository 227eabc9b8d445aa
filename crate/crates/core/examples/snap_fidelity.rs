//! SNAP preparation of |1⟩ and (|0⟩ − |1⟩)/√2 on the device A effective model.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use fluxqed::control::{error_budget, prepare_snap, simulate_snap_prep, SnapOptions};
use fluxqed::dynamics::{EffectiveModel, InitialState, LossRates};
use fluxqed::Cx;

fn main() -> fluxqed::Result<()> {
    let model = EffectiveModel::<f64>::new(1.013e-3, 3.6e-6, 16);
    let losses = LossRates::from_coherence(12.0, 123.0, 16.0, 0.66)?;
    let init = InitialState::new(0.9, fluxqed::dynamics::StorageState::Vacuum);
    let targets: [(&str, Vec<Cx<f64>>); 2] = [
        ("|1>", vec![Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)]),
        ("(|0>-|1>)/sqrt2", vec![Cx::new(FRAC_1_SQRT_2, 0.0), Cx::new(-FRAC_1_SQRT_2, 0.0)]),
    ];
    for (name, target) in targets {
        let t = Instant::now();
        let prep = prepare_snap(&[PI], &target, &model, 1600.0, 40.0, &SnapOptions::default())?;
        println!(
            "{name}: alpha1 {:.4} alpha2 {:.4} ideal {:.4}% realized {:.4}% gate infidelity {:.3e} ({} evals, {:.1?})",
            prep.spec.alpha1.re,
            prep.spec.alpha2.re,
            100.0 * prep.ideal_error,
            100.0 * prep.realized_error,
            prep.optimization.infidelity,
            prep.optimization.evals,
            t.elapsed()
        );
        let free = simulate_snap_prep(&prep.spec, &model, &LossRates::none(), &InitialState::ground_vacuum(), &target, 1e-8)?;
        let lossy = simulate_snap_prep(&prep.spec, &model, &losses, &init, &target, 1e-8)?;
        println!("  loss-free fidelity {:.4}%  with losses {:.2}%", 100.0 * free.fidelity, 100.0 * lossy.fidelity);
        let b = error_budget(&prep.spec, &model, &losses, &init, &target, 1e-8)?;
        println!("  budget: intrinsic {:.2}% total {:.2}%", 100.0 * b.intrinsic, 100.0 * b.total);
        for ((name, w), (_, r)) in b.per_channel.iter().zip(&b.raw) {
            println!("    {name:<22} weighted {:>6.2}%  raw {:>6.2}%", 100.0 * w, 100.0 * r);
        }
        println!("  elapsed {:.1?}", t.elapsed());
    }
    Ok(())
}
