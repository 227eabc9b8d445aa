use fluxqed::circuit::fixtures;
use fluxqed::dressed::analyze;

fn main() {
    for (name, spec) in [("A", fixtures::device_a().unwrap()), ("B", fixtures::device_b().unwrap())] {
        let t = std::time::Instant::now();
        let p = analyze(&spec, 4).unwrap();
        println!(
            "device {name}: Omega {:.3} MHz  chi {:.4} MHz  K {:.3} kHz  K3 {:.3} kHz  overlap {:.5}  chi_r {:?}  ({:.2?})",
            p.omega_qubit * 1e3,
            p.chi * 1e3,
            p.kerr * 1e6,
            p.kerr_p(3).unwrap() * 1e6,
            p.hybridization_overlap,
            p.chi_other.iter().map(|c| c.1 * 1e3).collect::<Vec<_>>(),
            t.elapsed()
        );
        println!("{:?}", p.warnings);
    }
}
