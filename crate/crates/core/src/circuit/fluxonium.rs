use faer::Mat;

use super::FluxoniumParams;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, HermitianOperator};
use crate::scalar::{from_usize, lit, two_pi, Real};

/// Fluxonium operators in the harmonic basis of its own LC oscillator.
#[derive(Clone, Debug)]
pub struct FluxoniumOperators<T: Real> {
    /// `φ = φ_zpf (b + b†)`
    pub phase: HermitianOperator<T>,
    /// `n = i n_zpf (b† − b)`, stored as its imaginary part.
    pub charge: HermitianOperator<T>,
    /// `4E_C n² + ½E_L φ² − E_J cos(φ − φ_ext)`
    pub hamiltonian: HermitianOperator<T>,
}

/// Builds `φ`, `n` and the fluxonium Hamiltonian on `dim` oscillator levels.
///
/// The LC part is the exact diagonal `√(8E_C E_L)(b†b + ½)`; the cosine is
/// evaluated through the eigendecomposition of the truncated `φ`, so it is
/// exact on the truncated space.
pub fn build_fluxonium_operators<T: Real>(params: &FluxoniumParams<T>, dim: usize) -> Result<FluxoniumOperators<T>> {
    params.validate()?;
    if dim < 5 {
        return Err(Error::Truncation(format!("fluxonium basis dim {dim} < 5")));
    }
    let two = lit::<T>(2.0);
    let phi_zpf = (two * params.e_c / params.e_l).powf(lit::<T>(0.25));
    let n_zpf = T::one() / (two * phi_zpf);
    let plasma = (lit::<T>(8.0) * params.e_c * params.e_l).sqrt();

    let phase = Mat::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            phi_zpf * from_usize::<T>(j).sqrt()
        } else if i == j + 1 {
            phi_zpf * from_usize::<T>(i).sqrt()
        } else {
            T::zero()
        }
    });
    // n = i·A with A = n_zpf (b† − b): A[i+1][i] = +√(i+1), A[i][i+1] = −√(i+1)
    let charge_im = Mat::from_fn(dim, dim, |i, j| {
        if i == j + 1 {
            n_zpf * from_usize::<T>(i).sqrt()
        } else if j == i + 1 {
            -n_zpf * from_usize::<T>(j).sqrt()
        } else {
            T::zero()
        }
    });

    let phi_ext = two_pi::<T>() * params.flux;
    let es = symmetric_eigen(&phase)?;
    let mut h = Mat::<T>::zeros(dim, dim);
    if params.e_j != T::zero() {
        let v = &es.vectors;
        for k in 0..dim {
            let w = -params.e_j * (es.values[k] - phi_ext).cos();
            for j in 0..dim {
                let vjk = v[(j, k)] * w;
                for i in 0..dim {
                    h[(i, j)] += v[(i, k)] * vjk;
                }
            }
        }
        // symmetrize away rounding so the lower-triangle solver sees a clean matrix
        for j in 0..dim {
            for i in (j + 1)..dim {
                let avg = (h[(i, j)] + h[(j, i)]) / two;
                h[(i, j)] = avg;
                h[(j, i)] = avg;
            }
        }
    }
    for i in 0..dim {
        h[(i, i)] += plasma * (from_usize::<T>(i) + lit::<T>(0.5));
    }

    Ok(FluxoniumOperators {
        phase: HermitianOperator::real(phase),
        charge: HermitianOperator::imaginary(charge_im),
        hamiltonian: HermitianOperator::real(h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigenvalues;

    fn device_a(flux: f64) -> FluxoniumParams<f64> {
        FluxoniumParams::new(1.142, 0.559, 3.645, flux)
    }

    fn levels(p: &FluxoniumParams<f64>, dim: usize) -> Vec<f64> {
        let ops = build_fluxonium_operators(p, dim).unwrap();
        symmetric_eigenvalues(ops.hamiltonian.re()).unwrap()
    }

    #[test]
    fn harmonic_limit_has_uniform_spacing() {
        let p = FluxoniumParams::new(0.9, 0.4, 0.0, 0.3);
        let ev = levels(&p, 30);
        let w = (8.0 * 0.9 * 0.4_f64).sqrt();
        for k in 1..ev.len() {
            assert!(((ev[k] - ev[k - 1]) - w).abs() < 1e-10 * w);
        }
    }

    #[test]
    fn spectrum_is_even_in_flux() {
        let a = levels(&device_a(0.5), 60);
        let b = levels(&device_a(-0.5), 60);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
        let c = levels(&device_a(0.37), 60);
        let d = levels(&device_a(-0.37), 60);
        for (x, y) in c.iter().zip(&d).take(20) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_is_flux_periodic() {
        let a = levels(&device_a(0.41), 60);
        let b = levels(&device_a(1.41), 60);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn truncation_converges() {
        // low-lying levels at dim 60 and 120 agree (convergence oracle)
        let a = levels(&device_a(0.5), 60);
        let b = levels(&device_a(0.5), 120);
        for k in 0..6 {
            assert!((a[k] - b[k]).abs() < 1e-6, "level {k}: {} vs {}", a[k], b[k]);
        }
    }

    #[test]
    fn canonical_commutator_away_from_cutoff() {
        let dim = 20;
        let ops = build_fluxonium_operators(&device_a(0.5), dim).unwrap();
        let phi = ops.phase.re();
        let a = ops.charge.im().unwrap();
        // [φ, iA] = i(φA − Aφ) should equal i·I
        let c = phi * a - a * phi;
        for i in 0..dim - 2 {
            for j in 0..dim - 2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((c[(i, j)] - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn operators_are_hermitian() {
        let ops = build_fluxonium_operators(&device_a(0.43), 40).unwrap();
        assert!(ops.phase.is_hermitian());
        assert!(ops.charge.is_hermitian());
        assert!(ops.hamiltonian.is_hermitian());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            build_fluxonium_operators(&FluxoniumParams::new(-1.0, 0.5, 1.0, 0.5), 20),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            build_fluxonium_operators(&FluxoniumParams::new(1.0, 0.0, 1.0, 0.5), 20),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(build_fluxonium_operators(&device_a(0.5), 4), Err(Error::Truncation(_))));
    }

    #[test]
    fn single_precision_builds() {
        let p = FluxoniumParams::<f32>::new(0.9, 0.4, 0.0, 0.0);
        let ops = build_fluxonium_operators(&p, 12).unwrap();
        let ev = symmetric_eigenvalues(ops.hamiltonian.re()).unwrap();
        let w = (8.0_f32 * 0.9 * 0.4).sqrt();
        assert!(((ev[1] - ev[0]) - w).abs() < 1e-4);
    }
}
