use faer::Mat;

use super::{HarmonicModeParams, TransmonParams};
use crate::error::Result;
use crate::linalg::HermitianOperator;
use crate::scalar::{from_usize, lit, Real};

/// Transmon Hamiltonian and charge operator in the charge basis
/// `n ∈ [-n_cutoff, n_cutoff]` (row 0 is `n = -n_cutoff`).
pub fn transmon_operators<T: Real>(params: &TransmonParams<T>) -> Result<(Mat<T>, Mat<T>)> {
    params.validate()?;
    let nc = params.n_cutoff;
    let d = 2 * nc + 1;
    let charge_of = |i: usize| from_usize::<T>(i) - from_usize::<T>(nc);
    let four = lit::<T>(4.0);
    let hop = -params.e_j / lit::<T>(2.0);
    let h = Mat::from_fn(d, d, |i, j| {
        if i == j {
            let n = charge_of(i);
            four * params.e_c * n * n
        } else if i + 1 == j || j + 1 == i {
            hop
        } else {
            T::zero()
        }
    });
    let n = Mat::from_fn(d, d, |i, j| if i == j { charge_of(i) } else { T::zero() });
    Ok((h, n))
}

/// Transmon coupled to one harmonic mode, `H_t ⊗ I + I ⊗ ω a†a + i g n (a - a†)`,
/// in the charge ⊗ Fock basis (charge index slowest).
///
/// The mode operators are written in the gauge `a → i a`, which turns the
/// coupling into `-g n (a + a†)` and makes the matrix real without changing
/// its spectrum.
pub fn build_transmon_hamiltonian<T: Real>(
    params: &TransmonParams<T>,
    mode: &HarmonicModeParams<T>,
) -> Result<HermitianOperator<T>> {
    mode.validate()?;
    let (ht, n) = transmon_operators(params)?;
    let dq = ht.nrows();
    let df = mode.fock_dim;
    let dim = dq * df;
    let mut h = Mat::<T>::zeros(dim, dim);
    for q in 0..dq {
        for p in 0..dq {
            let v = ht[(q, p)];
            if v != T::zero() {
                for k in 0..df {
                    h[(q * df + k, p * df + k)] = v;
                }
            }
        }
        for k in 0..df {
            h[(q * df + k, q * df + k)] += mode.bare_freq * from_usize::<T>(k);
        }
        let nq = n[(q, q)];
        for k in 0..df - 1 {
            let v = -mode.coupling_g * nq * from_usize::<T>(k + 1).sqrt();
            h[(q * df + k + 1, q * df + k)] = v;
            h[(q * df + k, q * df + k + 1)] = v;
        }
    }
    Ok(HermitianOperator::real(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigenvalues;

    #[test]
    fn asymptotic_transition_frequency() {
        let p = TransmonParams::new(0.3, 15.0, 15);
        let (h, _) = transmon_operators(&p).unwrap();
        let ev = symmetric_eigenvalues(&h).unwrap();
        let approx = (8.0_f64 * 0.3 * 15.0).sqrt() - 0.3;
        assert!(((ev[1] - ev[0]) - approx).abs() / approx < 0.02);
    }

    #[test]
    fn cutoff_converges() {
        let mode = HarmonicModeParams::new(7.0, 0.1, 5);
        let a = build_transmon_hamiltonian(&TransmonParams::new(0.53, 26.5, 15), &mode).unwrap();
        let b = build_transmon_hamiltonian(&TransmonParams::new(0.53, 26.5, 25), &mode).unwrap();
        let ea: Vec<f64> = symmetric_eigenvalues(a.re()).unwrap();
        let eb = symmetric_eigenvalues(b.re()).unwrap();
        for k in 0..4 {
            assert!((ea[k] - eb[k]).abs() < 1e-8, "{k}: {} vs {}", ea[k], eb[k]);
        }
    }

    #[test]
    fn builds_and_is_hermitian() {
        let h = build_transmon_hamiltonian(
            &TransmonParams::new(0.530, 26.5, 15),
            &HarmonicModeParams::new(6.0, 0.05, 5),
        )
        .unwrap();
        assert_eq!(h.dim(), 31 * 5);
        assert!(h.is_hermitian());
    }

    #[test]
    fn small_cutoff_is_rejected() {
        let r = build_transmon_hamiltonian(&TransmonParams::new(0.5, 20.0, 4), &HarmonicModeParams::new(6.0, 0.05, 5));
        assert!(matches!(r, Err(crate::error::Error::Truncation(_))));
    }
}
