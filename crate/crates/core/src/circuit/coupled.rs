use faer::Mat;

use super::{
    build_fluxonium_operators, transmon_operators, CircuitSpec, CouplingForm, HarmonicModeParams, QubitParams,
};
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, HermitianOperator};
use crate::scalar::{from_usize, Real};

/// Qubit eigenbasis used for the coupled problem: level energies and the
/// charge operator in that basis. The charge operator is `charge` when
/// `imaginary` is false, `i·charge` otherwise.
#[derive(Clone, Debug)]
pub struct QubitBasis<T: Real> {
    pub energies: Vec<T>,
    pub charge: Mat<T>,
    pub imaginary: bool,
}

impl<T: Real> QubitBasis<T> {
    /// Diagonalizes the bare qubit of `spec` and keeps its lowest
    /// `spec.kept_qubit_levels()` states.
    pub fn from_spec(spec: &CircuitSpec<T>) -> Result<Self> {
        let keep = spec.kept_qubit_levels();
        match &spec.qubit {
            QubitParams::Fluxonium(p) => {
                let ops = build_fluxonium_operators(p, spec.qubit_dim)?;
                let es = ops.hamiltonian.eigh()?;
                let a = ops.charge.im().expect("fluxonium charge is imaginary");
                Ok(Self::project(&es.values, &es.vectors, a, keep, true))
            }
            QubitParams::Transmon(p) => {
                let (h, n) = transmon_operators(p)?;
                let es = symmetric_eigen(&h)?;
                Ok(Self::project(&es.values, &es.vectors, &n, keep, false))
            }
            QubitParams::Levels(s) => {
                let n = s.energies.len();
                Ok(Self {
                    energies: s.energies[..keep].to_vec(),
                    charge: Mat::from_fn(keep, keep, |i, j| s.charge[i][j]),
                    imaginary: s.charge_imaginary,
                }
                .truncated(keep.min(n)))
            }
        }
    }

    fn project(values: &[T], vectors: &Mat<T>, op: &Mat<T>, keep: usize, imaginary: bool) -> Self {
        let v = vectors.subcols(0, keep);
        let charge = v.transpose() * op * v;
        Self { energies: values[..keep].to_vec(), charge, imaginary }
    }

    fn truncated(self, keep: usize) -> Self {
        if keep == self.energies.len() {
            return self;
        }
        Self {
            energies: self.energies[..keep].to_vec(),
            charge: self.charge.subcols(0, keep).subrows(0, keep).to_owned(),
            imaginary: self.imaginary,
        }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

/// Index bookkeeping for the product basis `|q⟩ ⊗ |n_1⟩ ⊗ … ⊗ |n_M⟩`
/// (qubit slowest, last mode fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct ProductBasis {
    pub qubit_levels: usize,
    pub fock_dims: Vec<usize>,
    strides: Vec<usize>,
}

impl ProductBasis {
    pub fn new(qubit_levels: usize, fock_dims: Vec<usize>) -> Self {
        let mut strides = vec![1; fock_dims.len()];
        for k in (0..fock_dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * fock_dims[k + 1];
        }
        Self { qubit_levels, fock_dims, strides }
    }

    pub fn fock_block(&self) -> usize {
        self.fock_dims.iter().product()
    }

    pub fn dim(&self) -> usize {
        self.qubit_levels * self.fock_block()
    }

    pub fn index(&self, qubit: usize, photons: &[usize]) -> Option<usize> {
        if qubit >= self.qubit_levels || photons.len() != self.fock_dims.len() {
            return None;
        }
        let mut idx = qubit * self.fock_block();
        for (k, (&n, &d)) in photons.iter().zip(&self.fock_dims).enumerate() {
            if n >= d {
                return None;
            }
            idx += n * self.strides[k];
        }
        Some(idx)
    }

    pub fn label(&self, index: usize) -> (usize, Vec<usize>) {
        let block = self.fock_block();
        let q = index / block;
        let mut rest = index % block;
        let photons = self
            .strides
            .iter()
            .map(|&s| {
                let n = rest / s;
                rest %= s;
                n
            })
            .collect();
        (q, photons)
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }
}

/// Assembles `H_q ⊗ I + Σ_k ω_k a_k†a_k − i Σ_k g_k n ⊗ (a_k − a_k†)` in the
/// product of `qubit` and the Fock spaces of `modes`.
///
/// An imaginary charge `n = i N` gives the real coupling `g N ⊗ (a − a†)`.
/// A real charge is handled in the gauge `a → i a`, giving `g N ⊗ (a + a†)`.
/// Both leave photon numbers and overlap magnitudes unchanged.
pub fn build_coupled_in_basis<T: Real>(
    qubit: &QubitBasis<T>,
    modes: &[HarmonicModeParams<T>],
    form: CouplingForm,
    max_dim: usize,
) -> Result<(HermitianOperator<T>, ProductBasis)> {
    let basis = ProductBasis::new(qubit.len(), modes.iter().map(|m| m.fock_dim).collect());
    let dim = qubit
        .len().saturating_mul(modes.iter().map(|m| m.fock_dim).product::<usize>());
    if dim > max_dim {
        return Err(Error::DimensionCap { dim, cap: max_dim });
    }
    let block = basis.fock_block();
    let mut h = Mat::<T>::zeros(dim, dim);
    for idx in 0..dim {
        let (q, photons) = basis.label(idx);
        let mut e = qubit.energies[q];
        for (m, &n) in modes.iter().zip(&photons) {
            e += m.bare_freq * from_usize::<T>(n);
        }
        h[(idx, idx)] = e;
    }
    // a† sign: −√(n+1) in (a − a†), +√(n+1) in (a + a†)
    let creation_sign = if qubit.imaginary { -T::one() } else { T::one() };
    for (k, m) in modes.iter().enumerate() {
        if m.coupling_g == T::zero() {
            continue;
        }
        let stride = basis.stride(k);
        for q in 0..qubit.len() {
            for p in 0..qubit.len() {
                let c = qubit.charge[(p, q)];
                if c == T::zero() {
                    continue;
                }
                // |p⟩⟨q| ⊗ a†: photon created while the qubit goes q → p
                if form == CouplingForm::RotatingWave && p >= q {
                    continue;
                }
                for f in 0..block {
                    let photons = basis.label(f).1;
                    let n = photons[k];
                    if n + 1 >= m.fock_dim {
                        continue;
                    }
                    let v = creation_sign * m.coupling_g * c * from_usize::<T>(n + 1).sqrt();
                    let row = p * block + f + stride;
                    let col = q * block + f;
                    h[(row, col)] += v;
                    h[(col, row)] += v;
                }
            }
        }
    }
    Ok((HermitianOperator::real(h), basis))
}

/// Coupled Hamiltonian of `spec`, with the bare-basis bookkeeping needed to
/// label its eigenstates.
pub fn build_coupled_system<T: Real>(spec: &CircuitSpec<T>) -> Result<(HermitianOperator<T>, ProductBasis, QubitBasis<T>)> {
    spec.validate()?;
    let qubit = QubitBasis::from_spec(spec)?;
    let (h, basis) = build_coupled_in_basis(&qubit, &spec.modes, spec.coupling, spec.max_dim)?;
    Ok((h, basis, qubit))
}

pub fn build_coupled_hamiltonian<T: Real>(spec: &CircuitSpec<T>) -> Result<HermitianOperator<T>> {
    build_coupled_system(spec).map(|(h, _, _)| h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{FluxoniumParams, LevelStub};
    use crate::linalg::symmetric_eigenvalues;

    fn device_a_spec(levels: usize, g: f64) -> CircuitSpec {
        CircuitSpec::new(
            QubitParams::Fluxonium(FluxoniumParams::new(1.142, 0.559, 3.645, 0.5)),
            vec![
                HarmonicModeParams::new(5.3575, g, 10).named("storage"),
                HarmonicModeParams::new(6.4615, 0.105, 5).named("readout"),
            ],
            40,
        )
        .with_levels(levels)
    }

    #[test]
    fn product_basis_roundtrip() {
        let b = ProductBasis::new(3, vec![4, 2, 5]);
        for idx in 0..b.dim() {
            let (q, ph) = b.label(idx);
            assert_eq!(b.index(q, &ph), Some(idx));
        }
        assert_eq!(b.index(0, &[4, 0, 0]), None);
    }

    #[test]
    fn decoupled_spectrum_is_a_tensor_sum() {
        let mut spec = device_a_spec(8, 0.0);
        spec.modes[1].coupling_g = 0.0;
        let (h, _, qb) = build_coupled_system(&spec).unwrap();
        let ev = symmetric_eigenvalues(h.re()).unwrap();
        let mut sums = Vec::new();
        for &e in &qb.energies {
            for n in 0..10 {
                for r in 0..5 {
                    sums.push(e + 5.3575 * n as f64 + 6.4615 * r as f64);
                }
            }
        }
        sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&sums) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn device_a_builds_at_full_qubit_dim() {
        let mut spec = device_a_spec(40, 0.064);
        spec.qubit_levels = None;
        let h = build_coupled_hamiltonian(&spec).unwrap();
        assert_eq!(h.dim(), 40 * 10 * 5);
        assert!(h.is_hermitian());
    }

    #[test]
    fn jaynes_cummings_splitting() {
        let w = 5.0;
        let g = 0.02;
        let stub = LevelStub { energies: vec![0.0, w], charge: vec![vec![0.0, -1.0], vec![1.0, 0.0]], charge_imaginary: true };
        let mut spec: CircuitSpec = CircuitSpec::new(QubitParams::Levels(stub), vec![HarmonicModeParams::new(w, g, 12)], 2);
        spec.coupling = CouplingForm::RotatingWave;
        let ev = symmetric_eigenvalues(build_coupled_hamiltonian(&spec).unwrap().re()).unwrap();
        // manifold n: energies n·w ± g√n
        assert!(ev[0].abs() < 1e-12);
        for n in 1..8 {
            let lo = ev[2 * n - 1];
            let hi = ev[2 * n];
            let s = g * (n as f64).sqrt();
            assert!((lo - (n as f64 * w - s)).abs() < 1e-8, "n={n}");
            assert!((hi - (n as f64 * w + s)).abs() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn coupling_sign_and_mode_order_do_not_change_spectrum() {
        let spec = device_a_spec(6, 0.064);
        let base = symmetric_eigenvalues(build_coupled_hamiltonian(&spec).unwrap().re()).unwrap();
        let mut flipped = spec.clone();
        flipped.modes[0].coupling_g = -0.064;
        let f = symmetric_eigenvalues(build_coupled_hamiltonian(&flipped).unwrap().re()).unwrap();
        let mut swapped = spec.clone();
        swapped.modes.swap(0, 1);
        swapped.storage_mode = 1;
        let s = symmetric_eigenvalues(build_coupled_hamiltonian(&swapped).unwrap().re()).unwrap();
        for k in 0..base.len() {
            assert!((base[k] - f[k]).abs() < 1e-10);
            assert!((base[k] - s[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let mut spec = device_a_spec(40, 0.064);
        spec.max_dim = 1000;
        assert!(matches!(build_coupled_hamiltonian(&spec), Err(Error::DimensionCap { dim: 2000, cap: 1000 })));
    }
}
