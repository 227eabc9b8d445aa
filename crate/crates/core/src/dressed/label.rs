use std::collections::HashMap;
use std::fmt;

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::AMBIGUOUS_OVERLAP;
use crate::circuit::ProductBasis;
use crate::error::{invalid, Result};
use crate::linalg::{Eigensystem, HermitianOperator};
use crate::scalar::{lit, Real};

/// Bare product state: qubit eigenstate index and photon number per mode.
/// Ordering is lexicographic on `(qubit, photons)`, which is also the
/// product-basis index order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BareLabel {
    pub qubit: usize,
    pub photons: Vec<usize>,
}

impl BareLabel {
    pub fn new(qubit: usize, photons: Vec<usize>) -> Self {
        Self { qubit, photons }
    }

    /// `n` photons in `mode`, none elsewhere.
    pub fn single(qubit: usize, modes: usize, mode: usize, n: usize) -> Self {
        let mut photons = vec![0; modes];
        photons[mode] = n;
        Self { qubit, photons }
    }
}

impl fmt::Display for BareLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.qubit)?;
        for n in &self.photons {
            write!(f, ",{n}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DressedState<T: Real = f64> {
    pub label: BareLabel,
    pub energy: T,
    /// `|⟨bare|dressed⟩|²`
    pub overlap: T,
    /// Column of the eigenvector matrix.
    pub eigen_index: usize,
}

#[derive(Clone, Debug)]
pub struct DressedSpectrum<T: Real = f64> {
    entries: Vec<DressedState<T>>,
    by_label: HashMap<BareLabel, usize>,
    basis: ProductBasis,
    storage_mode: usize,
    vectors: Mat<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> DressedSpectrum<T> {
    /// Labeled states in ascending energy.
    pub fn entries(&self) -> &[DressedState<T>] {
        &self.entries
    }

    pub fn get(&self, label: &BareLabel) -> Option<&DressedState<T>> {
        self.by_label.get(label).map(|&i| &self.entries[i])
    }

    /// Energy of qubit level `q` with `n` photons in the storage mode.
    pub fn storage_energy(&self, q: usize, n: usize) -> Option<T> {
        self.get(&BareLabel::single(q, self.mode_count(), self.storage_mode, n)).map(|s| s.energy)
    }

    pub fn basis(&self) -> &ProductBasis {
        &self.basis
    }

    pub fn storage_mode(&self) -> usize {
        self.storage_mode
    }

    pub fn mode_count(&self) -> usize {
        self.basis.fock_dims.len()
    }

    /// Eigenvector of a labeled state in the bare product basis.
    pub fn eigenvector(&self, state: &DressedState<T>) -> Vec<T> {
        let c = self.vectors.col(state.eigen_index);
        (0..c.nrows()).map(|i| c[i]).collect()
    }
}

/// Candidate bare states considered per dressed state before falling back
/// to a full scan.
const CANDIDATES: usize = 6;

pub fn diagonalize_and_label<T: Real>(
    h: &HermitianOperator<T>,
    basis: &ProductBasis,
    storage_mode: usize,
    n_levels: usize,
) -> Result<DressedSpectrum<T>> {
    let es = h.eigh()?;
    label_eigensystem(es, basis, storage_mode, n_levels)
}

/// Labels the lowest `n_levels` eigenstates by greedy assignment in order
/// of descending overlap; ties go to the lexicographically smaller label.
pub fn label_eigensystem<T: Real>(
    es: Eigensystem<T>,
    basis: &ProductBasis,
    storage_mode: usize,
    n_levels: usize,
) -> Result<DressedSpectrum<T>> {
    let dim = es.len();
    if dim != basis.dim() {
        return Err(invalid("basis", format!("basis dim {} != operator dim {dim}", basis.dim())));
    }
    if n_levels > dim {
        return Err(invalid("n_levels", format!("{n_levels} exceeds dimension {dim}")));
    }
    if storage_mode >= basis.fock_dims.len() {
        return Err(invalid("storage_mode", "index out of range"));
    }
    let v = &es.vectors;
    let weight = |bare: usize, k: usize| {
        let x = v[(bare, k)];
        x * x
    };

    let mut cands: Vec<(T, usize, usize)> = Vec::with_capacity(n_levels * CANDIDATES);
    let mut top: Vec<(T, usize)> = Vec::with_capacity(CANDIDATES + 1);
    for k in 0..n_levels {
        top.clear();
        for b in 0..dim {
            let w = weight(b, k);
            if top.len() < CANDIDATES || w > top[top.len() - 1].0 {
                let pos = top.partition_point(|&(x, _)| x >= w);
                top.insert(pos, (w, b));
                top.truncate(CANDIDATES);
            }
        }
        cands.extend(top.iter().map(|&(w, b)| (w, b, k)));
    }
    cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut bare_taken = vec![false; dim];
    let mut assigned: Vec<Option<(usize, T)>> = vec![None; n_levels];
    for &(w, b, k) in &cands {
        if assigned[k].is_none() && !bare_taken[b] {
            assigned[k] = Some((b, w));
            bare_taken[b] = true;
        }
    }
    for (k, slot) in assigned.iter_mut().enumerate() {
        if slot.is_some() {
            continue;
        }
        let mut best: Option<(usize, T)> = None;
        for b in (0..dim).filter(|&b| !bare_taken[b]) {
            let w = weight(b, k);
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((b, w));
            }
        }
        let (b, w) = best.expect("fewer dressed states than bare states");
        bare_taken[b] = true;
        *slot = Some((b, w));
    }

    let mut entries = Vec::with_capacity(n_levels);
    let mut by_label = HashMap::with_capacity(n_levels);
    let mut warnings = Vec::new();
    for (k, slot) in assigned.into_iter().enumerate() {
        let (b, w) = slot.expect("all states assigned");
        let (q, photons) = basis.label(b);
        let label = BareLabel::new(q, photons);
        if w < lit::<T>(AMBIGUOUS_OVERLAP) {
            warnings.push(format!("ambiguous label {label}: overlap {:.3}", w));
        }
        by_label.insert(label.clone(), entries.len());
        entries.push(DressedState { label, energy: es.values[k], overlap: w, eigen_index: k });
    }
    Ok(DressedSpectrum { entries, by_label, basis: basis.clone(), storage_mode, vectors: es.vectors, warnings })
}
