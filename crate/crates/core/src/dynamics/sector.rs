//! Photon-number-diagonal sector of the master equation.
//!
//! When only the qubit is driven, the Hamiltonian is block diagonal in the
//! photon number and storage decay maps the `n+1` block onto the `n` block,
//! so the 2×2 qubit blocks `ρ_{(q,n),(p,n)}` evolve on their own. Qubit and
//! photon-number populations are exact in this sector; coherences between
//! photon numbers are dropped.

use super::integrator::Dopri5;
use super::{DensityMatrix, DriveTarget, DriveTerm, EffectiveModel, LossRates};
use crate::error::{invalid, Result};
use crate::scalar::{cx, czero, from_usize, lit, two_pi, Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct SectorState<T: Real = f64> {
    /// Per photon number, `[gg, ge, eg, ee]`.
    pub blocks: Vec<[Cx<T>; 4]>,
}

impl<T: Real> SectorState<T> {
    pub fn from_density(rho: &DensityMatrix<T>) -> Self {
        let n = rho.fock_dim();
        let blocks = (0..n)
            .map(|k| [rho.get(k, k), rho.get(k, n + k), rho.get(n + k, k), rho.get(n + k, n + k)])
            .collect();
        Self { blocks }
    }

    pub fn fock_dim(&self) -> usize {
        self.blocks.len()
    }

    pub fn excited_population(&self) -> T {
        self.blocks.iter().fold(T::zero(), |acc, b| acc + b[3].re)
    }

    pub fn photon_distribution(&self) -> Vec<T> {
        self.blocks.iter().map(|b| b[0].re + b[3].re).collect()
    }

    pub fn trace(&self) -> T {
        self.blocks.iter().fold(T::zero(), |acc, b| acc + b[0].re + b[3].re)
    }

    fn flatten(&self) -> Vec<Cx<T>> {
        self.blocks.iter().flat_map(|b| b.iter().copied()).collect()
    }

    fn unflatten(y: &[Cx<T>]) -> Self {
        Self { blocks: y.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect() }
    }
}

/// Evolves the photon-number sector; only qubit drives are allowed.
pub fn evolve_sector<T: Real>(
    state: &SectorState<T>,
    model: &EffectiveModel<T>,
    drives: &[DriveTerm<T>],
    losses: &LossRates<T>,
    t_grid: &[T],
    tol: T,
) -> Result<Vec<SectorState<T>>> {
    model.validate()?;
    losses.validate()?;
    if state.fock_dim() != model.fock_dim {
        return Err(invalid("state", "fock_dim does not match model"));
    }
    if drives.iter().any(|d| d.target != DriveTarget::Qubit) {
        return Err(invalid("drives", "storage drives couple photon-number sectors"));
    }
    if t_grid.is_empty() || !(t_grid[0] >= T::zero()) || t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(invalid("t_grid", "must be non-empty, non-decreasing and start at or after 0"));
    }
    for d in drives {
        d.validate()?;
    }
    let r = losses.per_ns();
    let nd = model.fock_dim;
    let tp = two_pi::<T>();
    let half = lit::<T>(0.5);
    // qubit splitting inside block n
    let split: Vec<T> = (0..nd).map(|n| model.chi * from_usize::<T>(n)).collect();
    let breakpoints: Vec<T> = drives.iter().flat_map(|d| [d.t0, d.end()]).collect();

    let rhs = |t: T, y: &[Cx<T>], out: &mut [Cx<T>]| {
        let mut c = czero::<T>();
        for d in drives {
            c += d.coefficient(t);
        }
        for n in 0..nd {
            let b = &y[4 * n..4 * n + 4];
            let (gg, ge, eg, ee) = (b[0], b[1], b[2], b[3]);
            // H = [[0, c*], [c, s]]; [H, B]
            let s = split[n];
            let cc = c.conj();
            let comm_gg = cc * eg - ge * c;
            let comm_ge = cc * ee - (gg * cc + ge * s);
            let comm_eg = (c * gg + eg * s) - ee * c;
            let comm_ee = c * ge - eg * cc;
            let mi = |z: Cx<T>| cx(z.im * tp, -z.re * tp);
            let k = r.kappa_s * from_usize::<T>(n);
            let mut d = [
                mi(comm_gg) + ee * r.gamma_down - gg * r.gamma_up - gg * k,
                mi(comm_ge) - ge * (half * (r.gamma_down + r.gamma_up) + r.gamma_phi + k),
                mi(comm_eg) - eg * (half * (r.gamma_down + r.gamma_up) + r.gamma_phi + k),
                mi(comm_ee) + gg * r.gamma_up - ee * r.gamma_down - ee * k,
            ];
            if n + 1 < nd {
                let up = r.kappa_s * from_usize::<T>(n + 1);
                for (q, dq) in d.iter_mut().enumerate() {
                    *dq += y[4 * (n + 1) + q] * up;
                }
            }
            out[4 * n..4 * n + 4].copy_from_slice(&d);
        }
    };

    let mut y = state.flatten();
    let mut out = Vec::with_capacity(t_grid.len());
    Dopri5::new(tol).integrate(&mut y, T::zero(), t_grid, &breakpoints, rhs, |_, _, y| {
        out.push(SectorState::unflatten(y));
        Ok(())
    })?;
    Ok(out)
}
