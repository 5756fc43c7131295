//! Dense matrices of Pauli sums and the exact ground-state solver.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QetError, Result};
use crate::pauli::ObservableSum;
use crate::state::{check_capacity, i_pow, StateVector};

/// Spectral gaps below this are treated as a degenerate ground space.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Dense `2^n x 2^n` matrix of `obs` in the computational basis.
pub fn to_dense(obs: &ObservableSum) -> Result<DMatrix<Complex64>> {
    check_capacity(obs.n_qubits())?;
    let dim = 1usize << obs.n_qubits();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for b in 0..dim {
        m[(b, b)] += Complex64::new(obs.offset(), 0.0);
    }
    for (c, w) in obs.terms() {
        let (x, z) = (w.x_mask() as usize, w.z_mask() as usize);
        let phase = i_pow(w.y_count()) * c;
        for b in 0..dim {
            let sign = if (b & z).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            m[(b ^ x, b)] += phase * sign;
        }
    }
    Ok(m)
}

fn is_real(obs: &ObservableSum) -> bool {
    obs.terms().all(|(_, w)| w.y_count() % 2 == 0)
}

/// Basis indices grouped by the eigenvalue of `Z x ... x Z` when every term
/// flips an even number of qubits; otherwise a single block.
fn parity_sectors(obs: &ObservableSum) -> Vec<Vec<usize>> {
    let dim = 1usize << obs.n_qubits();
    if obs.terms().all(|(_, w)| w.x_mask().count_ones() % 2 == 0) && dim > 1 {
        let (even, odd) = (0..dim).partition(|b: &usize| b.count_ones().is_multiple_of(2));
        vec![even, odd]
    } else {
        vec![(0..dim).collect()]
    }
}

/// Real block of `obs` on the span of `sector`, which every term must map
/// into itself. Only valid when every word has an even number of `Y`s.
fn real_block(obs: &ObservableSum, sector: &[usize]) -> DMatrix<f64> {
    let mut pos = vec![usize::MAX; 1usize << obs.n_qubits()];
    for (i, &b) in sector.iter().enumerate() {
        pos[b] = i;
    }
    let mut m = DMatrix::<f64>::identity(sector.len(), sector.len()) * obs.offset();
    for (c, w) in obs.terms() {
        let (x, z) = (w.x_mask() as usize, w.z_mask() as usize);
        let c = i_pow(w.y_count()).re * c;
        for (i, &b) in sector.iter().enumerate() {
            let sign = if (b & z).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            m[(pos[b ^ x], i)] += c * sign;
        }
    }
    m
}

/// Lowest eigenpair of a Hamiltonian together with its spectral gap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundSolution {
    pub state: StateVector,
    pub energy: f64,
    pub gap: f64,
}

/// Indices of the (at most) two smallest values.
fn lowest_two(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order.truncate(2);
    order
}

/// Fixes the global phase so the first significant amplitude is real and
/// positive, which makes solver output reproducible.
fn fix_phase(mut amps: Vec<Complex64>) -> Vec<Complex64> {
    let max = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if let Some(pivot) = amps.iter().find(|a| a.norm() > 1e-8 * max).copied() {
        let rot = pivot.conj() / pivot.norm();
        amps.iter_mut().for_each(|a| *a *= rot);
    }
    amps
}

/// Exact ground state by full dense diagonalization, block by block when
/// the Hamiltonian conserves `Z x ... x Z` parity.
///
/// Rejects Hamiltonians whose two lowest eigenvalues are closer than
/// [`DEGENERACY_TOL`].
pub fn solve_ground(obs: &ObservableSum) -> Result<GroundSolution> {
    check_capacity(obs.n_qubits())?;
    let dim = 1usize << obs.n_qubits();
    // two lowest (eigenvalue, vector) pairs of every block
    let mut levels: Vec<(f64, Vec<Complex64>)> = Vec::new();
    if is_real(obs) {
        for sector in parity_sectors(obs) {
            let eig = SymmetricEigen::new(real_block(obs, &sector));
            let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            for idx in lowest_two(&values) {
                let mut amps = vec![Complex64::new(0.0, 0.0); dim];
                for (i, &b) in sector.iter().enumerate() {
                    amps[b] = Complex64::new(eig.eigenvectors[(i, idx)], 0.0);
                }
                levels.push((values[idx], amps));
            }
        }
    } else {
        let eig = SymmetricEigen::new(to_dense(obs)?);
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        for idx in lowest_two(&values) {
            levels.push((
                values[idx],
                eig.eigenvectors.column(idx).iter().copied().collect(),
            ));
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let gap = levels.get(1).map_or(f64::INFINITY, |l| l.0 - levels[0].0);
    if gap < DEGENERACY_TOL {
        return Err(QetError::DegenerateGround {
            gap,
            tolerance: DEGENERACY_TOL,
        });
    }
    let (energy, amps) = levels.swap_remove(0);
    Ok(GroundSolution {
        state: StateVector::normalized(fix_phase(amps))?,
        energy,
        gap,
    })
}
