//! Two-level projection circuit for d⊗d states.
//!
//! Each side attaches an ancilla in `|0⟩`, flips it when its system lies in
//! the chosen pair of levels, and measures it. Ancilla result 1 means the
//! system was projected onto the pair, which is then relabeled to a qubit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DimList, Matrix, ONE, ZERO};
use crate::quantum::{collapse, is_entangled_ppt, outcome_probability, DensityOperator};
use crate::tolerance;

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionBranch {
    /// Ancilla results `(A₀, B₀)`.
    pub outcome: (u8, u8),
    pub probability: f64,
    /// Post-measurement state; each side is the relabeled pair (result 1) or
    /// the complementary levels in ascending order (result 0). `None` when
    /// the branch cannot occur.
    pub state: Option<DensityOperator>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionHit {
    pub i: (usize, usize),
    pub j: (usize, usize),
    pub branch: ProjectionBranch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSummary {
    pub i: (usize, usize),
    pub j: (usize, usize),
    pub outcome: (u8, u8),
    pub probability: f64,
}

impl ProjectionHit {
    pub fn summary(&self) -> ProjectionSummary {
        ProjectionSummary { i: self.i, j: self.j, outcome: self.branch.outcome, probability: self.branch.probability }
    }
}

/// `|k⟩|b⟩ ↦ |k⟩|b ⊕ [k ∈ pair]⟩` on (system, ancilla).
fn marker_cnot(d: usize, pair: (usize, usize)) -> Matrix {
    let n = 2 * d;
    let mut u = Matrix::zeros(n, n);
    for k in 0..d {
        let flip = usize::from(k == pair.0 || k == pair.1);
        for b in 0..2 {
            u.set(k * 2 + (b ^ flip), k * 2 + b, ONE);
        }
    }
    u
}

/// Isometry onto the listed levels, in the listed order.
fn selector(d: usize, levels: &[usize]) -> Matrix {
    Matrix::from_fn(levels.len(), d, |r, c| if levels[r] == c { ONE } else { ZERO })
}

fn levels_for(d: usize, pair: (usize, usize), inside: bool) -> Vec<usize> {
    if inside {
        vec![pair.0, pair.1]
    } else {
        (0..d).filter(|&k| k != pair.0 && k != pair.1).collect()
    }
}

fn check_pair(d: usize, pair: (usize, usize), name: &str) -> Result<()> {
    if !(pair.0 < pair.1 && pair.1 < d) {
        return Err(Error::InvalidParameter(format!("{name} = {pair:?} needs {name}1 < {name}2 < {d}")));
    }
    Ok(())
}

pub fn project_to_qubit_subspace(
    state: &DensityOperator,
    i: (usize, usize),
    j: (usize, usize),
) -> Result<Vec<ProjectionBranch>> {
    let dims = state.dims().as_slice();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::InvalidDims(format!("projection needs a d⊗d state, got dims {}", state.dims())));
    }
    let d = dims[0];
    check_pair(d, i, "i")?;
    check_pair(d, j, "j")?;

    // subsystem order A, B, A₀, B₀ with both ancillas in |0⟩
    let ancillas = DensityOperator::new(Matrix::diagonal(&[1.0, 0.0, 0.0, 0.0]), DimList::qubits(2))?;
    let extended = state.tensor(&ancillas);
    let grouped = extended.permuted(&[0, 2, 1, 3])?;
    let u = crate::linalg::kron(&marker_cnot(d, i), &marker_cnot(d, j));
    let evolved = &(&u * grouped.mat()) * &u.dagger();
    let evolved = DensityOperator::trusted(evolved, grouped.dims().clone()).permuted(&[0, 2, 1, 3])?;

    let mut branches = Vec::with_capacity(4);
    for (a, b) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let mut e = Matrix::zeros(4, 4);
        let idx = usize::from(a) * 2 + usize::from(b);
        e.set(idx, idx, ONE);
        let probability = outcome_probability(&evolved, &e, &[2, 3])?;
        let la = levels_for(d, i, a == 1);
        let lb = levels_for(d, j, b == 1);
        let state = if probability > tolerance::ZERO_PROBABILITY && !la.is_empty() && !lb.is_empty() {
            let c = collapse(&evolved, &e, &[2, 3])?;
            let v = crate::linalg::kron(&selector(d, &la), &selector(d, &lb));
            let mat = &(&v * c.state.mat()) * &v.dagger();
            Some(DensityOperator::trusted(mat, DimList::new(vec![la.len(), lb.len()])?))
        } else {
            None
        };
        branches.push(ProjectionBranch { outcome: (a, b), probability, state });
    }
    Ok(branches)
}

/// Scans every pair of levels on each side and every branch, returning the
/// first branch whose state the partial-transpose test certifies entangled.
pub fn find_entangled_qubit_projection(state: &DensityOperator, dim_cap: usize) -> Result<Option<ProjectionHit>> {
    let dims = state.dims().as_slice();
    if dims.len() != 2 || dims[0] != dims[1] {
        return Err(Error::InvalidDims(format!("projection needs a d⊗d state, got dims {}", state.dims())));
    }
    let d = dims[0];
    if d > dim_cap {
        return Err(Error::ResourceLimit { what: "local dimension", count: d as u128, cap: dim_cap as u128 });
    }
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect();
    for &i in &pairs {
        for &j in &pairs {
            for branch in project_to_qubit_subspace(state, i, j)? {
                if let Some(s) = &branch.state {
                    if is_entangled_ppt(s)? {
                        return Ok(Some(ProjectionHit { i, j, branch }));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::quantum::{schmidt_pure_state, werner_state, PureState};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn projector_oracle(state: &DensityOperator, la: &[usize], lb: &[usize]) -> (f64, Matrix) {
        let d = state.dims().as_slice()[0];
        let v = crate::linalg::kron(&selector(d, la), &selector(d, lb));
        let block = &(&v * state.mat()) * &v.dagger();
        let p = block.trace().re;
        (p, block.scale(1.0 / p))
    }

    #[test]
    fn qubit_input_passes_through() {
        let rho = werner_state(0.7, (0.8, 0.6)).unwrap();
        let branches = project_to_qubit_subspace(&rho, (0, 1), (0, 1)).unwrap();
        let eleven = &branches[3];
        assert_eq!(eleven.outcome, (1, 1));
        assert!((eleven.probability - 1.0).abs() < 1e-12);
        assert!(eleven.state.as_ref().unwrap().max_abs_diff(&rho) < 1e-12);
        assert!(branches[..3].iter().all(|b| b.state.is_none() && b.probability.abs() < 1e-12));
    }

    #[test]
    fn qutrit_maximally_entangled() {
        let s = 1.0 / 3f64.sqrt();
        let rho = schmidt_pure_state(&[s, s, s], 3).unwrap().density();
        let branches = project_to_qubit_subspace(&rho, (0, 1), (0, 1)).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let eleven = &branches[3];
        assert!((eleven.probability - 2.0 / 3.0).abs() < 1e-12);
        let phi = schmidt_pure_state(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 2).unwrap().density();
        assert!(eleven.state.as_ref().unwrap().max_abs_diff(&phi) < 1e-12);
        assert!((branches[0].probability - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn branches_match_projector_oracle() {
        // a generic two-qutrit pure state
        let amps: Vec<C64> = (0..9).map(|k| C64::new(0.1 + 0.07 * k as f64, 0.05 * (k as f64 - 4.0))).collect();
        let rho = PureState::normalized(amps, DimList::uniform(3, 2).unwrap()).unwrap().density();
        let branches = project_to_qubit_subspace(&rho, (0, 2), (1, 2)).unwrap();
        for b in &branches {
            let la = levels_for(3, (0, 2), b.outcome.0 == 1);
            let lb = levels_for(3, (1, 2), b.outcome.1 == 1);
            let (p, m) = projector_oracle(&rho, &la, &lb);
            assert!((b.probability - p).abs() < 1e-12);
            assert!(b.state.as_ref().unwrap().mat().max_abs_diff(&m) < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_indices() {
        let rho = DensityOperator::maximally_mixed(DimList::uniform(3, 2).unwrap());
        assert!(project_to_qubit_subspace(&rho, (1, 1), (0, 1)).is_err());
        assert!(project_to_qubit_subspace(&rho, (0, 3), (0, 1)).is_err());
        assert!(project_to_qubit_subspace(&rho, (2, 1), (0, 1)).is_err());
    }

    #[test]
    fn search_cases() {
        let s = 1.0 / 3f64.sqrt();
        let qutrit = schmidt_pure_state(&[s, s, s], 3).unwrap().density();
        assert!(find_entangled_qubit_projection(&qutrit, 8).unwrap().is_some());
        let mixed = DensityOperator::maximally_mixed(DimList::uniform(3, 2).unwrap());
        assert!(find_entangled_qubit_projection(&mixed, 8).unwrap().is_none());
        let w = werner_state(0.9, (FRAC_1_SQRT_2, FRAC_1_SQRT_2)).unwrap();
        let hit = find_entangled_qubit_projection(&w, 8).unwrap().unwrap();
        assert_eq!(hit.branch.outcome, (1, 1));
        let big = DensityOperator::maximally_mixed(DimList::uniform(3, 2).unwrap());
        assert!(matches!(find_entangled_qubit_projection(&big, 2), Err(Error::ResourceLimit { .. })));
    }
}
