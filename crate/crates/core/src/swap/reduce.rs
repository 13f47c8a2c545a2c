//! Reduction of GHZ-source networks to chains and stars.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, Matrix, C64};
use crate::network::{is_connected, is_connected_among, NetworkTopology, Source};
use crate::quantum::{collapse, Sign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementBasis {
    X,
}

/// One single-qubit measurement of the plan, post-selected on `outcome`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedMeasurement {
    pub party: usize,
    pub source: usize,
    pub subsystem: usize,
    pub basis: MeasurementBasis,
    pub outcome: Sign,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subnetwork {
    /// A degree-2 party between two neighbours: `[left, middle, right]`.
    Chain { parties: Vec<usize> },
    /// A party of degree at least 3 with its neighbours.
    Star { hub: usize, leaves: Vec<usize> },
    /// Two parties joined only to each other.
    Pair { parties: Vec<usize> },
    /// A surviving source with three or more members.
    Ghz { parties: Vec<usize> },
}

impl Subnetwork {
    pub fn party_count(&self) -> usize {
        match self {
            Self::Chain { parties } | Self::Pair { parties } | Self::Ghz { parties } => parties.len(),
            Self::Star { leaves, .. } => leaves.len() + 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reduction {
    pub plan: Vec<PlannedMeasurement>,
    /// Targets plus the fewest extra parties that keep them connected.
    pub kept: Vec<usize>,
    /// Extra parties in `kept` that are not targets.
    pub relays: Vec<usize>,
    /// Surviving sources; index `k` came from `origins[k]`.
    pub reduced: NetworkTopology,
    pub origins: Vec<usize>,
    /// Probability of the post-selected plan outcome for each surviving source.
    pub probabilities: Vec<f64>,
    pub subnetworks: Vec<Subnetwork>,
}

/// `(u, v, y)` with the state equal to `u|y⟩ + v|ȳ⟩` up to a global phase.
fn ghz_form(index: usize, src: &Source) -> Result<(C64, C64, usize)> {
    let unsupported = |reason: &str| Error::UnsupportedSource { index, reason: reason.into() };
    let dims = src.state().dims().as_slice();
    let n = dims.len();
    if n < 2 || dims.iter().any(|&d| d != 2) {
        return Err(unsupported("not a state on two or more qubits"));
    }
    if src.parties().len() != n {
        return Err(unsupported("a party holds two subsystems of the same source"));
    }
    let rho = src.state().mat();
    if (rho.trace_product(rho)?.re - 1.0).abs() > 1e-9 {
        return Err(unsupported("not a pure state"));
    }
    let (_, vec) = hermitian_eigen(rho)?.pop().expect("nonempty spectrum");
    let support: Vec<usize> = (0..vec.len()).filter(|&k| vec[k].norm() > 1e-9).collect();
    let all = (1usize << n) - 1;
    match support.as_slice() {
        [k] => Ok((vec[*k], C64::new(0.0, 0.0), *k)),
        [a, b] if a ^ b == all => Ok((vec[*a], vec[*b], *a)),
        _ => Err(unsupported("not of the form u|y⟩ + v|ȳ⟩")),
    }
}

/// Picks the fewest non-target parties that connect the targets (ties broken
/// lexicographically), measures every other party's qubits in the X basis
/// with outcome `+`, and classifies what survives.
pub fn reduce_network(t: &NetworkTopology, targets: &[usize]) -> Result<Reduction> {
    if targets.is_empty() {
        return Err(Error::InvalidParameter("no target parties".into()));
    }
    if let Some(&p) = targets.iter().find(|&&p| p >= t.n_parties()) {
        return Err(Error::InvalidParameter(format!("target {p} out of range")));
    }
    for (k, s) in t.sources().iter().enumerate() {
        ghz_form(k, s)?;
    }
    if !is_connected(t) {
        return Err(Error::Disconnected);
    }
    let targets: Vec<usize> = targets.iter().copied().sorted().dedup().collect();
    let others: Vec<usize> = (0..t.n_parties()).filter(|p| !targets.contains(p)).collect();
    let relays = (0..=others.len())
        .flat_map(|size| others.iter().copied().combinations(size))
        .find(|extra| {
            let kept: Vec<usize> = targets.iter().chain(extra).copied().collect();
            is_connected_among(t, &kept)
        })
        .ok_or(Error::Disconnected)?;
    let kept: Vec<usize> = targets.iter().chain(&relays).copied().sorted().collect();

    let plus = Matrix::from_fn(2, 2, |_, _| C64::new(0.5, 0.0));
    let mut plan = Vec::new();
    let mut sources = Vec::new();
    let mut origins = Vec::new();
    let mut probabilities = Vec::new();
    for (k, src) in t.sources().iter().enumerate() {
        let keep_idx: Vec<usize> = (0..src.assignment().len()).filter(|&s| kept.contains(&src.assignment()[s])).collect();
        if keep_idx.len() < 2 {
            continue;
        }
        let mut state = src.state().clone();
        let mut probability = 1.0;
        let mut remaining: Vec<usize> = (0..src.assignment().len()).collect();
        for s in (0..src.assignment().len()).filter(|s| !keep_idx.contains(s)) {
            plan.push(PlannedMeasurement {
                party: src.assignment()[s],
                source: k,
                subsystem: s,
                basis: MeasurementBasis::X,
                outcome: Sign::Plus,
            });
            let pos = remaining.iter().position(|&r| r == s).expect("subsystem still present");
            let c = collapse(&state, &plus, &[pos])?;
            probability *= c.probability;
            state = c.state;
            remaining.remove(pos);
        }
        let assignment = remaining.iter().map(|&s| src.assignment()[s]).collect();
        sources.push(Source::new(state, assignment)?);
        origins.push(k);
        probabilities.push(probability);
    }
    let reduced = NetworkTopology::new(t.n_parties(), sources)?;
    let subnetworks = classify(&reduced);
    Ok(Reduction { plan, kept, relays, reduced, origins, probabilities, subnetworks })
}

fn classify(t: &NetworkTopology) -> Vec<Subnetwork> {
    let mut out = Vec::new();
    let mut neighbours: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for s in t.sources() {
        let parties = s.parties();
        if parties.len() > 2 {
            out.push(Subnetwork::Ghz { parties });
        } else if let [a, b] = parties[..] {
            neighbours.entry(a).or_default().push(b);
            neighbours.entry(b).or_default().push(a);
        }
    }
    for (&p, ns) in &neighbours {
        let ns: Vec<usize> = ns.iter().copied().sorted().collect();
        match ns.len() {
            1 if p < ns[0] && neighbours[&ns[0]].len() == 1 => out.push(Subnetwork::Pair { parties: vec![p, ns[0]] }),
            2 => out.push(Subnetwork::Chain { parties: vec![ns[0], p, ns[1]] }),
            d if d >= 3 => out.push(Subnetwork::Star { hub: p, leaves: ns }),
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{ghz_state, is_entangled_ppt, schmidt_pure_state, werner_state};

    fn ghz_source(parties: Vec<usize>, u: f64, v: f64) -> Source {
        let n = parties.len();
        Source::pure(&ghz_state(n, u, v, &vec![0; n], Sign::Plus).unwrap(), parties).unwrap()
    }

    #[test]
    fn tripartite_ghz_to_pair() {
        let t = NetworkTopology::new(3, vec![ghz_source(vec![0, 1, 2], 0.8, 0.6)]).unwrap();
        let r = reduce_network(&t, &[0, 1]).unwrap();
        assert_eq!(r.plan.len(), 1);
        assert_eq!(r.plan[0].party, 2);
        let s = &r.reduced.sources()[0];
        assert_eq!(s.assignment(), &[0, 1]);
        assert!(is_entangled_ppt(s.state()).unwrap());
        assert!((r.probabilities[0] - 0.5).abs() < 1e-12);
        let want = schmidt_pure_state(&[0.8, 0.6], 2).unwrap().density();
        assert!(s.state().max_abs_diff(&want) < 1e-12);
        assert_eq!(r.subnetworks, vec![Subnetwork::Pair { parties: vec![0, 1] }]);
    }

    #[test]
    fn all_targets_leave_network_unchanged() {
        let t = NetworkTopology::new(
            4,
            vec![ghz_source(vec![0, 1], 0.6, 0.8), ghz_source(vec![1, 2, 3], 0.8, 0.6)],
        )
        .unwrap();
        let r = reduce_network(&t, &[0, 1, 2, 3]).unwrap();
        assert!(r.plan.is_empty());
        assert_eq!(r.reduced, t);
    }

    #[test]
    fn product_parent_stays_separable() {
        let t = NetworkTopology::new(3, vec![ghz_source(vec![0, 1, 2], 1.0, 0.0)]).unwrap();
        let r = reduce_network(&t, &[0, 2]).unwrap();
        assert!(!is_entangled_ppt(r.reduced.sources()[0].state()).unwrap());
    }

    #[test]
    fn rejects_unsupported_and_disconnected() {
        let w = Source::new(werner_state(0.5, (0.8, 0.6)).unwrap(), vec![0, 1]).unwrap();
        let t = NetworkTopology::new(2, vec![w]).unwrap();
        assert!(matches!(reduce_network(&t, &[0]), Err(Error::UnsupportedSource { index: 0, .. })));
        let split = NetworkTopology::new(4, vec![ghz_source(vec![0, 1], 0.6, 0.8), ghz_source(vec![2, 3], 0.6, 0.8)])
            .unwrap();
        assert!(matches!(reduce_network(&split, &[0, 2]), Err(Error::Disconnected)));
        let w_state = crate::quantum::PureState::normalized(
            vec![
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
            crate::linalg::DimList::qubits(3),
        )
        .unwrap();
        let t = NetworkTopology::new(3, vec![Source::pure(&w_state, vec![0, 1, 2]).unwrap()]).unwrap();
        assert!(matches!(reduce_network(&t, &[0, 1]), Err(Error::UnsupportedSource { .. })));
    }

    #[test]
    fn chain_through_relay() {
        let t = NetworkTopology::new(
            4,
            vec![ghz_source(vec![0, 1], 0.6, 0.8), ghz_source(vec![1, 2], 0.8, 0.6), ghz_source(vec![2, 3], 0.6, 0.8)],
        )
        .unwrap();
        let r = reduce_network(&t, &[0, 2]).unwrap();
        assert_eq!(r.relays, vec![1]);
        assert_eq!(r.reduced.sources().len(), 2);
        assert_eq!(r.subnetworks, vec![Subnetwork::Chain { parties: vec![0, 1, 2] }]);
    }
}
