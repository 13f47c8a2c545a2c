//! Network topologies, joint states and correlation tables.

use std::io::Write;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{contract_leading, DimList, Matrix};
use crate::quantum::{DensityOperator, Povm, PureState};
use crate::tolerance;

#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    state: DensityOperator,
    assignment: Vec<usize>,
    separable: bool,
}

impl Source {
    /// `assignment[k]` is the party holding subsystem `k` of `state`.
    pub fn new(state: DensityOperator, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != state.dims().len() {
            return Err(Error::InvalidDims(format!(
                "{} party labels for a state on {} subsystems",
                assignment.len(),
                state.dims().len()
            )));
        }
        Ok(Self { state, assignment, separable: false })
    }

    pub fn pure(state: &PureState, assignment: Vec<usize>) -> Result<Self> {
        Self::new(state.density(), assignment)
    }

    /// Marks the source as certified fully separable; such sources do not
    /// connect parties.
    pub fn flagged_separable(mut self, separable: bool) -> Self {
        self.separable = separable;
        self
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn is_flagged_separable(&self) -> bool {
        self.separable
    }

    /// Distinct parties touched by this source, ascending.
    pub fn parties(&self) -> Vec<usize> {
        self.assignment.iter().copied().sorted_unstable().dedup().collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkTopology {
    n_parties: usize,
    sources: Vec<Source>,
}

impl NetworkTopology {
    pub fn new(n_parties: usize, sources: Vec<Source>) -> Result<Self> {
        if n_parties == 0 {
            return Err(Error::InvalidParameter("network without parties".into()));
        }
        for (index, s) in sources.iter().enumerate() {
            if let Some(&p) = s.assignment.iter().find(|&&p| p >= n_parties) {
                return Err(Error::UnsupportedSource {
                    index,
                    reason: format!("party {p} out of range for {n_parties} parties"),
                });
            }
        }
        Ok(Self { n_parties, sources })
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    /// Sources touching `party`, by index.
    pub fn sources_of(&self, party: usize) -> Vec<usize> {
        (0..self.sources.len()).filter(|&k| self.sources[k].assignment.contains(&party)).collect()
    }

    pub fn total_dim(&self) -> u128 {
        self.sources.iter().map(|s| s.state.dims().total() as u128).product()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Connectivity of the graph joining parties that share a source not flagged separable.
pub fn is_connected(t: &NetworkTopology) -> bool {
    let all: Vec<usize> = (0..t.n_parties).collect();
    is_connected_among(t, &all)
}

/// Connectivity of the same graph restricted to `parties`; a source links
/// only those of its parties that are in the set.
pub fn is_connected_among(t: &NetworkTopology, parties: &[usize]) -> bool {
    let Some(&first) = parties.first() else {
        return true;
    };
    let mut uf = UnionFind::new(t.n_parties);
    for s in t.sources.iter().filter(|s| !s.separable) {
        let members: Vec<usize> = s.parties().into_iter().filter(|p| parties.contains(p)).collect();
        for w in members.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    let root = uf.find(first);
    parties.iter().all(|&p| p < t.n_parties && uf.find(p) == root)
}

/// Where each subsystem of an assembled joint state came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLayout {
    /// `(source, subsystem)` for each joint subsystem, party-major.
    pub origin: Vec<(usize, usize)>,
    /// Party holding each joint subsystem.
    pub party: Vec<usize>,
    /// Local dimensions of each party's block; empty for parties without subsystems.
    pub party_dims: Vec<Vec<usize>>,
}

impl SubsystemLayout {
    pub fn party_dim(&self, party: usize) -> usize {
        self.party_dims[party].iter().product()
    }

    /// Joint-subsystem indices belonging to `party`.
    pub fn subsystems_of(&self, party: usize) -> Vec<usize> {
        (0..self.party.len()).filter(|&k| self.party[k] == party).collect()
    }
}

/// Tensor product of all sources, reordered so each party's subsystems are
/// contiguous and parties ascend. Within a party, subsystems keep source order.
pub fn assemble_joint_state(t: &NetworkTopology, dim_cap: usize) -> Result<(DensityOperator, SubsystemLayout)> {
    let total = t.total_dim();
    if total > dim_cap as u128 {
        return Err(Error::ResourceLimit { what: "joint state dimension", count: total, cap: dim_cap as u128 });
    }
    let mut flat: Vec<(usize, usize, usize)> = Vec::new();
    for (s, src) in t.sources.iter().enumerate() {
        for (k, &p) in src.assignment.iter().enumerate() {
            flat.push((p, s, k));
        }
    }
    let mut party_dims = vec![Vec::new(); t.n_parties];
    if flat.is_empty() {
        let trivial = DensityOperator::trusted(Matrix::identity(1), DimList::new(vec![1])?);
        let layout = SubsystemLayout { origin: vec![], party: vec![], party_dims };
        return Ok((trivial, layout));
    }
    let mut joint = t.sources[0].state.clone();
    for src in &t.sources[1..] {
        joint = joint.tensor(&src.state);
    }
    let perm: Vec<usize> = (0..flat.len()).sorted_by_key(|&i| flat[i]).collect();
    let joint = joint.permuted(&perm)?;
    let origin = perm.iter().map(|&i| (flat[i].1, flat[i].2)).collect();
    let party: Vec<usize> = perm.iter().map(|&i| flat[i].0).collect();
    for (k, &p) in party.iter().enumerate() {
        party_dims[p].push(joint.dims().as_slice()[k]);
    }
    Ok((joint, SubsystemLayout { origin, party, party_dims }))
}

/// How one party turns a setting into a measurement.
#[derive(Clone, Debug, PartialEq)]
pub enum PartyMeasurement {
    /// One POVM per classical setting, on the party's subsystems.
    Classical { povms: Vec<Povm> },
    /// Setting `a` prepares `inputs[a]` on an ancilla that is measured jointly
    /// with the party's subsystems by `povm` (ancilla first).
    QuantumInput { inputs: Vec<DensityOperator>, povm: Povm },
}

impl PartyMeasurement {
    pub fn settings(&self) -> usize {
        match self {
            Self::Classical { povms } => povms.len(),
            Self::QuantumInput { inputs, .. } => inputs.len(),
        }
    }

    pub fn outcomes(&self) -> usize {
        match self {
            Self::Classical { povms } => povms.first().map_or(0, Povm::len),
            Self::QuantumInput { povm, .. } => povm.len(),
        }
    }

    /// Effective elements on the party's own subsystems, indexed `[setting][outcome]`.
    ///
    /// For quantum inputs, `Tr[M (τ ⊗ ρ)] = Tr[Tr_anc[(τ ⊗ I) M] ρ]`.
    fn effective(&self, party: usize, dim: usize) -> Result<Vec<Vec<Matrix>>> {
        let mismatch = |what: String| Error::InvalidDims(format!("party {party}: {what}"));
        match self {
            Self::Classical { povms } => {
                let k = self.outcomes();
                povms
                    .iter()
                    .map(|p| {
                        if p.dims().total() != dim {
                            return Err(mismatch(format!("POVM of dimension {} on a {dim}-dimensional block", p.dims().total())));
                        }
                        if p.len() != k {
                            return Err(mismatch("settings have different outcome counts".into()));
                        }
                        Ok(p.elements().to_vec())
                    })
                    .collect()
            }
            Self::QuantumInput { inputs, povm } => inputs
                .iter()
                .map(|tau| {
                    let d_anc = tau.mat().rows();
                    if povm.dims().total() != d_anc * dim {
                        return Err(mismatch(format!(
                            "POVM of dimension {} for a {d_anc}-dimensional input and {dim}-dimensional block",
                            povm.dims().total()
                        )));
                    }
                    povm.elements().iter().map(|m| contract_leading(m, tau.mat())).collect()
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    Classical,
    Quantum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementScenario {
    parties: Vec<PartyMeasurement>,
}

impl MeasurementScenario {
    pub fn new(parties: Vec<PartyMeasurement>) -> Result<Self> {
        for (i, p) in parties.iter().enumerate() {
            if p.settings() == 0 || p.outcomes() == 0 {
                return Err(Error::InvalidMeasurement(format!("party {i} has no settings or outcomes")));
            }
        }
        Ok(Self { parties })
    }

    /// Same classical POVMs for every party.
    pub fn classical(povms: Vec<Vec<Povm>>) -> Result<Self> {
        Self::new(povms.into_iter().map(|p| PartyMeasurement::Classical { povms: p }).collect())
    }

    pub fn parties(&self) -> &[PartyMeasurement] {
        &self.parties
    }

    pub fn settings(&self) -> Vec<usize> {
        self.parties.iter().map(PartyMeasurement::settings).collect()
    }

    pub fn outcomes(&self) -> Vec<usize> {
        self.parties.iter().map(PartyMeasurement::outcomes).collect()
    }

    pub fn mode(&self) -> InputMode {
        if self.parties.iter().any(|p| matches!(p, PartyMeasurement::QuantumInput { .. })) {
            InputMode::Quantum
        } else {
            InputMode::Classical
        }
    }
}

/// Mixed-radix index of `digits` with radices `radix`, first digit most significant.
pub fn tuple_index(digits: &[usize], radix: &[usize]) -> usize {
    digits.iter().zip(radix).fold(0, |acc, (&d, &r)| acc * r + d)
}

/// Inverse of [`tuple_index`].
pub fn tuple_digits(mut index: usize, radix: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radix.len()];
    for k in (0..radix.len()).rev() {
        out[k] = index % radix[k];
        index /= radix[k];
    }
    out
}

/// `P(x|a)` over lexicographically ordered setting and outcome tuples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    settings: Vec<usize>,
    outcomes: Vec<usize>,
    /// `probs[a * n_outcome_tuples + x]`.
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(settings: Vec<usize>, outcomes: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let d = Self { settings, outcomes, probs };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if self.settings.len() != self.outcomes.len() || self.settings.is_empty() {
            return Err(Error::ShapeMismatch("settings and outcomes must list the same parties".into()));
        }
        if self.probs.len() != self.n_setting_tuples() * self.n_outcome_tuples() {
            return Err(Error::ShapeMismatch(format!(
                "{} probabilities for {} x {} tuples",
                self.probs.len(),
                self.n_setting_tuples(),
                self.n_outcome_tuples()
            )));
        }
        if let Some(p) = self.probs.iter().find(|&&p| p.is_nan() || p < -tolerance::NEGATIVE_PROBABILITY) {
            return Err(Error::InvalidState(format!("probability {p} is negative")));
        }
        let nx = self.n_outcome_tuples();
        for (a, row) in self.probs.chunks(nx).enumerate() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > tolerance::TRACE {
                return Err(Error::InvalidState(format!("setting tuple {a} sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn parties(&self) -> usize {
        self.settings.len()
    }

    pub fn settings(&self) -> &[usize] {
        &self.settings
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n_setting_tuples(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn n_outcome_tuples(&self) -> usize {
        self.outcomes.iter().product()
    }

    pub fn prob(&self, x: &[usize], a: &[usize]) -> f64 {
        self.probs[tuple_index(a, &self.settings) * self.n_outcome_tuples() + tuple_index(x, &self.outcomes)]
    }

    /// Product distribution of independent parties; `other`'s parties follow `self`'s.
    pub fn product(&self, other: &Distribution) -> Distribution {
        let settings = [self.settings.clone(), other.settings.clone()].concat();
        let outcomes = [self.outcomes.clone(), other.outcomes.clone()].concat();
        let (nx1, nx2) = (self.n_outcome_tuples(), other.n_outcome_tuples());
        let mut probs = Vec::with_capacity(self.probs.len() * other.probs.len());
        for a1 in 0..self.n_setting_tuples() {
            for a2 in 0..other.n_setting_tuples() {
                for x1 in 0..nx1 {
                    let p1 = self.probs[a1 * nx1 + x1];
                    probs.extend(other.probs[a2 * nx2..(a2 + 1) * nx2].iter().map(|p2| p1 * p2));
                }
            }
        }
        Distribution { settings, outcomes, probs }
    }

    /// Largest change of the other parties' joint marginal when a single
    /// party's setting changes.
    pub fn no_signaling_deviation(&self) -> f64 {
        let n = self.parties();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let rest_s: Vec<usize> = (0..n).filter(|&k| k != i).map(|k| self.settings[k]).collect();
            let rest_o: Vec<usize> = (0..n).filter(|&k| k != i).map(|k| self.outcomes[k]).collect();
            let nrs: usize = rest_s.iter().product();
            let nro: usize = rest_o.iter().product();
            for ar in 0..nrs {
                let ar_d = tuple_digits(ar, &rest_s);
                for xr in 0..nro {
                    let xr_d = tuple_digits(xr, &rest_o);
                    let marg = |ai: usize| -> f64 {
                        (0..self.outcomes[i])
                            .map(|xi| {
                                let mut a = ar_d.clone();
                                a.insert(i, ai);
                                let mut x = xr_d.clone();
                                x.insert(i, xi);
                                self.prob(&x, &a)
                            })
                            .sum()
                    };
                    let base = marg(0);
                    for ai in 1..self.settings[i] {
                        worst = worst.max((marg(ai) - base).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        if self.settings != other.settings || self.outcomes != other.outcomes {
            return f64::INFINITY;
        }
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// CSV with columns `a,x,probability`; tuples are written as `0:1:1`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::InvalidParameter(format!("csv output failed: {e}"));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["a", "x", "probability"]).map_err(io)?;
        let nx = self.n_outcome_tuples();
        let join = |d: Vec<usize>| d.iter().map(usize::to_string).join(":");
        for a in 0..self.n_setting_tuples() {
            for x in 0..nx {
                w.write_record([
                    join(tuple_digits(a, &self.settings)),
                    join(tuple_digits(x, &self.outcomes)),
                    format!("{}", self.probs[a * nx + x]),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::InvalidParameter(format!("csv output failed: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::InvalidParameter(e.to_string()))
    }
}

/// `P(x|a) = Tr[(⊗_i E^{x_i}_{a_i}) ρ]` on the assembled joint state, where
/// `E` are the parties' POVM elements (or, for quantum inputs, the elements
/// reduced against the input states).
pub fn joint_distribution(
    t: &NetworkTopology,
    s: &MeasurementScenario,
    mode: InputMode,
    dim_cap: usize,
) -> Result<Distribution> {
    if s.parties.len() != t.n_parties {
        return Err(Error::ShapeMismatch(format!(
            "scenario for {} parties on a {}-party network",
            s.parties.len(),
            t.n_parties
        )));
    }
    if mode == InputMode::Classical && s.mode() == InputMode::Quantum {
        return Err(Error::InvalidMeasurement("quantum inputs supplied in classical-input mode".into()));
    }
    let (joint, layout) = assemble_joint_state(t, dim_cap)?;
    let effective: Vec<Vec<Vec<Matrix>>> = s
        .parties
        .iter()
        .enumerate()
        .map(|(i, p)| p.effective(i, layout.party_dim(i)))
        .collect::<Result<_>>()?;
    let settings = s.settings();
    let outcomes = s.outcomes();
    let nx: usize = outcomes.iter().product();
    let mut probs = vec![0.0; settings.iter().product::<usize>() * nx];
    let mut a = vec![0; t.n_parties];
    let mut x = vec![0; t.n_parties];
    descend(joint.mat(), 0, &effective, &settings, &outcomes, &mut a, &mut x, &mut probs)?;
    for p in probs.iter_mut() {
        if p.abs() < tolerance::NEGATIVE_PROBABILITY {
            *p = p.abs();
        }
    }
    Distribution::new(settings, outcomes, probs)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    rho: &Matrix,
    party: usize,
    effective: &[Vec<Vec<Matrix>>],
    settings: &[usize],
    outcomes: &[usize],
    a: &mut [usize],
    x: &mut [usize],
    probs: &mut [f64],
) -> Result<()> {
    if party == effective.len() {
        let nx: usize = outcomes.iter().product();
        probs[tuple_index(a, settings) * nx + tuple_index(x, outcomes)] = rho.trace().re;
        return Ok(());
    }
    for ai in 0..settings[party] {
        a[party] = ai;
        for xi in 0..outcomes[party] {
            x[party] = xi;
            let next = contract_leading(rho, &effective[party][ai][xi])?;
            descend(&next, party + 1, effective, settings, outcomes, a, x, probs)?;
        }
    }
    Ok(())
}

/// A deterministic local strategy: `responses[party][setting]` is the outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub responses: Vec<Vec<usize>>,
}

/// `P(x|a) = Σ_λ p(λ) Π_i [x_i = f_i(a_i, λ)]`.
pub fn lhv_distribution(
    settings: &[usize],
    outcomes: &[usize],
    strategies: &[(f64, DeterministicStrategy)],
) -> Result<Distribution> {
    let total: f64 = strategies.iter().map(|(w, _)| w).sum();
    if strategies.is_empty() || strategies.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > tolerance::TRACE {
        return Err(Error::InvalidParameter(format!("strategy weights sum to {total}")));
    }
    let nx: usize = outcomes.iter().product();
    let na: usize = settings.iter().product();
    let mut probs = vec![0.0; na * nx];
    for (w, strat) in strategies {
        if strat.responses.len() != settings.len() {
            return Err(Error::ShapeMismatch("strategy has the wrong number of parties".into()));
        }
        for (i, table) in strat.responses.iter().enumerate() {
            if table.len() != settings[i] || table.iter().any(|&o| o >= outcomes[i]) {
                return Err(Error::ShapeMismatch(format!("response table of party {i} out of range")));
            }
        }
        for ai in 0..na {
            let a = tuple_digits(ai, settings);
            let x: Vec<usize> = a.iter().enumerate().map(|(i, &s)| strat.responses[i][s]).collect();
            probs[ai * nx + tuple_index(&x, outcomes)] += w;
        }
    }
    Distribution::new(settings.to_vec(), outcomes.to_vec(), probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, pauli_z, permute_subsystems};
    use crate::quantum::{dichotomic_observable, schmidt_pure_state, werner_state, Observable, ObservableKind};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell() -> DensityOperator {
        schmidt_pure_state(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 2).unwrap().density()
    }

    fn pair(a: usize, b: usize) -> Source {
        Source::new(bell(), vec![a, b]).unwrap()
    }

    #[test]
    fn connectivity_cases() {
        let lambda = NetworkTopology::new(3, vec![pair(0, 1), pair(1, 2)]).unwrap();
        assert!(is_connected(&lambda));
        let split = NetworkTopology::new(4, vec![pair(0, 1), pair(2, 3)]).unwrap();
        assert!(!is_connected(&split));
        let flagged = NetworkTopology::new(3, vec![pair(0, 1), pair(1, 2).flagged_separable(true)]).unwrap();
        assert!(!is_connected(&flagged));
        assert!(is_connected_among(&flagged, &[0, 1]));
    }

    #[test]
    fn topology_rejects_out_of_range_party() {
        assert!(matches!(
            NetworkTopology::new(2, vec![pair(0, 2)]),
            Err(Error::UnsupportedSource { index: 0, .. })
        ));
    }

    #[test]
    fn single_source_unchanged() {
        let w = werner_state(0.7, (0.8, 0.6)).unwrap();
        let t = NetworkTopology::new(2, vec![Source::new(w.clone(), vec![0, 1]).unwrap()]).unwrap();
        let (joint, layout) = assemble_joint_state(&t, 4096).unwrap();
        assert_eq!(joint, w);
        assert_eq!(layout.party, vec![0, 1]);
    }

    #[test]
    fn lambda_network_marginal() {
        let t = NetworkTopology::new(3, vec![pair(0, 1), pair(1, 2)]).unwrap();
        let (joint, layout) = assemble_joint_state(&t, 4096).unwrap();
        assert_eq!(joint.mat().rows(), 16);
        assert_eq!(layout.party, vec![0, 1, 1, 2]);
        let ab = joint.reduced(&[0, 1]).unwrap();
        assert!(ab.max_abs_diff(&bell()) < 1e-12);
    }

    #[test]
    fn permuted_assignment_matches_manual_permutation() {
        let w1 = werner_state(0.4, (0.8, 0.6)).unwrap();
        let w2 = werner_state(0.9, (0.6, 0.8)).unwrap();
        let t = NetworkTopology::new(
            3,
            vec![Source::new(w1.clone(), vec![2, 0]).unwrap(), Source::new(w2.clone(), vec![1, 2]).unwrap()],
        )
        .unwrap();
        let (joint, _) = assemble_joint_state(&t, 4096).unwrap();
        // w1 ⊗ w2 has subsystems (p2, p0, p1, p2); party-major order is p0, p1, p2(w1), p2(w2)
        let raw = kron(w1.mat(), w2.mat());
        let (manual, _) = permute_subsystems(&raw, &DimList::qubits(4), &[1, 2, 0, 3]).unwrap();
        assert!(joint.mat().max_abs_diff(&manual) < 1e-12);
    }

    #[test]
    fn dimension_cap_enforced() {
        let t = NetworkTopology::new(3, vec![pair(0, 1), pair(1, 2)]).unwrap();
        assert!(matches!(assemble_joint_state(&t, 8), Err(Error::ResourceLimit { count: 16, .. })));
    }

    #[test]
    fn bell_zz_distribution() {
        let t = NetworkTopology::new(2, vec![pair(0, 1)]).unwrap();
        let z = dichotomic_observable(ObservableKind::ZxPair, 0, 0.0).povm();
        let s = MeasurementScenario::classical(vec![vec![z.clone()], vec![z]]).unwrap();
        let d = joint_distribution(&t, &s, InputMode::Classical, 4096).unwrap();
        assert!((d.prob(&[0, 0], &[0, 0]) - 0.5).abs() < 1e-15);
        assert!((d.prob(&[1, 1], &[0, 0]) - 0.5).abs() < 1e-15);
        assert!(d.prob(&[0, 1], &[0, 0]).abs() < 1e-15);
        assert!(d.prob(&[1, 0], &[0, 0]).abs() < 1e-15);
    }

    #[test]
    fn quantum_input_reduces_to_classical() {
        // input |0⟩ or |1⟩ with a CNOT-style readout on (ancilla, qubit) is the same as measuring σz
        let t = NetworkTopology::new(2, vec![pair(0, 1)]).unwrap();
        let e0 = Matrix::diagonal(&[1.0, 0.0, 0.0, 1.0]);
        let e1 = Matrix::diagonal(&[0.0, 1.0, 1.0, 0.0]);
        let joint_povm = Povm::new(vec![e0, e1], DimList::qubits(2)).unwrap();
        let inputs = vec![
            DensityOperator::new(Matrix::diagonal(&[1.0, 0.0]), DimList::qubits(1)).unwrap(),
            DensityOperator::new(Matrix::diagonal(&[0.0, 1.0]), DimList::qubits(1)).unwrap(),
        ];
        let z = Observable::dichotomic(pauli_z()).unwrap().povm();
        let flipped = Povm::new(vec![z.element(1).clone(), z.element(0).clone()], DimList::qubits(1)).unwrap();
        let quantum = MeasurementScenario::new(vec![
            PartyMeasurement::QuantumInput { inputs, povm: joint_povm },
            PartyMeasurement::Classical { povms: vec![z.clone()] },
        ])
        .unwrap();
        let classical = MeasurementScenario::classical(vec![vec![z.clone(), flipped], vec![z]]).unwrap();
        let dq = joint_distribution(&t, &quantum, InputMode::Quantum, 4096).unwrap();
        let dc = joint_distribution(&t, &classical, InputMode::Classical, 4096).unwrap();
        assert!(dq.max_abs_diff(&dc) < 1e-12);
        assert!(joint_distribution(&t, &quantum, InputMode::Classical, 4096).is_err());
    }


    #[test]
    fn lhv_cases() {
        let s = DeterministicStrategy { responses: vec![vec![0, 1], vec![1, 1]] };
        let d = lhv_distribution(&[2, 2], &[2, 2], &[(1.0, s.clone())]).unwrap();
        assert!(d.probs().iter().all(|&p| p == 0.0 || p == 1.0));
        assert_eq!(d.prob(&[1, 1], &[1, 0]), 1.0);
        let t = DeterministicStrategy { responses: vec![vec![1, 1], vec![0, 0]] };
        let m = lhv_distribution(&[2, 2], &[2, 2], &[(0.5, s), (0.5, t)]).unwrap();
        assert_eq!(m.prob(&[0, 1], &[0, 0]), 0.5);
        assert_eq!(m.prob(&[1, 0], &[0, 0]), 0.5);
        assert!(lhv_distribution(&[2], &[2], &[]).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![1], vec![2], vec![0.5, 0.5]).is_ok());
        assert!(Distribution::new(vec![1], vec![2], vec![0.6, 0.5]).is_err());
        assert!(Distribution::new(vec![1], vec![2], vec![1.1, -0.1]).is_err());
        assert!(Distribution::new(vec![1], vec![2], vec![1.0]).is_err());
    }

    #[test]
    fn csv_layout() {
        let d = Distribution::new(vec![1, 2], vec![2, 1], vec![0.25, 0.75, 1.0, 0.0]).unwrap();
        let csv = d.to_csv_string().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "a,x,probability");
        assert_eq!(lines[1], "0:0,0:0,0.25");
        assert_eq!(lines[4], "0:1,1:0,0");
        let json = serde_json::to_string(&d).unwrap();
        let back: Distribution = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn tuple_index_round_trip() {
        let radix = [3, 2, 4];
        for i in 0..24 {
            assert_eq!(tuple_index(&tuple_digits(i, &radix), &radix), i);
        }
    }
}
