//! Entanglement swapping, CHSH functionals and activation tests.

mod projection;
mod reduce;

pub use projection::{find_entangled_qubit_projection, project_to_qubit_subspace, ProjectionBranch, ProjectionHit, ProjectionSummary};
pub use reduce::{reduce_network, MeasurementBasis, PlannedMeasurement, Reduction, Subnetwork};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::chsh_terms;
use crate::linalg::{kron_all, Matrix};
use crate::quantum::{
    collapse, dichotomic_observable, outcome_probability, BellLabel, DensityOperator, GhzState, Observable,
    ObservableKind, Povm, PureState,
};
use crate::tolerance;

/// Result of one hub outcome in a star swap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwapOutcome {
    pub label: BellLabel,
    pub probability: f64,
    /// The leaves' collapsed state `u_y|y⟩ ± v_y|ȳ⟩` (unnormalized
    /// amplitudes); `None` when the outcome cannot occur.
    pub state: Option<GhzState>,
}

impl SwapOutcome {
    pub fn pure_state(&self) -> Option<PureState> {
        self.state.as_ref().map(GhzState::to_pure)
    }
}

/// Reads `(u, v)` off a two-qubit state `u|00⟩ + v|11⟩` with real amplitudes.
pub fn schmidt_amplitudes(pair: &PureState) -> Result<(f64, f64)> {
    let amps = pair.amplitudes();
    let eps = tolerance::PURE_NORM;
    if pair.dims().as_slice() != [2, 2] {
        return Err(Error::InvalidState(format!("expected a two-qubit pair, got dims {}", pair.dims())));
    }
    if amps[1].norm() > eps || amps[2].norm() > eps || amps.iter().any(|z| z.im.abs() > eps) {
        return Err(Error::InvalidState("pair is not of the form u|00⟩ + v|11⟩ with real u, v".into()));
    }
    Ok((amps[0].re, amps[3].re))
}

/// Hub holds the second qubit of every pair and measures them in the
/// n-qubit Bell basis. With pair `i` equal to `u_i|00⟩ + v_i|11⟩`, projecting
/// the hub onto `(|y⟩ ± |ȳ⟩)/√2` leaves the leaves in
/// `(u_y|y⟩ ± v_y|ȳ⟩)/√2`, where `u_y = Π_i amp_i(y_i)`,
/// `v_y = Π_i amp_i(ȳ_i)` and `amp_i(0) = u_i`, `amp_i(1) = v_i`.
pub fn star_swap(pairs: &[PureState], outcome: &BellLabel) -> Result<SwapOutcome> {
    if pairs.len() < 2 || outcome.y.len() != pairs.len() {
        return Err(Error::InvalidParameter(format!(
            "{} pairs with a {}-qubit outcome label",
            pairs.len(),
            outcome.y.len()
        )));
    }
    let amps: Vec<(f64, f64)> = pairs.iter().map(schmidt_amplitudes).collect::<Result<_>>()?;
    let pick = |i: usize, bit: u8| if bit == 0 { amps[i].0 } else { amps[i].1 };
    let u_y: f64 = outcome.y.iter().enumerate().map(|(i, &b)| pick(i, b)).product();
    let v_y: f64 = outcome.y.iter().enumerate().map(|(i, &b)| pick(i, 1 - b)).product();
    let probability = (u_y * u_y + v_y * v_y) / 2.0;
    let state = if probability > tolerance::ZERO_PROBABILITY {
        Some(GhzState::new(pairs.len(), u_y, v_y, outcome.y.clone(), outcome.sign)?)
    } else {
        None
    };
    Ok(SwapOutcome { label: outcome.clone(), probability, state })
}

/// All `2ⁿ` hub outcomes in Bell-basis order.
pub fn star_swap_all(pairs: &[PureState]) -> Result<Vec<SwapOutcome>> {
    crate::quantum::bell_basis_labels(pairs.len()).iter().map(|l| star_swap(pairs, l)).collect()
}

/// Dichotomic observable pairs for the two CHSH parties.
#[derive(Clone, Debug, PartialEq)]
pub struct ChshObservables {
    pub alice: [Observable; 2],
    pub charlie: [Observable; 2],
}

impl ChshObservables {
    /// Alice measures `σz`, `σx`; Charlie measures `cos θ σz ± sin θ σx`.
    pub fn tilted(theta: f64) -> Self {
        Self {
            alice: [
                dichotomic_observable(ObservableKind::ZxPair, 0, 0.0),
                dichotomic_observable(ObservableKind::ZxPair, 1, 0.0),
            ],
            charlie: [
                dichotomic_observable(ObservableKind::Tilted, 0, theta),
                dichotomic_observable(ObservableKind::Tilted, 1, theta),
            ],
        }
    }

    /// `A0⊗C0 + A0⊗C1 + A1⊗C0 - A1⊗C1`.
    pub fn operator(&self) -> Matrix {
        let parties = vec![self.alice.clone(), self.charlie.clone()];
        correlator_operator(&parties)
    }
}

/// `Σ_t sign_t ⊗_j M^j_{t_j}` over the four weighted CHSH setting tuples.
fn correlator_operator(parties: &[[Observable; 2]]) -> Matrix {
    let n = parties.len();
    let mut total: Option<Matrix> = None;
    for (tuple, sign) in chsh_terms(n) {
        let factors: Vec<&Matrix> = tuple.iter().zip(parties).map(|(&i, p)| p[i as usize].mat()).collect();
        let term = kron_all(factors).expect("at least two parties").scale(sign);
        total = Some(match total {
            Some(t) => &t + &term,
            None => term,
        });
    }
    total.expect("four terms")
}

/// The n-party observables: `σz/σx` for parties `1..n-1`, `cos θ σz ± sin θ σx`
/// for the last. For odd `n` party `n-1` uses `I/σx` instead.
pub fn multipartite_observables(n: usize, theta: f64) -> Vec<[Observable; 2]> {
    (0..n)
        .map(|j| {
            let kind = if j == n - 1 {
                ObservableKind::Tilted
            } else if n % 2 == 1 && j == n - 2 {
                ObservableKind::IdentityXPair
            } else {
                ObservableKind::ZxPair
            };
            [dichotomic_observable(kind, 0, theta), dichotomic_observable(kind, 1, theta)]
        })
        .collect()
}

pub fn multipartite_chsh_operator(n: usize, theta: f64) -> Matrix {
    correlator_operator(&multipartite_observables(n, theta))
}

/// `Tr[O ρ]` for the CHSH operator of `observables`.
pub fn chsh_value(state: &DensityOperator, observables: &ChshObservables) -> Result<f64> {
    if state.dims().as_slice() != [2, 2] {
        return Err(Error::InvalidDims(format!("CHSH needs a two-qubit state, got dims {}", state.dims())));
    }
    state.expectation(&observables.operator())
}

const GRID_POINTS: usize = 10_000;
const GOLDEN_ITERATIONS: usize = 100;

/// Maximizes `f` over `θ ∈ [-π, π)`: a uniform grid, then golden-section
/// refinement inside the best grid cell.
pub fn maximize_theta(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let step = 2.0 * PI / GRID_POINTS as f64;
    let (mut best_t, mut best_v) = (-PI, f(-PI));
    for k in 1..GRID_POINTS {
        let t = -PI + k as f64 * step;
        let v = f(t);
        if v > best_v {
            best_t = t;
            best_v = v;
        }
    }
    let (mut lo, mut hi) = (best_t - step, best_t + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d);
        }
    }
    let t = (lo + hi) / 2.0;
    let v = f(t);
    if v > best_v {
        (t, v)
    } else {
        (best_t, best_v)
    }
}

/// The tilted observables are linear in `(cos θ, sin θ)`, so the functional
/// is `F(θ) = e_z cos θ + e_x sin θ` with `e_z = F(0)` and `e_x = F(π/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaFunctional {
    pub e_z: f64,
    pub e_x: f64,
}

impl ThetaFunctional {
    pub fn at(&self, theta: f64) -> f64 {
        self.e_z * theta.cos() + self.e_x * theta.sin()
    }

    pub fn maximize(&self) -> (f64, f64) {
        maximize_theta(|t| self.at(t))
    }
}

fn theta_functional(state: &DensityOperator, op_at: impl Fn(f64) -> Matrix) -> Result<ThetaFunctional> {
    Ok(ThetaFunctional { e_z: state.expectation(&op_at(0.0))?, e_x: state.expectation(&op_at(PI / 2.0))? })
}

/// Two-qubit CHSH value with tilted observables as a function of θ.
pub fn chsh_functional(state: &DensityOperator) -> Result<ThetaFunctional> {
    if state.dims().as_slice() != [2, 2] {
        return Err(Error::InvalidDims(format!("CHSH needs a two-qubit state, got dims {}", state.dims())));
    }
    theta_functional(state, |t| ChshObservables::tilted(t).operator())
}

/// θ-optimized n-party CHSH value of an n-qubit state.
pub fn multipartite_chsh_value(state: &PureState, n: usize) -> Result<f64> {
    Ok(multipartite_functional(&state.density(), n)?.maximize().1)
}

pub fn multipartite_functional(state: &DensityOperator, n: usize) -> Result<ThetaFunctional> {
    if n < 2 || state.dims().as_slice() != vec![2; n].as_slice() {
        return Err(Error::InvalidDims(format!("{n}-party CHSH needs {n} qubits, got dims {}", state.dims())));
    }
    theta_functional(state, |t| multipartite_chsh_operator(n, t))
}

/// The n-party CHSH value of a generalized GHZ state next to the closed forms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzChshReport {
    pub n: usize,
    pub r: f64,
    pub u: f64,
    pub v: f64,
    /// `cos θ = 1/√(1 + 4r²u²v²)`.
    pub printed_theta: f64,
    pub value_at_printed_theta: f64,
    pub grid_theta: f64,
    pub grid_value: f64,
    /// `2√(1 + 4r²u²v²)`.
    pub printed_formula: f64,
    /// `2√(1 + 4r⁴u²v²)`, the maximum for normalized amplitudes `ru`, `rv`.
    pub corrected_formula: f64,
    /// The printed formula differs from the optimized value by more than 1e-6.
    pub printed_mismatch: bool,
}

pub fn ghz_chsh_report(ghz: &GhzState) -> Result<GhzChshReport> {
    let n = ghz.n();
    let (r, u, v) = (ghz.r(), ghz.u, ghz.v);
    let f = multipartite_functional(&ghz.to_pure().density(), n)?;
    let printed_theta = (1.0 / (1.0 + 4.0 * r * r * u * u * v * v).sqrt()).acos();
    let (grid_theta, grid_value) = f.maximize();
    let printed_formula = 2.0 * (1.0 + 4.0 * r * r * u * u * v * v).sqrt();
    Ok(GhzChshReport {
        n,
        r,
        u,
        v,
        printed_theta,
        value_at_printed_theta: f.at(printed_theta),
        grid_theta,
        grid_value,
        printed_formula,
        corrected_formula: 2.0 * (1.0 + 4.0 * r.powi(4) * u * u * v * v).sqrt(),
        printed_mismatch: (printed_formula - grid_value).abs() > 1e-6,
    })
}

/// Pure-state decompositions `ρ_AB = Σ p_i |Φ_i⟩⟨Φ_i|`, `ρ_CD = Σ q_j |Ψ_j⟩⟨Ψ_j|`
/// and the hub element whose post-selected values are combined.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub ab: Vec<(f64, DensityOperator)>,
    pub cd: Vec<(f64, DensityOperator)>,
    pub hub_element: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeValue {
    pub outcome: usize,
    pub probability: f64,
    /// CHSH value of the collapsed A–D state with the supplied observables;
    /// `None` for outcomes that cannot occur.
    pub chsh: Option<f64>,
    /// Best value over θ with tilted observables.
    pub chsh_optimized: Option<f64>,
    pub theta_optimized: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentValues {
    pub hub_element: usize,
    /// `p_i q_j`.
    pub weights: Vec<Vec<f64>>,
    /// `c_ij`: CHSH value after collapsing `Φ_i ⊗ Ψ_j` on the hub element;
    /// `None` where that component never yields the outcome.
    pub values: Vec<Vec<Option<f64>>>,
    /// Hub-outcome probability of each component.
    pub probabilities: Vec<Vec<f64>>,
    /// `Σ p_i q_j c_ij` over components with a defined `c_ij`.
    pub mixture: f64,
    /// The same weights applied to a direct recomputation of every `c_ij`.
    pub recomputed_mixture: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivationReport {
    pub outcomes: Vec<OutcomeValue>,
    /// Outcome with the largest CHSH value under the supplied observables.
    pub selected_outcome: usize,
    pub selected_value: f64,
    pub components: Option<ComponentValues>,
    pub classical_bound: f64,
    pub violated: bool,
}

fn collapsed_chsh(
    joint: &DensityOperator,
    element: &Matrix,
    observables: &ChshObservables,
) -> Result<(f64, Option<(DensityOperator, f64)>)> {
    let probability = outcome_probability(joint, element, &[1, 2])?;
    if probability <= tolerance::ZERO_PROBABILITY {
        return Ok((probability, None));
    }
    let c = collapse(joint, element, &[1, 2])?;
    let value = chsh_value(&c.state, observables)?;
    Ok((probability, Some((c.state, value))))
}

fn check_pair(rho: &DensityOperator, what: &str) -> Result<()> {
    if rho.dims().as_slice() != [2, 2] {
        return Err(Error::InvalidDims(format!("{what} must be a two-qubit state, got dims {}", rho.dims())));
    }
    Ok(())
}

/// Bob measures `hub_povm` on (B, C) of `ρ_AB ⊗ ρ_CD`; for each outcome the
/// collapsed A–D state is scored with the CHSH functional.
pub fn activation_test(
    rho_ab: &DensityOperator,
    rho_cd: &DensityOperator,
    hub_povm: &Povm,
    observables: &ChshObservables,
    decomposition: Option<&Decomposition>,
) -> Result<ActivationReport> {
    check_pair(rho_ab, "ρ_AB")?;
    check_pair(rho_cd, "ρ_CD")?;
    if hub_povm.dims().as_slice() != [2, 2] {
        return Err(Error::InvalidDims(format!("hub POVM must act on two qubits, got dims {}", hub_povm.dims())));
    }
    let joint = rho_ab.tensor(rho_cd);
    let mut outcomes = Vec::with_capacity(hub_povm.len());
    for (k, element) in hub_povm.elements().iter().enumerate() {
        let (probability, collapsed) = collapsed_chsh(&joint, element, observables)?;
        let mut entry =
            OutcomeValue { outcome: k, probability, chsh: None, chsh_optimized: None, theta_optimized: None };
        if let Some((state, value)) = collapsed {
            let (t, best) = chsh_functional(&state)?.maximize();
            entry.chsh = Some(value);
            entry.chsh_optimized = Some(best);
            entry.theta_optimized = Some(t);
        }
        outcomes.push(entry);
    }
    let (selected_outcome, selected_value) = outcomes
        .iter()
        .filter_map(|o| o.chsh.map(|v| (o.outcome, v)))
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });

    let components = decomposition.map(|d| component_values(d, hub_povm, observables)).transpose()?;
    let classical_bound = 2.0;
    Ok(ActivationReport {
        outcomes,
        selected_outcome,
        selected_value,
        components,
        classical_bound,
        violated: selected_value > classical_bound + tolerance::VIOLATION,
    })
}

fn component_values(d: &Decomposition, hub_povm: &Povm, observables: &ChshObservables) -> Result<ComponentValues> {
    let element = hub_povm
        .elements()
        .get(d.hub_element)
        .ok_or_else(|| Error::InvalidParameter(format!("hub element {} does not exist", d.hub_element)))?;
    for (_, rho) in d.ab.iter().chain(&d.cd) {
        check_pair(rho, "decomposition component")?;
    }
    let mut weights = Vec::new();
    let mut values = Vec::new();
    let mut probabilities = Vec::new();
    let mut mixture = 0.0;
    let mut recomputed = 0.0;
    for (p, phi) in &d.ab {
        let (mut wr, mut vr, mut pr) = (Vec::new(), Vec::new(), Vec::new());
        for (q, psi) in &d.cd {
            let joint = phi.tensor(psi);
            let (prob, collapsed) = collapsed_chsh(&joint, element, observables)?;
            let value = collapsed.map(|(_, v)| v);
            if let Some(v) = value {
                mixture += p * q * v;
                let again = collapse(&joint, element, &[1, 2])?;
                recomputed += p * q * again.state.expectation(&observables.operator())?;
            }
            wr.push(p * q);
            vr.push(value);
            pr.push(prob);
        }
        weights.push(wr);
        values.push(vr);
        probabilities.push(pr);
    }
    Ok(ComponentValues {
        hub_element: d.hub_element,
        weights,
        values,
        probabilities,
        mixture,
        recomputed_mixture: recomputed,
    })
}
