//! Worked examples and theorem demonstrations as structured reports.
//!
//! Every number in a report is tagged with how it was obtained: by building
//! the density matrices and measuring (`matrix`), by a closed form
//! (`formula`), or by enumerating deterministic strategies (`enumeration`).
//! Closed forms that disagree with the matrix computation are listed as
//! discrepancies rather than reconciled.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{chsh_game, compose_hybrid, compose_lambda, compose_star, lhv_optimum, payoff, LinearGame};
use crate::limits::Limits;
use crate::linalg::{DimList, Matrix, C64};
use crate::network::{joint_distribution, InputMode, MeasurementScenario, NetworkTopology, Source};
use crate::quantum::{
    bell_basis_labels, bell_basis_povm, collapse, dichotomic_observable, ghz_state, outcome_probability,
    schmidt_pure_state, DensityOperator, ObservableKind, Povm, PureState, Sign,
};
use crate::swap::{activation_test, chsh_functional, ChshObservables, Decomposition, ThetaFunctional};
use crate::tolerance;

/// Agreement required between a closed form and the matrix computation.
pub const FORMULA_TOLERANCE: f64 = 1e-6;
const NORMALIZATION: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    Matrix,
    Formula,
    Enumeration,
}

impl Oracle {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Matrix => "matrix",
            Self::Formula => "formula",
            Self::Enumeration => "enumeration",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
    pub oracle: Oracle,
}

/// A printed closed form that disagrees with the computed value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub name: String,
    pub printed: f64,
    pub computed: f64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub id: String,
    pub parameters: BTreeMap<String, f64>,
    pub values: Vec<NamedValue>,
    pub predictions: Vec<NamedValue>,
    pub discrepancies: Vec<Discrepancy>,
    pub checks: Vec<Check>,
    pub violated: bool,
}

impl ScenarioReport {
    fn new(id: &str, parameters: &[(&str, f64)]) -> Self {
        Self {
            id: id.into(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            values: Vec::new(),
            predictions: Vec::new(),
            discrepancies: Vec::new(),
            checks: Vec::new(),
            violated: false,
        }
    }

    fn record(&mut self, name: impl Into<String>, value: f64, oracle: Oracle) {
        self.values.push(NamedValue { name: name.into(), value, oracle });
    }

    fn predict(&mut self, name: impl Into<String>, value: f64) {
        self.predictions.push(NamedValue { name: name.into(), value, oracle: Oracle::Formula });
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn compare_printed(&mut self, name: &str, printed: f64, computed: f64, note: &str) {
        if (printed - computed).abs() > FORMULA_TOLERANCE {
            self.discrepancies.push(Discrepancy { name: name.into(), printed, computed, note: note.into() });
        }
    }

    /// Computed value by name.
    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.name == name).map(|v| v.value)
    }

    /// Formula prediction by name.
    pub fn prediction(&self, name: &str) -> Option<f64> {
        self.predictions.iter().find(|v| v.name == name).map(|v| v.value)
    }

    pub fn check_passed(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|c| c.name == name).map(|c| c.passed)
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are finite")
    }
}

/// Long-format table over several reports with columns
/// `scenario,section,name,value,oracle,detail`.
pub fn summary_csv(reports: &[ScenarioReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    w.write_record(["scenario", "section", "name", "value", "oracle", "detail"]).map_err(io)?;
    for r in reports {
        for (k, v) in &r.parameters {
            w.write_record([&r.id, "parameter", k, &v.to_string(), "", ""]).map_err(io)?;
        }
        for (section, list) in [("value", &r.values), ("prediction", &r.predictions)] {
            for v in list {
                w.write_record([&r.id, section, &v.name, &v.value.to_string(), v.oracle.as_str(), ""]).map_err(io)?;
            }
        }
        for d in &r.discrepancies {
            let detail = format!("printed={}; {}", d.printed, d.note);
            w.write_record([&r.id, "discrepancy", &d.name, &d.computed.to_string(), "matrix", &detail]).map_err(io)?;
        }
        for c in &r.checks {
            let v = if c.passed { "1" } else { "0" };
            w.write_record([r.id.as_str(), "check", &c.name, v, "", &c.detail]).map_err(io)?;
        }
        let v = if r.violated { "1" } else { "0" };
        w.write_record([r.id.as_str(), "verdict", "violated", v, "", ""]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn two_qubit(amps: [f64; 4]) -> Result<DensityOperator> {
    let v = amps.iter().map(|&a| C64::new(a, 0.0)).collect();
    Ok(PureState::new(v, DimList::qubits(2))?.density())
}

fn require_unit(name: &str, x: f64, y: f64) -> Result<()> {
    if !x.is_finite() || !y.is_finite() || (x * x + y * y - 1.0).abs() > NORMALIZATION {
        return Err(Error::InvalidParameter(format!("{name}: squares sum to {}", x * x + y * y)));
    }
    Ok(())
}

fn require_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

/// `2xy / (x² + y²)`: the σx⊗σx correlation of `x|ab⟩ + y|āb̄⟩`.
fn xx_correlation(x: f64, y: f64) -> Option<f64> {
    let d = x * x + y * y;
    (d > tolerance::ZERO_PROBABILITY).then(|| 2.0 * x * y / d)
}

fn hub_element() -> Matrix {
    bell_basis_labels(2)[0].projector()
}

struct Component {
    weight: f64,
    probability: f64,
    functional: Option<ThetaFunctional>,
}

/// For each `(i, j)`, the hub outcome probability and the CHSH functional of
/// the collapsed A–D state.
fn components(d: &Decomposition, element: &Matrix) -> Result<Vec<Vec<Component>>> {
    d.ab.iter()
        .map(|(p, phi)| {
            d.cd.iter()
                .map(|(q, psi)| {
                    let joint = phi.tensor(psi);
                    let probability = outcome_probability(&joint, element, &[1, 2])?;
                    let functional = if probability > tolerance::ZERO_PROBABILITY {
                        Some(chsh_functional(&collapse(&joint, element, &[1, 2])?.state)?)
                    } else {
                        None
                    };
                    Ok(Component { weight: p * q, probability, functional })
                })
                .collect()
        })
        .collect()
}

fn mixture_functional(comps: &[Vec<Component>]) -> ThetaFunctional {
    let (mut e_z, mut e_x) = (0.0, 0.0);
    for c in comps.iter().flatten() {
        if let Some(f) = c.functional {
            e_z += c.weight * f.e_z;
            e_x += c.weight * f.e_x;
        }
    }
    ThetaFunctional { e_z, e_x }
}

/// Records the hub's four Bell outcomes on `ρ_AB ⊗ ρ_CD` and returns the
/// functional of the outcome selected by the examples.
fn record_outcomes(
    r: &mut ScenarioReport,
    rho_ab: &DensityOperator,
    rho_cd: &DensityOperator,
    theta: f64,
) -> Result<Option<ThetaFunctional>> {
    let povm = bell_basis_povm(2)?;
    let act = activation_test(rho_ab, rho_cd, &povm, &ChshObservables::tilted(theta), None)?;
    for (o, label) in act.outcomes.iter().zip(bell_basis_labels(2)) {
        r.record(format!("outcome_{label}_probability"), o.probability, Oracle::Matrix);
        if let Some(v) = o.chsh_optimized {
            r.record(format!("outcome_{label}_chsh_optimized"), v, Oracle::Matrix);
        }
    }
    let joint = rho_ab.tensor(rho_cd);
    let e = hub_element();
    if outcome_probability(&joint, &e, &[1, 2])? <= tolerance::ZERO_PROBABILITY {
        return Ok(None);
    }
    Ok(Some(chsh_functional(&collapse(&joint, &e, &[1, 2])?.state)?))
}

const LABELS: [[&str; 2]; 2] = [["c11", "c12"], ["c21", "c22"]];

/// Λ network of two-component mixtures: `ρ_AB = p₁Φ₁ + p₂Φ₂`, `ρ_CD = q₁Ψ₁ + q₂Ψ₂` with
/// `Φ₁ = a₁|00⟩ + b₁|11⟩`, `Φ₂ = c₁|01⟩ + d₁|10⟩`, `Ψ₁ = a₂|00⟩ + b₂|11⟩`,
/// `Ψ₂ = c₂|01⟩ + d₂|10⟩`. Bob post-selects `|Φ⁺⟩` on B, C; Alice measures
/// `σz, σx`, Charlie `cos θ σz ± sin θ σx`.
#[allow(clippy::too_many_arguments)]
pub fn example1(a1: f64, b1: f64, a2: f64, b2: f64, c1: f64, d1: f64, c2: f64, d2: f64, p1: f64, q1: f64) -> Result<ScenarioReport> {
    require_unit("a1, b1", a1, b1)?;
    require_unit("a2, b2", a2, b2)?;
    require_unit("c1, d1", c1, d1)?;
    require_unit("c2, d2", c2, d2)?;
    require_probability("p1", p1)?;
    require_probability("q1", q1)?;
    let (p2, q2) = (1.0 - p1, 1.0 - q1);
    let mut r = ScenarioReport::new(
        "example1",
        &[
            ("a1", a1),
            ("b1", b1),
            ("a2", a2),
            ("b2", b2),
            ("c1", c1),
            ("d1", d1),
            ("c2", c2),
            ("d2", d2),
            ("p1", p1),
            ("q1", q1),
        ],
    );

    let phi = [two_qubit([a1, 0.0, 0.0, b1])?, two_qubit([0.0, c1, d1, 0.0])?];
    let psi = [two_qubit([a2, 0.0, 0.0, b2])?, two_qubit([0.0, c2, d2, 0.0])?];
    let decomposition = Decomposition {
        ab: vec![(p1, phi[0].clone()), (p2, phi[1].clone())],
        cd: vec![(q1, psi[0].clone()), (q2, psi[1].clone())],
        hub_element: 0,
    };
    let comps = components(&decomposition, &hub_element())?;

    // collapsed A–D state of component (i, j) is x|s⟩ + y|s̄⟩ with σz⊗σz = ±1
    let zz = [[1.0, -1.0], [-1.0, 1.0]];
    let xy = [[(a1 * a2, b1 * b2), (a1 * c2, b1 * d2)], [(c1 * b2, d1 * a2), (c1 * d2, d1 * c2)]];
    let t: Vec<Vec<Option<f64>>> =
        xy.iter().map(|row| row.iter().map(|&(x, y)| xx_correlation(x, y)).collect()).collect();
    let w = [[p1 * q1, p1 * q2], [p2 * q1, p2 * q2]];
    let alpha = (p1 - p2) * (q1 - q2);
    let beta: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).filter_map(|(i, j)| t[i][j].map(|t| w[i][j] * t)).sum();
    let theta = beta.atan2(alpha);
    let formula_mixture = 2.0 * alpha.hypot(beta);

    // as printed: c21 and c22 with swapped denominators, β missing a factor 2 in its last term
    let printed_t21 = 2.0 * c1 * d1 * a2 * b2 / (c1 * c1 * a2 * a2 + d1 * d1 * b2 * b2);
    let printed_t22 = 2.0 * c1 * d1 * c2 * d2 / (c1 * c1 * c2 * c2 + d1 * d1 * d2 * d2);
    let printed_beta = w[0][0] * t[0][0].unwrap_or(0.0) + w[0][1] * t[0][1].unwrap_or(0.0) + w[1][0] * printed_t21
        + w[1][1] * printed_t22 / 2.0;

    r.record("theta", theta, Oracle::Formula);
    r.predict("alpha", alpha);
    r.predict("beta", beta);
    let mut formulas_agree = true;
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            let c = &comps[i][j];
            r.record(format!("{}_probability", LABELS[i][j]), c.probability, Oracle::Matrix);
            let (Some(f), Some(tij)) = (c.functional, t[i][j]) else {
                continue;
            };
            let computed = f.at(theta);
            let formula = 2.0 * zz[i][j] * theta.cos() + 2.0 * tij * theta.sin();
            r.record(LABELS[i][j], computed, Oracle::Matrix);
            r.predict(LABELS[i][j], formula);
            worst = worst.max((computed - formula).abs());
            formulas_agree &= (computed - formula).abs() <= FORMULA_TOLERANCE;
            let printed = match (i, j) {
                (1, 0) => Some(2.0 * zz[i][j] * theta.cos() + 2.0 * printed_t21 * theta.sin()),
                (1, 1) => Some(2.0 * zz[i][j] * theta.cos() + 2.0 * printed_t22 * theta.sin()),
                _ => None,
            };
            if let Some(p) = printed.filter(|p| p.is_finite()) {
                r.compare_printed(LABELS[i][j], p, computed, "printed denominator pairs the Schmidt coefficients differently");
            }
        }
    }
    r.check("component_formulas", formulas_agree, format!("max deviation {worst:e}"));

    let mixture_f = mixture_functional(&comps);
    let mixture = mixture_f.at(theta);
    let (best_theta, best_mixture) = mixture_f.maximize();
    r.record("mixture", mixture, Oracle::Matrix);
    r.record("mixture_optimized", best_mixture, Oracle::Matrix);
    r.record("mixture_optimized_theta", best_theta, Oracle::Matrix);
    r.predict("mixture", formula_mixture);
    r.check(
        "mixture_formula",
        (mixture - formula_mixture).abs() <= FORMULA_TOLERANCE,
        format!("matrix {mixture} vs formula {formula_mixture}"),
    );
    if printed_beta.is_finite() {
        r.compare_printed("mixture", 2.0 * alpha.hypot(printed_beta), mixture, "printed β drops a factor 2 in its last term");
    }

    let rho_ab = DensityOperator::mixture(&[(p1, &phi[0]), (p2, &phi[1])])?;
    let rho_cd = DensityOperator::mixture(&[(q1, &psi[0]), (q2, &psi[1])])?;
    if let Some(post) = record_outcomes(&mut r, &rho_ab, &rho_cd, theta)? {
        let value = post.at(theta);
        r.record("post_selected", value, Oracle::Matrix);
        r.record("post_selected_optimized", post.maximize().1, Oracle::Matrix);
        r.compare_printed(
            "post_selected",
            mixture,
            value,
            "the weighted sum Σ p_i q_j c_ij ignores the unequal hub probabilities of the components",
        );
    }
    r.violated = mixture > 2.0 + tolerance::VIOLATION;
    r.check("violation", r.violated, format!("mixture {mixture} against bound 2"));
    Ok(r)
}

/// [`example1`] over a `steps × steps` grid of `(p₁, q₁) ∈ [0, 1]²`.
#[allow(clippy::too_many_arguments)]
pub fn example1_sweep(
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    c1: f64,
    d1: f64,
    c2: f64,
    d2: f64,
    steps: usize,
) -> Result<Vec<ScenarioReport>> {
    if steps < 2 {
        return Err(Error::InvalidParameter("a sweep needs at least 2 steps".into()));
    }
    let grid: Vec<f64> = (0..steps).map(|k| k as f64 / (steps - 1) as f64).collect();
    grid.iter()
        .cartesian_product(&grid)
        .map(|(&p1, &q1)| example1(a1, b1, a2, b2, c1, d1, c2, d2, p1, q1))
        .collect()
}

/// `2a₁b₁a₂b₂ / (a₁²a₂² + b₁²b₂²)`.
pub fn werner_beta(a1: f64, b1: f64, a2: f64, b2: f64) -> Option<f64> {
    xx_correlation(a1 * a2, b1 * b2)
}

fn werner_decomposition(p: f64, q: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Decomposition> {
    let mixed = DensityOperator::maximally_mixed(DimList::qubits(2));
    Ok(Decomposition {
        ab: vec![(1.0 - p, mixed.clone()), (p, two_qubit([a1, 0.0, 0.0, b1])?)],
        cd: vec![(1.0 - q, mixed), (q, two_qubit([a2, 0.0, 0.0, b2])?)],
        hub_element: 0,
    })
}

fn check_werner(p: f64, q: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> Result<()> {
    require_probability("p", p)?;
    require_probability("q", q)?;
    require_unit("a1, b1", a1, b1)?;
    require_unit("a2, b2", a2, b2)
}

/// Λ network of Werner states `(1-p)I/4 + p|Φ⟩⟨Φ|` and `(1-q)I/4 + q|Ψ⟩⟨Ψ|`
/// with `Φ = a₁|00⟩ + b₁|11⟩`, `Ψ = a₂|00⟩ + b₂|11⟩`.
pub fn example2_werner(p: f64, q: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> Result<ScenarioReport> {
    check_werner(p, q, a1, b1, a2, b2)?;
    let beta = werner_beta(a1, b1, a2, b2)
        .ok_or_else(|| Error::InvalidParameter("Φ ⊗ Ψ never yields the hub outcome".into()))?;
    let mut r = ScenarioReport::new("example2", &[("p", p), ("q", q), ("a1", a1), ("b1", b1), ("a2", a2), ("b2", b2)]);
    let d = werner_decomposition(p, q, a1, b1, a2, b2)?;
    let comps = components(&d, &hub_element())?;
    let theta = beta.atan();
    r.record("theta", theta, Oracle::Formula);
    r.predict("beta", beta);

    let mut zero = true;
    let mut formulas_agree = true;
    for i in 0..2 {
        for j in 0..2 {
            let c = &comps[i][j];
            r.record(format!("{}_probability", LABELS[i][j]), c.probability, Oracle::Matrix);
            let f = c.functional.expect("every Werner component reaches the hub outcome");
            let computed = f.at(theta);
            r.record(LABELS[i][j], computed, Oracle::Matrix);
            let formula = if (i, j) == (1, 1) { 2.0 * (theta.cos() + beta * theta.sin()) } else { 0.0 };
            r.predict(LABELS[i][j], formula);
            formulas_agree &= (computed - formula).abs() <= FORMULA_TOLERANCE;
            if (i, j) != (1, 1) {
                zero &= computed.abs() <= NORMALIZATION;
            }
        }
    }
    r.check("noise_components_vanish", zero, "c11, c12, c21 within 1e-10 of 0");
    r.check("component_formulas", formulas_agree, "c_ij against closed forms within 1e-6");

    let mixture_f = mixture_functional(&comps);
    let mixture = mixture_f.at(theta);
    let formula = 2.0 * p * q * (1.0 + beta * beta).sqrt();
    let threshold = 1.0 / (1.0 + beta * beta).sqrt();
    r.record("mixture", mixture, Oracle::Matrix);
    r.record("mixture_optimized", mixture_f.maximize().1, Oracle::Matrix);
    r.predict("mixture", formula);
    r.predict("threshold", threshold);
    r.predict("pq", p * q);
    r.check("mixture_formula", (mixture - formula).abs() <= FORMULA_TOLERANCE, format!("matrix {mixture} vs formula {formula}"));

    let rho_ab = DensityOperator::mixture(&[(1.0 - p, &d.ab[0].1), (p, &d.ab[1].1)])?;
    let rho_cd = DensityOperator::mixture(&[(1.0 - q, &d.cd[0].1), (q, &d.cd[1].1)])?;
    if let Some(post) = record_outcomes(&mut r, &rho_ab, &rho_cd, theta)? {
        r.record("post_selected", post.at(theta), Oracle::Matrix);
        r.record("post_selected_optimized", post.maximize().1, Oracle::Matrix);
    }
    r.violated = mixture > 2.0 + tolerance::VIOLATION;
    let predicted = p * q > threshold;
    r.check(
        "threshold_agrees",
        r.violated == predicted || (p * q - threshold).abs() < 1e-9,
        format!("pq = {} against threshold {threshold}", p * q),
    );
    Ok(r)
}

/// Smallest `p` at which the θ-optimized Werner mixture exceeds 2, located
/// by bisection to within `tol`; `None` if even `p = 1` does not violate.
pub fn werner_violation_boundary(q: f64, a1: f64, b1: f64, a2: f64, b2: f64, tol: f64) -> Result<Option<f64>> {
    check_werner(1.0, q, a1, b1, a2, b2)?;
    if tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let violates = |p: f64| -> Result<bool> {
        let comps = components(&werner_decomposition(p, q, a1, b1, a2, b2)?, &hub_element())?;
        Ok(mixture_functional(&comps).maximize().1 > 2.0 + tolerance::VIOLATION)
    };
    if !violates(1.0)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if violates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn bell_pair() -> PureState {
    schmidt_pure_state(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 2).expect("normalized")
}

fn observable_povms(kind: ObservableKind, theta: f64) -> Vec<Povm> {
    (0..2).map(|i| dichotomic_observable(kind, i, theta).povm()).collect()
}

/// One POVM per setting tuple of the merged slots, first slot most significant.
fn merged_povms(slots: &[Vec<Povm>]) -> Vec<Povm> {
    slots
        .iter()
        .map(|s| 0..s.len())
        .multi_cartesian_product()
        .map(|tuple| {
            let mut it = tuple.iter().zip(slots).map(|(&k, s)| s[k].clone());
            let first = it.next().expect("at least one slot");
            it.fold(first, |acc, p| acc.product(&p))
        })
        .collect()
}

fn bell_theta() -> Result<f64> {
    Ok(chsh_functional(&bell_pair().density())?.maximize().0)
}

/// Payoff of the bipartite CHSH game on a Bell pair with the optimized observables.
fn component_chsh(theta: f64, limits: &Limits) -> Result<f64> {
    let t = NetworkTopology::new(2, vec![Source::pure(&bell_pair(), vec![0, 1])?])?;
    let s = MeasurementScenario::classical(vec![
        observable_povms(ObservableKind::ZxPair, 0.0),
        observable_povms(ObservableKind::Tilted, theta),
    ])?;
    payoff(&chsh_game(2)?, &joint_distribution(&t, &s, InputMode::Classical, limits.dim_cap)?)
}

fn record_composition(
    r: &mut ScenarioReport,
    game: &LinearGame,
    quantum: f64,
    predicted: f64,
    strategy_cap: u128,
) -> Result<()> {
    r.record("quantum_payoff", quantum, Oracle::Matrix);
    r.predict("additive_payoff", predicted);
    r.predict("composed_bound", game.classical_bound());
    r.check(
        "additivity",
        (quantum - predicted).abs() <= 1e-10 * predicted.abs().max(1.0),
        format!("network payoff {quantum} vs Σ (M/M_g) ℘_g = {predicted}"),
    );
    match lhv_optimum(game, strategy_cap) {
        Ok(opt) => {
            r.record("lhv_optimum", opt.value, Oracle::Enumeration);
            r.record("enumerated_strategies", opt.enumerated as f64, Oracle::Enumeration);
            r.check(
                "bound_upper_bounds_enumeration",
                opt.value <= game.classical_bound() + tolerance::VIOLATION,
                format!("enumerated {} against composed {}", opt.value, game.classical_bound()),
            );
        }
        Err(Error::ResourceLimit { count, cap, .. }) => {
            r.check("bound_upper_bounds_enumeration", true, format!("skipped: {count} strategies exceed cap {cap}"));
        }
        Err(e) => return Err(e),
    }
    r.violated = quantum > game.classical_bound() + tolerance::VIOLATION;
    r.check("violation", r.violated, format!("payoff {quantum} against bound {}", game.classical_bound()));
    Ok(())
}

/// Λ network of two Bell pairs A–B, B–C scored with the composition of two CHSH games.
pub fn theorem1_demo() -> Result<ScenarioReport> {
    theorem1_demo_with(&Limits::default())
}

pub fn theorem1_demo_with(limits: &Limits) -> Result<ScenarioReport> {
    let mut r = ScenarioReport::new("theorem1", &[]);
    let chsh = chsh_game(2)?;
    let game = compose_lambda(&chsh, &chsh)?;
    let theta = bell_theta()?;
    let t = NetworkTopology::new(
        3,
        vec![Source::pure(&bell_pair(), vec![0, 1])?, Source::pure(&bell_pair(), vec![1, 2])?],
    )?;
    let alice = observable_povms(ObservableKind::ZxPair, 0.0);
    let charlie = observable_povms(ObservableKind::Tilted, theta);
    let s = MeasurementScenario::classical(vec![alice.clone(), merged_povms(&[charlie.clone(), alice]), charlie])?;
    let d = joint_distribution(&t, &s, InputMode::Classical, limits.dim_cap)?;
    let quantum = payoff(&game, &d)?;
    let component = component_chsh(theta, limits)?;
    r.record("component_chsh", component, Oracle::Matrix);
    let m = game.setting_volume();
    let predicted = 2.0 * m / chsh.setting_volume() * component;
    record_composition(&mut r, &game, quantum, predicted, limits.strategy_cap)?;
    Ok(r)
}

/// Star network: `n` leaves each sharing a Bell pair with the hub.
pub fn lemma1_demo(n: usize) -> Result<ScenarioReport> {
    lemma1_demo_with(n, &Limits::default())
}

pub fn lemma1_demo_with(n: usize, limits: &Limits) -> Result<ScenarioReport> {
    if !(1..=4).contains(&n) {
        return Err(Error::InvalidParameter(format!("star demo supports 1 to 4 leaves, got {n}")));
    }
    let mut r = ScenarioReport::new("lemma1", &[("n", n as f64)]);
    let chsh = chsh_game(2)?;
    let game = compose_star(&vec![chsh.clone(); n])?;
    let theta = bell_theta()?;
    let sources = (0..n).map(|i| Source::pure(&bell_pair(), vec![i, n])).collect::<Result<Vec<_>>>()?;
    let t = NetworkTopology::new(n + 1, sources)?;
    let alice = observable_povms(ObservableKind::ZxPair, 0.0);
    let charlie = observable_povms(ObservableKind::Tilted, theta);
    let mut parties = vec![alice; n];
    parties.push(merged_povms(&vec![charlie; n]));
    let d = joint_distribution(&t, &MeasurementScenario::classical(parties)?, InputMode::Classical, limits.dim_cap)?;
    let quantum = payoff(&game, &d)?;
    let component = component_chsh(theta, limits)?;
    r.record("component_chsh", component, Oracle::Matrix);
    let predicted = n as f64 * game.setting_volume() / chsh.setting_volume() * component;
    record_composition(&mut r, &game, quantum, predicted, limits.strategy_cap)?;
    Ok(r)
}

/// A Bell pair (parties 0, 1) next to a classical pair (parties 2, 3) that
/// shares `|00⟩` and always answers `+1`, which saturates CHSH at 2.
pub fn theorem3_demo() -> Result<ScenarioReport> {
    theorem3_demo_with(&Limits::default())
}

pub fn theorem3_demo_with(limits: &Limits) -> Result<ScenarioReport> {
    let mut r = ScenarioReport::new("theorem3", &[]);
    let chsh = chsh_game(2)?;
    let theta = bell_theta()?;
    let product = PureState::basis(0, DimList::qubits(2))?;
    let z = observable_povms(ObservableKind::ZxPair, 0.0)[0].clone();

    let classical_net = NetworkTopology::new(2, vec![Source::pure(&product, vec![0, 1])?.flagged_separable(true)])?;
    let classical_s = MeasurementScenario::classical(vec![vec![z.clone(), z.clone()]; 2])?;
    let c_hat = payoff(&chsh, &joint_distribution(&classical_net, &classical_s, InputMode::Classical, limits.dim_cap)?)?;
    r.record("classical_subnetwork_value", c_hat, Oracle::Matrix);

    let game = compose_hybrid(std::slice::from_ref(&chsh), &chsh, c_hat)?;
    let t = NetworkTopology::new(
        4,
        vec![Source::pure(&bell_pair(), vec![0, 1])?, Source::pure(&product, vec![2, 3])?.flagged_separable(true)],
    )?;
    let s = MeasurementScenario::classical(vec![
        observable_povms(ObservableKind::ZxPair, 0.0),
        observable_povms(ObservableKind::Tilted, theta),
        vec![z.clone(), z.clone()],
        vec![z.clone(), z],
    ])?;
    let quantum = payoff(&game, &joint_distribution(&t, &s, InputMode::Classical, limits.dim_cap)?)?;
    let component = component_chsh(theta, limits)?;
    r.record("component_chsh", component, Oracle::Matrix);
    let scale = game.setting_volume() / chsh.setting_volume();
    let predicted = scale * (component + c_hat);
    record_composition(&mut r, &game, quantum, predicted, limits.strategy_cap)?;

    let margin = quantum - game.classical_bound();
    let scaled_quantum_margin = scale * (component - chsh.classical_bound());
    r.record("hybrid_margin", margin, Oracle::Matrix);
    r.predict("scaled_quantum_margin", scaled_quantum_margin);
    r.check(
        "margin_from_quantum_part",
        (margin - scaled_quantum_margin).abs() <= 1e-9,
        format!("hybrid margin {margin} vs (M/M_q)(℘_q - 2) = {scaled_quantum_margin}"),
    );
    Ok(r)
}

/// Ten parties (0-indexed) with GHZ-type sources `u|0…0⟩ + v|1…1⟩` on
/// `{1,8}, {3,8}, {4,8}, {1,6}, {2,6,7}, {0,5,6,9}`.
pub fn ten_party_layout(u: f64, v: f64) -> Result<NetworkTopology> {
    let groups: [&[usize]; 6] = [&[1, 8], &[3, 8], &[4, 8], &[1, 6], &[2, 6, 7], &[0, 5, 6, 9]];
    let sources = groups
        .iter()
        .map(|g| Source::pure(&ghz_state(g.len(), u, v, &vec![0; g.len()], Sign::Plus)?, g.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    NetworkTopology::new(10, sources)
}

/// Targets for the ten-party layout: the first five parties.
pub fn ten_party_targets() -> Vec<usize> {
    (0..5).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::is_entangled_ppt;
    use crate::swap::{reduce_network, Subnetwork};
    use std::f64::consts::SQRT_2;

    const H: f64 = FRAC_1_SQRT_2;

    #[test]
    fn example1_maximally_entangled() {
        let r = example1(H, H, H, H, H, H, H, H, 1.0, 1.0).unwrap();
        assert!((r.value("mixture").unwrap() - 2.0 * SQRT_2).abs() < 1e-9);
        assert!(r.violated);
        assert!(r.all_checks_pass(), "{:#?}", r.checks);
        assert!(r.discrepancies.is_empty(), "{:#?}", r.discrepancies);
    }

    #[test]
    fn example1_half_mixture_cannot_violate() {
        let r = example1(H, H, 0.6, 0.8, H, H, 0.8, 0.6, 0.5, 0.5).unwrap();
        assert_eq!(r.prediction("alpha").unwrap(), 0.0);
        assert!(r.value("mixture_optimized").unwrap() <= 2.0 + 1e-9);
        assert!(!r.violated);
    }

    #[test]
    fn example1_product_branch() {
        let r = example1(1.0, 0.0, H, H, H, H, H, H, 1.0, 1.0).unwrap();
        assert!(r.value("mixture_optimized").unwrap() <= 2.0 + 1e-9);
        assert!(r.check_passed("component_formulas").unwrap());
    }

    #[test]
    fn example1_flags_printed_denominators() {
        let r = example1(0.6, 0.8, 0.8, 0.6, 0.28, 0.96, 0.6, 0.8, 0.3, 0.6).unwrap();
        assert!(r.check_passed("component_formulas").unwrap());
        assert!(r.check_passed("mixture_formula").unwrap());
        let names: Vec<&str> = r.discrepancies.iter().map(|d| d.name.as_str()).collect();
        assert!(names.contains(&"c21") && names.contains(&"c22") && names.contains(&"mixture"));
    }

    #[test]
    fn example1_rejects_unnormalized() {
        assert!(example1(0.5, 0.5, H, H, H, H, H, H, 1.0, 1.0).is_err());
        assert!(example1(H, H, H, H, H, H, H, H, 1.5, 1.0).is_err());
    }

    #[test]
    fn example2_cases() {
        let r = example2_werner(1.0, 1.0, H, H, H, H).unwrap();
        assert!((r.value("mixture").unwrap() - 2.0 * SQRT_2).abs() < 1e-9);
        let r = example2_werner(0.0, 0.7, 0.8, 0.6, 0.6, 0.8).unwrap();
        for c in ["c11", "c12", "c21"] {
            assert!(r.value(c).unwrap().abs() < 1e-10);
        }
        assert!(r.all_checks_pass());
        let r = example2_werner(0.9, 0.95, 0.8, 0.6, 0.6, 0.8).unwrap();
        assert!(r.all_checks_pass(), "{:#?}", r.checks);
        assert!(example2_werner(1.2, 1.0, H, H, H, H).is_err());
    }

    #[test]
    fn werner_boundary_bisection() {
        let p = werner_violation_boundary(1.0, H, H, H, H, 1e-4).unwrap().unwrap();
        assert!((p - H).abs() < 1e-3);
        assert!(werner_violation_boundary(0.5, H, H, H, H, 1e-4).unwrap().is_none());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = example2_werner(0.8, 1.0, H, H, H, H).unwrap().to_json();
        let b = example2_werner(0.8, 1.0, H, H, H, H).unwrap().to_json();
        assert_eq!(a, b);
        let csv = summary_csv(&[example2_werner(0.8, 1.0, H, H, H, H).unwrap()]).unwrap();
        assert!(csv.starts_with("scenario,section,name,value,oracle,detail\n"));
        assert!(csv.contains("example2,verdict,violated,1"));
    }

    #[test]
    fn theorem_demos() {
        let r = theorem1_demo().unwrap();
        assert!((r.value("quantum_payoff").unwrap() - 16.0 * SQRT_2).abs() < 1e-9);
        assert_eq!(r.prediction("composed_bound"), Some(16.0));
        assert_eq!(r.value("lhv_optimum"), Some(16.0));
        assert!(r.violated && r.all_checks_pass());

        let r = lemma1_demo(2).unwrap();
        assert_eq!(r.prediction("composed_bound"), Some(16.0));
        assert!(r.violated && r.all_checks_pass());

        let r = theorem3_demo().unwrap();
        assert!((r.value("classical_subnetwork_value").unwrap() - 2.0).abs() < 1e-12);
        assert!(r.violated && r.all_checks_pass(), "{:#?}", r.checks);
        assert!(lemma1_demo(5).is_err());
    }

    #[test]
    fn ten_party_layout_reduces_to_chain_and_stars() {
        let t = ten_party_layout(0.8, 0.6).unwrap();
        let red = reduce_network(&t, &ten_party_targets()).unwrap();
        assert_eq!(red.relays, vec![6, 8]);
        let measured: Vec<usize> = red.plan.iter().map(|m| m.party).sorted().collect();
        assert_eq!(measured, vec![5, 7, 9]);
        for s in red.reduced.sources() {
            assert_eq!(s.assignment().len(), 2);
            assert!(is_entangled_ppt(s.state()).unwrap());
        }
        assert_eq!(
            red.subnetworks,
            vec![
                Subnetwork::Chain { parties: vec![6, 1, 8] },
                Subnetwork::Star { hub: 6, leaves: vec![0, 1, 2] },
                Subnetwork::Star { hub: 8, leaves: vec![1, 3, 4] },
            ]
        );
    }
}
