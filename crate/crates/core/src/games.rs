//! Linear Bell games: payoffs, local bounds and composition.
//!
//! A game assigns a coefficient `γ(x|a)` to every outcome tuple `x` and
//! setting tuple `a`; its payoff on a distribution is `Σ γ(x|a) P(x|a)` with
//! uniform setting weights folded into the coefficients.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{tuple_digits, tuple_index, DeterministicStrategy, Distribution};
use crate::tolerance;

/// Where a game's classical bound came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundProvenance {
    Enumerated,
    Supplied,
    Composed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearGame {
    settings: Vec<usize>,
    outcomes: Vec<usize>,
    /// `coeffs[a * n_outcome_tuples + x]`, matching [`Distribution`].
    coeffs: Vec<f64>,
    classical_bound: f64,
    provenance: BoundProvenance,
}

impl LinearGame {
    pub fn new(
        settings: Vec<usize>,
        outcomes: Vec<usize>,
        coeffs: Vec<f64>,
        classical_bound: f64,
        provenance: BoundProvenance,
    ) -> Result<Self> {
        if settings.is_empty() || settings.len() != outcomes.len() {
            return Err(Error::ShapeMismatch("settings and outcomes must list the same parties".into()));
        }
        if settings.iter().chain(&outcomes).any(|&c| c == 0) {
            return Err(Error::ShapeMismatch("every party needs at least one setting and outcome".into()));
        }
        let n: usize = settings.iter().product::<usize>() * outcomes.iter().product::<usize>();
        if coeffs.len() != n {
            return Err(Error::ShapeMismatch(format!("{} coefficients for {n} (a, x) pairs", coeffs.len())));
        }
        if !classical_bound.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("coefficients and bound must be finite".into()));
        }
        Ok(Self { settings, outcomes, coeffs, classical_bound, provenance })
    }

    pub fn zeros(settings: Vec<usize>, outcomes: Vec<usize>) -> Result<Self> {
        let n = settings.iter().product::<usize>() * outcomes.iter().product::<usize>();
        Self::new(settings, outcomes, vec![0.0; n], 0.0, BoundProvenance::Supplied)
    }

    /// Builds the coefficient table from `(a, x, value)` triplets; repeated keys add.
    pub fn from_triplets(
        settings: Vec<usize>,
        outcomes: Vec<usize>,
        triplets: &[(Vec<usize>, Vec<usize>, f64)],
        classical_bound: f64,
        provenance: BoundProvenance,
    ) -> Result<Self> {
        let mut g = Self::zeros(settings, outcomes)?;
        for (a, x, v) in triplets {
            let idx = g.checked_index(x, a)?;
            g.coeffs[idx] += v;
        }
        Self::new(g.settings, g.outcomes, g.coeffs, classical_bound, provenance)
    }

    fn checked_index(&self, x: &[usize], a: &[usize]) -> Result<usize> {
        let n = self.settings.len();
        let in_range = x.len() == n
            && a.len() == n
            && x.iter().zip(&self.outcomes).all(|(v, k)| v < k)
            && a.iter().zip(&self.settings).all(|(v, m)| v < m);
        if !in_range {
            return Err(Error::ShapeMismatch(format!("key (a={a:?}, x={x:?}) outside the game")));
        }
        Ok(tuple_index(a, &self.settings) * self.n_outcome_tuples() + tuple_index(x, &self.outcomes))
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

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, x: &[usize], a: &[usize]) -> f64 {
        self.coeffs[tuple_index(a, &self.settings) * self.n_outcome_tuples() + tuple_index(x, &self.outcomes)]
    }

    pub fn classical_bound(&self) -> f64 {
        self.classical_bound
    }

    pub fn provenance(&self) -> BoundProvenance {
        self.provenance
    }

    pub fn n_setting_tuples(&self) -> usize {
        self.settings.iter().product()
    }

    pub fn n_outcome_tuples(&self) -> usize {
        self.outcomes.iter().product()
    }

    /// Product of all setting counts; the payoff of constant-1 coefficients.
    pub fn setting_volume(&self) -> f64 {
        self.n_setting_tuples() as f64
    }

    /// Total number of deterministic local strategies, `Π k_i^{m_i}`.
    pub fn strategy_count(&self) -> u128 {
        self.settings
            .iter()
            .zip(&self.outcomes)
            .map(|(&m, &k)| (k as u128).saturating_pow(m as u32))
            .fold(1u128, u128::saturating_mul)
    }

    pub fn with_bound(mut self, bound: f64, provenance: BoundProvenance) -> Self {
        self.classical_bound = bound;
        self.provenance = provenance;
        self
    }

    /// Multiplies coefficients and bound by `s`.
    pub fn scaled(&self, s: f64) -> LinearGame {
        LinearGame {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            classical_bound: self.classical_bound * s,
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> GameJson {
        let nx = self.n_outcome_tuples();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (tuple_digits(i / nx, &self.settings), tuple_digits(i % nx, &self.outcomes), c))
            .collect();
        GameJson {
            parties: self.parties(),
            settings: self.settings.clone(),
            outcomes: self.outcomes.clone(),
            coeffs,
            classical_bound: self.classical_bound,
            bound_provenance: self.provenance,
        }
    }

    pub fn from_json(j: &GameJson) -> Result<Self> {
        if j.parties != j.settings.len() {
            return Err(Error::ShapeMismatch(format!("{} parties but {} setting counts", j.parties, j.settings.len())));
        }
        Self::from_triplets(j.settings.clone(), j.outcomes.clone(), &j.coeffs, j.classical_bound, j.bound_provenance)
    }
}

/// Serialized form of a game; `coeffs` holds the nonzero `(a, x, value)` triplets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameJson {
    pub parties: usize,
    pub settings: Vec<usize>,
    pub outcomes: Vec<usize>,
    pub coeffs: Vec<(Vec<usize>, Vec<usize>, f64)>,
    pub classical_bound: f64,
    pub bound_provenance: BoundProvenance,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffReport {
    pub quantum_value: f64,
    pub classical_bound: f64,
    pub violated: bool,
    pub margin: f64,
}

impl PayoffReport {
    pub fn new(quantum_value: f64, classical_bound: f64) -> Self {
        Self {
            quantum_value,
            classical_bound,
            violated: quantum_value > classical_bound + tolerance::VIOLATION,
            margin: quantum_value - classical_bound,
        }
    }
}

/// `Σ_{a,x} γ(x|a) P(x|a)`.
pub fn payoff(g: &LinearGame, d: &Distribution) -> Result<f64> {
    if g.settings != d.settings() || g.outcomes != d.outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "game (settings {:?}, outcomes {:?}) vs distribution (settings {:?}, outcomes {:?})",
            g.settings,
            g.outcomes,
            d.settings(),
            d.outcomes()
        )));
    }
    Ok(g.coeffs.iter().zip(d.probs()).map(|(c, p)| c * p).sum())
}

pub fn evaluate(g: &LinearGame, d: &Distribution) -> Result<PayoffReport> {
    Ok(PayoffReport::new(payoff(g, d)?, g.classical_bound))
}

/// Optimal deterministic strategy and its payoff.
#[derive(Clone, Debug, PartialEq)]
pub struct LhvOptimum {
    pub value: f64,
    pub strategy: DeterministicStrategy,
    /// Response tables actually enumerated; the remaining party is optimized
    /// setting by setting.
    pub enumerated: u128,
}

/// Exact local bound: maximum payoff over deterministic strategies.
pub fn lhv_bound(g: &LinearGame, strategy_cap: u128) -> Result<f64> {
    Ok(lhv_optimum(g, strategy_cap)?.value)
}

/// Enumerates the response tables of every party but one. For fixed tables
/// of the others the payoff splits into independent terms per setting of the
/// remaining party, so its best response is a per-setting maximum. The party
/// with the most response tables is the one left out.
pub fn lhv_optimum(g: &LinearGame, strategy_cap: u128) -> Result<LhvOptimum> {
    let n = g.parties();
    let tables: Vec<u128> =
        g.settings.iter().zip(&g.outcomes).map(|(&m, &k)| (k as u128).saturating_pow(m as u32)).collect();
    let free = (0..n).max_by_key(|&i| (tables[i], std::cmp::Reverse(i))).unwrap_or(0);
    let enumerated = (0..n).filter(|&i| i != free).map(|i| tables[i]).fold(1u128, u128::saturating_mul);
    if enumerated > strategy_cap {
        return Err(Error::ResourceLimit { what: "deterministic strategies", count: enumerated, cap: strategy_cap });
    }

    let others: Vec<usize> = (0..n).filter(|&i| i != free).collect();
    let other_settings: Vec<usize> = others.iter().map(|&i| g.settings[i]).collect();
    let n_other_a: usize = other_settings.iter().product();
    let nx = g.n_outcome_tuples();
    let a_strides = strides(&g.settings);
    let x_strides = strides(&g.outcomes);

    // base offsets of every (a_others) tuple, without the free party's digit
    let other_a: Vec<Vec<usize>> = (0..n_other_a).map(|i| tuple_digits(i, &other_settings)).collect();
    let a_base: Vec<usize> = other_a
        .iter()
        .map(|digits| others.iter().zip(digits).map(|(&p, &d)| d * a_strides[p]).sum())
        .collect();

    let mut responses: Vec<Vec<usize>> = g.settings.iter().map(|&m| vec![0; m]).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_strategy = responses.clone();
    let mut scores = vec![0.0; g.outcomes[free]];
    loop {
        let mut total = 0.0;
        let mut free_table = vec![0; g.settings[free]];
        for (af, slot) in free_table.iter_mut().enumerate() {
            scores.iter_mut().for_each(|s| *s = 0.0);
            for (digits, &base) in other_a.iter().zip(&a_base) {
                let a_idx = base + af * a_strides[free];
                let x_base: usize = others.iter().zip(digits).map(|(&p, &d)| responses[p][d] * x_strides[p]).sum();
                let row = &g.coeffs[a_idx * nx..(a_idx + 1) * nx];
                for (xf, s) in scores.iter_mut().enumerate() {
                    *s += row[x_base + xf * x_strides[free]];
                }
            }
            let (arg, val) = scores
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
            *slot = arg;
            total += val;
        }
        if total > best {
            best = total;
            best_strategy = responses.clone();
            best_strategy[free] = free_table;
        }
        if !advance(&mut responses, &others, &g.outcomes) {
            break;
        }
    }
    Ok(LhvOptimum { value: best, strategy: DeterministicStrategy { responses: best_strategy }, enumerated })
}

fn strides(radix: &[usize]) -> Vec<usize> {
    let mut s = vec![1; radix.len()];
    for k in (0..radix.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * radix[k + 1];
    }
    s
}

/// Odometer over the response tables of `parties`; false once it wraps.
fn advance(responses: &mut [Vec<usize>], parties: &[usize], outcomes: &[usize]) -> bool {
    for &p in parties.iter().rev() {
        for slot in responses[p].iter_mut().rev() {
            *slot += 1;
            if *slot < outcomes[p] {
                return true;
            }
            *slot = 0;
        }
    }
    false
}

/// One party of a component game placed into a composed game.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub game: usize,
    pub party: usize,
}

/// Additive composition. `layout[r]` lists the component parties merged into
/// party `r` of the result; a merged party's settings and outcomes are tuples
/// over its slots, first slot most significant.
///
/// The coefficient of the result is the sum of the component coefficients,
/// and on product distributions the payoff is `Σ_g (M/M_g) ℘_g`, where `M` is
/// the number of setting tuples of the result and `M_g` that of component
/// `g`. The bound `Σ_g (M/M_g) c_g` follows since every deterministic
/// strategy of the result restricts, for fixed settings outside component
/// `g`, to a deterministic strategy of `g`.
pub fn compose(games: &[&LinearGame], layout: &[Vec<Slot>]) -> Result<LinearGame> {
    let mut seen: Vec<Vec<bool>> = games.iter().map(|g| vec![false; g.parties()]).collect();
    for slot in layout.iter().flatten() {
        let cell = seen
            .get_mut(slot.game)
            .and_then(|v| v.get_mut(slot.party))
            .ok_or_else(|| Error::ShapeMismatch(format!("slot {slot:?} does not exist")))?;
        if *cell {
            return Err(Error::ShapeMismatch(format!("slot {slot:?} used twice")));
        }
        *cell = true;
    }
    if layout.iter().any(Vec::is_empty) || seen.iter().flatten().any(|s| !s) {
        return Err(Error::ShapeMismatch("every component party must be placed exactly once".into()));
    }

    let slot_m = |s: &Slot| games[s.game].settings[s.party];
    let slot_k = |s: &Slot| games[s.game].outcomes[s.party];
    let settings: Vec<usize> = layout.iter().map(|r| r.iter().map(slot_m).product()).collect();
    let outcomes: Vec<usize> = layout.iter().map(|r| r.iter().map(slot_k).product()).collect();
    let na: usize = settings.iter().product();
    let nx: usize = outcomes.iter().product();
    let total_volume = na as f64;

    // for each result party, the mixed radix of its slots
    let slot_radix_m: Vec<Vec<usize>> = layout.iter().map(|r| r.iter().map(slot_m).collect()).collect();
    let slot_radix_k: Vec<Vec<usize>> = layout.iter().map(|r| r.iter().map(slot_k).collect()).collect();

    // component digit tuples per result tuple index
    let split = |idx: usize, radix: &[usize], per_slot: &[Vec<usize>]| -> Vec<Vec<usize>> {
        let digits = tuple_digits(idx, radix);
        let mut comp: Vec<Vec<usize>> = games.iter().map(|g| vec![0; g.parties()]).collect();
        for (r, d) in digits.iter().enumerate() {
            for (s, v) in layout[r].iter().zip(tuple_digits(*d, &per_slot[r])) {
                comp[s.game][s.party] = v;
            }
        }
        comp
    };
    let a_comp: Vec<Vec<usize>> = (0..na)
        .map(|a| {
            split(a, &settings, &slot_radix_m)
                .iter()
                .zip(games)
                .map(|(d, g)| tuple_index(d, &g.settings))
                .collect()
        })
        .collect();
    let x_comp: Vec<Vec<usize>> = (0..nx)
        .map(|x| {
            split(x, &outcomes, &slot_radix_k)
                .iter()
                .zip(games)
                .map(|(d, g)| tuple_index(d, &g.outcomes))
                .collect()
        })
        .collect();

    let mut coeffs = vec![0.0; na * nx];
    for a in 0..na {
        for x in 0..nx {
            coeffs[a * nx + x] = games
                .iter()
                .enumerate()
                .map(|(g, game)| game.coeffs[a_comp[a][g] * game.n_outcome_tuples() + x_comp[x][g]])
                .sum();
        }
    }
    let bound = games.iter().map(|g| total_volume / g.setting_volume() * g.classical_bound).sum();
    LinearGame::new(settings, outcomes, coeffs, bound, BoundProvenance::Composed)
}

fn require_bipartite(g: &LinearGame, what: &str) -> Result<()> {
    if g.parties() != 2 {
        return Err(Error::ShapeMismatch(format!("{what} needs bipartite components, got {} parties", g.parties())));
    }
    Ok(())
}

/// Λ network: `g1` on (A, B), `g2` on (B', C); B and B' merge into the middle party.
pub fn compose_lambda(g1: &LinearGame, g2: &LinearGame) -> Result<LinearGame> {
    require_bipartite(g1, "Λ composition")?;
    require_bipartite(g2, "Λ composition")?;
    let s = |game, party| Slot { game, party };
    compose(&[g1, g2], &[vec![s(0, 0)], vec![s(0, 1), s(1, 0)], vec![s(1, 1)]])
}

/// Star network: game `i` on (leaf i, hub); leaves come first and the hub,
/// holding every component's second party, is last.
pub fn compose_star(gs: &[LinearGame]) -> Result<LinearGame> {
    if gs.is_empty() {
        return Err(Error::InvalidParameter("star composition needs at least one game".into()));
    }
    for g in gs {
        require_bipartite(g, "star composition")?;
    }
    let mut layout: Vec<Vec<Slot>> = (0..gs.len()).map(|i| vec![Slot { game: i, party: 0 }]).collect();
    layout.push((0..gs.len()).map(|i| Slot { game: i, party: 1 }).collect());
    let refs: Vec<&LinearGame> = gs.iter().collect();
    compose(&refs, &layout)
}

/// Disjoint union of quantum subnetwork games and one classical subnetwork
/// game. The classical block contributes `classical_value` in place of its
/// own bound, so the result's bound is `Σ_g (M/M_g) c_g + (M/M_cl) ĉ`.
pub fn compose_hybrid(
    quantum_games: &[LinearGame],
    classical_game: &LinearGame,
    classical_value: f64,
) -> Result<LinearGame> {
    if quantum_games.is_empty() {
        return Err(Error::InvalidParameter("hybrid network without an entangled subnetwork is classical".into()));
    }
    let classical = classical_game.clone().with_bound(classical_value, BoundProvenance::Supplied);
    let mut refs: Vec<&LinearGame> = quantum_games.iter().collect();
    refs.push(&classical);
    let layout: Vec<Vec<Slot>> = refs
        .iter()
        .enumerate()
        .flat_map(|(game, g)| (0..g.parties()).map(move |party| vec![Slot { game, party }]))
        .collect();
    compose(&refs, &layout)
}

/// Largest enumeration used to certify a CHSH bound at construction.
const CHSH_CERTIFY_CAP: u128 = 1 << 16;

/// n-party CHSH game in correlator form:
/// `⟨0…00⟩ + ⟨0…01⟩ + ⟨1…10⟩ - ⟨1…11⟩ ≤ 2`.
///
/// Outcome 0 stands for +1, so the correlator of setting tuple `a` has
/// coefficient `(-1)^{Σx}` on `P(x|a)`. The bound is certified by enumeration
/// whenever that is cheap and supplied otherwise.
pub fn chsh_game(n: usize) -> Result<LinearGame> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("CHSH needs n >= 2, got {n}")));
    }
    let mut g = LinearGame::zeros(vec![2; n], vec![2; n])?;
    let nx = g.n_outcome_tuples();
    for (setting, sign) in chsh_terms(n) {
        let a = tuple_index_u8(&setting, &g.settings);
        for x in 0..nx {
            let parity = (x as u64).count_ones() % 2;
            g.coeffs[a * nx + x] = if parity == 0 { sign } else { -sign };
        }
    }
    let g = g.with_bound(2.0, BoundProvenance::Supplied);
    match lhv_optimum(&g, CHSH_CERTIFY_CAP) {
        Ok(opt) => Ok(g.with_bound(opt.value, BoundProvenance::Enumerated)),
        Err(Error::ResourceLimit { .. }) => Ok(g),
        Err(e) => Err(e),
    }
}

/// The four weighted setting tuples of the n-party CHSH game with their signs.
pub fn chsh_terms(n: usize) -> [(Vec<u8>, f64); 4] {
    let ones = |last: u8| -> Vec<u8> {
        let mut v = vec![1u8; n];
        v[n - 1] = last;
        v
    };
    let zeros = |last: u8| -> Vec<u8> {
        let mut v = vec![0u8; n];
        v[n - 1] = last;
        v
    };
    [(zeros(0), 1.0), (zeros(1), 1.0), (ones(0), 1.0), (ones(1), -1.0)]
}

fn tuple_index_u8(digits: &[u8], radix: &[usize]) -> usize {
    digits.iter().zip(radix).fold(0, |acc, (&d, &r)| acc * r + d as usize)
}
