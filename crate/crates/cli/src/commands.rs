use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;
use serde_json::{json, Value};

use netlocal::games::{chsh_game, compose_hybrid, compose_lambda, compose_star, lhv_optimum, GameJson, LinearGame};
use netlocal::quantum::{ghz_state, min_partial_transpose_eigenvalue, ppt_verdict, schmidt_pure_state, werner_state};
use netlocal::scenarios::{
    example1, example1_sweep, example2_werner, ten_party_layout, ten_party_targets, lemma1_demo_with, summary_csv,
    theorem1_demo_with, theorem3_demo_with, werner_violation_boundary, ScenarioReport,
};
use netlocal::swap::{
    chsh_functional, find_entangled_qubit_projection, ghz_chsh_report, project_to_qubit_subspace, reduce_network,
    star_swap_all, ProjectionBranch,
};
use netlocal::{GhzState, Limits, NetworkTopology, PureState, Sign, Source};

use crate::args::{Command, ComposeKind, StateKind};

const CLASSICAL_BOUND: f64 = 2.0;
const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A command result in both output formats, plus its verdict when it has one.
pub struct Output {
    pub json: Value,
    pub csv: String,
    pub violated: Option<bool>,
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// Two-column `name,value` table over the scalar fields of a JSON object.
fn key_values(v: &Value) -> anyhow::Result<String> {
    let rows = v.as_object().into_iter().flatten().filter_map(|(k, v)| match v {
        Value::Number(n) => Some(vec![k.clone(), n.to_string()]),
        Value::Bool(b) => Some(vec![k.clone(), u8::from(*b).to_string()]),
        Value::String(s) => Some(vec![k.clone(), s.clone()]),
        _ => None,
    });
    csv_table(&["name", "value"], rows)
}

fn report(r: ScenarioReport) -> anyhow::Result<Output> {
    Ok(Output { csv: summary_csv(std::slice::from_ref(&r))?, violated: Some(r.violated), json: serde_json::to_value(&r)? })
}

fn reports(rs: Vec<ScenarioReport>) -> anyhow::Result<Output> {
    Ok(Output {
        csv: summary_csv(&rs)?,
        violated: Some(rs.iter().any(|r| r.violated)),
        json: serde_json::to_value(&rs)?,
    })
}

fn chsh(state: StateKind, p: f64, n: usize, u: f64, v: f64) -> anyhow::Result<Output> {
    let (label, rho) = match state {
        StateKind::Ghz => {
            let r = ghz_chsh_report(&GhzState::new(n, u, v, vec![0; n], Sign::Plus)?)?;
            let mut json = serde_json::to_value(&r)?;
            let violated = r.grid_value > CLASSICAL_BOUND + netlocal::tolerance::VIOLATION;
            json["classical_bound"] = json!(CLASSICAL_BOUND);
            json["violated"] = json!(violated);
            return Ok(Output { csv: key_values(&json)?, json, violated: Some(violated) });
        }
        StateKind::Bell => ("bell", schmidt_pure_state(&[H, H], 2)?.density()),
        StateKind::Werner => ("werner", werner_state(p, (u, v))?),
    };
    let (theta, value) = chsh_functional(&rho)?.maximize();
    let violated = value > CLASSICAL_BOUND + netlocal::tolerance::VIOLATION;
    let json = json!({
        "state": label,
        "theta": theta,
        "value": value,
        "classical_bound": CLASSICAL_BOUND,
        "violated": violated,
    });
    Ok(Output { csv: key_values(&json)?, json, violated: Some(violated) })
}

fn swap(pairs: &[(f64, f64)]) -> anyhow::Result<Output> {
    let pairs: Vec<(f64, f64)> = if pairs.is_empty() { vec![(H, H); 2] } else { pairs.to_vec() };
    let states = pairs.iter().map(|&(u, v)| schmidt_pure_state(&[u, v], 2)).collect::<netlocal::Result<Vec<PureState>>>()?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut violated = false;
    for out in star_swap_all(&states)? {
        let chsh = match &out.state {
            Some(g) => Some(ghz_chsh_report(g)?.grid_value),
            None => None,
        };
        violated |= chsh.is_some_and(|c| c > CLASSICAL_BOUND + netlocal::tolerance::VIOLATION);
        let (u, v) = out.state.as_ref().map_or((0.0, 0.0), |g| (g.u, g.v));
        rows.push(vec![
            out.label.to_string(),
            out.probability.to_string(),
            u.to_string(),
            v.to_string(),
            chsh.map_or(String::new(), |c| c.to_string()),
        ]);
        entries.push(json!({
            "outcome": out.label.to_string(),
            "probability": out.probability,
            "u": u,
            "v": v,
            "chsh_optimized": chsh,
        }));
    }
    Ok(Output {
        csv: csv_table(&["outcome", "probability", "u", "v", "chsh_optimized"], rows)?,
        json: json!({ "pairs": pairs, "outcomes": entries, "classical_bound": CLASSICAL_BOUND, "violated": violated }),
        violated: Some(violated),
    })
}

fn level_pair(levels: &[usize], name: &str) -> anyhow::Result<(usize, usize)> {
    match levels {
        [a, b] => Ok((*a, *b)),
        _ => bail!("--{name} needs exactly two levels, got {levels:?}"),
    }
}

fn branch_json(b: &ProjectionBranch) -> anyhow::Result<(Value, Vec<String>)> {
    let (verdict, min_eig) = match &b.state {
        Some(s) if s.dims().as_slice() == [2, 2] => {
            (Some(ppt_verdict(s)?), Some(min_partial_transpose_eigenvalue(s)?))
        }
        _ => (None, None),
    };
    let outcome = format!("{}{}", b.outcome.0, b.outcome.1);
    let row = vec![
        outcome.clone(),
        b.probability.to_string(),
        verdict.map_or(String::new(), |v| serde_json::to_value(v).unwrap().as_str().unwrap_or_default().to_string()),
        min_eig.map_or(String::new(), |e| e.to_string()),
    ];
    let json = json!({
        "outcome": outcome,
        "probability": b.probability,
        "verdict": verdict,
        "min_partial_transpose_eigenvalue": min_eig,
    });
    Ok((json, row))
}

fn project(schmidt: &[f64], i: Option<&[usize]>, j: Option<&[usize]>, limits: &Limits) -> anyhow::Result<Output> {
    let d = schmidt.len();
    let rho = schmidt_pure_state(schmidt, d)?.density();
    let header = ["outcome", "probability", "verdict", "min_partial_transpose_eigenvalue"];
    match (i, j) {
        (Some(i), Some(j)) => {
            let (i, j) = (level_pair(i, "i")?, level_pair(j, "j")?);
            let mut entries = Vec::new();
            let mut rows = Vec::new();
            for b in project_to_qubit_subspace(&rho, i, j)? {
                let (e, r) = branch_json(&b)?;
                entries.push(e);
                rows.push(r);
            }
            Ok(Output {
                csv: csv_table(&header, rows)?,
                json: json!({ "schmidt": schmidt, "i": [i.0, i.1], "j": [j.0, j.1], "branches": entries }),
                violated: None,
            })
        }
        (None, None) => {
            let hit = find_entangled_qubit_projection(&rho, limits.projection_dim_cap)?;
            let json = match &hit {
                Some(h) => {
                    let (branch, _) = branch_json(&h.branch)?;
                    json!({ "schmidt": schmidt, "found": true, "i": [h.i.0, h.i.1], "j": [h.j.0, h.j.1], "branch": branch })
                }
                None => json!({ "schmidt": schmidt, "found": false }),
            };
            let rows = hit
                .iter()
                .map(|h| branch_json(&h.branch).map(|(_, r)| r))
                .collect::<anyhow::Result<Vec<_>>>()?;
            Ok(Output { csv: csv_table(&header, rows)?, json, violated: None })
        }
        _ => bail!("give both --i and --j, or neither to search every pair of levels"),
    }
}

fn load_game(path: &Path) -> anyhow::Result<LinearGame> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read game {}", path.display()))?;
    let j: GameJson = serde_json::from_str(&text).with_context(|| format!("malformed game {}", path.display()))?;
    Ok(LinearGame::from_json(&j)?)
}

fn named_game(name: &str) -> anyhow::Result<LinearGame> {
    if let Some(n) = name.strip_prefix("chsh") {
        let n = if n.is_empty() { 2 } else { n.parse().with_context(|| format!("unknown game `{name}`"))? };
        return Ok(chsh_game(n)?);
    }
    load_game(Path::new(name))
}

fn game_output(g: &LinearGame, extra: Value) -> anyhow::Result<Output> {
    let mut json = json!({ "game": g.to_json() });
    if let (Value::Object(dst), Value::Object(src)) = (&mut json, extra) {
        dst.extend(src);
    }
    let nx = g.n_outcome_tuples();
    let rows = g.coeffs().iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(k, c)| {
        vec![(k / nx).to_string(), (k % nx).to_string(), c.to_string()]
    });
    Ok(Output { csv: csv_table(&["setting_tuple", "outcome_tuple", "coefficient"], rows)?, json, violated: None })
}

fn compose(
    kind: ComposeKind,
    paths: &[std::path::PathBuf],
    leaves: usize,
    classical_value: Option<f64>,
    enumerate: bool,
    limits: &Limits,
) -> anyhow::Result<Output> {
    let mut games = paths.iter().map(|p| load_game(p)).collect::<anyhow::Result<Vec<_>>>()?;
    let g = match kind {
        ComposeKind::Lambda => {
            if games.is_empty() {
                games = vec![chsh_game(2)?; 2];
            }
            let [g1, g2] = games.as_slice() else { bail!("Λ composition takes two games, got {}", games.len()) };
            compose_lambda(g1, g2)?
        }
        ComposeKind::Star => {
            if games.is_empty() {
                games = vec![chsh_game(2)?; leaves];
            }
            compose_star(&games)?
        }
        ComposeKind::Hybrid => {
            if games.is_empty() {
                games = vec![chsh_game(2)?; 2];
            }
            let Some((classical, quantum)) = games.split_last() else { unreachable!() };
            compose_hybrid(quantum, classical, classical_value.unwrap_or(classical.classical_bound()))?
        }
    };
    let extra = if enumerate {
        let opt = lhv_optimum(&g, limits.strategy_cap)?;
        json!({ "enumerated_bound": opt.value, "enumerated_strategies": opt.enumerated.to_string() })
    } else {
        json!({})
    };
    game_output(&g, extra)
}

fn lhv_bound(name: &str, limits: &Limits) -> anyhow::Result<Output> {
    let g = named_game(name)?;
    let opt = lhv_optimum(&g, limits.strategy_cap)?;
    let json = json!({
        "game": name,
        "value": opt.value,
        "strategy_count": g.strategy_count().to_string(),
        "enumerated": opt.enumerated.to_string(),
        "strategy": opt.strategy.responses,
    });
    Ok(Output { csv: key_values(&json)?, json, violated: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutSource {
    parties: Vec<usize>,
    u: f64,
    v: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Layout {
    n_parties: usize,
    sources: Vec<LayoutSource>,
}

fn load_layout(path: &Path) -> anyhow::Result<NetworkTopology> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read layout {}", path.display()))?;
    let l: Layout = serde_json::from_str(&text).with_context(|| format!("malformed layout {}", path.display()))?;
    let sources = l
        .sources
        .iter()
        .map(|s| {
            let n = s.parties.len();
            Source::pure(&ghz_state(n, s.u, s.v, &vec![0; n], Sign::Plus)?, s.parties.clone())
        })
        .collect::<netlocal::Result<Vec<_>>>()?;
    Ok(NetworkTopology::new(l.n_parties, sources)?)
}

fn reduce(layout: &str, targets: Option<&[usize]>, u: f64, v: f64) -> anyhow::Result<Output> {
    let (t, default_targets) = if layout == "ten-party" {
        (ten_party_layout(u, v)?, Some(ten_party_targets()))
    } else {
        (load_layout(Path::new(layout))?, None)
    };
    let targets = match (targets, default_targets) {
        (Some(t), _) => t.to_vec(),
        (None, Some(d)) => d,
        (None, None) => bail!("--targets is required for a layout file"),
    };
    let r = reduce_network(&t, &targets)?;
    let sources = r
        .reduced
        .sources()
        .iter()
        .zip(&r.origins)
        .zip(&r.probabilities)
        .map(|((s, origin), p)| {
            Ok(json!({
                "origin": origin,
                "parties": s.assignment(),
                "probability": p,
                "verdict": ppt_verdict(s.state())?,
            }))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let rows = r.plan.iter().map(|m| {
        vec![
            m.party.to_string(),
            m.source.to_string(),
            m.subsystem.to_string(),
            "x".into(),
            m.outcome.symbol().to_string(),
        ]
    });
    Ok(Output {
        csv: csv_table(&["party", "source", "subsystem", "basis", "outcome"], rows)?,
        json: json!({
            "targets": targets,
            "kept": r.kept,
            "relays": r.relays,
            "plan": r.plan,
            "sources": sources,
            "subnetworks": r.subnetworks,
        }),
        violated: None,
    })
}

pub fn run(command: &Command, limits: &Limits) -> anyhow::Result<Output> {
    match command {
        Command::Chsh { state, p, n, u, v } => chsh(*state, *p, *n, *u, *v),
        Command::Swap { pairs } => swap(pairs),
        Command::Project { schmidt, i, j } => project(schmidt, i.as_deref(), j.as_deref(), limits),
        Command::Example1 { a1, b1, a2, b2, c1, d1, c2, d2, p1, q1, sweep } => match sweep {
            Some(steps) => reports(example1_sweep(*a1, *b1, *a2, *b2, *c1, *d1, *c2, *d2, *steps)?),
            None => report(example1(*a1, *b1, *a2, *b2, *c1, *d1, *c2, *d2, *p1, *q1)?),
        },
        Command::Example2 { p, q, a1, b1, a2, b2, beta1, sweep, boundary } => {
            let (a1, b1, a2, b2) = if *beta1 { (H, H, H, H) } else { (*a1, *b1, *a2, *b2) };
            if *boundary {
                let tol = 1e-6;
                let b = werner_violation_boundary(*q, a1, b1, a2, b2, tol)?;
                let json = json!({ "q": q, "boundary": b, "tolerance": tol });
                return Ok(Output { csv: key_values(&json)?, json, violated: Some(b.is_some()) });
            }
            match sweep {
                Some(steps) if *steps >= 2 => reports(
                    (0..*steps)
                        .map(|k| example2_werner(k as f64 / (*steps - 1) as f64, *q, a1, b1, a2, b2))
                        .collect::<netlocal::Result<Vec<_>>>()?,
                ),
                Some(_) => bail!("a sweep needs at least 2 steps"),
                None => report(example2_werner(*p, *q, a1, b1, a2, b2)?),
            }
        }
        Command::Compose { kind, games, leaves, classical_value, enumerate } => {
            compose(*kind, games, *leaves, *classical_value, *enumerate, limits)
        }
        Command::LhvBound { game } => lhv_bound(game, limits),
        Command::Reduce { layout, targets, u, v } => reduce(layout, targets.as_deref(), *u, *v),
        Command::Theorem1 => report(theorem1_demo_with(limits)?),
        Command::Lemma1 { n } => report(lemma1_demo_with(*n, limits)?),
        Command::Theorem3 => report(theorem3_demo_with(limits)?),
    }
}
