//! Shipped bundles of checks. Each entry compares an observed value with the
//! expected one; a suite passes when every entry does.

use cylinder_core::algebra::{check_ca_axioms_with, check_ra_atomstructure, random_ca_structure, AxiomVariant, Flavor};
use cylinder_core::constructions::{
    basic_matrices, bin, blur_check, compute_psi, eta_pea, monk_ra, monochromatic_forbidden_ra, rainbow_ra,
    BlurInstance, PebbleStructure,
};
use cylinder_core::games::{
    basis_fixpoint, cylindric_basis_check, replay, solve_ca_game, solve_ef, solve_ra_game, CaGame, EfGame, EfMode,
    GameOutcome, Player, RaGame,
};
use cylinder_core::graphs::{graph_gen, Graph};
use cylinder_core::networks::matrix_hypernetworks;
use cylinder_core::relativizer::{build_prenetwork_rep, build_square_rep, validate_rep, validate_square, RepOutcome, Schedule, Signature};
use cylinder_core::{Budget, CheckReport, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::inputs::{graph_kind, pebble};
use crate::manifest::Preset;
use crate::run::{axiom_options, to_value, Ctx, Outcome};

/// Structures the corpus must decide, and the most it will draw.
pub const CORPUS_SIZE: usize = 50;
pub const CORPUS_ATTEMPTS: usize = 100;
pub const CORPUS_NOISE: f64 = 0.6;
/// Default per-instance cap for the corpus unless the run overrides it.
pub const CORPUS_STATES: usize = 200_000;

#[derive(Debug, Serialize)]
struct Entry {
    name: String,
    passed: bool,
    expected: Value,
    observed: Value,
    #[serde(skip_serializing_if = "Value::is_null")]
    details: Value,
}

#[derive(Default)]
struct Suite {
    entries: Vec<Entry>,
    extra: serde_json::Map<String, Value>,
}

impl Suite {
    fn push(&mut self, name: impl Into<String>, passed: bool, expected: Value, observed: Value, details: Value) {
        self.entries.push(Entry {
            name: name.into(),
            passed,
            expected,
            observed,
            details,
        });
    }

    fn check(&mut self, name: impl Into<String>, want_pass: bool, report: &CheckReport, details: Value) {
        let mut details = details;
        if let Value::Object(map) = &mut details {
            map.insert("stats".into(), to_value(&report.stats));
            if let Some(cx) = report.first_failure() {
                map.insert("firstFailure".into(), to_value(cx));
            }
        }
        self.push(name, report.passed == want_pass, json!(want_pass), json!(report.passed), details);
    }

    fn finish(self, preset: Preset) -> Outcome {
        let failed = self.entries.iter().filter(|e| !e.passed).count();
        let mut result = json!({
            "preset": to_value(&preset),
            "entries": to_value(&self.entries),
            "failedEntries": failed,
        });
        if let Value::Object(map) = &mut result {
            map.extend(self.extra);
        }
        Outcome {
            passed: failed == 0,
            result,
        }
    }
}

pub fn run(preset: Preset, ctx: &Ctx) -> Result<Outcome> {
    let mut suite = Suite::default();
    match preset {
        Preset::PaperMonk => monk(&mut suite, ctx)?,
        Preset::PaperPsi => psi(&mut suite)?,
        Preset::PaperBasis => cylindric(&mut suite, ctx)?,
        Preset::PaperEf => ef(&mut suite, ctx)?,
        Preset::PaperCorpus => corpus(&mut suite, ctx)?,
        Preset::PaperRaGame => ra_game(&mut suite, ctx)?,
        Preset::PaperBlur => blur(&mut suite)?,
        Preset::PaperRep => rep(&mut suite, ctx)?,
    }
    Ok(suite.finish(preset))
}

fn graph(spec: &str, ctx: &Ctx) -> Result<Graph> {
    graph_gen(graph_kind(spec, ctx.seed)?)
}

const MONK_GRAPHS: [(&str, &str); 4] = [("K2", "complete:2"), ("K3", "complete:3"), ("C5", "cycle:5"), ("3K3", "cliques:3x3")];

fn monk(suite: &mut Suite, ctx: &Ctx) -> Result<()> {
    for (name, spec) in MONK_GRAPHS {
        let s = monk_ra(&graph(spec, ctx)?, 3)?;
        suite.check(format!("monk {name}"), true, &check_ra_atomstructure(&s), json!({ "atoms": s.len() }));
    }
    for cap in [1, 2, 4] {
        let s = bin(3, 1, Some(cap), &ctx.budget)?;
        suite.check(format!("bin(3,1,{cap})"), true, &check_ra_atomstructure(&s), json!({ "atoms": s.len() }));
    }
    let s = rainbow_ra(3, 2)?;
    suite.check("rainbow(3,2)", true, &check_ra_atomstructure(&s), json!({ "atoms": s.len() }));
    let s = eta_pea(&graph("complete:2", ctx)?, 3)?;
    let report = check_ca_axioms_with(&s, AxiomVariant::Pea, &axiom_options(ctx))?;
    suite.check("eta K2 PEA_3", true, &report, json!({ "atoms": s.len() }));
    Ok(())
}

fn psi(suite: &mut Suite) -> Result<()> {
    for (n, r, want) in [(3u64, 1u64, "4"), (4, 1, "14")] {
        let got = compute_psi(n, r)?.to_string();
        suite.push(format!("psi({n},{r})"), got == want, json!(want), json!(got), Value::Null);
    }
    Ok(())
}

fn cylindric(suite: &mut Suite, ctx: &Ctx) -> Result<()> {
    let monk = monk_ra(&graph("cliques:3x3", ctx)?, 3)?;
    let report = cylindric_basis_check(&monk, 3, &ctx.budget)?;
    suite.check("Mat_3 monk 3K3 is a basis", true, &report, json!({}));
    let rainbow = rainbow_ra(3, 2)?;
    let report = cylindric_basis_check(&rainbow, 3, &ctx.budget)?;
    suite.check("Mat_3 rainbow(3,2) is not a basis", false, &report, json!({}));
    Ok(())
}

/// One solved bounded game, kept for the monotonicity and replay entries.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
struct Solved {
    instance: String,
    pebbles: usize,
    rounds: usize,
    winner: Player,
    states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    replayed: Option<bool>,
}

fn winner_name(p: Player) -> &'static str {
    match p {
        Player::Exists => "Exists",
        Player::Forall => "Forall",
    }
}

/// `Exists` at `r + 1` must imply `Exists` at `r` within each (instance, pebbles) series.
fn round_monotone(rows: &[Solved]) -> Vec<String> {
    let mut bad = Vec::new();
    for a in rows {
        for b in rows {
            if a.instance == b.instance
                && a.pebbles == b.pebbles
                && b.rounds == a.rounds + 1
                && b.winner == Player::Exists
                && a.winner == Player::Forall
            {
                bad.push(format!("{} p={} r={}", a.instance, a.pebbles, a.rounds));
            }
        }
    }
    bad
}

fn game_invariants(suite: &mut Suite, rows: &[Solved], with_strategy: bool) {
    let bad = round_monotone(rows);
    suite.push("round monotonicity", bad.is_empty(), json!([]), json!(bad), json!({ "instances": rows.len() }));
    if with_strategy {
        let failed: Vec<String> = rows
            .iter()
            .filter(|s| s.replayed != Some(true))
            .map(|s| format!("{} p={} r={}", s.instance, s.pebbles, s.rounds))
            .collect();
        suite.push("strategy replay", failed.is_empty(), json!([]), json!(failed), json!({ "instances": rows.len() }));
    }
}

fn record(instance: &str, pebbles: usize, rounds: usize, out: &GameOutcome, replayed: Option<bool>) -> Solved {
    Solved {
        instance: instance.into(),
        pebbles,
        rounds,
        winner: out.winner,
        states: out.states_explored,
        replayed,
    }
}

fn ef(suite: &mut Suite, ctx: &Ctx) -> Result<()> {
    let with_strategy = !ctx.switches.no_strategy;
    let pairs: [(&str, PebbleStructure, PebbleStructure, &[usize], usize); 2] = [
        ("M[1,L4] vs M[1,L3]", pebble("mpi:1,4")?, pebble("mpi:1,3")?, &[2, 3], 6),
        ("L4 vs L3", pebble("linear:4")?, pebble("linear:3")?, &[2], 3),
    ];
    let mut rows = Vec::new();
    for (name, a, b, pebbles, max_rounds) in &pairs {
        for &p in *pebbles {
            let game = EfGame::new(a, b, p, EfMode::Forth)?;
            for r in 0..=*max_rounds {
                let out = solve_ef(a, b, p, r, EfMode::Forth, with_strategy, &ctx.budget)?;
                let replayed = if with_strategy { Some(replay(&game, &out, &ctx.budget)?) } else { None };
                rows.push(record(name, p, r, &out, replayed));
            }
        }
    }
    let series = |name: &str, p: usize| -> Vec<&'static str> {
        rows.iter()
            .filter(|s| s.instance == name && s.pebbles == p)
            .map(|s| winner_name(s.winner))
            .collect()
    };
    let two = series(pairs[0].0, 2);
    suite.push(
        "M[1,L4] vs M[1,L3], 2 pairs, rounds 0..=6",
        two.iter().all(|&w| w == "Exists"),
        json!("Exists at every round bound"),
        json!(two),
        Value::Null,
    );
    let three = series(pairs[0].0, 3);
    let first_forall = three.iter().position(|&w| w == "Forall");
    suite.push(
        "M[1,L4] vs M[1,L3], 3 pairs, within 6 rounds",
        first_forall.is_some(),
        json!("Forall at some round bound ≤ 6"),
        json!({ "winners": three, "firstForallRound": first_forall }),
        Value::Null,
    );
    let lin = series(pairs[1].0, 2);
    suite.push("L4 vs L3, 2 pairs, 2 rounds", lin[2] == "Exists", json!("Exists"), json!(lin[2]), Value::Null);
    suite.push("L4 vs L3, 2 pairs, 3 rounds", lin[3] == "Forall", json!("Forall"), json!(lin[3]), Value::Null);
    // Forall with p pairs must stay a Forall win with p + 1 pairs
    let bad: Vec<usize> = (0..=6)
        .filter(|&r| {
            let at = |p: usize| rows.iter().find(|s| s.instance == pairs[0].0 && s.pebbles == p && s.rounds == r);
            matches!((at(2), at(3)), (Some(x), Some(y)) if x.winner == Player::Forall && y.winner == Player::Exists)
        })
        .collect();
    suite.push("pebble monotonicity", bad.is_empty(), json!([]), json!(bad), Value::Null);
    game_invariants(suite, &rows, with_strategy);
    suite.extra.insert("table".into(), to_value(&rows));
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CorpusRow {
    index: usize,
    atoms: usize,
    n: usize,
    basis_members: usize,
    /// Winner per round bound `0..=8`, `E` or `F`.
    winners: String,
    agree: bool,
}

fn corpus(suite: &mut Suite, ctx: &Ctx) -> Result<()> {
    let with_strategy = !ctx.switches.no_strategy;
    let budget = Budget {
        states: ctx.overrides.states.unwrap_or(CORPUS_STATES),
        matrices: ctx.overrides.states.unwrap_or(CORPUS_STATES),
        ..ctx.budget
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (mut rows, mut games, mut skipped) = (Vec::new(), Vec::new(), Vec::new());
    let mut decided = 0;
    let mut max_atoms = 0;
    for index in 0..CORPUS_ATTEMPTS {
        if decided == CORPUS_SIZE {
            break;
        }
        let s = random_ca_structure(&mut rng, 3, CORPUS_NOISE)?;
        match corpus_instance(&s, index, with_strategy, &budget) {
            Ok((r, g)) => {
                decided += 1;
                max_atoms = max_atoms.max(s.len());
                rows.extend(r);
                games.extend(g);
            }
            Err(e) if e.is_budget() => skipped.push(index),
            Err(e) => return Err(e),
        }
    }
    suite.push(
        "decided structures",
        decided >= CORPUS_SIZE,
        json!(CORPUS_SIZE),
        json!(decided),
        json!({ "skippedOverBudget": skipped }),
    );
    suite.push("atoms per structure", max_atoms <= 6, json!("≤ 6"), json!(max_atoms), Value::Null);
    let disagree: Vec<String> = rows
        .iter()
        .filter(|r| !r.agree)
        .map(|r| format!("#{} n={}", r.index, r.n))
        .collect();
    suite.push(
        "basis nonempty iff Exists wins every r ≤ 8",
        disagree.is_empty(),
        json!([]),
        json!(disagree),
        json!({ "instances": rows.len() }),
    );
    let yes = rows.iter().filter(|r| r.basis_members > 0).count();
    suite.push(
        "corpus has both outcomes",
        yes > 0 && yes < rows.len(),
        json!("some bases empty and some not"),
        json!({ "nonempty": yes, "empty": rows.len() - yes }),
        Value::Null,
    );
    game_invariants(suite, &games, with_strategy);
    suite.extra.insert("corpus".into(), to_value(&rows));
    Ok(())
}

fn corpus_instance(
    s: &cylinder_core::algebra::CaAtomStructure,
    index: usize,
    with_strategy: bool,
    budget: &Budget,
) -> Result<(Vec<CorpusRow>, Vec<Solved>)> {
    let (mut rows, mut games) = (Vec::new(), Vec::new());
    let name = format!("corpus #{index}");
    for n in [3, 4] {
        let (h, _) = basis_fixpoint(s, n, budget)?;
        let game = CaGame::new(s, n, true, budget)?;
        let mut winners = String::new();
        for r in 0..=8 {
            let out = solve_ca_game(s, n, r, true, with_strategy, budget)?;
            let replayed = if with_strategy { Some(replay(&game, &out, budget)?) } else { None };
            winners.push(if out.winner == Player::Exists { 'E' } else { 'F' });
            games.push(record(&name, n, r, &out, replayed));
        }
        let members = h.as_ref().map_or(0, Vec::len);
        rows.push(CorpusRow {
            index,
            atoms: s.len(),
            n,
            basis_members: members,
            agree: (members > 0) == !winners.contains('F'),
            winners,
        });
    }
    Ok((rows, games))
}

fn ra_game(suite: &mut Suite, ctx: &Ctx) -> Result<()> {
    let with_strategy = !ctx.switches.no_strategy;
    let mut rows = Vec::new();
    let mut series = |name: &str, s: &cylinder_core::algebra::RaAtomStructure, cap: usize, rounds: usize| {
        let game = RaGame::new(s, cap)?;
        let mut last = None;
        for r in 0..=rounds {
            let out = solve_ra_game(s, cap, r, with_strategy, &ctx.budget)?;
            let replayed = if with_strategy { Some(replay(&game, &out, &ctx.budget)?) } else { None };
            rows.push(record(name, cap, r, &out, replayed));
            last = Some(out.winner);
        }
        Ok::<_, cylinder_core::Error>(last.expect("at least one round bound"))
    };
    let w = series("rainbow(3,2)", &rainbow_ra(3, 2)?, 5, 6)?;
    let mut entries = vec![("rainbow(3,2), cap 5, 6 rounds".to_string(), w, Player::Forall)];
    for cap in [1, 2] {
        let s = bin(3, 4, Some(cap), &ctx.budget)?;
        let w = series(&format!("bin(3,4,{cap})"), &s, 3, 2)?;
        entries.push((format!("bin(3,4,{cap}), cap 3, 2 rounds"), w, Player::Exists));
    }
    for (name, got, want) in entries {
        suite.push(name, got == want, json!(winner_name(want)), json!(winner_name(got)), Value::Null);
    }
    game_invariants(suite, &rows, with_strategy);
    suite.extra.insert("table".into(), to_value(&rows));
    Ok(())
}

fn blur(suite: &mut Suite) -> Result<()> {
    let s = monochromatic_forbidden_ra(20)?;
    let pass = blur_check(&BlurInstance::all_subsets(s.clone(), 5, 3))?;
    suite.check("l = 5, m = 3, J = all 5-subsets of 20", true, &pass, json!({}));
    let fail = blur_check(&BlurInstance::all_subsets(s, 1, 3))?;
    let axioms: Vec<&str> = fail.counterexamples.iter().map(|c| c.axiom.as_str()).collect();
    let safety = axioms.iter().any(|a| a.ends_with("safety"));
    suite.push(
        "l = 1 fails with a safety witness",
        !fail.passed && safety,
        json!("fails on 4-safety"),
        json!({ "passed": fail.passed, "failingConditions": axioms.iter().collect::<std::collections::BTreeSet<_>>() }),
        json!({ "stats": to_value(&fail.stats) }),
    );
    Ok(())
}

fn rep(suite: &mut Suite, ctx: &Ctx) -> Result<()> {
    let base = bin(3, 1, Some(1), &ctx.budget)?;
    let s = basic_matrices(&base, 3, &ctx.budget)?.with_flavor(Flavor::Pta);
    let (rep, report) = build_prenetwork_rep(&s, Signature::Pta, 30, &Schedule::Fair)?;
    let validation = validate_rep(&rep, &s)?;
    let completed = rep.outcome == RepOutcome::Completed;
    suite.push(
        "prenetwork game on Mat_3 bin(3,1,1), 30 fair rounds",
        completed && report.passed && validation.passed,
        json!("completed, passing"),
        json!({ "outcome": to_value(&rep.outcome), "report": report.passed, "validation": validation.passed }),
        json!({ "rounds": rep.log.len(), "nodes": rep.current().nodes, "report": to_value(&report.stats), "validation": to_value(&validation.stats) }),
    );
    let monk = monk_ra(&graph("cliques:3x3", ctx)?, 3)?;
    let (ca, hs) = matrix_hypernetworks(&monk, 3, &ctx.budget)?;
    let h: Vec<_> = hs.into_iter().map(|x| x.network).collect();
    let (g, report) = build_square_rep(&ca, &h, 60)?;
    let validation = validate_square(&g, &ca, &h)?;
    let repairs = report.stats.get("repairs").copied().unwrap_or(0);
    suite.push(
        "square builder on the Mat_3 monk 3K3 basis",
        repairs >= 50 && report.passed && validation.passed,
        json!("≥ 50 repaired defects, passing validator"),
        json!({ "repairs": repairs, "report": report.passed, "validation": validation.passed }),
        json!({ "report": to_value(&report.stats), "validation": to_value(&validation.stats), "firstFailure": validation.first_failure() }),
    );
    Ok(())
}
