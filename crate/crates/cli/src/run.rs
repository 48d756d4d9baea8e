//! Executes a manifest and renders its report.

use std::path::PathBuf;

use cylinder_core::algebra::{
    check_ca_axioms_with, check_ra_atomstructure, quotient_structure, random_ca_structure, AxiomOptions, AxiomVariant,
    CaAtomStructure, Flavor, QuotientKind,
};
use cylinder_core::constructions::{
    basic_matrices, bin, blur_check, eta_pea, flexible_ra, monk_ra, monochromatic_forbidden_ra, rainbow_ra,
    BlurInstance,
};
use cylinder_core::games::basis::describe_networks;
use cylinder_core::games::{basis_fixpoint, cylindric_basis_check, relational_basis_fixpoint, Arena, GameSpec, RuleSet};
use cylinder_core::graphs::{chromatic_number, girth};
use cylinder_core::networks::network::NetworkJson;
use cylinder_core::networks::{matrix_hypernetworks, validate_coloured_graph, validate_network, ColouredGraph, Network};
use cylinder_core::networks::coloured::ColouredGraphJson;
use cylinder_core::relativizer::{
    build_prenetwork_rep, build_square_rep, validate_rep, validate_square, ForallMove, RepOutcome, Schedule, Signature,
};
use cylinder_core::{Budget, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::inputs::{self, first_input, load_ca, load_ra, load_structure, read_json, typed, Structure};
use crate::manifest::*;
use crate::suite;

/// What a successful run produced; `passed = false` maps to exit status 1.
pub struct Outcome {
    pub passed: bool,
    pub result: Value,
}

impl Outcome {
    pub fn completed(result: Value) -> Self {
        Outcome { passed: true, result }
    }
}

pub struct Ctx<'m> {
    pub budget: Budget,
    pub seed: u64,
    pub overrides: BudgetOverrides,
    pub switches: Switches,
    pub inputs: &'m [PathBuf],
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report payloads serialize")
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Budget { .. } => EXIT_BUDGET,
        Error::Precondition(_) => EXIT_FAILED,
        _ => EXIT_USAGE,
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Report<'a> {
    manifest: &'a RunManifest,
    status: &'static str,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    result: Value,
}

/// Runs the manifest on the configured worker pool and returns the exit status
/// together with the report text.
pub fn run(m: &RunManifest) -> (i32, String) {
    let outcome = match m.jobs {
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| execute(m)),
            Err(e) => Err(Error::InvalidParameter(format!("worker pool: {e}"))),
        },
        None => execute(m),
    };
    let (code, status, error, result) = match outcome {
        Ok(o) if o.passed => (EXIT_OK, "passed", None, o.result),
        Ok(o) => (EXIT_FAILED, "failed", None, o.result),
        Err(e) => {
            let code = exit_code(&e);
            let status = match code {
                EXIT_BUDGET => "budget-exhausted",
                EXIT_FAILED => "precondition-failed",
                _ => "usage-error",
            };
            let result = match &e {
                Error::Budget { what, needed, limit } => {
                    json!({ "what": what, "needed": needed.to_string(), "limit": limit.to_string() })
                }
                _ => Value::Null,
            };
            (code, status, Some(e.to_string()), result)
        }
    };
    let report = Report {
        manifest: m,
        status,
        exit_code: code,
        error,
        result,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    (code, text)
}

pub fn execute(m: &RunManifest) -> Result<Outcome> {
    let ctx = Ctx {
        budget: m.budget.budget(),
        seed: m.seed,
        overrides: m.budget,
        switches: m.switches,
        inputs: &m.inputs,
    };
    match &m.command {
        Command::Construct(c) => construct(c, &ctx),
        Command::Check(a) => check(a, &ctx),
        Command::SolveGame(a) => solve_game(a, &ctx),
        Command::Basis(a) => basis(a, &ctx),
        Command::BlurCheck(a) => blur(a, &ctx),
        Command::RepBuild(a) => rep_build(a, &ctx),
        Command::Graph(a) => graph(a, &ctx),
        Command::Suite(a) => suite::run(a.preset, &ctx),
    }
}

fn construct(c: &Construct, ctx: &Ctx) -> Result<Outcome> {
    let structure = match c {
        Construct::Monk { graph, colours } => {
            to_value(&monk_ra(&inputs::graph(graph.as_deref(), ctx.inputs, ctx.seed)?, *colours)?.to_json())
        }
        Construct::Eta { graph, dimension } => {
            to_value(&eta_pea(&inputs::graph(graph.as_deref(), ctx.inputs, ctx.seed)?, *dimension)?.to_json())
        }
        Construct::Bin { n, r, cap } => to_value(&bin(*n, *r, *cap, &ctx.budget)?.to_json()),
        Construct::Rainbow { greens, reds } => to_value(&rainbow_ra(*greens, *reds)?.to_json()),
        Construct::Matrices { m } => {
            let ra = load_ra(&first_input(ctx.inputs, "matrices")?)?;
            to_value(&basic_matrices(&ra, *m, &ctx.budget)?.to_json())
        }
        Construct::Pebble { spec } => to_value(&inputs::pebble(spec)?),
        Construct::Quotient { dimension, kind } => {
            let kind = match kind {
                QuotientChoice::EqualityTypes => QuotientKind::EqualityTypes,
                QuotientChoice::Complement => QuotientKind::Complement,
            };
            to_value(&quotient_structure(*dimension, kind)?.to_json())
        }
        Construct::Random { dimension, noise } => {
            if !(0.0..=1.0).contains(noise) {
                return Err(Error::InvalidParameter(format!("noise {noise} outside [0, 1]")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
            to_value(&random_ca_structure(&mut rng, *dimension, *noise)?.to_json())
        }
        Construct::Flexible { k } => to_value(&flexible_ra(*k)?.to_json()),
        Construct::Monochromatic { k } => to_value(&monochromatic_forbidden_ra(*k)?.to_json()),
    };
    Ok(Outcome::completed(json!({ "provenance": to_value(c), "structure": structure })))
}

fn axiom_variant(s: &CaAtomStructure, choice: Option<VariantChoice>) -> Result<AxiomVariant> {
    Ok(match choice {
        Some(VariantChoice::Ca) => AxiomVariant::Ca,
        Some(VariantChoice::Pta) => AxiomVariant::Pta,
        Some(VariantChoice::Ta) => AxiomVariant::Ta,
        Some(VariantChoice::Pea) => AxiomVariant::Pea,
        None => match s.flavor() {
            Flavor::Ca => AxiomVariant::Ca,
            Flavor::Pta => AxiomVariant::Pta,
            Flavor::Ta => AxiomVariant::Ta,
            Flavor::Pea => AxiomVariant::Pea,
            Flavor::Df => {
                return Err(Error::InvalidParameter(
                    "diagonal-free structures have no axiom list; pass --variant".into(),
                ))
            }
        },
    })
}

pub fn axiom_options(ctx: &Ctx) -> AxiomOptions {
    AxiomOptions {
        full_powerset: ctx.switches.full_powerset,
        seed: ctx.seed,
        ..AxiomOptions::default()
    }
}

fn check(a: &CheckArgs, ctx: &Ctx) -> Result<Outcome> {
    let report = match a.target {
        CheckTarget::Structure => match load_structure(&first_input(ctx.inputs, "check")?)? {
            Structure::Ra(s) => check_ra_atomstructure(&s),
            Structure::Ca(s) => {
                let variant = axiom_variant(&s, a.variant)?;
                check_ca_axioms_with(&s, variant, &axiom_options(ctx))?
            }
        },
        CheckTarget::Network => {
            let s = load_ca(&first_input(ctx.inputs, "check")?)?;
            let path = ctx
                .inputs
                .get(1)
                .ok_or_else(|| Error::InvalidParameter("network checks need a structure and a network input".into()))?;
            let net: NetworkJson = typed(read_json(path)?, "network")?;
            validate_network(&Network::from_json(&net)?, &s)?
        }
        CheckTarget::Coloured => {
            let j: ColouredGraphJson = typed(read_json(&first_input(ctx.inputs, "check")?)?, "coloured graph")?;
            let (Some(greens), Some(reds)) = (&a.greens, &a.reds) else {
                return Err(Error::InvalidParameter("coloured graphs need --greens and --reds".into()));
            };
            let g = ColouredGraph::from_json(&j)?;
            validate_coloured_graph(&g, &inputs::pebble(greens)?, &inputs::pebble(reds)?, ctx.switches.allow_shade)
        }
    };
    Ok(Outcome {
        passed: report.passed,
        result: to_value(&report),
    })
}

fn solve_game(a: &SolveGameArgs, ctx: &Ctx) -> Result<Outcome> {
    let spec: GameSpec = typed(read_json(&first_input(ctx.inputs, "solve-game")?)?, "game spec")?;
    let arena_input = |k: usize| {
        ctx.inputs
            .get(k)
            .ok_or_else(|| Error::InvalidParameter(format!("solve-game needs arena input {k}")))
    };
    let with_strategy = !ctx.switches.no_strategy;
    let outcome = match spec.rule_set {
        RuleSet::Ef { .. } => {
            let a_s = match &a.a {
                Some(spec) => inputs::pebble(spec)?,
                None => inputs::load_pebble(arena_input(1)?)?,
            };
            let b_s = match &a.b {
                Some(spec) => inputs::pebble(spec)?,
                None => inputs::load_pebble(arena_input(if a.a.is_some() { 1 } else { 2 })?)?,
            };
            spec.solve(Arena::Structures(&a_s, &b_s), with_strategy, &ctx.budget)?
        }
        RuleSet::CaAtomic => {
            let s = load_ca(arena_input(1)?)?;
            spec.solve(Arena::Cylindric(&s), with_strategy, &ctx.budget)?
        }
        RuleSet::RaTriangle => {
            let s = load_ra(arena_input(1)?)?;
            spec.solve(Arena::Relational(&s), with_strategy, &ctx.budget)?
        }
    };
    Ok(Outcome::completed(json!({ "spec": to_value(&spec), "outcome": to_value(&outcome) })))
}

fn basis(a: &BasisArgs, ctx: &Ctx) -> Result<Outcome> {
    let path = first_input(ctx.inputs, "basis")?;
    match a.mode {
        BasisMode::Fixpoint => {
            let s = load_ca(&path)?;
            let (h, report) = basis_fixpoint(&s, a.n, &ctx.budget)?;
            Ok(Outcome::completed(json!({
                "nonempty": h.is_some(),
                "fixpoint": to_value(&report),
                "members": h.as_deref().map(describe_networks),
            })))
        }
        BasisMode::Relational => {
            let s = load_ra(&path)?;
            let (h, report) = relational_basis_fixpoint(&s, a.n, &ctx.budget)?;
            Ok(Outcome::completed(json!({
                "nonempty": h.is_some(),
                "fixpoint": to_value(&report),
                "members": h.map(|h| h.iter().map(|f| f.entries.clone()).collect::<Vec<_>>()),
            })))
        }
        BasisMode::Cylindric => {
            let s = load_ra(&path)?;
            let report = cylindric_basis_check(&s, a.n, &ctx.budget)?;
            Ok(Outcome {
                passed: report.passed,
                result: to_value(&report),
            })
        }
    }
}

fn blur(a: &BlurArgs, ctx: &Ctx) -> Result<Outcome> {
    let instance = match (a.k, a.l) {
        (Some(k), Some(l)) => {
            let s = if a.flexible { flexible_ra(k)? } else { monochromatic_forbidden_ra(k)? };
            BlurInstance::all_subsets(s, l, a.m)
        }
        (None, None) => typed(read_json(&first_input(ctx.inputs, "blur-check")?)?, "blur instance")?,
        _ => return Err(Error::InvalidParameter("--k and --l go together".into())),
    };
    let report = blur_check(&instance)?;
    Ok(Outcome {
        passed: report.passed,
        result: to_value(&report),
    })
}

fn rep_build(a: &RepArgs, ctx: &Ctx) -> Result<Outcome> {
    let path = first_input(ctx.inputs, "rep-build")?;
    let (signature, flavor) = match a.signature {
        SignatureChoice::Pta => (Signature::Pta, Flavor::Pta),
        SignatureChoice::Ta => (Signature::Ta, Flavor::Ta),
    };
    match a.mode {
        RepMode::Prenetwork => {
            let s = match load_structure(&path)? {
                Structure::Ra(ra) => basic_matrices(&ra, a.m, &ctx.budget)?.with_flavor(flavor),
                Structure::Ca(s) => s,
            };
            let schedule = match &a.moves {
                Some(p) => Schedule::Moves(typed::<Vec<ForallMove>>(read_json(p)?, "move list")?),
                None => Schedule::Fair,
            };
            let (rep, report) = build_prenetwork_rep(&s, signature, a.rounds, &schedule)?;
            let validation = validate_rep(&rep, &s)?;
            Ok(Outcome {
                passed: report.passed && validation.passed && rep.outcome == RepOutcome::Completed,
                result: json!({
                    "rep": to_value(&rep.to_json()),
                    "report": to_value(&report),
                    "validation": to_value(&validation),
                }),
            })
        }
        RepMode::Square => {
            let (s, h) = match load_structure(&path)? {
                Structure::Ra(ra) => {
                    let (s, hs) = matrix_hypernetworks(&ra, a.m, &ctx.budget)?;
                    (s, hs.into_iter().map(|x| x.network).collect::<Vec<_>>())
                }
                Structure::Ca(s) => match basis_fixpoint(&s, a.m, &ctx.budget)? {
                    (Some(h), _) => (s, h),
                    (None, _) => return Err(Error::Precondition("the structure has no basis at this size".into())),
                },
            };
            let (g, report) = build_square_rep(&s, &h, a.steps)?;
            let validation = validate_square(&g, &s, &h)?;
            Ok(Outcome {
                passed: report.passed && validation.passed,
                result: json!({
                    "hypergraph": to_value(&g.to_json(&s)),
                    "report": to_value(&report),
                    "validation": to_value(&validation),
                }),
            })
        }
    }
}

fn graph(a: &GraphArgs, ctx: &Ctx) -> Result<Outcome> {
    let g = inputs::graph(a.kind.as_deref(), ctx.inputs, ctx.seed)?;
    let chromatic = if a.no_chromatic { None } else { Some(chromatic_number(&g)?) };
    Ok(Outcome::completed(json!({
        "graph": to_value(&g),
        "edgeList": g.to_edge_list(),
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "components": g.component_count(),
        "girth": girth(&g),
        "chromatic": chromatic,
    })))
}
