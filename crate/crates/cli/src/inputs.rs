//! Short spec strings for generated objects, and loaders for input files.

use std::fs;
use std::path::Path;

use cylinder_core::algebra::{ca::CaJson, ra::RaJson, CaAtomStructure, RaAtomStructure};
use cylinder_core::constructions::{pebble_structure, PebbleKind, PebbleStructure};
use cylinder_core::graphs::{graph_gen, Graph, GraphKind};
use cylinder_core::{Error, Result};
use serde::de::DeserializeOwned;
use serde_json::Value;

fn numbers<T: std::str::FromStr>(body: &str, sep: &[char], what: &str) -> Result<Vec<T>> {
    body.split(sep)
        .map(|p| p.trim().parse::<T>().map_err(|_| Error::Parse(format!("bad {what} parameter `{p}`"))))
        .collect()
}

fn split_spec<'a>(spec: &'a str, what: &str) -> Result<(&'a str, &'a str)> {
    spec.split_once(':')
        .ok_or_else(|| Error::Parse(format!("{what} spec `{spec}` needs the form kind:parameters")))
}

/// `complete:K`, `cycle:K`, `cliques:COUNTxSIZE`, `interval:SIZE,N` or
/// `erdos:SIZE,P`. Erdős samples draw their seed from the run.
pub fn graph_kind(spec: &str, seed: u64) -> Result<GraphKind> {
    let (kind, body) = split_spec(spec, "graph")?;
    let kind = match kind {
        "complete" => GraphKind::Complete { k: numbers(body, &[','], kind)?[0] },
        "cycle" => GraphKind::Cycle { k: numbers(body, &[','], kind)?[0] },
        "cliques" => match numbers::<usize>(body, &['x', ','], kind)?[..] {
            [count, size] => GraphKind::DisjointCliques { count, size },
            _ => return Err(Error::Parse(format!("`{spec}` needs COUNTxSIZE"))),
        },
        "interval" => match numbers::<usize>(body, &[','], kind)?[..] {
            [size, n] => GraphKind::Interval { size, n },
            _ => return Err(Error::Parse(format!("`{spec}` needs SIZE,N"))),
        },
        "erdos" => {
            let (size, p) = body
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("`{spec}` needs SIZE,P")))?;
            GraphKind::ErdosSample {
                size: numbers(size, &[','], kind)?[0],
                p: numbers(p, &[','], kind)?[0],
                seed,
            }
        }
        other => return Err(Error::Parse(format!("unknown graph kind `{other}`"))),
    };
    Ok(kind)
}

/// `linear:L`, `reversed:L`, `complete:P` or `mpi:P,L`.
pub fn pebble_kind(spec: &str) -> Result<PebbleKind> {
    let (kind, body) = split_spec(spec, "pebble structure")?;
    let nums: Vec<usize> = numbers(body, &[','], kind)?;
    Ok(match (kind, &nums[..]) {
        ("linear", [len]) => PebbleKind::Linear { len: *len },
        ("reversed", [len]) => PebbleKind::ReversedLinear { len: *len },
        ("complete", [p]) => PebbleKind::CompleteGraph { p: *p },
        ("mpi", [p, len]) => PebbleKind::MPI { p: *p, len: *len },
        _ => return Err(Error::Parse(format!("bad pebble structure spec `{spec}`"))),
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Reports produced by this tool wrap their payload; accept either form.
fn payload(mut v: Value, key: &str) -> Value {
    if let Some(inner) = v.get_mut("result").map(Value::take) {
        v = inner;
    }
    match v.get_mut(key).map(Value::take) {
        Some(inner) => inner,
        None => v,
    }
}

pub fn typed<T: DeserializeOwned>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub enum Structure {
    Ra(RaAtomStructure),
    Ca(CaAtomStructure),
}

pub fn load_structure(path: &Path) -> Result<Structure> {
    let v = payload(read_json(path)?, "structure");
    if v.get("diag").is_some() {
        Ok(Structure::Ca(CaAtomStructure::from_json(&typed::<CaJson>(v, "cylindric structure")?)?))
    } else if v.get("identity").is_some() {
        Ok(Structure::Ra(RaAtomStructure::from_json(&typed::<RaJson>(v, "relation structure")?)?))
    } else {
        Err(Error::Parse(format!("{}: not an atom structure", path.display())))
    }
}

pub fn load_ra(path: &Path) -> Result<RaAtomStructure> {
    match load_structure(path)? {
        Structure::Ra(s) => Ok(s),
        Structure::Ca(_) => Err(Error::InvalidParameter(format!("{}: expected a relation structure", path.display()))),
    }
}

pub fn load_ca(path: &Path) -> Result<CaAtomStructure> {
    match load_structure(path)? {
        Structure::Ca(s) => Ok(s),
        Structure::Ra(_) => Err(Error::InvalidParameter(format!("{}: expected a cylindric structure", path.display()))),
    }
}

pub fn load_pebble(path: &Path) -> Result<PebbleStructure> {
    let s: PebbleStructure = typed(payload(read_json(path)?, "structure"), "pebble structure")?;
    if !s.is_well_formed() {
        return Err(Error::Malformed(format!("{}: tuple outside the universe", path.display())));
    }
    Ok(s)
}

pub fn pebble(spec: &str) -> Result<PebbleStructure> {
    Ok(pebble_structure(pebble_kind(spec)?))
}

/// JSON graphs (`{"nodes", "edges"}`) or the edge-list text format.
pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        typed(payload(v, "graph"), "graph")
    } else {
        Graph::from_edge_list(&text)
    }
}

pub fn graph(spec: Option<&str>, inputs: &[std::path::PathBuf], seed: u64) -> Result<Graph> {
    match (spec, inputs.first()) {
        (Some(spec), _) => graph_gen(graph_kind(spec, seed)?),
        (None, Some(path)) => load_graph(path),
        (None, None) => Err(Error::InvalidParameter("give a graph spec or an input graph".into())),
    }
}

pub fn first_input(inputs: &[std::path::PathBuf], what: &str) -> Result<std::path::PathBuf> {
    inputs
        .first()
        .cloned()
        .ok_or_else(|| Error::InvalidParameter(format!("{what} needs an input file")))
}
