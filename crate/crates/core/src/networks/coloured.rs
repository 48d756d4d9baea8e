//! Coloured graphs of the rainbow construction and ∃'s one-node extension rule.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::constructions::pebble::PebbleStructure;
use crate::error::{Error, Result};
use crate::report::{CheckReport, Counterexample};

/// Edge colours. Reds are oriented: `Red { from, to }` read along the stored direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "colour", rename_all = "camelCase")]
pub enum Colour {
    /// `g_i`, `1 ≤ i < m − 1`
    Green { index: usize },
    /// `g⁰_a` for `a` in the green index structure
    GreenZero { tint: usize },
    /// `w_i`, `i < m − 1`
    White { index: usize },
    /// `r_{from,to}` for indices in the red structure
    Red { from: usize, to: usize },
    Shade,
}

impl Colour {
    pub fn is_green(self) -> bool {
        matches!(self, Colour::Green { .. } | Colour::GreenZero { .. })
    }

    fn reversed(self) -> Colour {
        match self {
            Colour::Red { from, to } => Colour::Red { from: to, to: from },
            c => c,
        }
    }

    pub fn name(self) -> String {
        match self {
            Colour::Green { index } => format!("g{index}"),
            Colour::GreenZero { tint } => format!("g0^{tint}"),
            Colour::White { index } => format!("w{index}"),
            Colour::Red { from, to } => format!("r{from}{to}"),
            Colour::Shade => "rho".into(),
        }
    }
}

/// Edges keyed by `(min, max)`; reds are stored oriented from `min` to `max`.
/// Yellow shades sit on sorted `(m − 1)`-tuples.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColouredGraph {
    pub dimension: usize,
    pub nodes: usize,
    pub edges: BTreeMap<(usize, usize), Colour>,
    pub yellows: BTreeMap<Vec<usize>, BTreeSet<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeJson {
    pub x: usize,
    pub y: usize,
    #[serde(flatten)]
    pub colour: Colour,
    pub name: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct YellowJson {
    pub tuple: Vec<usize>,
    pub shade: BTreeSet<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColouredGraphJson {
    pub dimension: usize,
    pub nodes: usize,
    pub edges: Vec<EdgeJson>,
    #[serde(default)]
    pub yellows: Vec<YellowJson>,
    #[serde(default)]
    pub greens: Option<String>,
    #[serde(default)]
    pub reds: Option<String>,
}

impl ColouredGraph {
    pub fn new(dimension: usize, nodes: usize) -> Self {
        ColouredGraph {
            dimension,
            nodes,
            ..Default::default()
        }
    }

    pub fn colour(&self, x: usize, y: usize) -> Option<Colour> {
        if x < y {
            self.edges.get(&(x, y)).copied()
        } else {
            self.edges.get(&(y, x)).map(|c| c.reversed())
        }
    }

    /// Sets the colour of the edge read from `x` to `y`.
    pub fn set(&mut self, x: usize, y: usize, c: Colour) {
        if x < y {
            self.edges.insert((x, y), c);
        } else {
            self.edges.insert((y, x), c.reversed());
        }
    }

    pub fn set_yellow(&mut self, tuple: &[usize], shade: BTreeSet<usize>) {
        let mut t = tuple.to_vec();
        t.sort_unstable();
        self.yellows.insert(t, shade);
    }

    /// The tint of the cone with the given base order and apex, if it is one.
    pub fn cone_tint(&self, base: &[usize], apex: usize) -> Option<usize> {
        let tint = match self.colour(base[0], apex)? {
            Colour::GreenZero { tint } => tint,
            _ => return None,
        };
        for (j, &d) in base.iter().enumerate().skip(1) {
            if self.colour(d, apex)? != (Colour::Green { index: j }) {
                return None;
            }
        }
        for (p, &x) in base.iter().enumerate() {
            for &y in &base[p + 1..] {
                if self.colour(x, y).map_or(false, |c| c.is_green()) {
                    return None;
                }
            }
        }
        Some(tint)
    }

    /// The base order a cone with this apex induces on `face`, and its tint.
    pub fn cone_on(&self, face: &[usize], apex: usize) -> Option<(Vec<usize>, usize)> {
        let m1 = face.len();
        let mut order = vec![usize::MAX; m1];
        for &f in face {
            match self.colour(f, apex)? {
                Colour::GreenZero { .. } if order[0] == usize::MAX => order[0] = f,
                Colour::Green { index } if index >= 1 && index < m1 && order[index] == usize::MAX => order[index] = f,
                _ => return None,
            }
        }
        let tint = self.cone_tint(&order, apex)?;
        Some((order, tint))
    }

    pub fn to_json(&self, greens: Option<&PebbleStructure>, reds: Option<&PebbleStructure>) -> ColouredGraphJson {
        ColouredGraphJson {
            dimension: self.dimension,
            nodes: self.nodes,
            edges: self
                .edges
                .iter()
                .map(|(&(x, y), &c)| EdgeJson {
                    x,
                    y,
                    colour: c,
                    name: c.name(),
                })
                .collect(),
            yellows: self
                .yellows
                .iter()
                .map(|(t, s)| YellowJson {
                    tuple: t.clone(),
                    shade: s.clone(),
                })
                .collect(),
            greens: greens.map(|g| g.description.clone()),
            reds: reds.map(|r| r.description.clone()),
        }
    }

    pub fn from_json(j: &ColouredGraphJson) -> Result<Self> {
        let mut g = ColouredGraph::new(j.dimension, j.nodes);
        for e in &j.edges {
            if e.x == e.y || e.x >= j.nodes || e.y >= j.nodes {
                return Err(Error::Malformed(format!("edge ({}, {})", e.x, e.y)));
            }
            g.set(e.x, e.y, e.colour);
        }
        for y in &j.yellows {
            g.set_yellow(&y.tuple, y.shade.clone());
        }
        Ok(g)
    }
}

fn order_preserving(pairs: [(usize, usize); 2], greens: &PebbleStructure, reds: &PebbleStructure) -> bool {
    let [(i, k), (j, l)] = pairs;
    if i == j {
        return k == l;
    }
    let fwd = |p: usize, q: usize, r: usize, s: usize| !greens.holds("<", p, q) || reds.holds("<", r, s);
    fwd(i, j, k, l) && fwd(j, i, l, k)
}

/// Which forbidden family the triangle `x, y, z` falls in, given the colours
/// read along `x→y`, `y→z` and `x→z`.
pub fn forbidden_family(
    xy: Colour,
    yz: Colour,
    xz: Colour,
    greens: &PebbleStructure,
    reds: &PebbleStructure,
) -> Option<&'static str> {
    if xy.is_green() && yz.is_green() && xz.is_green() {
        return Some("all-green");
    }
    // rotate so each edge gets a turn as the odd one out; the two others meet at a node
    let views = [(xy.reversed(), xz, yz), (xy, yz, xz.reversed()), (xz.reversed(), yz.reversed(), xy)];
    // view (p, q, r): p and q leave the common node, r joins their far ends (p's end to q's end)
    for &(p, q, r) in &views {
        if let (Colour::Green { index: i }, Colour::Green { index: j }, Colour::White { index: w }) = (p, q, r) {
            if i == j && w == i {
                return Some("green-green-white");
            }
        }
        if let (Colour::GreenZero { .. }, Colour::GreenZero { .. }, Colour::White { index: 0 }) = (p, q, r) {
            return Some("g0-g0-w0");
        }
        if let (Colour::GreenZero { tint: i }, Colour::GreenZero { tint: j }, Colour::Red { from: k, to: l }) = (p, q, r) {
            if !order_preserving([(i, k), (j, l)], greens, reds) {
                return Some("g0-g0-red");
            }
        }
    }
    if let (Colour::Red { from: i, to: j }, Colour::Red { from: j2, to: k2 }, Colour::Red { from: i3, to: k3 }) = (xy, yz, xz) {
        if !(i == i3 && j == j2 && k2 == k3) {
            return Some("red-matching");
        }
    }
    None
}

/// Checks completeness, palette ranges, the five forbidden families, yellow
/// placement and the cone condition. Shades are rejected unless `allow_shade`.
pub fn validate_coloured_graph(
    g: &ColouredGraph,
    greens: &PebbleStructure,
    reds: &PebbleStructure,
    allow_shade: bool,
) -> CheckReport {
    let mut report = CheckReport::new("coloured-graph");
    let m = g.dimension;
    let k = g.nodes;
    for x in 0..k {
        for y in x + 1..k {
            match g.colour(x, y) {
                None => report.fail(Counterexample::new("incomplete", vec![format!("({x},{y})")])),
                Some(c) => {
                    let ok = match c {
                        Colour::Green { index } => index >= 1 && index + 1 < m,
                        Colour::GreenZero { tint } => tint < greens.universe,
                        Colour::White { index } => index + 1 < m,
                        Colour::Red { from, to } => from < reds.universe && to < reds.universe,
                        Colour::Shade => allow_shade,
                    };
                    if !ok {
                        let family = if c == Colour::Shade { "shade" } else { "palette" };
                        report.fail(Counterexample::new(family, vec![format!("({x},{y})"), c.name()]));
                    }
                }
            }
        }
    }
    if g.edges.keys().any(|&(x, y)| x >= y || y >= k) {
        report.fail(Counterexample::new("palette", vec!["edge outside node range".into()]));
    }
    for x in 0..k {
        for y in x + 1..k {
            for z in y + 1..k {
                if let (Some(a), Some(b), Some(c)) = (g.colour(x, y), g.colour(y, z), g.colour(x, z)) {
                    report.bump("triangles", 1);
                    if let Some(f) = forbidden_family(a, b, c, greens, reds) {
                        report.fail(Counterexample::new(
                            f,
                            vec![format!("({x},{y},{z})"), a.name(), b.name(), c.name()],
                        ));
                    }
                }
            }
        }
    }
    for (t, shade) in &g.yellows {
        if t.len() + 1 != m || t.windows(2).any(|w| w[0] >= w[1]) || t.iter().any(|&x| x >= k) {
            report.fail(Counterexample::new("yellow-shape", vec![format!("{t:?}")]));
            continue;
        }
        if shade.iter().any(|&i| i >= greens.universe) {
            report.fail(Counterexample::new("palette", vec![format!("{t:?}"), format!("y{shade:?}")]));
        }
        let green_inside = t
            .iter()
            .enumerate()
            .any(|(p, &x)| t[p + 1..].iter().any(|&y| g.colour(x, y).map_or(false, |c| c.is_green())));
        if green_inside {
            report.fail(Counterexample::new("yellow-green", vec![format!("{t:?}")]));
        }
        for apex in 0..k {
            if t.contains(&apex) {
                continue;
            }
            if let Some((order, tint)) = g.cone_on(t, apex) {
                if !shade.contains(&tint) {
                    report.fail(Counterexample::new(
                        "cone",
                        vec![format!("base {order:?}"), format!("apex {apex}"), format!("tint {tint}"), format!("y{shade:?}")],
                    ));
                }
            }
        }
    }
    report.finalize()
}

/// Auxiliary state for red choices: the private EF response for a new cone's
/// tint, and red-clique indices for nodes that have no red edge yet.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ExtensionParams {
    #[serde(default)]
    pub ef_response: BTreeMap<usize, usize>,
    #[serde(default)]
    pub red_index: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone)]
pub enum Extension {
    Completed(ColouredGraph),
    /// ∃ has no legal completion under the given parameters.
    NoCompletion(CheckReport),
}

/// ∃'s completion after ∀ adds node `delta` joined to `face` by `phi`.
pub fn extend_coloured_graph(
    g: &ColouredGraph,
    face: &[usize],
    delta: usize,
    phi: &[(usize, Colour)],
    params: &ExtensionParams,
    greens: &PebbleStructure,
    reds: &PebbleStructure,
    allow_shade: bool,
) -> Result<Extension> {
    if delta != g.nodes {
        return Err(Error::Precondition(format!("new node must be {}, got {delta}", g.nodes)));
    }
    if face.iter().any(|&f| f >= g.nodes) || phi.iter().any(|(f, _)| !face.contains(f)) {
        return Err(Error::Precondition("face and move must use existing nodes".into()));
    }
    let mut star = g.clone();
    star.nodes += 1;
    for &(f, c) in phi {
        star.set(f, delta, c);
    }
    // ∀'s graph on F ∪ {δ} must itself be consistent
    let mut phi_graph = ColouredGraph::new(g.dimension, face.len() + 1);
    for (p, &x) in face.iter().enumerate() {
        for (q, &y) in face.iter().enumerate().skip(p + 1) {
            if let Some(c) = star.colour(x, y) {
                phi_graph.set(p, q, c);
            }
        }
        if let Some(c) = star.colour(x, delta) {
            phi_graph.set(p, face.len(), c);
        }
    }
    let pr = validate_coloured_graph(&phi_graph, greens, reds, allow_shade);
    if let Some(c) = pr.counterexamples.iter().find(|c| c.axiom != "incomplete") {
        return Err(Error::Precondition(format!("the move itself is inconsistent: {}", c.axiom)));
    }

    let m = g.dimension;
    let delta_cone = if face.len() + 1 == m { star.cone_on(face, delta) } else { None };
    let mut plus = star.clone();
    for beta in 0..g.nodes {
        if face.contains(&beta) {
            continue;
        }
        let beta_cone = if face.len() + 1 == m { star.cone_on(face, beta) } else { None };
        if let (Some((ob, _)), Some((od, tint_d))) = (&beta_cone, &delta_cone) {
            if ob == od {
                let mu = red_index_of(g, face, beta, ob, params);
                let b = params.ef_response.get(tint_d).copied();
                match (mu, b) {
                    (Some(mu), Some(b)) => {
                        plus.set(beta, delta, Colour::Red { from: mu, to: b });
                        continue;
                    }
                    _ => {
                        let mut r = CheckReport::new("extension");
                        r.fail(Counterexample::new(
                            "red-parameters",
                            vec![format!("beta {beta}"), format!("tint {tint_d}")],
                        ));
                        return Ok(Extension::NoCompletion(r.finalize()));
                    }
                }
            }
        }
        let white = (0..m.saturating_sub(1)).find(|&i| {
            !face.iter().any(|&f| match (star.colour(beta, f), star.colour(f, delta)) {
                (Some(Colour::Green { index: a }), Some(Colour::Green { index: b })) => i >= 1 && a == i && b == i,
                (Some(Colour::GreenZero { .. }), Some(Colour::GreenZero { .. })) => i == 0,
                _ => false,
            })
        });
        if let Some(i) = white {
            plus.set(beta, delta, Colour::White { index: i });
            continue;
        }
        // no white is available: first red that keeps every triangle through (β, δ) legal
        let choice = (0..reds.universe)
            .flat_map(|a| (0..reds.universe).map(move |b| Colour::Red { from: a, to: b }))
            .find(|&c| {
                plus.set(beta, delta, c);
                (0..plus.nodes).all(|w| {
                    if w == beta || w == delta {
                        return true;
                    }
                    match (plus.colour(beta, w), plus.colour(w, delta)) {
                        (Some(a), Some(b)) => forbidden_family(a, b, c, greens, reds).is_none(),
                        _ => true,
                    }
                })
            });
        match choice {
            Some(c) => plus.set(beta, delta, c),
            None => {
                let mut r = CheckReport::new("extension");
                r.fail(Counterexample::new("no-colour", vec![format!("({beta},{delta})")]));
                return Ok(Extension::NoCompletion(r.finalize()));
            }
        }
    }
    // yellows on new (m − 1)-sets through δ that ∀'s graph does not already cover
    if m >= 2 {
        let others: Vec<usize> = (0..g.nodes).collect();
        for combo in combinations(&others, m - 2) {
            let mut t = combo.clone();
            t.push(delta);
            t.sort_unstable();
            if t.iter().all(|x| *x == delta || face.contains(x)) {
                continue;
            }
            let green_inside = t
                .iter()
                .enumerate()
                .any(|(p, &x)| t[p + 1..].iter().any(|&y| plus.colour(x, y).map_or(false, |c| c.is_green())));
            if green_inside {
                continue;
            }
            let shade: BTreeSet<usize> = (0..plus.nodes)
                .filter(|z| !t.contains(z))
                .filter_map(|z| plus.cone_on(&t, z).map(|(_, tint)| tint))
                .collect();
            plus.set_yellow(&t, shade);
        }
    }
    let r = validate_coloured_graph(&plus, greens, reds, allow_shade);
    if r.passed {
        Ok(Extension::Completed(plus))
    } else {
        Ok(Extension::NoCompletion(r))
    }
}

fn red_index_of(g: &ColouredGraph, face: &[usize], beta: usize, order: &[usize], params: &ExtensionParams) -> Option<usize> {
    for x in 0..g.nodes {
        if x == beta || face.contains(&x) {
            continue;
        }
        if g.cone_on(face, x).map_or(false, |(o, _)| o == order) {
            if let Some(Colour::Red { from, .. }) = g.colour(beta, x) {
                return Some(from);
            }
        }
    }
    params.red_index.get(&beta).copied()
}

fn combinations(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(items: &[usize], r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            go(items, r, i + 1, cur, out);
            cur.pop();
        }
    }
    go(items, r, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::pebble::{pebble_structure, PebbleKind};

    fn lin(n: usize) -> PebbleStructure {
        pebble_structure(PebbleKind::Linear { len: n })
    }

    fn triangle(a: Colour, b: Colour, c: Colour) -> ColouredGraph {
        let mut g = ColouredGraph::new(3, 3);
        g.set(0, 1, a);
        g.set(1, 2, b);
        g.set(0, 2, c);
        g
    }

    #[test]
    fn paper_triangles() {
        let (a, b) = (lin(4), lin(4));
        let g0 = |t| Colour::GreenZero { tint: t };
        let r = |x, y| Colour::Red { from: x, to: y };
        // (g0^0, g0^1, w0) with the whites joining the greens' far ends
        let t = triangle(g0(0), Colour::White { index: 0 }, g0(1));
        let rep = validate_coloured_graph(&t, &a, &b, false);
        assert_eq!(rep.first_failure().unwrap().axiom, "g0-g0-w0");
        assert!(validate_coloured_graph(&triangle(r(0, 1), r(1, 2), r(0, 2)), &a, &b, false).passed);
        let bad = validate_coloured_graph(&triangle(r(0, 1), r(1, 2), r(0, 3)), &a, &b, false);
        assert_eq!(bad.first_failure().unwrap().axiom, "red-matching");
        let all_green = triangle(Colour::Green { index: 1 }, g0(0), g0(1));
        assert_eq!(validate_coloured_graph(&all_green, &a, &b, false).first_failure().unwrap().axiom, "all-green");
    }

    #[test]
    fn green_reds_follow_order_preservation() {
        let (a, b) = (lin(3), lin(3));
        let g0 = |t| Colour::GreenZero { tint: t };
        // node 0 is the common endpoint of the two greens; red joins 1 → 2
        let ok = triangle(g0(0), Colour::Red { from: 0, to: 1 }, g0(1));
        assert!(validate_coloured_graph(&ok, &a, &b, false).passed);
        let flipped = triangle(g0(0), Colour::Red { from: 1, to: 0 }, g0(1));
        assert_eq!(validate_coloured_graph(&flipped, &a, &b, false).first_failure().unwrap().axiom, "g0-g0-red");
    }

    #[test]
    fn shade_needs_the_flag() {
        let (a, b) = (lin(2), lin(2));
        let mut g = ColouredGraph::new(3, 2);
        g.set(0, 1, Colour::Shade);
        assert!(!validate_coloured_graph(&g, &a, &b, false).passed);
        assert!(validate_coloured_graph(&g, &a, &b, true).passed);
    }

    fn base_with_beta(beta_cone: Option<usize>) -> ColouredGraph {
        let mut g = ColouredGraph::new(3, 3);
        g.set(0, 1, Colour::White { index: 0 });
        match beta_cone {
            Some(t) => {
                g.set(0, 2, Colour::GreenZero { tint: t });
                g.set(1, 2, Colour::Green { index: 1 });
            }
            None => {
                g.set(0, 2, Colour::White { index: 0 });
                g.set(1, 2, Colour::White { index: 1 });
            }
        }
        g
    }

    #[test]
    fn non_apex_gets_white() {
        let (a, b) = (lin(3), lin(3));
        let g = base_with_beta(None);
        let phi = [(0, Colour::GreenZero { tint: 0 }), (1, Colour::Green { index: 1 })];
        let ext = extend_coloured_graph(&g, &[0, 1], 3, &phi, &ExtensionParams::default(), &a, &b, false).unwrap();
        match ext {
            Extension::Completed(h) => {
                assert_eq!(h.colour(2, 3), Some(Colour::White { index: 0 }));
                assert!(validate_coloured_graph(&h, &a, &b, false).passed);
            }
            Extension::NoCompletion(r) => panic!("{:?}", r.counterexamples),
        }
    }

    #[test]
    fn two_cones_get_ef_guided_red() {
        let (a, b) = (lin(3), lin(3));
        let g = base_with_beta(Some(0));
        let phi = [(0, Colour::GreenZero { tint: 1 }), (1, Colour::Green { index: 1 })];
        let params = ExtensionParams {
            ef_response: [(1, 2)].into_iter().collect(),
            red_index: [(2, 0)].into_iter().collect(),
        };
        let ext = extend_coloured_graph(&g, &[0, 1], 3, &phi, &params, &a, &b, false).unwrap();
        match ext {
            Extension::Completed(h) => assert_eq!(h.colour(2, 3), Some(Colour::Red { from: 0, to: 2 })),
            Extension::NoCompletion(r) => panic!("{:?}", r.counterexamples),
        }
        // an order-reversing response cannot be completed and is reported, not returned
        let params = ExtensionParams {
            ef_response: [(1, 0)].into_iter().collect(),
            red_index: [(2, 2)].into_iter().collect(),
        };
        let ext = extend_coloured_graph(&g, &[0, 1], 3, &phi, &params, &a, &b, false).unwrap();
        assert!(matches!(ext, Extension::NoCompletion(_)));
    }

    #[test]
    fn empty_face_adds_an_isolated_node() {
        let (a, b) = (lin(2), lin(2));
        let g = ColouredGraph::new(3, 0);
        match extend_coloured_graph(&g, &[], 0, &[], &ExtensionParams::default(), &a, &b, false).unwrap() {
            Extension::Completed(h) => {
                assert_eq!(h.nodes, 1);
                assert!(h.edges.is_empty());
            }
            Extension::NoCompletion(_) => panic!(),
        }
    }

    #[test]
    fn yellow_shades_record_cone_tints() {
        let (a, b) = (lin(3), lin(3));
        let g = base_with_beta(None);
        let phi = [(0, Colour::GreenZero { tint: 0 }), (1, Colour::Green { index: 1 })];
        if let Extension::Completed(h) =
            extend_coloured_graph(&g, &[0, 1], 3, &phi, &ExtensionParams::default(), &a, &b, false).unwrap()
        {
            assert!(h.yellows.contains_key(&vec![2, 3]));
            assert!(h.yellows.keys().all(|t| t.contains(&3)));
        } else {
            panic!();
        }
    }
}
