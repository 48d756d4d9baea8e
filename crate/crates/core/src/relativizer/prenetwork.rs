//! ∃'s strategy in the ω-round prenetwork game on a finite algebra `Cm(S)`
//! with partial transposition (PTA) or transposition (TA) signature.
//!
//! Alongside the played prenetwork `N` she keeps an atomic companion `M` on
//! the same edges with `M(x̄) ≤ N(x̄)`. Fresh tuples get the companion
//! networks generated from one atom: the closure of `x̄` under replacements
//! `[i|j]` (and transpositions `[i, j]` for TA), labelled by `t^i_j` (and
//! `s_[ij]`). Since the algebra is finite it is its own canonical extension.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::algebra::{check_ca_axioms, AxiomVariant, CaAtomStructure};
use crate::bits::{self, AtomSet};
use crate::error::{Error, Result};
use crate::networks::network::tuple_key;
use crate::report::{CheckReport, Counterexample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Signature {
    Pta,
    Ta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "camelCase")]
pub enum ForallMove {
    /// A nonzero element that must label some edge from below.
    Element { element: Vec<usize> },
    /// Edge and element; the edge must end up below the element or its complement.
    Dichotomy { edge: Vec<usize>, element: Vec<usize> },
    /// Edge `x̄`, index `i` and `b` with `N(x̄) ≤ c_i b`; some `x̄[i ↦ z]` must end up below `b`.
    Cylindrifier { edge: Vec<usize>, index: usize, element: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Schedule {
    /// Round-robin over the three move kinds, enumerating elements and current edges.
    Fair,
    Moves(Vec<ForallMove>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MoveRecord {
    pub round: usize,
    #[serde(rename = "forall")]
    pub mv: ForallMove,
    /// The edge ∃ points to: the new base edge, the decided edge or the witness.
    pub edge: Vec<usize>,
    pub new_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "camelCase")]
pub enum RepOutcome {
    Completed,
    /// ∃'s strategy broke down. On an algebra passing the axioms this should
    /// not happen.
    Falsification { round: usize, reason: String },
}

/// A prenetwork: partial labelling of node tuples by elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prenetwork {
    pub nodes: usize,
    pub labels: BTreeMap<Vec<usize>, AtomSet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialRep {
    pub signature: Signature,
    pub dimension: usize,
    /// `N_0 ⊆ N_1 ⊆ …`, one entry per completed round after the empty start.
    pub chain: Vec<Prenetwork>,
    /// ∃'s atomic companion on the edges of the last prenetwork.
    pub companion: BTreeMap<Vec<usize>, usize>,
    pub log: Vec<MoveRecord>,
    pub outcome: RepOutcome,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PartialRepJson {
    pub signature: Signature,
    pub dimension: usize,
    pub nodes: usize,
    pub labels: BTreeMap<String, Vec<usize>>,
    pub companion: BTreeMap<String, usize>,
    pub chain_sizes: Vec<[usize; 2]>,
    pub log: Vec<MoveRecord>,
    #[serde(flatten)]
    pub outcome: RepOutcome,
}

impl PartialRep {
    pub fn current(&self) -> &Prenetwork {
        self.chain.last().expect("the chain starts with the empty prenetwork")
    }

    pub fn to_json(&self) -> PartialRepJson {
        let last = self.current();
        PartialRepJson {
            signature: self.signature,
            dimension: self.dimension,
            nodes: last.nodes,
            labels: last.labels.iter().map(|(t, a)| (tuple_key(t), bits::to_vec(a))).collect(),
            companion: self.companion.iter().map(|(t, &a)| (tuple_key(t), a)).collect(),
            chain_sizes: self.chain.iter().map(|p| [p.nodes, p.labels.len()]).collect(),
            log: self.log.clone(),
            outcome: self.outcome.clone(),
        }
    }
}

struct Player<'s> {
    s: &'s CaAtomStructure,
    sig: Signature,
    nodes: usize,
    n: BTreeMap<Vec<usize>, AtomSet>,
    m: BTreeMap<Vec<usize>, usize>,
}

/// `t^i_j a = d_ij · c_i a` on an atom; it must again be an atom.
fn replace_atom(s: &CaAtomStructure, i: usize, j: usize, a: usize) -> std::result::Result<usize, String> {
    let mut hits = s.cyl_acc(i).successors(a).iter().map(|&b| b as usize).filter(|&b| s.below_diag(b, i, j));
    match (hits.next(), hits.next()) {
        (Some(b), None) => Ok(b),
        _ => Err(format!("t^{i}_{j} of atom {} is not an atom", s.label(a))),
    }
}

fn diagonal_meet(s: &CaAtomStructure, t: &[usize]) -> AtomSet {
    let mut out = s.full();
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            if t[i] == t[j] {
                out.intersect_with(s.diag(i, j));
            }
        }
    }
    out
}

fn swap(t: &[usize], i: usize, j: usize) -> Vec<usize> {
    let mut u = t.to_vec();
    u.swap(i, j);
    u
}

impl<'s> Player<'s> {
    /// The companion network generated by `atom` on `base`, checked for
    /// well-definedness.
    fn companion(&self, base: &[usize], atom: usize) -> std::result::Result<BTreeMap<Vec<usize>, usize>, String> {
        let s = self.s;
        let dim = base.len();
        let mut out = BTreeMap::new();
        out.insert(base.to_vec(), atom);
        let mut queue = VecDeque::from([(base.to_vec(), atom)]);
        while let Some((t, a)) = queue.pop_front() {
            let mut next = Vec::new();
            for i in 0..dim {
                for j in 0..dim {
                    if i == j {
                        continue;
                    }
                    let mut u = t.clone();
                    u[i] = t[j];
                    next.push((u, replace_atom(s, i, j, a)?));
                    if self.sig == Signature::Ta && i < j {
                        let b = s.transpose_atom(i, j, a).ok_or("no transpositions")?;
                        next.push((swap(&t, i, j), b));
                    }
                }
            }
            for (u, b) in next {
                match out.get(&u) {
                    Some(&c) if c != b => {
                        return Err(format!(
                            "companion labels {} with both {} and {}",
                            tuple_key(&u),
                            s.label(c),
                            s.label(b)
                        ))
                    }
                    Some(_) => {}
                    None => {
                        out.insert(u.clone(), b);
                        queue.push_back((u, b));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `(ȳ, s_τ x)` for every tuple `ȳ = τ|x̄` under the signature's permutations.
    fn orbit(&self, t: &[usize], x: &AtomSet) -> Vec<(Vec<usize>, AtomSet)> {
        if self.sig == Signature::Pta {
            return vec![(t.to_vec(), x.clone())];
        }
        let dim = t.len();
        let mut seen: BTreeMap<(Vec<usize>, Vec<usize>), ()> = BTreeMap::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::from([(t.to_vec(), x.clone())]);
        seen.insert((t.to_vec(), bits::to_vec(x)), ());
        while let Some((u, y)) = queue.pop_front() {
            for i in 0..dim {
                for j in i + 1..dim {
                    let v = swap(&u, i, j);
                    let z = self.s.transpose(i, j, &y).expect("TA structures carry transpositions");
                    if seen.insert((v.clone(), bits::to_vec(&z)), ()).is_none() {
                        queue.push_back((v, z));
                    }
                }
            }
            out.push((u, y));
        }
        out
    }

    /// Adds a companion network; new edges get the diagonal meet in `N`.
    fn merge(&mut self, comp: BTreeMap<Vec<usize>, usize>) -> std::result::Result<(), String> {
        for (t, a) in comp {
            match self.m.get(&t) {
                Some(&b) if b != a => {
                    return Err(format!(
                        "amalgamation clash at {}: {} against {}",
                        tuple_key(&t),
                        self.s.label(b),
                        self.s.label(a)
                    ))
                }
                Some(_) => {}
                None => {
                    self.n.insert(t.clone(), diagonal_meet(self.s, &t));
                    self.m.insert(t, a);
                }
            }
        }
        Ok(())
    }

    fn refine(&mut self, t: &[usize], x: &AtomSet) {
        for (u, y) in self.orbit(t, x) {
            if let Some(cur) = self.n.get_mut(&u) {
                cur.intersect_with(&y);
            }
        }
    }

    fn element(&mut self, a: &AtomSet) -> std::result::Result<Vec<usize>, String> {
        let s = self.s;
        let dim = s.dimension();
        let atom = a.ones().next().ok_or("zero element")?;
        // nodes identified exactly where the atom sits below a diagonal
        let mut t = vec![usize::MAX; dim];
        for i in 0..dim {
            if let Some(j) = (0..i).find(|&j| s.below_diag(atom, i, j)) {
                t[i] = t[j];
            } else {
                t[i] = self.nodes;
                self.nodes += 1;
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                if (t[i] == t[j]) != s.below_diag(atom, i, j) {
                    return Err(format!("diagonal pattern of {} is not an equivalence", s.label(atom)));
                }
            }
        }
        let comp = self.companion(&t, atom)?;
        self.merge(comp)?;
        self.refine(&t, a);
        Ok(t)
    }

    fn dichotomy(&mut self, t: &[usize], a: &AtomSet) {
        for (u, y) in self.orbit(t, a) {
            let side = if y.contains(self.m[&u]) { y } else { bits::complement(&y) };
            if let Some(cur) = self.n.get_mut(&u) {
                cur.intersect_with(&side);
            }
        }
    }

    fn cylindrifier(&mut self, t: &[usize], i: usize, b: &AtomSet) -> std::result::Result<Vec<usize>, String> {
        let s = self.s;
        let a = self.m[t];
        let mut u = t.to_vec();
        for z in 0..self.nodes {
            u[i] = z;
            if self.m.get(&u).is_some_and(|&c| b.contains(c)) {
                let w = u.clone();
                self.refine(&w, b);
                return Ok(w);
            }
        }
        let choice = s
            .cyl_acc(i)
            .successors(a)
            .iter()
            .map(|&c| c as usize)
            .find(|&c| b.contains(c))
            .ok_or_else(|| format!("c_{i} {} misses the demanded element", s.label(a)))?;
        // re-deriving the companion of x̄ confirms M agrees with it before amalgamating
        let own = self.companion(t, a)?;
        self.merge(own)?;
        u[i] = self.nodes;
        self.nodes += 1;
        let comp = self.companion(&u, choice)?;
        self.merge(comp)?;
        let mut target = b.clone();
        target.intersect_with(&diagonal_meet(s, &u));
        self.refine(&u, &target);
        Ok(u)
    }
}

/// The fair enumeration of nonzero elements: atoms, co-atoms, diagonals, unit.
fn element_sequence(s: &CaAtomStructure) -> Vec<AtomSet> {
    let k = s.len();
    let mut out: Vec<AtomSet> = (0..k).map(|a| bits::singleton(k, a)).collect();
    out.extend((0..k).map(|a| bits::complement(&bits::singleton(k, a))));
    for i in 0..s.dimension() {
        for j in i + 1..s.dimension() {
            out.push(s.diag(i, j).clone());
        }
    }
    out.push(s.full());
    let mut seen = BTreeSet::new();
    out.retain(|x| !x.is_clear() && seen.insert(bits::to_vec(x)));
    out
}

fn unpair(q: usize) -> (usize, usize) {
    let mut w = 0;
    while (w + 1) * (w + 2) / 2 <= q {
        w += 1;
    }
    let y = q - w * (w + 1) / 2;
    (w - y, y)
}

fn fair_move(s: &CaAtomStructure, round: usize, n: &BTreeMap<Vec<usize>, AtomSet>, seq: &[AtomSet]) -> ForallMove {
    let kind = if n.is_empty() { 0 } else { round % 3 };
    let q = round / 3;
    let edges: Vec<&Vec<usize>> = n.keys().collect();
    let (u, w) = unpair(q);
    match kind {
        0 => ForallMove::Element {
            element: bits::to_vec(&seq[q % seq.len()]),
        },
        1 => ForallMove::Dichotomy {
            edge: edges[u % edges.len()].clone(),
            element: bits::to_vec(&seq[w % seq.len()]),
        },
        _ => {
            let edge = edges[u % edges.len()].clone();
            let i = w % s.dimension();
            let here = &n[&edge];
            // the unit always qualifies, so the search ends
            let b = (0..seq.len())
                .map(|d| &seq[(w / s.dimension() + d) % seq.len()])
                .find(|b| here.is_subset(&s.cyl(i, b)))
                .expect("the unit is in the sequence");
            ForallMove::Cylindrifier {
                edge,
                index: i,
                element: bits::to_vec(b),
            }
        }
    }
}

fn to_set(s: &CaAtomStructure, atoms: &[usize]) -> Result<AtomSet> {
    if let Some(&a) = atoms.iter().find(|&&a| a >= s.len()) {
        return Err(Error::InvalidParameter(format!("atom index {a} out of range")));
    }
    Ok(bits::from_atoms(s.len(), atoms.iter().copied()))
}

/// Plays `rounds` rounds (fewer if an explicit schedule runs out) and checks
/// the outcome. Illegal scheduled moves are parameter errors; a breakdown of
/// ∃'s strategy ends the play with a falsification outcome.
pub fn build_prenetwork_rep(
    s: &CaAtomStructure,
    signature: Signature,
    rounds: usize,
    schedule: &Schedule,
) -> Result<(PartialRep, CheckReport)> {
    if signature == Signature::Ta && !s.has_subst() {
        return Err(Error::Precondition("the TA signature needs transposition data".into()));
    }
    let variant = match signature {
        Signature::Pta => AxiomVariant::Pta,
        Signature::Ta => AxiomVariant::Ta,
    };
    let axioms = check_ca_axioms(s, variant)?;
    if let Some(c) = axioms.first_failure() {
        return Err(Error::Precondition(format!("axiom {} fails: {}", c.axiom, c.witness.join(" "))));
    }
    let mut p = Player {
        s,
        sig: signature,
        nodes: 0,
        n: BTreeMap::new(),
        m: BTreeMap::new(),
    };
    let seq = element_sequence(s);
    let mut rep = PartialRep {
        signature,
        dimension: s.dimension(),
        chain: vec![Prenetwork {
            nodes: 0,
            labels: BTreeMap::new(),
        }],
        companion: BTreeMap::new(),
        log: Vec::new(),
        outcome: RepOutcome::Completed,
    };
    let mut report = CheckReport::new("prenetwork-game");
    let total = match schedule {
        Schedule::Fair => rounds,
        Schedule::Moves(v) => rounds.min(v.len()),
    };
    for round in 0..total {
        let mv = match schedule {
            Schedule::Fair => fair_move(s, round, &p.n, &seq),
            Schedule::Moves(v) => v[round].clone(),
        };
        let before = p.nodes;
        let played = match &mv {
            ForallMove::Element { element } => {
                let a = to_set(s, element)?;
                if a.is_clear() {
                    return Err(Error::InvalidParameter(format!("round {round}: ∀ must play a nonzero element")));
                }
                p.element(&a)
            }
            ForallMove::Dichotomy { edge, element } => {
                let a = to_set(s, element)?;
                if !p.n.contains_key(edge) {
                    return Err(Error::InvalidParameter(format!("round {round}: {} is not an edge", tuple_key(edge))));
                }
                p.dichotomy(edge, &a);
                Ok(edge.clone())
            }
            ForallMove::Cylindrifier { edge, index, element } => {
                let b = to_set(s, element)?;
                s.check_index(*index)?;
                match p.n.get(edge) {
                    Some(here) if here.is_subset(&s.cyl(*index, &b)) => {}
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "round {round}: {} is not an edge below c_{index} of the element",
                            tuple_key(edge)
                        )))
                    }
                }
                p.cylindrifier(edge, *index, &b)
            }
        };
        match played {
            Ok(edge) => {
                rep.log.push(MoveRecord {
                    round,
                    mv,
                    edge,
                    new_nodes: p.nodes - before,
                });
                rep.chain.push(Prenetwork {
                    nodes: p.nodes,
                    labels: p.n.clone(),
                });
                let net = network_report(s, signature, &p.n, Some(&p.m));
                for c in net.counterexamples {
                    let mut w = vec![format!("round {round}")];
                    w.extend(c.witness);
                    report.fail(Counterexample::new(c.axiom, w));
                }
            }
            Err(reason) => {
                report.fail(Counterexample::new("FALSIFICATION", vec![format!("round {round}"), reason.clone()]));
                rep.outcome = RepOutcome::Falsification { round, reason };
                break;
            }
        }
    }
    rep.companion = p.m;
    check_moves(s, &rep, &mut report);
    check_chain(&rep, &mut report);
    report.set("rounds", rep.log.len() as u64);
    report.set("nodes", rep.current().nodes as u64);
    report.set("edges", rep.current().labels.len() as u64);
    Ok((rep, report.finalize()))
}

/// The prenetwork clauses, plus `M ≤ N` when a companion is given.
fn network_report(
    s: &CaAtomStructure,
    sig: Signature,
    n: &BTreeMap<Vec<usize>, AtomSet>,
    m: Option<&BTreeMap<Vec<usize>, usize>>,
) -> CheckReport {
    let mut report = CheckReport::new("prenetwork");
    let dim = s.dimension();
    for (t, x) in n {
        if x.is_clear() {
            report.fail(Counterexample::new("nonzero", vec![tuple_key(t)]));
        }
        for i in 0..dim {
            for j in i + 1..dim {
                if (t[i] == t[j]) != x.is_subset(s.diag(i, j)) {
                    report.fail(Counterexample::new(format!("diagonal[{i},{j}]"), vec![tuple_key(t)]));
                }
            }
        }
        if let Some(m) = m {
            if !m.get(t).is_some_and(|&a| x.contains(a)) {
                report.fail(Counterexample::new("companion", vec![tuple_key(t)]));
            }
        }
        if sig == Signature::Ta {
            for i in 0..dim {
                for j in i + 1..dim {
                    let u = swap(t, i, j);
                    let want = s.transpose(i, j, x).expect("TA structures carry transpositions");
                    if n.get(&u).is_some_and(|y| *y != want) {
                        report.fail(Counterexample::new(
                            format!("substitution[{i},{j}]"),
                            vec![tuple_key(t), tuple_key(&u)],
                        ));
                    }
                }
            }
        }
    }
    for i in 0..dim {
        let mut groups: BTreeMap<Vec<usize>, Vec<&Vec<usize>>> = BTreeMap::new();
        for t in n.keys() {
            let mut key = t.clone();
            key[i] = usize::MAX;
            groups.entry(key).or_default().push(t);
        }
        for g in groups.values() {
            for &x in g {
                for &y in g {
                    if x != y && bits::intersection(&n[x], &s.cyl(i, &n[y])).is_clear() {
                        report.fail(Counterexample::new(
                            format!("cylindrifier[{i}]"),
                            vec![tuple_key(x), tuple_key(y)],
                        ));
                    }
                }
            }
        }
    }
    report
}

fn check_moves(s: &CaAtomStructure, rep: &PartialRep, report: &mut CheckReport) {
    let last = &rep.current().labels;
    for r in &rep.log {
        let label = last.get(&r.edge);
        let (axiom, ok) = match &r.mv {
            ForallMove::Element { element } => {
                let a = bits::from_atoms(s.len(), element.iter().copied());
                ("element-answered", label.is_some_and(|x| x.is_subset(&a)))
            }
            ForallMove::Dichotomy { element, .. } => {
                let a = bits::from_atoms(s.len(), element.iter().copied());
                let ok = label.is_some_and(|x| x.is_subset(&a) || x.is_disjoint(&a));
                ("dichotomy-resolved", ok)
            }
            ForallMove::Cylindrifier { edge, index, element } => {
                let b = bits::from_atoms(s.len(), element.iter().copied());
                let shape = (0..edge.len()).all(|j| j == *index || edge[j] == r.edge[j]);
                ("cylindrifier-witnessed", shape && label.is_some_and(|x| x.is_subset(&b)))
            }
        };
        report.bump(axiom, 1);
        if !ok {
            report.fail(Counterexample::new(axiom, vec![format!("round {}", r.round), tuple_key(&r.edge)]));
        }
    }
}

fn check_chain(rep: &PartialRep, report: &mut CheckReport) {
    for (t, pair) in rep.chain.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let ok = a.nodes <= b.nodes
            && a.labels.iter().all(|(e, x)| b.labels.get(e).is_some_and(|y| y.is_subset(x)));
        if !ok {
            report.fail(Counterexample::new("chain", vec![format!("N_{t} ⊄ N_{}", t + 1)]));
        }
    }
}

/// `h(a)`: the edges whose final label lies below `a`.
pub fn h_image(rep: &PartialRep, a: &AtomSet) -> BTreeSet<Vec<usize>> {
    rep.current()
        .labels
        .iter()
        .filter(|(_, x)| x.is_subset(a))
        .map(|(t, _)| t.clone())
        .collect()
}

/// Elements ∀ named during play, in order of first appearance.
pub fn played_elements(s: &CaAtomStructure, rep: &PartialRep) -> Vec<AtomSet> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for r in &rep.log {
        let atoms = match &r.mv {
            ForallMove::Element { element }
            | ForallMove::Dichotomy { element, .. }
            | ForallMove::Cylindrifier { element, .. } => element,
        };
        if seen.insert(atoms.clone()) {
            out.push(bits::from_atoms(s.len(), atoms.iter().copied()));
        }
    }
    out
}

/// Checks `h` on the played elements and zero.
pub fn validate_rep(rep: &PartialRep, s: &CaAtomStructure) -> Result<CheckReport> {
    let mut queries = vec![s.empty_set()];
    queries.extend(played_elements(s, rep));
    validate_rep_on(rep, s, &queries)
}

/// Checks `h` on the queried elements. Pairs involving an element ∀ never
/// played are counted as not covered rather than failed.
pub fn validate_rep_on(rep: &PartialRep, s: &CaAtomStructure, queries: &[AtomSet]) -> Result<CheckReport> {
    if rep.dimension != s.dimension() {
        return Err(Error::Precondition("representation and structure differ in dimension".into()));
    }
    let labels = &rep.current().labels;
    let mut report = network_report(s, rep.signature, labels, Some(&rep.companion));
    report.name = "relativized-representation".into();
    let zero = s.empty_set();
    if !h_image(rep, &zero).is_empty() {
        report.fail(Counterexample::new("zero", vec![]));
    }
    let dim = s.dimension();
    for i in 0..dim {
        for j in i + 1..dim {
            let h = h_image(rep, s.diag(i, j));
            for t in labels.keys() {
                if h.contains(t) != (t[i] == t[j]) {
                    report.fail(Counterexample::new(format!("diagonal[{i},{j}]"), vec![tuple_key(t)]));
                }
            }
        }
    }
    let mut played: BTreeSet<Vec<usize>> = played_elements(s, rep).iter().map(bits::to_vec).collect();
    played.insert(Vec::new());
    let decided = |t: &Vec<usize>, a: &AtomSet| labels[t].is_subset(a) || labels[t].is_disjoint(a);
    let images: Vec<BTreeSet<Vec<usize>>> = queries.iter().map(|a| h_image(rep, a)).collect();
    for (p, a) in queries.iter().enumerate() {
        let not_a = bits::complement(a);
        if images[p].iter().any(|t| labels[t].is_subset(&not_a)) {
            report.fail(Counterexample::new("complement", vec![format!("{:?}", bits::to_vec(a))]));
        }
        for i in 0..dim {
            // one step of c_i: an edge i-equivalent to one in h(a) is never below −c_i a
            let outside = bits::complement(&s.cyl(i, a));
            for y in &images[p] {
                for t in labels.keys() {
                    if (0..dim).all(|j| j == i || t[j] == y[j]) && labels[t].is_subset(&outside) {
                        report.fail(Counterexample::new(
                            format!("cylindrifier-image[{i}]"),
                            vec![tuple_key(t), tuple_key(y)],
                        ));
                    }
                }
            }
        }
        for (q, b) in queries.iter().enumerate().skip(p + 1) {
            let meet = h_image(rep, &bits::intersection(a, b));
            let both: BTreeSet<Vec<usize>> = images[p].intersection(&images[q]).cloned().collect();
            if meet != both {
                report.fail(Counterexample::new("meet", vec![format!("#{p}"), format!("#{q}")]));
            }
            let join = h_image(rep, &bits::union(a, b));
            let either: BTreeSet<Vec<usize>> = images[p].union(&images[q]).cloned().collect();
            let exact = join.iter().filter(|t| decided(t, a) && decided(t, b)).all(|t| either.contains(t));
            if !either.is_subset(&join) || !exact {
                report.fail(Counterexample::new("join", vec![format!("#{p}"), format!("#{q}")]));
            }
            let covered = played.contains(&bits::to_vec(a)) && played.contains(&bits::to_vec(b));
            if a == b {
                continue;
            }
            if !covered {
                report.bump("not-covered-pairs", 1);
            } else if images[p] == images[q] {
                report.bump("unseparated-pairs", 1);
            } else {
                report.bump("separated-pairs", 1);
            }
        }
    }
    Ok(report.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ca::{quotient_structure, Accessibility, Flavor, QuotientKind};
    use crate::budget::Budget;
    use crate::constructions::{basic_matrices, bin};

    fn one_atom(n: usize) -> CaAtomStructure {
        let diag = vec![bits::full(1); n * n];
        let cyl = vec![Accessibility::from_keys(&[0u8]); n];
        CaAtomStructure::new(n, vec!["a".into()], diag, cyl, None, Flavor::Pta).unwrap()
    }

    #[test]
    fn two_element_algebra_needs_one_edge() {
        let s = one_atom(3);
        let (rep, report) = build_prenetwork_rep(&s, Signature::Pta, 1, &Schedule::Fair).unwrap();
        assert!(report.passed, "{:?}", report.counterexamples);
        assert_eq!(rep.current().labels.len(), 1);
        assert_eq!(rep.outcome, RepOutcome::Completed);
    }

    #[test]
    fn empty_schedule_leaves_an_empty_board() {
        let s = one_atom(2);
        let (rep, report) = build_prenetwork_rep(&s, Signature::Pta, 10, &Schedule::Moves(vec![])).unwrap();
        assert!(report.passed);
        assert!(rep.current().labels.is_empty());
        assert!(validate_rep(&rep, &s).unwrap().passed);
    }

    #[test]
    fn four_element_algebra_is_separated() {
        let s = quotient_structure(2, QuotientKind::Complement).unwrap().with_flavor(Flavor::Pta);
        assert_eq!(s.len(), 2);
        let (rep, report) = build_prenetwork_rep(&s, Signature::Pta, 12, &Schedule::Fair).unwrap();
        assert!(report.passed, "{:?}", report.counterexamples);
        let all: Vec<AtomSet> = (0..4usize).map(|c| bits::from_atoms(2, (0..2).filter(|b| c >> b & 1 == 1))).collect();
        let v = validate_rep_on(&rep, &s, &all).unwrap();
        assert!(v.passed, "{:?}", v.counterexamples);
        assert_eq!(v.stats.get("unseparated-pairs"), None);
        assert_eq!(v.stats.get("separated-pairs"), Some(&6));
        let images: BTreeSet<_> = all.iter().map(|a| h_image(&rep, a)).collect();
        assert_eq!(images.len(), 4);
    }

    #[test]
    fn matrix_algebra_survives_thirty_fair_rounds() {
        let ra = bin(3, 1, Some(1), &Budget::default()).unwrap();
        let base = basic_matrices(&ra, 3, &Budget::default()).unwrap();
        for (sig, flavor) in [(Signature::Pta, Flavor::Pta), (Signature::Ta, Flavor::Ta)] {
            let s = base.clone().with_flavor(flavor);
            let (rep, report) = build_prenetwork_rep(&s, sig, 30, &Schedule::Fair).unwrap();
            assert_eq!(rep.outcome, RepOutcome::Completed, "{sig:?}");
            assert!(report.passed, "{sig:?} {:?}", report.counterexamples);
            assert_eq!(rep.chain.len(), 31);
            let v = validate_rep(&rep, &s).unwrap();
            assert!(v.passed, "{sig:?} {:?}", v.counterexamples);
        }
    }

    #[test]
    fn illegal_scheduled_moves_are_rejected() {
        let s = one_atom(2);
        let bad = Schedule::Moves(vec![ForallMove::Dichotomy {
            edge: vec![0, 0],
            element: vec![0],
        }]);
        assert!(matches!(
            build_prenetwork_rep(&s, Signature::Pta, 1, &bad),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn unpairing_walks_the_diagonals() {
        let got: Vec<_> = (0..6).map(unpair).collect();
        assert_eq!(got, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
    }
}
