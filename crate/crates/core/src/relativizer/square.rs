//! Step-by-step construction of a relativized square representation from a
//! basis of networks.
//!
//! `M_0` is the disjoint union of every maximal strict restriction of every
//! member. Each later step takes the oldest unprocessed quadruple
//! `(N, v, k, N')`, with `v` an embedding of `N` and `N' ≡_k N`, adds one
//! fresh node `π` and copies the labels of `N'` onto the tuples through
//! `v[k ↦ π]`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::algebra::CaAtomStructure;
use crate::error::{Error, Result};
use crate::networks::hyper::{check_hyperbasis, Hypernetwork, HyperbasisOptions};
use crate::networks::network::{tuple_key, Network};
use crate::report::{CheckReport, Counterexample};

/// A labelled copy of member `member` inside the hypergraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub member: usize,
    pub map: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Defect {
    pub embedding: usize,
    pub k: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repair {
    pub defect: Defect,
    pub node: usize,
    /// Index of the embedding the repair created.
    pub created: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialHypergraph {
    pub dimension: usize,
    /// Node count of the basis members.
    pub width: usize,
    pub nodes: usize,
    pub atom_edges: BTreeMap<Vec<usize>, usize>,
    /// Cliques `v(0), …, v(width − 1)` and the member labelling them.
    pub wide_edges: BTreeMap<Vec<usize>, usize>,
    pub embeddings: Vec<Embedding>,
    pub log: Vec<Repair>,
    /// Quadruples not yet processed when the step budget ran out.
    pub pending: usize,
    /// Tuples that two steps tried to label differently; always empty on a basis.
    pub conflicts: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PartialHypergraphJson {
    pub dimension: usize,
    pub width: usize,
    pub nodes: usize,
    pub atom_edges: BTreeMap<String, String>,
    pub wide_edges: BTreeMap<String, usize>,
    pub embeddings: Vec<Embedding>,
    pub log: Vec<Repair>,
    pub pending: usize,
    pub conflicts: Vec<String>,
}

impl PartialHypergraph {
    pub fn to_json(&self, s: &CaAtomStructure) -> PartialHypergraphJson {
        PartialHypergraphJson {
            dimension: self.dimension,
            width: self.width,
            nodes: self.nodes,
            atom_edges: self.atom_edges.iter().map(|(t, &a)| (tuple_key(t), s.label(a).to_string())).collect(),
            wide_edges: self.wide_edges.iter().map(|(t, &m)| (tuple_key(t), m)).collect(),
            embeddings: self.embeddings.clone(),
            log: self.log.clone(),
            pending: self.pending,
            conflicts: self.conflicts.clone(),
        }
    }

    fn label(&mut self, t: Vec<usize>, atom: usize) {
        match self.atom_edges.get(&t) {
            Some(&old) if old != atom => self.conflicts.push(format!("{} {old}/{atom}", tuple_key(&t))),
            Some(_) => {}
            None => {
                self.atom_edges.insert(t, atom);
            }
        }
    }

    fn embed(&mut self, h: &[Network], member: usize, map: Vec<usize>) -> usize {
        let m = self.dimension;
        for_each_tuple(self.width, m, |a| {
            let t: Vec<usize> = a.iter().map(|&x| map[x]).collect();
            self.label(t, h[member].get(a));
        });
        match self.wide_edges.get(&map) {
            Some(&old) if old != member => self.conflicts.push(format!("clique {} #{old}/#{member}", tuple_key(&map))),
            Some(_) => {}
            None => {
                self.wide_edges.insert(map.clone(), member);
            }
        }
        self.embeddings.push(Embedding { member, map });
        self.embeddings.len() - 1
    }
}

fn for_each_tuple(nodes: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut t = vec![0; len];
    let total = nodes.pow(len as u32);
    for mut code in 0..total {
        for slot in t.iter_mut().rev() {
            *slot = code % nodes;
            code /= nodes;
        }
        f(&t);
    }
}

/// Classes of nodes forced equal by some tuple below a diagonal.
fn identified(net: &Network, s: &CaAtomStructure) -> Vec<usize> {
    let k = net.nodes();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let n = net.dimension();
    for idx in 0..net.tuple_count() {
        let t = net.tuple(idx);
        let a = net.labels()[idx] as usize;
        for i in 0..n {
            for j in i + 1..n {
                if t[i] != t[j] && s.below_diag(a, i, j) {
                    let (x, y) = (find(&mut parent, t[i]), find(&mut parent, t[j]));
                    parent[x.max(y)] = x.min(y);
                }
            }
        }
    }
    (0..k).map(|x| find(&mut parent, x)).collect()
}

/// Members grouped by their labels off `k`, one table per `k`. A member that
/// identifies `k` with another node is left out of the `k` table: the old
/// clique already witnesses it, so it never asks for a fresh node.
struct Agreement {
    class_of: Vec<Vec<usize>>,
    classes: Vec<Vec<Vec<usize>>>,
}

impl Agreement {
    fn new(h: &[Network], width: usize, roots: &[Vec<usize>]) -> Self {
        let mut class_of = Vec::with_capacity(width);
        let mut classes = Vec::with_capacity(width);
        for k in 0..width {
            let mut ids: HashMap<Network, usize> = HashMap::new();
            let mut lists: Vec<Vec<usize>> = Vec::new();
            let mut of = Vec::with_capacity(h.len());
            for (idx, net) in h.iter().enumerate() {
                let key = net.without_node(k);
                let next = ids.len();
                let c = *ids.entry(key).or_insert(next);
                if c == lists.len() {
                    lists.push(Vec::new());
                }
                if roots[idx].iter().enumerate().all(|(x, &r)| x == k || r != roots[idx][k]) {
                    lists[c].push(idx);
                }
                of.push(c);
            }
            class_of.push(of);
            classes.push(lists);
        }
        Agreement { class_of, classes }
    }

    fn partners(&self, member: usize, k: usize) -> &[usize] {
        &self.classes[k][self.class_of[k][member]]
    }
}

/// Runs `steps` repairs. `h` must pass the basis clauses, including closure
/// under every map on the nodes; otherwise the failing clause is named in a
/// precondition error.
pub fn build_square_rep(s: &CaAtomStructure, h: &[Network], steps: usize) -> Result<(PartialHypergraph, CheckReport)> {
    let m = s.dimension();
    let plain: Vec<Hypernetwork> = h.iter().cloned().map(Hypernetwork::plain).collect();
    let basis = check_hyperbasis(&plain, s, 1, HyperbasisOptions { symmetry: true })?;
    if let Some(c) = basis.first_failure() {
        return Err(Error::Precondition(format!(
            "not a basis: clause `{}` fails at {}",
            c.axiom,
            c.witness.join(" ")
        )));
    }
    let width = h.first().map_or(m, |x| x.nodes());
    let mut g = PartialHypergraph {
        dimension: m,
        width,
        nodes: 0,
        atom_edges: BTreeMap::new(),
        wide_edges: BTreeMap::new(),
        embeddings: Vec::new(),
        log: Vec::new(),
        pending: 0,
        conflicts: Vec::new(),
    };
    let roots: Vec<Vec<usize>> = h.iter().map(|net| identified(net, s)).collect();
    for (idx, net) in h.iter().enumerate() {
        let root = roots[idx].clone();
        let mut classes: Vec<usize> = root.clone();
        classes.sort_unstable();
        classes.dedup();
        let members: Vec<Vec<usize>> = classes.iter().map(|&c| (0..width).filter(|&x| root[x] == c).collect()).collect();
        // one maximal strict restriction per choice of representatives
        let mut choice = vec![0; members.len()];
        loop {
            let base = g.nodes;
            g.nodes += members.len();
            let map: Vec<usize> = (0..width)
                .map(|x| base + classes.binary_search(&root[x]).expect("class of a node"))
                .collect();
            let reps: Vec<usize> = members.iter().zip(&choice).map(|(c, &p)| c[p]).collect();
            // labels come from the chosen representatives
            for_each_tuple(reps.len(), m, |a| {
                let t: Vec<usize> = a.iter().map(|&c| base + c).collect();
                let orig: Vec<usize> = a.iter().map(|&c| reps[c]).collect();
                g.label(t, net.get(&orig));
            });
            g.wide_edges.entry(map.clone()).or_insert(idx);
            g.embeddings.push(Embedding { member: idx, map });
            let mut pos = 0;
            while pos < choice.len() {
                choice[pos] += 1;
                if choice[pos] < members[pos].len() {
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
            if pos == choice.len() {
                break;
            }
        }
    }
    let agree = Agreement::new(h, width, &roots);
    // FIFO over (embedding, k, partner); embeddings are only ever appended
    let (mut e, mut k, mut j) = (0usize, 0usize, 0usize);
    let mut done = 0;
    while done < steps && e < g.embeddings.len() {
        let emb = g.embeddings[e].clone();
        let partners = agree.partners(emb.member, k);
        if j >= partners.len() {
            j = 0;
            k += 1;
            if k == width {
                k = 0;
                e += 1;
            }
            continue;
        }
        let target = partners[j];
        let node = g.nodes;
        g.nodes += 1;
        let mut map = emb.map.clone();
        map[k] = node;
        let created = g.embed(h, target, map);
        g.log.push(Repair {
            defect: Defect { embedding: e, k, target },
            node,
            created,
        });
        done += 1;
        j += 1;
    }
    // remaining quadruples, counted without materializing them
    let mut pending = 0;
    for (idx, emb) in g.embeddings.iter().enumerate().skip(e) {
        for kk in 0..width {
            let total = agree.partners(emb.member, kk).len();
            pending += match (idx == e, kk.cmp(&k)) {
                (true, std::cmp::Ordering::Less) => 0,
                (true, std::cmp::Ordering::Equal) => total.saturating_sub(j),
                _ => total,
            };
        }
    }
    g.pending = pending;
    let report = validate_square(&g, s, h)?;
    Ok((g, report))
}

/// Target clauses restricted to what has been labelled so far.
pub fn validate_square(g: &PartialHypergraph, s: &CaAtomStructure, h: &[Network]) -> Result<CheckReport> {
    let m = g.dimension;
    if m != s.dimension() {
        return Err(Error::Precondition("hypergraph and structure differ in dimension".into()));
    }
    let mut report = CheckReport::new("square-representation");
    report.set("nodes", g.nodes as u64);
    report.set("atom-hyperedges", g.atom_edges.len() as u64);
    report.set("cliques", g.wide_edges.len() as u64);
    report.set("repairs", g.log.len() as u64);
    report.set("pending", g.pending as u64);
    for c in &g.conflicts {
        report.fail(Counterexample::new("single-label", vec![c.clone()]));
    }
    for (t, &a) in &g.atom_edges {
        if a >= s.len() {
            report.fail(Counterexample::new("atom", vec![tuple_key(t)]));
            continue;
        }
        for i in 0..m {
            for j in i + 1..m {
                if (t[i] == t[j]) != s.below_diag(a, i, j) {
                    report.fail(Counterexample::new(
                        "strict",
                        vec![tuple_key(t), s.label(a).into(), format!("d{i}{j}")],
                    ));
                }
            }
        }
    }
    let perms = permutations(g.width);
    let mut seen = vec![false; h.len()];
    for (idx, emb) in g.embeddings.iter().enumerate() {
        let net = &h[emb.member];
        seen[emb.member] = true;
        let mut bad = None;
        for_each_tuple(g.width, m, |a| {
            if bad.is_some() {
                return;
            }
            let t: Vec<usize> = a.iter().map(|&x| emb.map[x]).collect();
            if g.atom_edges.get(&t) != Some(&net.get(a)) {
                bad = Some(tuple_key(a));
            }
        });
        if let Some(a) = bad {
            report.fail(Counterexample::new("embedding", vec![format!("#{idx}"), a]));
        }
        for sigma in &perms {
            let image: Vec<usize> = sigma.iter().map(|&x| emb.map[x]).collect();
            if let Some(&lab) = g.wide_edges.get(&image) {
                if h[lab] != net.pullback(sigma, g.width) {
                    report.fail(Counterexample::new(
                        "symmetry",
                        vec![format!("#{idx}"), format!("sigma={sigma:?}")],
                    ));
                }
            }
        }
    }
    for r in &g.log {
        let old = &g.embeddings[r.defect.embedding];
        let new = &g.embeddings[r.created];
        let agrees = (0..g.width).all(|x| x == r.defect.k || old.map[x] == new.map[x]);
        if !agrees || new.map[r.defect.k] != r.node || new.member != r.defect.target {
            report.fail(Counterexample::new("witness", vec![format!("repair at node {}", r.node)]));
        }
    }
    for (idx, ok) in seen.iter().enumerate() {
        if !ok {
            report.fail(Counterexample::new("coverage", vec![format!("#{idx}")]));
        }
    }
    Ok(report.finalize())
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..k).collect();
    fn go(p: &mut Vec<usize>, at: usize, out: &mut Vec<Vec<usize>>) {
        if at == p.len() {
            out.push(p.clone());
            return;
        }
        for i in at..p.len() {
            p.swap(at, i);
            go(p, at + 1, out);
            p.swap(at, i);
        }
    }
    go(&mut p, 0, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ca::{Accessibility, Flavor};
    use crate::bits;
    use crate::budget::Budget;
    use crate::constructions::{bin, monk_ra};
    use crate::graphs::{graph_gen, GraphKind};
    use crate::networks::hyper::matrix_hypernetworks;

    fn one_atom(n: usize) -> CaAtomStructure {
        let diag = vec![bits::full(1); n * n];
        let cyl = vec![Accessibility::from_keys(&[0u8]); n];
        CaAtomStructure::new(n, vec!["a".into()], diag, cyl, None, Flavor::Ca).unwrap()
    }

    #[test]
    fn zero_steps_is_the_strict_restriction() {
        // the one-atom structure identifies all nodes: each choice of a
        // representative gives a one-point restriction
        let s = one_atom(3);
        let h = vec![Network::constant(3, 3, 0).unwrap()];
        let (g, report) = build_square_rep(&s, &h, 0).unwrap();
        assert!(report.passed, "{:?}", report.counterexamples);
        assert_eq!(g.nodes, 3);
        assert_eq!(g.atom_edges.len(), 3);
        assert_eq!(g.embeddings[2].map, vec![2, 2, 2]);
        // nothing here can ever need a fresh node
        assert_eq!(g.pending, 0);
    }

    #[test]
    fn matrix_basis_repairs_add_one_node_each() {
        let ra = bin(3, 1, Some(1), &Budget::default()).unwrap();
        let (ca, hs) = matrix_hypernetworks(&ra, 3, &Budget::default()).unwrap();
        let h: Vec<Network> = hs.into_iter().map(|x| x.network).collect();
        let (g0, _) = build_square_rep(&ca, &h, 0).unwrap();
        let (g, report) = build_square_rep(&ca, &h, 40).unwrap();
        assert!(report.passed, "{:?}", report.counterexamples);
        assert_eq!(g.nodes, g0.nodes + 40);
        assert_eq!(g.log.len(), 40);
        // labels of a repaired clique are copied from the target member
        for r in &g.log {
            let emb = &g.embeddings[r.created];
            for a in [[r.defect.k, 0, 1], [2, r.defect.k, r.defect.k]] {
                let t: Vec<usize> = a.iter().map(|&x| emb.map[x]).collect();
                assert_eq!(g.atom_edges[&t], h[r.defect.target].get(&a));
            }
        }
    }

    #[test]
    fn missing_member_is_a_precondition_error() {
        let g = graph_gen(GraphKind::Complete { k: 2 }).unwrap();
        let ra = monk_ra(&g, 3).unwrap();
        let (ca, hs) = matrix_hypernetworks(&ra, 3, &Budget::default()).unwrap();
        let mut h: Vec<Network> = hs.into_iter().map(|x| x.network).collect();
        h.pop();
        match build_square_rep(&ca, &h, 5) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("clause"), "{msg}"),
            other => panic!("expected a precondition error, got {other:?}"),
        }
    }
}
