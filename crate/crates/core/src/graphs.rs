//! Finite simple graphs with exact chromatic number and girth.
//!
//! Edges are stored irreflexively even though a reflexive edge relation is
//! sometimes assumed in the literature; loops would make every set dependent.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphJson {
    nodes: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;
    fn try_from(j: GraphJson) -> Result<Self> {
        Graph::from_edges(j.nodes, j.edges.iter().map(|&[a, b]| (a, b)))
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            nodes: g.node_count(),
            edges: g.edges().map(|(a, b)| [a, b]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum GraphKind {
    Complete { k: usize },
    Cycle { k: usize },
    DisjointCliques { count: usize, size: usize },
    Interval { size: usize, n: usize },
    ErdosSample { size: usize, p: f64, seed: u64 },
}

impl Graph {
    pub fn empty(nodes: usize) -> Self {
        Graph {
            adj: vec![BTreeSet::new(); nodes],
        }
    }

    /// Loops in the input are dropped; out-of-range endpoints are an error.
    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(nodes: usize, edges: I) -> Result<Self> {
        let mut g = Graph::empty(nodes);
        for (a, b) in edges {
            if a >= nodes || b >= nodes {
                return Err(Error::Malformed(format!("edge ({a},{b}) outside {nodes} nodes")));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbours(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[a].iter().copied()
    }

    pub fn degree(&self, a: usize) -> usize {
        self.adj[a].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.range(a + 1..).map(move |&b| (a, b)))
    }

    /// No two members are adjacent.
    pub fn is_independent(&self, nodes: &[usize]) -> bool {
        nodes
            .iter()
            .enumerate()
            .all(|(i, &a)| nodes[i + 1..].iter().all(|&b| !self.has_edge(a, b)))
    }

    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.node_count();
        let mut g = Graph::empty(off + other.node_count());
        for (a, b) in self.edges() {
            g.add_edge(a, b);
        }
        for (a, b) in other.edges() {
            g.add_edge(a + off, b + off);
        }
        g
    }

    pub fn component_count(&self) -> usize {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for w in self.neighbours(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    /// `k` on the first line, then one `i j` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.node_count());
        for (a, b) in self.edges() {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let nodes: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty edge list".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("node count: {e}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
                _ => return Err(Error::Parse(format!("bad edge line `{line}`"))),
            }
        }
        Graph::from_edges(nodes, edges)
    }
}

pub fn graph_gen(kind: GraphKind) -> Result<Graph> {
    Ok(match kind {
        GraphKind::Complete { k } => {
            let mut g = Graph::empty(k);
            for a in 0..k {
                for b in a + 1..k {
                    g.add_edge(a, b);
                }
            }
            g
        }
        GraphKind::Cycle { k } => {
            if k < 3 {
                return Err(Error::InvalidParameter("a cycle needs at least 3 nodes".into()));
            }
            Graph::from_edges(k, (0..k).map(|i| (i, (i + 1) % k)))?
        }
        GraphKind::DisjointCliques { count, size } => {
            let clique = graph_gen(GraphKind::Complete { k: size })?;
            (0..count).fold(Graph::empty(0), |g, _| g.disjoint_union(&clique))
        }
        GraphKind::Interval { size, n } => {
            let mut g = Graph::empty(size);
            for a in 0..size {
                for b in a + 1..size.min(a + n.max(1)) {
                    g.add_edge(a, b);
                }
            }
            g
        }
        GraphKind::ErdosSample { size, p, seed } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("edge probability {p} outside [0,1]")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = Graph::empty(size);
            for a in 0..size {
                for b in a + 1..size {
                    if rng.gen_bool(p) {
                        g.add_edge(a, b);
                    }
                }
            }
            g
        }
    })
}

/// Default cap on branch-and-bound search nodes for [`chromatic_number`].
pub const CHROMATIC_NODE_BUDGET: u64 = 50_000_000;

pub fn chromatic_number(g: &Graph) -> Result<usize> {
    chromatic_number_with_budget(g, CHROMATIC_NODE_BUDGET)
}

/// Exact χ by DSATUR branch and bound, seeded with a greedy upper bound and a clique lower bound.
pub fn chromatic_number_with_budget(g: &Graph, budget: u64) -> Result<usize> {
    let n = g.node_count();
    if n == 0 {
        return Ok(0);
    }
    let lower = greedy_clique(g).len();
    let mut best = greedy_colouring_bound(g);
    if best == lower {
        return Ok(best);
    }
    let mut colour = vec![usize::MAX; n];
    let mut visited = 0u64;
    dsatur(g, &mut colour, 0, 0, lower, &mut best, &mut visited, budget)?;
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn dsatur(
    g: &Graph,
    colour: &mut [usize],
    coloured: usize,
    used: usize,
    lower: usize,
    best: &mut usize,
    visited: &mut u64,
    budget: u64,
) -> Result<()> {
    *visited += 1;
    if *visited > budget {
        return Err(Error::budget("colouring search nodes", *visited, budget));
    }
    if coloured == g.node_count() {
        *best = (*best).min(used);
        return Ok(());
    }
    // vertex of maximal saturation, ties broken by degree then index
    let mut pick = None;
    let mut pick_key = (0usize, 0usize);
    for v in (0..g.node_count()).filter(|&v| colour[v] == usize::MAX) {
        let sat: BTreeSet<usize> = g.neighbours(v).map(|w| colour[w]).filter(|&c| c != usize::MAX).collect();
        let key = (sat.len(), g.degree(v));
        if pick.is_none() || key > pick_key {
            pick = Some(v);
            pick_key = key;
        }
    }
    let v = pick.expect("an uncoloured vertex remains");
    for c in 0..=used {
        let next_used = used.max(c + 1);
        if next_used >= *best {
            break;
        }
        if g.neighbours(v).any(|w| colour[w] == c) {
            continue;
        }
        colour[v] = c;
        dsatur(g, colour, coloured + 1, next_used, lower, best, visited, budget)?;
        colour[v] = usize::MAX;
        if *best == lower {
            return Ok(());
        }
    }
    Ok(())
}

/// Number of colours used by the largest-first greedy colouring.
pub fn greedy_colouring_bound(g: &Graph) -> usize {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    let mut colour = vec![usize::MAX; n];
    let mut used = 0;
    for v in order {
        let taken: BTreeSet<usize> = g.neighbours(v).map(|w| colour[w]).collect();
        let c = (0..).find(|c| !taken.contains(c)).unwrap();
        colour[v] = c;
        used = used.max(c + 1);
    }
    used
}

/// A clique found greedily from each start vertex; the largest one is returned.
pub fn greedy_clique(g: &Graph) -> Vec<usize> {
    let mut best = Vec::new();
    for s in 0..g.node_count() {
        let mut clique = vec![s];
        let mut cand: Vec<usize> = g.neighbours(s).collect();
        cand.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
        for v in cand {
            if clique.iter().all(|&u| g.has_edge(u, v)) {
                clique.push(v);
            }
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best
}

/// Length of a shortest cycle, or `None` for forests.
pub fn girth(g: &Graph) -> Option<usize> {
    let n = g.node_count();
    let mut best: Option<usize> = None;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            if let Some(b) = best {
                if 2 * dist[v] + 1 >= b {
                    break;
                }
            }
            for w in g.neighbours(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = v;
                    q.push_back(w);
                } else if parent[v] != w {
                    let len = dist[v] + dist[w] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_chromatic(g: &Graph) -> usize {
        let n = g.node_count();
        if n == 0 {
            return 0;
        }
        for k in 1..=n {
            let mut colour = vec![0usize; n];
            loop {
                if g.edges().all(|(a, b)| colour[a] != colour[b]) {
                    return k;
                }
                let mut i = 0;
                while i < n {
                    colour[i] += 1;
                    if colour[i] < k {
                        break;
                    }
                    colour[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
        n
    }

    #[test]
    fn generator_counts() {
        assert_eq!(graph_gen(GraphKind::Complete { k: 3 }).unwrap().edge_count(), 3);
        assert_eq!(graph_gen(GraphKind::Interval { size: 5, n: 3 }).unwrap().edge_count(), 7);
        let dc = graph_gen(GraphKind::DisjointCliques { count: 2, size: 3 }).unwrap();
        assert_eq!((dc.node_count(), dc.edge_count(), dc.component_count()), (6, 6, 2));
    }

    #[test]
    fn chromatic_examples() {
        assert_eq!(chromatic_number(&graph_gen(GraphKind::Complete { k: 3 }).unwrap()).unwrap(), 3);
        assert_eq!(chromatic_number(&graph_gen(GraphKind::Cycle { k: 5 }).unwrap()).unwrap(), 3);
        let iv = graph_gen(GraphKind::Interval { size: 10, n: 3 }).unwrap();
        assert_eq!(chromatic_number(&iv).unwrap(), 3);
        // the certificate i mod 3
        assert!(iv.edges().all(|(a, b)| a % 3 != b % 3));
        assert!(iv.has_edge(0, 1) && iv.has_edge(1, 2) && iv.has_edge(0, 2));
    }

    #[test]
    fn girth_examples() {
        assert_eq!(girth(&graph_gen(GraphKind::Cycle { k: 5 }).unwrap()), Some(5));
        assert_eq!(girth(&graph_gen(GraphKind::Complete { k: 3 }).unwrap()), Some(3));
        let path = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(girth(&path), None);
        let petersen = Graph::from_edges(
            10,
            [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5), (1, 6), (2, 7), (3, 8), (4, 9), (5, 7), (7, 9), (9, 6), (6, 8), (8, 5)],
        )
        .unwrap();
        assert_eq!(girth(&petersen), Some(5));
        assert_eq!(chromatic_number(&petersen).unwrap(), 3);
    }

    #[test]
    fn edge_list_and_json_round_trip() {
        let g = graph_gen(GraphKind::Cycle { k: 6 }).unwrap();
        assert_eq!(Graph::from_edge_list(&g.to_edge_list()).unwrap(), g);
        let j = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<Graph>(&j).unwrap(), g);
        assert!(Graph::from_edge_list("3\n0 7\n").is_err());
        assert!(Graph::from_edge_list("x").is_err());
    }

    #[test]
    fn erdos_sample_is_deterministic() {
        let a = graph_gen(GraphKind::ErdosSample { size: 12, p: 0.3, seed: 7 }).unwrap();
        let b = graph_gen(GraphKind::ErdosSample { size: 12, p: 0.3, seed: 7 }).unwrap();
        assert_eq!(a, b);
    }

    fn arb_graph(max: usize) -> impl Strategy<Value = Graph> {
        (1..=max).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let mut g = Graph::empty(n);
                let mut it = bits.into_iter();
                for a in 0..n {
                    for b in a + 1..n {
                        if it.next().unwrap() {
                            g.add_edge(a, b);
                        }
                    }
                }
                g
            })
        })
    }

    proptest! {
        #[test]
        fn chromatic_matches_brute_force_and_bounds(g in arb_graph(7)) {
            let chi = chromatic_number(&g).unwrap();
            prop_assert_eq!(chi, brute_chromatic(&g));
            prop_assert!(greedy_clique(&g).len() <= chi);
            prop_assert!(chi <= greedy_colouring_bound(&g));
        }

        #[test]
        fn chromatic_of_disjoint_union_is_max(g in arb_graph(6), h in arb_graph(6)) {
            let u = g.disjoint_union(&h);
            prop_assert_eq!(
                chromatic_number(&u).unwrap(),
                chromatic_number(&g).unwrap().max(chromatic_number(&h).unwrap())
            );
        }
    }
}
