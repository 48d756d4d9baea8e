//! Atomic networks: every `n`-tuple over a finite node set carries an atom.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::algebra::CaAtomStructure;
use crate::bits::{self, AtomSet};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::report::{CheckReport, Counterexample};

const UNSET: u32 = u32::MAX;

/// Labels are stored densely; tuple `(t_0, .., t_{n-1})` sits at index `Σ t_k · k^(n-1-k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Network {
    dimension: usize,
    nodes: usize,
    labels: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub dimension: usize,
    pub nodes: usize,
    pub labels: BTreeMap<String, usize>,
}

pub fn tuple_key(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn parse_tuple_key(s: &str) -> Result<Vec<usize>> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("tuple key {s:?}")))?;
    inner
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| Error::Parse(format!("tuple key {s:?}"))))
        .collect()
}

impl Network {
    pub fn new(dimension: usize, nodes: usize, labels: Vec<u32>) -> Result<Self> {
        let want = tuple_count(dimension, nodes)?;
        if labels.len() != want {
            return Err(Error::Malformed(format!(
                "network on {nodes} nodes of dimension {dimension} needs {want} labels, got {}",
                labels.len()
            )));
        }
        Ok(Network {
            dimension,
            nodes,
            labels,
        })
    }

    pub fn from_fn(dimension: usize, nodes: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let count = tuple_count(dimension, nodes)?;
        let mut labels = Vec::with_capacity(count);
        let mut t = vec![0; dimension];
        for idx in 0..count {
            decode(idx, nodes, &mut t);
            labels.push(f(&t) as u32);
        }
        Network::new(dimension, nodes, labels)
    }

    pub fn constant(dimension: usize, nodes: usize, atom: usize) -> Result<Self> {
        Network::from_fn(dimension, nodes, |_| atom)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn tuple_count(&self) -> usize {
        self.labels.len()
    }

    pub fn index(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |acc, &x| acc * self.nodes + x)
    }

    pub fn tuple(&self, idx: usize) -> Vec<usize> {
        let mut t = vec![0; self.dimension];
        decode(idx, self.nodes, &mut t);
        t
    }

    pub fn get(&self, t: &[usize]) -> usize {
        self.labels[self.index(t)] as usize
    }

    pub fn set(&mut self, t: &[usize], atom: usize) {
        let i = self.index(t);
        self.labels[i] = atom as u32;
    }

    /// `N∘map`: the network on `new_nodes` nodes with `(t_k) ↦ N(map(t_k))`.
    pub fn pullback(&self, map: &[usize], new_nodes: usize) -> Network {
        let count = new_nodes.pow(self.dimension as u32);
        let mut labels = Vec::with_capacity(count);
        let mut t = vec![0; self.dimension];
        for idx in 0..count {
            decode(idx, new_nodes, &mut t);
            let old = t.iter().fold(0, |acc, &x| acc * self.nodes + map[x]);
            labels.push(self.labels[old]);
        }
        Network {
            dimension: self.dimension,
            nodes: new_nodes,
            labels,
        }
    }

    /// Restriction to the listed nodes, renumbered in the given order.
    pub fn restrict(&self, keep: &[usize]) -> Network {
        self.pullback(keep, keep.len())
    }

    pub fn without_node(&self, z: usize) -> Network {
        let keep: Vec<usize> = (0..self.nodes).filter(|&x| x != z).collect();
        self.restrict(&keep)
    }

    /// Isomorphism-invariant relabelling together with the node order used
    /// (`perm[new] = old`).
    ///
    /// Nodes are first sorted by a refinement colour (the sorted labels of the
    /// tuples they occur in, per coordinate); ties are broken exhaustively and
    /// the lexicographically least label vector wins.
    pub fn canonical(&self) -> (Network, Vec<usize>) {
        let k = self.nodes;
        if k <= 1 {
            return (self.clone(), (0..k).collect());
        }
        let mut colour: Vec<Vec<u32>> = vec![Vec::new(); k];
        let mut t = vec![0; self.dimension];
        for (idx, &l) in self.labels.iter().enumerate() {
            decode(idx, k, &mut t);
            for (pos, &x) in t.iter().enumerate() {
                let rep = t.iter().filter(|&&y| y == x).count() as u32;
                colour[x].push((pos as u32) << 24 | rep << 16 | (l & 0xffff));
            }
        }
        for c in colour.iter_mut() {
            c.sort_unstable();
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| colour[a].cmp(&colour[b]));
        // cells of equal colour, in order
        let mut cells: Vec<Vec<usize>> = Vec::new();
        for &v in &order {
            match cells.last_mut() {
                Some(cell) if colour[cell[0]] == colour[v] => cell.push(v),
                _ => cells.push(vec![v]),
            }
        }
        let mut best: Option<(Vec<u32>, Vec<usize>)> = None;
        let mut perm = Vec::with_capacity(k);
        permute_cells(&cells, 0, &mut perm, &mut |p| {
            let cand = self.pullback(p, k).labels;
            if best.as_ref().map_or(true, |(b, _)| cand < *b) {
                best = Some((cand, p.to_vec()));
            }
        });
        let (labels, p) = best.unwrap();
        (
            Network {
                dimension: self.dimension,
                nodes: k,
                labels,
            },
            p,
        )
    }

    pub fn to_json(&self) -> NetworkJson {
        let mut labels = BTreeMap::new();
        for (idx, &l) in self.labels.iter().enumerate() {
            labels.insert(tuple_key(&self.tuple(idx)), l as usize);
        }
        NetworkJson {
            dimension: self.dimension,
            nodes: self.nodes,
            labels,
        }
    }

    pub fn from_json(j: &NetworkJson) -> Result<Self> {
        let count = tuple_count(j.dimension, j.nodes)?;
        let mut labels = vec![UNSET; count];
        for (k, &a) in &j.labels {
            let t = parse_tuple_key(k)?;
            if t.len() != j.dimension || t.iter().any(|&x| x >= j.nodes) {
                return Err(Error::Malformed(format!("tuple {k} does not fit the network")));
            }
            labels[t.iter().fold(0, |acc, &x| acc * j.nodes + x)] = a as u32;
        }
        if let Some(idx) = labels.iter().position(|&l| l == UNSET) {
            let mut t = vec![0; j.dimension];
            decode(idx, j.nodes, &mut t);
            return Err(Error::Malformed(format!("tuple {} has no label", tuple_key(&t))));
        }
        Network::new(j.dimension, j.nodes, labels)
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        format!("{}:{}", self.nodes, parts.join("."))
    }
}

fn permute_cells(cells: &[Vec<usize>], c: usize, perm: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if c == cells.len() {
        f(perm);
        return;
    }
    let mut cell = cells[c].clone();
    heap_permutations(&mut cell, &mut |p| {
        let base = perm.len();
        perm.extend_from_slice(p);
        permute_cells(cells, c + 1, perm, f);
        perm.truncate(base);
    });
}

fn heap_permutations(items: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    fn go(k: usize, items: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if k <= 1 {
            f(items);
            return;
        }
        for i in 0..k - 1 {
            go(k - 1, items, f);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
        go(k - 1, items, f);
    }
    let n = items.len();
    go(n, items, f);
}

pub(crate) fn decode(mut idx: usize, nodes: usize, t: &mut [usize]) {
    for slot in t.iter_mut().rev() {
        *slot = idx % nodes.max(1);
        idx /= nodes.max(1);
    }
}

fn tuple_count(dimension: usize, nodes: usize) -> Result<usize> {
    nodes
        .checked_pow(dimension as u32)
        .filter(|&c| c <= 1 << 26)
        .ok_or_else(|| Error::budget("network tuples", (nodes as u128).saturating_pow(dimension as u32), 1u128 << 26))
}

/// Forward and backward cylindrifier images of single atoms, cached per structure.
pub(crate) struct Neighbourhoods {
    /// `allowed[i][b]`: atoms `a` with `a ∈ c_i{b}` and `b ∈ c_i{a}`.
    pub allowed: Vec<Vec<AtomSet>>,
    pub diag: Vec<AtomSet>,
}

impl Neighbourhoods {
    pub fn new(s: &CaAtomStructure) -> Self {
        let n = s.dimension();
        let k = s.len();
        let allowed = (0..n)
            .map(|i| {
                let acc = s.cyl_acc(i);
                let mut back = vec![bits::empty(k); k];
                for a in 0..k {
                    for &b in acc.successors(a) {
                        back[b as usize].insert(a);
                    }
                }
                (0..k)
                    .map(|b| {
                        let fwd = bits::from_atoms(k, acc.successors(b).iter().map(|&x| x as usize));
                        bits::intersection(&fwd, &back[b])
                    })
                    .collect()
            })
            .collect();
        let diag = (0..n * n).map(|p| s.diag(p / n, p % n).clone()).collect();
        Neighbourhoods { allowed, diag }
    }
}

/// Checks the diagonal, cylindrifier and (when present) transposition clauses.
pub fn validate_network(net: &Network, s: &CaAtomStructure) -> Result<CheckReport> {
    if net.dimension != s.dimension() {
        return Err(Error::Precondition(format!(
            "network dimension {} differs from structure dimension {}",
            net.dimension,
            s.dimension()
        )));
    }
    if let Some(&bad) = net.labels.iter().find(|&&l| l as usize >= s.len()) {
        return Err(Error::Malformed(format!("label {bad} is not an atom")));
    }
    let n = net.dimension;
    let k = net.nodes;
    let mut report = CheckReport::new("network");
    let mut t = vec![0; n];
    for idx in 0..net.labels.len() {
        decode(idx, k, &mut t);
        let a = net.labels[idx] as usize;
        for i in 0..n {
            for j in 0..n {
                if i < j && t[i] == t[j] && !s.below_diag(a, i, j) {
                    report.fail(Counterexample::new(
                        format!("diagonal[{i},{j}]"),
                        vec![tuple_key(&t), s.label(a).into()],
                    ));
                }
            }
        }
        for i in 0..n {
            let orig = t[i];
            for d in 0..k {
                if d == orig {
                    continue;
                }
                t[i] = d;
                let b = net.get(&t);
                if !s.cyl_acc(i).related(a, b) {
                    let variant = tuple_key(&t);
                    t[i] = orig;
                    report.fail(Counterexample::new(
                        format!("cylindrifier[{i}]"),
                        vec![tuple_key(&t), variant, s.label(a).into(), s.label(b).into()],
                    ));
                }
                t[i] = orig;
            }
        }
        if s.has_subst() {
            for i in 0..n {
                for j in i + 1..n {
                    t.swap(i, j);
                    let b = net.get(&t);
                    t.swap(i, j);
                    if s.transpose_atom(i, j, a) != Some(b) {
                        report.fail(Counterexample::new(
                            format!("substitution[{i},{j}]"),
                            vec![tuple_key(&t), s.label(a).into(), s.label(b).into()],
                        ));
                    }
                }
            }
        }
        report.bump("tuples", 1);
    }
    Ok(report.finalize())
}

/// Depth-first completion of a partial labelling; `partial` uses `u32::MAX` for
/// unknown tuples. Known labels are assumed mutually consistent. The callback
/// sees each valid completion in lexicographic order of the label vector.
pub(crate) fn for_each_completion(
    s: &CaAtomStructure,
    nb: &Neighbourhoods,
    dimension: usize,
    nodes: usize,
    partial: &mut Vec<u32>,
    search_limit: usize,
    f: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
) -> Result<()> {
    let free: Vec<usize> = (0..partial.len()).filter(|&i| partial[i] == UNSET).collect();
    let mut steps = 0usize;
    let mut t = vec![0; dimension];
    fn go(
        s: &CaAtomStructure,
        nb: &Neighbourhoods,
        n: usize,
        k: usize,
        free: &[usize],
        pos: usize,
        labels: &mut Vec<u32>,
        t: &mut Vec<usize>,
        steps: &mut usize,
        limit: usize,
        f: &mut dyn FnMut(&[u32]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>> {
        if pos == free.len() {
            return Ok(f(labels));
        }
        *steps += 1;
        if *steps > limit {
            return Err(Error::budget("network search steps", *steps, limit));
        }
        let idx = free[pos];
        decode(idx, k, t);
        let mut cand = bits::full(s.len());
        for i in 0..n {
            for j in i + 1..n {
                if t[i] == t[j] {
                    cand.intersect_with(&nb.diag[i * n + j]);
                }
            }
        }
        let stride: Vec<usize> = (0..n).map(|p| k.pow((n - 1 - p) as u32)).collect();
        for i in 0..n {
            for d in 0..k {
                if d == t[i] {
                    continue;
                }
                let other = idx + d * stride[i] - t[i] * stride[i];
                let l = labels[other];
                if l != UNSET {
                    cand.intersect_with(&nb.allowed[i][l as usize]);
                }
            }
        }
        let mut forced: Option<usize> = None;
        if s.has_subst() {
            for i in 0..n {
                for j in i + 1..n {
                    if t[i] == t[j] {
                        let keep: Vec<usize> = cand.ones().filter(|&a| s.transpose_atom(i, j, a) == Some(a)).collect();
                        cand = bits::from_atoms(s.len(), keep);
                        continue;
                    }
                    let other = idx + t[j] * stride[i] + t[i] * stride[j] - t[i] * stride[i] - t[j] * stride[j];
                    let l = labels[other];
                    if l != UNSET {
                        // N(t∘[i,j]) = s_[ij] N(t) and the reverse
                        let keep: Vec<usize> = cand
                            .ones()
                            .filter(|&a| {
                                s.transpose_atom(i, j, a) == Some(l as usize)
                                    && s.transpose_atom(i, j, l as usize) == Some(a)
                            })
                            .collect();
                        cand = bits::from_atoms(s.len(), keep);
                    }
                }
            }
            if cand.count_ones(..) == 1 {
                forced = cand.ones().next();
            }
        }
        let choices: Vec<usize> = match forced {
            Some(a) => vec![a],
            None => cand.ones().collect(),
        };
        for a in choices {
            labels[idx] = a as u32;
            if go(s, nb, n, k, free, pos + 1, labels, t, steps, limit, f)?.is_break() {
                labels[idx] = UNSET;
                return Ok(ControlFlow::Break(()));
            }
        }
        labels[idx] = UNSET;
        Ok(ControlFlow::Continue(()))
    }
    go(s, nb, dimension, nodes, &free, 0, partial, &mut t, &mut steps, search_limit, f).map(|_| ())
}

/// All valid networks on nodes `0..k`, ordered by label vector.
pub fn enumerate_networks(s: &CaAtomStructure, k: usize, budget: &Budget) -> Result<Vec<Network>> {
    let n = s.dimension();
    if k < n {
        return Err(Error::InvalidParameter(format!(
            "networks need at least {n} nodes, got {k}"
        )));
    }
    let count = tuple_count(n, k)?;
    let nb = Neighbourhoods::new(s);
    let mut partial = vec![UNSET; count];
    let mut out = Vec::new();
    let mut overflow = false;
    for_each_completion(s, &nb, n, k, &mut partial, budget.states.saturating_mul(16), &mut |labels| {
        out.push(Network {
            dimension: n,
            nodes: k,
            labels: labels.to_vec(),
        });
        if out.len() > budget.states {
            overflow = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    if overflow {
        return Err(Error::budget("networks", out.len(), budget.states));
    }
    Ok(out)
}

/// Valid one-node extensions of `net` in which the tuples in `fixed`
/// (over the enlarged node set) carry the given atoms.
pub fn extensions(
    s: &CaAtomStructure,
    net: &Network,
    fixed: &[(Vec<usize>, usize)],
    budget: &Budget,
) -> Result<Vec<Network>> {
    let n = net.dimension;
    let k = net.nodes + 1;
    let grown = grow(net);
    let mut partial = grown.labels;
    for (t, a) in fixed {
        let idx = t.iter().fold(0, |acc, &x| acc * k + x);
        if partial[idx] != UNSET && partial[idx] != *a as u32 {
            return Ok(Vec::new());
        }
        partial[idx] = *a as u32;
    }
    let nb = Neighbourhoods::new(s);
    // fixed labels must agree with the known part before the search treats them as given
    let fixed_ok = fixed.iter().all(|(t, a)| {
        let idx = t.iter().fold(0, |acc, &x| acc * k + x);
        admissible(s, &nb, n, k, &partial, idx, *a)
    });
    if !fixed_ok {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for_each_completion(s, &nb, n, k, &mut partial, budget.states.saturating_mul(16), &mut |labels| {
        out.push(Network {
            dimension: n,
            nodes: k,
            labels: labels.to_vec(),
        });
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Copies `net` onto `k + 1` nodes, leaving every tuple through the new node unset.
fn grow(net: &Network) -> Network {
    let n = net.dimension;
    let k = net.nodes + 1;
    let count = k.pow(n as u32);
    let mut labels = vec![UNSET; count];
    let mut t = vec![0; n];
    for (idx, slot) in labels.iter_mut().enumerate() {
        decode(idx, k, &mut t);
        if t.iter().all(|&x| x < net.nodes) {
            *slot = net.labels[net.index(&t)];
        }
    }
    Network {
        dimension: n,
        nodes: k,
        labels,
    }
}

fn admissible(s: &CaAtomStructure, nb: &Neighbourhoods, n: usize, k: usize, labels: &[u32], idx: usize, a: usize) -> bool {
    let mut t = vec![0; n];
    decode(idx, k, &mut t);
    for i in 0..n {
        for j in i + 1..n {
            if t[i] == t[j] && !nb.diag[i * n + j].contains(a) {
                return false;
            }
        }
    }
    for i in 0..n {
        let orig = t[i];
        for d in 0..k {
            if d == orig {
                continue;
            }
            t[i] = d;
            let l = labels[t.iter().fold(0, |acc, &x| acc * k + x)];
            t[i] = orig;
            if l != UNSET && !nb.allowed[i][l as usize].contains(a) {
                return false;
            }
        }
    }
    if s.has_subst() {
        for i in 0..n {
            for j in i + 1..n {
                t.swap(i, j);
                let l = labels[t.iter().fold(0, |acc, &x| acc * k + x)];
                t.swap(i, j);
                if l != UNSET && s.transpose_atom(i, j, a) != Some(l as usize) {
                    return false;
                }
            }
        }
    }
    true
}
