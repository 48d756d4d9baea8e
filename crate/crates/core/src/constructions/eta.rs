//! The polyadic atom structure η(Γ) built from a graph.
//!
//! Atoms are pairs `(K, ∼)` of a partial map `K : n → Γ×n` and an equivalence
//! `∼` on `n`. Two nodes `(x, i)`, `(y, j)` of `Γ×n` are adjacent when `{x, y}`
//! is an edge of Γ.

use std::collections::HashMap;

use crate::algebra::ca::{pair_index, Accessibility, CaAtomStructure, Flavor};
use crate::bits;
use crate::error::{Error, Result};
use crate::graphs::Graph;

/// `K(i)` as `(node of Γ, copy)`, or `None` when undefined.
pub type KValue = Option<(usize, usize)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EtaAtom {
    pub k: Vec<KValue>,
    /// Restricted-growth encoding of `∼`: `classes[i]` is the class of `i`,
    /// numbered in order of first appearance.
    pub classes: Vec<usize>,
}

impl EtaAtom {
    pub fn equiv(&self, i: usize, j: usize) -> bool {
        self.classes[i] == self.classes[j]
    }

    pub fn class_count(&self) -> usize {
        self.classes.iter().max().map_or(0, |m| m + 1)
    }

    /// `τ(K, ∼) = (K∘τ, ∼∘τ)` where `∼∘τ` relates `a, b` when `τ(a) ∼ τ(b)`.
    pub fn permute(&self, tau: &[usize]) -> EtaAtom {
        let k = tau.iter().map(|&t| self.k[t]).collect();
        let raw: Vec<usize> = tau.iter().map(|&t| self.classes[t]).collect();
        EtaAtom { k, classes: normalize(&raw) }
    }

    fn label(&self) -> String {
        let k: Vec<String> = self
            .k
            .iter()
            .map(|v| match v {
                None => "_".into(),
                Some((x, c)) => format!("{x}.{c}"),
            })
            .collect();
        let cls: Vec<String> = self.classes.iter().map(|c| c.to_string()).collect();
        format!("K[{}]~[{}]", k.join(" "), cls.join(""))
    }
}

fn normalize(raw: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    raw.iter()
        .map(|c| {
            let next = map.len();
            *map.entry(*c).or_insert(next)
        })
        .collect()
}

/// All restricted-growth strings of length `n` (one per equivalence relation).
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let top = cur.iter().max().map_or(0, |m| m + 1);
        for c in 0..=top {
            cur.push(c);
            go(n, cur, out);
            cur.pop();
        }
    }
    go(n, &mut cur, &mut out);
    out
}

/// Enumerates the atoms of η(Γ) in a fixed order.
pub fn eta_atoms(g: &Graph, n: usize) -> Vec<EtaAtom> {
    let nodes: Vec<(usize, usize)> = (0..g.node_count()).flat_map(|x| (0..n).map(move |c| (x, c))).collect();
    let mut out = Vec::new();
    for classes in set_partitions(n) {
        let count = classes.iter().max().unwrap() + 1;
        if count == n {
            let mut idx = vec![0usize; n];
            if nodes.is_empty() {
                continue;
            }
            loop {
                let k: Vec<KValue> = idx.iter().map(|&t| Some(nodes[t])).collect();
                let dependent = (0..n).any(|a| {
                    (a + 1..n).any(|b| {
                        let (x, y) = (k[a].unwrap().0, k[b].unwrap().0);
                        g.has_edge(x, y)
                    })
                });
                if dependent {
                    out.push(EtaAtom { k, classes: classes.clone() });
                }
                let mut p = 0;
                while p < n {
                    idx[p] += 1;
                    if idx[p] < nodes.len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p == n {
                    break;
                }
            }
        } else if count + 1 == n {
            let pair: Vec<usize> = (0..n)
                .filter(|&i| classes.iter().filter(|&&c| c == classes[i]).count() == 2)
                .collect();
            for &v in &nodes {
                let mut k = vec![None; n];
                k[pair[0]] = Some(v);
                k[pair[1]] = Some(v);
                out.push(EtaAtom { k, classes: classes.clone() });
            }
        } else {
            out.push(EtaAtom {
                k: vec![None; n],
                classes,
            });
        }
    }
    out.sort();
    out
}

/// `≡_i`: equal `K(i)` and equal `∼` off `i`.
pub fn eta_equiv_i(a: &EtaAtom, b: &EtaAtom, i: usize) -> bool {
    let n = a.k.len();
    a.k[i] == b.k[i]
        && (0..n)
            .filter(|&x| x != i)
            .all(|x| (0..n).filter(|&y| y != i).all(|y| a.equiv(x, y) == b.equiv(x, y)))
}

/// `≡_ij` as defined on pairs (not via the transposition map).
pub fn eta_equiv_ij(a: &EtaAtom, b: &EtaAtom, i: usize, j: usize) -> bool {
    let n = a.k.len();
    if a.k[i] != b.k[j] || a.k[j] != b.k[i] {
        return false;
    }
    if (0..n).filter(|&x| x != i && x != j).any(|x| a.k[x] != b.k[x]) {
        return false;
    }
    if a.equiv(i, j) {
        a.classes == b.classes
    } else {
        let mut tau: Vec<usize> = (0..n).collect();
        tau.swap(i, j);
        (0..n).all(|x| (0..n).all(|y| b.equiv(x, y) == a.equiv(tau[x], tau[y])))
    }
}

/// The structure η(Γ) of dimension `n` (flavour `Pea`).
pub fn eta_pea(g: &Graph, n: usize) -> Result<CaAtomStructure> {
    eta_pea_with_atoms(g, n).map(|(s, _)| s)
}

pub fn eta_pea_with_atoms(g: &Graph, n: usize) -> Result<(CaAtomStructure, Vec<EtaAtom>)> {
    if n < 3 {
        return Err(Error::InvalidParameter("η(Γ) needs dimension n ≥ 3".into()));
    }
    let atoms = eta_atoms(g, n);
    let k = atoms.len();
    if k == 0 {
        return Err(Error::InvalidParameter("η(Γ) has no atoms".into()));
    }
    let index: HashMap<&EtaAtom, usize> = atoms.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut diag = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            diag.push(bits::from_atoms(k, (0..k).filter(|&a| atoms[a].equiv(i, j))));
        }
    }
    let cyl = (0..n)
        .map(|i| {
            // K(i) together with ∼ restricted to n∖{i} is a complete invariant of ≡_i
            let keys: Vec<(KValue, Vec<bool>)> = atoms
                .iter()
                .map(|a| {
                    let rel = (0..n)
                        .flat_map(|x| (0..n).map(move |y| (x, y)))
                        .filter(|&(x, y)| x != i && y != i)
                        .map(|(x, y)| a.equiv(x, y))
                        .collect();
                    (a.k[i], rel)
                })
                .collect();
            Accessibility::from_keys(&keys)
        })
        .collect();
    let mut subst = vec![Vec::new(); n * (n - 1) / 2];
    for i in 0..n {
        for j in i + 1..n {
            let mut tau: Vec<usize> = (0..n).collect();
            tau.swap(i, j);
            let mut map = Vec::with_capacity(k);
            for a in &atoms {
                let image = a.permute(&tau);
                let b = *index.get(&image).ok_or_else(|| {
                    Error::Malformed(format!("η(Γ) not closed under [{i},{j}]: {}", a.label()))
                })?;
                map.push(b as u32);
            }
            subst[pair_index(n, i, j)] = map;
        }
    }
    let labels = atoms.iter().map(EtaAtom::label).collect();
    let s = CaAtomStructure::new(n, labels, diag, cyl, Some(subst), Flavor::Pea)?;
    Ok((s, atoms))
}
