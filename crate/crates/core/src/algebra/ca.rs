//! Finite n-dimensional cylindric-type atom structures and their complex algebras.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{self, AtomSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavor {
    Df,
    Ca,
    Pta,
    Ta,
    Pea,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flavor::Df => "Df",
            Flavor::Ca => "Ca",
            Flavor::Pta => "Pta",
            Flavor::Ta => "Ta",
            Flavor::Pea => "Pea",
        };
        f.write_str(s)
    }
}

impl Flavor {
    pub fn has_diagonals(self) -> bool {
        self != Flavor::Df
    }

    pub fn has_transpositions(self) -> bool {
        matches!(self, Flavor::Pta | Flavor::Ta | Flavor::Pea)
    }
}

/// An accessibility relation on atoms.
///
/// Equivalence relations (the common case for cylindrifiers) are stored as a
/// partition, which keeps structures with tens of thousands of atoms cheap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Accessibility {
    Partition {
        class_of: Vec<u32>,
        classes: Vec<Vec<u32>>,
    },
    Relation(Vec<Vec<u32>>),
}

impl Accessibility {
    /// Builds a partition from a class key per atom. Atoms with equal keys are related.
    pub fn from_keys<K: Ord + Clone>(keys: &[K]) -> Self {
        let mut order: Vec<usize> = (0..keys.len()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
        let mut class_of = vec![0u32; keys.len()];
        let mut classes: Vec<Vec<u32>> = Vec::new();
        for (pos, &a) in order.iter().enumerate() {
            if pos == 0 || keys[order[pos - 1]] != keys[a] {
                classes.push(Vec::new());
            }
            class_of[a] = (classes.len() - 1) as u32;
            classes.last_mut().unwrap().push(a as u32);
        }
        // renumber classes by smallest member so the layout does not depend on key order
        let mut firsts: Vec<(u32, usize)> = classes.iter().enumerate().map(|(i, c)| (c[0], i)).collect();
        firsts.sort();
        let mut renum = vec![0u32; classes.len()];
        for (new, &(_, old)) in firsts.iter().enumerate() {
            renum[old] = new as u32;
        }
        let mut sorted = vec![Vec::new(); classes.len()];
        for (old, c) in classes.into_iter().enumerate() {
            sorted[renum[old] as usize] = c;
        }
        for c in class_of.iter_mut() {
            *c = renum[*c as usize];
        }
        Accessibility::Partition { class_of, classes: sorted }
    }

    pub fn from_pairs(k: usize, pairs: &[(usize, usize)]) -> Self {
        let mut succ = vec![Vec::new(); k];
        for &(a, b) in pairs {
            succ[a].push(b as u32);
        }
        for s in succ.iter_mut() {
            s.sort_unstable();
            s.dedup();
        }
        Accessibility::Relation(succ)
    }

    pub fn len(&self) -> usize {
        match self {
            Accessibility::Partition { class_of, .. } => class_of.len(),
            Accessibility::Relation(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn successors(&self, a: usize) -> &[u32] {
        match self {
            Accessibility::Partition { class_of, classes } => &classes[class_of[a] as usize],
            Accessibility::Relation(s) => &s[a],
        }
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        match self {
            Accessibility::Partition { class_of, .. } => class_of[a] == class_of[b],
            Accessibility::Relation(s) => s[a].binary_search(&(b as u32)).is_ok(),
        }
    }

    pub fn image(&self, x: &AtomSet) -> AtomSet {
        let mut out = bits::empty(self.len());
        match self {
            Accessibility::Partition { class_of, classes } => {
                let mut done = bits::empty(classes.len());
                for a in x.ones() {
                    let c = class_of[a] as usize;
                    if !done.put(c) {
                        for &b in &classes[c] {
                            out.insert(b as usize);
                        }
                    }
                }
            }
            Accessibility::Relation(s) => {
                for a in x.ones() {
                    for &b in &s[a] {
                        out.insert(b as usize);
                    }
                }
            }
        }
        out
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|a| self.successors(a).iter().map(move |&b| (a, b as usize)))
            .collect()
    }

    pub fn is_partition(&self) -> bool {
        matches!(self, Accessibility::Partition { .. })
    }

    /// Converts to an explicit relation, dropping the partition shortcut.
    pub fn to_relation(&self) -> Accessibility {
        Accessibility::Relation((0..self.len()).map(|a| self.successors(a).to_vec()).collect())
    }

    /// Reports the first pair violating reflexivity, symmetry or transitivity.
    pub fn first_non_reflexive(&self) -> Option<usize> {
        (0..self.len()).find(|&a| !self.related(a, a))
    }

    pub fn first_non_symmetric(&self) -> Option<(usize, usize)> {
        if self.is_partition() {
            return None;
        }
        (0..self.len()).find_map(|a| {
            self.successors(a)
                .iter()
                .find(|&&b| !self.related(b as usize, a))
                .map(|&b| (a, b as usize))
        })
    }

    pub fn first_non_transitive(&self) -> Option<(usize, usize, usize)> {
        if self.is_partition() {
            return None;
        }
        for a in 0..self.len() {
            for &b in self.successors(a) {
                for &c in self.successors(b as usize) {
                    if !self.related(a, c as usize) {
                        return Some((a, b as usize, c as usize));
                    }
                }
            }
        }
        None
    }
}

/// Index of the unordered pair `{i, j}` (i ≠ j) among all pairs below `n`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaAtomStructure {
    dimension: usize,
    labels: Vec<String>,
    diag: Vec<AtomSet>,
    cyl: Vec<Accessibility>,
    subst: Option<Vec<Vec<u32>>>,
    flavor: Flavor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaJson {
    pub dimension: usize,
    pub flavor: Flavor,
    pub atoms: Vec<String>,
    /// `diag[i][j]` lists the atoms below `d_ij`.
    pub diag: Vec<Vec<Vec<usize>>>,
    /// `cyl[i]` lists related pairs of atoms.
    pub cyl: Vec<Vec<[usize; 2]>>,
    /// Keyed by `"i,j"` with `i < j`; value is the atom map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subst: Option<std::collections::BTreeMap<String, Vec<usize>>>,
}

impl CaAtomStructure {
    /// `diag` is indexed `i * n + j`; `subst`, when given, holds one atom map per unordered pair.
    pub fn new(
        dimension: usize,
        labels: Vec<String>,
        diag: Vec<AtomSet>,
        cyl: Vec<Accessibility>,
        subst: Option<Vec<Vec<u32>>>,
        flavor: Flavor,
    ) -> Result<Self> {
        let k = labels.len();
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if k == 0 {
            return Err(Error::Malformed("atom structure has no atoms".into()));
        }
        if diag.len() != dimension * dimension || diag.iter().any(|d| d.len() != k) {
            return Err(Error::Malformed("diagonal table has the wrong shape".into()));
        }
        if cyl.len() != dimension || cyl.iter().any(|c| c.len() != k) {
            return Err(Error::Malformed("cylindrifier table has the wrong shape".into()));
        }
        if let Some(s) = &subst {
            if s.len() != dimension * (dimension - 1) / 2 {
                return Err(Error::Malformed("substitution table has the wrong shape".into()));
            }
            for m in s {
                if m.len() != k {
                    return Err(Error::Malformed("substitution map has the wrong length".into()));
                }
                let mut hit = bits::empty(k);
                for &b in m {
                    if b as usize >= k || hit.put(b as usize) {
                        return Err(Error::Malformed("substitution map is not a bijection".into()));
                    }
                }
            }
        }
        Ok(CaAtomStructure {
            dimension,
            labels,
            diag,
            cyl,
            subst,
            flavor,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn with_flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn diag(&self, i: usize, j: usize) -> &AtomSet {
        &self.diag[i * self.dimension + j]
    }

    pub fn below_diag(&self, a: usize, i: usize, j: usize) -> bool {
        self.diag(i, j).contains(a)
    }

    pub fn cyl_acc(&self, i: usize) -> &Accessibility {
        &self.cyl[i]
    }

    pub fn has_subst(&self) -> bool {
        self.subst.is_some()
    }

    /// Image of atom `a` under the transposition `[i, j]`; `None` without substitution data.
    pub fn transpose_atom(&self, i: usize, j: usize, a: usize) -> Option<usize> {
        if i == j {
            return Some(a);
        }
        self.subst
            .as_ref()
            .map(|s| s[pair_index(self.dimension, i, j)][a] as usize)
    }

    pub fn full(&self) -> AtomSet {
        bits::full(self.len())
    }

    pub fn empty_set(&self) -> AtomSet {
        bits::empty(self.len())
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dimension {
            return Err(Error::IndexOutOfRange {
                index: i,
                dimension: self.dimension,
            });
        }
        Ok(())
    }

    /// `c_i X`.
    pub fn cyl(&self, i: usize, x: &AtomSet) -> AtomSet {
        self.cyl[i].image(x)
    }

    /// `s^i_j X = c_i(d_ij · X)`, with `s^i_i` the identity.
    pub fn subst_ij(&self, i: usize, j: usize, x: &AtomSet) -> AtomSet {
        if i == j {
            return x.clone();
        }
        self.cyl(i, &bits::intersection(self.diag(i, j), x))
    }

    /// `t^i_j X = d_ij · c_i X`.
    pub fn t_ij(&self, i: usize, j: usize, x: &AtomSet) -> AtomSet {
        bits::intersection(self.diag(i, j), &self.cyl(i, x))
    }

    /// `s_[ij] X`; returns `None` when the structure carries no transpositions.
    pub fn transpose(&self, i: usize, j: usize, x: &AtomSet) -> Option<AtomSet> {
        if i == j {
            return Some(x.clone());
        }
        let s = self.subst.as_ref()?;
        let m = &s[pair_index(self.dimension, i, j)];
        Some(bits::from_atoms(self.len(), x.ones().map(|a| m[a] as usize)))
    }

    pub fn to_json(&self) -> CaJson {
        let n = self.dimension;
        CaJson {
            dimension: n,
            flavor: self.flavor,
            atoms: self.labels.clone(),
            diag: (0..n)
                .map(|i| (0..n).map(|j| bits::to_vec(self.diag(i, j))).collect())
                .collect(),
            cyl: self
                .cyl
                .iter()
                .map(|c| c.pairs().into_iter().map(|(a, b)| [a, b]).collect())
                .collect(),
            subst: self.subst.as_ref().map(|s| {
                let mut out = std::collections::BTreeMap::new();
                for i in 0..n {
                    for j in i + 1..n {
                        out.insert(
                            format!("{i},{j}"),
                            s[pair_index(n, i, j)].iter().map(|&b| b as usize).collect(),
                        );
                    }
                }
                out
            }),
        }
    }

    pub fn from_json(j: &CaJson) -> Result<Self> {
        let n = j.dimension;
        let k = j.atoms.len();
        if j.diag.len() != n || j.diag.iter().any(|row| row.len() != n) {
            return Err(Error::Malformed("diag must be an n×n table".into()));
        }
        let in_range = |a: usize| {
            if a < k {
                Ok(a)
            } else {
                Err(Error::Malformed(format!("atom index {a} out of range")))
            }
        };
        let mut diag = Vec::with_capacity(n * n);
        for row in &j.diag {
            for cell in row {
                let mut s = bits::empty(k);
                for &a in cell {
                    s.insert(in_range(a)?);
                }
                diag.push(s);
            }
        }
        let mut cyl = Vec::with_capacity(n);
        for rel in &j.cyl {
            let mut pairs = Vec::with_capacity(rel.len());
            for &[a, b] in rel {
                pairs.push((in_range(a)?, in_range(b)?));
            }
            cyl.push(compress(Accessibility::from_pairs(k, &pairs)));
        }
        let subst = match &j.subst {
            None => None,
            Some(map) => {
                let mut s = vec![Vec::new(); n * (n.saturating_sub(1)) / 2];
                for (key, m) in map {
                    let (i, jj) = key
                        .split_once(',')
                        .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
                        .ok_or_else(|| Error::Malformed(format!("bad transposition key `{key}`")))?;
                    if i >= n || jj >= n || i == jj {
                        return Err(Error::Malformed(format!("bad transposition key `{key}`")));
                    }
                    s[pair_index(n, i, jj)] = m.iter().map(|&a| a as u32).collect();
                }
                Some(s)
            }
        };
        CaAtomStructure::new(n, j.atoms.clone(), diag, cyl, subst, j.flavor)
    }
}

/// Replaces an explicit relation by a partition when it is an equivalence relation.
pub fn compress(rel: Accessibility) -> Accessibility {
    if rel.is_partition()
        || rel.first_non_reflexive().is_some()
        || rel.first_non_symmetric().is_some()
        || rel.first_non_transitive().is_some()
    {
        return rel;
    }
    let keys: Vec<u32> = (0..rel.len()).map(|a| rel.successors(a)[0]).collect();
    Accessibility::from_keys(&keys)
}

impl Serialize for CaAtomStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CaAtomStructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CaJson::deserialize(d)?;
        CaAtomStructure::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Which quotient of a full set structure [`random_ca_structure`] starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientKind {
    /// Functions `n → n` up to renaming of values.
    EqualityTypes,
    /// Functions `n → 2` up to swapping the two values.
    Complement,
}

/// A quotient of the full set structure by a group of value permutations.
/// Its complex algebra is the subalgebra of invariant sets, so it is
/// representable.
pub fn quotient_structure(n: usize, kind: QuotientKind) -> Result<CaAtomStructure> {
    let base = match kind {
        QuotientKind::EqualityTypes => n,
        QuotientKind::Complement => 2,
    };
    let total = base
        .checked_pow(n as u32)
        .filter(|&t| t <= 1 << 20)
        .ok_or_else(|| Error::budget("atoms", u128::MAX, 1usize << 20))?;
    let decode = |mut x: usize| {
        let mut t = vec![0; n];
        for slot in t.iter_mut() {
            *slot = x % base;
            x /= base;
        }
        t
    };
    let normal = |t: &[usize]| -> Vec<usize> {
        match kind {
            QuotientKind::EqualityTypes => {
                let mut seen: Vec<usize> = Vec::new();
                t.iter()
                    .map(|v| match seen.iter().position(|w| w == v) {
                        Some(p) => p,
                        None => {
                            seen.push(*v);
                            seen.len() - 1
                        }
                    })
                    .collect()
            }
            QuotientKind::Complement => {
                let c: Vec<usize> = t.iter().map(|v| 1 - v).collect();
                c.min(t.to_vec())
            }
        }
    };
    let reps: BTreeSet<Vec<usize>> = (0..total).map(|x| normal(&decode(x))).collect();
    let reps: Vec<Vec<usize>> = reps.into_iter().collect();
    let index = |t: &[usize]| reps.binary_search(&normal(t)).expect("normal forms are representatives");
    let k = reps.len();
    let labels = reps.iter().map(|t| t.iter().map(|v| v.to_string()).collect::<String>()).collect();
    let mut diag = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            diag.push(bits::from_atoms(k, (0..k).filter(|&a| reps[a][i] == reps[a][j])));
        }
    }
    let cyl = (0..n)
        .map(|i| {
            let mut pairs = Vec::new();
            for x in 0..total {
                let t = decode(x);
                for v in 0..base {
                    let mut u = t.clone();
                    u[i] = v;
                    pairs.push((index(&t), index(&u)));
                }
            }
            Accessibility::from_pairs(k, &pairs)
        })
        .collect();
    CaAtomStructure::new(n, labels, diag, cyl, None, Flavor::Ca)
}

/// A random perturbation of a representable quotient structure.
///
/// Atoms are shuffled; then, independently with probability `noise`, two
/// cylindrifier classes of some `c_i` are merged and one atom's membership
/// in some `d_ij = d_ji` (`i ≠ j`) is flipped. With `noise = 0` the result is
/// isomorphic to the starting quotient.
pub fn random_ca_structure<R: rand::Rng>(rng: &mut R, n: usize, noise: f64) -> Result<CaAtomStructure> {
    let kind = if rng.gen_bool(0.5) {
        QuotientKind::EqualityTypes
    } else {
        QuotientKind::Complement
    };
    let base = quotient_structure(n, kind)?;
    let k = base.len();
    let mut order: Vec<usize> = (0..k).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), rng);
    // new atom p is old atom order[p]
    let mut pos = vec![0; k];
    for (p, &old) in order.iter().enumerate() {
        pos[old] = p;
    }
    let labels = order.iter().map(|&o| base.label(o).to_string()).collect();
    let mut diag: Vec<AtomSet> = (0..n * n)
        .map(|ij| bits::from_atoms(k, base.diag(ij / n, ij % n).ones().map(|a| pos[a])))
        .collect();
    let mut succ: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|i| (0..k).map(|p| base.cyl_acc(i).successors(order[p]).iter().map(|&b| pos[b as usize]).collect()).collect())
        .collect();
    if n > 1 && rng.gen_bool(noise) {
        let i = rng.gen_range(0..n);
        let (a, b) = (rng.gen_range(0..k), rng.gen_range(0..k));
        let joined: BTreeSet<usize> = succ[i][a].iter().chain(&succ[i][b]).copied().collect();
        for &x in &joined {
            succ[i][x] = joined.iter().copied().collect();
        }
    }
    if n > 1 && rng.gen_bool(noise) {
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let a = rng.gen_range(0..k);
        let flip = !diag[i * n + j].contains(a);
        diag[i * n + j].set(a, flip);
        diag[j * n + i].set(a, flip);
    }
    let cyl = succ
        .iter()
        .map(|rows| {
            let pairs: Vec<(usize, usize)> = rows.iter().enumerate().flat_map(|(a, bs)| bs.iter().map(move |&b| (a, b))).collect();
            Accessibility::from_pairs(k, &pairs)
        })
        .collect();
    CaAtomStructure::new(n, labels, diag, cyl, None, Flavor::Ca)
}

/// The full set algebra on `base^n`: atoms are all functions `n → base`.
///
/// Diagonals, cylindrifiers and transpositions are the usual ones, so its
/// complex algebra is the full cylindric set algebra of dimension `n`.
pub fn full_set_structure(n: usize, base: usize, flavor: Flavor) -> Result<CaAtomStructure> {
    let k = base
        .checked_pow(n as u32)
        .ok_or_else(|| Error::budget("atoms", u128::MAX, usize::MAX))?;
    let tuples: Vec<Vec<usize>> = (0..k)
        .map(|mut x| {
            let mut t = vec![0; n];
            for slot in t.iter_mut() {
                *slot = x % base;
                x /= base;
            }
            t
        })
        .collect();
    let index_of = |t: &[usize]| t.iter().rev().fold(0, |acc, &v| acc * base + v);
    let labels = tuples
        .iter()
        .map(|t| t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(""))
        .collect();
    let mut diag = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            diag.push(bits::from_atoms(k, (0..k).filter(|&a| tuples[a][i] == tuples[a][j])));
        }
    }
    let cyl = (0..n)
        .map(|i| {
            let keys: Vec<Vec<usize>> = tuples
                .iter()
                .map(|t| {
                    let mut t = t.clone();
                    t[i] = usize::MAX;
                    t
                })
                .collect();
            Accessibility::from_keys(&keys)
        })
        .collect();
    let subst = if flavor.has_transpositions() {
        let mut s = vec![Vec::new(); n * (n - 1) / 2];
        for i in 0..n {
            for j in i + 1..n {
                s[pair_index(n, i, j)] = tuples
                    .iter()
                    .map(|t| {
                        let mut u = t.clone();
                        u.swap(i, j);
                        index_of(&u) as u32
                    })
                    .collect();
            }
        }
        Some(s)
    } else {
        None
    };
    CaAtomStructure::new(n, labels, diag, cyl, subst, flavor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_is_dense() {
        let n = 5;
        let mut seen = vec![false; n * (n - 1) / 2];
        for i in 0..n {
            for j in i + 1..n {
                let p = pair_index(n, i, j);
                assert!(!seen[p]);
                seen[p] = true;
                assert_eq!(p, pair_index(n, j, i));
            }
        }
        assert!(seen.into_iter().all(|x| x));
    }

    #[test]
    fn partition_from_keys_groups_equal_keys() {
        let acc = Accessibility::from_keys(&[3, 1, 3, 2, 1]);
        assert!(acc.related(0, 2));
        assert!(acc.related(1, 4));
        assert!(!acc.related(0, 3));
        assert_eq!(acc.successors(0), &[0, 2]);
    }

    #[test]
    fn compress_recognizes_equivalences() {
        let rel = Accessibility::from_pairs(3, &[(0, 0), (1, 1), (2, 2), (0, 1), (1, 0)]);
        let c = compress(rel);
        assert!(c.is_partition());
        assert!(c.related(1, 0));
        let not_eq = Accessibility::from_pairs(2, &[(0, 0), (1, 1), (0, 1)]);
        assert!(!compress(not_eq).is_partition());
    }

    #[test]
    fn full_set_structure_shape() {
        let s = full_set_structure(3, 2, Flavor::Pea).unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.diag(0, 0).count_ones(..), 8);
        assert_eq!(s.diag(0, 1).count_ones(..), 4);
        let x = bits::singleton(8, 0);
        assert_eq!(s.cyl(0, &x).count_ones(..), 2);
        let back = CaAtomStructure::from_json(&s.to_json()).unwrap();
        assert_eq!(back.to_json().cyl, s.to_json().cyl);
        assert_eq!(back.transpose_atom(0, 2, 1), s.transpose_atom(0, 2, 1));
    }
}
