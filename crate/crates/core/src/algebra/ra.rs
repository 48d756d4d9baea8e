//! Finite relation-algebra atom structures.
//!
//! A triple `(a, b, c)` is consistent when `a ≤ b;c` at atom level. The triple
//! set is stored densely and mirrored into a composition table so that Cm
//! composition is a union of precomputed bitsets.

use std::collections::VecDeque;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{self, AtomSet};
use crate::error::{Error, Result};
use crate::report::{CheckReport, Counterexample};

/// Hard ceiling on atoms for the dense triple table.
pub const MAX_RA_ATOMS: usize = 1 << 11;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaAtomStructure {
    labels: Vec<String>,
    identity: AtomSet,
    converse: Vec<usize>,
    consistent: FixedBitSet,
    comp: Vec<AtomSet>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RaJson {
    pub atoms: Vec<String>,
    pub identity: Vec<usize>,
    pub converse: Vec<usize>,
    pub consistent: Vec<[usize; 3]>,
}

impl RaAtomStructure {
    /// Builds a structure from a consistency predicate evaluated on every triple.
    pub fn from_predicate<F>(
        labels: Vec<String>,
        identity: &[usize],
        converse: Vec<usize>,
        consistent: F,
    ) -> Result<Self>
    where
        F: Fn(usize, usize, usize) -> bool + Sync,
    {
        let k = labels.len();
        Self::check_shape(k, identity, &converse)?;
        let rows: Vec<Vec<(usize, usize)>> = (0..k)
            .into_par_iter()
            .map(|a| {
                let mut row = Vec::new();
                for b in 0..k {
                    for c in 0..k {
                        if consistent(a, b, c) {
                            row.push((b, c));
                        }
                    }
                }
                row
            })
            .collect();
        let triples = rows
            .into_iter()
            .enumerate()
            .flat_map(|(a, row)| row.into_iter().map(move |(b, c)| [a, b, c]));
        Ok(Self::assemble(labels, identity, converse, triples))
    }

    pub fn from_triples(
        labels: Vec<String>,
        identity: &[usize],
        converse: Vec<usize>,
        triples: &[[usize; 3]],
    ) -> Result<Self> {
        let k = labels.len();
        Self::check_shape(k, identity, &converse)?;
        if let Some(t) = triples.iter().find(|t| t.iter().any(|&x| x >= k)) {
            return Err(Error::Malformed(format!("triple {t:?} references a missing atom")));
        }
        Ok(Self::assemble(labels, identity, converse, triples.iter().copied()))
    }

    fn check_shape(k: usize, identity: &[usize], converse: &[usize]) -> Result<()> {
        if k == 0 {
            return Err(Error::Malformed("atom structure has no atoms".into()));
        }
        if k > MAX_RA_ATOMS {
            return Err(Error::budget("relation atoms", k, MAX_RA_ATOMS));
        }
        if converse.len() != k {
            return Err(Error::Malformed(format!(
                "converse has {} entries for {k} atoms",
                converse.len()
            )));
        }
        if let Some(&bad) = converse.iter().chain(identity).find(|&&x| x >= k) {
            return Err(Error::Malformed(format!("atom index {bad} out of range")));
        }
        Ok(())
    }

    fn assemble<I: IntoIterator<Item = [usize; 3]>>(
        labels: Vec<String>,
        identity: &[usize],
        converse: Vec<usize>,
        triples: I,
    ) -> Self {
        let k = labels.len();
        let mut consistent = FixedBitSet::with_capacity(k * k * k);
        let mut comp = vec![bits::empty(k); k * k];
        for [a, b, c] in triples {
            consistent.insert((a * k + b) * k + c);
            comp[b * k + c].insert(a);
        }
        RaAtomStructure {
            labels,
            identity: bits::from_atoms(k, identity.iter().copied()),
            converse,
            consistent,
            comp,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn atom_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn identity(&self) -> &AtomSet {
        &self.identity
    }

    pub fn is_identity(&self, a: usize) -> bool {
        self.identity.contains(a)
    }

    pub fn converse(&self, a: usize) -> usize {
        self.converse[a]
    }

    pub fn converse_map(&self) -> &[usize] {
        &self.converse
    }

    pub fn is_consistent(&self, a: usize, b: usize, c: usize) -> bool {
        let k = self.len();
        self.consistent.contains((a * k + b) * k + c)
    }

    /// `b;c` as an atom set.
    pub fn compose_atoms(&self, b: usize, c: usize) -> &AtomSet {
        &self.comp[b * self.len() + c]
    }

    pub fn compose(&self, x: &AtomSet, y: &AtomSet) -> AtomSet {
        let mut out = bits::empty(self.len());
        for b in x.ones() {
            for c in y.ones() {
                out.union_with(self.compose_atoms(b, c));
            }
        }
        out
    }

    pub fn converse_set(&self, x: &AtomSet) -> AtomSet {
        bits::from_atoms(self.len(), x.ones().map(|a| self.converse[a]))
    }

    pub fn triples(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let k = self.len();
        self.consistent.ones().map(move |t| [t / (k * k), (t / k) % k, t % k])
    }

    pub fn triple_count(&self) -> usize {
        self.consistent.count_ones(..)
    }

    /// The two generators of the Peircean transforms: `(ă, c̆, b̆)` and `(b, a, c̆)`.
    fn peircean_generators(&self, [a, b, c]: [usize; 3]) -> [[usize; 3]; 2] {
        let cv = &self.converse;
        [[cv[a], cv[c], cv[b]], [b, a, cv[c]]]
    }

    /// Orbit of a triple under the Peircean transforms (six elements when converse is involutive).
    pub fn peircean_orbit(&self, t: [usize; 3]) -> Vec<[usize; 3]> {
        let mut seen = vec![t];
        let mut queue = VecDeque::from([t]);
        while let Some(u) = queue.pop_front() {
            for v in self.peircean_generators(u) {
                if !seen.contains(&v) {
                    seen.push(v);
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// True when `b;c` is nonempty for every pair of atoms.
    pub fn composition_is_total(&self) -> bool {
        self.comp.iter().all(|x| !x.is_clear())
    }

    pub fn to_json(&self) -> RaJson {
        RaJson {
            atoms: self.labels.clone(),
            identity: self.identity.ones().collect(),
            converse: self.converse.clone(),
            consistent: self.triples().collect(),
        }
    }

    pub fn from_json(j: &RaJson) -> Result<Self> {
        Self::from_triples(j.atoms.clone(), &j.identity, j.converse.clone(), &j.consistent)
    }

    /// Embeds `self` into `other` along `map` and reports whether consistency is preserved both ways.
    pub fn embeds_into(&self, other: &RaAtomStructure, map: &[usize]) -> bool {
        let k = self.len();
        if map.len() != k {
            return false;
        }
        for a in 0..k {
            if self.is_identity(a) != other.is_identity(map[a])
                || map[self.converse(a)] != other.converse(map[a])
            {
                return false;
            }
            for b in 0..k {
                for c in 0..k {
                    if self.is_consistent(a, b, c) != other.is_consistent(map[a], map[b], map[c]) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

impl Serialize for RaAtomStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RaAtomStructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = RaJson::deserialize(d)?;
        RaAtomStructure::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Atom-level relation-algebra correctness: converse involution, Peircean closure,
/// identity law and associativity of composition (full quadruple scan).
pub fn check_ra_atomstructure(s: &RaAtomStructure) -> CheckReport {
    let k = s.len();
    let mut report = CheckReport::new("ra-atom-structure");
    report.set("atoms", k as u64);

    for a in 0..k {
        let ca = s.converse(a);
        if s.converse(ca) != a {
            report.fail(Counterexample::new(
                "converse-involution",
                vec![s.label(a).into(), s.label(ca).into(), s.label(s.converse(ca)).into()],
            ));
        }
    }
    report.set("converse-cases", k as u64);
    if !report.passed {
        return report.finalize();
    }

    let mut peirce_cases = 0u64;
    for t in s.triples() {
        peirce_cases += 1;
        for u in s.peircean_orbit(t) {
            if !s.is_consistent(u[0], u[1], u[2]) {
                report.fail(Counterexample::new(
                    "peircean-closure",
                    t.iter().chain(u.iter()).map(|&x| s.label(x).to_string()).collect(),
                ));
            }
        }
    }
    report.set("peircean-cases", peirce_cases);

    let mut identity_cases = 0u64;
    for e in s.identity().ones() {
        if s.converse(e) != e {
            report.fail(Counterexample::new("identity-self-converse", vec![s.label(e).into()]));
        }
        for a in 0..k {
            for b in 0..k {
                identity_cases += 1;
                if s.is_consistent(a, e, b) != (a == b) {
                    report.fail(Counterexample::new(
                        "identity-law",
                        vec![s.label(a).into(), s.label(e).into(), s.label(b).into()],
                    ));
                }
            }
        }
    }
    report.set("identity-cases", identity_cases);

    let assoc: Vec<(u64, Vec<Counterexample>)> = (0..k)
        .into_par_iter()
        .map(|a| {
            let mut out = Vec::new();
            let mut cases = 0u64;
            for b in 0..k {
                let ab = s.compose_atoms(a, b);
                for c in 0..k {
                    let mut left = bits::empty(k);
                    for x in ab.ones() {
                        left.union_with(s.compose_atoms(x, c));
                    }
                    let mut right = bits::empty(k);
                    for y in s.compose_atoms(b, c).ones() {
                        right.union_with(s.compose_atoms(a, y));
                    }
                    cases += k as u64;
                    if left != right {
                        let d = left.symmetric_difference(&right).next().unwrap_or(0);
                        out.push(
                            Counterexample::new(
                                "associativity",
                                [a, b, c, d].iter().map(|&x| s.label(x).to_string()).collect(),
                            )
                            .with_sides(bits::to_vec(&left), bits::to_vec(&right)),
                        );
                    }
                }
            }
            (cases, out)
        })
        .collect();
    let mut assoc_cases = 0;
    for (cases, cxs) in assoc {
        assoc_cases += cases;
        for cx in cxs {
            report.fail(cx);
        }
    }
    report.set("associativity-quadruples", assoc_cases);
    report.finalize()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The two-atom structure {1', d} with d;d = 1' + d (the algebra of a two-element set).
    fn pair_set() -> RaAtomStructure {
        RaAtomStructure::from_predicate(
            vec!["1'".into(), "d".into()],
            &[0],
            vec![0, 1],
            |a, b, c| {
                let ids = [a, b, c].iter().filter(|&&x| x == 0).count();
                match ids {
                    0 => false,
                    1 => true,
                    2 => false,
                    _ => true,
                }
            },
        )
        .unwrap()
    }

    #[test]
    fn pair_set_is_valid() {
        let s = pair_set();
        let r = check_ra_atomstructure(&s);
        assert!(r.passed, "{:?}", r.counterexamples);
        assert_eq!(bits::to_vec(s.compose_atoms(1, 1)), vec![0]);
    }

    #[test]
    fn orbit_has_six_elements_for_distinct_nonsymmetric_atoms() {
        let s = RaAtomStructure::from_triples(
            vec!["e".into(), "a".into(), "b".into(), "c".into()],
            &[0],
            vec![0, 1, 2, 3],
            &[],
        )
        .unwrap();
        assert_eq!(s.peircean_orbit([1, 2, 3]).len(), 6);
        assert_eq!(s.peircean_orbit([1, 1, 1]).len(), 1);
    }

    #[test]
    fn broken_converse_is_reported() {
        let s = RaAtomStructure::from_triples(
            vec!["1'".into(), "a".into(), "b".into()],
            &[0],
            vec![0, 2, 0],
            &[],
        )
        .unwrap();
        let r = check_ra_atomstructure(&s);
        assert!(!r.passed);
        assert_eq!(r.counterexamples[0].axiom, "converse-involution");
        assert!(r.counterexamples[0].witness.contains(&"a".to_string()));
    }

    #[test]
    fn json_round_trip() {
        let s = pair_set();
        let text = serde_json::to_string(&s).unwrap();
        let back: RaAtomStructure = serde_json::from_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn malformed_json_is_rejected() {
        let j = RaJson {
            atoms: vec!["x".into()],
            identity: vec![0],
            converse: vec![3],
            consistent: vec![],
        };
        assert!(RaAtomStructure::from_json(&j).is_err());
    }
}
