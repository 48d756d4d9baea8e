//! Axiom suites for cylindric-type complex algebras.
//!
//! Every axiom is an equation or inequality between term functions of at most
//! two variables. Axioms whose sides are additive in each variable are settled
//! on atoms; the remaining ones (complements, endomorphism laws) are also run
//! on unions of two atoms. `full_powerset` replaces the unary test family by
//! every subset for structures with at most 16 atoms.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ca::CaAtomStructure;
use crate::bits::{self, AtomSet};
use crate::error::{Error, Result};
use crate::report::{CheckReport, Counterexample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxiomVariant {
    Ca,
    Pta,
    Ta,
    Pea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomOptions {
    pub full_powerset: bool,
    /// Cap on the number of two-atom unions and of argument pairs; above it a
    /// seeded sample of this size is used and the report records it.
    pub pair_budget: usize,
    pub seed: u64,
}

impl Default for AxiomOptions {
    fn default() -> Self {
        AxiomOptions {
            full_powerset: false,
            pair_budget: 20_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Rel {
    Eq,
    Le,
    Ge,
}

type Unary<'a> = Box<dyn Fn(&AtomSet) -> (AtomSet, AtomSet) + Sync + 'a>;
type Binary<'a> = Box<dyn Fn(&AtomSet, &AtomSet) -> (AtomSet, AtomSet) + Sync + 'a>;

struct Suite<'a> {
    constants: Vec<(String, AtomSet, AtomSet, Rel)>,
    unary: Vec<(String, Rel, Unary<'a>)>,
    /// Unary axioms that are not additive and need the enlarged test family.
    unary_wide: Vec<(String, Rel, Unary<'a>)>,
    binary: Vec<(String, Rel, Binary<'a>)>,
}

fn holds(rel: Rel, l: &AtomSet, r: &AtomSet) -> bool {
    match rel {
        Rel::Eq => l == r,
        Rel::Le => l.is_subset(r),
        Rel::Ge => r.is_subset(l),
    }
}

fn distinct_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(n: usize, len: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in 0..n {
            if !cur.contains(&v) {
                cur.push(v);
                go(n, len, cur, out);
                cur.pop();
            }
        }
    }
    go(n, len, &mut cur, &mut out);
    out
}

fn id(name: &str, idx: &[usize]) -> String {
    if idx.is_empty() {
        name.to_string()
    } else {
        let parts: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        format!("{name}[{}]", parts.join(","))
    }
}

impl<'a> Suite<'a> {
    fn new() -> Self {
        Suite {
            constants: Vec::new(),
            unary: Vec::new(),
            unary_wide: Vec::new(),
            binary: Vec::new(),
        }
    }

    fn closure_operators(&mut self, s: &'a CaAtomStructure) {
        let n = s.dimension();
        for i in 0..n {
            self.constants.push((id("C1", &[i]), s.cyl(i, &s.empty_set()), s.empty_set(), Rel::Eq));
            self.unary
                .push((id("C2", &[i]), Rel::Le, Box::new(move |x| (x.clone(), s.cyl(i, x)))));
            self.binary.push((
                id("C3", &[i]),
                Rel::Eq,
                Box::new(move |x, y| {
                    let cy = s.cyl(i, y);
                    (
                        s.cyl(i, &bits::intersection(x, &cy)),
                        bits::intersection(&s.cyl(i, x), &cy),
                    )
                }),
            ));
        }
    }

    fn diagonal_axioms(&mut self, s: &'a CaAtomStructure) {
        let n = s.dimension();
        for i in 0..n {
            self.constants.push((id("C5", &[i]), s.diag(i, i).clone(), s.full(), Rel::Eq));
        }
        for i in 0..n {
            for j in 0..n {
                for k in (0..n).filter(|&k| k != i && k != j) {
                    let rhs = s.cyl(k, &bits::intersection(s.diag(i, k), s.diag(k, j)));
                    self.constants.push((id("C6", &[i, j, k]), s.diag(i, j).clone(), rhs, Rel::Eq));
                }
            }
        }
    }

    fn ca(&mut self, s: &'a CaAtomStructure) {
        let n = s.dimension();
        self.closure_operators(s);
        for v in distinct_tuples(n, 2) {
            let (i, j) = (v[0], v[1]);
            self.unary.push((
                id("C4", &[i, j]),
                Rel::Eq,
                Box::new(move |x| (s.cyl(i, &s.cyl(j, x)), s.cyl(j, &s.cyl(i, x)))),
            ));
        }
        self.diagonal_axioms(s);
        for v in distinct_tuples(n, 2) {
            let (i, j) = (v[0], v[1]);
            self.unary_wide.push((
                id("C7", &[i, j]),
                Rel::Eq,
                Box::new(move |x| {
                    let d = s.diag(i, j);
                    let a = s.cyl(i, &bits::intersection(d, x));
                    let b = s.cyl(i, &bits::intersection(d, &bits::complement(x)));
                    (bits::intersection(&a, &b), s.empty_set())
                }),
            ));
        }
    }

    fn pta(&mut self, s: &'a CaAtomStructure) {
        let n = s.dimension();
        self.closure_operators(s);
        for i in 0..n {
            // complements of c_i-closed elements are c_i-closed
            self.unary_wide.push((
                id("C0", &[i]),
                Rel::Eq,
                Box::new(move |x| {
                    let nc = bits::complement(&s.cyl(i, x));
                    (s.cyl(i, &nc), nc)
                }),
            ));
        }
        for v in distinct_tuples(n, 3) {
            let (i, j, k) = (v[0], v[1], v[2]);
            self.unary.push((
                id("C4*", &[i, j, k]),
                Rel::Ge,
                Box::new(move |x| {
                    (
                        s.cyl(i, &s.cyl(j, x)),
                        bits::intersection(&s.cyl(j, &s.cyl(i, x)), s.diag(j, k)),
                    )
                }),
            ));
        }
        self.diagonal_axioms(s);
        for v in distinct_tuples(n, 2) {
            let (i, j) = (v[0], v[1]);
            self.unary.push((
                id("C7", &[i, j]),
                Rel::Le,
                Box::new(move |x| {
                    let d = s.diag(i, j);
                    (bits::intersection(d, &s.cyl(i, &bits::intersection(d, x))), x.clone())
                }),
            ));
        }
        for v in distinct_tuples(n, 4) {
            // (k, i, j, m) pairwise distinct covers k ∉ {i,j,m}, m ∉ {i,j}, i ≠ j
            let (k, i, j, m) = (v[0], v[1], v[2], v[3]);
            self.unary.push((
                id("MGR", &[i, j, k, m]),
                Rel::Eq,
                Box::new(move |x| {
                    let ck = s.cyl(k, x);
                    let l = s.subst_ij(k, i, &s.subst_ij(i, j, &s.subst_ij(j, m, &s.subst_ij(m, k, &ck))));
                    let r = s.subst_ij(k, m, &s.subst_ij(m, i, &s.subst_ij(i, j, &s.subst_ij(j, k, &ck))));
                    (l, r)
                }),
            ));
        }
    }

    fn transposition_block(&mut self, s: &'a CaAtomStructure, tag: &str) {
        let n = s.dimension();
        let tr = move |i: usize, j: usize, x: &AtomSet| s.transpose(i, j, x).expect("checked presence");
        let [endo, invol, swap, hexagon, d1, below] = match tag {
            "TA" => ["Fe6", "Fe7", "Fe9", "Fe8", "Fe10", "Fe11"],
            _ => ["Q6", "Q7", "Q8", "Q9", "Q10", "Q11"],
        };
        let zero = match tag {
            "TA" => "Fe0",
            _ => "Q0",
        };
        for i in 0..n {
            self.constants.push((id(zero, &[i]), s.diag(i, i).clone(), s.full(), Rel::Eq));
            self.unary
                .push((id(zero, &[i, i]), Rel::Eq, Box::new(move |x| (tr(i, i, x), x.clone()))));
        }
        for v in distinct_tuples(n, 2) {
            let (i, j) = (v[0], v[1]);
            self.unary
                .push((id(zero, &[i, j]), Rel::Eq, Box::new(move |x| (tr(i, j, x), tr(j, i, x)))));
            self.unary_wide.push((
                id(&format!("{endo}-s-complement"), &[i, j]),
                Rel::Eq,
                Box::new(move |x| (s.subst_ij(i, j, &bits::complement(x)), bits::complement(&s.subst_ij(i, j, x)))),
            ));
            self.unary_wide.push((
                id(&format!("{endo}-swap-complement"), &[i, j]),
                Rel::Eq,
                Box::new(move |x| (tr(i, j, &bits::complement(x)), bits::complement(&tr(i, j, x)))),
            ));
            self.binary.push((
                id(&format!("{endo}-s-meet"), &[i, j]),
                Rel::Eq,
                Box::new(move |x, y| {
                    (
                        s.subst_ij(i, j, &bits::intersection(x, y)),
                        bits::intersection(&s.subst_ij(i, j, x), &s.subst_ij(i, j, y)),
                    )
                }),
            ));
            self.binary.push((
                id(&format!("{endo}-swap-meet"), &[i, j]),
                Rel::Eq,
                Box::new(move |x, y| {
                    (tr(i, j, &bits::intersection(x, y)), bits::intersection(&tr(i, j, x), &tr(i, j, y)))
                }),
            ));
            self.unary
                .push((id(invol, &[i, j]), Rel::Eq, Box::new(move |x| (tr(i, j, &tr(i, j, x)), x.clone()))));
            self.unary.push((
                id(swap, &[i, j]),
                Rel::Eq,
                Box::new(move |x| (tr(i, j, &s.subst_ij(i, j, x)), s.subst_ij(j, i, x))),
            ));
            self.constants.push((id(d1, &[i, j]), s.subst_ij(i, j, s.diag(i, j)), s.full(), Rel::Eq));
            self.unary.push((
                id(below, &[i, j]),
                Rel::Le,
                Box::new(move |x| (bits::intersection(x, s.diag(i, j)), s.subst_ij(i, j, x))),
            ));
        }
        for v in distinct_tuples(n, 3) {
            let (i, j, k) = (v[0], v[1], v[2]);
            self.unary.push((
                id(hexagon, &[i, j, k]),
                Rel::Eq,
                Box::new(move |x| (tr(i, j, &tr(i, k, x)), tr(j, k, &tr(i, j, x)))),
            ));
        }
    }

    fn ta(&mut self, s: &'a CaAtomStructure) {
        let n = s.dimension();
        for i in 0..n {
            self.unary
                .push((id("Fe1", &[i]), Rel::Le, Box::new(move |x| (x.clone(), s.cyl(i, x)))));
            self.binary.push((
                id("Fe2", &[i]),
                Rel::Eq,
                Box::new(move |x, y| (s.cyl(i, &bits::union(x, y)), bits::union(&s.cyl(i, x), &s.cyl(i, y)))),
            ));
        }
        for v in distinct_tuples(n, 2) {
            let (i, j) = (v[0], v[1]);
            self.unary.push((
                id("Fe3", &[i, j]),
                Rel::Eq,
                Box::new(move |x| (s.subst_ij(i, j, &s.cyl(i, x)), s.cyl(i, x))),
            ));
            self.unary.push((
                id("Fe4", &[i, j]),
                Rel::Eq,
                Box::new(move |x| (s.cyl(i, &s.subst_ij(i, j, x)), s.subst_ij(i, j, x))),
            ));
        }
        for v in distinct_tuples(n, 4) {
            let (i, j, k, m) = (v[0], v[1], v[2], v[3]);
            self.unary.push((
                id("Fe5*", &[i, j, k, m]),
                Rel::Eq,
                Box::new(move |x| (s.subst_ij(i, j, &s.subst_ij(k, m, x)), s.subst_ij(k, m, &s.subst_ij(i, j, x)))),
            ));
        }
        self.transposition_block(s, "TA");
    }

    fn pea(&mut self, s: &'a CaAtomStructure) {
        let n = s.dimension();
        // Q1 and Q2 are the cylindric axioms C1-C3 and C4-C7
        let mut ca = Suite::new();
        ca.ca(s);
        let rename = |name: String| {
            let head = if ["C1", "C2", "C3"].iter().any(|p| name.starts_with(p)) {
                "Q1"
            } else {
                "Q2"
            };
            format!("{head}/{name}")
        };
        self.constants.extend(ca.constants.into_iter().map(|(a, l, r, rel)| (rename(a), l, r, rel)));
        self.unary.extend(ca.unary.into_iter().map(|(a, rel, f)| (rename(a), rel, f)));
        self.unary_wide.extend(ca.unary_wide.into_iter().map(|(a, rel, f)| (rename(a), rel, f)));
        self.binary.extend(ca.binary.into_iter().map(|(a, rel, f)| (rename(a), rel, f)));
        for v in distinct_tuples(n, 2) {
            let (i, j) = (v[0], v[1]);
            self.unary.push((
                id("Q3", &[i, j]),
                Rel::Eq,
                Box::new(move |x| (s.subst_ij(i, j, &s.cyl(i, x)), s.cyl(i, x))),
            ));
            self.unary.push((
                id("Q4", &[i, j]),
                Rel::Eq,
                Box::new(move |x| (s.cyl(i, &s.subst_ij(i, j, x)), s.subst_ij(i, j, x))),
            ));
        }
        for v in distinct_tuples(n, 3) {
            let (i, j, k) = (v[0], v[1], v[2]);
            self.unary.push((
                id("Q5", &[i, j, k]),
                Rel::Eq,
                Box::new(move |x| (s.subst_ij(i, j, &s.cyl(k, x)), s.cyl(k, &s.subst_ij(i, j, x)))),
            ));
        }
        self.transposition_block(s, "PEA");
    }
}

/// Variant-specific preconditions on the structure's operators.
fn check_signature(s: &CaAtomStructure, variant: AxiomVariant) -> Result<()> {
    let flavor = s.flavor();
    let mismatch = |what: &str| {
        Err(Error::OperatorUnavailable {
            op: what.to_string(),
            flavor: flavor.to_string(),
        })
    };
    if !flavor.has_diagonals() {
        return mismatch("diagonals");
    }
    if matches!(variant, AxiomVariant::Ta | AxiomVariant::Pea) && (!flavor.has_transpositions() || !s.has_subst()) {
        return mismatch("transpositions");
    }
    Ok(())
}

fn witness(s: &CaAtomStructure, x: &AtomSet) -> String {
    let names: Vec<&str> = x.ones().map(|a| s.label(a)).collect();
    format!("{{{}}}", names.join(","))
}

fn sample<T: Clone>(items: Vec<T>, budget: usize, seed: u64) -> (Vec<T>, bool) {
    if items.len() <= budget {
        return (items, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = (0..items.len()).collect();
    picked.shuffle(&mut rng);
    picked.truncate(budget);
    picked.sort_unstable();
    (picked.into_iter().map(|i| items[i].clone()).collect(), true)
}

pub fn check_ca_axioms(s: &CaAtomStructure, variant: AxiomVariant) -> Result<CheckReport> {
    check_ca_axioms_with(s, variant, &AxiomOptions::default())
}

pub fn check_ca_axioms_with(s: &CaAtomStructure, variant: AxiomVariant, opts: &AxiomOptions) -> Result<CheckReport> {
    check_signature(s, variant)?;
    let k = s.len();
    let name = match variant {
        AxiomVariant::Ca => "CA",
        AxiomVariant::Pta => "PTA",
        AxiomVariant::Ta => "TA",
        AxiomVariant::Pea => "PEA",
    };
    let mut report = CheckReport::new(format!("{name}_{}", s.dimension()));
    report.set("atoms", k as u64);

    for (i, acc) in (0..s.dimension()).map(|i| (i, s.cyl_acc(i))) {
        if let Some(a) = acc.first_non_reflexive() {
            report.fail(Counterexample::new(id("cyl-reflexive", &[i]), vec![s.label(a).into()]));
        }
        if let Some((a, b)) = acc.first_non_symmetric() {
            report.fail(Counterexample::new(
                id("cyl-symmetric", &[i]),
                vec![s.label(a).into(), s.label(b).into()],
            ));
        }
    }

    let mut suite = Suite::new();
    match variant {
        AxiomVariant::Ca => suite.ca(s),
        AxiomVariant::Pta => suite.pta(s),
        AxiomVariant::Ta => suite.ta(s),
        AxiomVariant::Pea => suite.pea(s),
    }

    for (axiom, l, r, rel) in &suite.constants {
        report.bump("constant-cases", 1);
        if !holds(*rel, l, r) {
            report.fail(Counterexample::new(axiom.clone(), vec![]).with_sides(bits::to_vec(l), bits::to_vec(r)));
        }
    }

    let atoms: Vec<AtomSet> = (0..k).map(|a| bits::singleton(k, a)).collect();
    let full_mode = opts.full_powerset && k <= 16;
    let mut wide: Vec<AtomSet> = if full_mode {
        (0u32..1 << k).map(|m| bits::from_atoms(k, (0..k).filter(|&a| m >> a & 1 == 1))).collect()
    } else {
        let mut pairs = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                pairs.push((a, b));
            }
        }
        let (pairs, sampled) = sample(pairs, opts.pair_budget, opts.seed);
        if sampled {
            report.set("two-atom-unions-sampled", 1);
        }
        let mut sets = atoms.clone();
        sets.push(bits::empty(k));
        sets.push(bits::full(k));
        sets.extend(pairs.into_iter().map(|(a, b)| bits::from_atoms(k, [a, b])));
        sets
    };
    wide.dedup();
    let unary_args: &[AtomSet] = if full_mode { &wide } else { &atoms };

    let binary_args: Vec<(usize, usize)> = {
        let all: Vec<(usize, usize)> = (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).collect();
        let (picked, sampled) = sample(all, opts.pair_budget.max(k), opts.seed ^ 0x9e37);
        if sampled {
            report.set("argument-pairs-sampled", 1);
        }
        picked
    };

    let run_unary = |axioms: &[(String, Rel, Unary<'_>)], args: &[AtomSet]| -> (u64, Vec<Counterexample>) {
        let found: Vec<Vec<Counterexample>> = axioms
            .par_iter()
            .map(|(axiom, rel, f)| {
                let mut out = Vec::new();
                for x in args {
                    let (l, r) = f(x);
                    if !holds(*rel, &l, &r) {
                        out.push(
                            Counterexample::new(axiom.clone(), vec![witness(s, x)])
                                .with_sides(bits::to_vec(&l), bits::to_vec(&r)),
                        );
                        if out.len() >= 4 {
                            break;
                        }
                    }
                }
                out
            })
            .collect();
        ((axioms.len() * args.len()) as u64, found.into_iter().flatten().collect())
    };

    let (c1, cx1) = run_unary(&suite.unary, unary_args);
    let (c2, cx2) = run_unary(&suite.unary_wide, &wide);
    report.set("unary-cases", c1 + c2);

    let found: Vec<Vec<Counterexample>> = suite
        .binary
        .par_iter()
        .map(|(axiom, rel, f)| {
            let mut out = Vec::new();
            for &(a, b) in &binary_args {
                let (l, r) = f(&atoms[a], &atoms[b]);
                if !holds(*rel, &l, &r) {
                    out.push(
                        Counterexample::new(axiom.clone(), vec![s.label(a).into(), s.label(b).into()])
                            .with_sides(bits::to_vec(&l), bits::to_vec(&r)),
                    );
                    if out.len() >= 4 {
                        break;
                    }
                }
            }
            out
        })
        .collect();
    report.set("binary-cases", (suite.binary.len() * binary_args.len()) as u64);
    for cx in cx1.into_iter().chain(cx2).chain(found.into_iter().flatten()) {
        report.fail(cx);
    }
    Ok(report.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ca::{full_set_structure, Flavor};

    #[test]
    fn full_set_algebras_satisfy_every_list() {
        for (n, base) in [(2, 2), (3, 2), (3, 3), (4, 2)] {
            let s = full_set_structure(n, base, Flavor::Pea).unwrap();
            for v in [AxiomVariant::Ca, AxiomVariant::Pta, AxiomVariant::Ta, AxiomVariant::Pea] {
                let r = check_ca_axioms(&s, v).unwrap();
                assert!(r.passed, "{n} {base} {v:?}: {:?}", r.counterexamples);
            }
        }
    }

    #[test]
    fn full_powerset_mode_agrees_on_small_structures() {
        let s = full_set_structure(2, 2, Flavor::Pea).unwrap();
        let opts = AxiomOptions {
            full_powerset: true,
            ..AxiomOptions::default()
        };
        assert!(check_ca_axioms_with(&s, AxiomVariant::Pea, &opts).unwrap().passed);
    }

    #[test]
    fn transposition_lists_need_transpositions() {
        let s = full_set_structure(3, 2, Flavor::Ca).unwrap();
        assert!(check_ca_axioms(&s, AxiomVariant::Ta).is_err());
        assert!(check_ca_axioms(&s, AxiomVariant::Ca).unwrap().passed);
    }

    #[test]
    fn broken_cylindrifier_fails_c2() {
        let s = full_set_structure(2, 2, Flavor::Ca).unwrap();
        let j = s.to_json();
        let mut j2 = j.clone();
        j2.cyl[0].retain(|[a, b]| a != b);
        let broken = CaAtomStructure::from_json(&j2).unwrap();
        let r = check_ca_axioms(&broken, AxiomVariant::Ca).unwrap();
        assert!(!r.passed);
        assert!(r.counterexamples.iter().any(|c| c.axiom.starts_with("C2")));
    }
}
