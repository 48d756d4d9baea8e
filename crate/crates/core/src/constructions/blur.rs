//! The five complex-blur conditions for a family `J` of atom sets.
//!
//! `bad(V, W)` is the set of atoms `t` such that some `v ∈ V`, `w ∈ W` make
//! `(v, w, t)` inconsistent. Safety for a choice of `V_i, W_i` asks for some
//! `T ∈ J` disjoint from every `bad(V_i, W_i)`. Since enlarging a bad set can
//! only hurt, it suffices to test unions of `m − 1` maximal bad sets. For
//! `|I| ≤ 22` all set families are handled as bitmaps over `2^|I|`.

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::RaAtomStructure;
use crate::error::{Error, Result};
use crate::report::{CheckReport, Counterexample};

pub const BITMAP_LIMIT: usize = 22;
/// Cap on enumerated combinations in the generic (large `I`) path.
pub const GENERIC_LIMIT: u128 = 20_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlurInstance {
    pub structure: RaAtomStructure,
    /// The non-identity atoms.
    pub atoms: Vec<usize>,
    pub family: Vec<Vec<usize>>,
    pub m: usize,
}

impl BlurInstance {
    /// `I` = all non-identity atoms of `s`, `J` = all `l`-subsets of `I`.
    pub fn all_subsets(structure: RaAtomStructure, l: usize, m: usize) -> Self {
        let atoms: Vec<usize> = (0..structure.len()).filter(|&a| !structure.is_identity(a)).collect();
        let family = k_subsets(&atoms, l);
        BlurInstance {
            structure,
            atoms,
            family,
            m,
        }
    }

    pub fn is_well_formed(&self) -> bool {
        self.m >= 2
            && self.atoms.iter().all(|&a| a < self.structure.len())
            && self.family.iter().all(|w| w.iter().all(|a| self.atoms.contains(a)))
    }
}

pub fn k_subsets(items: &[usize], l: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(items: &[usize], l: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == l {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < l - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, l, i + 1, cur, out);
            cur.pop();
        }
    }
    go(items, l, 0, &mut cur, &mut out);
    out
}

/// `Id` plus `k` self-converse atoms; the only forbidden non-identity triples are `(a, a, a)`.
pub fn monochromatic_forbidden_ra(k: usize) -> Result<RaAtomStructure> {
    let mut labels = vec!["Id".to_string()];
    labels.extend((0..k).map(|i| format!("c{i}")));
    RaAtomStructure::from_predicate(labels, &[0], (0..=k).collect(), |a, b, c| {
        if a == 0 || b == 0 || c == 0 {
            return (a == 0 && b == c) || (b == 0 && a == c) || (c == 0 && a == b);
        }
        !(a == b && b == c)
    })
}

/// `Id` plus `k` self-converse atoms with every non-identity triple consistent.
pub fn flexible_ra(k: usize) -> Result<RaAtomStructure> {
    let mut labels = vec!["Id".to_string()];
    labels.extend((0..k).map(|i| format!("c{i}")));
    RaAtomStructure::from_predicate(labels, &[0], (0..=k).collect(), |a, b, c| {
        if a == 0 || b == 0 || c == 0 {
            return (a == 0 && b == c) || (b == 0 && a == c) || (c == 0 && a == b);
        }
        true
    })
}

struct Ctx<'a> {
    b: &'a BlurInstance,
    /// position of an atom inside `I`, if any
    pos: Vec<Option<usize>>,
    full: u32,
}

impl Ctx<'_> {
    fn mask(&self, set: &[usize]) -> u32 {
        set.iter().filter_map(|&a| self.pos[a]).fold(0, |m, p| m | 1 << p)
    }

    fn names(&self, mask: u32) -> String {
        let s = &self.b.structure;
        let parts: Vec<&str> = (0..self.b.atoms.len())
            .filter(|p| mask >> p & 1 == 1)
            .map(|p| s.label(self.b.atoms[p]))
            .collect();
        format!("{{{}}}", parts.join(","))
    }

    fn set_names(&self, set: &[usize]) -> String {
        let parts: Vec<&str> = set.iter().map(|&a| self.b.structure.label(a)).collect();
        format!("{{{}}}", parts.join(","))
    }
}

pub fn blur_check(b: &BlurInstance) -> Result<CheckReport> {
    if !b.is_well_formed() {
        return Err(Error::Precondition(
            "blur instance needs m ≥ 2 and every member of J inside I".into(),
        ));
    }
    let mut report = CheckReport::new("blur");
    report.set("atoms", b.atoms.len() as u64);
    report.set("family", b.family.len() as u64);
    report.set("m", b.m as u64);

    let s = &b.structure;
    for (idx, w) in b.family.iter().enumerate() {
        if w.is_empty() {
            report.fail(Counterexample::new("1-nonempty", vec![format!("J[{idx}]")]));
        }
    }
    let mut covered = vec![false; s.len()];
    for w in &b.family {
        for &a in w {
            covered[a] = true;
        }
    }
    for &a in &b.atoms {
        if !covered[a] {
            report.fail(Counterexample::new("2-cover", vec![s.label(a).into()]));
        }
    }
    if b.atoms.len() <= BITMAP_LIMIT {
        bitmap_checks(b, &mut report)?;
    } else {
        generic_checks(b, &mut report)?;
    }
    Ok(report.finalize())
}

fn bitmap_checks(b: &BlurInstance, report: &mut CheckReport) -> Result<()> {
    let s = &b.structure;
    let n = b.atoms.len();
    let mut pos = vec![None; s.len()];
    for (p, &a) in b.atoms.iter().enumerate() {
        pos[a] = Some(p);
    }
    let ctx = Ctx {
        b,
        pos,
        full: if n == 32 { u32::MAX } else { (1u32 << n) - 1 },
    };
    let size = 1usize << n;
    let fam: Vec<u32> = b.family.iter().map(|w| ctx.mask(w)).collect();

    // contains_member[x]: x ⊇ some W ∈ J
    let mut contains_member = FixedBitSet::with_capacity(size);
    for &w in &fam {
        contains_member.insert(w as usize);
    }
    for bit in 0..n {
        for x in 0..size {
            if x >> bit & 1 == 0 && contains_member.contains(x) {
                contains_member.insert(x | 1 << bit);
            }
        }
    }

    // condition 3
    let comp = |p: usize, q: usize| ctx.mask(&s.compose_atoms(b.atoms[p], b.atoms[q]).ones().collect::<Vec<_>>());
    let comp_table: Vec<u32> = (0..n * n).map(|i| comp(i / n, i % n)).collect();
    let mut cond3 = 0u64;
    for p in 0..n {
        for (wi, &w) in fam.iter().enumerate() {
            cond3 += 1;
            let pw = (0..n).filter(|q| w >> q & 1 == 1).fold(0, |acc, q| acc | comp_table[p * n + q]);
            if pw & ctx.full != ctx.full {
                report.fail(Counterexample::new(
                    "3-composition",
                    vec![
                        s.label(b.atoms[p]).into(),
                        ctx.set_names(&b.family[wi]),
                        format!("missing {}", ctx.names(ctx.full & !pw)),
                    ],
                ));
                break;
            }
        }
    }
    report.set("composition-cases", cond3);

    // condition 4: bad sets
    let bad_atom: Vec<u32> = (0..n * n)
        .map(|i| {
            let (v, w) = (b.atoms[i / n], b.atoms[i % n]);
            let mut m = 0;
            for (p, &t) in b.atoms.iter().enumerate() {
                if !s.is_consistent(v, w, t) {
                    m |= 1 << p;
                }
            }
            m
        })
        .collect();
    // bad_by_v[v][W] = ∪_{w ∈ W} bad(v, w)
    let bad_by_v: Vec<Vec<u32>> = (0..n)
        .map(|v| {
            fam.iter()
                .map(|&w| (0..n).filter(|q| w >> q & 1 == 1).fold(0, |acc, q| acc | bad_atom[v * n + q]))
                .collect()
        })
        .collect();
    let words = size.div_ceil(64);
    let present: Vec<u64> = fam
        .par_iter()
        .fold(
            || vec![0u64; words],
            |mut acc, &v| {
                for wi in 0..fam.len() {
                    let bad = (0..n).filter(|p| v >> p & 1 == 1).fold(0, |m, p| m | bad_by_v[p][wi]);
                    acc[bad as usize / 64] |= 1 << (bad as usize % 64);
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; words],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x |= y;
                }
                a
            },
        );
    let is_present = |x: usize| present[x / 64] >> (x % 64) & 1 == 1;
    let mut has_superset = FixedBitSet::with_capacity(size);
    for x in 0..size {
        if is_present(x) {
            has_superset.insert(x);
        }
    }
    for bit in 0..n {
        for x in (0..size).rev() {
            if x >> bit & 1 == 0 && has_superset.contains(x | 1 << bit) {
                has_superset.insert(x);
            }
        }
    }
    let maximal: Vec<u32> = (0..size)
        .filter(|&x| is_present(x) && (0..n).all(|bit| x >> bit & 1 == 1 || !has_superset.contains(x | 1 << bit)))
        .map(|x| x as u32)
        .collect();
    report.set("maximal-bad-sets", maximal.len() as u64);

    let avoidable = |u: u32| contains_member.contains((ctx.full & !u) as usize);
    let slots = b.m - 1;
    let failures: Vec<Vec<u32>> = (0..maximal.len())
        .into_par_iter()
        .filter_map(|first| {
            let mut chosen = vec![maximal[first]];
            if safety_search(&maximal, first, maximal[first], slots - 1, &mut chosen, &avoidable) {
                Some(chosen)
            } else {
                None
            }
        })
        .collect();
    report.set("safety-roots", maximal.len() as u64);
    if let Some(chosen) = failures.first() {
        let mut witness = Vec::new();
        for &bad in chosen {
            let (v, w) = find_origin(&fam, &bad_by_v, n, bad);
            witness.push(format!(
                "V={} W={} bad={}",
                ctx.names(v),
                ctx.names(w),
                ctx.names(bad)
            ));
        }
        report.fail(Counterexample::new("4-safety", witness));
    }

    // condition 5: minimal intersections of m − 1 compositions must meet every W
    let mut distinct: Vec<(u32, usize)> = comp_table
        .iter()
        .enumerate()
        .map(|(i, &c)| (c & ctx.full, i))
        .collect();
    distinct.sort();
    distinct.dedup_by_key(|x| x.0);
    let mut cond5 = 0u64;
    let mut stack: Vec<(u32, Vec<usize>, usize)> = vec![(ctx.full, Vec::new(), 0)];
    while let Some((x, picked, start)) = stack.pop() {
        if picked.len() == slots {
            cond5 += 1;
            if contains_member.contains((ctx.full & !x) as usize) {
                let mut w = Vec::new();
                for &i in &picked {
                    let (p, q) = (i / n, i % n);
                    w.push(format!("{};{}", s.label(b.atoms[p]), s.label(b.atoms[q])));
                }
                let hit = fam.iter().find(|&&m| m & x == 0).copied().unwrap_or(0);
                w.push(format!("W={}", ctx.names(hit)));
                report.fail(Counterexample::new("5-intersection", w));
                break;
            }
            continue;
        }
        for (k, &(c, i)) in distinct.iter().enumerate().skip(start).rev() {
            let mut next = picked.clone();
            next.push(i);
            stack.push((x & c, next, k));
        }
    }
    report.set("intersection-cases", cond5);
    Ok(())
}

fn safety_search<F: Fn(u32) -> bool>(
    maximal: &[u32],
    start: usize,
    union: u32,
    left: usize,
    chosen: &mut Vec<u32>,
    avoidable: &F,
) -> bool {
    if !avoidable(union) {
        // any completion only enlarges the union, so repeat the last set
        for _ in 0..left {
            chosen.push(*chosen.last().unwrap());
        }
        return true;
    }
    if left == 0 {
        return false;
    }
    for k in start..maximal.len() {
        chosen.push(maximal[k]);
        if safety_search(maximal, k, union | maximal[k], left - 1, chosen, avoidable) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn find_origin(fam: &[u32], bad_by_v: &[Vec<u32>], n: usize, target: u32) -> (u32, u32) {
    for &v in fam {
        for (wi, &w) in fam.iter().enumerate() {
            let bad = (0..n).filter(|p| v >> p & 1 == 1).fold(0, |m, p| m | bad_by_v[p][wi]);
            if bad == target {
                return (v, w);
            }
        }
    }
    (0, 0)
}

fn generic_checks(b: &BlurInstance, report: &mut CheckReport) -> Result<()> {
    let s = &b.structure;
    let fam = &b.family;
    let j = fam.len() as u128;
    let slots = (b.m - 1) as u32;
    let combos = j.saturating_pow(2 * slots).saturating_mul(j);
    if combos > GENERIC_LIMIT {
        return Err(Error::budget("blur safety combinations", combos, GENERIC_LIMIT));
    }
    let in_i = |t: usize| b.atoms.contains(&t);
    for &p in &b.atoms {
        for w in fam {
            let pw = s.compose(&crate::bits::singleton(s.len(), p), &crate::bits::from_atoms(s.len(), w.iter().copied()));
            if let Some(&missing) = b.atoms.iter().find(|&&a| !pw.contains(a)) {
                report.fail(Counterexample::new(
                    "3-composition",
                    vec![s.label(p).into(), format!("{w:?}"), format!("missing {}", s.label(missing))],
                ));
            }
        }
    }
    let bad = |v: &[usize], w: &[usize]| -> Vec<usize> {
        b.atoms
            .iter()
            .copied()
            .filter(|&t| in_i(t) && v.iter().any(|&x| w.iter().any(|&y| !s.is_consistent(x, y, t))))
            .collect()
    };
    let total = fam.len().pow(2 * slots);
    for code in 0..total {
        let mut c = code;
        let mut union = Vec::new();
        let mut picks = Vec::new();
        for _ in 0..slots {
            let v = &fam[c % fam.len()];
            c /= fam.len();
            let w = &fam[c % fam.len()];
            c /= fam.len();
            union.extend(bad(v, w));
            picks.push(format!("V={v:?} W={w:?}"));
        }
        if !fam.iter().any(|t| t.iter().all(|x| !union.contains(x))) {
            report.fail(Counterexample::new("4-safety", picks));
            break;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::check_ra_atomstructure;

    #[test]
    fn helper_structures_are_relation_atom_structures() {
        assert!(check_ra_atomstructure(&monochromatic_forbidden_ra(6).unwrap()).passed);
        assert!(check_ra_atomstructure(&flexible_ra(4).unwrap()).passed);
    }

    #[test]
    fn empty_member_fails_condition_one() {
        let s = flexible_ra(4).unwrap();
        let mut b = BlurInstance::all_subsets(s, 2, 3);
        b.family.push(vec![]);
        let r = blur_check(&b).unwrap();
        assert!(!r.passed);
        assert_eq!(r.first_failure().unwrap().axiom, "1-nonempty");
    }

    #[test]
    fn small_passing_instance() {
        let b = BlurInstance::all_subsets(monochromatic_forbidden_ra(6).unwrap(), 3, 2);
        let r = blur_check(&b).unwrap();
        assert!(r.passed, "{:?}", r.counterexamples);
    }

    #[test]
    fn tiny_blocks_fail_composition_first() {
        let b = BlurInstance::all_subsets(monochromatic_forbidden_ra(6).unwrap(), 1, 3);
        let r = blur_check(&b).unwrap();
        assert!(!r.passed);
        assert_eq!(r.first_failure().unwrap().axiom, "3-composition");
    }

    #[test]
    fn safety_failure_is_detected() {
        // with l = 2 of 4 atoms, V = W = {a, b} gives bad = {a, b}, and two such choices cover I
        let b = BlurInstance::all_subsets(monochromatic_forbidden_ra(4).unwrap(), 2, 3);
        let r = blur_check(&b).unwrap();
        assert!(r.counterexamples.iter().any(|c| c.axiom == "4-safety"));
    }

    #[test]
    fn bitmap_and_generic_paths_agree_on_safety() {
        let b = BlurInstance::all_subsets(monochromatic_forbidden_ra(4).unwrap(), 2, 2);
        let mut fast = CheckReport::new("x");
        bitmap_checks(&b, &mut fast).unwrap();
        let mut slow = CheckReport::new("x");
        generic_checks(&b, &mut slow).unwrap();
        let has = |r: &CheckReport| r.counterexamples.iter().any(|c| c.axiom == "4-safety");
        assert_eq!(has(&fast), has(&slow));
    }
}
