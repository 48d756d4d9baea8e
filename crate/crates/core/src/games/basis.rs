//! Greatest-fixpoint basis searches and the cylindric basis check on basic matrices.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::algebra::{CaAtomStructure, RaAtomStructure};
use crate::budget::Budget;
use crate::constructions::matrices::{enumerate_basic_matrices, BasicMatrix};
use crate::error::{Error, Result};
use crate::networks::network::{enumerate_networks, extensions, tuple_key, Network};

use super::ra::{canonical_matrix, matrix_extensions, restrict};
use crate::report::{CheckReport, Counterexample};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixpointReport {
    pub initial: usize,
    pub survivors: usize,
    pub passes: usize,
    pub covered: bool,
    /// Atoms no survivor puts on a tuple of distinct nodes.
    pub uncovered: Vec<String>,
}

/// Labels of all tuples avoiding `z`, the key for `≡_z`.
fn key_off<T: Copy>(labels: &[T], tuples: &[Vec<usize>], z: usize) -> Vec<T> {
    tuples
        .iter()
        .zip(labels)
        .filter(|(t, _)| !t.contains(&z))
        .map(|(_, &l)| l)
        .collect()
}

/// The deletion game shared by both fixpoints, over isomorphism classes.
///
/// Members are canonical `n`-node networks. ∀ deletes a node `z` of a member
/// and demands on the remaining `(n − 1)`-node network `N`; each demand not
/// witnessed inside `N` lists the member classes that extend `N` with a
/// witness. A member dies once some `N` below it has a demand all of whose
/// candidates are dead.
struct Orbits<T> {
    members: Vec<T>,
    /// For each member, the restriction classes it sits over.
    parents: Vec<Vec<usize>>,
    /// For each restriction class, its open demands as candidate lists.
    demands: Vec<Vec<Vec<usize>>>,
}

impl<T> Orbits<T> {
    fn solve(&self) -> (Vec<bool>, usize) {
        let mut alive = vec![true; self.members.len()];
        let mut passes = 0;
        loop {
            passes += 1;
            let bad: Vec<bool> = self
                .demands
                .iter()
                .map(|ds| ds.iter().any(|c| !c.iter().any(|&m| alive[m])))
                .collect();
            let mut changed = false;
            for (m, ps) in self.parents.iter().enumerate() {
                if alive[m] && ps.iter().any(|&p| bad[p]) {
                    alive[m] = false;
                    changed = true;
                }
            }
            if !changed {
                return (alive, passes);
            }
        }
    }
}

fn intern<T: Ord + Clone>(map: &mut BTreeMap<T, usize>, list: &mut Vec<T>, x: T) -> usize {
    if let Some(&i) = map.get(&x) {
        return i;
    }
    list.push(x.clone());
    map.insert(x, list.len() - 1);
    list.len() - 1
}

/// Canonical `n`-node networks, grown one node at a time from the `dim`-node ones.
fn network_classes(s: &CaAtomStructure, n: usize, budget: &Budget) -> Result<Vec<Network>> {
    let mut layer: BTreeSet<Network> = enumerate_networks(s, s.dimension(), budget)?
        .into_iter()
        .map(|x| x.canonical().0)
        .collect();
    for _ in s.dimension()..n {
        let mut next = BTreeSet::new();
        let mut produced = 0;
        for net in &layer {
            for ext in extensions(s, net, &[], budget)? {
                next.insert(ext.canonical().0);
                produced += 1;
                budget.check_matrices(produced)?;
            }
        }
        layer = next;
    }
    Ok(layer.into_iter().collect())
}

/// Greatest set of `n`-node networks (up to node renaming) closed under ∃'s
/// replies in the capped game: when ∀ deletes a node `z` and demands a
/// witness for `(x̄, i, a)` on what is left, either the witness is still
/// there or a surviving network extends the rest with a witness at `z`.
/// Returns the survivors when they cover every atom.
pub fn basis_fixpoint(s: &CaAtomStructure, n: usize, budget: &Budget) -> Result<(Option<Vec<Network>>, FixpointReport)> {
    let dim = s.dimension();
    if n < dim {
        return Err(Error::InvalidParameter(format!("n = {n} is below the dimension {dim}")));
    }
    let members = network_classes(s, n, budget)?;
    let index: HashMap<&Network, usize> = members.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut sub_index = BTreeMap::new();
    let mut subs: Vec<Network> = Vec::new();
    let mut parents = Vec::with_capacity(members.len());
    for m in &members {
        let mut ps: Vec<usize> = (0..n)
            .map(|z| intern(&mut sub_index, &mut subs, m.without_node(z).canonical().0))
            .collect();
        ps.sort_unstable();
        ps.dedup();
        parents.push(ps);
    }
    let mut demands = Vec::with_capacity(subs.len());
    for net in &subs {
        let mut ds: BTreeMap<(Vec<usize>, usize, usize), Vec<usize>> = BTreeMap::new();
        for ti in 0..net.tuple_count() {
            let t = net.tuple(ti);
            let here = net.labels()[ti] as usize;
            for i in 0..dim {
                let mut u = t.clone();
                for a in (0..s.len()).filter(|&a| s.cyl_acc(i).related(a, here)) {
                    let inside = (0..net.nodes()).any(|y| {
                        u[i] = y;
                        net.get(&u) == a
                    });
                    if inside {
                        continue;
                    }
                    u[i] = net.nodes();
                    // the witness only depends on the other coordinates
                    let key = (u.clone(), i, a);
                    if ds.contains_key(&key) {
                        continue;
                    }
                    let mut cands: Vec<usize> = extensions(s, net, &[(u.clone(), a)], budget)?
                        .into_iter()
                        .filter_map(|e| index.get(&e.canonical().0).copied())
                        .collect();
                    cands.sort_unstable();
                    cands.dedup();
                    ds.insert(key, cands);
                }
            }
        }
        demands.push(ds.into_values().collect());
    }
    let orbits = Orbits {
        members,
        parents,
        demands,
    };
    let (alive, passes) = orbits.solve();
    let survivors: Vec<Network> = orbits.members.into_iter().zip(&alive).filter(|(_, &a)| a).map(|(x, _)| x).collect();
    let mut seen = vec![false; s.len()];
    for net in &survivors {
        for ti in 0..net.tuple_count() {
            let t = net.tuple(ti);
            let injective = (0..dim).all(|p| (p + 1..dim).all(|q| t[p] != t[q]));
            if injective {
                seen[net.labels()[ti] as usize] = true;
            }
        }
    }
    let uncovered: Vec<String> = (0..s.len()).filter(|&a| !seen[a]).map(|a| s.label(a).to_string()).collect();
    let report = FixpointReport {
        initial: alive.len(),
        survivors: survivors.len(),
        passes,
        covered: uncovered.is_empty(),
        uncovered,
    };
    Ok((report.covered.then_some(survivors), report))
}

/// The relation algebra analogue over `n`-node basic matrices with triangle demands.
pub fn relational_basis_fixpoint(
    s: &RaAtomStructure,
    n: usize,
    budget: &Budget,
) -> Result<(Option<Vec<BasicMatrix>>, FixpointReport)> {
    if n < 2 {
        return Err(Error::InvalidParameter("relational bases need n ≥ 2".into()));
    }
    let mut layer: BTreeSet<BasicMatrix> = s
        .identity()
        .ones()
        .map(|e| BasicMatrix {
            m: 1,
            entries: vec![e as u16],
        })
        .filter(|f| f.is_valid(s))
        .collect();
    for _ in 1..n {
        let mut next = BTreeSet::new();
        for f in &layer {
            for g in matrix_extensions(s, f, &[]) {
                next.insert(canonical_matrix(&g).0);
                budget.check_matrices(next.len())?;
            }
        }
        layer = next;
    }
    let members: Vec<BasicMatrix> = layer.into_iter().collect();
    let index: HashMap<&BasicMatrix, usize> = members.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut sub_index = BTreeMap::new();
    let mut subs: Vec<BasicMatrix> = Vec::new();
    let mut parents = Vec::with_capacity(members.len());
    for f in &members {
        let mut ps: Vec<usize> = (0..n)
            .map(|z| {
                let keep: Vec<usize> = (0..n).filter(|&x| x != z).collect();
                intern(&mut sub_index, &mut subs, canonical_matrix(&restrict(f, &keep)).0)
            })
            .collect();
        ps.sort_unstable();
        ps.dedup();
        parents.push(ps);
    }
    let mut demands = Vec::with_capacity(subs.len());
    for f in &subs {
        let mut ds = Vec::new();
        for x in 0..f.m {
            for y in 0..f.m {
                for a in 0..s.len() {
                    for b in 0..s.len() {
                        if !s.is_consistent(f.get(x, y), a, b) || (0..f.m).any(|w| f.get(x, w) == a && f.get(w, y) == b) {
                            continue;
                        }
                        let mut cands: Vec<usize> = matrix_extensions(s, f, &[(x, a), (y, s.converse(b))])
                            .iter()
                            .filter_map(|g| index.get(&canonical_matrix(g).0).copied())
                            .collect();
                        cands.sort_unstable();
                        cands.dedup();
                        ds.push(cands);
                    }
                }
            }
        }
        demands.push(ds);
    }
    let orbits = Orbits {
        members,
        parents,
        demands,
    };
    let (alive, passes) = orbits.solve();
    let survivors: Vec<BasicMatrix> = orbits.members.into_iter().zip(&alive).filter(|(_, &a)| a).map(|(x, _)| x).collect();
    let mut seen = vec![false; s.len()];
    for f in &survivors {
        for x in 0..n {
            for y in (0..n).filter(|&y| y != x) {
                seen[f.get(x, y)] = true;
            }
        }
    }
    let uncovered: Vec<String> = (0..s.len()).filter(|&a| !seen[a]).map(|a| s.label(a).to_string()).collect();
    let report = FixpointReport {
        initial: alive.len(),
        survivors: survivors.len(),
        passes,
        covered: uncovered.is_empty(),
        uncovered,
    };
    Ok((report.covered.then_some(survivors), report))
}

/// Coverage, witness and amalgamation for the set of all `m × m` basic matrices.
pub fn cylindric_basis_check(s: &RaAtomStructure, m: usize, budget: &Budget) -> Result<CheckReport> {
    let mats = enumerate_basic_matrices(s, m, budget)?;
    let mut report = CheckReport::new("cylindric-basis");
    report.set("matrices", mats.len() as u64);
    let label = |f: &BasicMatrix| f.label(s);
    let mut seen = vec![false; s.len()];
    for f in &mats {
        seen[f.get(0, 1)] = true;
    }
    for a in (0..s.len()).filter(|&a| !seen[a]) {
        report.fail(Counterexample::new("coverage", vec![s.label(a).into()]));
    }
    let cells: Vec<Vec<usize>> = (0..m).flat_map(|x| (0..m).map(move |y| vec![x, y])).collect();
    // witness: for every z off the edge, matrices agreeing with f off z realise each (a, b)
    'witness: for z in 0..m {
        let mut groups: BTreeMap<Vec<u16>, HashSet<(usize, usize, usize, usize)>> = BTreeMap::new();
        for f in &mats {
            let entry = groups.entry(key_off(&f.entries, &cells, z)).or_default();
            for x in (0..m).filter(|&x| x != z) {
                for y in (0..m).filter(|&y| y != z) {
                    entry.insert((x, y, f.get(x, z), f.get(z, y)));
                }
            }
        }
        for f in &mats {
            let have = &groups[&key_off(&f.entries, &cells, z)];
            for x in (0..m).filter(|&x| x != z) {
                for y in (0..m).filter(|&y| y != z) {
                    for a in 0..s.len() {
                        for b in 0..s.len() {
                            report.bump("witness-demands", 1);
                            if s.is_consistent(f.get(x, y), a, b) && !have.contains(&(x, y, a, b)) {
                                report.fail(Counterexample::new(
                                    "witness",
                                    vec![label(f), format!("({x},{y})"), format!("z={z}"), format!("{};{}", s.label(a), s.label(b))],
                                ));
                                break 'witness;
                            }
                        }
                    }
                }
            }
        }
    }
    // amalgamation: M ≡_{xy} N needs L with M ≡_x L ≡_y N
    'amalgamation: for x in 0..m {
        for y in 0..m {
            if x == y {
                continue;
            }
            let mut kx_set = HashSet::new();
            let mut groups: BTreeMap<Vec<u16>, (BTreeMap<Vec<u16>, usize>, BTreeMap<Vec<u16>, usize>)> = BTreeMap::new();
            for (idx, f) in mats.iter().enumerate() {
                let kxy: Vec<u16> = cells
                    .iter()
                    .zip(&f.entries)
                    .filter(|(t, _)| !t.contains(&x) && !t.contains(&y))
                    .map(|(_, &l)| l)
                    .collect();
                let kx = key_off(&f.entries, &cells, x);
                let ky = key_off(&f.entries, &cells, y);
                kx_set.insert((kx.clone(), ky.clone()));
                let g = groups.entry(kxy).or_default();
                g.0.entry(kx).or_insert(idx);
                g.1.entry(ky).or_insert(idx);
            }
            for (xs, ys) in groups.values() {
                for (kx, &mi) in xs {
                    for (ky, &ni) in ys {
                        report.bump("amalgamation-pairs", 1);
                        if !kx_set.contains(&(kx.clone(), ky.clone())) {
                            report.fail(Counterexample::new(
                                "amalgamation",
                                vec![label(&mats[mi]), label(&mats[ni]), format!("x={x}"), format!("y={y}")],
                            ));
                            break 'amalgamation;
                        }
                    }
                }
            }
        }
    }
    Ok(report.finalize())
}

/// Renders a network basis compactly for reports.
pub fn describe_networks(h: &[Network]) -> Vec<BTreeMap<String, usize>> {
    h.iter()
        .map(|net| (0..net.tuple_count()).map(|i| (tuple_key(&net.tuple(i)), net.labels()[i] as usize)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ca::{full_set_structure, Accessibility, Flavor};
    use crate::bits;
    use crate::constructions::{bin, monk_ra, rainbow_ra};
    use crate::graphs::{graph_gen, GraphKind};

    /// Independent oracle: the deletion rule run on every labelled matrix,
    /// with `≡_z` classes looked up directly instead of through extensions.
    fn naive_relational(s: &RaAtomStructure, n: usize) -> BTreeSet<BasicMatrix> {
        let h = enumerate_basic_matrices(s, n, &Budget::default()).unwrap();
        let cells: Vec<Vec<usize>> = (0..n).flat_map(|x| (0..n).map(move |y| vec![x, y])).collect();
        let mut alive = vec![true; h.len()];
        loop {
            let mut groups: Vec<HashMap<Vec<u16>, Vec<usize>>> = vec![HashMap::new(); n];
            for z in 0..n {
                for (idx, f) in h.iter().enumerate().filter(|(i, _)| alive[*i]) {
                    groups[z].entry(key_off(&f.entries, &cells, z)).or_default().push(idx);
                }
            }
            let doomed: Vec<usize> = (0..h.len())
                .filter(|&idx| alive[idx])
                .filter(|&idx| {
                    let f = &h[idx];
                    (0..n).any(|z| {
                        let mates = &groups[z][&key_off(&f.entries, &cells, z)];
                        (0..n).filter(|&x| x != z).any(|x| {
                            (0..n).filter(|&y| y != z).any(|y| {
                                (0..s.len()).any(|a| {
                                    (0..s.len()).any(|b| {
                                        s.is_consistent(f.get(x, y), a, b)
                                            && !(0..n).any(|w| w != z && f.get(x, w) == a && f.get(w, y) == b)
                                            && !mates.iter().any(|&o| h[o].get(x, z) == a && h[o].get(z, y) == b)
                                    })
                                })
                            })
                        })
                    })
                })
                .collect();
            if doomed.is_empty() {
                break;
            }
            for i in doomed {
                alive[i] = false;
            }
        }
        h.iter().zip(&alive).filter(|(_, &a)| a).map(|(f, _)| canonical_matrix(f).0).collect()
    }

    #[test]
    fn orbit_fixpoint_matches_the_labelled_one() {
        let g = graph_gen(GraphKind::Complete { k: 2 }).unwrap();
        let cases = [
            (rainbow_ra(2, 2).unwrap(), 3),
            (rainbow_ra(2, 2).unwrap(), 4),
            (rainbow_ra(3, 1).unwrap(), 4),
            (monk_ra(&g, 3).unwrap(), 4),
        ];
        for (s, n) in cases {
            let want = naive_relational(&s, n);
            let (got, rep) = relational_basis_fixpoint(&s, n, &Budget::default()).unwrap();
            match got {
                Some(v) => assert_eq!(v.into_iter().collect::<BTreeSet<_>>(), want),
                None => assert_eq!(rep.survivors, want.len()),
            }
        }
    }

    #[test]
    fn full_set_structure_keeps_everything() {
        let s = full_set_structure(3, 2, Flavor::Ca).unwrap();
        let (basis, rep) = basis_fixpoint(&s, 4, &Budget::default()).unwrap();
        assert!(basis.is_some());
        assert_eq!(rep.survivors, rep.initial);
        assert_eq!(rep.passes, 1);
    }

    #[test]
    fn an_unwitnessable_demand_empties_coverage() {
        // dimension 2, atoms d (below d_01) and b in separate cylindrifier
        // classes: labelling (0, 1) by b would force (1, 1) into b's class
        let n = 2;
        let mut diag = vec![bits::full(2); n * n];
        diag[1] = bits::singleton(2, 0);
        diag[2] = bits::singleton(2, 0);
        let cyl = vec![Accessibility::from_keys(&[0u8, 1]); n];
        let s = CaAtomStructure::new(n, vec!["d".into(), "b".into()], diag, cyl, None, Flavor::Ca).unwrap();
        let (basis, rep) = basis_fixpoint(&s, 2, &Budget::default()).unwrap();
        assert!(basis.is_none());
        assert_eq!(rep.uncovered, vec!["b".to_string()]);
    }

    #[test]
    fn two_node_relational_bases_exist() {
        for s in [rainbow_ra(3, 2).unwrap(), bin(3, 1, Some(1), &Budget::default()).unwrap()] {
            assert!(relational_basis_fixpoint(&s, 2, &Budget::default()).unwrap().0.is_some());
        }
    }

    #[test]
    fn two_node_cylindric_basis_passes() {
        for s in [rainbow_ra(3, 2).unwrap(), bin(3, 1, Some(1), &Budget::default()).unwrap()] {
            assert!(cylindric_basis_check(&s, 2, &Budget::default()).unwrap().passed);
        }
    }

    #[test]
    fn monk_triangles_form_a_cylindric_basis() {
        let g = graph_gen(GraphKind::DisjointCliques { count: 3, size: 3 }).unwrap();
        let s = monk_ra(&g, 3).unwrap();
        let r = cylindric_basis_check(&s, 3, &Budget::default()).unwrap();
        assert!(r.passed, "{:?}", r.first_failure());
    }
}
