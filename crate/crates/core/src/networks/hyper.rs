//! Hypernetworks (atom-labelled `n`-tuples plus labels from a finite set Λ on
//! other node sequences) and the hyperbasis clauses.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::algebra::{CaAtomStructure, RaAtomStructure};
use crate::budget::Budget;
use crate::constructions::matrices::basic_matrices_with_list;
use crate::error::{Error, Result};
use crate::report::{CheckReport, Counterexample};

use super::network::{tuple_key, validate_network, Network, NetworkJson};

/// A network together with hyperlabels on node sequences whose length differs
/// from the dimension. Sequences absent from `hyper` carry label `0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hypernetwork {
    pub network: Network,
    pub hyper: BTreeMap<Vec<usize>, u32>,
    pub width: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypernetworkJson {
    pub network: NetworkJson,
    pub width: usize,
    #[serde(default)]
    pub hyper: BTreeMap<String, u32>,
}

impl Hypernetwork {
    /// Plain network with every hyperlabel `0` and the default width `n + 1`.
    pub fn plain(network: Network) -> Self {
        let width = network.dimension() + 1;
        Hypernetwork {
            network,
            hyper: BTreeMap::new(),
            width,
        }
    }

    pub fn nodes(&self) -> usize {
        self.network.nodes()
    }

    pub fn hyperlabel(&self, seq: &[usize]) -> u32 {
        self.hyper.get(seq).copied().unwrap_or(0)
    }

    /// Every node sequence of length `≤ width` other than the dimension.
    pub fn sequences(&self) -> Vec<Vec<usize>> {
        let k = self.nodes();
        let mut out = Vec::new();
        for len in 0..=self.width {
            if len == self.network.dimension() {
                continue;
            }
            let total = k.pow(len as u32);
            for mut code in 0..total {
                let mut s = vec![0; len];
                for slot in s.iter_mut().rev() {
                    *slot = code % k;
                    code /= k;
                }
                out.push(s);
            }
        }
        out
    }

    /// `N∘σ` for any map `σ` on the nodes.
    pub fn compose(&self, sigma: &[usize]) -> Hypernetwork {
        let network = self.network.pullback(sigma, self.nodes());
        let mut hyper = BTreeMap::new();
        for s in self.sequences() {
            let image: Vec<usize> = s.iter().map(|&x| sigma[x]).collect();
            let l = self.hyperlabel(&image);
            if l != 0 {
                hyper.insert(s, l);
            }
        }
        Hypernetwork {
            network,
            hyper,
            width: self.width,
        }
    }

    /// Labels of everything that avoids the nodes in `avoid`, as a comparable key.
    fn key_avoiding(&self, avoid: &[usize]) -> (Vec<u32>, Vec<(Vec<usize>, u32)>) {
        let net = &self.network;
        let atoms = (0..net.tuple_count())
            .filter(|&i| net.tuple(i).iter().all(|x| !avoid.contains(x)))
            .map(|i| net.labels()[i])
            .collect();
        let hyper = self
            .hyper
            .iter()
            .filter(|(s, _)| s.iter().all(|x| !avoid.contains(x)))
            .map(|(s, &l)| (s.clone(), l))
            .collect();
        (atoms, hyper)
    }

    pub fn to_json(&self) -> HypernetworkJson {
        HypernetworkJson {
            network: self.network.to_json(),
            width: self.width,
            hyper: self.hyper.iter().map(|(s, &l)| (tuple_key(s), l)).collect(),
        }
    }
}

/// Nodes `x, y` are identified when some tuple starting `(x, y, ..)` lies below `d_01`.
fn node_equivalence(h: &Hypernetwork, s: &CaAtomStructure) -> Vec<Vec<bool>> {
    let k = h.nodes();
    let net = &h.network;
    let mut eq = vec![vec![false; k]; k];
    for (x, row) in eq.iter_mut().enumerate() {
        row[x] = true;
    }
    if net.dimension() < 2 {
        return eq;
    }
    for idx in 0..net.tuple_count() {
        let t = net.tuple(idx);
        if s.below_diag(net.labels()[idx] as usize, 0, 1) {
            eq[t[0]][t[1]] = true;
        }
    }
    eq
}

/// Network clauses plus: hyperlabels lie in Λ, sit on sequences of allowed
/// length, and agree on equivalent sequences.
pub fn validate_hypernetwork(h: &Hypernetwork, s: &CaAtomStructure, lambda: usize) -> Result<CheckReport> {
    let mut report = validate_network(&h.network, s)?;
    report.name = "hypernetwork".into();
    let n = h.network.dimension();
    for (seq, &l) in &h.hyper {
        if seq.len() == n || seq.len() > h.width || seq.iter().any(|&x| x >= h.nodes()) {
            report.fail(Counterexample::new("hyper-shape", vec![tuple_key(seq)]));
        }
        if l as usize >= lambda {
            report.fail(Counterexample::new("hyper-label", vec![tuple_key(seq), l.to_string()]));
        }
    }
    let eq = node_equivalence(h, s);
    let seqs = h.sequences();
    for a in &seqs {
        for b in &seqs {
            if a < b
                && a.len() == b.len()
                && a.iter().zip(b).all(|(&x, &y)| eq[x][y])
                && h.hyperlabel(a) != h.hyperlabel(b)
            {
                report.fail(Counterexample::new("hyper-equivalence", vec![tuple_key(a), tuple_key(b)]));
            }
        }
    }
    Ok(report.finalize())
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct HyperbasisOptions {
    pub symmetry: bool,
}

/// Atom coverage, cylindrifier witnesses inside each member, amalgamation and
/// (optionally) closure under all maps `σ: m → m`.
pub fn check_hyperbasis(
    h: &[Hypernetwork],
    s: &CaAtomStructure,
    lambda: usize,
    opts: HyperbasisOptions,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("hyperbasis");
    report.set("members", h.len() as u64);
    let m = h.first().map(|x| x.nodes()).unwrap_or(0);
    if h.iter().any(|x| x.nodes() != m || x.network.dimension() != s.dimension() || x.width != h[0].width) {
        return Err(Error::Precondition(
            "hyperbasis members must share node count, dimension and width".into(),
        ));
    }
    let n = s.dimension();
    if !h.is_empty() && m < n {
        return Err(Error::Precondition(format!("members have {m} nodes, fewer than the dimension {n}")));
    }
    for (idx, member) in h.iter().enumerate() {
        let r = validate_hypernetwork(member, s, lambda)?;
        if let Some(c) = r.first_failure() {
            report.fail(Counterexample::new(
                "member",
                vec![format!("#{idx}"), c.axiom.clone()],
            ));
        }
    }
    // coverage
    let first: Vec<usize> = (0..n).collect();
    let mut seen = vec![false; s.len()];
    for member in h {
        if m >= n {
            seen[member.network.get(&first)] = true;
        }
    }
    for (a, ok) in seen.iter().enumerate() {
        if !ok {
            report.fail(Counterexample::new("coverage", vec![s.label(a).into()]));
        }
    }
    // witnesses: another node of the same member, or a fresh node z supplied
    // by a member agreeing off z
    // for each z: members grouped by their labels off z, and per group and
    // tuple the sorted labels the group supplies there
    let mut off_id: Vec<Vec<usize>> = vec![Vec::with_capacity(h.len()); m];
    let mut supply: HashMap<(usize, usize, usize), Vec<u32>> = HashMap::new();
    for (z, ids) in off_id.iter_mut().enumerate() {
        let mut classes: HashMap<(Vec<u32>, Vec<(Vec<usize>, u32)>), usize> = HashMap::new();
        for member in h {
            let next = classes.len();
            let c = *classes.entry(member.key_avoiding(&[z])).or_insert(next);
            ids.push(c);
            for (ti, &l) in member.network.labels().iter().enumerate() {
                supply.entry((z, c, ti)).or_default().push(l);
            }
        }
    }
    // stamp[a] == round marks the atoms available in the current round
    let mut stamp = vec![0u32; s.len()];
    let mut round = 0u32;
    for (idx, member) in h.iter().enumerate() {
        let net = &member.network;
        'tuples: for ti in 0..net.tuple_count() {
            let t = net.tuple(ti);
            let here = net.labels()[ti] as usize;
            for i in 0..n {
                round += 1;
                let mut u = t.clone();
                for y in 0..m {
                    u[i] = y;
                    stamp[net.get(&u)] = round;
                }
                for z in 0..m {
                    if t.iter().enumerate().any(|(j, &x)| j != i && x == z) {
                        continue;
                    }
                    u[i] = z;
                    if let Some(v) = supply.get(&(z, off_id[z][idx], net.index(&u))) {
                        for &l in v {
                            stamp[l as usize] = round;
                        }
                    }
                }
                if let Some(&a) = s.cyl_acc(i).successors(here).iter().find(|&&a| stamp[a as usize] != round) {
                    report.fail(Counterexample::new(
                        "witness",
                        vec![format!("#{idx}"), tuple_key(&t), format!("c{i}"), s.label(a as usize).into()],
                    ));
                    continue 'tuples;
                }
            }
        }
    }
    // amalgamation
    for x in 0..m {
        for y in 0..m {
            if x == y {
                continue;
            }
            let mut intern: HashMap<(Vec<u32>, Vec<(Vec<usize>, u32)>), usize> = HashMap::new();
            let mut id = |k| {
                let len = intern.len();
                *intern.entry(k).or_insert(len)
            };
            let keys: Vec<(usize, usize, usize)> = h
                .iter()
                .map(|mb| (id(mb.key_avoiding(&[x, y])), id(mb.key_avoiding(&[x])), id(mb.key_avoiding(&[y]))))
                .collect();
            let present: HashSet<(usize, usize)> = keys.iter().map(|&(_, kx, ky)| (kx, ky)).collect();
            let mut groups: BTreeMap<usize, (Vec<(usize, usize)>, Vec<(usize, usize)>)> = BTreeMap::new();
            for (idx, &(kxy, kx, ky)) in keys.iter().enumerate() {
                let g = groups.entry(kxy).or_default();
                if !g.0.iter().any(|&(k, _)| k == kx) {
                    g.0.push((kx, idx));
                }
                if !g.1.iter().any(|&(k, _)| k == ky) {
                    g.1.push((ky, idx));
                }
            }
            'groups: for (xs, ys) in groups.values() {
                for &(kx, mi) in xs {
                    for &(ky, ni) in ys {
                        report.bump("amalgamation-pairs", 1);
                        if !present.contains(&(kx, ky)) {
                            report.fail(Counterexample::new(
                                "amalgamation",
                                vec![format!("#{mi}"), format!("#{ni}"), format!("x={x}"), format!("y={y}")],
                            ));
                            break 'groups;
                        }
                    }
                }
            }
        }
    }
    if opts.symmetry {
        let set: HashSet<&Hypernetwork> = h.iter().collect();
        let maps = m.pow(m as u32);
        'members: for (idx, member) in h.iter().enumerate() {
            for mut code in 0..maps {
                let mut sigma = vec![0; m];
                for slot in sigma.iter_mut() {
                    *slot = code % m;
                    code /= m;
                }
                let image = member.compose(&sigma);
                if !set.contains(&image) {
                    report.fail(Counterexample::new(
                        "symmetry",
                        vec![format!("#{idx}"), format!("sigma={sigma:?}")],
                    ));
                    continue 'members;
                }
            }
        }
    }
    Ok(report.finalize())
}

/// `Mat_m(S)` together with every basic matrix `f` as the hypernetwork
/// `x̄ ↦ f∘x̄` over it, all hyperlabels `0`.
pub fn matrix_hypernetworks(
    ra: &RaAtomStructure,
    m: usize,
    budget: &Budget,
) -> Result<(CaAtomStructure, Vec<Hypernetwork>)> {
    let (ca, mats) = basic_matrices_with_list(ra, m, budget)?;
    let index: HashMap<_, usize> = mats.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
    let h = mats
        .iter()
        .map(|f| {
            Network::from_fn(m, m, |t| index[&f.compose(t)]).map(Hypernetwork::plain)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ca, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{bin, monk_ra};
    use crate::graphs::{graph_gen, GraphKind};

    #[test]
    fn empty_family_fails_coverage() {
        let ra = bin(3, 1, Some(1), &Budget::default()).unwrap();
        let (ca, _) = matrix_hypernetworks(&ra, 3, &Budget::default()).unwrap();
        let r = check_hyperbasis(&[], &ca, 1, HyperbasisOptions::default()).unwrap();
        assert!(!r.passed);
        assert!(r.counterexamples.iter().all(|c| c.axiom == "coverage"));
    }

    #[test]
    fn all_matrices_form_a_symmetric_hyperbasis() {
        let g = graph_gen(GraphKind::Complete { k: 2 }).unwrap();
        let ra = monk_ra(&g, 3).unwrap();
        let (ca, h) = matrix_hypernetworks(&ra, 3, &Budget::default()).unwrap();
        let r = check_hyperbasis(&h, &ca, 1, HyperbasisOptions { symmetry: true }).unwrap();
        assert!(r.passed, "{:?}", r.counterexamples.first());
    }

    #[test]
    fn missing_image_breaks_symmetry() {
        let ra = bin(3, 1, Some(1), &Budget::default()).unwrap();
        let (ca, mut h) = matrix_hypernetworks(&ra, 3, &Budget::default()).unwrap();
        // drop the image of the last member under the swap of nodes 0 and 1 when distinct
        let victim = h
            .iter()
            .map(|x| x.compose(&[1, 0, 2]))
            .find(|img| h.iter().filter(|y| *y == img).count() == 1 && img != &h[0])
            .unwrap();
        h.retain(|x| *x != victim);
        let r = check_hyperbasis(&h, &ca, 1, HyperbasisOptions { symmetry: true }).unwrap();
        assert!(r.counterexamples.iter().any(|c| c.axiom == "symmetry"));
    }

    #[test]
    fn hyperlabels_must_respect_equivalent_sequences() {
        let ra = bin(3, 1, Some(1), &Budget::default()).unwrap();
        let (ca, h) = matrix_hypernetworks(&ra, 3, &Budget::default()).unwrap();
        // a member with an identity entry between nodes 0 and 1
        let member = h
            .iter()
            .find(|x| ca.below_diag(x.network.get(&[0, 1, 2]), 0, 1))
            .unwrap()
            .clone();
        let mut bad = member.clone();
        bad.hyper.insert(vec![0], 1);
        assert!(validate_hypernetwork(&member, &ca, 2).unwrap().passed);
        let r = validate_hypernetwork(&bad, &ca, 2).unwrap();
        assert!(r.counterexamples.iter().any(|c| c.axiom == "hyper-equivalence"));
    }
}
