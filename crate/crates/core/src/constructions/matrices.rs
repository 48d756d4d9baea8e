//! Basic matrices over a relation atom structure and the cylindric atom
//! structure `Mat_m` they form.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::algebra::ca::{pair_index, Accessibility, CaAtomStructure, Flavor};
use crate::algebra::RaAtomStructure;
use crate::bits;
use crate::budget::Budget;
use crate::error::{Error, Result};

/// An `m × m` atom matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasicMatrix {
    pub m: usize,
    pub entries: Vec<u16>,
}

impl BasicMatrix {
    pub fn get(&self, x: usize, y: usize) -> usize {
        self.entries[x * self.m + y] as usize
    }

    /// `(fτ)(x, y) = f(τ(x), τ(y))`.
    pub fn compose(&self, tau: &[usize]) -> BasicMatrix {
        let m = self.m;
        let mut entries = vec![0u16; m * m];
        for x in 0..m {
            for y in 0..m {
                entries[x * m + y] = self.entries[tau[x] * m + tau[y]];
            }
        }
        BasicMatrix { m, entries }
    }

    /// Checks identity diagonal, converse symmetry and every triangle.
    pub fn is_valid(&self, s: &RaAtomStructure) -> bool {
        let m = self.m;
        (0..m).all(|x| s.is_identity(self.get(x, x)))
            && (0..m).all(|x| (0..m).all(|y| self.get(y, x) == s.converse(self.get(x, y))))
            && (0..m).all(|x| {
                (0..m).all(|y| (0..m).all(|z| s.is_consistent(self.get(x, z), self.get(x, y), self.get(y, z))))
            })
    }

    pub fn label(&self, s: &RaAtomStructure) -> String {
        let m = self.m;
        let mut parts = Vec::new();
        for x in 0..m {
            for y in x + 1..m {
                parts.push(s.label(self.get(x, y)).to_string());
            }
        }
        format!("[{}]", parts.join(" "))
    }
}

/// All basic matrices of size `m` in lexicographic order of their entries.
pub fn enumerate_basic_matrices(s: &RaAtomStructure, m: usize, budget: &Budget) -> Result<Vec<BasicMatrix>> {
    if m < 2 {
        return Err(Error::InvalidParameter("basic matrices need m ≥ 2".into()));
    }
    if s.len() > u16::MAX as usize {
        return Err(Error::budget("relation atoms", s.len(), u16::MAX as usize));
    }
    let mut cells = Vec::new();
    for y in 0..m {
        for x in 0..y {
            cells.push((x, y));
        }
    }
    let ids: Vec<usize> = s.identity().ones().collect();
    let mut out = Vec::new();
    let mut f = vec![u16::MAX; m * m];
    // choose diagonal identity atoms first, then the upper cells column by column
    fn diag_choices(
        s: &RaAtomStructure,
        ids: &[usize],
        m: usize,
        x: usize,
        f: &mut Vec<u16>,
        cells: &[(usize, usize)],
        out: &mut Vec<BasicMatrix>,
        budget: &Budget,
    ) -> Result<()> {
        if x == m {
            return fill(s, m, 0, f, cells, out, budget);
        }
        for &e in ids {
            f[x * m + x] = e as u16;
            diag_choices(s, ids, m, x + 1, f, cells, out, budget)?;
        }
        Ok(())
    }
    fn fill(
        s: &RaAtomStructure,
        m: usize,
        c: usize,
        f: &mut Vec<u16>,
        cells: &[(usize, usize)],
        out: &mut Vec<BasicMatrix>,
        budget: &Budget,
    ) -> Result<()> {
        if c == cells.len() {
            let bm = BasicMatrix { m, entries: f.clone() };
            if bm.is_valid(s) {
                out.push(bm);
                budget.check_matrices(out.len())?;
            }
            return Ok(());
        }
        let (x, y) = cells[c];
        for a in 0..s.len() {
            f[x * m + y] = a as u16;
            f[y * m + x] = s.converse(a) as u16;
            // all triangles whose cells are now known
            let ok = (0..m).all(|z| {
                let known = |p: usize, q: usize| f[p * m + q] != u16::MAX;
                if !(known(x, z) && known(z, y)) {
                    return true;
                }
                let get = |p: usize, q: usize| f[p * m + q] as usize;
                s.is_consistent(get(x, y), get(x, z), get(z, y))
                    && s.is_consistent(get(y, x), get(y, z), get(z, x))
                    && s.is_consistent(get(x, z), get(x, y), get(y, z))
                    && s.is_consistent(get(z, x), get(z, y), get(y, x))
                    && s.is_consistent(get(y, z), get(y, x), get(x, z))
                    && s.is_consistent(get(z, y), get(z, x), get(x, y))
            });
            if ok {
                fill(s, m, c + 1, f, cells, out, budget)?;
            }
        }
        f[x * m + y] = u16::MAX;
        f[y * m + x] = u16::MAX;
        Ok(())
    }
    diag_choices(s, &ids, m, 0, &mut f, &cells, &mut out, budget)?;
    out.sort();
    Ok(out)
}

/// `Mat_m(S)` as a cylindric atom structure (flavour `Pea`).
///
/// `c_x` relates matrices agreeing off `x`, `d_xy` holds the matrices with an
/// identity entry at `(x, y)`, and `s_[xy]` maps `f` to `f∘[x, y]`.
pub fn basic_matrices(s: &RaAtomStructure, m: usize, budget: &Budget) -> Result<CaAtomStructure> {
    basic_matrices_with_list(s, m, budget).map(|(c, _)| c)
}

pub fn basic_matrices_with_list(
    s: &RaAtomStructure,
    m: usize,
    budget: &Budget,
) -> Result<(CaAtomStructure, Vec<BasicMatrix>)> {
    let mats = enumerate_basic_matrices(s, m, budget)?;
    let k = mats.len();
    if k == 0 {
        return Err(Error::Malformed("no basic matrices exist".into()));
    }
    let index: HashMap<&BasicMatrix, usize> = mats.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut diag = Vec::with_capacity(m * m);
    for x in 0..m {
        for y in 0..m {
            diag.push(bits::from_atoms(k, (0..k).filter(|&a| s.is_identity(mats[a].get(x, y)))));
        }
    }
    let cyl = (0..m)
        .map(|x| {
            let keys: Vec<Vec<u16>> = mats
                .iter()
                .map(|f| {
                    let mut e = f.entries.clone();
                    for w in 0..m {
                        e[x * m + w] = u16::MAX;
                        e[w * m + x] = u16::MAX;
                    }
                    e
                })
                .collect();
            Accessibility::from_keys(&keys)
        })
        .collect();
    let mut subst = vec![Vec::new(); m * (m - 1) / 2];
    for x in 0..m {
        for y in x + 1..m {
            let mut tau: Vec<usize> = (0..m).collect();
            tau.swap(x, y);
            let map = mats
                .iter()
                .map(|f| {
                    index
                        .get(&f.compose(&tau))
                        .map(|&i| i as u32)
                        .ok_or_else(|| Error::Malformed("basic matrices not closed under transposition".into()))
                })
                .collect::<Result<Vec<u32>>>()?;
            subst[pair_index(m, x, y)] = map;
        }
    }
    let labels = mats.iter().map(|f| f.label(s)).collect();
    let ca = CaAtomStructure::new(m, labels, diag, cyl, Some(subst), Flavor::Pea)?;
    Ok((ca, mats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{check_ca_axioms, cm_eval_ca, AlgebraTerm, AxiomVariant, Env};
    use crate::constructions::bin::bin;
    use crate::constructions::monk::monk_ra;
    use crate::graphs::{graph_gen, GraphKind};

    /// Independent recount: every symmetric labelling of the three off-diagonal cells.
    fn brute_mat3(s: &RaAtomStructure) -> usize {
        let k = s.len();
        let mut count = 0;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    let f = [[0, a, b], [a, 0, c], [b, c, 0]];
                    let ok = (0..3).all(|x| {
                        (0..3).all(|y| (0..3).all(|z| s.is_consistent(f[x][z], f[x][y], f[y][z])))
                    });
                    if ok {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn mat3_of_bin311_has_13_atoms() {
        let s = bin(3, 1, Some(1), &Budget::default()).unwrap();
        assert_eq!(brute_mat3(&s), 13);
        let (ca, mats) = basic_matrices_with_list(&s, 3, &Budget::default()).unwrap();
        assert_eq!(ca.len(), 13);
        // c_0 of a singleton: matrices agreeing with it off node 0, recounted directly
        for a in 0..13 {
            let mut env = Env::new();
            env.insert("x".into(), bits::singleton(13, a));
            let got = cm_eval_ca(&ca, &AlgebraTerm::cyl(0, AlgebraTerm::var("x")), &env).unwrap();
            let want: Vec<usize> = (0..13).filter(|&b| mats[b].get(1, 2) == mats[a].get(1, 2)).collect();
            assert_eq!(bits::to_vec(&got), want);
        }
    }

    #[test]
    fn transposition_images_are_matrices_and_cx_xx_is_identity() {
        let g = graph_gen(GraphKind::Complete { k: 2 }).unwrap();
        let s = monk_ra(&g, 3).unwrap();
        let mats = enumerate_basic_matrices(&s, 3, &Budget::default()).unwrap();
        let set: std::collections::HashSet<_> = mats.iter().cloned().collect();
        for f in &mats {
            for tau in [[1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0]] {
                assert!(set.contains(&f.compose(&tau)));
            }
        }
    }

    #[test]
    fn mat3_monk_k3_is_a_ca() {
        let g = graph_gen(GraphKind::Complete { k: 3 }).unwrap();
        let s = monk_ra(&g, 3).unwrap();
        let ca = basic_matrices(&s, 3, &Budget::default()).unwrap();
        let r = check_ca_axioms(&ca, AxiomVariant::Ca).unwrap();
        assert!(r.passed, "{:?}", r.counterexamples.first());
    }

    #[test]
    fn budget_is_enforced() {
        let s = bin(3, 1, Some(2), &Budget::default()).unwrap();
        let tight = Budget {
            matrices: 3,
            ..Budget::default()
        };
        assert!(matches!(enumerate_basic_matrices(&s, 3, &tight), Err(e) if e.is_budget()));
    }
}
