//! The triangle-move game on relation algebra networks (basic matrices) with
//! a node cap. ∀ names an edge `(x, y)` and atoms `a, b` with `N(x, y) ≤ a;b`;
//! ∃ must supply `z` with `N(x, z) = a` and `N(z, y) = b`. At the cap ∀ first
//! deletes a node of his choice.

use crate::algebra::RaAtomStructure;
use crate::budget::Budget;
use crate::constructions::matrices::BasicMatrix;
use crate::error::{Error, Result};

use super::solver::{solve, Game, GameOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RaPos {
    Start,
    Atom(usize),
    Net(BasicMatrix),
    /// Matrix, edge `(x, y)`, demanded atoms `a`, `b`.
    Demand(BasicMatrix, usize, usize, usize, usize),
}

/// The node order minimizing the entry vector, with `perm[new] = old`.
pub fn canonical_matrix(f: &BasicMatrix) -> (BasicMatrix, Vec<usize>) {
    let m = f.m;
    let mut perm: Vec<usize> = (0..m).collect();
    let mut best = (f.clone(), perm.clone());
    // Heap's algorithm over all orders; node caps stay small
    let mut c = vec![0; m];
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            let cand = f.compose(&perm);
            if cand.entries < best.0.entries {
                best = (cand, perm.clone());
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

pub(crate) fn restrict(f: &BasicMatrix, keep: &[usize]) -> BasicMatrix {
    let k = keep.len();
    let mut entries = Vec::with_capacity(k * k);
    for &x in keep {
        for &y in keep {
            entries.push(f.entries[x * f.m + y]);
        }
    }
    BasicMatrix { m: k, entries }
}

/// Every basic matrix extending `f` by one node `k = f.m` with the given
/// entries `(w, k)` fixed.
pub fn matrix_extensions(s: &RaAtomStructure, f: &BasicMatrix, fixed: &[(usize, usize)]) -> Vec<BasicMatrix> {
    let k = f.m;
    let mut col = vec![usize::MAX; k];
    for &(w, a) in fixed {
        if col[w] != usize::MAX && col[w] != a {
            return Vec::new();
        }
        col[w] = a;
    }
    let mut out = Vec::new();
    let ids: Vec<usize> = s.identity().ones().collect();
    fn fill(
        s: &RaAtomStructure,
        f: &BasicMatrix,
        col: &mut Vec<usize>,
        fixed: &[bool],
        w: usize,
        e: usize,
        out: &mut Vec<BasicMatrix>,
    ) {
        let k = f.m;
        if w == k {
            let size = k + 1;
            let mut entries = vec![0u16; size * size];
            for x in 0..k {
                for y in 0..k {
                    entries[x * size + y] = f.entries[x * k + y];
                }
                entries[x * size + k] = col[x] as u16;
                entries[k * size + x] = s.converse(col[x]) as u16;
            }
            entries[k * size + k] = e as u16;
            let g = BasicMatrix { m: size, entries };
            if g.is_valid(s) {
                out.push(g);
            }
            return;
        }
        let choices: Vec<usize> = if fixed[w] { vec![col[w]] } else { (0..s.len()).collect() };
        for a in choices {
            // triangle (w', w, k) against every earlier column entry, and the new diagonal
            let ok = s.is_consistent(a, a, e)
                && (0..w).all(|v| s.is_consistent(col[v], f.get(v, w), a) && s.is_consistent(a, f.get(w, v), col[v]));
            if ok {
                let keep = col[w];
                col[w] = a;
                fill(s, f, col, fixed, w + 1, e, out);
                col[w] = keep;
            }
        }
    }
    let fixed_mask: Vec<bool> = col.iter().map(|&a| a != usize::MAX).collect();
    for &e in &ids {
        fill(s, f, &mut col, &fixed_mask, 0, e, &mut out);
    }
    out
}

pub struct RaGame<'s> {
    pub structure: &'s RaAtomStructure,
    pub cap: usize,
}

impl<'s> RaGame<'s> {
    pub fn new(structure: &'s RaAtomStructure, cap: usize) -> Result<Self> {
        if cap < 2 {
            return Err(Error::InvalidParameter("the triangle game needs a node cap of at least 2".into()));
        }
        Ok(RaGame { structure, cap })
    }

    fn demands(&self, f: &BasicMatrix, all: bool, out: &mut Vec<RaPos>) {
        let s = self.structure;
        let (canon, perm) = canonical_matrix(f);
        let mut inv = vec![0; f.m];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        for x in 0..f.m {
            for y in 0..f.m {
                let c = f.get(x, y);
                for a in 0..s.len() {
                    for b in 0..s.len() {
                        if !s.is_consistent(c, a, b) {
                            continue;
                        }
                        if !all && (0..f.m).any(|z| f.get(x, z) == a && f.get(z, y) == b) {
                            continue;
                        }
                        out.push(RaPos::Demand(canon.clone(), inv[x], inv[y], a, b));
                    }
                }
            }
        }
    }
}

fn canon(f: &BasicMatrix) -> RaPos {
    RaPos::Net(canonical_matrix(f).0)
}

impl Game for RaGame<'_> {
    type Pos = RaPos;

    fn initial(&self) -> RaPos {
        RaPos::Start
    }

    fn forall_moves(&self, p: &RaPos) -> Result<Vec<RaPos>> {
        match p {
            RaPos::Start => Ok((0..self.structure.len()).map(RaPos::Atom).collect()),
            RaPos::Net(f) => {
                let mut out = Vec::new();
                if f.m < self.cap {
                    self.demands(f, false, &mut out);
                } else {
                    for z in 0..f.m {
                        let keep: Vec<usize> = (0..f.m).filter(|&x| x != z).collect();
                        self.demands(&restrict(f, &keep), true, &mut out);
                    }
                }
                Ok(out)
            }
            _ => Err(Error::Precondition("not a ∀ position".into())),
        }
    }

    fn exists_moves(&self, p: &RaPos) -> Result<Vec<RaPos>> {
        let s = self.structure;
        match p {
            RaPos::Atom(a) => {
                let mut out = Vec::new();
                for e in s.identity().ones() {
                    let base = BasicMatrix {
                        m: 1,
                        entries: vec![e as u16],
                    };
                    if base.is_valid(s) {
                        out.extend(matrix_extensions(s, &base, &[(0, *a)]).iter().map(canon));
                    }
                }
                Ok(out)
            }
            RaPos::Demand(f, x, y, a, b) => {
                let mut out = Vec::new();
                if (0..f.m).any(|z| f.get(*x, z) == *a && f.get(z, *y) == *b) {
                    out.push(RaPos::Net(f.clone()));
                }
                if f.m < self.cap {
                    let fixed = [(*x, *a), (*y, s.converse(*b))];
                    out.extend(matrix_extensions(s, f, &fixed).iter().map(canon));
                }
                Ok(out)
            }
            _ => Err(Error::Precondition("not an ∃ position".into())),
        }
    }

    fn show(&self, p: &RaPos) -> String {
        let s = self.structure;
        let mat = |f: &BasicMatrix| f.entries.iter().map(|&e| s.label(e as usize)).collect::<Vec<_>>().join(" ");
        match p {
            RaPos::Start => "start".into(),
            RaPos::Atom(a) => format!("atom {}", s.label(*a)),
            RaPos::Net(f) => format!("{}n[{}]", f.m, mat(f)),
            RaPos::Demand(f, x, y, a, b) => {
                format!("{}n[{}] demand ({x},{y}) {};{}", f.m, mat(f), s.label(*a), s.label(*b))
            }
        }
    }
}

pub fn solve_ra_game(
    s: &RaAtomStructure,
    cap: usize,
    rounds: usize,
    with_strategy: bool,
    budget: &Budget,
) -> Result<GameOutcome> {
    let game = RaGame::new(s, cap)?;
    solve(&game, rounds, with_strategy, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::matrices::enumerate_basic_matrices;
    use crate::constructions::{bin, rainbow_ra};
    use crate::games::solver::{replay, Player};

    #[test]
    fn extensions_agree_with_full_enumeration() {
        let s = rainbow_ra(2, 2).unwrap();
        let three = enumerate_basic_matrices(&s, 3, &Budget::default()).unwrap();
        for f in enumerate_basic_matrices(&s, 2, &Budget::default()).unwrap() {
            let mut got = matrix_extensions(&s, &f, &[]);
            got.sort();
            let want: Vec<BasicMatrix> = three.iter().filter(|g| restrict(g, &[0, 1]) == f).cloned().collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn canonical_form_ignores_node_order() {
        let s = rainbow_ra(3, 2).unwrap();
        let mats = enumerate_basic_matrices(&s, 3, &Budget::default()).unwrap();
        for f in mats.iter().step_by(7) {
            let c = canonical_matrix(f).0;
            for tau in [[1, 0, 2], [2, 0, 1], [0, 2, 1]] {
                assert_eq!(canonical_matrix(&f.compose(&tau)).0, c);
            }
        }
    }

    #[test]
    fn zero_rounds_and_replay() {
        let s = bin(3, 1, Some(1), &Budget::default()).unwrap();
        assert_eq!(solve_ra_game(&s, 3, 0, false, &Budget::default()).unwrap().winner, Player::Exists);
        let out = solve_ra_game(&s, 3, 3, true, &Budget::default()).unwrap();
        assert!(replay(&RaGame::new(&s, 3).unwrap(), &out, &Budget::default()).unwrap());
    }
}
