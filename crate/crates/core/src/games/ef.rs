//! Ehrenfeucht–Fraïssé pebble games with reusable pebble pairs.

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::constructions::pebble::PebbleStructure;
use crate::error::{Error, Result};

use super::solver::{solve, Game, GameOutcome};

/// `Forth`: ∀ pebbles only in `A` and ∃ keeps a partial homomorphism `A → B`.
/// `BackAndForth`: ∀ may pebble either side and ∃ keeps a partial isomorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EfMode {
    Forth,
    BackAndForth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EfPos {
    /// Pebbled pairs, sorted.
    Placed(Vec<(usize, usize)>),
    /// Pairs left on the board and ∀'s new pebble awaiting an answer.
    Pending(Vec<(usize, usize)>, Side, usize),
}

pub struct EfGame<'a> {
    pub a: &'a PebbleStructure,
    pub b: &'a PebbleStructure,
    pub pebbles: usize,
    pub mode: EfMode,
    a_rel: Vec<Vec<Vec<bool>>>,
    b_rel: Vec<Vec<Vec<bool>>>,
}

fn matrices(s: &PebbleStructure, names: &[String]) -> Vec<Vec<Vec<bool>>> {
    names
        .iter()
        .map(|name| {
            let mut m = vec![vec![false; s.universe]; s.universe];
            if let Some(r) = s.binary(name) {
                for t in &r.tuples {
                    m[t[0]][t[1]] = true;
                }
            }
            m
        })
        .collect()
}

impl<'a> EfGame<'a> {
    pub fn new(a: &'a PebbleStructure, b: &'a PebbleStructure, pebbles: usize, mode: EfMode) -> Result<Self> {
        if pebbles == 0 {
            return Err(Error::InvalidParameter("at least one pebble pair is needed".into()));
        }
        let mut names: Vec<String> = a
            .relations
            .iter()
            .chain(&b.relations)
            .filter(|r| r.arity == 2)
            .map(|r| r.name.clone())
            .collect();
        names.sort();
        names.dedup();
        Ok(EfGame {
            a_rel: matrices(a, &names),
            b_rel: matrices(b, &names),
            a,
            b,
            pebbles,
            mode,
        })
    }

    /// Whether adding `(x, y)` to the pairs keeps the map legal.
    fn compatible(&self, pairs: &[(usize, usize)], x: usize, y: usize) -> bool {
        let iso = self.mode == EfMode::BackAndForth;
        let fine = |x1: usize, y1: usize, x2: usize, y2: usize| {
            if (x1 == x2) != (y1 == y2) && (iso || x1 == x2) {
                return false;
            }
            self.a_rel.iter().zip(&self.b_rel).all(|(ra, rb)| {
                let fwd = !ra[x1][x2] || rb[y1][y2];
                fwd && (!iso || !rb[y1][y2] || ra[x1][x2])
            })
        };
        fine(x, y, x, y) && pairs.iter().all(|&(x2, y2)| fine(x, y, x2, y2) && fine(x2, y2, x, y))
    }

    fn placements(&self, pairs: &[(usize, usize)]) -> Vec<(Side, usize)> {
        let mut out: Vec<(Side, usize)> = (0..self.a.universe).map(|x| (Side::A, x)).collect();
        if self.mode == EfMode::BackAndForth {
            out.extend((0..self.b.universe).map(|y| (Side::B, y)));
        }
        // pebbling an already pebbled element adds nothing
        out.retain(|&(s, v)| {
            !pairs.iter().any(|&(x, y)| match s {
                Side::A => x == v,
                Side::B => y == v,
            })
        });
        out
    }
}

impl Game for EfGame<'_> {
    type Pos = EfPos;

    fn initial(&self) -> EfPos {
        EfPos::Placed(Vec::new())
    }

    fn forall_moves(&self, p: &EfPos) -> Result<Vec<EfPos>> {
        let EfPos::Placed(pairs) = p else {
            return Err(Error::Precondition("∀ moves from a settled position".into()));
        };
        let mut out = Vec::new();
        let boards: Vec<Vec<(usize, usize)>> = if pairs.len() < self.pebbles {
            vec![pairs.clone()]
        } else {
            (0..pairs.len())
                .map(|k| {
                    let mut q = pairs.clone();
                    q.remove(k);
                    q
                })
                .collect()
        };
        for q in boards {
            for (s, v) in self.placements(&q) {
                out.push(EfPos::Pending(q.clone(), s, v));
            }
        }
        Ok(out)
    }

    fn exists_moves(&self, p: &EfPos) -> Result<Vec<EfPos>> {
        let EfPos::Pending(pairs, side, v) = p else {
            return Err(Error::Precondition("∃ answers a pending pebble".into()));
        };
        let mut out = Vec::new();
        let other = match side {
            Side::A => self.b.universe,
            Side::B => self.a.universe,
        };
        for w in 0..other {
            let (x, y) = match side {
                Side::A => (*v, w),
                Side::B => (w, *v),
            };
            if self.compatible(pairs, x, y) {
                let mut q = pairs.clone();
                q.push((x, y));
                q.sort_unstable();
                out.push(EfPos::Placed(q));
            }
        }
        Ok(out)
    }

    fn show(&self, p: &EfPos) -> String {
        let pairs = |ps: &[(usize, usize)]| ps.iter().map(|(x, y)| format!("{x}-{y}")).collect::<Vec<_>>().join(",");
        match p {
            EfPos::Placed(ps) => format!("[{}]", pairs(ps)),
            EfPos::Pending(ps, s, v) => format!("[{}]+{s:?}{v}", pairs(ps)),
        }
    }
}

pub fn solve_ef(
    a: &PebbleStructure,
    b: &PebbleStructure,
    pebbles: usize,
    rounds: usize,
    mode: EfMode,
    with_strategy: bool,
    budget: &Budget,
) -> Result<GameOutcome> {
    let game = EfGame::new(a, b, pebbles, mode)?;
    solve(&game, rounds, with_strategy, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::pebble::{pebble_structure, PebbleKind};
    use crate::games::solver::{replay, Player};

    fn lin(n: usize) -> PebbleStructure {
        pebble_structure(PebbleKind::Linear { len: n })
    }

    #[test]
    fn two_points_cannot_go_into_one() {
        for mode in [EfMode::Forth, EfMode::BackAndForth] {
            let out = solve_ef(&lin(2), &lin(1), 2, 2, mode, true, &Budget::default()).unwrap();
            assert_eq!(out.winner, Player::Forall);
        }
    }

    #[test]
    fn copycat_on_equal_structures() {
        let s = pebble_structure(PebbleKind::MPI { p: 1, len: 3 });
        for p in 1..4 {
            let out = solve_ef(&s, &s, p, 4, EfMode::BackAndForth, true, &Budget::default()).unwrap();
            assert_eq!(out.winner, Player::Exists);
            let g = EfGame::new(&s, &s, p, EfMode::BackAndForth).unwrap();
            assert!(replay(&g, &out, &Budget::default()).unwrap());
        }
    }

    #[test]
    fn walking_up_a_chain_needs_three_rounds() {
        // ∀ pebbles 1, then 2, then walks the freed pebble to 3
        let w = |r| solve_ef(&lin(4), &lin(3), 2, r, EfMode::Forth, false, &Budget::default()).unwrap().winner;
        assert_eq!(w(2), Player::Exists);
        assert_eq!(w(3), Player::Forall);
    }

    #[test]
    fn an_edge_cannot_fold_onto_an_irreflexive_point() {
        let a = pebble_structure(PebbleKind::CompleteGraph { p: 2 });
        let b = pebble_structure(PebbleKind::CompleteGraph { p: 1 });
        let out = solve_ef(&a, &b, 2, 3, EfMode::Forth, false, &Budget::default()).unwrap();
        // two distinct related points cannot land on one irreflexive point
        assert_eq!(out.winner, Player::Forall);
        let out = solve_ef(&a, &b, 1, 5, EfMode::Forth, false, &Budget::default()).unwrap();
        assert_eq!(out.winner, Player::Exists);
    }
}
