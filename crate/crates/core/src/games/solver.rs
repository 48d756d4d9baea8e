//! Memoized backward induction for finite two-player games with a round bound.
//!
//! A round is one ∀ move followed by one ∃ reply. ∀ wins as soon as ∃ has no
//! legal reply; ∃ wins if ∀ has no move or the rounds run out.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Player {
    Exists,
    Forall,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Exists => Player::Forall,
            Player::Forall => Player::Exists,
        }
    }
}

pub trait Game {
    type Pos: Clone + Eq + Hash + Ord + Debug;

    /// The position before ∀'s first move.
    fn initial(&self) -> Self::Pos;
    /// Positions ∃ faces after each ∀ move.
    fn forall_moves(&self, p: &Self::Pos) -> Result<Vec<Self::Pos>>;
    /// Positions ∀ faces after each ∃ reply.
    fn exists_moves(&self, p: &Self::Pos) -> Result<Vec<Self::Pos>>;
    /// An injective rendering, used for strategy keys.
    fn show(&self, p: &Self::Pos) -> String;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub winner: Player,
    pub rounds: usize,
    pub states_explored: usize,
    /// `"r{rounds left}:{position}"` to the winner's chosen successor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<BTreeMap<String, String>>,
    pub trace: Vec<String>,
}

type MoveCache<P> = HashMap<(P, Player), Rc<Vec<P>>>;

pub struct Solver<'g, G: Game> {
    game: &'g G,
    memo: HashMap<(G::Pos, usize, Player), bool>,
    moves: MoveCache<G::Pos>,
    limit: usize,
}

impl<'g, G: Game> Solver<'g, G> {
    pub fn new(game: &'g G, budget: &Budget) -> Self {
        Solver {
            game,
            memo: HashMap::new(),
            moves: HashMap::new(),
            limit: budget.states,
        }
    }

    pub fn states_explored(&self) -> usize {
        self.memo.len()
    }

    fn children(&mut self, p: &G::Pos, side: Player) -> Result<Rc<Vec<G::Pos>>> {
        if let Some(c) = self.moves.get(&(p.clone(), side)) {
            return Ok(c.clone());
        }
        let mut c = match side {
            Player::Forall => self.game.forall_moves(p)?,
            Player::Exists => self.game.exists_moves(p)?,
        };
        c.sort();
        c.dedup();
        let c = Rc::new(c);
        self.moves.insert((p.clone(), side), c.clone());
        Ok(c)
    }

    /// Whether ∃ wins from `p` with `r` rounds left and `side` to move.
    pub fn exists_wins(&mut self, p: &G::Pos, r: usize, side: Player) -> Result<bool> {
        if side == Player::Forall && r == 0 {
            return Ok(true);
        }
        let key = (p.clone(), r, side);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let kids = self.children(p, side)?;
        let v = match side {
            Player::Forall => {
                let mut all = true;
                for q in kids.iter() {
                    if !self.exists_wins(q, r, Player::Exists)? {
                        all = false;
                        break;
                    }
                }
                all
            }
            Player::Exists => {
                let mut any = false;
                for q in kids.iter() {
                    if self.exists_wins(q, r - 1, Player::Forall)? {
                        any = true;
                        break;
                    }
                }
                any
            }
        };
        self.memo.insert(key, v);
        if self.memo.len() > self.limit {
            return Err(Error::budget("game states", self.memo.len(), self.limit));
        }
        Ok(v)
    }

    /// The least successor that keeps `winner` winning, at a position where `side` moves.
    fn winning_child(&mut self, p: &G::Pos, r: usize, side: Player, winner: Player) -> Result<Option<G::Pos>> {
        let kids = self.children(p, side)?;
        for q in kids.iter() {
            let (r2, s2) = next(r, side);
            let ex = self.exists_wins(q, r2, s2)?;
            if ex == (winner == Player::Exists) {
                return Ok(Some(q.clone()));
            }
        }
        Ok(None)
    }

    fn extract(&mut self, winner: Player, r: usize) -> Result<BTreeMap<String, String>> {
        let mut out = BTreeMap::new();
        let mut seen = HashSet::new();
        let mut stack = vec![(self.game.initial(), r, Player::Forall)];
        while let Some((p, r, side)) = stack.pop() {
            if (side == Player::Forall && r == 0) || !seen.insert((p.clone(), r, side)) {
                continue;
            }
            if side == winner {
                if let Some(q) = self.winning_child(&p, r, side, winner)? {
                    out.insert(strategy_key(self.game, &p, r), self.game.show(&q));
                    let (r2, s2) = next(r, side);
                    stack.push((q, r2, s2));
                }
            } else {
                let (r2, s2) = next(r, side);
                for q in self.children(&p, side)?.iter() {
                    stack.push((q.clone(), r2, s2));
                }
            }
        }
        Ok(out)
    }

    fn trace(&mut self, winner: Player, r: usize) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let (mut p, mut r, mut side) = (self.game.initial(), r, Player::Forall);
        loop {
            out.push(format!("{}{}", tag(side), self.game.show(&p)));
            if side == Player::Forall && r == 0 {
                break;
            }
            let q = if side == winner {
                self.winning_child(&p, r, side, winner)?
            } else {
                self.children(&p, side)?.first().cloned()
            };
            match q {
                Some(q) => {
                    p = q;
                    (r, side) = next(r, side);
                }
                None => break,
            }
        }
        Ok(out)
    }
}

fn next(r: usize, side: Player) -> (usize, Player) {
    match side {
        Player::Forall => (r, Player::Exists),
        Player::Exists => (r - 1, Player::Forall),
    }
}

fn tag(side: Player) -> &'static str {
    match side {
        Player::Forall => "A ",
        Player::Exists => "E ",
    }
}

fn strategy_key<G: Game>(g: &G, p: &G::Pos, r: usize) -> String {
    format!("r{r}:{}", g.show(p))
}

/// Solves the `rounds`-round game from its initial position.
pub fn solve<G: Game>(game: &G, rounds: usize, with_strategy: bool, budget: &Budget) -> Result<GameOutcome> {
    let mut solver = Solver::new(game, budget);
    let exists = solver.exists_wins(&game.initial(), rounds, Player::Forall)?;
    let winner = if exists { Player::Exists } else { Player::Forall };
    let strategy = if with_strategy {
        Some(solver.extract(winner, rounds)?)
    } else {
        None
    };
    let trace = solver.trace(winner, rounds)?;
    Ok(GameOutcome {
        winner,
        rounds,
        states_explored: solver.states_explored(),
        strategy,
        trace,
    })
}

/// Plays the recorded strategy against every opposing move. Returns `false`
/// if some play leaves the strategy or ends in a loss for the declared winner.
pub fn replay<G: Game>(game: &G, outcome: &GameOutcome, budget: &Budget) -> Result<bool> {
    let strategy = outcome
        .strategy
        .as_ref()
        .ok_or_else(|| Error::Precondition("outcome carries no strategy".into()))?;
    let winner = outcome.winner;
    let mut seen = HashSet::new();
    let mut stack = vec![(game.initial(), outcome.rounds, Player::Forall)];
    while let Some((p, r, side)) = stack.pop() {
        if !seen.insert((p.clone(), r, side)) {
            continue;
        }
        if seen.len() > budget.states {
            return Err(Error::budget("replay states", seen.len(), budget.states));
        }
        if side == Player::Forall && r == 0 {
            if winner != Player::Exists {
                return Ok(false);
            }
            continue;
        }
        let mut kids = match side {
            Player::Forall => game.forall_moves(&p)?,
            Player::Exists => game.exists_moves(&p)?,
        };
        if kids.is_empty() {
            // the player to move is stuck and loses
            if winner == side {
                return Ok(false);
            }
            continue;
        }
        kids.sort();
        kids.dedup();
        let (r2, s2) = next(r, side);
        if side == winner {
            let Some(want) = strategy.get(&strategy_key(game, &p, r)) else {
                return Ok(false);
            };
            match kids.into_iter().find(|q| &game.show(q) == want) {
                Some(q) => stack.push((q, r2, s2)),
                None => return Ok(false),
            }
        } else {
            stack.extend(kids.into_iter().map(|q| (q, r2, s2)));
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Subtraction game: a pile of `n`; ∀ removes 1 or 2, then ∃ removes 1 or 2.
    /// Whoever faces an empty pile on their turn is stuck.
    struct Nim(u32);

    impl Game for Nim {
        type Pos = u32;
        fn initial(&self) -> u32 {
            self.0
        }
        fn forall_moves(&self, p: &u32) -> Result<Vec<u32>> {
            Ok((1..=2).filter(|&k| k <= *p).map(|k| p - k).collect())
        }
        fn exists_moves(&self, p: &u32) -> Result<Vec<u32>> {
            self.forall_moves(p)
        }
        fn show(&self, p: &u32) -> String {
            p.to_string()
        }
    }

    /// Independent oracle: the player to move loses exactly on multiples of 3.
    fn mover_loses(n: u32) -> bool {
        n % 3 == 0
    }

    #[test]
    fn subtraction_game_matches_mod_three() {
        for n in 0..14 {
            // with enough rounds the game ends by exhaustion
            let out = solve(&Nim(n), 20, true, &Budget::default()).unwrap();
            let want = if mover_loses(n) { Player::Exists } else { Player::Forall };
            assert_eq!(out.winner, want, "n = {n}");
            assert!(replay(&Nim(n), &out, &Budget::default()).unwrap());
        }
    }

    #[test]
    fn zero_rounds_is_an_exists_win() {
        let out = solve(&Nim(5), 0, true, &Budget::default()).unwrap();
        assert_eq!(out.winner, Player::Exists);
        assert_eq!(out.trace.len(), 1);
    }

    #[test]
    fn tampered_strategy_fails_replay() {
        let mut out = solve(&Nim(4), 20, true, &Budget::default()).unwrap();
        assert_eq!(out.winner, Player::Forall);
        let s = out.strategy.as_mut().unwrap();
        let key = "r20:4".to_string();
        // 4 → 3 is the winning move; 4 → 2 hands ∃ the win
        assert_eq!(s[&key], "3");
        s.insert(key, "2".into());
        assert!(!replay(&Nim(4), &out, &Budget::default()).unwrap());
    }

    #[test]
    fn budget_stops_the_search() {
        let tight = Budget {
            states: 3,
            ..Budget::default()
        };
        assert!(matches!(solve(&Nim(30), 40, false, &tight), Err(e) if e.is_budget()));
    }
}
