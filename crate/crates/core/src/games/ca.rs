//! The atomic network game on a cylindric atom structure with a node cap.
//!
//! Round 0: ∀ names an atom and ∃ answers with a network on `dimension`
//! nodes labelling `(0, …, n−1)` by it. Later rounds: ∀ names a tuple `x̄`,
//! an index `i` and an atom `a` below `c_i N(x̄)`, and ∃ must produce a node
//! `y` with `N(x̄[i→y]) = a`, either already present or freshly added. At
//! the cap ∀ first deletes a node when pebbles may be reused; otherwise he
//! has nothing left to play.

use std::cell::OnceCell;

use crate::algebra::CaAtomStructure;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::networks::network::{enumerate_networks, extensions, Network};

use super::solver::{solve, Game, GameOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaPos {
    Start,
    Atom(usize),
    Net(Network),
    /// Network, tuple, index, demanded atom.
    Demand(Network, Vec<usize>, usize, usize),
}

pub struct CaGame<'s> {
    pub structure: &'s CaAtomStructure,
    pub cap: usize,
    pub reuse: bool,
    budget: Budget,
    base: OnceCell<Result<Vec<Network>>>,
}

impl<'s> CaGame<'s> {
    pub fn new(structure: &'s CaAtomStructure, cap: usize, reuse: bool, budget: &Budget) -> Result<Self> {
        if cap < structure.dimension() {
            return Err(Error::InvalidParameter(format!(
                "node cap {cap} is below the dimension {}",
                structure.dimension()
            )));
        }
        Ok(CaGame {
            structure,
            cap,
            reuse,
            budget: *budget,
            base: OnceCell::new(),
        })
    }

    fn base(&self) -> Result<&[Network]> {
        match self.base.get_or_init(|| enumerate_networks(self.structure, self.structure.dimension(), &self.budget)) {
            Ok(v) => Ok(v),
            Err(e) => Err(e.clone()),
        }
    }

    /// Demands on `net` not already witnessed inside it (or all of them when
    /// `all`), as canonical demand positions.
    fn demands(&self, net: &Network, all: bool, out: &mut Vec<CaPos>) {
        let s = self.structure;
        let n = s.dimension();
        let (canon, perm) = net.canonical();
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        for idx in 0..net.tuple_count() {
            let t = net.tuple(idx);
            let here = net.labels()[idx] as usize;
            for i in 0..n {
                let mut u = t.clone();
                let mut reach = vec![false; s.len()];
                for y in 0..net.nodes() {
                    u[i] = y;
                    reach[net.get(&u)] = true;
                }
                for &a in s.cyl_acc(i).successors(here) {
                    let a = a as usize;
                    if all || !reach[a] {
                        let mapped: Vec<usize> = t.iter().map(|&x| inv[x]).collect();
                        out.push(CaPos::Demand(canon.clone(), mapped, i, a));
                    }
                }
            }
        }
    }
}

fn canon(net: Network) -> CaPos {
    CaPos::Net(net.canonical().0)
}

impl Game for CaGame<'_> {
    type Pos = CaPos;

    fn initial(&self) -> CaPos {
        CaPos::Start
    }

    fn forall_moves(&self, p: &CaPos) -> Result<Vec<CaPos>> {
        match p {
            CaPos::Start => Ok((0..self.structure.len()).map(CaPos::Atom).collect()),
            CaPos::Net(net) => {
                let mut out = Vec::new();
                if net.nodes() < self.cap {
                    // a demand already witnessed lets ∃ stand still, so it never helps ∀
                    self.demands(net, false, &mut out);
                } else if self.reuse {
                    for z in 0..net.nodes() {
                        self.demands(&net.without_node(z), true, &mut out);
                    }
                }
                Ok(out)
            }
            _ => Err(Error::Precondition("not a ∀ position".into())),
        }
    }

    fn exists_moves(&self, p: &CaPos) -> Result<Vec<CaPos>> {
        let n = self.structure.dimension();
        match p {
            CaPos::Atom(a) => {
                let first: Vec<usize> = (0..n).collect();
                Ok(self
                    .base()?
                    .iter()
                    .filter(|net| net.get(&first) == *a)
                    .map(|net| canon(net.clone()))
                    .collect())
            }
            CaPos::Demand(net, t, i, a) => {
                let mut out = Vec::new();
                let mut u = t.clone();
                let witnessed = (0..net.nodes()).any(|y| {
                    u[*i] = y;
                    net.get(&u) == *a
                });
                if witnessed {
                    out.push(CaPos::Net(net.clone()));
                }
                if net.nodes() < self.cap {
                    u[*i] = net.nodes();
                    for ext in extensions(self.structure, net, &[(u.clone(), *a)], &self.budget)? {
                        out.push(canon(ext));
                    }
                }
                Ok(out)
            }
            _ => Err(Error::Precondition("not an ∃ position".into())),
        }
    }

    fn show(&self, p: &CaPos) -> String {
        let labels = |net: &Network| {
            net.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(".")
        };
        match p {
            CaPos::Start => "start".into(),
            CaPos::Atom(a) => format!("atom {}", self.structure.label(*a)),
            CaPos::Net(net) => format!("{}n[{}]", net.nodes(), labels(net)),
            CaPos::Demand(net, t, i, a) => format!(
                "{}n[{}] demand {:?} c{} {}",
                net.nodes(),
                labels(net),
                t,
                i,
                self.structure.label(*a)
            ),
        }
    }
}

pub fn solve_ca_game(
    s: &CaAtomStructure,
    cap: usize,
    rounds: usize,
    reuse: bool,
    with_strategy: bool,
    budget: &Budget,
) -> Result<GameOutcome> {
    let game = CaGame::new(s, cap, reuse, budget)?;
    solve(&game, rounds, with_strategy, budget)
}
