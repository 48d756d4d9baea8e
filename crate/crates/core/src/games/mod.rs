//! Exact solvers for the pebble and network games, and the basis fixpoints
//! that characterize their unbounded versions.

pub mod basis;
pub mod ca;
pub mod ef;
pub mod ra;
pub mod solver;

use serde::{Deserialize, Serialize};

pub use basis::{basis_fixpoint, cylindric_basis_check, relational_basis_fixpoint, FixpointReport};
pub use ca::{solve_ca_game, CaGame};
pub use ef::{solve_ef, EfGame, EfMode};
pub use ra::{solve_ra_game, RaGame};
pub use solver::{replay, solve, Game, GameOutcome, Player};

use crate::algebra::{CaAtomStructure, RaAtomStructure};
use crate::budget::Budget;
use crate::constructions::pebble::PebbleStructure;
use crate::error::{Error, Result};

/// Which game and on which arena.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "ruleSet", rename_all = "camelCase")]
pub enum RuleSet {
    #[serde(rename = "EF")]
    Ef { mode: EfMode },
    CaAtomic,
    RaTriangle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameSpec {
    #[serde(flatten)]
    pub rule_set: RuleSet,
    /// Pebble pairs for EF, node cap otherwise.
    pub pebbles: usize,
    pub rounds: usize,
    #[serde(default = "yes")]
    pub reuse: bool,
}

fn yes() -> bool {
    true
}

/// The arena a [`GameSpec`] is played on.
pub enum Arena<'a> {
    Structures(&'a PebbleStructure, &'a PebbleStructure),
    Cylindric(&'a CaAtomStructure),
    Relational(&'a RaAtomStructure),
}

impl GameSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pebbles == 0 {
            return Err(Error::InvalidParameter("pebbles must be at least 1".into()));
        }
        Ok(())
    }

    pub fn solve(&self, arena: Arena<'_>, with_strategy: bool, budget: &Budget) -> Result<GameOutcome> {
        self.validate()?;
        match (&self.rule_set, arena) {
            (RuleSet::Ef { mode }, Arena::Structures(a, b)) => {
                solve_ef(a, b, self.pebbles, self.rounds, *mode, with_strategy, budget)
            }
            (RuleSet::CaAtomic, Arena::Cylindric(s)) => {
                solve_ca_game(s, self.pebbles, self.rounds, self.reuse, with_strategy, budget)
            }
            (RuleSet::RaTriangle, Arena::Relational(s)) => solve_ra_game(s, self.pebbles, self.rounds, with_strategy, budget),
            _ => Err(Error::InvalidParameter("arena does not match the rule set".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_read_with_the_rule_set_inline() {
        let spec: GameSpec =
            serde_json::from_str(r#"{"ruleSet": "EF", "mode": "forth", "pebbles": 1, "rounds": 6}"#).unwrap();
        assert!(matches!(spec.rule_set, RuleSet::Ef { mode: EfMode::Forth }));
        assert!(spec.reuse);
        let back: GameSpec = serde_json::from_value(serde_json::to_value(&spec).unwrap()).unwrap();
        assert_eq!(back.rounds, 6);
    }
}
