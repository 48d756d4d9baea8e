use cylinder_core::constructions::{pebble_structure, rainbow_ra, PebbleKind};
use cylinder_core::games::{replay, solve_ef, EfGame, EfMode, GameSpec, Player, RuleSet};
use cylinder_core::games::Arena;
use cylinder_core::Budget;

fn linear(len: usize) -> cylinder_core::constructions::PebbleStructure {
    pebble_structure(PebbleKind::Linear { len })
}

/// Classical r-round EF equivalence of finite linear orders.
fn orders_equivalent(a: usize, b: usize, r: u32) -> bool {
    let t = (1usize << r) - 1;
    a == b || (a >= t && b >= t)
}

#[test]
fn back_and_forth_on_linear_orders_matches_the_classical_threshold() {
    let budget = Budget::default();
    for r in 1..=3u32 {
        for a in 1..=7 {
            for b in 1..=7 {
                let (la, lb) = (linear(a), linear(b));
                let out = solve_ef(&la, &lb, r as usize, r as usize, EfMode::BackAndForth, false, &budget).unwrap();
                let expected = if orders_equivalent(a, b, r) { Player::Exists } else { Player::Forall };
                assert_eq!(out.winner, expected, "L{a} vs L{b}, {r} rounds");
            }
        }
    }
}

#[test]
fn forall_wins_persist_with_more_rounds() {
    let budget = Budget::default();
    let (a, b) = (linear(4), linear(3));
    let mut forall_seen = false;
    for rounds in 0..=5 {
        let out = solve_ef(&a, &b, 2, rounds, EfMode::BackAndForth, false, &budget).unwrap();
        if forall_seen {
            assert_eq!(out.winner, Player::Forall, "round {rounds}");
        }
        forall_seen |= out.winner == Player::Forall;
    }
    assert!(forall_seen);
}

#[test]
fn winning_strategies_replay() {
    let budget = Budget::default();
    let (a, b) = (linear(4), linear(3));
    for rounds in 1..=3 {
        let game = EfGame::new(&a, &b, 2, EfMode::BackAndForth).unwrap();
        let out = cylinder_core::games::solve(&game, rounds, true, &budget).unwrap();
        assert!(replay(&game, &out, &budget).unwrap(), "{rounds} rounds");
    }
}

#[test]
fn game_spec_rejects_mismatched_arenas() {
    let s = rainbow_ra(2, 1).unwrap();
    let spec = GameSpec { rule_set: RuleSet::CaAtomic, pebbles: 3, rounds: 1, reuse: true };
    assert!(spec.solve(Arena::Relational(&s), false, &Budget::default()).is_err());
    let zero = GameSpec { rule_set: RuleSet::RaTriangle, pebbles: 0, rounds: 1, reuse: true };
    assert!(zero.solve(Arena::Relational(&s), false, &Budget::default()).is_err());
}

#[test]
fn tiny_state_budget_is_reported() {
    let budget = Budget { states: 2, ..Budget::default() };
    let err = solve_ef(&linear(6), &linear(5), 3, 4, EfMode::BackAndForth, false, &budget).unwrap_err();
    assert!(err.is_budget());
}
