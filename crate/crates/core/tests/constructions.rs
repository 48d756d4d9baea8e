use cylinder_core::constructions::bin::{bin_atom, bin_index};
use cylinder_core::constructions::{bin, compute_psi, enumerate_basic_matrices, kappa, monk_ra};
use cylinder_core::graphs::{graph_gen, GraphKind};
use cylinder_core::Budget;
use num_bigint::BigUint;
use proptest::prelude::*;

proptest! {
    #[test]
    fn kappa_is_a_geometric_sum(x in 0u64..12, y in 0u64..12) {
        let sum: BigUint = (0..y as u32).map(|e| BigUint::from(x).pow(e)).sum();
        prop_assert_eq!(kappa(x, y), sum);
    }
}

#[test]
fn small_psi_values() {
    assert_eq!(compute_psi(3, 1).unwrap(), BigUint::from(4u32));
    assert_eq!(compute_psi(4, 1).unwrap(), BigUint::from(14u32));
}

#[test]
fn bin_atom_indexing_is_a_bijection() {
    let s = bin(3, 1, Some(2), &Budget::default()).unwrap();
    let mut count = 0;
    for a in 0..s.len() {
        if let Some(atom) = bin_atom(3, 1, a) {
            assert_eq!(bin_index(3, 1, atom), a);
            count += 1;
        }
    }
    assert!(count > 0);
}

#[test]
fn bin_respects_the_atom_budget() {
    let budget = Budget { atoms: 3, ..Budget::default() };
    assert!(bin(3, 2, Some(2), &budget).unwrap_err().is_budget());
}

#[test]
fn basic_matrices_are_consistent_and_cover_every_atom() {
    let g = graph_gen(GraphKind::Complete { k: 2 }).unwrap();
    let s = monk_ra(&g, 3).unwrap();
    let mats = enumerate_basic_matrices(&s, 3, &Budget::default()).unwrap();
    assert!(mats.iter().all(|f| f.is_valid(&s)));
    for a in 0..s.len() {
        assert!(mats.iter().any(|f| f.get(0, 1) == a), "atom {a}");
    }
}
