use cylinder_core::algebra::{
    check_ca_axioms, check_ra_atomstructure, quotient_structure, random_ca_structure, AxiomVariant, CaAtomStructure,
    QuotientKind, RaAtomStructure,
};
use cylinder_core::bits::{self, AtomSet};
use cylinder_core::constructions::monk::monk_ra;
use cylinder_core::graphs::Graph;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_graph(max: usize) -> impl Strategy<Value = Graph> {
    (2..=max).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut g = Graph::empty(n);
            let mut it = bits.into_iter();
            for a in 0..n {
                for b in a + 1..n {
                    if it.next().unwrap() {
                        g.add_edge(a, b);
                    }
                }
            }
            g
        })
    })
}

fn subset(k: usize, mask: u64) -> AtomSet {
    bits::from_atoms(k, (0..k).filter(|a| mask >> (a % 64) & 1 == 1))
}

fn monk(g: &Graph) -> RaAtomStructure {
    monk_ra(g, 3).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monk_json_round_trip(g in arb_graph(5)) {
        let s = monk(&g);
        let back = RaAtomStructure::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(serde_json::to_value(back.to_json()).unwrap(), serde_json::to_value(s.to_json()).unwrap());
    }

    #[test]
    fn composition_is_additive(g in arb_graph(4), x in any::<u64>(), y in any::<u64>(), z in any::<u64>()) {
        let s = monk(&g);
        let k = s.len();
        let (x, y, z) = (subset(k, x), subset(k, y), subset(k, z));
        let lhs = s.compose(&x, &bits::union(&y, &z));
        let rhs = bits::union(&s.compose(&x, &y), &s.compose(&x, &z));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn converse_reverses_composition(g in arb_graph(4), x in any::<u64>(), y in any::<u64>()) {
        let s = monk(&g);
        let k = s.len();
        let (x, y) = (subset(k, x), subset(k, y));
        prop_assert_eq!(s.converse_set(&s.converse_set(&x)), x.clone());
        let lhs = s.converse_set(&s.compose(&x, &y));
        let rhs = s.compose(&s.converse_set(&y), &s.converse_set(&x));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn identity_is_neutral(g in arb_graph(5), x in any::<u64>()) {
        let s = monk(&g);
        let x = subset(s.len(), x);
        prop_assert_eq!(s.compose(s.identity(), &x), x.clone());
        prop_assert_eq!(s.compose(&x, s.identity()), x);
    }

    #[test]
    fn random_structures_survive_json(seed in any::<u64>(), noise in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_ca_structure(&mut rng, 3, noise).unwrap();
        let back = CaAtomStructure::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(serde_json::to_value(back.to_json()).unwrap(), serde_json::to_value(s.to_json()).unwrap());
    }

    #[test]
    fn cylindrification_is_a_closure(seed in any::<u64>(), mask in any::<u64>(), i in 0usize..3) {
        let s = quotient_structure(3, QuotientKind::EqualityTypes).unwrap();
        let x = subset(s.len(), mask ^ seed);
        let cx = s.cyl(i, &x);
        prop_assert!(x.is_subset(&cx));
        prop_assert_eq!(s.cyl(i, &cx), cx);
    }
}

#[test]
fn monk_structures_on_small_graphs_are_relation_atom_structures() {
    for g in [Graph::from_edges(2, [(0, 1)]).unwrap(), Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()] {
        let report = check_ra_atomstructure(&monk(&g));
        assert!(report.passed, "{:?}", report.first_failure());
    }
}

#[test]
fn quotients_pass_the_cylindric_axioms() {
    for kind in [QuotientKind::EqualityTypes, QuotientKind::Complement] {
        let s = quotient_structure(3, kind).unwrap();
        let report = check_ca_axioms(&s, AxiomVariant::Ca).unwrap();
        assert!(report.passed, "{kind:?}: {:?}", report.first_failure());
    }
}

#[test]
fn malformed_json_is_rejected() {
    let s = monk(&Graph::from_edges(2, [(0, 1)]).unwrap());
    let mut j = s.to_json();
    j.converse.pop();
    assert!(RaAtomStructure::from_json(&j).is_err());
}
