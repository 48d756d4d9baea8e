use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// A finite relational structure for pebble games. Only binary relations are
/// used by the games, but arities are kept explicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PebbleStructure {
    pub universe: usize,
    pub relations: Vec<Relation>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    pub tuples: BTreeSet<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum PebbleKind {
    Linear { len: usize },
    CompleteGraph { p: usize },
    /// `I` is the linear order of length `len`, followed by the clique `K_p`.
    #[serde(rename = "mPI")]
    MPI { p: usize, len: usize },
    ReversedLinear { len: usize },
}

impl PebbleStructure {
    pub fn binary(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name == name && r.arity == 2)
    }

    pub fn less(&self) -> &Relation {
        self.binary("<").expect("every pebble structure carries `<`")
    }

    pub fn holds(&self, name: &str, a: usize, b: usize) -> bool {
        self.binary(name).is_some_and(|r| r.tuples.contains(&vec![a, b]))
    }

    pub fn is_well_formed(&self) -> bool {
        self.relations
            .iter()
            .all(|r| r.tuples.iter().all(|t| t.len() == r.arity && t.iter().all(|&x| x < self.universe)))
    }
}

fn with_less(universe: usize, pairs: impl IntoIterator<Item = (usize, usize)>, description: String) -> PebbleStructure {
    PebbleStructure {
        universe,
        relations: vec![Relation {
            name: "<".into(),
            arity: 2,
            tuples: pairs.into_iter().map(|(a, b)| vec![a, b]).collect(),
        }],
        description,
    }
}

pub fn pebble_structure(kind: PebbleKind) -> PebbleStructure {
    match kind {
        PebbleKind::Linear { len } => with_less(
            len,
            (0..len).flat_map(|a| (a + 1..len).map(move |b| (a, b))),
            format!("linear({len})"),
        ),
        PebbleKind::ReversedLinear { len } => with_less(
            len,
            (0..len).flat_map(|a| (a + 1..len).map(move |b| (b, a))),
            format!("reversedLinear({len})"),
        ),
        PebbleKind::CompleteGraph { p } => with_less(
            p,
            (0..p).flat_map(|a| (0..p).filter(move |&b| b != a).map(move |b| (a, b))),
            format!("completeGraph({p})"),
        ),
        PebbleKind::MPI { p, len } => {
            let order = (0..len).flat_map(|a| (a + 1..len).map(move |b| (a, b)));
            let clique = (len..len + p).flat_map(|a| (len..len + p).filter(move |&b| b != a).map(move |b| (a, b)));
            let across = (0..len).flat_map(|i| (len..len + p).flat_map(move |k| [(i, k), (k, i)]));
            with_less(len + p, order.chain(clique).chain(across), format!("M[{p},L{len}]"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_three() {
        let s = pebble_structure(PebbleKind::Linear { len: 3 });
        let want: BTreeSet<Vec<usize>> = [vec![0, 1], vec![0, 2], vec![1, 2]].into_iter().collect();
        assert_eq!(s.less().tuples, want);
    }

    #[test]
    fn m_p_i_has_both_directions_across() {
        let s = pebble_structure(PebbleKind::MPI { p: 2, len: 3 });
        assert_eq!(s.universe, 5);
        for i in 0..3 {
            for k in 3..5 {
                assert!(s.holds("<", i, k) && s.holds("<", k, i));
            }
        }
        assert!(s.holds("<", 3, 4) && s.holds("<", 4, 3));
        assert!(!s.holds("<", 3, 3));
        assert!(s.is_well_formed());
    }

    #[test]
    fn reversed_linear_is_linear_under_reversal() {
        let len = 3;
        let a = pebble_structure(PebbleKind::Linear { len });
        let b = pebble_structure(PebbleKind::ReversedLinear { len });
        let mapped: BTreeSet<Vec<usize>> = a.less().tuples.iter().map(|t| vec![len - 1 - t[0], len - 1 - t[1]]).collect();
        assert_eq!(mapped, b.less().tuples);
    }
}
