use crate::algebra::RaAtomStructure;
use crate::error::{Error, Result};
use crate::graphs::Graph;

/// Index of the atom `(x, colour)`; atom 0 is the identity.
pub fn monk_atom(colours: usize, x: usize, colour: usize) -> usize {
    1 + x * colours + colour
}

/// Monk-style atom structure over `g` with `colours` colours.
///
/// Atoms are `1'` and `(x, i)` for nodes `x` and colours `i`, all self-converse.
/// A monochromatic triple is consistent exactly when its first coordinates
/// span at least one edge of `g`.
pub fn monk_ra(g: &Graph, colours: usize) -> Result<RaAtomStructure> {
    if g.node_count() == 0 {
        return Err(Error::InvalidParameter("monk_ra needs a nonempty graph".into()));
    }
    if colours < 2 {
        return Err(Error::InvalidParameter("monk_ra needs at least 2 colours".into()));
    }
    let k = 1 + g.node_count() * colours;
    let mut labels = vec!["1'".to_string()];
    for x in 0..g.node_count() {
        for i in 0..colours {
            labels.push(format!("({x},{i})"));
        }
    }
    let split = |a: usize| ((a - 1) / colours, (a - 1) % colours);
    RaAtomStructure::from_predicate(labels, &[0], (0..k).collect(), |a, b, c| {
        let ids = [a, b, c].iter().filter(|&&x| x == 0).count();
        if ids > 0 {
            return (a == 0 && b == c) || (b == 0 && a == c) || (c == 0 && a == b);
        }
        let ((xa, ia), (xb, ib), (xc, ic)) = (split(a), split(b), split(c));
        if !(ia == ib && ib == ic) {
            return true;
        }
        g.has_edge(xa, xb) || g.has_edge(xb, xc) || g.has_edge(xa, xc)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::check_ra_atomstructure;
    use crate::bits;
    use crate::graphs::{graph_gen, GraphKind};

    #[test]
    fn k2_three_colours() {
        let g = graph_gen(GraphKind::Complete { k: 2 }).unwrap();
        let s = monk_ra(&g, 3).unwrap();
        assert_eq!(s.len(), 7);
        let (u0, v0) = (monk_atom(3, 0, 0), monk_atom(3, 1, 0));
        assert!(!s.is_consistent(u0, u0, u0));
        // (u,0);(v,0) = {(u,0),(v,0)} ∪ {(x,i) : i ≠ 0}; checked against the defining clauses by hand
        let mut expect = vec![u0, v0];
        for x in 0..2 {
            for i in 1..3 {
                expect.push(monk_atom(3, x, i));
            }
        }
        expect.sort();
        assert_eq!(bits::to_vec(s.compose_atoms(u0, v0)), expect);
        assert!(check_ra_atomstructure(&s).passed);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(monk_ra(&Graph::empty(0), 3).is_err());
        assert!(monk_ra(&Graph::empty(2), 1).is_err());
    }
}
