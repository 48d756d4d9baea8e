use crate::algebra::RaAtomStructure;
use crate::error::{Error, Result};

/// Rainbow relation atom structure with `greens` green atoms and `reds` red atoms.
///
/// Atom 0 is `Id`, then `g0..g{greens-1}`, then `r1..r{reds}`. Forbidden are the
/// identity triples `(Id, x, y)` with `x ≠ y` (in any position), every all-green
/// triple and every monochromatic red triple `(r_j, r_j, r_j)`.
pub fn rainbow_ra(greens: usize, reds: usize) -> Result<RaAtomStructure> {
    if greens == 0 || reds == 0 {
        return Err(Error::InvalidParameter("rainbow_ra needs at least one green and one red".into()));
    }
    let k = 1 + greens + reds;
    let mut labels = vec!["Id".to_string()];
    labels.extend((0..greens).map(|i| format!("g{i}")));
    labels.extend((1..=reds).map(|j| format!("r{j}")));
    let green = |a: usize| (1..=greens).contains(&a);
    RaAtomStructure::from_predicate(labels, &[0], (0..k).collect(), |a, b, c| {
        if a == 0 || b == 0 || c == 0 {
            return (a == 0 && b == c) || (b == 0 && a == c) || (c == 0 && a == b);
        }
        if green(a) && green(b) && green(c) {
            return false;
        }
        !(a == b && b == c)
    })
}

pub fn is_green(greens: usize, a: usize) -> bool {
    (1..=greens).contains(&a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::check_ra_atomstructure;

    #[test]
    fn rainbow_32() {
        let s = rainbow_ra(3, 2).unwrap();
        assert_eq!(s.len(), 6);
        let g = |i: usize| s.atom_by_label(&format!("g{i}")).unwrap();
        assert!(!s.is_consistent(g(0), g(1), g(2)));
        let r1 = s.atom_by_label("r1").unwrap();
        let r2 = s.atom_by_label("r2").unwrap();
        assert!(!s.is_consistent(r1, r1, r1));
        assert!(s.is_consistent(r1, r1, r2));
        assert!(check_ra_atomstructure(&s).passed);
    }
}
