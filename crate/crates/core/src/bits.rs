//! Atom sets are dense bitsets over atom indices.

use fixedbitset::FixedBitSet;

pub type AtomSet = FixedBitSet;

pub fn empty(len: usize) -> AtomSet {
    FixedBitSet::with_capacity(len)
}

pub fn full(len: usize) -> AtomSet {
    let mut s = FixedBitSet::with_capacity(len);
    s.insert_range(..);
    s
}

pub fn singleton(len: usize, atom: usize) -> AtomSet {
    let mut s = FixedBitSet::with_capacity(len);
    s.insert(atom);
    s
}

pub fn from_atoms<I: IntoIterator<Item = usize>>(len: usize, atoms: I) -> AtomSet {
    let mut s = FixedBitSet::with_capacity(len);
    for a in atoms {
        s.insert(a);
    }
    s
}

pub fn to_vec(s: &AtomSet) -> Vec<usize> {
    s.ones().collect()
}

pub fn complement(s: &AtomSet) -> AtomSet {
    let mut c = s.clone();
    c.toggle_range(..);
    c
}

pub fn union(a: &AtomSet, b: &AtomSet) -> AtomSet {
    let mut u = a.clone();
    u.union_with(b);
    u
}

pub fn intersection(a: &AtomSet, b: &AtomSet) -> AtomSet {
    let mut u = a.clone();
    u.intersect_with(b);
    u
}

pub fn is_empty(s: &AtomSet) -> bool {
    s.is_clear()
}
