//! The `Bin(n, r)` atom structures and the κ/ψ size recursion.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::RaAtomStructure;
use crate::budget::Budget;
use crate::error::{Error, Result};

/// `κ(x, 0) = 0`, `κ(x, y + 1) = 1 + x·κ(x, y)`, exactly.
pub fn kappa(x: u64, y: u64) -> BigUint {
    let mut acc = BigUint::zero();
    let x = BigUint::from(x);
    for _ in 0..y {
        acc = BigUint::one() + &x * acc;
    }
    acc
}

/// `ψ(n, r) = κ((n − 1)r, (n − 1)r) + 1`.
pub fn compute_psi(n: u64, r: u64) -> Result<BigUint> {
    if n < 2 {
        return Err(Error::InvalidParameter("ψ needs n ≥ 2".into()));
    }
    let e = (n - 1)
        .checked_mul(r)
        .ok_or_else(|| Error::InvalidParameter("(n−1)·r overflows".into()))?;
    Ok(kappa(e, e) + BigUint::one())
}

/// `ψ(n, r)` when it fits a machine word.
pub fn psi_usize(n: u64, r: u64) -> Result<Option<usize>> {
    Ok(compute_psi(n, r)?.to_usize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinAtom {
    pub k: usize,
    pub i: usize,
    pub j: usize,
}

/// Decodes a non-identity atom index of `bin(n, r, s)`.
pub fn bin_atom(n: usize, r: usize, a: usize) -> Option<BinAtom> {
    if a == 0 {
        return None;
    }
    let t = a - 1;
    let per_k = (n - 1) * r;
    Some(BinAtom {
        k: t / per_k,
        i: (t % per_k) / r,
        j: t % r,
    })
}

pub fn bin_index(n: usize, r: usize, atom: BinAtom) -> usize {
    1 + atom.k * (n - 1) * r + atom.i * r + atom.j
}

/// `Bin(n, r)` with multiplicity `s` (defaults to `ψ(n, r)`).
///
/// A triple of non-identity atoms sharing the same `i` is forbidden when, up to
/// order, it has the shape `(a(i,j), a(i,j), a(i,j'))` with `j' ≤ j`, that is,
/// when its largest `j` occurs at least twice.
pub fn bin(n: usize, r: usize, s: Option<usize>, budget: &Budget) -> Result<RaAtomStructure> {
    if n < 3 || r < 1 {
        return Err(Error::InvalidParameter("bin needs n ≥ 3 and r ≥ 1".into()));
    }
    let s = match s {
        Some(s) if s >= 1 => s,
        Some(_) => return Err(Error::InvalidParameter("multiplicity must be positive".into())),
        None => {
            let psi = compute_psi(n as u64, r as u64)?;
            let needed = BigUint::from((n - 1) * r) * &psi + BigUint::one();
            let needed = needed.to_u128().unwrap_or(u128::MAX);
            budget.check_atoms(needed)?;
            psi.to_usize().expect("fits after the budget check")
        }
    };
    let count = 1u128 + (s as u128) * ((n - 1) * r) as u128;
    budget.check_atoms(count)?;
    let k = count as usize;
    let mut labels = vec!["Id".to_string()];
    for a in 1..k {
        let BinAtom { k, i, j } = bin_atom(n, r, a).unwrap();
        labels.push(format!("a{k}({i},{j})"));
    }
    RaAtomStructure::from_predicate(labels, &[0], (0..k).collect(), |a, b, c| {
        if a == 0 || b == 0 || c == 0 {
            return (a == 0 && b == c) || (b == 0 && a == c) || (c == 0 && a == b);
        }
        let (x, y, z) = (bin_atom(n, r, a).unwrap(), bin_atom(n, r, b).unwrap(), bin_atom(n, r, c).unwrap());
        if !(x.i == y.i && y.i == z.i) {
            return true;
        }
        let top = x.j.max(y.j).max(z.j);
        [x.j, y.j, z.j].iter().filter(|&&j| j == top).count() < 2
    })
}
