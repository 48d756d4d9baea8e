//! Terms over the complex algebra of an atom structure.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ca::CaAtomStructure;
use super::ra::RaAtomStructure;
use crate::bits::{self, AtomSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op", content = "args")]
pub enum AlgebraTerm {
    Var(String),
    Atom(usize),
    Zero,
    One,
    Identity,
    Diag(usize, usize),
    Complement(Box<AlgebraTerm>),
    Converse(Box<AlgebraTerm>),
    Cyl(usize, Box<AlgebraTerm>),
    /// `s^i_j`
    Subst(usize, usize, Box<AlgebraTerm>),
    /// `s_[ij]`
    Transp(usize, usize, Box<AlgebraTerm>),
    /// `t^i_j`
    Tsub(usize, usize, Box<AlgebraTerm>),
    Join(Box<AlgebraTerm>, Box<AlgebraTerm>),
    Meet(Box<AlgebraTerm>, Box<AlgebraTerm>),
    Compose(Box<AlgebraTerm>, Box<AlgebraTerm>),
}

pub type Env = BTreeMap<String, AtomSet>;

impl AlgebraTerm {
    pub fn var(name: &str) -> Self {
        AlgebraTerm::Var(name.to_string())
    }

    pub fn complement(self) -> Self {
        AlgebraTerm::Complement(Box::new(self))
    }

    pub fn converse(self) -> Self {
        AlgebraTerm::Converse(Box::new(self))
    }

    pub fn cyl(i: usize, t: Self) -> Self {
        AlgebraTerm::Cyl(i, Box::new(t))
    }

    pub fn subst(i: usize, j: usize, t: Self) -> Self {
        AlgebraTerm::Subst(i, j, Box::new(t))
    }

    pub fn transp(i: usize, j: usize, t: Self) -> Self {
        AlgebraTerm::Transp(i, j, Box::new(t))
    }

    pub fn tsub(i: usize, j: usize, t: Self) -> Self {
        AlgebraTerm::Tsub(i, j, Box::new(t))
    }

    pub fn join(a: Self, b: Self) -> Self {
        AlgebraTerm::Join(Box::new(a), Box::new(b))
    }

    pub fn meet(a: Self, b: Self) -> Self {
        AlgebraTerm::Meet(Box::new(a), Box::new(b))
    }

    pub fn compose(a: Self, b: Self) -> Self {
        AlgebraTerm::Compose(Box::new(a), Box::new(b))
    }

    fn name(&self) -> &'static str {
        match self {
            AlgebraTerm::Var(_) => "var",
            AlgebraTerm::Atom(_) => "atom",
            AlgebraTerm::Zero => "zero",
            AlgebraTerm::One => "one",
            AlgebraTerm::Identity => "identity",
            AlgebraTerm::Diag(..) => "diag",
            AlgebraTerm::Complement(_) => "complement",
            AlgebraTerm::Converse(_) => "converse",
            AlgebraTerm::Cyl(..) => "cyl",
            AlgebraTerm::Subst(..) => "subst",
            AlgebraTerm::Transp(..) => "transp",
            AlgebraTerm::Tsub(..) => "tsub",
            AlgebraTerm::Join(..) => "join",
            AlgebraTerm::Meet(..) => "meet",
            AlgebraTerm::Compose(..) => "compose",
        }
    }
}

fn lookup(env: &Env, name: &str, k: usize) -> Result<AtomSet> {
    let v = env
        .get(name)
        .ok_or_else(|| Error::UnboundVariable(name.to_string()))?;
    if v.len() != k {
        return Err(Error::InvalidParameter(format!(
            "variable `{name}` has width {} but the structure has {k} atoms",
            v.len()
        )));
    }
    Ok(v.clone())
}

fn atom(a: usize, k: usize) -> Result<AtomSet> {
    if a >= k {
        return Err(Error::InvalidParameter(format!("atom {a} out of range ({k} atoms)")));
    }
    Ok(bits::singleton(k, a))
}

/// Evaluates `t` in the complex algebra of a relation atom structure.
pub fn cm_eval_ra(s: &RaAtomStructure, t: &AlgebraTerm, env: &Env) -> Result<AtomSet> {
    let k = s.len();
    let ev = |u: &AlgebraTerm| cm_eval_ra(s, u, env);
    Ok(match t {
        AlgebraTerm::Var(v) => lookup(env, v, k)?,
        AlgebraTerm::Atom(a) => atom(*a, k)?,
        AlgebraTerm::Zero => bits::empty(k),
        AlgebraTerm::One => bits::full(k),
        AlgebraTerm::Identity => s.identity().clone(),
        AlgebraTerm::Complement(u) => bits::complement(&ev(u)?),
        AlgebraTerm::Converse(u) => s.converse_set(&ev(u)?),
        AlgebraTerm::Join(a, b) => bits::union(&ev(a)?, &ev(b)?),
        AlgebraTerm::Meet(a, b) => bits::intersection(&ev(a)?, &ev(b)?),
        AlgebraTerm::Compose(a, b) => s.compose(&ev(a)?, &ev(b)?),
        other => {
            return Err(Error::OperatorUnavailable {
                op: other.name().into(),
                flavor: "relation algebras".into(),
            })
        }
    })
}

/// Evaluates `t` in the complex algebra of a cylindric-type atom structure.
pub fn cm_eval_ca(s: &CaAtomStructure, t: &AlgebraTerm, env: &Env) -> Result<AtomSet> {
    let k = s.len();
    let flavor = s.flavor();
    let ev = |u: &AlgebraTerm| cm_eval_ca(s, u, env);
    let unavailable = |t: &AlgebraTerm| Error::OperatorUnavailable {
        op: t.name().into(),
        flavor: flavor.to_string(),
    };
    let needs_diag = |t: &AlgebraTerm| {
        if flavor.has_diagonals() {
            Ok(())
        } else {
            Err(unavailable(t))
        }
    };
    Ok(match t {
        AlgebraTerm::Var(v) => lookup(env, v, k)?,
        AlgebraTerm::Atom(a) => atom(*a, k)?,
        AlgebraTerm::Zero => bits::empty(k),
        AlgebraTerm::One => bits::full(k),
        AlgebraTerm::Diag(i, j) => {
            needs_diag(t)?;
            s.check_index(*i)?;
            s.check_index(*j)?;
            s.diag(*i, *j).clone()
        }
        AlgebraTerm::Complement(u) => bits::complement(&ev(u)?),
        AlgebraTerm::Join(a, b) => bits::union(&ev(a)?, &ev(b)?),
        AlgebraTerm::Meet(a, b) => bits::intersection(&ev(a)?, &ev(b)?),
        AlgebraTerm::Cyl(i, u) => {
            s.check_index(*i)?;
            s.cyl(*i, &ev(u)?)
        }
        AlgebraTerm::Subst(i, j, u) => {
            needs_diag(t)?;
            s.check_index(*i)?;
            s.check_index(*j)?;
            s.subst_ij(*i, *j, &ev(u)?)
        }
        AlgebraTerm::Tsub(i, j, u) => {
            needs_diag(t)?;
            s.check_index(*i)?;
            s.check_index(*j)?;
            s.t_ij(*i, *j, &ev(u)?)
        }
        AlgebraTerm::Transp(i, j, u) => {
            if !flavor.has_transpositions() {
                return Err(unavailable(t));
            }
            s.check_index(*i)?;
            s.check_index(*j)?;
            let x = ev(u)?;
            s.transpose(*i, *j, &x).ok_or_else(|| unavailable(t))?
        }
        AlgebraTerm::Identity | AlgebraTerm::Converse(_) | AlgebraTerm::Compose(..) => {
            return Err(unavailable(t))
        }
    })
}
