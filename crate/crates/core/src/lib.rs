//! Finite algebras of relations: atom structures, their complex algebras,
//! pebble and atomic games, bases and bounded representation builders.

pub mod algebra;
pub mod bits;
pub mod constructions;
pub mod budget;
pub mod error;
pub mod games;
pub mod graphs;
pub mod networks;
pub mod relativizer;
pub mod report;

pub use budget::Budget;
pub use error::{Error, Result};
pub use report::{CheckReport, Counterexample};
