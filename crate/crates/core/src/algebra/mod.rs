//! Atom structures, complex-algebra evaluation and axiom suites.

pub mod axioms;
pub mod ca;
pub mod ra;
pub mod term;

pub use axioms::{check_ca_axioms, check_ca_axioms_with, AxiomOptions, AxiomVariant};
pub use ca::{quotient_structure, random_ca_structure, QuotientKind, Accessibility, CaAtomStructure, Flavor};
pub use ra::{check_ra_atomstructure, RaAtomStructure};
pub use term::{cm_eval_ca, cm_eval_ra, AlgebraTerm, Env};
