//! Bounded-round builders for relativized representations.

pub mod prenetwork;
pub mod square;

pub use prenetwork::{
    build_prenetwork_rep, h_image, played_elements, validate_rep, validate_rep_on, ForallMove, PartialRep,
    PartialRepJson, Prenetwork, RepOutcome, Schedule, Signature,
};
pub use square::{build_square_rep, validate_square, PartialHypergraph, PartialHypergraphJson};
