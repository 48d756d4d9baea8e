//! Concrete atom structures and the finite objects built from them.

pub mod bin;
pub mod blur;
pub mod eta;
pub mod matrices;
pub mod monk;
pub mod pebble;
pub mod rainbow;

pub use bin::{bin, compute_psi, kappa};
pub use blur::{blur_check, flexible_ra, monochromatic_forbidden_ra, BlurInstance};
pub use eta::{eta_pea, EtaAtom};
pub use matrices::{basic_matrices, basic_matrices_with_list, enumerate_basic_matrices, BasicMatrix};
pub use monk::monk_ra;
pub use pebble::{pebble_structure, PebbleKind, PebbleStructure};
pub use rainbow::rainbow_ra;
