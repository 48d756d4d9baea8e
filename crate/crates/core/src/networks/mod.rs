//! Networks over cylindric atom structures, hypernetworks, and the coloured
//! graphs of the rainbow construction.

pub mod coloured;
pub mod hyper;
pub mod network;

pub use coloured::{extend_coloured_graph, validate_coloured_graph, Colour, ColouredGraph, Extension, ExtensionParams};
pub use hyper::{check_hyperbasis, matrix_hypernetworks, validate_hypernetwork, HyperbasisOptions, Hypernetwork};
pub use network::{enumerate_networks, extensions, validate_network, Network};
