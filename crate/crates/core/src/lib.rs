//! Rate-region bounds for single-hop networks with arbitrary message
//! knowledge at the transmitters and arbitrary decoding demands.
//!
//! The crate generates the bound families symbolically, evaluates them on
//! discrete memoryless channels, and compares the resulting regions.

pub mod bounds;
pub mod cli;
pub mod eval;
pub mod network;
pub mod polytope;
pub mod presets;
pub mod vsi;

