//! Intermediate branching number of rooted trees, and the walks, percolation,
//! random conductances and firefighting games it controls.

pub mod error;
pub mod experiment;
pub mod firefighter;
pub mod flow_cut;
pub mod generators;
pub mod grigorchuk;
pub mod nathanson;
pub mod numeric;
pub mod percolation;
pub mod rng;
pub mod tree;
pub mod walks;

pub use error::{Error, Result};
