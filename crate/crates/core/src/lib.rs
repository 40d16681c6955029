pub mod algorithms;
pub mod ci_tests;
pub mod cli;
pub mod error;
pub mod graph;
pub mod imset;
pub mod lp;
pub mod moves;
pub mod nodeset;
pub mod polytope;
pub mod scoring;
pub mod simulation;

pub use error::{Error, Result};
pub use nodeset::NodeSet;
