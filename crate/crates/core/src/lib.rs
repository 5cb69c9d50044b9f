pub mod audit;
pub mod bench;
pub mod cones;
pub mod error;
pub mod lp;
pub mod numerics;
pub mod polling;
pub mod polyhedron;
pub mod solver;

pub use error::{Error, Result};
