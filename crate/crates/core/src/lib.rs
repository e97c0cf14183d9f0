//! Second-order stationary points on polytopes: hard two-dimensional instances built from
//! ITER, an exact verifier, the SNAP local search and its reduction to LOCALOPT.

pub mod error;
pub mod numeric;
pub mod linalg;
pub mod iter_problems;
pub mod color_field;
pub mod biquintic;
pub mod hard_instance;
pub mod stationarity;
pub mod snap_solver;
pub mod polytope_lattice;
pub mod localopt_reduction;
pub mod box_certifier;
pub mod render;
pub mod synthetic;

pub use error::{Error, Result};
