//! Per-cell classification and sampling certificates that no approximate SOSP exists away
//! from the solution cells. The certificates are numerical sampling evidence, not proofs.

mod groups;
mod sampling;

pub use groups::*;
pub use sampling::*;
