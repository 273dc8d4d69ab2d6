//! Potts model on trees with edge weight `w ∈ [0, 1]`: exact marginals, the
//! square-root-ratio recursion, numerical checks of the contraction bounds,
//! and decay experiments.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod params;
pub mod recursion;
pub mod tree;

pub use error::{PottsError, Result};
pub use params::PottsParams;
pub use recursion::{apply_f, jacobian_f, JacobianFactors, Segment};
pub use tree::{BoundaryCondition, RatioVector, RootedTree, SqrtRatioVector};
