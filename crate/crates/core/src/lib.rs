//! Numerical laboratory for two-dimensional Reinhardt norms on pairs of
//! matrices: gauges and dual gauges, Birkhoff-James orthogonality, the
//! Property P constant, and the isometry descent.

pub mod descent;
pub mod error;
pub mod gamma;
pub mod linalg;
pub mod norms;
pub mod optimize;
pub mod orthogonality;
pub mod pair;
pub mod serde_util;

pub use error::{Error, Result};
pub use pair::OperatorPair;
