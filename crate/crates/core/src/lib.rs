//! Fundamental solutions of real-principal-type homogeneous operators,
//! evaluated as functionals on Gaussian test functions.

pub mod error;
pub mod leray;
pub mod oracle;
pub mod pairing;
pub mod poly;
pub mod quadrature;
pub mod radial;
pub mod solution;
pub mod special;
pub mod symbol;
pub mod testfn;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
