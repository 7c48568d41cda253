//! Arithmetic behind simultaneous supersingular reduction of CM elliptic
//! curves: imaginary quadratic class groups, Hilbert class polynomials,
//! supersingular loci over F_{p²}, ideal classes of maximal orders in the
//! definite quaternion algebra ramified at p and ∞, optimal embeddings, and
//! the equidistribution experiments built from them.

pub mod classpoly;
pub mod error;
pub mod ffield;
pub mod numbase;
pub mod quadforms;
pub mod quatalg;
pub mod reduction;
pub mod ssenum;

pub use error::{Error, Result};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
