//! Exact verification engine for formal deformation quantization: Fedosov
//! resolutions, Hochschild and Poisson homology, idempotent lifting and the
//! algebraic index identities, all checked in rational arithmetic.

pub mod cli;
pub mod dgla;
pub mod error;
pub mod fedosov;
pub mod hochschild;
pub mod index;
pub mod linalg;
pub mod poisson;
pub mod starprod;
pub mod weyl;

pub use error::{Error, Result};
