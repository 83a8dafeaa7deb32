pub mod basis;
pub mod error;
pub mod force;
pub mod loops;
pub mod mie;
pub mod quadrature;
pub mod scattering;
pub mod specfun;
pub mod translation;
pub mod units;

pub use error::{CasimirError, Result};
