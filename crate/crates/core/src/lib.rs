//! Nonlinear-interference aware performance estimation for WDM links with
//! third-order dispersion, EDFA or distributed Raman amplification, and
//! partial nonlinearity compensation.

pub mod amplification;
pub mod cli;
pub mod error;
pub mod gn;
pub mod infotheory;
pub mod optim;
pub mod performance;
pub mod qmc;
pub mod ssfm;
pub mod system;
pub mod units;

pub use error::{Error, Result};
