//! Discrimination of quantum measurements from a single probe, with and
//! without an entangled reference system.

pub mod cli;
pub mod constructions;
pub mod entangled;
pub mod error;
pub mod matcore;
pub mod measurements;
pub mod single_system;

pub use error::{Error, Result};
