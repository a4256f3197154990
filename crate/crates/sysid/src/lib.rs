//! Monte Carlo sample-complexity experiments, text file formats and the
//! command-line front end built on [`sysid_core`].

pub mod cli;
pub mod config;
mod error;
pub mod io;
pub mod mc;

pub use error::{Error, Result};
