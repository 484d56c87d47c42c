//! Monte Carlo experiments, file formats and the `suprec` command line on
//! top of [`suprec_core`].

pub mod cli;
mod error;
pub mod experiments;
pub mod io;

pub use error::{Error, Result};
pub use suprec_core as core;
