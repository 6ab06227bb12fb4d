//! File formats, experiment drivers and the command-line front-end for
//! `lapcg-core`.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod report;
pub mod rhs;

pub use error::CliError;
