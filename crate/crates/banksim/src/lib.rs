//! Configuration files, output bundles and ensemble drivers around
//! [`banksim_core`].

pub mod config;
pub mod ensemble;
pub mod error;
pub mod matrix;
pub mod output;

pub use banksim_core as core;
pub use error::CliError;
