//! Configuration, file formats and command pipelines on top of
//! [`machtherm_core`].

pub mod config;
mod error;
pub mod io;
pub mod pipeline;

pub use config::RunConfig;
pub use error::Error;
pub use machtherm_core as core;
