//! File formats, streaming reranking and the command-line pipeline around
//! [`kbnovelty_core`].

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod reports;
pub mod sheet;
pub mod split_files;
pub mod stream;
pub mod triples;
pub mod vectors;

pub use error::{Error, Result};
pub use kbnovelty_core;
