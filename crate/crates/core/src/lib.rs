//! Core algorithms for commonsense knowledge base completion with novelty
//! control.
//!
//! The crate is `no_std` and needs only `alloc`. It covers:
//!
//! - [`corpus`]: phrases, triples, dataset splits and swap negatives,
//! - [`embeddings`]: word vector tables and phrase composition,
//! - [`scorers`]: the Factorized, Prototypical, DNN and Bilinear triple
//!   scorers with analytic gradients,
//! - [`optim`] and [`train`]: Adagrad, the training loop, dev threshold
//!   selection and F1,
//! - [`novelty`]: the embedding distance to the training set, exact
//!   neighbour retrieval, quantile buckets and the top-K distance curve,
//! - [`miner`]: candidate ordering, per-bucket top-k lists and annotator
//!   agreement.
//!
//! File formats, streaming and the command line live in the `kbnovelty`
//! companion crate.
#![no_std]

extern crate alloc;

pub mod corpus;
pub mod embeddings;
mod error;
pub mod linalg;
pub mod miner;
pub mod novelty;
pub mod optim;
pub mod rng;
pub mod scorers;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};
