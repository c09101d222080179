//! File formats, score caching, the external scorer client, the evaluation
//! harness and the command-line front end built on [`ptm2_core`].

#![allow(clippy::result_large_err)]

pub mod cache;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod external;
pub mod harness;
pub mod m2;
pub mod ranking_file;
pub mod report;
pub mod scorers;

pub use error::{Error, Result};
