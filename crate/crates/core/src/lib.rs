pub mod artifacts;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod gibbs;
pub mod inference;
pub mod model;
pub mod rng;
pub mod simulate;
pub mod splinebasis;
pub mod truncated;

pub use error::{Error, Result};
