//! CSS quantum codes from Bruhat intervals of Coxeter groups.

pub mod bruhat;
pub mod chain;
pub mod codes;
pub mod coxeter;
pub mod distance;
pub mod error;
pub mod experiment;
pub mod rng;
pub mod spheres;
pub mod transform;
pub mod weightred;

pub use error::{Error, Result};
