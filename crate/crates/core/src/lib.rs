//! Periodicity criteria and simulation tools for elliptical billiards in
//! Euclidean and Lobachevsky space.

pub mod cayley;
pub mod cli;
pub mod confocal;
pub mod dynamics;
pub mod error;
pub mod hierarchy;
pub mod numeric;
pub mod poly;
pub mod potentials;

pub use error::{Error, Result};
pub use nalgebra;
