//! Exact inner products, L2 distances and vertical matching of
//! piecewise-linear terrains (TINs) over a common rectangle.

pub mod cli;
pub mod cliques;
pub mod error;
pub mod fastinner;
pub mod fastpoly;
pub mod field;
pub mod geom;
pub mod integrate;
pub mod locate;
pub mod matching;
pub mod ops;
pub mod scalar;
pub mod sympoly;

pub use error::{Error, Result};
pub use scalar::Scalar;
