//! Numerical toolkit for pairs of orthogonal projections with small products.
//!
//! Everything is built on dense complex matrices. The crate provides validated
//! projections and projection pairs, the 2x2 block form of one projection
//! relative to another, the Halmos five-space decomposition with its angle
//! model, biorthogonal bases, a truncation-family classifier with Fredholm
//! index estimation, and geodesics/charts on the projection manifold.

pub mod classify;
pub mod error;
pub mod generators;
pub mod geodesic;
pub mod halmos;
pub mod numkit;
pub mod projcore;
pub mod spatial;

pub use error::{Error, Result};
pub use numkit::{CMatrix, SubspaceBasis};

