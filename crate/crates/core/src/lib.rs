//! Finite-volume toolkit for controlled operators on lattices: block
//! operators with magnetic twists, tight-binding model builders, spectral
//! projections, a Dirac-type index pairing, and symbolic K-theory tables.

pub mod dirac;
pub mod error;
pub mod ktheory;
pub mod lattice;
pub mod models;
pub mod rng;
pub mod spectral;
pub mod roe_ops;

pub use error::{Error, Result};
