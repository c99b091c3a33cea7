//! Heat statistics of a driven three-level system under repeated projective
//! measurements of an observable that does not commute with the Hamiltonian.
//!
//! The chain is two-point: energy is measured at the start and end, and `M`
//! observable measurements are interleaved with unitary evolution. The
//! library computes the joint distribution of the two energy outcomes
//! exactly or by sampling, the characteristic function `G(ε) = ⟨e^{-εQ}⟩`,
//! and the effective inverse temperature at which `G` returns to one.

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod protocol;

pub use error::{Error, Result};
