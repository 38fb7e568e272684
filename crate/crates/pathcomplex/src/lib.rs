//! Path simplicial complexes from posets, lattices, and matroids:
//! spectral expansion certificates, conic quadratic checks on exact
//! rationals, log-concave coefficient sequences, and down-up walk sampling.

pub mod complex;
pub mod error;
pub mod lorentzian;
pub mod rat;

pub mod matroid;
pub mod order;
pub mod sampler;
pub mod spectral;

pub use error::{Error, Result};
pub use rat::Rat;
