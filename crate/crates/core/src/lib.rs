//! Quantum expander codes: hypergraph-product construction, small-set-flip
//! decoding, percolation analytics and Monte Carlo experiments.

pub mod bitset;
pub mod classical;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod hgp;
pub mod locality;
pub mod noise;
pub mod percolation;
pub mod rational;
pub mod rng;
pub mod ssf;
pub mod stats;

pub use bitset::BitSet;
pub use error::{Error, Result};
pub use rational::Rational;
