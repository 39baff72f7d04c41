//! Strongly stable fractional matchings in many-to-one markets, in exact
//! rational arithmetic.
//!
//! The crate covers the market model and its file formats, classical stable
//! matching machinery with a brute-force oracle, the stability polytope,
//! the strong stability condition and its ordered decomposition, rotations
//! and connected sets, and the convex-hull characterization harness.

pub mod characterize;
pub mod fixtures;
pub mod linalg;
pub mod model;
pub mod polytope;
pub mod rational;
pub mod rotations;
pub mod stability;
pub mod strongstab;

pub use model::{
    acceptable_pairs, incidence_vector, parse_fractional, parse_market, AcceptablePairSet, Agent,
    Decomposition, DecompositionTerm, Firm, FractionalMatching, Market, Matching, Side, Worker,
};
pub use rational::Rational;
