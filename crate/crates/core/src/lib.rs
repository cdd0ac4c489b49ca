//! Interpreters and checkers for a small probabilistic programming language
//! whose only primitives beyond coins are `new()` (a fresh vertex) and
//! `edge(a, b)` (an adjacency query).
//!
//! Backends:
//! - [`exact`]: finite distributions over finite models, exact rationals;
//! - [`symbolic`]: normal forms evaluated against step graphons;
//! - [`rado`]: definable sets and the internal measure on the Rado graph;
//! - [`sampler`]: Monte Carlo forward simulation with memoized edges.

pub mod cli;
pub mod exact;
pub mod graphon;
pub mod lang;
pub mod rado;
pub mod rational;
pub mod sampler;
pub mod symbolic;
pub mod termgen;

pub use rational::Rational;
