//! Exact toolkit for discrete optimal transport between finitely
//! supported measures with rational masses.
//!
//! Everything is computed in exact arithmetic: masses and coordinates are
//! rationals, and costs such as Euclidean distances live in a closed
//! radical-sum representation with decidable comparison, so optimality,
//! trimness, and bound checks are certificates rather than tolerances.
//!
//! The main flows:
//!
//! * [`measure`] defines points, measures, cost functions, and
//!   transport instances; [`format`] reads and writes them as JSON.
//! * [`solver`] computes an optimal plan with dual potentials by an exact
//!   transportation simplex, plus an exhaustive oracle for small sizes.
//! * [`plan`] holds sparse transport plans and their support graphs;
//!   [`structure`] reduces an optimal plan to minimal support and
//!   decomposes forest-supported plans into a pair of deterministic maps
//!   (the diffusive model).
//! * [`bottleneck`] computes the min-max transport cost with feasibility
//!   certificates; [`bounds`] relates it to the usual transport cost via
//!   the minimal diffusive atom mass.
//! * [`random`] provides seeded generators for randomized test suites.

pub mod bottleneck;
pub mod bounds;
pub mod error;
pub mod format;
pub mod measure;
pub mod plan;
pub mod random;
pub mod rational;
pub mod scalar;
pub mod solver;
pub mod structure;

pub use error::{Error, Result};
pub use rational::{format_rational, parse_rational, rat, Rational};
pub use scalar::CostValue;
