//! Straggler-tolerant distributed matrix multiplication over small finite
//! fields with multivariate polynomial codes and multivariate matdot codes.
//!
//! Modules, bottom-up:
//! - [`field`]: GF(p^e) arithmetic over dense indices.
//! - [`exponents`]: exponent vectors, reduced Minkowski sums, footprints and
//!   hyperbolic sets.
//! - [`constructions`]: degree-set constructions and their size recurrences.
//! - [`codec`]: block splitting, encoding, evaluation, interpolation.
//! - [`simulator`]: deterministic master/worker straggler simulation.
//! - [`tables`]: parameter tables and their bundled golden copies.
//! - [`cli`]: the `dmmcodes` command line.

pub mod cli;
pub mod codec;
pub mod constructions;
pub mod exponents;
pub mod field;
pub mod simulator;
pub mod tables;
