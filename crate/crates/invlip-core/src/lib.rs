//! Exact-rational toolkit for almost-invariant Lipschitz functions on groups.
//!
//! The crate models groups with left-invariant metrics (free, free-abelian,
//! explicit finite Cayley, or user oracles), Lipschitz functions vanishing at
//! the identity, their invariance defects and directional growth constants,
//! and constructs invariant approximants with certified error bounds. All
//! arithmetic is exact rational; every reported supremum carries a witness.

pub mod approx;
pub mod error;
pub mod finite;
pub mod instances;
pub mod json;
pub mod kernel;
pub mod lipschitz;
pub mod mean_growth;
pub mod orbit;
pub mod presentation;
pub mod qm;
pub mod rational;
pub mod space;
pub mod suite;
pub mod word;

pub use error::{Error, Result};
pub use finite::{FiniteCayley, MetricOracle, Permutation, TabularOracle, DEFAULT_ELEMENT_CAP};

pub use presentation::{exponent_matrix, ExponentMatrix, Presentation};
pub use rational::{format_rat, parse_rat, rat, rat_int, Rat};
pub use space::{Ball, GroupSpace, MetricBackend};
pub use word::{multiply, reduce, Letter, Word};
