//! Exact Mobius calculus and Alladi-type partial sums over arithmetical
//! semigroups, with three concrete backends: monic polynomials over small
//! finite fields, rational and Gaussian integers, and primitive closed path
//! classes of finite graphs.
//!
//! The crate is organized around a [`semigroup::PrimeTable`] (the primes of a
//! semigroup graded by degree or by norm) and [`semigroup::Element`]s over it.
//! Backends build tables and stream elements bucket by bucket; the
//! [`experiments`] module runs the partial-sum and identity experiments on
//! top of any backend.

pub mod backend;
pub mod experiments;
pub mod gaussian;
pub mod graph;
pub mod ints;
pub mod numutil;
pub mod poly;
pub mod semigroup;
pub mod series;

pub use backend::Backend;
pub use semigroup::{
    ArithFn, CoreError, DualityFn, Element, Grading, Prime, PrimeId, PrimeSet, PrimeTable, SizeArg,
    SupportHint,
};
