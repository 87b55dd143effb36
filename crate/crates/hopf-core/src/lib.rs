//! Word problems, coset enumeration and endomorphism certificates for
//! towers of group constructions.
//!
//! The crate is organised bottom-up:
//!
//! - [`word`]: run-length words over scoped generators, with free and
//!   cyclic reduction.
//! - [`coset`]: Todd-Coxeter enumeration turning a finite presentation
//!   into a verified multiplication table.
//! - [`tower`]: group nodes (finite, free, free abelian, free products,
//!   HNN extensions) with normal forms, equality, element orders and
//!   cyclic-subgroup membership.
//! - [`morphism`]: verified endomorphisms and finite-quotient
//!   certificates for non-membership.
//! - [`recipe`]: the end-to-end pipeline that extends a surjective
//!   endomorphism across a relative extension and assembles a
//!   non-Hopfian witness.
//! - [`report`]: structured pass/fail reporting shared by library
//!   consumers and the command-line front end.
//! - [`selftest`]: seeded property suites over the built-in example
//!   towers, shared between unit tests and the acceptance harness.

pub mod coset;
pub mod morphism;
pub mod recipe;
pub mod report;
pub mod selftest;
pub mod tower;
pub mod word;

pub use coset::{enumerate, CosetError, FinitePresentation, MultiplicationTable};
pub use word::{display_word, GeneratorId, Letter, Word, WordError};
