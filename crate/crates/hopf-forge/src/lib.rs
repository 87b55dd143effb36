//! Plan-file front end: a small declarative language for describing group
//! towers, self-maps, finite-quotient certificates and witness recipes,
//! together with a resolver and a runner that turn a plan into a
//! [`hopf_core::report::VerificationReport`].
//!
//! The pipeline is `lexer` → `parser` → [`resolve`] → [`runner::run`]:
//! parsing is purely syntactic, resolution eagerly constructs and validates
//! every declared object (enumeration, association checks, homomorphism
//! verification), and the runner re-verifies each claim as an auditable
//! report entry.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod resolve;
pub mod runner;
