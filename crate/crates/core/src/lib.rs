//! Riemannian conjugate gradient with scaled vector transport and hybrid
//! Dai-Yuan / Hestenes-Stiefel coefficients, plus a benchmark harness.

// `!(a < b)` is used where NaN must fail a check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod checks;
pub mod geometry;
pub mod linesearch;
pub mod manifolds;
pub mod problems;
pub mod solver;

pub use geometry::{Manifold, TangentVector, TransportKind};
pub use problems::{InstanceSpec, Objective, Problem, ProblemId};
pub use solver::{BetaRule, ConjugateGradient, SolverConfig, SolverReport};
