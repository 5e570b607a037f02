//! Conjugate-gradient iteration and the beta rules that drive it.

mod beta;
mod cg;

pub use beta::{sigma, BetaError, BetaInputs, BetaRule, DENOMINATOR_GUARD};
pub use cg::{
    solve, ConjugateGradient, Solution, SolverConfig, SolverError, SolverReport, SolverState, StepOutcome,
    Termination, TraceRow, TRACE_CSV_HEADER, WOLFE_SLACK,
};
