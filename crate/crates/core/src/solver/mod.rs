//! Semidefinite programming: a modeling layer over Hermitian variables and
//! an interior-point solver for the lowered real symmetric problem.

mod embed;
mod ipm;
mod model;

use serde::{Deserialize, Serialize};

pub use embed::{hermitian_embed, hermitian_unembed};
pub use model::{
    opnorm_epigraph, tracenorm_epigraph, HermExpr, HermitianVar, LinExpr, ScalarVar, SdpProblem,
    SdpSolution,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative duality gap `|p − d| / max(1, |p|)` required for optimality.
    pub gap_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub max_iterations: usize,
    pub step_fraction: f64,
    /// Problems with more real unknowns are refused with `SizeLimit`.
    pub max_variables: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tolerance: 1e-8,
            feasibility_tolerance: 1e-8,
            max_iterations: 200,
            step_fraction: 0.99,
            max_variables: 4096,
        }
    }
}
