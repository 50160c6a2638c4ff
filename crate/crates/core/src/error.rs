use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("wave vector kd = {k} sits on the light line (|cos kd - cos phi| = {gap:.3e})")]
    DispersionPole { k: f64, gap: f64 },

    #[error(
        "two-excitation sector needs about {required_mb} MiB but the budget is {budget_mb} MiB; \
         use the iterative (matrix-free) solver or raise the budget"
    )]
    MemoryBudget { required_mb: u64, budget_mb: u64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error(
        "iterative solver did not converge after {iterations} iterations \
         (worst relative residual {worst_residual:.3e}, tolerance {tolerance:.1e})"
    )]
    NonConvergence {
        iterations: usize,
        worst_residual: f64,
        tolerance: f64,
        residuals: Vec<f64>,
    },

    #[error("matrix is singular to working precision: {0}")]
    Singular(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("amplitude has rank one; no second Schmidt orbital (lambda_2 = {lambda2:.3e})")]
    RankOne { lambda2: f64 },

    #[error("no single-particle mode carries index j = {0}")]
    MissingMode(usize),

    #[error(
        "state has Re(eps - omega0) = {0} >= 0; cluster assignment applies to the lower panel only"
    )]
    UpperPanel(f64),

    #[error("zero vector")]
    ZeroVector,
}
