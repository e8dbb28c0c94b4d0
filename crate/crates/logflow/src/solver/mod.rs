//! Sparse linear algebra and the nonlinear driver: CSR storage, an
//! incomplete-LU preconditioned GMRES, a direct sparse LU fallback, Newton
//! iteration, and Weissenberg-number continuation.

pub mod csr;
pub mod direct;
pub mod gmres;
pub mod ilut;
pub mod newton;

pub use csr::CsrMatrix;
pub use direct::direct_lu_solve;
pub use gmres::{gmres_solve, GmresConfig};
pub use ilut::{ilut_factor, ilut_factor_shifted, IlutFactors};
pub use newton::{
    continuation, newton_solve, Backend, ContinuationConfig, ContinuationStep, LinearConfig,
    NewtonConfig, NewtonReport, NewtonStep,
};

/// Failure modes of the linear and nonlinear solvers.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    /// The matrix row holds no entries at all, so no factorization or pivot
    /// is possible.
    #[error("matrix row {row} is structurally empty")]
    StructuralZero { row: usize },
    /// GMRES ran out of budget or stopped reducing the residual.
    #[error(
        "GMRES stagnated at relative residual {residual:.3e} after {iters} iterations \
         (target {target:.3e})"
    )]
    GmresStagnation { residual: f64, iters: usize, target: f64 },
    /// The sparse direct factorization failed.
    #[error("direct sparse LU failed: {0}")]
    Direct(String),
    /// Newton hit its iteration cap with the residual still above tolerance.
    #[error("Newton stalled at residual {residual:.3e} after {iters} iterations")]
    NewtonStall { residual: f64, iters: usize },
    /// Continuation exhausted its bisection budget on the way to a target.
    #[error("continuation stalled at parameter {parameter}: {source}")]
    ContinuationStall {
        parameter: f64,
        #[source]
        source: Box<SolverError>,
    },
}
