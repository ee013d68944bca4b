//! Dense interior-point solver for block-diagonal semidefinite programs.
//!
//! Problems are stated in primal standard form (see [`SdpProblem`]); the
//! solver returns either an optimal primal-dual pair, a Farkas ray proving
//! primal infeasibility, or a primal ray proving dual infeasibility. Every
//! reported residual is recomputed from the raw data by [`check_solution`].

mod check;
mod dump;
mod error;
mod facial;
mod presolve;
mod problem;
mod solution;
mod solver;

pub use check::{check_ray, check_solution, RayReport, ResidualReport};
pub use dump::{from_sdpa, to_sdpa};
pub use error::{Result, SdpError};
pub use facial::{facial_reduction, restricted_adjoint, FacialOutcome, FacialReduction, ReductionStep, FACE_CUT, FACE_TOL};
pub use problem::{Constraint, SdpProblem, Sense, SparseSym, SymEntry};
pub use solution::{FarkasRay, SdpSolution, Status};
pub use solver::{solve, SolverOptions, DOCUMENTED_MAX_BLOCK, DOCUMENTED_MAX_CONSTRAINTS};
