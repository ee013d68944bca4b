use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    Stalled,
}

/// Farkas witness for primal infeasibility:
/// `sum_i y_i A_i + S = 0`, `S` psd and `b^T y > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasRay {
    pub y: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub status: Status,
    pub x: Vec<DMatrix<f64>>,
    /// Dual multipliers with respect to the stated sense: for minimization
    /// `S = C - sum y_i A_i`, for maximization `S = sum y_i A_i - C`.
    pub y: Vec<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub infeasibility_ray: Option<FarkasRay>,
    /// Primal improving ray `X` psd with `A(X) = 0` when the dual is infeasible.
    pub unbounded_ray: Option<Vec<DMatrix<f64>>>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}
