//! Independent recomputation of solution quality from raw problem data.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, SdpError};
use crate::problem::{SdpProblem, Sense};
use crate::solution::{FarkasRay, SdpSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct RayReport {
    /// `b^T y`; positive for a valid witness.
    pub b_dot_y: f64,
    /// `||sum y_i A_i + S||_F / b^T y`.
    pub residual: f64,
    pub min_eig_s: f64,
}

impl RayReport {
    pub fn certifies(&self, tol: f64) -> bool {
        self.b_dot_y > 0.0 && self.residual <= tol && self.min_eig_s >= -tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub min_eig_x: Vec<f64>,
    pub min_eig_s: Vec<f64>,
    /// `max_i |<A_i, X> - b_i|`.
    pub max_constraint_abs: f64,
    /// `max_i |<A_i, X> - b_i| / (1 + |b_i|)`.
    pub max_constraint_rel: f64,
    /// `||S - (C - sum y_i A_i)||_F / (1 + ||C||_F)` with signs per sense.
    pub dual_residual: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// `|pobj - dobj| / (1 + |pobj| + |dobj|)`.
    pub gap: f64,
    pub ray: Option<RayReport>,
}

impl ResidualReport {
    /// Postconditions for an `Optimal` answer at the given tolerances.
    pub fn satisfies_optimality(&self, tol_feas: f64, tol_gap: f64) -> bool {
        self.min_eig_x.iter().all(|&l| l >= -tol_feas)
            && self.min_eig_s.iter().all(|&l| l >= -tol_feas)
            && self.max_constraint_rel <= tol_feas
            && self.dual_residual <= tol_feas
            && self.gap <= tol_gap
    }
}

pub(crate) fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = 0.5 * (m + m.transpose());
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

fn frob(blocks: &[DMatrix<f64>]) -> f64 {
    blocks.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt()
}

fn check_shapes(p: &SdpProblem, what: &str, blocks: &[DMatrix<f64>]) -> Result<()> {
    if blocks.len() != p.blocks.len() {
        return Err(SdpError::DimensionMismatch(format!(
            "{what}: {} blocks, problem has {}",
            blocks.len(),
            p.blocks.len()
        )));
    }
    for (k, (b, &n)) in blocks.iter().zip(&p.blocks).enumerate() {
        if b.nrows() != n || b.ncols() != n {
            return Err(SdpError::DimensionMismatch(format!(
                "{what}: block {k} is {}x{}, expected {n}x{n}",
                b.nrows(),
                b.ncols()
            )));
        }
    }
    Ok(())
}

/// Farkas-ray quality against the raw data.
pub fn check_ray(p: &SdpProblem, ray: &FarkasRay) -> Result<RayReport> {
    check_shapes(p, "ray S", &ray.s)?;
    if ray.y.len() != p.num_constraints() {
        return Err(SdpError::DimensionMismatch(format!(
            "ray y has {} entries, problem has {} constraints",
            ray.y.len(),
            p.num_constraints()
        )));
    }
    let b_dot_y: f64 = p.rhs().iter().zip(&ray.y).map(|(b, y)| b * y).sum();
    let mut r = p.adjoint(&ray.y);
    for (rb, sb) in r.iter_mut().zip(&ray.s) {
        *rb += sb;
    }
    let residual = if b_dot_y > 0.0 { frob(&r) / b_dot_y } else { f64::INFINITY };
    let min_eig_s = ray.s.iter().map(min_eig).fold(f64::INFINITY, f64::min);
    Ok(RayReport { b_dot_y, residual, min_eig_s })
}

/// Recomputes eigenvalue margins, constraint residuals and the duality gap.
pub fn check_solution(p: &SdpProblem, s: &SdpSolution) -> Result<ResidualReport> {
    check_shapes(p, "X", &s.x)?;
    check_shapes(p, "S", &s.s)?;
    if s.y.len() != p.num_constraints() {
        return Err(SdpError::DimensionMismatch(format!(
            "y has {} entries, problem has {} constraints",
            s.y.len(),
            p.num_constraints()
        )));
    }
    let ax = p.apply(&s.x);
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    for (a, c) in ax.iter().zip(&p.constraints) {
        let r = (a - c.rhs).abs();
        max_abs = max_abs.max(r);
        max_rel = max_rel.max(r / (1.0 + c.rhs.abs()));
    }
    let c = match p.sense {
        Sense::Feasibility => p.zero_blocks(),
        _ => p.objective_dense(),
    };
    let aty = p.adjoint(&s.y);
    // minimize: S = C - A*y ; maximize: S = A*y - C
    let sign = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut dres = 0.0;
    for k in 0..p.blocks.len() {
        let expected = (&c[k] - &aty[k]) * sign;
        dres += (&s.s[k] - expected).norm_squared();
    }
    let dual_residual = dres.sqrt() / (1.0 + frob(&c));
    let primal_objective: f64 = c.iter().zip(&s.x).map(|(a, b)| a.dot(b)).sum();
    let dual_objective: f64 = p.rhs().iter().zip(&s.y).map(|(b, y)| b * y).sum();
    let gap = (primal_objective - dual_objective).abs()
        / (1.0 + primal_objective.abs() + dual_objective.abs());
    let ray = match &s.infeasibility_ray {
        Some(r) => Some(check_ray(p, r)?),
        None => None,
    };
    Ok(ResidualReport {
        min_eig_x: s.x.iter().map(min_eig).collect(),
        min_eig_s: s.s.iter().map(min_eig).collect(),
        max_constraint_abs: max_abs,
        max_constraint_rel: max_rel,
        dual_residual,
        primal_objective,
        dual_objective,
        gap,
        ray,
    })
}
