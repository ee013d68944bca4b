//! Linear matrix inequalities `F(y) = F_0 + sum_i y_i F_i >= 0` optimized
//! over free `y`, solved as the dual of a block SDP.

use freespec_sdp::{solve, SdpProblem, Sense, SolverOptions, SparseSym, Status};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::min_eig;

/// Block-diagonal affine matrix function of `m` free variables.
#[derive(Debug, Clone)]
pub struct Lmi {
    pub blocks: Vec<usize>,
    pub constant: Vec<DMatrix<f64>>,
    /// `coeffs[i][k]` multiplies `y_i` on block `k`.
    pub coeffs: Vec<Vec<DMatrix<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LmiOutcome {
    Optimal { value: f64, y: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl Lmi {
    pub fn new(blocks: Vec<usize>, vars: usize) -> Self {
        let constant = blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        let coeffs = (0..vars).map(|_| blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect()).collect();
        Self { blocks, constant, coeffs }
    }

    pub fn vars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn value(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out = self.constant.clone();
        for (i, yi) in y.iter().enumerate() {
            for (k, o) in out.iter_mut().enumerate() {
                *o += &self.coeffs[i][k] * *yi;
            }
        }
        out
    }

    pub fn min_eig_at(&self, y: &[f64]) -> f64 {
        self.value(y).iter().map(min_eig).fold(f64::INFINITY, f64::min)
    }

    /// The SDP whose dual is `max b^T y s.t. F(y) >= 0`.
    pub fn to_sdp(&self, b: &[f64]) -> SdpProblem {
        let mut p = SdpProblem::new(self.blocks.clone(), Sense::Minimize);
        for (k, c) in self.constant.iter().enumerate() {
            p.objective.add_dense(k, c);
        }
        for (i, row) in self.coeffs.iter().enumerate() {
            let mut a = SparseSym::new();
            for (k, m) in row.iter().enumerate() {
                a.add_dense(k, &(-m));
            }
            p.add_constraint(a, b[i]);
        }
        p
    }

    /// Maximizes `b^T y` subject to `F(y) >= 0`.
    pub fn maximize(&self, b: &[f64], opts: &SolverOptions) -> Result<LmiOutcome> {
        assert_eq!(b.len(), self.vars());
        let p = self.to_sdp(b);
        let sol = solve(&p, opts)?;
        match sol.status {
            Status::Optimal => {
                let value = b.iter().zip(&sol.y).map(|(a, c)| a * c).sum();
                Ok(LmiOutcome::Optimal { value, y: sol.y })
            }
            Status::PrimalInfeasible => Ok(LmiOutcome::Unbounded),
            Status::DualInfeasible => Ok(LmiOutcome::Infeasible),
            Status::Stalled => Err(Error::SolverStalled(format!(
                "LMI solve stopped after {} iterations (gap {:.2e})",
                sol.iterations, sol.gap
            ))),
        }
    }
}
