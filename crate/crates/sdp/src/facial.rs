//! Facial reduction for primal problems without a strictly feasible point.
//!
//! Each step finds `y` with `b^T y = 0` and `S = -sum_i y_i A_i` psd and
//! nonzero on the current face. Every feasible `X` then satisfies
//! `<S, X> = 0`, so `X` lives on the null space of `S` and the face shrinks.
//! The chain ends either with a `y` whose restricted `S` is psd and
//! `b^T y > 0`, which proves infeasibility, or when no exposing vector
//! exists.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::Result;
use crate::problem::{SdpProblem, Sense, SparseSym};
use crate::solution::Status;
use crate::solver::{solve, SolverOptions};

/// Eigenvalues below this fraction of the largest count as zero when an
/// exposing matrix is split into range and null space.
pub const FACE_CUT: f64 = 1e-6;

/// Auxiliary optima above this value are treated as positive.
pub const FACE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionStep {
    /// Multipliers with `b^T y = 0` and `-sum y_i A_i` psd on the face.
    pub y: Vec<f64>,
    /// Orthonormal face bases per block after this step.
    pub faces: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FacialOutcome {
    /// `-sum y_i A_i` is psd on the final face and `b^T y > 0`.
    Infeasible { y: Vec<f64> },
    /// No further exposing vector: the face problem is strictly feasible
    /// or strongly infeasible only beyond the tolerances.
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacialReduction {
    pub steps: Vec<ReductionStep>,
    pub outcome: FacialOutcome,
}

impl FacialReduction {
    /// Face bases after the last step (identities when no step was taken).
    pub fn final_faces(&self, p: &SdpProblem) -> Vec<DMatrix<f64>> {
        match self.steps.last() {
            Some(s) => s.faces.clone(),
            None => p.blocks.iter().map(|&n| DMatrix::identity(n, n)).collect(),
        }
    }

    pub fn proves_infeasible(&self) -> bool {
        matches!(self.outcome, FacialOutcome::Infeasible { .. })
    }
}

/// `V_k^T (sum_i y_i A_i) V_k` for each block.
pub fn restricted_adjoint(p: &SdpProblem, y: &[f64], faces: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    p.adjoint(y).iter().zip(faces).map(|(m, v)| v.transpose() * m * v).collect()
}

fn restrict(m: &SparseSym, blocks: &[usize], faces: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    m.to_dense(blocks).iter().zip(faces).map(|(a, v)| v.transpose() * a * v).collect()
}

/// Builds the SDP whose dual is `max c^T z` over `y = N z` subject to
/// `-sum y_i A_i >= 0` on the face, `tr <= 1` and `|z|_inf <= 1`.
fn auxiliary(restricted: &[Vec<DMatrix<f64>>], basis: &DMatrix<f64>, c: &[f64]) -> SdpProblem {
    let face_dims: Vec<usize> = restricted[0].iter().map(|m| m.nrows()).collect();
    let live: Vec<usize> = (0..face_dims.len()).filter(|&k| face_dims[k] > 0).collect();
    let nz = basis.ncols();
    let mut blocks: Vec<usize> = live.iter().map(|&k| face_dims[k]).collect();
    let trace_block = blocks.len();
    blocks.push(1);
    let box_start = blocks.len();
    blocks.extend(std::iter::repeat(1).take(2 * nz));
    let mut p = SdpProblem::new(blocks, Sense::Minimize);
    p.objective.add(trace_block, 0, 0, 1.0);
    for j in 0..2 * nz {
        p.objective.add(box_start + j, 0, 0, 1.0);
    }
    for (zi, &cz) in c.iter().enumerate() {
        // coefficient matrix of z_zi in C - sum z A' must equal the LMI
        let mut a = SparseSym::new();
        let mut trace = 0.0;
        for (bi, &k) in live.iter().enumerate() {
            let mut m = DMatrix::zeros(face_dims[k], face_dims[k]);
            for (i, r) in restricted.iter().enumerate() {
                let w = basis[(i, zi)];
                if w != 0.0 {
                    m += &r[k] * w;
                }
            }
            trace += m.trace();
            a.add_dense(bi, &m);
        }
        a.add(trace_block, 0, 0, -trace);
        a.add(box_start + 2 * zi, 0, 0, 1.0);
        a.add(box_start + 2 * zi + 1, 0, 0, -1.0);
        a.canonicalize();
        p.add_constraint(a, cz);
    }
    p
}

/// Orthonormal basis of `{y : b^T y = 0}` (or all of `R^m` when `b = 0`).
fn kernel_of_rhs(b: &[f64]) -> DMatrix<f64> {
    let m = b.len();
    let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let id = DMatrix::<f64>::identity(m, m);
    if norm == 0.0 {
        return id;
    }
    let u = DMatrix::from_column_slice(m, 1, b) / norm;
    let proj = &id - &u * u.transpose();
    let eig = SymmetricEigen::new(proj);
    let cols: Vec<_> = (0..m).filter(|&k| eig.eigenvalues[k] > 0.5).map(|k| eig.eigenvectors.column(k).into_owned()).collect();
    if cols.is_empty() {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Solves the auxiliary problem and returns `(value, y)`.
fn exposing(
    p: &SdpProblem,
    faces: &[DMatrix<f64>],
    basis: &DMatrix<f64>,
    objective: &dyn Fn(&DMatrix<f64>) -> Vec<f64>,
    opts: &SolverOptions,
) -> Result<Option<(f64, Vec<f64>)>> {
    if basis.ncols() == 0 {
        return Ok(None);
    }
    let restricted: Vec<Vec<DMatrix<f64>>> = p.constraints.iter().map(|c| restrict(&c.matrix, &p.blocks, faces)).collect();
    let c = objective(basis);
    let aux = auxiliary(&restricted, basis, &c);
    let sol = solve(&aux, opts)?;
    if !matches!(sol.status, Status::Optimal | Status::Stalled) {
        return Ok(None);
    }
    let z = nalgebra::DVector::from_vec(sol.y.clone());
    let y = basis * z;
    let value = c.iter().zip(sol.y.iter()).map(|(a, b)| a * b).sum();
    Ok(Some((value, y.iter().copied().collect())))
}

/// Runs facial reduction on the primal feasible set of `p`.
pub fn facial_reduction(p: &SdpProblem, opts: &SolverOptions) -> Result<FacialReduction> {
    p.validate()?;
    let b = p.rhs();
    let m = b.len();
    let mut faces: Vec<DMatrix<f64>> = p.blocks.iter().map(|&n| DMatrix::identity(n, n)).collect();
    let mut steps = Vec::new();
    let full = DMatrix::<f64>::identity(m, m);
    let max_steps = p.cone_degree() + 1;
    for _ in 0..max_steps {
        // stage 1: a ray with b^T y > 0 on the current face
        let bb = b.clone();
        let by_rhs = move |n: &DMatrix<f64>| (0..n.ncols()).map(|k| n.column(k).iter().zip(&bb).map(|(a, c)| a * c).sum()).collect();
        if let Some((value, y)) = exposing(p, &faces, &full, &by_rhs, opts)? {
            let s = restricted_adjoint(p, &y, &faces);
            let psd = s.iter().all(|m| m.nrows() == 0 || SymmetricEigen::new(-m).eigenvalues.min() >= -FACE_TOL * 1e-2);
            if value > FACE_TOL && psd {
                return Ok(FacialReduction { steps, outcome: FacialOutcome::Infeasible { y } });
            }
        }
        // stage 2: an exposing matrix with b^T y = 0 and maximal trace
        let kernel = kernel_of_rhs(&b);
        let restricted: Vec<Vec<DMatrix<f64>>> = p.constraints.iter().map(|c| restrict(&c.matrix, &p.blocks, &faces)).collect();
        let trace_obj = |n: &DMatrix<f64>| {
            (0..n.ncols())
                .map(|k| {
                    -restricted.iter().enumerate().map(|(i, r)| n[(i, k)] * r.iter().map(|mm| mm.trace()).sum::<f64>()).sum::<f64>()
                })
                .collect()
        };
        let Some((value, y)) = exposing(p, &faces, &kernel, &trace_obj, opts)? else {
            break;
        };
        if value <= FACE_TOL {
            break;
        }
        let s = restricted_adjoint(p, &y, &faces);
        let mut next = Vec::with_capacity(faces.len());
        for (k, sk) in s.iter().enumerate() {
            let r = sk.nrows();
            if r == 0 {
                next.push(faces[k].clone());
                continue;
            }
            let eig = SymmetricEigen::new(-sk);
            let top = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
            let keep: Vec<_> = (0..r)
                .filter(|&i| eig.eigenvalues[i] <= FACE_CUT * top.max(f64::MIN_POSITIVE))
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect();
            let n = faces[k].nrows();
            next.push(if keep.is_empty() { DMatrix::zeros(n, 0) } else { &faces[k] * DMatrix::from_columns(&keep) });
        }
        faces = next;
        log::debug!("facial reduction step: face dims {:?}", faces.iter().map(|f| f.ncols()).collect::<Vec<_>>());
        steps.push(ReductionStep { y, faces: faces.clone() });
    }
    Ok(FacialReduction { steps, outcome: FacialOutcome::Reduced })
}
