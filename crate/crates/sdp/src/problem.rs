//! Block-diagonal SDP data in sparse symmetric form.
//!
//! The primal problem is
//!
//! ```text
//!   minimize / maximize  <C, X>
//!   subject to           <A_i, X> = b_i,   i = 1..m
//!                        X = diag(X_1, .., X_k),  X_b psd
//! ```
//!
//! Every matrix is stored as a list of upper-triangle entries; an entry
//! `(block, row, col, v)` with `row < col` stands for both `(row, col)` and
//! `(col, row)`.

use nalgebra::DMatrix;

use crate::error::{Result, SdpError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// A symmetric block-diagonal matrix given by its upper-triangle entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseSym {
    entries: Vec<SymEntry>,
}

impl SparseSym {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `value` at `(row, col)` and its mirror. Repeated positions
    /// accumulate; call [`SparseSym::canonicalize`] to merge them.
    pub fn add(&mut self, block: usize, row: usize, col: usize, value: f64) {
        if value == 0.0 {
            return;
        }
        let (row, col) = if row <= col { (row, col) } else { (col, row) };
        self.entries.push(SymEntry { block, row, col, value });
    }

    /// Sorts entries and merges repeated positions, dropping exact zeros.
    pub fn canonicalize(&mut self) {
        self.entries.sort_by_key(|e| (e.block, e.row, e.col));
        let mut merged: Vec<SymEntry> = Vec::with_capacity(self.entries.len());
        for e in self.entries.drain(..) {
            match merged.last_mut() {
                Some(last) if last.block == e.block && last.row == e.row && last.col == e.col => {
                    last.value += e.value
                }
                _ => merged.push(e),
            }
        }
        merged.retain(|e| e.value != 0.0);
        self.entries = merged;
    }

    /// Adds the symmetric part of a dense matrix on one block.
    pub fn add_dense(&mut self, block: usize, m: &DMatrix<f64>) {
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                let v = if i == j { m[(i, i)] } else { 0.5 * (m[(i, j)] + m[(j, i)]) };
                self.add(block, i, j, v);
            }
        }
    }

    pub fn entries(&self) -> &[SymEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(|e| e.value == 0.0)
    }

    pub fn scale(&mut self, s: f64) {
        for e in &mut self.entries {
            e.value *= s;
        }
    }

    /// `<self, X>` for block-diagonal `X`.
    pub fn inner(&self, x: &[DMatrix<f64>]) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let xb = &x[e.block];
                if e.row == e.col {
                    e.value * xb[(e.row, e.row)]
                } else {
                    e.value * (xb[(e.row, e.col)] + xb[(e.col, e.row)])
                }
            })
            .sum()
    }

    /// Accumulates `alpha * self` into dense blocks.
    pub fn add_to(&self, alpha: f64, out: &mut [DMatrix<f64>]) {
        for e in &self.entries {
            let v = alpha * e.value;
            out[e.block][(e.row, e.col)] += v;
            if e.row != e.col {
                out[e.block][(e.col, e.row)] += v;
            }
        }
    }

    pub fn to_dense(&self, blocks: &[usize]) -> Vec<DMatrix<f64>> {
        let mut out: Vec<_> = blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        self.add_to(1.0, &mut out);
        out
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        let mut c = self.clone();
        c.canonicalize();
        c.entries
            .iter()
            .map(|e| if e.row == e.col { e.value * e.value } else { 2.0 * e.value * e.value })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub matrix: SparseSym,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: SparseSym,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
}

impl SdpProblem {
    pub fn new(blocks: Vec<usize>, sense: Sense) -> Self {
        Self { blocks, objective: SparseSym::new(), constraints: Vec::new(), sense }
    }

    pub fn add_constraint(&mut self, matrix: SparseSym, rhs: f64) -> usize {
        self.constraints.push(Constraint { matrix, rhs });
        self.constraints.len() - 1
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Sum of block sizes, i.e. the barrier degree of the cone.
    pub fn cone_degree(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.iter().map(|c| c.rhs).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(SdpError::IllFormed("no blocks".into()));
        }
        if let Some(b) = self.blocks.iter().position(|&n| n == 0) {
            return Err(SdpError::IllFormed(format!("block {b} has size 0")));
        }
        let check = |m: &SparseSym, what: &str| -> Result<()> {
            for e in m.entries() {
                if e.block >= self.blocks.len() || e.col >= self.blocks[e.block] {
                    return Err(SdpError::IllFormed(format!(
                        "{what}: entry ({}, {}, {}) outside block sizes",
                        e.block, e.row, e.col
                    )));
                }
                if !e.value.is_finite() {
                    return Err(SdpError::IllFormed(format!("{what}: non-finite entry")));
                }
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for (i, c) in self.constraints.iter().enumerate() {
            check(&c.matrix, &format!("constraint {i}"))?;
            if !c.rhs.is_finite() {
                return Err(SdpError::IllFormed(format!("constraint {i}: non-finite rhs")));
            }
        }
        Ok(())
    }

    /// `A(X)`.
    pub fn apply(&self, x: &[DMatrix<f64>]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.matrix.inner(x)).collect()
    }

    /// `sum_i y_i A_i` as dense blocks.
    pub fn adjoint(&self, y: &[f64]) -> Vec<DMatrix<f64>> {
        let mut out = self.zero_blocks();
        for (c, &yi) in self.constraints.iter().zip(y) {
            if yi != 0.0 {
                c.matrix.add_to(yi, &mut out);
            }
        }
        out
    }

    pub fn zero_blocks(&self) -> Vec<DMatrix<f64>> {
        self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect()
    }

    /// Objective matrix as dense blocks, as stated (no sign change).
    pub fn objective_dense(&self) -> Vec<DMatrix<f64>> {
        self.objective.to_dense(&self.blocks)
    }
}
