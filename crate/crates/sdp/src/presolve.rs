//! Row scaling and removal of linearly dependent equality constraints.

use nalgebra::DMatrix;

use crate::problem::{SparseSym, SymEntry};

pub(crate) enum Dependency {
    /// Row `row` equals `sum_k coeffs[k] * A_{basis[k]}` and is consistent.
    Redundant,
    /// Row is a combination of others with mismatched right-hand side;
    /// `y` (indexed like the input rows) satisfies `A^T y ~ 0`, `b^T y = 1`.
    Inconsistent { y: Vec<f64> },
}

pub(crate) struct Presolved {
    /// Indices of retained rows.
    pub keep: Vec<usize>,
    pub inconsistent: Option<Vec<f64>>,
}

/// Gram matrix `K_ij = <A_i, A_j>` of the (already scaled) rows.
fn gram(rows: &[SparseSym]) -> DMatrix<f64> {
    let m = rows.len();
    let mut by_pos: std::collections::BTreeMap<(usize, usize, usize), Vec<(usize, f64)>> =
        Default::default();
    for (i, r) in rows.iter().enumerate() {
        for e in r.entries() {
            by_pos.entry((e.block, e.row, e.col)).or_default().push((i, e.value));
        }
    }
    let mut k = DMatrix::zeros(m, m);
    for ((_, row, col), list) in by_pos {
        let w = if row == col { 1.0 } else { 2.0 };
        for &(i, vi) in &list {
            for &(j, vj) in &list {
                k[(i, j)] += w * vi * vj;
            }
        }
    }
    k
}

/// Pivoted Cholesky of the Gram matrix. Rows whose pivot falls below
/// `rel_tol * max_diag` are dependent on the rows chosen before them.
pub(crate) fn remove_dependent(rows: &[SparseSym], b: &[f64], rel_tol: f64) -> Presolved {
    let m = rows.len();
    if m == 0 {
        return Presolved { keep: vec![], inconsistent: None };
    }
    let k = gram(rows);
    let max_diag = (0..m).map(|i| k[(i, i)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut perm: Vec<usize> = (0..m).collect();
    let mut l = DMatrix::<f64>::zeros(m, m);
    let mut diag: Vec<f64> = (0..m).map(|i| k[(i, i)]).collect();
    let mut rank = 0;
    for step in 0..m {
        // choose the largest remaining pivot
        let (best, &dbest) = diag[step..]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, d)| (i + step, d))
            .unwrap();
        if dbest <= rel_tol * max_diag {
            break;
        }
        perm.swap(step, best);
        diag.swap(step, best);
        l.swap_rows(step, best);
        let piv = dbest.sqrt();
        l[(step, step)] = piv;
        for r in step + 1..m {
            let mut v = k[(perm[r], perm[step])];
            for c in 0..step {
                v -= l[(r, c)] * l[(step, c)];
            }
            l[(r, step)] = v / piv;
            diag[r] -= l[(r, step)] * l[(r, step)];
        }
        rank += 1;
    }
    let basis: Vec<usize> = perm[..rank].to_vec();
    let mut keep = basis.clone();
    keep.sort_unstable();
    let mut inconsistent = None;
    if rank < m {
        let lbb = l.view((0, 0), (rank, rank)).into_owned();
        for &i in &perm[rank..] {
            match classify(&k, &lbb, &basis, i, b) {
                Dependency::Redundant => {}
                Dependency::Inconsistent { y } => {
                    if inconsistent.is_none() {
                        inconsistent = Some(y);
                    }
                }
            }
        }
    }
    Presolved { keep, inconsistent }
}

fn classify(k: &DMatrix<f64>, lbb: &DMatrix<f64>, basis: &[usize], i: usize, b: &[f64]) -> Dependency {
    let r = basis.len();
    let rhs = nalgebra::DVector::from_iterator(r, basis.iter().map(|&j| k[(j, i)]));
    // K_BB c = K_Bi with K_BB = L L^T
    let z = lbb.solve_lower_triangular(&rhs).unwrap_or(rhs.clone());
    let c = lbb.transpose().solve_upper_triangular(&z).unwrap_or(z);
    let combo: f64 = basis.iter().zip(c.iter()).map(|(&j, cj)| cj * b[j]).sum();
    let mismatch = b[i] - combo;
    let scale = 1.0 + b[i].abs() + basis.iter().zip(c.iter()).map(|(&j, cj)| (cj * b[j]).abs()).sum::<f64>();
    if mismatch.abs() <= 1e-9 * scale {
        return Dependency::Redundant;
    }
    let mut y = vec![0.0; b.len()];
    y[i] = 1.0 / mismatch;
    for (&j, cj) in basis.iter().zip(c.iter()) {
        y[j] = -cj / mismatch;
    }
    Dependency::Inconsistent { y }
}

/// Scales each row to unit Frobenius norm. Returns the factors used.
pub(crate) fn unit_rows(rows: &mut [SparseSym], b: &mut [f64]) -> Vec<f64> {
    rows.iter_mut()
        .zip(b.iter_mut())
        .map(|(r, bi)| {
            r.canonicalize();
            let n = r.norm_sq().sqrt();
            let s = if n > 0.0 { 1.0 / n } else { 1.0 };
            r.scale(s);
            *bi *= s;
            s
        })
        .collect()
}

pub(crate) fn entries_on_block(r: &SparseSym, block: usize) -> Vec<SymEntry> {
    r.entries().iter().copied().filter(|e| e.block == block).collect()
}
