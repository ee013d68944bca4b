use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::linalg::{gaussian, max_abs, null_space, sym_fn};
use crate::ncpoly::Word;
use crate::pencil::Pencil;

const RESTARTS: usize = 10;
/// Word degree cap for trace screening.
const SCREEN_CAP: usize = 8;
/// Total word budget for trace screening.
const SCREEN_WORDS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InequivalenceReason {
    Size { d1: usize, d2: usize },
    VariableCount { g1: usize, g2: usize },
    TraceWord { word: String, lhs: f64, rhs: f64 },
    NoIntertwiner,
    Unresolved { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Equivalence {
    /// `U^T A_j U = B_j` with orthogonal `U`.
    Equivalent { u: DMatrix<f64>, residual: f64 },
    Inequivalent(InequivalenceReason),
}

/// `max(||U^T U - I||, max_j ||U^T A_j U - B_j|| / (1 + ||A_j||))`.
pub fn equivalence_residual(l1: &Pencil, l2: &Pencil, u: &DMatrix<f64>) -> f64 {
    let d = u.ncols();
    let mut r = max_abs(&(u.transpose() * u - DMatrix::identity(d, d)));
    for (a, b) in l1.coeffs().iter().zip(l2.coeffs()) {
        r = r.max(max_abs(&(u.transpose() * a * u - b)) / (1.0 + max_abs(a)));
    }
    r
}

/// Degree cap used by the trace screen for pencils of size `d`.
pub fn screen_degree(d: usize) -> usize {
    (2 * d * d).min(SCREEN_CAP)
}

/// First word with `tr w(A) != tr w(B)`, searched in graded order.
fn trace_screen(a: &[DMatrix<f64>], b: &[DMatrix<f64>], cap: usize) -> Option<(Word, f64, f64)> {
    let d = a.first().map(|m| m.nrows()).unwrap_or(0);
    let id = DMatrix::identity(d, d);
    let mut frontier: Vec<(Vec<usize>, DMatrix<f64>, DMatrix<f64>)> = vec![(Vec::new(), id.clone(), id)];
    let mut seen = 0;
    for _ in 0..cap {
        let mut next = Vec::new();
        for (w, pa, pb) in &frontier {
            for j in 0..a.len() {
                let qa = pa * &a[j];
                let qb = pb * &b[j];
                let (ta, tb) = (qa.trace(), qb.trace());
                let scale = 1.0 + max_abs(&qa) * d as f64 + max_abs(&qb) * d as f64;
                let mut word = w.clone();
                word.push(j);
                if (ta - tb).abs() > 1e-8 * scale {
                    return Some((Word::new(word), ta, tb));
                }
                seen += 1;
                if seen >= SCREEN_WORDS {
                    return None;
                }
                next.push((word, qa, qb));
            }
        }
        frontier = next;
    }
    None
}

/// Basis of `{X : A_j X = X B_j for all j}`.
fn intertwiners(a: &[DMatrix<f64>], b: &[DMatrix<f64>], d: usize) -> Vec<DMatrix<f64>> {
    let mut m = DMatrix::zeros(a.len() * d * d, d * d);
    for c in 0..d * d {
        let mut e = DMatrix::zeros(d, d);
        e[(c % d, c / d)] = 1.0;
        for (j, (aj, bj)) in a.iter().zip(b).enumerate() {
            let r = aj * &e - &e * bj;
            for (k, v) in r.iter().enumerate() {
                m[(j * d * d + k, c)] = *v;
            }
        }
    }
    let ns = null_space(&m, 1e-7);
    (0..ns.ncols()).map(|k| DMatrix::from_column_slice(d, d, ns.column(k).as_slice())).collect()
}

/// Decides whether `L2 = U^T L1 U` for an orthogonal `U`.
///
/// Sizes and trace words are screened first; a match is then built from
/// the polar factor of a generic intertwiner and accepted only when its
/// residual is at most `tol`.
pub fn unitary_equivalence(l1: &Pencil, l2: &Pencil, tol: f64) -> Equivalence {
    if l1.d() != l2.d() {
        return Equivalence::Inequivalent(InequivalenceReason::Size { d1: l1.d(), d2: l2.d() });
    }
    if l1.g() != l2.g() {
        return Equivalence::Inequivalent(InequivalenceReason::VariableCount { g1: l1.g(), g2: l2.g() });
    }
    let d = l1.d();
    if d == 0 {
        return Equivalence::Equivalent { u: DMatrix::zeros(0, 0), residual: 0.0 };
    }
    if let Some((w, lhs, rhs)) = trace_screen(l1.coeffs(), l2.coeffs(), screen_degree(d)) {
        return Equivalence::Inequivalent(InequivalenceReason::TraceWord { word: w.to_string(), lhs, rhs });
    }
    let basis = intertwiners(l1.coeffs(), l2.coeffs(), d);
    if basis.is_empty() {
        return Equivalence::Inequivalent(InequivalenceReason::NoIntertwiner);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9);
    let mut best = f64::INFINITY;
    for _ in 0..RESTARTS {
        let mut x = DMatrix::zeros(d, d);
        for b in &basis {
            x += b * gaussian(&mut rng);
        }
        let xtx = x.transpose() * &x;
        if max_abs(&xtx) == 0.0 {
            continue;
        }
        let u = &x * sym_fn(&xtx, |l| if l > 1e-12 { 1.0 / l.sqrt() } else { 0.0 });
        let r = equivalence_residual(l1, l2, &u);
        if r <= tol {
            return Equivalence::Equivalent { u, residual: r };
        }
        best = best.min(r);
    }
    Equivalence::Inequivalent(InequivalenceReason::Unresolved { residual: best })
}
