//! Equality of free spectrahedra.
//!
//! `D_{L1} = D_{L2}` iff the σ-minimal whole subpencils of `L1` and `L2`
//! are unitarily equivalent. Minimal pencils are found by splitting into
//! reducing subspaces and discarding blocks whose removal leaves the
//! spectrahedron unchanged.

mod decompose;
mod unitary;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::inclusion::{check_inclusion, Counterexample, InclusionOptions, InclusionVerdict};
use crate::pencil::{Pencil, SymTuple};

pub use decompose::{reducing_decomposition, symmetric_commutant, ReducingDecomposition, CLUSTER_GAP};
pub use unitary::{equivalence_residual, screen_degree, unitary_equivalence, Equivalence, InequivalenceReason};

/// Tolerance for calling two blocks repeated copies.
pub const DEDUP_TOL: f64 = 1e-7;

/// Outcome of [`is_whole`]: the verdict for `D_sub ⊆ D_L`.
#[derive(Debug, Clone)]
pub struct Wholeness {
    pub whole: bool,
    pub evidence: InclusionVerdict,
}

/// Whether the subpencil on `span(B)` cuts out the same set as `L`.
pub fn is_whole(l: &Pencil, b: &DMatrix<f64>, opts: &InclusionOptions) -> Result<Wholeness> {
    let sub = l.restrict(b)?;
    let evidence = check_inclusion(&sub, l, opts)?;
    Ok(Wholeness { whole: evidence.is_included(), evidence })
}

#[derive(Debug, Clone)]
pub struct MinimalPencil {
    pub pencil: Pencil,
    /// Orthonormal `d x k` columns with `pencil = E^T L E`.
    pub embedding: DMatrix<f64>,
    /// Retained block bases (columns of the embedding, grouped).
    pub blocks: Vec<DMatrix<f64>>,
    /// For each retained block in order, the witness that dropping it
    /// enlarges the spectrahedron.
    pub removal_witnesses: Vec<Counterexample>,
}

fn hcat(l: &Pencil, blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(l.d(), cols);
    let mut c = 0;
    for b in blocks {
        out.columns_mut(c, b.ncols()).copy_from(b);
        c += b.ncols();
    }
    out
}

/// σ-minimal whole subpencil: drops repeated blocks, then greedily drops
/// blocks while the remainder stays whole, and re-certifies that every
/// retained block is needed.
pub fn minimal_whole_subpencil(l: &Pencil, opts: &InclusionOptions) -> Result<MinimalPencil> {
    let dec = reducing_decomposition(l, opts.seed)?;
    let mut keep: Vec<usize> = Vec::new();
    for (i, lab) in dec.labels.iter().enumerate() {
        if !keep.iter().any(|&k| dec.labels[k] == *lab) {
            keep.push(i);
        }
    }
    let mut i = 0;
    while i < keep.len() {
        let rest: Vec<&DMatrix<f64>> = keep.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &k)| &dec.blocks[k]).collect();
        if is_whole(l, &hcat(l, &rest), opts)?.whole {
            log::debug!("dropping block {} of size {}", keep[i], dec.blocks[keep[i]].ncols());
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    let mut witnesses = Vec::with_capacity(keep.len());
    loop {
        witnesses.clear();
        let mut dropped = None;
        for i in 0..keep.len() {
            let rest: Vec<&DMatrix<f64>> =
                keep.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &k)| &dec.blocks[k]).collect();
            match is_whole(l, &hcat(l, &rest), opts)?.evidence {
                InclusionVerdict::NotIncluded(c) => witnesses.push(c),
                InclusionVerdict::Included(_) => {
                    dropped = Some(i);
                    break;
                }
            }
        }
        match dropped {
            Some(i) => {
                keep.remove(i);
            }
            None => break,
        }
    }
    let blocks: Vec<DMatrix<f64>> = keep.iter().map(|&k| dec.blocks[k].clone()).collect();
    let embedding = hcat(l, &blocks.iter().collect::<Vec<_>>());
    let pencil = l.restrict(&embedding)?;
    Ok(MinimalPencil { pencil, embedding, blocks, removal_witnesses: witnesses })
}

#[derive(Debug, Clone)]
pub enum EqualityVerdict {
    Equal {
        /// `M2 = U^T M1 U` for the minimal pencils.
        u: DMatrix<f64>,
        residual: f64,
        minimal: (MinimalPencil, MinimalPencil),
    },
    /// `witness` lies in exactly one of the two spectrahedra; `in_first`
    /// tells which.
    NotEqual { witness: SymTuple, in_first: bool, counterexample: Counterexample },
}

impl EqualityVerdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, EqualityVerdict::Equal { .. })
    }
}

/// Decides `D_{L1} = D_{L2}`, with a unitary between minimal pencils or a
/// separating point.
pub fn check_equality(l1: &Pencil, l2: &Pencil, opts: &InclusionOptions) -> Result<EqualityVerdict> {
    for (a, b, in_first) in [(l1, l2, true), (l2, l1, false)] {
        if let InclusionVerdict::NotIncluded(c) = check_inclusion(a, b, opts)? {
            return Ok(EqualityVerdict::NotEqual { witness: c.x.clone(), in_first, counterexample: c });
        }
    }
    let m1 = minimal_whole_subpencil(l1, opts)?;
    let m2 = minimal_whole_subpencil(l2, opts)?;
    match unitary_equivalence(&m1.pencil, &m2.pencil, DEDUP_TOL) {
        Equivalence::Equivalent { u, residual } => Ok(EqualityVerdict::Equal { u, residual, minimal: (m1, m2) }),
        Equivalence::Inequivalent(reason) => Err(Error::Unresolved(format!(
            "both inclusions hold but minimal pencils of sizes {} and {} do not match: {reason:?}",
            m1.pencil.d(),
            m2.pencil.d()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2() -> Pencil {
        Pencil::diagonal(&[vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn self_is_whole() {
        let l = l2();
        assert!(is_whole(&l, &DMatrix::identity(3, 3), &InclusionOptions::default()).unwrap().whole);
    }

    #[test]
    fn dropping_the_sum_block_is_not_whole() {
        let l = l2();
        let b = DMatrix::from_fn(3, 2, |r, c| if r == c + 1 { 1.0 } else { 0.0 });
        let w = is_whole(&l, &b, &InclusionOptions::default()).unwrap();
        assert!(!w.whole);
        match w.evidence {
            InclusionVerdict::NotIncluded(c) => {
                let x = c.x.scalars().expect("scalar witness");
                assert!(x[0] >= -1.0 - 1e-7 && x[1] >= -1.0 - 1e-7 && x[0] + x[1] < -1.0);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn vacuous_block_is_dropped() {
        let l = l2().direct_sum(&Pencil::diagonal(&[vec![0.0, 0.0]]).unwrap()).unwrap();
        let m = minimal_whole_subpencil(&l, &InclusionOptions::default()).unwrap();
        assert_eq!(m.pencil.d(), 3);
        assert_eq!(m.removal_witnesses.len(), 3);
    }

    #[test]
    fn example_pencil_is_minimal() {
        let m = minimal_whole_subpencil(&l2(), &InclusionOptions::default()).unwrap();
        assert_eq!(m.pencil.d(), 3);
        for c in &m.removal_witnesses {
            assert_eq!(c.x.n(), 1);
        }
    }
}
