use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{gaussian, max_abs, null_space, sym_eig, symmetrize};
use crate::pencil::Pencil;

use super::unitary::{unitary_equivalence, Equivalence};

/// Eigenvalues closer than this belong to one cluster.
pub const CLUSTER_GAP: f64 = 1e-6;
/// Gaps between `CLUSTER_GAP` and this are ambiguous and trigger a reseed.
const AMBIGUOUS_GAP: f64 = 1e-3;
const RESEEDS: usize = 5;
const NULL_TOL: f64 = 1e-6;

/// Orthogonal decomposition of `R^d` into minimal reducing subspaces.
#[derive(Debug, Clone)]
pub struct ReducingDecomposition {
    /// Orthonormal bases, one per block.
    pub blocks: Vec<DMatrix<f64>>,
    /// Blocks with equal labels are unitarily equivalent.
    pub labels: Vec<usize>,
}

impl ReducingDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.ncols()).collect()
    }
}

fn sym_unit(d: usize, r: usize, s: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(d, d);
    e[(r, s)] = 1.0;
    e[(s, r)] = 1.0;
    e
}

/// Basis of the symmetric part of `{Z : Z A_j = A_j Z}`.
pub fn symmetric_commutant(coeffs: &[DMatrix<f64>], d: usize) -> Vec<DMatrix<f64>> {
    let units: Vec<DMatrix<f64>> = (0..d).flat_map(|r| (r..d).map(move |s| (r, s))).map(|(r, s)| sym_unit(d, r, s)).collect();
    let rows = coeffs.len() * d * d;
    let mut m = DMatrix::zeros(rows, units.len());
    for (c, e) in units.iter().enumerate() {
        for (j, a) in coeffs.iter().enumerate() {
            let comm = e * a - a * e;
            for (k, v) in comm.iter().enumerate() {
                m[(j * d * d + k, c)] = *v;
            }
        }
    }
    let ns = null_space(&m, NULL_TOL);
    (0..ns.ncols())
        .map(|k| {
            let mut z = DMatrix::zeros(d, d);
            for (c, e) in units.iter().enumerate() {
                z += e * ns[(c, k)];
            }
            symmetrize(&z)
        })
        .collect()
}

/// Eigenspaces of a random commutant element, or `None` when its spectrum
/// has an ambiguous gap.
fn split(basis: &[DMatrix<f64>], d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<DMatrix<f64>>> {
    let mut z = DMatrix::zeros(d, d);
    for b in basis {
        z += b * gaussian(rng);
    }
    let s = max_abs(&z);
    if s == 0.0 {
        return None;
    }
    let (vals, vecs) = sym_eig(&(z / s));
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..d {
        let gap = vals[i] - vals[i - 1];
        if gap < CLUSTER_GAP {
            groups.last_mut().expect("nonempty").push(i);
        } else if gap < AMBIGUOUS_GAP {
            return None;
        } else {
            groups.push(vec![i]);
        }
    }
    Some(groups.into_iter().map(|g| DMatrix::from_fn(d, g.len(), |r, c| vecs[(r, g[c])])).collect())
}

fn decompose_into(l: &Pencil, basis: DMatrix<f64>, rng: &mut ChaCha8Rng, out: &mut Vec<DMatrix<f64>>) -> Result<()> {
    let sub = l.restrict(&basis)?;
    let k = sub.d();
    if k <= 1 {
        out.push(basis);
        return Ok(());
    }
    let comm = symmetric_commutant(sub.coeffs(), k);
    if comm.len() <= 1 {
        out.push(basis);
        return Ok(());
    }
    for _ in 0..=RESEEDS {
        if let Some(parts) = split(&comm, k, rng) {
            if parts.len() > 1 {
                for p in parts {
                    let b = orthonormalize(&(&basis * p));
                    decompose_into(l, b, rng, out)?;
                }
                return Ok(());
            }
        }
    }
    Err(Error::ClusterAmbiguous)
}

/// One step of Gram-Schmidt cleanup for products of orthonormal bases.
fn orthonormalize(b: &DMatrix<f64>) -> DMatrix<f64> {
    let q = b.clone().qr().q();
    let mut q = q.columns(0, b.ncols()).into_owned();
    // keep the orientation of the input columns
    for c in 0..q.ncols() {
        if q.column(c).dot(&b.column(c)) < 0.0 {
            let neg = -q.column(c);
            q.set_column(c, &neg);
        }
    }
    q
}

/// Splits `R^d` into minimal reducing subspaces of `L` by recursively
/// diagonalizing random symmetric commutant elements; blocks are labelled
/// by unitary equivalence at `1e-7`.
pub fn reducing_decomposition(l: &Pencil, seed: u64) -> Result<ReducingDecomposition> {
    l.require_monic()?;
    let d = l.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut blocks = Vec::new();
    if d > 0 {
        decompose_into(l, DMatrix::identity(d, d), &mut rng, &mut blocks)?;
    }
    blocks.sort_by_key(|b| first_support(b));
    let pencils = blocks.iter().map(|b| l.restrict(b)).collect::<Result<Vec<_>>>()?;
    let mut labels = vec![usize::MAX; blocks.len()];
    let mut next = 0;
    for i in 0..blocks.len() {
        if labels[i] != usize::MAX {
            continue;
        }
        labels[i] = next;
        for k in i + 1..blocks.len() {
            if labels[k] == usize::MAX
                && matches!(unitary_equivalence(&pencils[i], &pencils[k], 1e-7), Equivalence::Equivalent { .. })
            {
                labels[k] = next;
            }
        }
        next += 1;
    }
    Ok(ReducingDecomposition { blocks, labels })
}

/// Index of the first coordinate carrying noticeable weight, giving the
/// blocks a deterministic order.
fn first_support(b: &DMatrix<f64>) -> usize {
    let w = DVector::from_iterator(b.nrows(), b.row_iter().map(|r| r.norm_squared()));
    w.iter().position(|&v| v > 1e-3).unwrap_or(b.nrows())
}
