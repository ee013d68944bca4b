//! Linear functionals on `nu x nu` matrix polynomials and the truncated
//! GNS construction.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, sym_eig, symmetrize};
use crate::ncpoly::{basis_words, MatPoly, Word};
use crate::pencil::SymTuple;

/// `lambda(F) = sum_w <Lambda_w, F_w>` over words of degree `<= max_degree`,
/// with `Lambda_{w^*} = Lambda_w^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pub g: usize,
    pub nu: usize,
    pub max_degree: usize,
    pub table: BTreeMap<Word, DMatrix<f64>>,
}

impl Functional {
    pub fn zero(g: usize, nu: usize, max_degree: usize) -> Self {
        Self { g, nu, max_degree, table: BTreeMap::new() }
    }

    /// `f -> <f(X) gamma, gamma>` on words of degree `<= max_degree`, with
    /// `gamma` stacked as `nu` blocks of length `n`.
    pub fn from_point(x: &SymTuple, gamma: &DVector<f64>, nu: usize, max_degree: usize) -> Result<Self> {
        let n = x.n();
        if gamma.len() != nu * n {
            return Err(Error::DimensionMismatch(format!("gamma has length {}, expected {}", gamma.len(), nu * n)));
        }
        let cols = DMatrix::from_fn(n, nu, |p, a| gamma[a * n + p]);
        let mut table = BTreeMap::new();
        let mut powers: BTreeMap<Word, DMatrix<f64>> = BTreeMap::new();
        powers.insert(Word::empty(), DMatrix::identity(n, n));
        for w in basis_words(x.g(), max_degree) {
            if !w.is_empty() {
                let l = w.letters();
                let prefix = Word::new(l[..l.len() - 1].to_vec());
                let m = &powers[&prefix] * &x.x[l[l.len() - 1]];
                powers.insert(w.clone(), m);
            }
            table.insert(w.clone(), cols.transpose() * &powers[&w] * &cols);
        }
        Ok(Self { g: x.g(), nu, max_degree, table })
    }

    /// `lambda(E_ij (x) w)`; zero for words outside the table.
    pub fn entry(&self, w: &Word, i: usize, j: usize) -> f64 {
        self.table.get(w).map(|m| m[(i, j)]).unwrap_or(0.0)
    }

    pub fn matrix(&self, w: &Word) -> DMatrix<f64> {
        self.table.get(w).cloned().unwrap_or_else(|| DMatrix::zeros(self.nu, self.nu))
    }

    pub fn set(&mut self, w: Word, m: DMatrix<f64>) {
        self.table.insert(w, m);
    }

    pub fn apply(&self, f: &MatPoly) -> Result<f64> {
        if f.rows() != self.nu || f.cols() != self.nu {
            return Err(Error::DimensionMismatch(format!("functional is {0}x{0}, polynomial {1}x{2}", self.nu, f.rows(), f.cols())));
        }
        let mut s = 0.0;
        for (w, c) in f.terms() {
            if w.degree() > self.max_degree {
                return Err(Error::DegreeTooHigh { deg: w.degree() as i64, bound: self.max_degree as i64 });
            }
            s += self.matrix(w).component_mul(c).sum();
        }
        Ok(s)
    }

    /// `max_w ||Lambda_{w^*} - Lambda_w^T||`.
    pub fn symmetry_defect(&self) -> f64 {
        self.table
            .iter()
            .map(|(w, m)| max_abs(&(self.matrix(&w.adjoint()) - m.transpose())))
            .fold(0.0, f64::max)
    }

    pub fn scale_of(&self) -> f64 {
        self.table.values().map(max_abs).fold(0.0, f64::max)
    }

    /// `self + t * o`.
    pub fn add_scaled(&self, o: &Functional, t: f64) -> Functional {
        let mut out = self.clone();
        for (w, m) in &o.table {
            let cur = out.matrix(w);
            out.table.insert(w.clone(), cur + m * t);
        }
        out
    }

    /// Hankel matrix `H[(u,i),(v,j)] = lambda(E_ij (x) u^* v)` on words of
    /// degree `<= k`, indexed `u * nu + i`.
    pub fn hankel(&self, k: usize) -> DMatrix<f64> {
        let words = basis_words(self.g, k);
        let nu = self.nu;
        let n = words.len() * nu;
        let mut h = DMatrix::zeros(n, n);
        for (ui, u) in words.iter().enumerate() {
            let us = u.adjoint();
            for (vi, v) in words.iter().enumerate() {
                let m = self.matrix(&us.concat(v));
                for i in 0..nu {
                    for j in 0..nu {
                        h[(ui * nu + i, vi * nu + j)] = m[(i, j)];
                    }
                }
            }
        }
        symmetrize(&h)
    }
}

/// Truncated GNS model: `lambda(f) = <f(X) gamma, gamma>` for `deg f <= 2k+1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnsModel {
    #[serde(rename = "X")]
    pub x: SymTuple,
    pub gamma: Vec<f64>,
    /// Eigenvalues of the degree-`k` Hankel matrix kept in the quotient.
    pub hankel_min_eig: f64,
}

impl GnsModel {
    pub fn gamma(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.gamma)
    }

    /// `<F(X) gamma, gamma>`.
    pub fn value(&self, f: &MatPoly) -> Result<f64> {
        let m = f.evaluate(&self.x)?;
        let gm = self.gamma();
        Ok((gm.transpose() * m * &gm)[(0, 0)])
    }
}

/// Relative eigenvalue cut for the GNS quotient.
pub const GNS_RANK_TOL: f64 = 1e-9;

/// GNS construction from a functional on words of degree `<= 2k + 1`.
///
/// The space is the range of the degree-`k` Hankel matrix `H = U D U^T`;
/// `X_j = D^{-1/2} U^T M_j U D^{-1/2}` with
/// `M_j[(u,a),(v,b)] = lambda(E_ab (x) u^* x_j v)`, and
/// `gamma_i = D^{1/2} U^T e_{(1, i)}`.
pub fn gns_extract(lambda: &Functional, k: usize) -> Result<GnsModel> {
    if lambda.max_degree < 2 * k + 1 {
        return Err(Error::DegreeTooHigh { deg: 2 * k as i64 + 1, bound: lambda.max_degree as i64 });
    }
    let defect = lambda.symmetry_defect();
    if defect > 1e-8 * (1.0 + lambda.scale_of()) {
        return Err(Error::NotSymmetricFunctional(defect));
    }
    let nu = lambda.nu;
    let words = basis_words(lambda.g, k);
    let h = lambda.hankel(k);
    let (vals, vecs) = sym_eig(&h);
    let top = vals.iter().copied().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > GNS_RANK_TOL * top.max(f64::MIN_POSITIVE)).collect();
    if keep.is_empty() {
        return Err(Error::Invalid("functional vanishes on all squares".into()));
    }
    let r = keep.len();
    let b = DMatrix::from_fn(h.nrows(), r, |row, c| vecs[(row, keep[c])] / vals[keep[c]].sqrt());
    let mut xs = Vec::with_capacity(lambda.g);
    for j in 0..lambda.g {
        let mut m = DMatrix::zeros(h.nrows(), h.nrows());
        for (ui, u) in words.iter().enumerate() {
            for (vi, v) in words.iter().enumerate() {
                let c = lambda.matrix(&Word::sandwich(u, j, v));
                for a in 0..nu {
                    for bb in 0..nu {
                        m[(ui * nu + a, vi * nu + bb)] = c[(a, bb)];
                    }
                }
            }
        }
        xs.push(symmetrize(&(b.transpose() * symmetrize(&m) * &b)));
    }
    let x = SymTuple::with_level(r, xs)?;
    // coordinates of gamma_i: <gamma_i, b_c> = (B^T H e_{(1,i)})_c
    let hb = b.transpose() * &h;
    let mut gamma = vec![0.0; nu * r];
    for i in 0..nu {
        for c in 0..r {
            gamma[i * r + c] = hb[(c, i)];
        }
    }
    let hankel_min_eig = keep.iter().map(|&i| vals[i]).fold(f64::INFINITY, f64::min);
    Ok(GnsModel { x, gamma, hankel_min_eig })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_symmetric;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn evaluation_at_zero() {
        let x = SymTuple::zeros(2, 1);
        let lam = Functional::from_point(&x, &DVector::from_element(1, 1.0), 1, 3).unwrap();
        let m = gns_extract(&lam, 1).unwrap();
        assert!(m.x.x.iter().all(|xj| max_abs(xj) < 1e-12));
        for w in basis_words(2, 3) {
            let f = MatPoly::monomial(w.clone(), DMatrix::from_element(1, 1, 1.0), 2);
            assert!((m.value(&f).unwrap() - lam.apply(&f).unwrap()).abs() < 1e-12, "{w}");
        }
    }

    #[test]
    fn planted_point_is_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (g, k, nu, n) = (2, 1, 2, 7);
        let x = SymTuple::with_level(n, (0..g).map(|_| random_symmetric(&mut rng, n)).collect()).unwrap();
        let gamma = DVector::from_fn(nu * n, |_, _| crate::linalg::gaussian(&mut rng));
        let lam = Functional::from_point(&x, &gamma, nu, 2 * k + 1).unwrap();
        let m = gns_extract(&lam, k).unwrap();
        assert!(m.x.n() <= nu * basis_words(g, k).len());
        let back = Functional::from_point(&m.x, &m.gamma(), nu, 2 * k + 1).unwrap();
        for (w, v) in &lam.table {
            assert!(max_abs(&(v - back.matrix(w))) < 1e-8, "{w}");
        }
    }

    #[test]
    fn asymmetric_table_is_rejected() {
        let mut lam = Functional::zero(2, 1, 3);
        lam.set(Word::empty(), DMatrix::from_element(1, 1, 1.0));
        lam.set(Word::new(vec![0, 1]), DMatrix::from_element(1, 1, 1.0));
        assert!(matches!(gns_extract(&lam, 1), Err(Error::NotSymmetricFunctional(_))));
    }
}
