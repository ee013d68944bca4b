//! Linear pencils `L(x) = A0 + sum_j A_j x_j` with symmetric coefficients
//! and points `X = (X_1, .., X_g)` of symmetric matrices.

use freespec_sdp::SolverOptions;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_diag, kron, matrix_to_rows, max_abs, min_eig, rows_to_matrix, symmetrize};
use crate::lmi::{Lmi, LmiOutcome};
use crate::ncpoly::{MatPoly, Word};

/// Coefficients this close to symmetric are symmetrized on load.
const SYMMETRY_TOL: f64 = 1e-8;
/// `A0` this close to the identity is snapped to it.
const MONIC_SNAP: f64 = 1e-10;
pub const MEMBERSHIP_TOL: f64 = 1e-8;

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{what} is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let defect = max_abs(&(m - m.transpose()));
    if defect > SYMMETRY_TOL * (1.0 + max_abs(m)) {
        return Err(Error::Invalid(format!("{what} is not symmetric (defect {defect:.2e})")));
    }
    Ok(symmetrize(m))
}

/// A point of `S_n^g`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTuple {
    n: usize,
    pub x: Vec<DMatrix<f64>>,
}

impl SymTuple {
    /// At least one component is required to fix the level; use
    /// [`SymTuple::with_level`] for `g = 0`.
    pub fn new(x: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = x.first().map(|m| m.nrows()).ok_or_else(|| Error::Invalid("empty tuple without a level".into()))?;
        Self::with_level(n, x)
    }

    pub fn with_level(n: usize, x: Vec<DMatrix<f64>>) -> Result<Self> {
        let mut out = Vec::with_capacity(x.len());
        for (j, m) in x.iter().enumerate() {
            if m.nrows() != n {
                return Err(Error::DimensionMismatch(format!("X{} has size {}, expected {n}", j + 1, m.nrows())));
            }
            out.push(check_symmetric(m, &format!("X{}", j + 1))?);
        }
        Ok(Self { n, x: out })
    }

    pub fn zeros(g: usize, n: usize) -> Self {
        Self { n, x: vec![DMatrix::zeros(n, n); g] }
    }

    /// A level-one point.
    pub fn scalar(v: &[f64]) -> Self {
        Self { n: 1, x: v.iter().map(|&t| DMatrix::from_element(1, 1, t)).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn g(&self) -> usize {
        self.x.len()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { n: self.n, x: self.x.iter().map(|m| m * t).collect() }
    }

    /// `V^T X V` componentwise.
    pub fn compress(&self, v: &DMatrix<f64>) -> Self {
        Self { n: v.ncols(), x: self.x.iter().map(|m| symmetrize(&(v.transpose() * m * v))).collect() }
    }

    /// The first `g` components.
    pub fn truncate(&self, g: usize) -> Self {
        Self { n: self.n, x: self.x[..g].to_vec() }
    }

    pub fn scalars(&self) -> Option<Vec<f64>> {
        (self.n == 1).then(|| self.x.iter().map(|m| m[(0, 0)]).collect())
    }
}

#[derive(Serialize, Deserialize)]
struct SymTupleJson {
    n: usize,
    g: usize,
    #[serde(rename = "X")]
    x: Vec<Vec<Vec<f64>>>,
}

impl Serialize for SymTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SymTupleJson { n: self.n, g: self.g(), x: self.x.iter().map(matrix_to_rows).collect() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymTuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = SymTupleJson::deserialize(d)?;
        if j.x.len() != j.g {
            return Err(D::Error::custom(format!("expected {} matrices, found {}", j.g, j.x.len())));
        }
        let x = j
            .x
            .iter()
            .map(|r| rows_to_matrix(r, Some(j.n)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        SymTuple::with_level(j.n, x).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", content = "min_eig", rename_all = "lowercase")]
pub enum Membership {
    Inside(f64),
    Boundary(f64),
    Outside(f64),
}

impl Membership {
    pub fn min_eig(&self) -> f64 {
        match *self {
            Membership::Inside(v) | Membership::Boundary(v) | Membership::Outside(v) => v,
        }
    }

    pub fn is_in(&self) -> bool {
        !matches!(self, Membership::Outside(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundedness {
    Bounded,
    /// A recession direction `mu` with `max |mu_i| = 1`.
    Unbounded(DVector<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    a0: DMatrix<f64>,
    a: Vec<DMatrix<f64>>,
}

impl Pencil {
    /// Validates shapes and symmetry; `A0` within `1e-10` of the identity
    /// is snapped to it.
    pub fn new(a0: DMatrix<f64>, a: Vec<DMatrix<f64>>) -> Result<Self> {
        let mut a0 = check_symmetric(&a0, "A0")?;
        let d = a0.nrows();
        let mut coeffs = Vec::with_capacity(a.len());
        for (j, m) in a.iter().enumerate() {
            if m.nrows() != d {
                return Err(Error::DimensionMismatch(format!("A{} has size {}, expected {d}", j + 1, m.nrows())));
            }
            coeffs.push(check_symmetric(m, &format!("A{}", j + 1))?);
        }
        let id = DMatrix::identity(d, d);
        if a0 != id && max_abs(&(&a0 - &id)) <= MONIC_SNAP {
            a0 = id;
        }
        Ok(Self { a0, a: coeffs })
    }

    pub fn monic(a: Vec<DMatrix<f64>>) -> Result<Self> {
        let d = a.first().map(|m| m.nrows()).unwrap_or(0);
        Self::new(DMatrix::identity(d, d), a)
    }

    /// Monic pencil of size `d` given the number of variables (for `g = 0`
    /// or all-zero coefficient lists).
    pub fn monic_sized(d: usize, a: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::new(DMatrix::identity(d, d), a)
    }

    /// `diag(1 + c_1 . x, ...)` from one coefficient row per diagonal entry.
    pub fn diagonal(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let g = rows.first().map(|r| r.len()).unwrap_or(0);
        let a = (0..g)
            .map(|j| DMatrix::from_diagonal(&DVector::from_iterator(d, rows.iter().map(|r| r[j]))))
            .collect();
        Self::monic_sized(d, a)
    }

    pub fn d(&self) -> usize {
        self.a0.nrows()
    }

    pub fn g(&self) -> usize {
        self.a.len()
    }

    pub fn a0(&self) -> &DMatrix<f64> {
        &self.a0
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.a
    }

    pub fn coeff(&self, j: usize) -> &DMatrix<f64> {
        &self.a[j]
    }

    pub fn is_monic(&self) -> bool {
        self.a0 == DMatrix::identity(self.d(), self.d())
    }

    pub fn is_homogeneous(&self) -> bool {
        self.a0.iter().all(|&v| v == 0.0)
    }

    pub fn require_monic(&self) -> Result<()> {
        if self.is_monic() {
            Ok(())
        } else {
            Err(Error::NotMonic)
        }
    }

    fn check_point(&self, x: &SymTuple) -> Result<()> {
        if x.g() != self.g() {
            return Err(Error::DimensionMismatch(format!(
                "pencil has {} variables, point has {}",
                self.g(),
                x.g()
            )));
        }
        Ok(())
    }

    /// `A0 (x) I_n + sum_j A_j (x) X_j`.
    pub fn evaluate(&self, x: &SymTuple) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let n = x.n();
        let mut out = kron(&self.a0, &DMatrix::identity(n, n));
        for (a, xj) in self.a.iter().zip(&x.x) {
            out += kron(a, xj);
        }
        Ok(out)
    }

    /// `I_n (x) A0 + sum_j X_j (x) A_j`, permutation similar to
    /// [`Pencil::evaluate`].
    pub fn evaluate_shuffled(&self, x: &SymTuple) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        let n = x.n();
        let mut out = kron(&DMatrix::identity(n, n), &self.a0);
        for (a, xj) in self.a.iter().zip(&x.x) {
            out += kron(xj, a);
        }
        Ok(out)
    }

    pub fn min_eig_at(&self, x: &SymTuple) -> Result<f64> {
        Ok(min_eig(&self.evaluate(x)?))
    }

    pub fn is_member(&self, x: &SymTuple, tol: f64) -> Result<Membership> {
        let l = self.min_eig_at(x)?;
        Ok(if l > tol {
            Membership::Inside(l)
        } else if l >= -tol {
            Membership::Boundary(l)
        } else {
            Membership::Outside(l)
        })
    }

    /// `sum_j mu_j A_j`.
    pub fn linear_part(&self, mu: &[f64]) -> DMatrix<f64> {
        let d = self.d();
        let mut out = DMatrix::zeros(d, d);
        for (a, m) in self.a.iter().zip(mu) {
            out += a * *m;
        }
        out
    }

    /// The homogeneous pencil `A0 x_0 + sum_j A_j x_j` in `g + 1` variables
    /// (the new variable comes first).
    pub fn homogenize(&self) -> Pencil {
        let d = self.d();
        let mut a = vec![self.a0.clone()];
        a.extend(self.a.iter().cloned());
        Pencil { a0: DMatrix::zeros(d, d), a }
    }

    /// `I_{d+1} + sum_j (A_j (+) 0) x_j`.
    pub fn extend(&self) -> Result<Pencil> {
        self.require_monic()?;
        let z = DMatrix::zeros(1, 1);
        let a = self.a.iter().map(|m| block_diag(&[m.clone(), z.clone()])).collect();
        Ok(Pencil { a0: DMatrix::identity(self.d() + 1, self.d() + 1), a })
    }

    pub fn direct_sum(&self, o: &Pencil) -> Result<Pencil> {
        if self.g() != o.g() {
            return Err(Error::VariableCountMismatch(self.g(), o.g()));
        }
        let a0 = block_diag(&[self.a0.clone(), o.a0.clone()]);
        let a = self.a.iter().zip(&o.a).map(|(p, q)| block_diag(&[p.clone(), q.clone()])).collect();
        Ok(Pencil { a0, a })
    }

    pub fn direct_sum_all(parts: &[Pencil], g: usize) -> Result<Pencil> {
        let mut acc = Pencil::monic_sized(0, vec![DMatrix::zeros(0, 0); g])?;
        for p in parts {
            acc = acc.direct_sum(p)?;
        }
        Ok(acc)
    }

    /// `B^T L B` for a basis `B` of an invariant subspace.
    pub fn restrict(&self, b: &DMatrix<f64>) -> Result<Pencil> {
        if b.nrows() != self.d() {
            return Err(Error::DimensionMismatch(format!("basis has {} rows, pencil size {}", b.nrows(), self.d())));
        }
        let k = b.ncols();
        let orth = max_abs(&(b.transpose() * b - DMatrix::identity(k, k)));
        if orth > 1e-10 {
            return Err(Error::NotOrthonormal(orth));
        }
        let proj = DMatrix::identity(self.d(), self.d()) - b * b.transpose();
        let mut worst: f64 = 0.0;
        for m in std::iter::once(&self.a0).chain(&self.a) {
            worst = worst.max(max_abs(&(&proj * m * b)));
        }
        if worst > 1e-8 {
            return Err(Error::NotInvariant(worst));
        }
        let a0 = symmetrize(&(b.transpose() * &self.a0 * b));
        let a0 = if self.is_monic() { DMatrix::identity(k, k) } else { a0 };
        let a = self.a.iter().map(|m| symmetrize(&(b.transpose() * m * b))).collect();
        Ok(Pencil { a0, a })
    }

    /// Conjugation `U^T L U` by an orthogonal matrix.
    pub fn conjugate(&self, u: &DMatrix<f64>) -> Pencil {
        let f = |m: &DMatrix<f64>| symmetrize(&(u.transpose() * m * u));
        let a0 = if self.is_monic() { self.a0.clone() } else { f(&self.a0) };
        Pencil { a0, a: self.a.iter().map(f).collect() }
    }

    /// The pencil as a `d x d` matrix polynomial of degree one.
    pub fn to_matpoly(&self) -> MatPoly {
        let mut p = MatPoly::constant(self.a0.clone(), self.g());
        for (j, a) in self.a.iter().enumerate() {
            p.add_term(Word::letter(j), a.clone());
        }
        p
    }

    /// Decides whether the recession cone `{mu : sum mu_j A_j >= 0}` is
    /// trivial by maximizing each `+-mu_i` over the cone intersected with
    /// the unit box.
    pub fn is_bounded(&self, opts: &SolverOptions) -> Result<Boundedness> {
        self.require_monic()?;
        let g = self.g();
        let d = self.d();
        if g == 0 {
            return Ok(Boundedness::Bounded);
        }
        let mut blocks = vec![d];
        blocks.extend(std::iter::repeat(1).take(2 * g));
        let one = DMatrix::identity(1, 1);
        let mut lmi = Lmi::new(blocks, g);
        for k in 0..2 * g {
            lmi.constant[1 + k] = one.clone();
        }
        for j in 0..g {
            lmi.coeffs[j][0] = self.a[j].clone();
            lmi.coeffs[j][1 + 2 * j] = -&one;
            lmi.coeffs[j][2 + 2 * j] = one.clone();
        }
        for i in 0..g {
            for sign in [1.0, -1.0] {
                let mut b = vec![0.0; g];
                b[i] = sign;
                match lmi.maximize(&b, opts)? {
                    LmiOutcome::Optimal { value, y } if value > 1e-6 => {
                        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        let mu = DVector::from_iterator(g, y.iter().map(|v| v / scale));
                        let lam = min_eig(&self.linear_part(mu.as_slice()));
                        if lam >= -1e-8 {
                            return Ok(Boundedness::Unbounded(mu));
                        }
                        log::debug!("recession candidate rejected, min eig {lam:.2e}");
                    }
                    LmiOutcome::Optimal { .. } => {}
                    other => {
                        return Err(Error::SolverStalled(format!("box-bounded LMI returned {other:?}")));
                    }
                }
            }
        }
        Ok(Boundedness::Bounded)
    }
}

#[derive(Serialize, Deserialize)]
struct PencilJson {
    d: usize,
    g: usize,
    #[serde(rename = "A0")]
    a0: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    a: Vec<Vec<Vec<f64>>>,
}

impl Serialize for Pencil {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PencilJson {
            d: self.d(),
            g: self.g(),
            a0: matrix_to_rows(&self.a0),
            a: self.a.iter().map(matrix_to_rows).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pencil {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = PencilJson::deserialize(d)?;
        if j.a.len() != j.g {
            return Err(D::Error::custom(format!("expected {} coefficient matrices, found {}", j.g, j.a.len())));
        }
        let a0 = rows_to_matrix(&j.a0, Some(j.d)).map_err(D::Error::custom)?;
        if a0.nrows() != j.d {
            return Err(D::Error::custom(format!("A0 has {} rows, expected {}", a0.nrows(), j.d)));
        }
        let a = j
            .a
            .iter()
            .map(|r| rows_to_matrix(r, Some(j.d)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        Pencil::new(a0, a).map_err(D::Error::custom)
    }
}
