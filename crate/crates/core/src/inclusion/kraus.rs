use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Mode;
use crate::error::{Error, Result};
use crate::linalg::{matrix_to_rows, max_abs, min_eig, rows_to_matrix, sym_eig, symmetrize};
use crate::pencil::Pencil;

/// Kraus eigenvalues below this fraction of the largest are discarded.
pub const KRAUS_TRUNCATION: f64 = 1e-9;

/// Choi matrix of a map `S^{d1} -> S^{d2}`, a `d1 x d1` array of
/// `d2 x d2` blocks `C_pq = tau(E_pq)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    d1: usize,
    d2: usize,
    c: DMatrix<f64>,
}

impl ChoiMatrix {
    pub fn new(d1: usize, d2: usize, c: DMatrix<f64>) -> Result<Self> {
        if c.nrows() != d1 * d2 || c.ncols() != d1 * d2 {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {}x{}, expected {}",
                c.nrows(),
                c.ncols(),
                d1 * d2
            )));
        }
        Ok(Self { d1, d2, c: symmetrize(&c) })
    }

    /// Choi matrix of `A -> sum_k V_k^T A V_k`.
    pub fn from_kraus(d1: usize, d2: usize, v: &[DMatrix<f64>]) -> Self {
        let mut c = DMatrix::zeros(d1 * d2, d1 * d2);
        for vk in v {
            let col = DMatrix::from_iterator(d1 * d2, 1, (0..d1).flat_map(|p| (0..d2).map(move |r| vk[(p, r)])));
            c += &col * col.transpose();
        }
        Self { d1, d2, c }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn block(&self, p: usize, q: usize) -> DMatrix<f64> {
        self.c.view((p * self.d2, q * self.d2), (self.d2, self.d2)).into_owned()
    }

    /// `tau(A) = sum_pq A_pq C_pq`.
    pub fn apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.d2, self.d2);
        for p in 0..self.d1 {
            for q in 0..self.d1 {
                if a[(p, q)] != 0.0 {
                    out += self.block(p, q) * a[(p, q)];
                }
            }
        }
        out
    }
}

/// Kraus operators `V_k` (`d1 x d2`) of a psd Choi matrix.
pub fn extract_kraus(c: &ChoiMatrix, tol: f64) -> Result<Vec<DMatrix<f64>>> {
    let (d1, d2) = (c.d1, c.d2);
    if d1 * d2 == 0 {
        return Ok(Vec::new());
    }
    let (vals, vecs) = sym_eig(&c.c);
    if vals[0] < -tol {
        return Err(Error::NotPsd(vals[0]));
    }
    let top = vals[vals.len() - 1];
    let cut = (KRAUS_TRUNCATION * top).max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for k in (0..vals.len()).rev() {
        if vals[k] <= cut {
            break;
        }
        let s = vals[k].sqrt();
        out.push(DMatrix::from_fn(d1, d2, |p, r| s * vecs[(p * d2 + r, k)]));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KrausCertificate {
    pub mode: Mode,
    pub v: Vec<DMatrix<f64>>,
    pub s: DMatrix<f64>,
    d1: usize,
    d2: usize,
}

/// Recomputed residuals of a [`KrausCertificate`] against a pencil pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausReport {
    /// `max_j ||B_j - sum V^T A_j V||`.
    pub reconstruction: f64,
    /// `||S + sum V^T V - I||`.
    pub unit: f64,
    pub slack_min_eig: f64,
    /// `||S||` in isometry mode, `max(0, lambda_max(sum V^T V) - 1)` otherwise.
    pub mode_defect: f64,
    pub valid: bool,
}

impl KrausCertificate {
    pub fn new(mode: Mode, d1: usize, d2: usize, v: Vec<DMatrix<f64>>, s: DMatrix<f64>) -> Result<Self> {
        for (k, m) in v.iter().enumerate() {
            if m.nrows() != d1 || m.ncols() != d2 {
                return Err(Error::DimensionMismatch(format!(
                    "V{} is {}x{}, expected {d1}x{d2}",
                    k + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if s.nrows() != d2 || s.ncols() != d2 {
            return Err(Error::DimensionMismatch(format!("S is {}x{}, expected {d2}x{d2}", s.nrows(), s.ncols())));
        }
        Ok(Self { mode, v, s: symmetrize(&s), d1, d2 })
    }

    pub fn empty(d1: usize, mode: Mode) -> Self {
        Self { mode, v: Vec::new(), s: DMatrix::zeros(0, 0), d1, d2: 0 }
    }

    /// Kraus form of a feasible Choi matrix; `S` is recomputed as
    /// `I - sum V^T V` in contraction mode and is zero in isometry mode.
    pub fn from_choi(c: &ChoiMatrix, mode: Mode, tol: f64) -> Result<Self> {
        let v = extract_kraus(c, tol)?;
        let d2 = c.d2;
        let s = match mode {
            Mode::Isometry => DMatrix::zeros(d2, d2),
            Mode::Contraction => DMatrix::identity(d2, d2) - gram(&v, d2),
        };
        Self::new(mode, c.d1, d2, v, s)
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    /// `sum_k V_k^T A V_k`.
    pub fn apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.d2, self.d2);
        for vk in &self.v {
            out += vk.transpose() * a * vk;
        }
        out
    }

    /// Checks every invariant against `L2 = S + sum V^T L1 V` at tolerance
    /// `tol` relative to the coefficient scale.
    pub fn verify(&self, l1: &Pencil, l2: &Pencil, tol: f64) -> Result<KrausReport> {
        if l1.g() != l2.g() {
            return Err(Error::VariableCountMismatch(l1.g(), l2.g()));
        }
        if l1.d() != self.d1 || l2.d() != self.d2 {
            return Err(Error::DimensionMismatch(format!(
                "certificate is {}->{}, pencils are {}->{}",
                self.d1,
                self.d2,
                l1.d(),
                l2.d()
            )));
        }
        let d2 = self.d2;
        let mut reconstruction = 0.0f64;
        let mut scale = 1.0f64;
        for (a, b) in l1.coeffs().iter().zip(l2.coeffs()) {
            reconstruction = reconstruction.max(max_abs(&(b - self.apply(a))));
            scale = scale.max(max_abs(b));
        }
        let g = gram(&self.v, d2);
        let id = DMatrix::identity(d2, d2);
        // off-monic constant terms are reconstructed too
        reconstruction = reconstruction.max(max_abs(&(l2.a0() - &self.s - self.apply(l1.a0()))));
        let unit = max_abs(&(&self.s + &g - &id));
        let slack_min_eig = min_eig(&self.s);
        let mode_defect = match self.mode {
            Mode::Isometry => max_abs(&self.s).max(max_abs(&(&g - &id))),
            Mode::Contraction => (crate::linalg::sym_eig(&g).0.iter().copied().fold(0.0f64, f64::max) - 1.0).max(0.0),
        };
        let t = tol * scale;
        let valid = reconstruction <= t && unit <= tol && slack_min_eig >= -tol && mode_defect <= tol;
        Ok(KrausReport { reconstruction, unit, slack_min_eig: if d2 == 0 { 0.0 } else { slack_min_eig }, mode_defect, valid })
    }
}

fn gram(v: &[DMatrix<f64>], d2: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(d2, d2);
    for vk in v {
        g += vk.transpose() * vk;
    }
    symmetrize(&g)
}

#[derive(Serialize, Deserialize)]
struct KrausJson {
    mode: Mode,
    d1: usize,
    d2: usize,
    #[serde(rename = "V")]
    v: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
}

impl Serialize for KrausCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KrausJson {
            mode: self.mode,
            d1: self.d1,
            d2: self.d2,
            v: self.v.iter().map(matrix_to_rows).collect(),
            s: matrix_to_rows(&self.s),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KrausCertificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = KrausJson::deserialize(d)?;
        let v = j
            .v
            .iter()
            .map(|r| rows_to_matrix(r, Some(j.d2)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(D::Error::custom)?;
        let s = rows_to_matrix(&j.s, Some(j.d2)).map_err(D::Error::custom)?;
        KrausCertificate::new(j.mode, j.d1, j.d2, v, s).map_err(D::Error::custom)
    }
}
