use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matrix_to_rows, min_eig, rows_to_matrix};
use crate::ncpoly::MatPoly;
use crate::pencil::Pencil;

/// `F = sum_k R_k^* R_k + sum_k Q_k^* L Q_k` with `1 x nu` rows `R_k` and
/// `d1 x nu` factors `Q_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsatzCertificate {
    /// The degree parameter: `deg R <= d + 1`, `deg Q <= d`.
    pub d: usize,
    #[serde(rename = "R")]
    pub r: Vec<MatPoly>,
    #[serde(rename = "Q")]
    pub q: Vec<MatPoly>,
    #[serde(with = "rows")]
    pub gram_sos: DMatrix<f64>,
    #[serde(rename = "gram_L", with = "rows")]
    pub gram_l: DMatrix<f64>,
}

mod rows {
    use super::*;

    pub fn serialize<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<DMatrix<f64>, D::Error> {
        use serde::de::Error as _;
        let r: Vec<Vec<f64>> = Vec::deserialize(d)?;
        rows_to_matrix(&r, None).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsatzReport {
    /// Max coefficient of `F - sum R^* R - sum Q^* L Q`.
    pub residual: f64,
    /// `residual / (1 + max coef of F)`.
    pub relative_residual: f64,
    pub gram_sos_min_eig: f64,
    pub gram_l_min_eig: f64,
    pub max_r_degree: i64,
    pub max_q_degree: i64,
    pub degree_ok: bool,
    pub valid: bool,
}

/// Relative residual accepted by [`verify_certificate`].
pub const CERT_TOL: f64 = 1e-6;

impl PsatzCertificate {
    /// The expansion `sum R^* R + sum Q^* L Q` for a pencil given as a
    /// matrix polynomial.
    pub fn expand(&self, l: &MatPoly, nu: usize) -> Result<MatPoly> {
        let mut acc = MatPoly::zero(nu, nu, l.g());
        for r in &self.r {
            if r.rows() != 1 || r.cols() != nu {
                return Err(Error::DimensionMismatch(format!("R factor is {}x{}, expected 1x{nu}", r.rows(), r.cols())));
            }
            acc = acc.add(&r.with_letters(l.g())?.hermitian_square())?;
        }
        for q in &self.q {
            if q.rows() != l.rows() || q.cols() != nu {
                return Err(Error::DimensionMismatch(format!(
                    "Q factor is {}x{}, expected {}x{nu}",
                    q.rows(),
                    q.cols(),
                    l.rows()
                )));
            }
            let q = q.with_letters(l.g())?;
            acc = acc.add(&q.adjoint().mul(l)?.mul(&q)?)?;
        }
        Ok(acc)
    }
}

/// Re-expands the certificate symbolically against `F` and `L`.
pub fn verify_certificate(f: &MatPoly, cert: &PsatzCertificate, l: &Pencil) -> Result<PsatzReport> {
    verify_against(f, cert, &l.to_matpoly())
}

/// As [`verify_certificate`] for a pencil given as a degree-one matrix
/// polynomial (used for weight pencils and non-monic data).
pub fn verify_against(f: &MatPoly, cert: &PsatzCertificate, l: &MatPoly) -> Result<PsatzReport> {
    if f.rows() != f.cols() {
        return Err(Error::DimensionMismatch("F must be square".into()));
    }
    if f.g() != l.g() {
        return Err(Error::VariableCountMismatch(f.g(), l.g()));
    }
    let nu = f.rows();
    let sum = cert.expand(l, nu)?;
    let residual = f.max_coef_diff(&sum);
    let relative_residual = residual / (1.0 + f.max_coef());
    let max_r_degree = cert.r.iter().map(|r| r.degree()).max().unwrap_or(-1);
    let max_q_degree = cert.q.iter().map(|q| q.degree()).max().unwrap_or(-1);
    let degree_ok = max_r_degree <= cert.d as i64 + 1 && max_q_degree <= cert.d as i64 && f.degree() <= 2 * cert.d as i64 + 2;
    let eig = |m: &DMatrix<f64>| if m.nrows() == 0 { 0.0 } else { min_eig(m) };
    let gram_sos_min_eig = eig(&cert.gram_sos);
    let gram_l_min_eig = eig(&cert.gram_l);
    let valid = relative_residual <= CERT_TOL && degree_ok;
    Ok(PsatzReport {
        residual,
        relative_residual,
        gram_sos_min_eig,
        gram_l_min_eig,
        max_r_degree,
        max_q_degree,
        degree_ok,
        valid,
    })
}
