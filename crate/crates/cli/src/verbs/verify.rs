//! Offline checks of emitted certificates and witnesses. No solver runs
//! here; every check is linear algebra on the stored data.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use freespec::gleich::equivalence_residual;
use freespec::linalg::{max_abs, min_eig, symmetrize};
use freespec::psatz::{verify_certificate, PsatzCertificate};
use freespec::{KrausCertificate, MatPoly, Pencil, SymTuple};

use crate::io::{from_value, matrix};
use crate::registry::Command;
use crate::{Args, CliError, Report};

/// Annihilation margin a witness point must keep inside a spectrahedron.
pub const INSIDE_TOL: f64 = 1e-7;
/// Depth a witness point must reach outside a spectrahedron.
pub const OUTSIDE_TOL: f64 = 1e-6;
/// Recession directions must satisfy `Lambda(mu) >= -RECESSION_TOL`.
pub const RECESSION_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Checked {
    pub valid: bool,
    /// Zero for an exact certificate, growing with the defect.
    pub residual: f64,
    pub residuals: Value,
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, CliError> {
    v.get(key).ok_or_else(|| CliError::Input(format!("certificate lacks field {key:?}")))
}

fn pencil_at(v: &Value, key: &str) -> Result<Pencil, CliError> {
    from_value(field(v, key)?, key)
}

fn tuple_at(v: &Value, key: &str) -> Result<SymTuple, CliError> {
    from_value(field(v, key)?, key)
}

fn min_eig_or_inf(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        f64::INFINITY
    } else {
        min_eig(m)
    }
}

fn min_eig_at(l: &Pencil, x: &SymTuple) -> Result<f64, CliError> {
    Ok(min_eig_or_inf(&l.evaluate(x).map_err(CliError::from)?))
}

/// `E^T L E` for orthonormal `E`, without the invariance requirement.
fn compress(l: &Pencil, e: &DMatrix<f64>) -> Result<Pencil, CliError> {
    let coeffs = l.coeffs().iter().map(|a| symmetrize(&(e.transpose() * a * e))).collect();
    Ok(Pencil::monic_sized(e.ncols(), coeffs)?)
}

fn orthonormality(e: &DMatrix<f64>) -> f64 {
    let k = e.ncols();
    max_abs(&(e.transpose() * e - DMatrix::identity(k, k)))
}

fn kraus(l1: &Pencil, l2: &Pencil, cert: &Value, tol: f64) -> Result<Checked, CliError> {
    let k: KrausCertificate = from_value(cert, "Kraus certificate")?;
    let rep = k.verify(l1, l2, tol)?;
    let residual = rep.reconstruction.max(rep.unit).max(rep.mode_defect).max(-rep.slack_min_eig).max(0.0);
    Ok(Checked { valid: rep.valid, residual, residuals: serde_json::to_value(&rep).expect("report serializes") })
}

pub fn check_inclusion(v: &Value, tol: f64) -> Result<Checked, CliError> {
    kraus(&pencil_at(v, "lhs")?, &pencil_at(v, "rhs")?, field(v, "kraus")?, tol)
}

fn separation(inside: &Pencil, outside: &Pencil, x: &SymTuple) -> Result<Checked, CliError> {
    let a = min_eig_at(inside, x)?;
    let b = min_eig_at(outside, x)?;
    Ok(Checked {
        valid: a >= -INSIDE_TOL && b <= -OUTSIDE_TOL,
        residual: (-a).max(0.0),
        residuals: json!({ "inside_min_eig": a, "outside_min_eig": b }),
    })
}

pub fn check_inclusion_witness(v: &Value) -> Result<Checked, CliError> {
    separation(&pencil_at(v, "lhs")?, &pencil_at(v, "rhs")?, &tuple_at(v, "X")?)
}

pub fn check_equality_witness(v: &Value) -> Result<Checked, CliError> {
    let (l1, l2) = (pencil_at(v, "lhs")?, pencil_at(v, "rhs")?);
    let in_first: bool = from_value(field(v, "in_first")?, "in_first")?;
    let x = tuple_at(v, "X")?;
    if in_first {
        separation(&l1, &l2, &x)
    } else {
        separation(&l2, &l1, &x)
    }
}

/// A minimal pencil `M = E^T L E` together with a certificate that
/// `D_M ⊆ D_L`; the reverse inclusion holds for every compression.
fn check_whole(l: &Pencil, m: &Value, tol: f64) -> Result<(Pencil, DMatrix<f64>, Checked), CliError> {
    let mp = pencil_at(m, "pencil")?;
    let e = matrix(field(m, "embedding")?, "embedding")?;
    if e.nrows() != l.d() || e.ncols() != mp.d() {
        return Err(CliError::Input(format!("embedding is {}x{}, expected {}x{}", e.nrows(), e.ncols(), l.d(), mp.d())));
    }
    let orth = orthonormality(&e);
    let restricted = compress(l, &e)?;
    let mut restriction = 0.0f64;
    for (a, b) in restricted.coeffs().iter().zip(mp.coeffs()) {
        restriction = restriction.max(max_abs(&(a - b)));
    }
    let whole = kraus(&mp, l, field(m, "wholeness")?, tol)?;
    let residual = whole.residual.max(orth).max(restriction);
    let valid = whole.valid && orth <= tol && restriction <= tol * (1.0 + l.coeffs().iter().map(max_abs).fold(0.0, f64::max));
    let residuals = json!({ "orthonormality": orth, "restriction": restriction, "wholeness": whole.residuals });
    Ok((mp, e, Checked { valid, residual, residuals }))
}

pub fn check_minimal(v: &Value, tol: f64) -> Result<Checked, CliError> {
    let l = pencil_at(v, "pencil")?;
    let m = field(v, "minimal")?;
    let (_, _, mut out) = check_whole(&l, m, tol)?;
    let blocks: Vec<Value> = from_value(field(m, "blocks")?, "blocks")?;
    let blocks = blocks.iter().map(|b| matrix(b, "block")).collect::<Result<Vec<_>, _>>()?;
    let witnesses: Vec<SymTuple> = from_value(field(v, "removal_witnesses")?, "removal_witnesses")?;
    if witnesses.len() != blocks.len() {
        return Err(CliError::Input(format!("{} blocks but {} removal witnesses", blocks.len(), witnesses.len())));
    }
    let mut worst_inside = f64::INFINITY;
    let mut worst_outside = f64::NEG_INFINITY;
    for (i, x) in witnesses.iter().enumerate() {
        let rest: Vec<&DMatrix<f64>> = blocks.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, b)| b).collect();
        let cols: usize = rest.iter().map(|b| b.ncols()).sum();
        let mut e = DMatrix::zeros(l.d(), cols);
        let mut c = 0;
        for b in rest {
            e.columns_mut(c, b.ncols()).copy_from(b);
            c += b.ncols();
        }
        let sub = compress(&l, &e)?;
        worst_inside = worst_inside.min(min_eig_at(&sub, x)?);
        worst_outside = worst_outside.max(min_eig_at(&l, x)?);
    }
    out.valid &= worst_inside >= -INSIDE_TOL && worst_outside <= -OUTSIDE_TOL;
    out.residual = out.residual.max((-worst_inside).max(0.0));
    if let Value::Object(ref mut map) = out.residuals {
        map.insert("removal_inside_min_eig".into(), json!(worst_inside));
        map.insert("removal_outside_max_eig".into(), json!(worst_outside));
    }
    Ok(out)
}

pub fn check_equality(v: &Value, tol: f64) -> Result<Checked, CliError> {
    let (l1, l2) = (pencil_at(v, "lhs")?, pencil_at(v, "rhs")?);
    let (m1, _, c1) = check_whole(&l1, field(v, "minimal_lhs")?, tol)?;
    let (m2, _, c2) = check_whole(&l2, field(v, "minimal_rhs")?, tol)?;
    let u = matrix(field(v, "U")?, "U")?;
    if u.nrows() != m1.d() || u.ncols() != m2.d() {
        return Err(CliError::Input(format!("U is {}x{}, minimal sizes {} and {}", u.nrows(), u.ncols(), m1.d(), m2.d())));
    }
    let orth = orthonormality(&u);
    let equiv = equivalence_residual(&m1, &m2, &u);
    let valid = c1.valid && c2.valid && m1.d() == m2.d() && orth <= tol && equiv <= tol;
    Ok(Checked {
        valid,
        residual: c1.residual.max(c2.residual).max(orth).max(equiv),
        residuals: json!({
            "equivalence": equiv,
            "orthogonality": orth,
            "minimal_lhs": c1.residuals,
            "minimal_rhs": c2.residuals,
        }),
    })
}

pub fn check_psatz(v: &Value, tol: f64) -> Result<Checked, CliError> {
    let l = pencil_at(v, "pencil")?;
    let f: MatPoly = from_value(field(v, "poly")?, "poly")?;
    let cert: PsatzCertificate = from_value(field(v, "psatz")?, "positivity certificate")?;
    let rep = verify_certificate(&f, &cert, &l)?;
    Ok(Checked {
        valid: rep.valid && rep.relative_residual <= tol,
        residual: rep.relative_residual,
        residuals: serde_json::to_value(&rep).expect("report serializes"),
    })
}

pub fn check_psatz_witness(v: &Value) -> Result<Checked, CliError> {
    let l = pencil_at(v, "pencil")?;
    let f: MatPoly = from_value(field(v, "poly")?, "poly")?;
    let x = tuple_at(v, "X")?;
    let gamma: Vec<f64> = from_value(field(v, "gamma")?, "gamma")?;
    let fx = f.evaluate(&x)?;
    if gamma.len() != fx.nrows() {
        return Err(CliError::Input(format!("gamma has length {}, F(X) has size {}", gamma.len(), fx.nrows())));
    }
    let g = DVector::from_vec(gamma);
    let norm2 = g.norm_squared();
    if norm2 == 0.0 {
        return Err(CliError::Input("gamma is zero".into()));
    }
    let value = (g.transpose() * &fx * &g)[(0, 0)] / norm2;
    let member = min_eig_at(&l, &x)?;
    Ok(Checked {
        valid: value <= -INSIDE_TOL && member >= -INSIDE_TOL,
        residual: (-member).max(0.0),
        residuals: json!({ "value": value, "membership_min_eig": member }),
    })
}

pub fn check_recession(v: &Value) -> Result<Checked, CliError> {
    let l = pencil_at(v, "pencil")?;
    let mu: Vec<f64> = from_value(field(v, "mu")?, "mu")?;
    if mu.len() != l.g() {
        return Err(CliError::Input(format!("mu has length {}, pencil has {} variables", mu.len(), l.g())));
    }
    let size = mu.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let lam = min_eig_or_inf(&l.linear_part(&mu));
    Ok(Checked {
        valid: size > 0.5 && lam >= -RECESSION_TOL,
        residual: (-lam).max(0.0),
        residuals: json!({ "recession_min_eig": lam, "mu_max_abs": size }),
    })
}

/// Dispatches on the `kind` field.
pub fn check(v: &Value, tol: f64) -> Result<(String, Checked), CliError> {
    let kind: String = from_value(field(v, "kind")?, "kind")?;
    let c = match kind.as_str() {
        "inclusion" => check_inclusion(v, tol)?,
        "inclusion_witness" => check_inclusion_witness(v)?,
        "equality" => check_equality(v, tol)?,
        "equality_witness" => check_equality_witness(v)?,
        "minimal" => check_minimal(v, tol)?,
        "psatz" => check_psatz(v, tol)?,
        "psatz_witness" => check_psatz_witness(v)?,
        "recession" => check_recession(v)?,
        other => return Err(CliError::Input(format!("unknown certificate kind {other:?}"))),
    };
    Ok((kind, c))
}

pub const DEFAULT_TOL: f64 = 1e-6;

pub struct Verify;

impl Command for Verify {
    fn name(&self) -> &'static str {
        "verify"
    }

    fn about(&self) -> &'static str {
        "re-check a certificate or witness file without a solver"
    }

    fn required(&self) -> &'static [&'static str] {
        &["certificate"]
    }

    fn run(&self, args: &Args) -> Result<Report, CliError> {
        let path = args.certificate.as_deref().expect("checked by required()");
        let doc: Value = crate::io::read_json(path, "certificate")?;
        let body = if doc.get("verdict").is_some() {
            doc.get("certificate").or_else(|| doc.get("witness")).ok_or_else(|| {
                CliError::Input("verdict file carries neither a certificate nor a witness".into())
            })?
        } else {
            &doc
        };
        let (kind, c) = check(body, args.tol.unwrap_or(DEFAULT_TOL))?;
        Ok(Report::new(if c.valid { "valid" } else { "invalid" })
            .with("kind", kind)
            .with("residual", c.residual)
            .residuals_from(c.residuals))
    }
}
