//! Positivity on spectrahedrops `proj_x D_L` for `L(x, y)`.

use nalgebra::DMatrix;

use super::{resolve_degree, run, PencilData, PsatzOptions, PsatzVerdict};
use crate::error::{Error, Result};
use crate::linalg::kron;
use crate::lmi::{Lmi, LmiOutcome};
use crate::ncpoly::MatPoly;
use crate::pencil::{Pencil, SymTuple};
use freespec_sdp::SolverOptions;

/// Operator-norm bound on the lifting variables `Y`.
pub const LIFT_RADIUS: f64 = 1e3;

/// `max t` such that some `Y` with `|Y_k| <= LIFT_RADIUS` has
/// `L(X, Y) >= t I`. Nonnegative values mean `X` is in the closure of the
/// spectrahedrop, up to the radius.
pub fn projection_margin(l: &Pencil, g: usize, x: &SymTuple, opts: &SolverOptions) -> Result<f64> {
    if x.g() != g || g > l.g() {
        return Err(Error::VariableCountMismatch(x.g(), g));
    }
    let (d, n, h) = (l.d(), x.n(), l.g() - g);
    let mut base = kron(l.a0(), &DMatrix::identity(n, n));
    for j in 0..g {
        base += kron(l.coeff(j), &x.x[j]);
    }
    if h == 0 {
        return Ok(crate::linalg::min_eig(&base));
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|r| (r..n).map(move |c| (r, c))).collect();
    let mut blocks = vec![d * n];
    blocks.extend(std::iter::repeat(2 * n).take(h));
    let vars = 1 + h * pairs.len();
    let mut lmi = Lmi::new(blocks, vars);
    lmi.constant[0] = base;
    lmi.coeffs[0][0] = -DMatrix::identity(d * n, d * n);
    for k in 0..h {
        lmi.constant[1 + k] = DMatrix::identity(2 * n, 2 * n) * LIFT_RADIUS;
        for (p, &(r, c)) in pairs.iter().enumerate() {
            let mut e = DMatrix::zeros(n, n);
            e[(r, c)] = 1.0;
            e[(c, r)] = 1.0;
            let v = 1 + k * pairs.len() + p;
            lmi.coeffs[v][0] = kron(l.coeff(g + k), &e);
            let mut off = DMatrix::zeros(2 * n, 2 * n);
            off.view_mut((0, n), (n, n)).copy_from(&e);
            off.view_mut((n, 0), (n, n)).copy_from(&e);
            lmi.coeffs[v][1 + k] = off;
        }
    }
    let mut b = vec![0.0; vars];
    b[0] = 1.0;
    match lmi.maximize(&b, opts)? {
        LmiOutcome::Optimal { value, .. } => Ok(value),
        LmiOutcome::Infeasible => Err(Error::SolverStalled("projection LMI infeasible".into())),
        LmiOutcome::Unbounded => Err(Error::SolverStalled("projection LMI unbounded".into())),
    }
}

/// Certifies `F >= 0` on `proj_x D_L`, where `L` has `g + h` letters and
/// `F` only the first `g`.
pub fn certify_drop(l: &Pencil, g: usize, f: &MatPoly, opts: &PsatzOptions) -> Result<PsatzVerdict> {
    l.require_monic()?;
    if g > l.g() || f.g() != g {
        return Err(Error::VariableCountMismatch(l.g(), f.g()));
    }
    let d = resolve_degree(f, opts)?;
    let x_part = Pencil::new(l.a0().clone(), l.coeffs()[..g].to_vec())?;
    let data = PencilData { a0: l.a0().clone(), a: x_part.coeffs().to_vec() };
    let sdp = super::build_gram_sdp(&data, f, d, &l.coeffs()[g..])?;
    let lm = l.to_matpoly();
    let member = |x: &SymTuple| projection_margin(l, g, x, &opts.solver);
    let verdict = run(&sdp, f, &x_part.to_matpoly(), &x_part, opts, &member)?;
    // Factors of Q^* L Q carry the annihilated y-terms; check against the full pencil.
    if let PsatzVerdict::Certified { certificate, .. } = &verdict {
        let full = super::verify_against(&f.with_letters(l.g())?, certificate, &lm)?;
        if !full.valid {
            return Ok(PsatzVerdict::Unresolved(format!(
                "y-terms not annihilated (residual {:.2e})",
                full.relative_residual
            )));
        }
        return Ok(PsatzVerdict::Certified { certificate: certificate.clone(), report: full });
    }
    Ok(verdict)
}
