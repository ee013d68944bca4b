use nalgebra::DMatrix;

use super::{check_inclusion, InclusionOptions, InclusionVerdict, ModeChoice};
use crate::error::{Error, Result};
use crate::lmi::{Lmi, LmiOutcome};
use crate::pencil::{Pencil, SymTuple};
use freespec_sdp::SolverOptions;

/// The monic pencil `L_A(x) = I + sum_j A_j x_j`.
pub fn target_pencil(a: &SymTuple) -> Result<Pencil> {
    Pencil::monic_sized(a.n(), a.x.clone())
}

/// Whether `A` lies in the polar dual of `D_{L_gen}`, i.e. in the matrix
/// convex hull of the generators together with `0`. `Auto` runs the
/// contraction SDP.
pub fn polar_membership(a: &SymTuple, generators: &SymTuple, opts: &InclusionOptions) -> Result<InclusionVerdict> {
    if a.g() != generators.g() {
        return Err(Error::VariableCountMismatch(a.g(), generators.g()));
    }
    let lg = target_pencil(generators)?;
    let la = target_pencil(a)?;
    let mut o = opts.clone();
    if o.mode == ModeChoice::Auto {
        o.mode = ModeChoice::Contraction;
    }
    check_inclusion(&lg, &la, &o)
}

/// Whether `A` lies in the polar dual of the projection onto `x` of
/// `D_L`, `L(x, y) = I + sum Omega_j x_j + sum Gamma_l y_l`. Under `Auto`
/// the isometry SDP is tried first when the projection is bounded.
pub fn drop_polar_membership(
    a: &SymTuple,
    omega: &SymTuple,
    gamma: &SymTuple,
    opts: &InclusionOptions,
) -> Result<InclusionVerdict> {
    if a.g() != omega.g() {
        return Err(Error::VariableCountMismatch(a.g(), omega.g()));
    }
    if gamma.g() > 0 && gamma.n() != omega.n() {
        return Err(Error::DimensionMismatch(format!(
            "Omega has size {}, Gamma has size {}",
            omega.n(),
            gamma.n()
        )));
    }
    if gamma.g() == 0 {
        return polar_membership(a, omega, opts);
    }
    let d = omega.n();
    let mut coeffs = omega.x.clone();
    coeffs.extend(gamma.x.iter().cloned());
    let l = Pencil::monic_sized(d, coeffs)?;
    let e = a.n();
    let mut target = a.x.clone();
    target.extend(std::iter::repeat(DMatrix::zeros(e, e)).take(gamma.g()));
    let la = Pencil::monic_sized(e, target)?;
    let mut o = opts.clone();
    if o.mode == ModeChoice::Auto {
        o.mode = if projection_bounded(&l, omega.g(), &opts.solver)? {
            ModeChoice::Isometry
        } else {
            ModeChoice::Contraction
        };
    }
    check_inclusion(&l, &la, &o)
}

/// Whether the projection of `D_L(1)` onto the first `g` coordinates is
/// bounded: no nonzero `mu` admits `nu` with `Lambda(mu, nu) >= 0`.
pub fn projection_bounded(l: &Pencil, g: usize, opts: &SolverOptions) -> Result<bool> {
    let (d, total) = (l.d(), l.g());
    if g == 0 {
        return Ok(true);
    }
    let mut blocks = vec![d];
    blocks.extend(std::iter::repeat(1).take(2 * g));
    let one = DMatrix::identity(1, 1);
    let mut lmi = Lmi::new(blocks, total);
    for k in 0..2 * g {
        lmi.constant[1 + k] = one.clone();
    }
    for j in 0..total {
        lmi.coeffs[j][0] = l.coeff(j).clone();
        if j < g {
            lmi.coeffs[j][1 + 2 * j] = -&one;
            lmi.coeffs[j][2 + 2 * j] = one.clone();
        }
    }
    for i in 0..g {
        for sign in [1.0, -1.0] {
            let mut b = vec![0.0; total];
            b[i] = sign;
            match lmi.maximize(&b, opts)? {
                LmiOutcome::Optimal { value, .. } if value > 1e-6 => return Ok(false),
                LmiOutcome::Optimal { .. } => {}
                // free nu may make the cone unbounded only through mu
                LmiOutcome::Unbounded => return Ok(false),
                LmiOutcome::Infeasible => {
                    return Err(Error::SolverStalled("recession LMI reported infeasible at the origin".into()))
                }
            }
        }
    }
    Ok(true)
}
