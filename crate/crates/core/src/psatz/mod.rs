//! Degree-bounded Positivstellensatz on free spectrahedra.
//!
//! A symmetric `F` of degree `<= 2d + 1` that is psd on `D_L` lies in the
//! truncated module `Sigma_{d+1} + { sum Q^* L Q : deg Q <= d }`. `certify`
//! either returns such a decomposition or a point `(X, gamma)` with
//! `X in D_L` and `<F(X) gamma, gamma> < 0`, read off the SDP dual through
//! the GNS construction.

mod builder;
mod certificate;
mod drop;
mod functional;

use freespec_sdp::{solve, SdpSolution, SolverOptions, Status};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{gaussian, min_eig, random_symmetric, sym_eig};
use crate::ncpoly::{basis_count, MatPoly, Word};
use crate::pencil::{Pencil, SymTuple};

pub use builder::{build_gram_sdp, orbit_count, orbit_rep, with_margin, Element, PencilData, PsatzIndex, PsatzSdp};
pub use certificate::{verify_against, verify_certificate, PsatzCertificate, PsatzReport, CERT_TOL};
pub use drop::{certify_drop, projection_margin};
pub use functional::{gns_extract, Functional, GnsModel, GNS_RANK_TOL};

/// Refutations must reach `<F(X) gamma, gamma> <= -REFUTE_TOL` with a unit
/// `gamma` and `lambda_min(L(X)) >= -MEMBER_TOL`.
pub const REFUTE_TOL: f64 = 1e-7;
pub const MEMBER_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct PsatzOptions {
    pub solver: SolverOptions,
    /// Degree parameter `d`; `None` uses `floor(deg F / 2)`.
    pub degree: Option<usize>,
    pub seed: u64,
}

impl Default for PsatzOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), degree: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refutation {
    pub model: GnsModel,
    /// `<F(X) gamma, gamma>` with `|gamma| = 1`.
    pub value: f64,
    /// `lambda_min(L(X))`, or the projection margin for spectrahedrops.
    pub membership_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsatzVerdict {
    Certified { certificate: PsatzCertificate, report: PsatzReport },
    Refuted(Refutation),
    Unresolved(String),
}

impl PsatzVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, PsatzVerdict::Certified { .. })
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, PsatzVerdict::Refuted(_))
    }
}

/// Default degree parameter `floor(deg F / 2)` for `F`.
pub fn default_degree(f: &MatPoly) -> usize {
    (f.degree().max(0) / 2) as usize
}

fn pencil_data(l: &Pencil) -> PencilData {
    PencilData { a0: l.a0().clone(), a: l.coeffs().to_vec() }
}

fn resolve_degree(f: &MatPoly, opts: &PsatzOptions) -> Result<usize> {
    let d = opts.degree.unwrap_or_else(|| default_degree(f));
    if f.degree() > 2 * d as i64 + 1 {
        return Err(Error::DegreeTooHigh { deg: f.degree(), bound: 2 * d as i64 + 1 });
    }
    Ok(d)
}

/// Gram SDP for a monic `L`.
pub fn build_psatz_sdp(l: &Pencil, f: &MatPoly, d: usize) -> Result<PsatzSdp> {
    l.require_monic()?;
    check_letters(l, f)?;
    build_gram_sdp(&pencil_data(l), f, d, &[])
}

/// Gram SDP of the naive module `Sigma + { sum Q^* L Q }` for an arbitrary,
/// possibly non-monic, pencil.
pub fn naive_module_sdp(l: &Pencil, f: &MatPoly, d: usize) -> Result<PsatzSdp> {
    check_letters(l, f)?;
    build_gram_sdp(&pencil_data(l), f, d, &[])
}

fn check_letters(l: &Pencil, f: &MatPoly) -> Result<()> {
    if l.g() != f.g() {
        return Err(Error::VariableCountMismatch(l.g(), f.g()));
    }
    Ok(())
}

/// Certifies `F >= 0` on `D_L` or refutes it.
pub fn certify(l: &Pencil, f: &MatPoly, opts: &PsatzOptions) -> Result<PsatzVerdict> {
    l.require_monic()?;
    check_letters(l, f)?;
    let d = resolve_degree(f, opts)?;
    let sdp = build_gram_sdp(&pencil_data(l), f, d, &[])?;
    let lm = l.to_matpoly();
    let member = |x: &SymTuple| -> Result<f64> { l.min_eig_at(x) };
    run(&sdp, f, &lm, l, opts, &member)
}

/// Shared pipeline: margin SDP, certificate extraction or dual refutation.
pub(crate) fn run(
    sdp: &PsatzSdp,
    f: &MatPoly,
    lm: &MatPoly,
    l: &Pencil,
    opts: &PsatzOptions,
    member: &dyn Fn(&SymTuple) -> Result<f64>,
) -> Result<PsatzVerdict> {
    let margin = with_margin(sdp);
    let sol = solve(&margin, &opts.solver)?;
    let f00 = f.coef(&Word::empty()).map(|c| c[(0, 0)]).unwrap_or(0.0);
    let scale = 1.0 + f.max_coef();
    match sol.status {
        s if s == Status::Optimal || (s == Status::Stalled && usable(&sol)) => {
            let t = f00 - sol.primal_objective;
            log::debug!("psatz margin t* = {t:.3e}");
            if t >= -REFUTE_TOL * scale {
                let cert = extract_certificate(sdp, &sol, t.max(0.0))?;
                let report = verify_against(f, &cert, lm)?;
                if report.valid {
                    return Ok(PsatzVerdict::Certified { certificate: cert, report });
                }
                return Ok(PsatzVerdict::Unresolved(format!(
                    "margin {t:.2e} but certificate residual {:.2e}",
                    report.relative_residual
                )));
            }
            let lam = dual_functional(sdp, &sol.y, false);
            refute(sdp, f, l, lam, opts, member, t)
        }
        Status::PrimalInfeasible => {
            let ray = sol.infeasibility_ray.as_ref().expect("ray present when infeasible");
            let lam = dual_functional(sdp, &ray.y, true);
            refute(sdp, f, l, lam, opts, member, f64::NEG_INFINITY)
        }
        Status::Stalled => Ok(PsatzVerdict::Unresolved(format!(
            "Gram SDP stalled after {} iterations (residuals {:.2e}/{:.2e}, gap {:.2e})",
            sol.iterations, sol.primal_residual, sol.dual_residual, sol.gap
        ))),
        s => Err(Error::SolverStalled(format!(
            "Gram SDP ended {s:?} after {} iterations (residuals {:.2e}/{:.2e})",
            sol.iterations, sol.primal_residual, sol.dual_residual
        ))),
    }
}

/// A stalled iterate close enough to optimal to try both verdicts on;
/// whatever comes out is verified independently.
fn usable(sol: &SdpSolution) -> bool {
    sol.primal_residual <= 1e-5 && sol.dual_residual <= 1e-5 && sol.gap <= 1e-4
}

/// Factors both Gram blocks by eigendecomposition and adds `sqrt(t)`
/// constant rows for a positive margin.
fn extract_certificate(sdp: &PsatzSdp, sol: &SdpSolution, t: f64) -> Result<PsatzCertificate> {
    let idx = &sdp.index;
    let (g, nu, d1) = (idx.g, idx.nu, idx.d1);
    let mut r = Vec::new();
    let mut q = Vec::new();
    for (vals, vecs, is_sos) in [
        { let (a, b) = sym_eig(&sol.x[0]); (a, b, true) },
        { let (a, b) = sym_eig(&sol.x[1]); (a, b, false) },
    ] {
        if vals.is_empty() {
            continue;
        }
        let top = vals.iter().copied().fold(0.0f64, f64::max);
        for k in 0..vals.len() {
            if vals[k] <= crate::inclusion::KRAUS_TRUNCATION * top || vals[k] <= 0.0 {
                continue;
            }
            let s = vals[k].sqrt();
            let rows = if is_sos { 1 } else { d1 };
            let mut p = MatPoly::zero(rows, nu, g);
            for (ui, u) in idx.words.iter().enumerate() {
                let c = DMatrix::from_fn(rows, nu, |a, i| {
                    let pos = if is_sos { idx.sos_index(ui, i) } else { idx.l_index(ui, a, i) };
                    s * vecs[(pos, k)]
                });
                p.add_term(u.clone(), c);
            }
            if is_sos {
                r.push(p);
            } else {
                q.push(p);
            }
        }
    }
    if t > 0.0 {
        for i in 0..nu {
            let mut c = DMatrix::zeros(1, nu);
            c[(0, i)] = t.sqrt();
            r.push(MatPoly::constant(c, g));
        }
    }
    Ok(PsatzCertificate { d: idx.degree, r, q, gram_sos: sol.x[0].clone(), gram_l: sol.x[1].clone() })
}

/// Functional from margin-problem multipliers (`ray = false`) or a Farkas
/// ray of the margin problem (`ray = true`).
fn dual_functional(sdp: &PsatzSdp, y: &[f64], ray: bool) -> Functional {
    let idx = &sdp.index;
    let base = idx.orbit_of[&(Word::empty(), 0, 0)];
    let n_orb = idx.n_orbit_constraints;
    let pos = |k: usize| if k < base { k } else { k - 1 };
    let mut ell = vec![0.0; n_orb];
    let mut diag_sum = 0.0;
    for k in 0..n_orb {
        if k == base {
            continue;
        }
        ell[k] = -y[pos(k)];
        let (w, i, j) = &idx.orbits[k];
        if w.is_empty() && i == j {
            diag_sum += y[pos(k)];
        }
    }
    ell[base] = if ray { diag_sum } else { 1.0 + diag_sum };
    let mut lam = Functional::zero(idx.g, idx.nu, 2 * idx.degree + 1);
    for (k, (w, i, j)) in idx.orbits.iter().enumerate() {
        let v = if idx.singleton[k] { ell[k] } else { 0.5 * ell[k] };
        let mut m = lam.matrix(w);
        m[(*i, *j)] = v;
        lam.set(w.clone(), m);
        if !idx.singleton[k] {
            let ws = w.adjoint();
            let mut m = lam.matrix(&ws);
            m[(*j, *i)] = v;
            lam.set(ws, m);
        }
    }
    lam
}

/// Point evaluation at a random small interior tuple of level
/// `nu * #words`; its Hankel matrix is positive definite.
fn interior_functional(l: &Pencil, idx: &PsatzIndex, seed: u64) -> Result<Functional> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = idx.nu * basis_count(idx.g, idx.degree);
    let raw: Vec<DMatrix<f64>> = (0..idx.g).map(|_| random_symmetric(&mut rng, n)).collect();
    let mut norm = 0.0;
    for (a, x) in l.coeffs().iter().take(idx.g).zip(&raw) {
        norm += a.norm() * x.norm();
    }
    let s = if norm > 0.0 { 0.5 / norm } else { 1.0 };
    let x = SymTuple::with_level(n, raw.iter().map(|m| m * s).collect())?;
    let mut gamma = DVector::from_fn(idx.nu * n, |_, _| gaussian(&mut rng));
    gamma /= gamma.norm();
    Functional::from_point(&x, &gamma, idx.nu, 2 * idx.degree + 1)
}

/// Repairs `lambda` towards strict positivity when needed, runs GNS and
/// returns a refutation only after direct verification.
fn refute(
    sdp: &PsatzSdp,
    f: &MatPoly,
    l: &Pencil,
    lam: Functional,
    opts: &PsatzOptions,
    member: &dyn Fn(&SymTuple) -> Result<f64>,
    margin: f64,
) -> Result<PsatzVerdict> {
    let idx = &sdp.index;
    let s = lam.scale_of();
    if s == 0.0 {
        return Ok(PsatzVerdict::Unresolved("dual functional vanishes".into()));
    }
    let lam = Functional { table: lam.table.iter().map(|(w, m)| (w.clone(), m / s)).collect(), ..lam };
    let lam0 = interior_functional(l, idx, opts.seed)?;
    let base_value = lam.apply(f)?;
    let f0 = lam0.apply(f)?;
    let mut last = String::from("no repair level produced a verified point");
    for delta in [0.0, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1] {
        let cand = if delta == 0.0 { lam.clone() } else { lam.add_scaled(&lam0, delta) };
        let value = base_value + delta * f0;
        if value >= 0.0 {
            break;
        }
        if delta == 0.0 {
            let h = cand.hankel(idx.degree);
            let (vals, _) = sym_eig(&h);
            let top = vals.iter().copied().fold(0.0f64, f64::max);
            if vals[0] <= 1e-9 * top {
                continue;
            }
        }
        let model = match gns_extract(&cand, idx.degree) {
            Ok(m) => m,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        let mut model = model;
        let gn = model.gamma().norm();
        if gn == 0.0 {
            continue;
        }
        for v in &mut model.gamma {
            *v /= gn;
        }
        let value = model.value(f)?;
        let margin_l = member(&model.x)?;
        if margin_l >= -MEMBER_TOL && value <= -REFUTE_TOL {
            log::debug!("refuted with repair {delta:e}: value {value:.3e}, membership {margin_l:.3e}");
            return Ok(PsatzVerdict::Refuted(Refutation { model, value, membership_margin: margin_l }));
        }
        last = format!("repair {delta:e}: value {value:.2e}, membership {margin_l:.2e}");
    }
    Ok(PsatzVerdict::Unresolved(format!("margin {margin:.2e}; {last}")))
}

/// `lambda_min(F(X))` helper for soundness sampling.
pub fn min_eig_of(f: &MatPoly, x: &SymTuple) -> Result<f64> {
    Ok(min_eig(&f.evaluate(x)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval() -> Pencil {
        Pencil::monic(vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])]).unwrap()
    }

    fn y(c0: f64, c1: f64, c2: f64) -> MatPoly {
        MatPoly::scalar(1, &[(c0, Word::empty()), (c1, Word::letter(0)), (c2, Word::new(vec![0, 0]))])
    }

    #[test]
    fn one_minus_y_squared_is_certified() {
        let l = interval();
        let f = y(1.0, 0.0, -1.0);
        match certify(&l, &f, &PsatzOptions::default()).unwrap() {
            PsatzVerdict::Certified { certificate, report } => {
                assert!(report.valid && report.relative_residual <= 1e-6, "{report:?}");
                assert!(report.max_r_degree <= 2 && report.max_q_degree <= 1);
                assert!(verify_certificate(&f, &certificate, &l).unwrap().valid);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn y_is_refuted_at_minus_one() {
        let l = interval();
        match certify(&l, &y(0.0, 1.0, 0.0), &PsatzOptions::default()).unwrap() {
            PsatzVerdict::Refuted(r) => {
                assert!((r.value + 1.0).abs() < 1e-6, "{}", r.value);
                let x = r.model.x.scalars().expect("scalar model");
                assert!((x[0] + 1.0).abs() < 1e-6, "{x:?}");
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn pencil_itself_is_certified() {
        let l = interval();
        match certify(&l, &l.to_matpoly(), &PsatzOptions::default()).unwrap() {
            PsatzVerdict::Certified { report, .. } => assert!(report.valid),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn non_monic_is_rejected() {
        let bad = Pencil::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])],
        )
        .unwrap();
        assert!(matches!(certify(&bad, &y(0.0, 1.0, 0.0), &PsatzOptions::default()), Err(Error::NotMonic)));
        assert!(naive_module_sdp(&bad, &y(0.0, 1.0, 0.0), 1).is_ok());
    }

    #[test]
    fn square_is_pure_sos() {
        let l = interval();
        // (1 + 2y)^2 = 1 + 4y + 4y^2
        match certify(&l, &y(1.0, 4.0, 4.0), &PsatzOptions::default()).unwrap() {
            PsatzVerdict::Certified { report, .. } => assert!(report.valid),
            v => panic!("{v:?}"),
        }
    }
}
