//! Inclusion `D_{L1} ⊆ D_{L2}` of free spectrahedra of monic pencils.
//!
//! Inclusion holds iff there is a unital completely positive map `tau`
//! with `tau(A_j) = B_j`. Its Choi matrix `C = sum_pq E_pq (x) tau(E_pq)`
//! is the SDP variable; a feasible `C` factors into Kraus operators `V_k`
//! with `L2 = S + sum_k V_k^T L1 V_k`. An infeasible SDP yields a Farkas ray
//! `(Z0, Z)` with `hL1(Z0, Z) >= 0` and `hL2(Z0, Z)` not psd, from which
//! a counterexample tuple is built.

mod kraus;
mod polar;
pub mod search;

use freespec_sdp::{solve, FarkasRay, SdpProblem, Sense, SolverOptions, SparseSym, Status};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmi::{Lmi, LmiOutcome};
use crate::pencil::{Boundedness, Pencil, SymTuple};

pub use kraus::{extract_kraus, ChoiMatrix, KrausCertificate, KrausReport, KRAUS_TRUNCATION};
pub use polar::{drop_polar_membership, polar_membership, target_pencil};
pub use search::{find_counterexample, CounterexampleSearch, SearchContext, SearchRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Isometry,
    Contraction,
}

/// How `check_inclusion` picks the SDP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeChoice {
    /// Isometry first when `D_{L1}(1)` is bounded, otherwise contraction.
    #[default]
    Auto,
    /// Isometry first regardless of boundedness, contraction as fallback.
    Isometry,
    Contraction,
}

#[derive(Debug, Clone)]
pub struct InclusionOptions {
    pub solver: SolverOptions,
    pub mode: ModeChoice,
    pub seed: u64,
    /// Strategy names tried in order by the counterexample search.
    pub search: Vec<String>,
    /// Tolerance for accepting an extracted certificate.
    pub cert_tol: f64,
}

impl Default for InclusionOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            mode: ModeChoice::Auto,
            seed: 0,
            search: SearchRegistry::default_order(),
            cert_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    #[serde(rename = "X")]
    pub x: SymTuple,
    /// Unit vector with `<L2(X) v, v> = min eig L2(X)`.
    pub eigenvector: Vec<f64>,
    pub lhs_min_eig: f64,
    pub rhs_min_eig: f64,
    pub strategy: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InclusionVerdict {
    Included(KrausCertificate),
    NotIncluded(Counterexample),
}

impl InclusionVerdict {
    pub fn is_included(&self) -> bool {
        matches!(self, InclusionVerdict::Included(_))
    }
}

/// The inclusion SDP together with the layout of its constraints.
#[derive(Debug, Clone)]
pub struct InclusionSdp {
    pub problem: SdpProblem,
    pub mode: Mode,
    pub d1: usize,
    pub d2: usize,
    pub g: usize,
}

fn pair_count(n: usize) -> usize {
    n * (n + 1) / 2
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |r| (r..n).map(move |s| (r, s)))
}

fn sym_unit(n: usize, r: usize, s: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(n, n);
    if r == s {
        e[(r, r)] = 1.0;
    } else {
        e[(r, s)] = 0.5;
        e[(s, r)] = 0.5;
    }
    e
}

fn check_pair(l1: &Pencil, l2: &Pencil) -> Result<()> {
    l1.require_monic()?;
    l2.require_monic()?;
    if l1.g() != l2.g() {
        return Err(Error::VariableCountMismatch(l1.g(), l2.g()));
    }
    Ok(())
}

/// Feasibility SDP over the Choi matrix (block 0, size `d1 d2`) and, in
/// contraction mode, a slack block of size `d2`.
///
/// Constraint order: for each `j` and `r <= s` the entry `(r, s)` of
/// `sum_pq (A_j)_pq C_pq = B_j`, then the entries of the unit condition.
pub fn build_inclusion_sdp(l1: &Pencil, l2: &Pencil, mode: Mode) -> Result<InclusionSdp> {
    check_pair(l1, l2)?;
    let (d1, d2, g) = (l1.d(), l2.d(), l1.g());
    let mut blocks = vec![d1 * d2];
    if mode == Mode::Contraction {
        blocks.push(d2);
    }
    let mut p = SdpProblem::new(blocks, Sense::Feasibility);
    let id1 = DMatrix::identity(d1, d1);
    for j in 0..=g {
        let (a, b) = if j < g { (l1.coeff(j), l2.coeff(j)) } else { (&id1, &DMatrix::identity(d2, d2)) };
        for (r, s) in pairs(d2) {
            let mut m = SparseSym::new();
            m.add_dense(0, &a.kronecker(&sym_unit(d2, r, s)));
            if j == g && mode == Mode::Contraction {
                m.add_dense(1, &sym_unit(d2, r, s));
            }
            p.add_constraint(m, b[(r, s)]);
        }
    }
    Ok(InclusionSdp { problem: p, mode, d1, d2, g })
}

/// A homogeneous point `(Z0, Z)` read off a Farkas ray.
#[derive(Debug, Clone)]
pub struct HomogeneousPoint {
    pub z0: DMatrix<f64>,
    pub z: Vec<DMatrix<f64>>,
}

impl InclusionSdp {
    /// `Z = -Y`, where `Y_j` collects the multipliers of the `j`-th block of
    /// constraints as a symmetric matrix.
    pub fn ray_point(&self, ray: &FarkasRay) -> HomogeneousPoint {
        let d2 = self.d2;
        let per = pair_count(d2);
        let mut mats = Vec::with_capacity(self.g + 1);
        for j in 0..=self.g {
            let mut y = DMatrix::zeros(d2, d2);
            for (k, (r, s)) in pairs(d2).enumerate() {
                y += sym_unit(d2, r, s) * ray.y[j * per + k];
            }
            mats.push(-y);
        }
        let z0 = mats.pop().expect("unit block");
        HomogeneousPoint { z0, z: mats }
    }
}

pub enum ModeOutcome {
    Feasible(KrausCertificate),
    Infeasible(HomogeneousPoint),
}

/// Solves the inclusion SDP in one mode and extracts a certificate or the
/// homogeneous point of the Farkas ray.
pub fn solve_mode(l1: &Pencil, l2: &Pencil, mode: Mode, opts: &InclusionOptions) -> Result<ModeOutcome> {
    let sdp = build_inclusion_sdp(l1, l2, mode)?;
    let sol = solve(&sdp.problem, &opts.solver)?;
    match sol.status {
        Status::Optimal => {
            let choi = ChoiMatrix::new(l1.d(), l2.d(), sol.x[0].clone())?;
            let cert = KrausCertificate::from_choi(&choi, mode, opts.cert_tol)?;
            let rep = cert.verify(l1, l2, opts.cert_tol)?;
            if !rep.valid {
                return Err(Error::SolverStalled(format!(
                    "extracted {mode:?} certificate fails verification: {rep:?}"
                )));
            }
            Ok(ModeOutcome::Feasible(cert))
        }
        Status::PrimalInfeasible => {
            let ray = sol.infeasibility_ray.as_ref().expect("ray present when infeasible");
            Ok(ModeOutcome::Infeasible(sdp.ray_point(ray)))
        }
        s => Err(Error::SolverStalled(format!(
            "inclusion SDP ({mode:?}) ended {s:?} after {} iterations, residuals {:.2e}/{:.2e}",
            sol.iterations, sol.primal_residual, sol.dual_residual
        ))),
    }
}

/// Decides `D_{L1} ⊆ D_{L2}` with a Kraus certificate or a verified
/// counterexample.
pub fn check_inclusion(l1: &Pencil, l2: &Pencil, opts: &InclusionOptions) -> Result<InclusionVerdict> {
    check_pair(l1, l2)?;
    if l2.d() == 0 {
        return Ok(InclusionVerdict::Included(KrausCertificate::empty(l1.d(), Mode::Isometry)));
    }
    if l1.d() == 0 {
        return Ok(trivial_lhs(l2));
    }
    let isometry_first = match opts.mode {
        ModeChoice::Contraction => false,
        ModeChoice::Isometry => true,
        ModeChoice::Auto => l1.is_bounded(&opts.solver)? == Boundedness::Bounded,
    };
    if isometry_first {
        if let ModeOutcome::Feasible(cert) = solve_mode(l1, l2, Mode::Isometry, opts)? {
            return Ok(InclusionVerdict::Included(cert));
        }
        log::debug!("no isometric certificate, trying contraction mode");
    }
    match solve_mode(l1, l2, Mode::Contraction, opts)? {
        ModeOutcome::Feasible(cert) => Ok(InclusionVerdict::Included(cert)),
        ModeOutcome::Infeasible(point) => {
            let registry = SearchRegistry::with_defaults();
            let ctx = SearchContext { l1, l2, point: Some(&point), seed: opts.seed };
            find_counterexample(&ctx, &registry, &opts.search).map(InclusionVerdict::NotIncluded)
        }
    }
}

/// `L1` of size zero: `D_{L1}` is everything.
fn trivial_lhs(l2: &Pencil) -> InclusionVerdict {
    let d2 = l2.d();
    for (j, b) in l2.coeffs().iter().enumerate() {
        let (vals, vecs) = crate::linalg::sym_eig(b);
        let k = if vals[0].abs() >= vals[d2 - 1].abs() { 0 } else { d2 - 1 };
        if vals[k].abs() > 1e-12 {
            let mut x = vec![0.0; l2.g()];
            x[j] = -2.0 / vals[k];
            let pt = SymTuple::scalar(&x);
            let lhs = f64::INFINITY;
            let rhs = l2.min_eig_at(&pt).expect("shapes agree");
            return InclusionVerdict::NotIncluded(Counterexample {
                x: pt,
                eigenvector: vecs.column(k).iter().copied().collect(),
                lhs_min_eig: lhs,
                rhs_min_eig: rhs,
                strategy: "direct".into(),
            });
        }
    }
    let mut cert = KrausCertificate::empty(0, Mode::Contraction);
    cert.s = DMatrix::identity(d2, d2);
    InclusionVerdict::Included(cert)
}

/// Whether `span{A_1..A_g}` contains a positive definite matrix. When it
/// does not, a certificate with isometric `V` exists whenever inclusion
/// holds; reported as a diagnostic only.
pub fn span_contains_pd(l: &Pencil, opts: &SolverOptions) -> Result<bool> {
    let (d, g) = (l.d(), l.g());
    if d == 0 || g == 0 {
        return Ok(false);
    }
    // max t  s.t.  sum mu_j A_j - t I >= 0,  |mu_j| <= 1
    let mut blocks = vec![d];
    blocks.extend(std::iter::repeat(1).take(2 * g));
    let one = DMatrix::identity(1, 1);
    let mut lmi = Lmi::new(blocks, g + 1);
    for k in 0..2 * g {
        lmi.constant[1 + k] = one.clone();
    }
    for j in 0..g {
        lmi.coeffs[j][0] = l.coeff(j).clone();
        lmi.coeffs[j][1 + 2 * j] = -&one;
        lmi.coeffs[j][2 + 2 * j] = one.clone();
    }
    lmi.coeffs[g][0] = -DMatrix::identity(d, d);
    let mut b = vec![0.0; g + 1];
    b[g] = 1.0;
    match lmi.maximize(&b, opts)? {
        LmiOutcome::Optimal { value, .. } => Ok(value > 1e-8),
        other => Err(Error::SolverStalled(format!("span test returned {other:?}"))),
    }
}

/// `(X, v)` passes when `L1(X) >= -1e-7` and `<L2(X) v, v> <= -1e-6`.
pub fn verify_counterexample(l1: &Pencil, l2: &Pencil, x: &SymTuple) -> Result<Option<(f64, f64, DVector<f64>)>> {
    let lhs = l1.min_eig_at(x)?;
    let (rhs, v) = crate::linalg::min_eigpair(&l2.evaluate(x)?);
    Ok((lhs >= -1e-7 && rhs <= -1e-6).then_some((lhs, rhs, v)))
}
