//! Homogeneous self-dual primal-dual interior-point method.
//!
//! The embedding solved is
//!
//! ```text
//!   A(X) - b tau            = 0
//!   A*(y) + S - C tau       = 0
//!   kappa - b^T y + <C, X>  = 0
//!   X, S psd,  tau, kappa >= 0
//! ```
//!
//! with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
//! A limit with `tau > 0` is an optimal pair; a limit with `kappa > 0` is an
//! infeasibility certificate. The Newton system is reduced to the Schur
//! complement `M_ij = <A_i, W A_j W>` and factored by dense Cholesky.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::check::{check_ray, check_solution, min_eig};
use crate::error::Result;
use crate::presolve::{entries_on_block, remove_dependent, unit_rows};
use crate::problem::{SdpProblem, Sense, SparseSym, SymEntry};
use crate::solution::{FarkasRay, SdpSolution, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Seed for a small random perturbation of the starting point. `None`
    /// starts from the identity.
    pub jitter_seed: Option<u64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol_feas: 1e-8, tol_gap: 1e-8, max_iter: 200, jitter_seed: None }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol_feas: tol, tol_gap: tol, ..Self::default() }
    }
}

/// Upper bounds the solver is tested against. Larger problems are accepted
/// but cost `O(m^3)` time and `O(m^2)` memory in the Schur complement.
pub const DOCUMENTED_MAX_BLOCK: usize = 400;
pub const DOCUMENTED_MAX_CONSTRAINTS: usize = 5000;

const STEP_FRACTION: f64 = 0.99;
const DEPENDENCY_TOL: f64 = 1e-11;

struct Internal {
    blocks: Vec<usize>,
    rows: Vec<SparseSym>,
    /// rows restricted to each block: (row index, entries)
    by_block: Vec<Vec<(usize, Vec<SymEntry>)>>,
    b: DVector<f64>,
    c: Vec<DMatrix<f64>>,
    c_norm: f64,
    b_norm: f64,
}

impl Internal {
    fn m(&self) -> usize {
        self.rows.len()
    }

    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(self.m(), self.rows.iter().map(|r| r.inner(x)))
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out = zeros(&self.blocks);
        for (r, &yi) in self.rows.iter().zip(y.iter()) {
            if yi != 0.0 {
                r.add_to(yi, &mut out);
            }
        }
        out
    }

    /// `M_ij = <A_i, W A_j W>`.
    fn schur(&self, w: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.m();
        let mut mat = DMatrix::zeros(m, m);
        for (bk, list) in self.by_block.iter().enumerate() {
            let wb = &w[bk];
            let n = wb.nrows();
            for (jj, (j, ej)) in list.iter().enumerate() {
                let t = congruence(wb, ej, n);
                for (i, ei) in &list[jj..] {
                    let v: f64 = ei
                        .iter()
                        .map(|e| {
                            if e.row == e.col {
                                e.value * t[(e.row, e.row)]
                            } else {
                                e.value * (t[(e.row, e.col)] + t[(e.col, e.row)])
                            }
                        })
                        .sum();
                    mat[(*i, *j)] += v;
                }
            }
        }
        // only the lower triangle was accumulated
        for j in 0..m {
            for i in j + 1..m {
                mat[(j, i)] = mat[(i, j)];
            }
        }
        mat
    }
}

/// `W A W` for sparse symmetric `A` restricted to one block.
fn congruence(w: &DMatrix<f64>, entries: &[SymEntry], n: usize) -> DMatrix<f64> {
    if entries.len() > n {
        let mut a = DMatrix::zeros(n, n);
        for e in entries {
            a[(e.row, e.col)] += e.value;
            if e.row != e.col {
                a[(e.col, e.row)] += e.value;
            }
        }
        return w * a * w;
    }
    let mut t = DMatrix::zeros(n, n);
    for e in entries {
        let (p, q, v) = (e.row, e.col, e.value);
        for c in 0..n {
            let wqc = w[(q, c)];
            let wpc = w[(p, c)];
            for r in 0..n {
                if p == q {
                    t[(r, c)] += v * w[(r, p)] * wpc;
                } else {
                    t[(r, c)] += v * (w[(r, p)] * wqc + w[(r, q)] * wpc);
                }
            }
        }
    }
    t
}

fn zeros(blocks: &[usize]) -> Vec<DMatrix<f64>> {
    blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect()
}

fn dot(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn norm(a: &[DMatrix<f64>]) -> f64 {
    dot(a, a).sqrt()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = 0.5 * (&*m + m.transpose());
    *m = t;
}

/// Nesterov-Todd scaling of one block: `G^{-1} X G^{-T} = G^T S G = diag(lambda)`.
struct BlockScaling {
    g: DMatrix<f64>,
    g_inv: DMatrix<f64>,
    w: DMatrix<f64>,
    lambda: Vec<f64>,
}

fn sqrt_and_inv(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(m.clone());
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return None;
    }
    let q = &eig.eigenvectors;
    let sq = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let isq = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Some((q * sq * q.transpose(), q * isq * q.transpose()))
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<BlockScaling> {
    let (lx, lx_inv) = sqrt_and_inv(x)?;
    let (ls, _) = sqrt_and_inv(s)?;
    let prod = &ls * &lx;
    let svd = prod.svd(true, true);
    let u_none = svd.u.is_none();
    let v_t = svd.v_t?;
    if u_none {
        return None;
    }
    let sig = svd.singular_values;
    if sig.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let v = v_t.transpose();
    let n = x.nrows();
    let mut g = &lx * &v;
    let mut g_inv = &v_t * &lx_inv;
    for k in 0..n {
        let f = sig[k].sqrt();
        for r in 0..n {
            g[(r, k)] /= f;
            g_inv[(k, r)] *= f;
        }
    }
    let mut w = &g * g.transpose();
    symmetrize(&mut w);
    Some(BlockScaling { g, g_inv, w, lambda: sig.iter().copied().collect() })
}

#[derive(Clone)]
struct State {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    tau: f64,
    kappa: f64,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    rg: f64,
    mu: f64,
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    dtau: f64,
    dkappa: f64,
    dx_scaled: Vec<DMatrix<f64>>,
    ds_scaled: Vec<DMatrix<f64>>,
}

struct Factored {
    chol: Option<Cholesky<f64, Dyn>>,
    cw: DVector<f64>,
    q: DVector<f64>,
    wcw: Vec<DMatrix<f64>>,
    /// `b^T M^-1 b + <C - A*(M^-1 A(WCW)), W (..) W>`, both terms nonnegative
    den_part: f64,
}

impl Factored {
    fn solve(&self, v: &DVector<f64>) -> DVector<f64> {
        match &self.chol {
            Some(c) => c.solve(v),
            None => v.clone(),
        }
    }
}

fn residuals(p: &Internal, st: &State) -> Residuals {
    let rp = p.apply(&st.x) - &p.b * st.tau;
    let aty = p.adjoint(&st.y);
    let rd: Vec<_> = (0..p.blocks.len())
        .map(|k| &aty[k] + &st.s[k] - &p.c[k] * st.tau)
        .collect();
    let rg = st.kappa - p.b.dot(&st.y) + dot(&p.c, &st.x);
    let nu = p.blocks.iter().sum::<usize>() as f64;
    let mu = (dot(&st.x, &st.s) + st.tau * st.kappa) / (nu + 1.0);
    Residuals { rp, rd, rg, mu }
}

fn max_step_scaled(lambda: &[f64], d: &DMatrix<f64>) -> f64 {
    let n = lambda.len();
    let mut m = d.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= (lambda[i] * lambda[j]).sqrt();
        }
    }
    symmetrize(&mut m);
    let lmin = min_eig(&m);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn step_length(sc: &[BlockScaling], st: &State, d: &Direction) -> f64 {
    let mut a = f64::INFINITY;
    for (k, bs) in sc.iter().enumerate() {
        a = a.min(max_step_scaled(&bs.lambda, &d.dx_scaled[k]));
        a = a.min(max_step_scaled(&bs.lambda, &d.ds_scaled[k]));
    }
    if d.dtau < 0.0 {
        a = a.min(-st.tau / d.dtau);
    }
    if d.dkappa < 0.0 {
        a = a.min(-st.kappa / d.dkappa);
    }
    a
}

#[allow(clippy::too_many_arguments)]
fn direction(
    p: &Internal,
    st: &State,
    res: &Residuals,
    sc: &[BlockScaling],
    f: &Factored,
    eta: f64,
    rc: &[DMatrix<f64>],
    rtau: f64,
) -> Direction {
    let nb = p.blocks.len();
    // T = G D G^T + eta W r_d W, with D solving lambda o D = rc
    let mut t = Vec::with_capacity(nb);
    for k in 0..nb {
        let bs = &sc[k];
        let n = bs.lambda.len();
        let mut dm = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                dm[(i, j)] = 2.0 * rc[k][(i, j)] / (bs.lambda[i] + bs.lambda[j]);
            }
        }
        let mut tk = &bs.g * dm * bs.g.transpose() + (&bs.w * &res.rd[k] * &bs.w) * eta;
        symmetrize(&mut tk);
        t.push(tk);
    }
    let rhs = -(&res.rp * eta) - p.apply(&t);
    let pv = f.solve(&rhs);
    let bmc = &p.b - &f.cw;
    let num = -eta * res.rg + bmc.dot(&pv) - dot(&p.c, &t) - rtau / st.tau;
    let den = -st.kappa / st.tau - f.den_part;
    let dtau = num / den;
    let dy = &pv + &f.q * dtau;
    let aty = p.adjoint(&dy);
    let mut dx = Vec::with_capacity(nb);
    let mut ds = Vec::with_capacity(nb);
    let mut dxs = Vec::with_capacity(nb);
    let mut dss = Vec::with_capacity(nb);
    for k in 0..nb {
        let bs = &sc[k];
        let mut dsk = -(&res.rd[k] * eta) - &aty[k] + &p.c[k] * dtau;
        symmetrize(&mut dsk);
        let mut dxk = &t[k] + &bs.w * &aty[k] * &bs.w - &f.wcw[k] * dtau;
        symmetrize(&mut dxk);
        let mut a = &bs.g_inv * &dxk * bs.g_inv.transpose();
        symmetrize(&mut a);
        let mut b = bs.g.transpose() * &dsk * &bs.g;
        symmetrize(&mut b);
        dx.push(dxk);
        ds.push(dsk);
        dxs.push(a);
        dss.push(b);
    }
    let dkappa = (rtau - st.kappa * dtau) / st.tau;
    Direction { dx, ds, dy, dtau, dkappa, dx_scaled: dxs, ds_scaled: dss }
}

/// Maps internal (scaled, reduced, minimization-form) iterates back to the
/// caller's problem.
struct Mapping {
    keep: Vec<usize>,
    row_scale: Vec<f64>,
    m_full: usize,
    /// +1 for minimize/feasibility, -1 for maximize
    sense_sign: f64,
}

impl Mapping {
    fn y_full(&self, y: &DVector<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.m_full];
        for (k, &i) in self.keep.iter().enumerate() {
            out[i] = y[k] * self.row_scale[i];
        }
        out
    }
}

fn finish(
    p: &SdpProblem,
    status: Status,
    x: Vec<DMatrix<f64>>,
    y: Vec<f64>,
    s: Vec<DMatrix<f64>>,
    iterations: usize,
    ray: Option<FarkasRay>,
    unbounded: Option<Vec<DMatrix<f64>>>,
) -> Result<SdpSolution> {
    let mut sol = SdpSolution {
        status,
        x,
        y,
        s,
        primal_objective: 0.0,
        dual_objective: 0.0,
        gap: 0.0,
        primal_residual: 0.0,
        dual_residual: 0.0,
        iterations,
        infeasibility_ray: ray,
        unbounded_ray: unbounded,
    };
    let rep = check_solution(p, &sol)?;
    sol.primal_objective = rep.primal_objective;
    sol.dual_objective = rep.dual_objective;
    sol.gap = rep.gap;
    sol.primal_residual = rep.max_constraint_rel;
    sol.dual_residual = rep.dual_residual;
    Ok(sol)
}

/// Solves the block SDP. See the module documentation for the method.
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    p.validate()?;
    let m_full = p.num_constraints();
    let mut rows: Vec<SparseSym> = p.constraints.iter().map(|c| c.matrix.clone()).collect();
    let mut b: Vec<f64> = p.rhs();
    let row_scale = unit_rows(&mut rows, &mut b);

    let pre = remove_dependent(&rows, &b, DEPENDENCY_TOL);
    if let Some(y_scaled) = pre.inconsistent {
        let y: Vec<f64> = y_scaled.iter().zip(&row_scale).map(|(v, s)| v * s).collect();
        let ray = FarkasRay { y: y.clone(), s: p.zero_blocks() };
        let rep = check_ray(p, &ray)?;
        log::debug!("presolve found inconsistent dependent rows, ray residual {:.2e}", rep.residual);
        if rep.certifies(opts.tol_feas) {
            return finish(
                p,
                Status::PrimalInfeasible,
                p.zero_blocks(),
                vec![0.0; m_full],
                p.zero_blocks(),
                0,
                Some(ray),
                None,
            );
        }
    }
    let map = Mapping {
        keep: pre.keep.clone(),
        row_scale: row_scale.clone(),
        m_full,
        sense_sign: if p.sense == Sense::Maximize { -1.0 } else { 1.0 },
    };
    let kept_rows: Vec<SparseSym> = pre.keep.iter().map(|&i| rows[i].clone()).collect();
    let kept_b: Vec<f64> = pre.keep.iter().map(|&i| b[i]).collect();
    let mut c = match p.sense {
        Sense::Feasibility => p.zero_blocks(),
        _ => p.objective_dense(),
    };
    if p.sense == Sense::Maximize {
        for ck in &mut c {
            *ck *= -1.0;
        }
    }
    let by_block = (0..p.blocks.len())
        .map(|bk| {
            kept_rows
                .iter()
                .enumerate()
                .filter_map(|(i, r)| {
                    let e = entries_on_block(r, bk);
                    (!e.is_empty()).then_some((i, e))
                })
                .collect()
        })
        .collect();
    let ip = Internal {
        blocks: p.blocks.clone(),
        b_norm: kept_b.iter().map(|v| v * v).sum::<f64>().sqrt(),
        b: DVector::from_vec(kept_b),
        c_norm: norm(&c),
        c,
        rows: kept_rows,
        by_block,
    };
    run(p, &ip, &map, opts)
}

fn initial_point(ip: &Internal, opts: &SolverOptions) -> State {
    let mut x: Vec<DMatrix<f64>> = ip.blocks.iter().map(|&n| DMatrix::identity(n, n)).collect();
    if let Some(seed) = opts.jitter_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for xb in &mut x {
            let n = xb.nrows();
            for i in 0..n {
                for j in i..n {
                    let v = 1e-3 * (rng.gen::<f64>() - 0.5) / n as f64;
                    xb[(i, j)] += v;
                    if i != j {
                        xb[(j, i)] += v;
                    }
                }
            }
        }
    }
    State {
        x,
        s: ip.blocks.iter().map(|&n| DMatrix::identity(n, n)).collect(),
        y: DVector::zeros(ip.m()),
        tau: 1.0,
        kappa: 1.0,
    }
}

fn run(p: &SdpProblem, ip: &Internal, map: &Mapping, opts: &SolverOptions) -> Result<SdpSolution> {
    let nb = ip.blocks.len();
    let mut st = initial_point(ip, opts);
    let mut stalls = 0;
    let mut last_iter = 0;
    let mut best: Option<(f64, State)> = None;
    for iter in 0..=opts.max_iter {
        last_iter = iter;
        let res = residuals(ip, &st);
        let tau = st.tau;
        let pres = res.rp.norm() / (tau * ip.b_norm.max(1.0));
        let dres = norm(&res.rd) / (tau * ip.c_norm.max(1.0));
        let pobj = dot(&ip.c, &st.x) / tau;
        let dobj = ip.b.dot(&st.y) / tau;
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let compl = dot(&st.x, &st.s) / (tau * tau) / (1.0 + pobj.abs() + dobj.abs());
        log::trace!(
            "iter {iter:3} pres {pres:.2e} dres {dres:.2e} gap {gap:.2e} mu {:.2e} tau {tau:.2e} kappa {:.2e}",
            res.mu,
            st.kappa
        );
        let merit = pres.max(dres).max(gap).max(compl);
        if merit.is_finite() && best.as_ref().is_none_or(|(m, _)| merit < *m) {
            best = Some((merit, st.clone()));
        }

        if pres <= opts.tol_feas && dres <= opts.tol_feas && gap <= opts.tol_gap && compl <= opts.tol_gap {
            let sol = candidate(p, &st, map, nb)?;
            let rep = check_solution(p, &sol)?;
            if rep.satisfies_optimality(opts.tol_feas, opts.tol_gap) {
                let (x, y, s) = (sol.x, sol.y, sol.s);
                return finish(p, Status::Optimal, x, y, s, iter, None, None);
            }
        }
        let bty = ip.b.dot(&st.y);
        if bty > 0.0 {
            let aty = ip.adjoint(&st.y);
            let r: Vec<_> = (0..nb).map(|k| &aty[k] + &st.s[k]).collect();
            if norm(&r) / bty <= opts.tol_feas {
                let y: Vec<f64> = map.y_full(&st.y).iter().map(|v| v / bty).collect();
                let s: Vec<_> = st.s.iter().map(|m| m / bty).collect();
                let ray = FarkasRay { y, s };
                let rep = check_ray(p, &ray)?;
                if rep.certifies(opts.tol_feas) {
                    let sol = candidate(p, &st, map, nb)?;
                    return finish(p, Status::PrimalInfeasible, sol.x, sol.y, sol.s, iter, Some(ray), None);
                }
            }
        }
        let cx = dot(&ip.c, &st.x);
        if cx < 0.0 {
            let ax = ip.apply(&st.x);
            if ax.norm() / -cx <= opts.tol_feas {
                let xr: Vec<_> = st.x.iter().map(|m| m / -cx).collect();
                let sol = candidate(p, &st, map, nb)?;
                return finish(p, Status::DualInfeasible, sol.x, sol.y, sol.s, iter, None, Some(xr));
            }
        }
        if iter == opts.max_iter {
            break;
        }

        let Some(sc) = (0..nb).map(|k| nt_scaling(&st.x[k], &st.s[k])).collect::<Option<Vec<BlockScaling>>>() else {
            log::debug!("scaling failed at iteration {iter}");
            break;
        };
        let wcw: Vec<_> = (0..nb).map(|k| &sc[k].w * &ip.c[k] * &sc[k].w).collect();
        let mmat = ip.schur(&sc.iter().map(|s| s.w.clone()).collect::<Vec<_>>());
        let Some(chol) = factor(mmat) else {
            log::debug!("Schur complement not positive definite at iteration {iter}");
            break;
        };
        let mut f = Factored {
            chol: Some(chol),
            cw: ip.apply(&wcw),
            q: DVector::zeros(0),
            wcw,
            den_part: 0.0,
        };
        if ip.m() == 0 {
            f.chol = None;
        }
        let mb = f.solve(&ip.b);
        let mcw = f.solve(&f.cw);
        let u = ip.adjoint(&mcw);
        let proj_res: f64 = (0..nb)
            .map(|k| {
                let r = &ip.c[k] - &u[k];
                (sc[k].g.transpose() * r * &sc[k].g).norm_squared()
            })
            .sum();
        f.den_part = ip.b.dot(&mb).max(0.0) + proj_res;
        f.q = mcw + mb;

        // predictor
        let rc_aff: Vec<DMatrix<f64>> = sc
            .iter()
            .map(|bs| DMatrix::from_diagonal(&DVector::from_iterator(bs.lambda.len(), bs.lambda.iter().map(|l| -l * l))))
            .collect();
        let daff = direction(ip, &st, &res, &sc, &f, 1.0, &rc_aff, -st.tau * st.kappa);
        let a_aff = step_length(&sc, &st, &daff).min(1.0);
        let sigma = (1.0 - a_aff).max(0.0).powi(3);

        // corrector
        let rc: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| {
                let mut cross = &daff.dx_scaled[k] * &daff.ds_scaled[k];
                symmetrize(&mut cross);
                let n = sc[k].lambda.len();
                &rc_aff[k] + DMatrix::identity(n, n) * (sigma * res.mu) - cross
            })
            .collect();
        let rtau = -st.tau * st.kappa + sigma * res.mu - daff.dtau * daff.dkappa;
        let d = direction(ip, &st, &res, &sc, &f, 1.0 - sigma, &rc, rtau);
        let alpha = (STEP_FRACTION * step_length(&sc, &st, &d)).min(1.0);
        if !alpha.is_finite() || alpha < 1e-10 {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
            continue;
        }
        stalls = 0;
        for k in 0..nb {
            st.x[k] += &d.dx[k] * alpha;
            st.s[k] += &d.ds[k] * alpha;
            symmetrize(&mut st.x[k]);
            symmetrize(&mut st.s[k]);
        }
        st.y += &d.dy * alpha;
        st.tau += alpha * d.dtau;
        st.kappa += alpha * d.dkappa;
        if !(st.tau > 0.0 && st.kappa > 0.0) {
            log::debug!("tau/kappa left the cone at iteration {iter}");
            break;
        }
        // keep the homogeneous scale bounded
        let scale = st.tau.max(st.kappa);
        if scale > 1e8 || scale < 1e-8 {
            let f = 1.0 / scale;
            for k in 0..nb {
                st.x[k] *= f;
                st.s[k] *= f;
            }
            st.y *= f;
            st.tau *= f;
            st.kappa *= f;
        }
    }
    // best iterate seen, reported as stalled
    let st = best.map(|(_, b)| b).unwrap_or(st);
    let sol = candidate(p, &st, map, nb)?;
    finish(p, Status::Stalled, sol.x, sol.y, sol.s, last_iter, None, None)
}

fn factor(mut mmat: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let m = mmat.nrows();
    if m == 0 {
        return Cholesky::new(DMatrix::identity(1, 1));
    }
    let maxd = (0..m).map(|i| mmat[(i, i)]).fold(0.0, f64::max).max(1e-300);
    if let Some(c) = Cholesky::new(mmat.clone()) {
        return Some(c);
    }
    for reg in [1e-14, 1e-12, 1e-10] {
        for i in 0..m {
            mmat[(i, i)] += reg * maxd;
        }
        if let Some(c) = Cholesky::new(mmat.clone()) {
            return Some(c);
        }
    }
    None
}

fn candidate(p: &SdpProblem, st: &State, map: &Mapping, nb: usize) -> Result<SdpSolution> {
    let tau = st.tau;
    let x: Vec<_> = (0..nb).map(|k| &st.x[k] / tau).collect();
    let s: Vec<_> = (0..nb).map(|k| &st.s[k] / tau).collect();
    let y: Vec<f64> = map.y_full(&st.y).iter().map(|v| v / tau * map.sense_sign).collect();
    debug_assert_eq!(y.len(), p.num_constraints());
    Ok(SdpSolution {
        status: Status::Stalled,
        x,
        y,
        s,
        primal_objective: 0.0,
        dual_objective: 0.0,
        gap: 0.0,
        primal_residual: 0.0,
        dual_residual: 0.0,
        iterations: 0,
        infeasibility_ray: None,
        unbounded_ray: None,
    })
}
