//! Univariate positivity: `D_L(1)` is an interval, `F` splits into
//! weighted squares over it, and each weight is written through `L` by an
//! inclusion certificate.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inclusion::{check_inclusion, InclusionOptions, InclusionVerdict};
use crate::linalg::min_eigpair;
use crate::ncpoly::{MatPoly, Word};
use crate::pencil::{Pencil, SymTuple};
use crate::psatz::{
    certify, default_degree, verify_certificate, Functional, GnsModel, PsatzCertificate, PsatzOptions, PsatzVerdict,
    Refutation, REFUTE_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntervalCase {
    Compact { a: f64, b: f64 },
    /// `[a, inf)`
    HalfLineRight { a: f64 },
    /// `(-inf, b]`
    HalfLineLeft { b: f64 },
    FullLine,
}

impl IntervalCase {
    pub fn contains(&self, y: f64, tol: f64) -> bool {
        match *self {
            IntervalCase::Compact { a, b } => y >= a - tol && y <= b + tol,
            IntervalCase::HalfLineRight { a } => y >= a - tol,
            IntervalCase::HalfLineLeft { b } => y <= b + tol,
            IntervalCase::FullLine => true,
        }
    }

    /// `y = offset + scale * s` taking the normalized domain ([-1, 1],
    /// [-1, inf) or R) onto the interval.
    pub fn affine_map(&self) -> AffineMap {
        match *self {
            IntervalCase::Compact { a, b } => AffineMap { offset: 0.5 * (a + b), scale: 0.5 * (b - a) },
            IntervalCase::HalfLineRight { a } => AffineMap { offset: a + 1.0, scale: 1.0 },
            IntervalCase::HalfLineLeft { b } => AffineMap { offset: b - 1.0, scale: -1.0 },
            IntervalCase::FullLine => AffineMap { offset: 0.0, scale: 1.0 },
        }
    }

    /// Weights `1 + s` and `1 - s` that cut out the normalized domain.
    pub fn weight_signs(&self) -> &'static [f64] {
        match self {
            IntervalCase::Compact { .. } => &[1.0, -1.0],
            IntervalCase::HalfLineRight { .. } | IntervalCase::HalfLineLeft { .. } => &[1.0],
            IntervalCase::FullLine => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineMap {
    pub offset: f64,
    pub scale: f64,
}

impl AffineMap {
    pub fn to_y(&self, s: f64) -> f64 {
        self.offset + self.scale * s
    }

    pub fn to_s(&self, y: f64) -> f64 {
        (y - self.offset) / self.scale
    }

    /// `p(s) -> p((y - offset) / scale)`.
    pub fn pull_back(&self, p: &MatPoly) -> MatPoly {
        p.affine_substitute(&[1.0 / self.scale], &[-self.offset / self.scale])
    }

    /// `p(y) -> p(offset + scale * s)`.
    pub fn push_forward(&self, p: &MatPoly) -> MatPoly {
        p.affine_substitute(&[self.scale], &[self.offset])
    }
}

fn require_univariate(l: &Pencil) -> Result<()> {
    if l.g() != 1 {
        return Err(Error::NotUnivariate(l.g()));
    }
    l.require_monic()
}

/// `D_L(1)` from the extreme eigenvalues of `A_1`.
pub fn interval_of(l: &Pencil) -> Result<IntervalCase> {
    require_univariate(l)?;
    let eig = nalgebra::SymmetricEigen::new(l.coeff(0).clone()).eigenvalues;
    let scale = 1.0 + eig.amax();
    let zero = 1e-14 * scale;
    let (lo, hi) = (eig.min(), eig.max());
    let left = (hi > zero).then(|| -1.0 / hi);
    let right = (lo < -zero).then(|| -1.0 / lo);
    Ok(match (left, right) {
        (Some(a), Some(b)) => IntervalCase::Compact { a, b },
        (Some(a), None) => IntervalCase::HalfLineRight { a },
        (None, Some(b)) => IntervalCase::HalfLineLeft { b },
        (None, None) => IntervalCase::FullLine,
    })
}

/// `F = sum R^* R + sum_i sum Q^* w_i Q` in the normalized variable `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSosDecomposition {
    pub case: IntervalCase,
    pub map: AffineMap,
    /// `1 x kappa` factors in `s`.
    pub sos: Vec<MatPoly>,
    /// `(sign, factor)` for the weight `1 + sign * s`.
    pub weighted: Vec<(f64, MatPoly)>,
    pub degree: usize,
}

impl WeightedSosDecomposition {
    /// Re-expansion in `s`.
    pub fn expand(&self, kappa: usize) -> Result<MatPoly> {
        let mut acc = MatPoly::zero(kappa, kappa, 1);
        for r in &self.sos {
            acc = acc.add(&r.hermitian_square())?;
        }
        for (sign, q) in &self.weighted {
            let w = MatPoly::scalar(1, &[(1.0, Word::empty()), (*sign, Word::letter(0))]);
            acc = acc.add(&q.adjoint().mul(&w)?.mul(q)?)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightedOutcome {
    Decomposed(WeightedSosDecomposition),
    /// `lambda_min(F(y)) < 0` at this point of the interval.
    Violated { y: f64, min_eig: f64, eigenvector: Vec<f64> },
    Unresolved(String),
}

fn weight_pencil(case: &IntervalCase) -> Pencil {
    let signs = case.weight_signs();
    if signs.is_empty() {
        Pencil::diagonal(&[vec![0.0]]).expect("scalar pencil")
    } else {
        Pencil::diagonal(&signs.iter().map(|&s| vec![s]).collect::<Vec<_>>()).expect("diagonal pencil")
    }
}

fn check_target(f: &MatPoly) -> Result<()> {
    if f.g() != 1 {
        return Err(Error::NotUnivariate(f.g()));
    }
    if f.rows() != f.cols() {
        return Err(Error::DimensionMismatch("F must be square".into()));
    }
    if !f.is_symmetric(1e-9 * (1.0 + f.max_coef())) {
        return Err(Error::Invalid("F is not symmetric".into()));
    }
    Ok(())
}

/// Minimizes `lambda_min(F(y))` over the interval on a grid refined by
/// golden-section search.
pub fn interval_minimum(f: &MatPoly, case: &IntervalCase) -> Result<(f64, f64, DVector<f64>)> {
    let radius = 1e3;
    let (lo, hi) = match *case {
        IntervalCase::Compact { a, b } => (a, b),
        IntervalCase::HalfLineRight { a } => (a, a + radius),
        IntervalCase::HalfLineLeft { b } => (b - radius, b),
        IntervalCase::FullLine => (-radius, radius),
    };
    let eval = |y: f64| -> Result<(f64, DVector<f64>)> { Ok(min_eigpair(&f.evaluate(&SymTuple::scalar(&[y]))?)) };
    let n = 4000;
    let mut best = (f64::INFINITY, lo);
    let cube = |k: usize| (k as f64 / n as f64).powi(3) * radius;
    let mut grid: Vec<f64> = match *case {
        IntervalCase::Compact { .. } => (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect(),
        IntervalCase::HalfLineRight { a } => (0..=n).map(|k| a + cube(k)).collect(),
        IntervalCase::HalfLineLeft { b } => (0..=n).map(|k| b - cube(k)).collect(),
        IntervalCase::FullLine => (0..=n).flat_map(|k| [cube(k), -cube(k)]).collect(),
    };
    grid.sort_by(f64::total_cmp);
    let mut idx = 0;
    for (k, &y) in grid.iter().enumerate() {
        let v = eval(y)?.0;
        if v < best.0 {
            best = (v, y);
            idx = k;
        }
    }
    let (mut a, mut b) = (grid[idx.saturating_sub(1)], grid[(idx + 1).min(grid.len() - 1)]);
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if eval(c)?.0 < eval(d)?.0 {
            b = d;
        } else {
            a = c;
        }
    }
    let mid = 0.5 * (a + b);
    let (vm, _) = eval(mid)?;
    let y = if vm < best.0 { mid } else { best.1 };
    let (v, vec) = eval(y)?;
    Ok((y, v, vec))
}

/// Weighted sum-of-squares decomposition of `F >= 0` over the interval.
pub fn weighted_sos_decompose(f: &MatPoly, case: &IntervalCase, opts: &PsatzOptions) -> Result<WeightedOutcome> {
    check_target(f)?;
    let map = case.affine_map();
    let fs = map.push_forward(f);
    let degree = opts.degree.unwrap_or_else(|| default_degree(f));
    let w = weight_pencil(case);
    let popts = PsatzOptions { degree: Some(degree), ..opts.clone() };
    match certify(&w, &fs, &popts)? {
        PsatzVerdict::Certified { certificate, .. } => {
            let signs = case.weight_signs();
            let mut sos = certificate.r.clone();
            let mut weighted = Vec::new();
            for q in &certificate.q {
                for row in 0..q.rows() {
                    let qi = row_of(q, row);
                    if qi.is_zero() {
                        continue;
                    }
                    match signs.get(row) {
                        Some(&s) => weighted.push((s, qi)),
                        None => sos.push(qi),
                    }
                }
            }
            Ok(WeightedOutcome::Decomposed(WeightedSosDecomposition { case: *case, map, sos, weighted, degree }))
        }
        PsatzVerdict::Refuted(_) | PsatzVerdict::Unresolved(_) => {
            let (y, min_eig, v) = interval_minimum(f, case)?;
            if min_eig < -REFUTE_TOL {
                Ok(WeightedOutcome::Violated { y, min_eig, eigenvector: v.iter().copied().collect() })
            } else {
                Ok(WeightedOutcome::Unresolved(format!("no decomposition, interval minimum {min_eig:.2e}")))
            }
        }
    }
}

fn row_of(q: &MatPoly, row: usize) -> MatPoly {
    let mut out = MatPoly::zero(1, q.cols(), q.g());
    for (w, c) in q.terms() {
        out.add_term(w.clone(), c.rows(row, 1).into_owned());
    }
    out
}

/// Certificate `F = sum R^* R + sum Q^* L Q` for univariate monic `L`.
pub fn univar_certify(l: &Pencil, f: &MatPoly, opts: &PsatzOptions) -> Result<PsatzVerdict> {
    require_univariate(l)?;
    check_target(f)?;
    let case = interval_of(l)?;
    let kappa = f.rows();
    let dec = match weighted_sos_decompose(f, &case, opts)? {
        WeightedOutcome::Decomposed(d) => d,
        WeightedOutcome::Violated { y, eigenvector, .. } => {
            let x = SymTuple::scalar(&[y]);
            let gamma = DVector::from_vec(eigenvector);
            let k = opts.degree.unwrap_or_else(|| default_degree(f));
            let lam = Functional::from_point(&x, &gamma, kappa, 2 * k + 1)?;
            let hankel_min_eig = crate::linalg::min_eig(&lam.hankel(k));
            let model = GnsModel { x: x.clone(), gamma: gamma.iter().copied().collect(), hankel_min_eig };
            let value = model.value(f)?;
            return Ok(PsatzVerdict::Refuted(Refutation { model, value, membership_margin: l.min_eig_at(&x)? }));
        }
        WeightedOutcome::Unresolved(m) => return Ok(PsatzVerdict::Unresolved(m)),
    };
    let map = dec.map;
    let mut r: Vec<MatPoly> = dec.sos.iter().map(|p| map.pull_back(p)).collect();
    let mut q = Vec::new();
    let iopts = InclusionOptions { solver: opts.solver.clone(), seed: opts.seed, ..Default::default() };
    for &sign in case.weight_signs() {
        // 1 + sign * s as a polynomial in y, normalized to constant term 1
        let w = map.pull_back(&MatPoly::scalar(1, &[(1.0, Word::empty()), (sign, Word::letter(0))]));
        let w0 = w.coef_or_zero(&Word::empty())[(0, 0)];
        let w1 = w.coef_or_zero(&Word::letter(0))[(0, 0)];
        if w0 <= 0.0 {
            return Err(Error::Invalid("weight does not contain the origin".into()));
        }
        let target = Pencil::monic(vec![DMatrix::from_element(1, 1, w1 / w0)])?;
        let cert = match check_inclusion(l, &target, &iopts)? {
            InclusionVerdict::Included(c) => c,
            InclusionVerdict::NotIncluded(_) => {
                return Err(Error::Unresolved("weight pencil not implied by L".into()));
            }
        };
        let s = cert.s[(0, 0)].max(0.0);
        for (_, qt) in dec.weighted.iter().filter(|(sg, _)| *sg == sign) {
            let qy = map.pull_back(qt);
            for v in &cert.v {
                // V is d1 x 1
                let factor = MatPoly::constant(v * w0.sqrt(), 1).mul(&qy)?;
                q.push(factor);
            }
            if s > 0.0 {
                r.push(qy.scale((w0 * s).sqrt()));
            }
        }
    }
    let certificate = PsatzCertificate { d: dec.degree, r, q, gram_sos: DMatrix::zeros(0, 0), gram_l: DMatrix::zeros(0, 0) };
    let report = verify_certificate(f, &certificate, l)?;
    if !report.valid {
        return Ok(PsatzVerdict::Unresolved(format!("spliced certificate residual {:.2e}", report.relative_residual)));
    }
    Ok(PsatzVerdict::Certified { certificate, report })
}
