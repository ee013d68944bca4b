//! Counterexample search for a failed inclusion.
//!
//! A direction `X` is scored by `h(X) = lambda_min(Lambda2(X))` under the
//! normalization `lambda_min(Lambda1(X)) >= -1`, where `Lambda_i` is the
//! linear part of `L_i`. A direction yields a counterexample exactly when
//! `h(X) < -1`: scaling it to the boundary of `D_{L1}` makes `L2` indefinite.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{verify_counterexample, Counterexample, HomogeneousPoint};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, min_eigpair, random_symmetric, sym_eig, symmetrize};
use crate::pencil::{Pencil, SymTuple};

/// Directions whose `Lambda1` is psd are scaled to make `L2` equal `-1`
/// at its minimum; this caps the scale.
const MAX_SCALE: f64 = 1e3;

pub struct SearchContext<'a> {
    pub l1: &'a Pencil,
    pub l2: &'a Pencil,
    /// Homogeneous point read off the Farkas ray, when available.
    pub point: Option<&'a HomogeneousPoint>,
    pub seed: u64,
}

pub trait CounterexampleSearch: Send + Sync {
    fn name(&self) -> &'static str;
    /// A verified counterexample, or `None` when this strategy found nothing.
    fn search(&self, ctx: &SearchContext) -> Result<Option<Counterexample>>;
}

/// Strategies by name.
pub struct SearchRegistry {
    entries: BTreeMap<&'static str, Box<dyn CounterexampleSearch>>,
}

impl SearchRegistry {
    pub fn empty() -> Self {
        Self { entries: BTreeMap::new() }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(FarkasSearch::default()));
        r.register(Box::new(RandomRestart::default()));
        r
    }

    pub fn default_order() -> Vec<String> {
        vec!["farkas".into(), "random-restart".into()]
    }

    pub fn register(&mut self, s: Box<dyn CounterexampleSearch>) {
        self.entries.insert(s.name(), s);
    }

    pub fn get(&self, name: &str) -> Result<&dyn CounterexampleSearch> {
        self.entries.get(name).map(|b| b.as_ref()).ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for SearchRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

/// Runs the named strategies in order and returns the first verified hit.
pub fn find_counterexample(ctx: &SearchContext, registry: &SearchRegistry, order: &[String]) -> Result<Counterexample> {
    let strategies = order.iter().map(|n| registry.get(n)).collect::<Result<Vec<_>>>()?;
    for s in strategies {
        if let Some(c) = s.search(ctx)? {
            return lower_level(ctx.l1, ctx.l2, c);
        }
        log::debug!("strategy {} found no counterexample", s.name());
    }
    Err(Error::SearchFailed)
}

fn linear_min(l: &Pencil, x: &SymTuple) -> (f64, DVector<f64>) {
    let mut m = l.evaluate(x).expect("point matches pencil");
    let n = x.n();
    for i in 0..l.d() * n {
        m[(i, i)] -= 1.0;
    }
    min_eigpair(&m)
}

/// `h(X)` with the normalization folded in, and the unnormalized `Lambda2`
/// minimum eigenvector.
fn score(l1: &Pencil, l2: &Pencil, x: &SymTuple) -> (f64, DVector<f64>) {
    let (mu1, _) = linear_min(l1, x);
    let (mu2, v) = linear_min(l2, x);
    let denom = (-mu1).max(0.0);
    if denom <= 1e-300 {
        // Lambda1 psd: any negative curvature of Lambda2 is fatal
        return (if mu2 < 0.0 { f64::NEG_INFINITY } else { mu2 }, v);
    }
    (mu2 / denom, v)
}

/// Scales a direction onto the boundary of `D_{L1}` and verifies it.
fn realize(l1: &Pencil, l2: &Pencil, x: &SymTuple, strategy: &str) -> Result<Option<Counterexample>> {
    let (mu1, _) = linear_min(l1, x);
    let (mu2, _) = linear_min(l2, x);
    if mu2 >= 0.0 {
        return Ok(None);
    }
    let t = if mu1 < 0.0 { -1.0 / mu1 } else { (-2.0 / mu2).min(MAX_SCALE) };
    let pt = x.scaled(t);
    Ok(verify_counterexample(l1, l2, &pt)?.map(|(lhs, rhs, v)| Counterexample {
        x: pt,
        eigenvector: v.iter().copied().collect(),
        lhs_min_eig: lhs,
        rhs_min_eig: rhs,
        strategy: strategy.to_string(),
    }))
}

/// Compresses a verified witness to the span of the leading right singular
/// vectors of its negative eigenvector (reshaped `d2 x n`), keeping the
/// smallest level that still verifies.
fn lower_level(l1: &Pencil, l2: &Pencil, c: Counterexample) -> Result<Counterexample> {
    let n = c.x.n();
    if n <= 1 {
        return Ok(c);
    }
    let d2 = l2.d();
    let w = DMatrix::from_fn(d2, n, |p, a| c.eigenvector[p * n + a]);
    let svd = w.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    for k in 1..=order.len().min(n - 1) {
        let v = DMatrix::from_fn(n, k, |r, col| vt[(order[col], r)]);
        if let Some(mut low) = realize(l1, l2, &c.x.compress(&v), &c.strategy)? {
            log::debug!("witness lowered from level {n} to {k}");
            low.strategy = c.strategy;
            return Ok(low);
        }
    }
    Ok(c)
}

fn normalize(x: &SymTuple) -> SymTuple {
    let s = x.x.iter().map(max_abs).fold(0.0f64, f64::max);
    if s > 0.0 {
        x.scaled(1.0 / s)
    } else {
        x.clone()
    }
}

/// Subgradient descent on the normalized score.
fn polish(l1: &Pencil, l2: &Pencil, x0: &SymTuple, iters: usize) -> SymTuple {
    let n = x0.n();
    let d2 = l2.d();
    let mut x = normalize(x0);
    let (mut best, mut v) = score(l1, l2, &x);
    let mut eta = 0.1;
    for _ in 0..iters {
        if best < -1.0 - 1e-3 || !best.is_finite() || eta < 1e-10 {
            break;
        }
        // d lambda_min / d X_j = W^T B_j W with W the d2 x n reshape of v
        let w = DMatrix::from_fn(d2, n, |p, a| v[p * n + a]);
        let grads: Vec<DMatrix<f64>> = l2.coeffs().iter().map(|b| symmetrize(&(w.transpose() * b * &w))).collect();
        let cand = SymTuple::with_level(n, x.x.iter().zip(&grads).map(|(xj, gj)| xj - gj * eta).collect())
            .expect("shapes preserved");
        let cand = normalize(&cand);
        let (s, cv) = score(l1, l2, &cand);
        if s < best {
            x = cand;
            best = s;
            v = cv;
            eta *= 1.5;
        } else {
            eta *= 0.5;
        }
    }
    x
}

/// Candidates from the Farkas ray: `(Z0 + eps I)^{-1/2} Z (Z0 + eps I)^{-1/2}`
/// and the compression of `Z` to the range of `Z0`, each polished.
#[derive(Debug, Clone)]
pub struct FarkasSearch {
    pub polish_iters: usize,
}

impl Default for FarkasSearch {
    fn default() -> Self {
        Self { polish_iters: 300 }
    }
}

impl FarkasSearch {
    fn candidates(point: &HomogeneousPoint) -> Vec<SymTuple> {
        let n = point.z0.nrows();
        let scale = point.z.iter().chain(std::iter::once(&point.z0)).map(max_abs).fold(0.0f64, f64::max);
        if n == 0 || scale == 0.0 {
            return Vec::new();
        }
        let (vals, vecs) = sym_eig(&point.z0);
        let mut out = Vec::new();
        for eps in [0.0, 1e-8, 1e-6, 1e-4, 1e-2] {
            let shift = eps * scale;
            if vals[0] + shift <= 1e-14 * scale {
                continue;
            }
            let isq = DMatrix::from_diagonal(&vals.map(|l| 1.0 / (l + shift).sqrt()));
            let t = &vecs * isq * vecs.transpose();
            if let Ok(x) = SymTuple::with_level(n, point.z.iter().map(|z| symmetrize(&(&t * z * &t))).collect()) {
                out.push(x);
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&i| vals[i] > 1e-9 * vals[n - 1].max(0.0)).collect();
        if !keep.is_empty() && keep.len() < n {
            let p = DMatrix::from_fn(n, keep.len(), |r, c| vecs[(r, keep[c])] / vals[keep[c]].sqrt());
            let zs = point.z.iter().map(|z| symmetrize(&(p.transpose() * z * &p))).collect();
            if let Ok(x) = SymTuple::with_level(keep.len(), zs) {
                out.push(x);
            }
        }
        out
    }
}

impl CounterexampleSearch for FarkasSearch {
    fn name(&self) -> &'static str {
        "farkas"
    }

    fn search(&self, ctx: &SearchContext) -> Result<Option<Counterexample>> {
        let Some(point) = ctx.point else { return Ok(None) };
        for cand in Self::candidates(point) {
            if let Some(c) = realize(ctx.l1, ctx.l2, &cand, self.name())? {
                return Ok(Some(c));
            }
            let p = polish(ctx.l1, ctx.l2, &cand, self.polish_iters);
            if let Some(c) = realize(ctx.l1, ctx.l2, &p, self.name())? {
                return Ok(Some(c));
            }
        }
        Ok(None)
    }
}

/// Random symmetric directions at levels `1..=d2`, each polished.
#[derive(Debug, Clone)]
pub struct RandomRestart {
    pub restarts_per_level: usize,
    pub polish_iters: usize,
}

impl Default for RandomRestart {
    fn default() -> Self {
        Self { restarts_per_level: 40, polish_iters: 300 }
    }
}

impl CounterexampleSearch for RandomRestart {
    fn name(&self) -> &'static str {
        "random-restart"
    }

    fn search(&self, ctx: &SearchContext) -> Result<Option<Counterexample>> {
        let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
        let g = ctx.l1.g();
        for n in 1..=ctx.l2.d().max(1) {
            for _ in 0..self.restarts_per_level {
                let x = SymTuple::with_level(n, (0..g).map(|_| random_symmetric(&mut rng, n)).collect())
                    .expect("random tuple is symmetric");
                let p = polish(ctx.l1, ctx.l2, &x, self.polish_iters);
                if let Some(c) = realize(ctx.l1, ctx.l2, &p, self.name())? {
                    return Ok(Some(c));
                }
            }
        }
        Ok(None)
    }
}
