//! Gram SDP for membership in the truncated quadratic module
//! `Sigma_d^nu + { sum Q^* L Q : deg Q <= d }`.
//!
//! Block 0 is `G_sos`, indexed by `(u, i)` with `|u| <= d`; block 1 is
//! `G_L`, indexed by `(u, a, i)`. Sums of squares of degree `d + 1` cannot
//! contribute to a polynomial of degree `2d + 1` (their leading terms do not
//! cancel), so those rows are left out. There is one constraint per orbit
//! of `(w, i, j) ~ (w^*, j, i)` over words of degree `<= 2d + 1`.

use std::collections::BTreeMap;

use freespec_sdp::{SdpProblem, Sense, SparseSym};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ncpoly::{basis_words, MatPoly, Word};

/// One entry `(w, i, j)` of a `nu x nu` matrix polynomial.
pub type Element = (Word, usize, usize);

/// The canonical member of the orbit of `(w, i, j)`.
pub fn orbit_rep(w: &Word, i: usize, j: usize) -> (Element, bool) {
    let a = (w.clone(), i, j);
    let b = (w.adjoint(), j, i);
    let single = a == b;
    (if a <= b { a } else { b }, single)
}

/// Number of orbits over `n_words` words of which `n_pal` are palindromes.
pub fn orbit_count(n_words: usize, n_pal: usize, nu: usize) -> usize {
    (n_words * nu * nu + n_pal * nu) / 2
}

/// Coefficient data of a (possibly non-monic) pencil `A0 + sum A_l x_l`.
#[derive(Debug, Clone)]
pub struct PencilData {
    pub a0: DMatrix<f64>,
    pub a: Vec<DMatrix<f64>>,
}

impl PencilData {
    pub fn d(&self) -> usize {
        self.a0.nrows()
    }
}

/// Index maps of a built Gram SDP.
#[derive(Debug, Clone)]
pub struct PsatzIndex {
    pub g: usize,
    pub nu: usize,
    pub d1: usize,
    pub degree: usize,
    /// Words of degree `<= degree` over the letters the factors may use.
    pub words: Vec<Word>,
    /// Orbit representatives in constraint order.
    pub orbits: Vec<Element>,
    pub singleton: Vec<bool>,
    pub orbit_of: BTreeMap<Element, usize>,
    /// Number of leading constraints that are orbit constraints; any further
    /// constraints are annihilation constraints of the spectrahedrop module.
    pub n_orbit_constraints: usize,
}

impl PsatzIndex {
    pub fn sos_index(&self, u: usize, i: usize) -> usize {
        u * self.nu + i
    }

    pub fn l_index(&self, u: usize, a: usize, i: usize) -> usize {
        (u * self.d1 + a) * self.nu + i
    }

    pub fn sos_size(&self) -> usize {
        self.words.len() * self.nu
    }

    pub fn l_size(&self) -> usize {
        self.words.len() * self.d1 * self.nu
    }
}

#[derive(Debug, Clone)]
pub struct PsatzSdp {
    pub problem: SdpProblem,
    pub index: PsatzIndex,
    /// For each orbit the right-hand side `F_w[i, j]`.
    pub targets: Vec<f64>,
}

fn add_pair(m: &mut SparseSym, block: usize, r: usize, c: usize, w: f64) {
    m.add(block, r, c, if r == c { w } else { 0.5 * w });
}

/// Builds the feasibility SDP `F in module`. `annihilate` lists extra
/// pencil coefficients whose contraction against `G_L` must vanish (the
/// spectrahedrop variant).
pub fn build_gram_sdp(
    pencil: &PencilData,
    f: &MatPoly,
    degree: usize,
    annihilate: &[DMatrix<f64>],
) -> Result<PsatzSdp> {
    let g = f.g();
    let nu = f.rows();
    if f.cols() != nu {
        return Err(Error::DimensionMismatch(format!("F is {}x{}, not square", f.rows(), f.cols())));
    }
    if !f.is_symmetric(1e-9 * (1.0 + f.max_coef())) {
        return Err(Error::Invalid(format!("F is not symmetric (defect {:.2e})", f.symmetry_defect())));
    }
    if pencil.a.len() != g {
        return Err(Error::VariableCountMismatch(pencil.a.len(), g));
    }
    if annihilate.iter().any(|m| m.nrows() != pencil.d()) {
        return Err(Error::DimensionMismatch("annihilated coefficient has the wrong size".into()));
    }
    let top = 2 * degree + 1;
    if f.degree() > top as i64 {
        return Err(Error::DegreeTooHigh { deg: f.degree(), bound: top as i64 });
    }
    let d1 = pencil.d();
    let words = basis_words(g, degree);
    let all = basis_words(g, top);
    let mut orbits = Vec::new();
    let mut singleton = Vec::new();
    let mut orbit_of = BTreeMap::new();
    for w in &all {
        for i in 0..nu {
            for j in 0..nu {
                let (rep, single) = orbit_rep(w, i, j);
                if !orbit_of.contains_key(&rep) {
                    orbit_of.insert(rep.clone(), orbits.len());
                    orbits.push(rep);
                    singleton.push(single);
                }
            }
        }
    }
    let index = PsatzIndex {
        g,
        nu,
        d1,
        degree,
        words,
        orbits,
        singleton,
        orbit_of,
        n_orbit_constraints: 0,
    };
    let mut mats: Vec<SparseSym> = vec![SparseSym::new(); index.orbits.len()];
    let weight = |o: usize| if index.singleton[o] { 1.0 } else { 0.5 };
    for (ui, u) in index.words.iter().enumerate() {
        let us = u.adjoint();
        for (vi, v) in index.words.iter().enumerate() {
            let w = us.concat(v);
            let xw: Vec<Word> = (0..g).map(|l| Word::sandwich(u, l, v)).collect();
            for i in 0..nu {
                for j in 0..nu {
                    let o = index.orbit_of[&orbit_rep(&w, i, j).0];
                    add_pair(&mut mats[o], 0, index.sos_index(ui, i), index.sos_index(vi, j), weight(o));
                    for a in 0..d1 {
                        for b in 0..d1 {
                            let r = index.l_index(ui, a, i);
                            let c = index.l_index(vi, b, j);
                            let c0 = pencil.a0[(a, b)];
                            if c0 != 0.0 {
                                add_pair(&mut mats[o], 1, r, c, c0 * weight(o));
                            }
                            for (l, al) in pencil.a.iter().enumerate() {
                                let cl = al[(a, b)];
                                if cl != 0.0 {
                                    let ol = index.orbit_of[&orbit_rep(&xw[l], i, j).0];
                                    add_pair(&mut mats[ol], 1, r, c, cl * weight(ol));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let blocks = vec![index.sos_size(), index.l_size()];
    let mut problem = SdpProblem::new(blocks, Sense::Feasibility);
    let mut targets = Vec::with_capacity(index.orbits.len());
    for (o, mut m) in mats.into_iter().enumerate() {
        m.canonicalize();
        let (w, i, j) = &index.orbits[o];
        let t = f.coef(w).map(|c| c[(*i, *j)]).unwrap_or(0.0);
        targets.push(t);
        problem.add_constraint(m, t);
    }
    let mut index = index;
    index.n_orbit_constraints = index.orbits.len();
    for gamma in annihilate {
        add_annihilation(&mut problem, &index, gamma);
    }
    Ok(PsatzSdp { problem, index, targets })
}

/// `sum_ab Gamma_ab G_L[(u,a,i),(v,b,j)] = 0` for each orbit of
/// `(u, v, i, j) ~ (v, u, j, i)`.
fn add_annihilation(p: &mut SdpProblem, index: &PsatzIndex, gamma: &DMatrix<f64>) {
    let (nw, nu, d1) = (index.words.len(), index.nu, index.d1);
    for ui in 0..nw {
        for vi in 0..nw {
            for i in 0..nu {
                for j in 0..nu {
                    if (ui, i) > (vi, j) {
                        continue;
                    }
                    let mut m = SparseSym::new();
                    for a in 0..d1 {
                        for b in 0..d1 {
                            let c = gamma[(a, b)];
                            if c != 0.0 {
                                add_pair(&mut m, 1, index.l_index(ui, a, i), index.l_index(vi, b, j), c);
                            }
                        }
                    }
                    m.canonicalize();
                    if !m.is_empty() {
                        p.add_constraint(m, 0.0);
                    }
                }
            }
        }
    }
}

/// Turns the feasibility SDP into `max t` with `F - t I` in the module:
/// `t` is eliminated through the `(1, 0, 0)` constraint, whose left side
/// becomes the objective.
pub fn with_margin(sdp: &PsatzSdp) -> SdpProblem {
    let idx = &sdp.index;
    let diag: Vec<usize> = (0..idx.nu).map(|i| idx.orbit_of[&(Word::empty(), i, i)]).collect();
    let base = diag[0];
    let mut p = SdpProblem::new(sdp.problem.blocks.clone(), Sense::Minimize);
    p.objective = sdp.problem.constraints[base].matrix.clone();
    for (k, c) in sdp.problem.constraints.iter().enumerate() {
        if k == base {
            continue;
        }
        if diag.contains(&k) {
            let mut m = c.matrix.clone();
            let mut neg = sdp.problem.constraints[base].matrix.clone();
            neg.scale(-1.0);
            for e in neg.entries() {
                m.add(e.block, e.row, e.col, e.value);
            }
            m.canonicalize();
            p.add_constraint(m, c.rhs - sdp.problem.constraints[base].rhs);
        } else {
            p.add_constraint(c.matrix.clone(), c.rhs);
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ncpoly::basis_count;

    fn interval() -> PencilData {
        PencilData {
            a0: DMatrix::identity(2, 2),
            a: vec![DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])],
        }
    }

    #[test]
    fn orbit_counts_match_enumeration() {
        for (g, d, nu) in [(1, 0, 1), (2, 1, 1), (2, 1, 2), (3, 0, 2), (1, 2, 3)] {
            let f = MatPoly::identity(nu, g);
            let pen = PencilData { a0: DMatrix::identity(1, 1), a: vec![DMatrix::zeros(1, 1); g] };
            let sdp = build_gram_sdp(&pen, &f, d, &[]).unwrap();
            let words = basis_words(g, 2 * d + 1);
            let pal = words.iter().filter(|w| w.is_palindrome()).count();
            assert_eq!(sdp.problem.num_constraints(), orbit_count(words.len(), pal, nu));
            // brute force over elements
            let mut reps = std::collections::BTreeSet::new();
            for w in &words {
                for i in 0..nu {
                    for j in 0..nu {
                        let a = (w.clone(), i, j);
                        let b = (w.adjoint(), j, i);
                        reps.insert(if a <= b { a } else { b });
                    }
                }
            }
            assert_eq!(reps.len(), sdp.problem.num_constraints());
            assert_eq!(sdp.index.words.len(), basis_count(g, d));
        }
    }

    #[test]
    fn block_sizes() {
        let f = MatPoly::identity(1, 1);
        let sdp = build_gram_sdp(&interval(), &f, 1, &[]).unwrap();
        assert_eq!(sdp.problem.blocks, vec![2, 4]);
    }

    #[test]
    fn degree_guard() {
        let f = MatPoly::scalar(1, &[(1.0, Word::new(vec![0, 0, 0, 0]))]);
        assert!(matches!(build_gram_sdp(&interval(), &f, 1, &[]), Err(Error::DegreeTooHigh { deg: 4, bound: 3 })));
    }

    #[test]
    fn asymmetric_target_is_rejected() {
        let f = MatPoly::scalar(2, &[(1.0, Word::new(vec![0, 1]))]);
        let pen = PencilData { a0: DMatrix::identity(1, 1), a: vec![DMatrix::zeros(1, 1); 2] };
        assert!(matches!(build_gram_sdp(&pen, &f, 1, &[]), Err(Error::Invalid(_))));
    }
}
