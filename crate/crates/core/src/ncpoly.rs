//! Free words and matrix-coefficient noncommutative polynomials.
//!
//! Letters are stored 0-based internally; the JSON form and `Display` use
//! 1-based indices (`x1`, `x2`, ...). Words are ordered graded
//! lexicographically and every basis downstream uses this order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, matrix_to_rows, max_abs, rows_to_matrix};
use crate::pencil::SymTuple;

/// Coefficient matrices with max-abs below this are dropped.
pub const ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn letter(j: usize) -> Self {
        Word(vec![j])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn adjoint(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn is_palindrome(&self) -> bool {
        self.0.iter().eq(self.0.iter().rev())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `u* x_j v` as a single word.
    pub fn sandwich(u: &Word, j: usize, v: &Word) -> Word {
        let mut w: Vec<usize> = u.0.iter().rev().copied().collect();
        w.push(j);
        w.extend_from_slice(&v.0);
        Word(w)
    }

    pub fn max_letter(&self) -> Option<usize> {
        self.0.iter().copied().max()
    }

    /// Evaluates the word at a tuple; the empty word gives the identity.
    pub fn eval(&self, x: &SymTuple) -> DMatrix<f64> {
        let n = x.n();
        let mut m = DMatrix::identity(n, n);
        for &l in &self.0 {
            m *= &x.x[l];
        }
        m
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "x{}", l + 1)?;
        }
        Ok(())
    }
}

/// All words of degree at most `d` in `g` letters, graded lexicographic.
pub fn basis_words(g: usize, d: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(layer.len() * g);
        for w in &layer {
            for j in 0..g {
                let mut v = w.0.clone();
                v.push(j);
                next.push(Word(v));
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// `sum_{k=0..d} g^k`.
pub fn basis_count(g: usize, d: usize) -> usize {
    (0..=d).map(|k| g.pow(k as u32)).sum()
}

/// A `rows x cols` matrix polynomial `sum_w P_w w` in `g` letters.
#[derive(Debug, Clone, PartialEq)]
pub struct MatPoly {
    rows: usize,
    cols: usize,
    g: usize,
    terms: BTreeMap<Word, DMatrix<f64>>,
}

impl MatPoly {
    pub fn zero(rows: usize, cols: usize, g: usize) -> Self {
        Self { rows, cols, g, terms: BTreeMap::new() }
    }

    pub fn constant(c: DMatrix<f64>, g: usize) -> Self {
        let mut p = Self::zero(c.nrows(), c.ncols(), g);
        p.add_term(Word::empty(), c);
        p
    }

    pub fn identity(n: usize, g: usize) -> Self {
        Self::constant(DMatrix::identity(n, n), g)
    }

    pub fn monomial(w: Word, c: DMatrix<f64>, g: usize) -> Self {
        let mut p = Self::zero(c.nrows(), c.ncols(), g);
        p.add_term(w, c);
        p
    }

    /// Scalar polynomial from `(coefficient, word)` pairs.
    pub fn scalar(g: usize, terms: &[(f64, Word)]) -> Self {
        let mut p = Self::zero(1, 1, g);
        for (c, w) in terms {
            p.add_term(w.clone(), DMatrix::from_element(1, 1, *c));
        }
        p
    }

    /// Builds from a term list, validating shapes and letters.
    pub fn from_terms(rows: usize, cols: usize, g: usize, terms: Vec<(Word, DMatrix<f64>)>) -> Result<Self> {
        let mut p = Self::zero(rows, cols, g);
        for (w, c) in terms {
            if c.nrows() != rows || c.ncols() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient of {w} is {}x{}, expected {rows}x{cols}",
                    c.nrows(),
                    c.ncols()
                )));
            }
            if w.max_letter().is_some_and(|l| l >= g) {
                return Err(Error::Invalid(format!("word {w} uses a letter beyond g = {g}")));
            }
            p.add_term(w, c);
        }
        Ok(p)
    }

    /// Adds `c` to the coefficient of `w`, keeping the canonical form.
    pub fn add_term(&mut self, w: Word, c: DMatrix<f64>) {
        debug_assert_eq!((c.nrows(), c.ncols()), (self.rows, self.cols));
        match self.terms.get_mut(&w) {
            Some(existing) => {
                *existing += c;
                if max_abs(existing) < ZERO_TOL {
                    self.terms.remove(&w);
                }
            }
            None => {
                if max_abs(&c) >= ZERO_TOL {
                    self.terms.insert(w, c);
                }
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &DMatrix<f64>)> {
        self.terms.iter()
    }

    pub fn coef(&self, w: &Word) -> Option<&DMatrix<f64>> {
        self.terms.get(w)
    }

    pub fn coef_or_zero(&self, w: &Word) -> DMatrix<f64> {
        self.terms.get(w).cloned().unwrap_or_else(|| DMatrix::zeros(self.rows, self.cols))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.terms.keys().map(|w| w.degree() as i64).max().unwrap_or(-1)
    }

    /// Reinterprets the polynomial over a larger alphabet.
    pub fn with_letters(&self, g: usize) -> Result<Self> {
        if self.terms.keys().any(|w| w.max_letter().is_some_and(|l| l >= g)) {
            return Err(Error::Invalid(format!("polynomial uses letters beyond {g}")));
        }
        Ok(Self { g, ..self.clone() })
    }

    pub fn adjoint(&self) -> Self {
        let mut p = Self::zero(self.cols, self.rows, self.g);
        for (w, c) in &self.terms {
            p.add_term(w.adjoint(), c.transpose());
        }
        p
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero(self.rows, self.cols, self.g);
        for (w, c) in &self.terms {
            p.add_term(w.clone(), c * s);
        }
        p
    }

    fn check_same_shape(&self, o: &Self) -> Result<()> {
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        if self.g != o.g {
            return Err(Error::VariableCountMismatch(self.g, o.g));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_same_shape(o)?;
        let mut p = self.clone();
        for (w, c) in &o.terms {
            p.add_term(w.clone(), c.clone());
        }
        Ok(p)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        if self.g != o.g {
            return Err(Error::VariableCountMismatch(self.g, o.g));
        }
        let mut p = Self::zero(self.rows, o.cols, self.g);
        for (u, a) in &self.terms {
            for (v, b) in &o.terms {
                p.add_term(u.concat(v), a * b);
            }
        }
        Ok(p)
    }

    /// Left multiplication by a constant matrix.
    pub fn lmul_const(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() != self.rows {
            return Err(Error::DimensionMismatch("constant factor".into()));
        }
        let mut p = Self::zero(m.nrows(), self.cols, self.g);
        for (w, c) in &self.terms {
            p.add_term(w.clone(), m * c);
        }
        Ok(p)
    }

    /// `P* P`.
    pub fn hermitian_square(&self) -> Self {
        self.adjoint().mul(self).expect("shapes agree")
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols && self.symmetry_defect() <= tol
    }

    /// Largest coefficient deviation between `P` and `P*`.
    pub fn symmetry_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let adj = self.adjoint();
        self.max_coef_diff(&adj)
    }

    /// Max-abs coefficient of `self - o` over all words.
    pub fn max_coef_diff(&self, o: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (w, c) in &self.terms {
            let d = match o.terms.get(w) {
                Some(oc) => max_abs(&(c - oc)),
                None => max_abs(c),
            };
            m = m.max(d);
        }
        for (w, c) in &o.terms {
            if !self.terms.contains_key(w) {
                m = m.max(max_abs(c));
            }
        }
        m
    }

    pub fn max_coef(&self) -> f64 {
        self.terms.values().map(max_abs).fold(0.0, f64::max)
    }

    /// `sum_w P_w (x) w(X)`, of size `(rows n) x (cols n)`.
    pub fn evaluate(&self, x: &SymTuple) -> Result<DMatrix<f64>> {
        if x.g() != self.g {
            return Err(Error::VariableCountMismatch(self.g, x.g()));
        }
        let n = x.n();
        let mut out = DMatrix::zeros(self.rows * n, self.cols * n);
        let mut cache: BTreeMap<Word, DMatrix<f64>> = BTreeMap::new();
        cache.insert(Word::empty(), DMatrix::identity(n, n));
        for (w, c) in &self.terms {
            let wx = word_value(w, x, &mut cache);
            out += kron(c, &wx);
        }
        Ok(out)
    }

    /// Substitutes each letter by a scalar affine expression
    /// `x_j -> a_j x_j + b_j`. Only meaningful for `g = 1` or commuting use.
    pub fn affine_substitute(&self, a: &[f64], b: &[f64]) -> Self {
        let mut out = Self::zero(self.rows, self.cols, self.g);
        for (w, c) in &self.terms {
            // expand prod (a_l x_l + b_l) over the letters of w
            let mut partial: Vec<(Word, f64)> = vec![(Word::empty(), 1.0)];
            for &l in w.letters() {
                let mut next = Vec::with_capacity(partial.len() * 2);
                for (pw, pc) in &partial {
                    next.push((pw.concat(&Word::letter(l)), pc * a[l]));
                    if b[l] != 0.0 {
                        next.push((pw.clone(), pc * b[l]));
                    }
                }
                partial = next;
            }
            for (pw, pc) in partial {
                out.add_term(pw, c * pc);
            }
        }
        out
    }
}

fn word_value(w: &Word, x: &SymTuple, cache: &mut BTreeMap<Word, DMatrix<f64>>) -> DMatrix<f64> {
    if let Some(m) = cache.get(w) {
        return m.clone();
    }
    let l = w.letters();
    let prefix = Word(l[..l.len() - 1].to_vec());
    let pm = word_value(&prefix, x, cache);
    let m = pm * &x.x[l[l.len() - 1]];
    cache.insert(w.clone(), m.clone());
    m
}

impl fmt::Display for MatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if self.rows == 1 && self.cols == 1 {
                write!(f, "{}", c[(0, 0)])?;
            } else {
                write!(f, "{:?}", matrix_to_rows(c))?;
            }
            if !w.is_empty() {
                write!(f, "*{w}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermJson {
    word: Vec<usize>,
    coef: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct MatPolyJson {
    rows: usize,
    cols: usize,
    g: usize,
    terms: Vec<TermJson>,
}

impl Serialize for MatPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatPolyJson {
            rows: self.rows,
            cols: self.cols,
            g: self.g,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| TermJson { word: w.letters().iter().map(|l| l + 1).collect(), coef: matrix_to_rows(c) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = MatPolyJson::deserialize(d)?;
        if j.rows == 0 || j.cols == 0 {
            return Err(D::Error::custom("rows and cols must be positive"));
        }
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in j.terms {
            if t.word.iter().any(|&l| l == 0 || l > j.g) {
                return Err(D::Error::custom(format!("letters must lie in 1..={}", j.g)));
            }
            let c = rows_to_matrix(&t.coef, Some(j.cols)).map_err(D::Error::custom)?;
            terms.push((Word(t.word.iter().map(|l| l - 1).collect()), c));
        }
        MatPoly::from_terms(j.rows, j.cols, j.g, terms).map_err(D::Error::custom)
    }
}
