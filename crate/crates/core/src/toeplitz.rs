//! The Jacobson algebra `A = <x, y | xy = 1>` (the algebraic Toeplitz
//! algebra) and its faithful representation by almost-Toeplitz matrices.
//!
//! Rewriting `xy -> 1` leaves the basis `y^i x^j`, with
//!
//! ```text
//! (y^i x^j)(y^k x^l) = y^{i + max(0, k-j)} x^{l + max(0, j-k)}
//! ```
//!
//! The matrix units are `e_ij = y^{i-1}(1 - yx)x^{j-1}`. Under `y -> c`,
//! `x -> c*` with `c = Σ e_{i+1,i}` every element becomes a finitary
//! matrix plus finitely many constant diagonals `c^(k) = Σ_{j-i=k} e_ij`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{self, Expr, ParseError};
use crate::field::{Field, FieldError, Scalar};
use crate::laurent::LaurentPoly;
use crate::linalg::{self, EchelonBasis};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JacError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("unknown symbol `{name}` at {position}; only x and y are generators")]
    UnknownSymbol { name: String, position: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("operands are over different fields")]
    Mismatch,
    #[error("quotient image of {name} is {found}, expected {expected}")]
    QuotientMismatch {
        name: String,
        expected: String,
        found: String,
    },
    #[error("element is not in the span of the matrix units")]
    NotFinitary,
    #[error("malformed matrix document: {0}")]
    BadMatrix(String),
}

fn add_into<K: Ord>(map: &mut BTreeMap<K, Scalar>, k: K, c: &Scalar) {
    if c.is_zero() {
        return;
    }
    let sum = match map.get(&k) {
        Some(x) => x + c,
        None => c.clone(),
    };
    if sum.is_zero() {
        map.remove(&k);
    } else {
        map.insert(k, sum);
    }
}

fn format_coefficient(c: &Scalar) -> String {
    let s = c.to_string();
    if s.contains('+') || s.contains('x') {
        format!("[{s}]")
    } else {
        s
    }
}

/// Writes `Σ c_m m` with the conventions shared by all element printers.
fn write_sum<'a, M: 'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a M, &'a Scalar)>,
    show: impl Fn(&M) -> Option<String>,
) -> fmt::Result {
    let mut first = true;
    for (m, c) in terms {
        let (neg, abs) = if c.is_negative() {
            (true, -c)
        } else {
            (false, c.clone())
        };
        match (first, neg) {
            (true, true) => write!(f, "-")?,
            (true, false) => {}
            (false, true) => write!(f, " - ")?,
            (false, false) => write!(f, " + ")?,
        }
        first = false;
        match (show(m), abs.is_one()) {
            (None, _) => write!(f, "{}", format_coefficient(&abs))?,
            (Some(w), true) => write!(f, "{w}")?,
            (Some(w), false) => write!(f, "{} {w}", format_coefficient(&abs))?,
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// `Σ α_ij y^i x^j` in normal form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct JacobsonElement {
    field: Field,
    terms: BTreeMap<(u64, u64), Scalar>,
}

impl JacobsonElement {
    pub fn zero(field: Field) -> Self {
        JacobsonElement {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(c: Scalar) -> Self {
        Self::term(c, 0, 0)
    }

    pub fn one(field: Field) -> Self {
        Self::monomial(field, 0, 0)
    }

    pub fn x(field: Field) -> Self {
        Self::monomial(field, 0, 1)
    }

    pub fn y(field: Field) -> Self {
        Self::monomial(field, 1, 0)
    }

    /// `y^i x^j`.
    pub fn monomial(field: Field, i: u64, j: u64) -> Self {
        Self::term(field.one(), i, j)
    }

    pub fn term(c: Scalar, i: u64, j: u64) -> Self {
        let mut e = Self::zero(c.field());
        add_into(&mut e.terms, (i, j), &c);
        e
    }

    /// `e_ij = y^{i-1}(1 - yx)x^{j-1}` for `i, j ≥ 1`.
    pub fn matrix_unit(field: Field, i: u64, j: u64) -> Self {
        assert!(i >= 1 && j >= 1, "matrix units are indexed from 1");
        Self::monomial(field, i - 1, j - 1).sub(&Self::monomial(field, i, j))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<(u64, u64), Scalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    fn check(&self, other: &Self) -> Result<(), JacError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(JacError::Mismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JacError> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            add_into(&mut out.terms, *k, c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, JacError> {
        self.check(other)?;
        let mut out = Self::zero(self.field);
        for ((i, j), a) in &self.terms {
            for ((k, l), b) in &other.terms {
                let key = (i + k.saturating_sub(*j), l + j.saturating_sub(*k));
                add_into(&mut out.terms, key, &(a * b));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("same field")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("same field")
    }

    pub fn neg(&self) -> Self {
        self.scale(&-self.field.one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.field);
        for (k, a) in &self.terms {
            add_into(&mut out.terms, *k, &(a * c));
        }
        out
    }

    pub fn pow(&self, n: u64) -> Self {
        (0..n).fold(Self::one(self.field), |acc, _| acc.mul(self))
    }

    /// The standard involution `x <-> y`, reversing products.
    pub fn star(&self) -> Self {
        JacobsonElement {
            field: self.field,
            terms: self.terms.iter().map(|((i, j), c)| ((*j, *i), c.clone())).collect(),
        }
    }

    /// The image in `F[t, t^-1]` under `y -> t`, `x -> t^-1`.
    pub fn quotient_laurent(&self) -> LaurentPoly {
        LaurentPoly::from_terms(
            self.field,
            self.terms
                .iter()
                .map(|((i, j), c)| (*i as i64 - *j as i64, c.clone())),
        )
    }

    /// The almost-Toeplitz matrix of the element. `y^i x^j` maps to
    /// `c^(j-i)` minus the units `e_{r, r+j-i}` with `r ≤ i`.
    pub fn to_matrix(&self) -> AlmostToeplitz {
        let mut m = AlmostToeplitz::zero(self.field);
        for ((i, j), c) in &self.terms {
            let k = *j as i64 - *i as i64;
            add_into(&mut m.band, k, c);
            for r in 1..=*i as i64 {
                if r + k >= 1 {
                    add_into(&mut m.finitary, (r as usize, (r + k) as usize), &-c);
                }
            }
        }
        m
    }

    /// Inverse of [`Self::to_matrix`]; every almost-Toeplitz matrix is the
    /// image of exactly one element.
    pub fn from_matrix(m: &AlmostToeplitz) -> Self {
        let f = m.field();
        let mut out = Self::zero(f);
        for (k, c) in &m.band {
            let (i, j) = if *k >= 0 { (0, *k as u64) } else { ((-k) as u64, 0) };
            out = out.add(&Self::term(c.clone(), i, j));
        }
        for ((i, j), c) in &m.finitary {
            out = out.add(&Self::matrix_unit(f, *i as u64, *j as u64).scale(c));
        }
        out
    }

    pub fn parse(text: &str, field: Field) -> Result<Self, JacError> {
        let e = expr::parse(text)?;
        Self::from_expr(&e, field)
    }

    fn from_expr(e: &Expr, field: Field) -> Result<Self, JacError> {
        Ok(match e {
            Expr::Scalar { text, .. } => Self::scalar(field.parse_scalar(text)?),
            Expr::Symbol { name, position } => {
                let mut acc = Self::one(field);
                for (k, ch) in name.chars().enumerate() {
                    let g = match ch {
                        'x' => Self::x(field),
                        'y' => Self::y(field),
                        _ => {
                            return Err(JacError::UnknownSymbol {
                                name: name.clone(),
                                position: position + k,
                            })
                        }
                    };
                    acc = acc.mul(&g);
                }
                acc
            }
            Expr::Star(x) => Self::from_expr(x, field)?.star(),
            Expr::Neg(x) => Self::from_expr(x, field)?.neg(),
            Expr::Sum(xs) => {
                let mut acc = Self::zero(field);
                for x in xs {
                    acc = acc.add(&Self::from_expr(x, field)?);
                }
                acc
            }
            Expr::Product(xs) => {
                let mut acc = Self::one(field);
                for x in xs {
                    acc = acc.mul(&Self::from_expr(x, field)?);
                }
                acc
            }
        })
    }

    fn display_order(&self) -> Vec<(&(u64, u64), &Scalar)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by_key(|((i, j), _)| (i + j, *i, *j));
        v
    }
}

fn word(i: u64, j: u64) -> Option<String> {
    if i == 0 && j == 0 {
        return None;
    }
    let mut letters = vec!["y"; i as usize];
    letters.extend(std::iter::repeat_n("x", j as usize));
    Some(letters.join(" "))
}

impl fmt::Display for JacobsonElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(f, self.display_order().into_iter(), |(i, j)| word(*i, *j))
    }
}

impl fmt::Debug for JacobsonElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses a Jacobson expression into normal form.
pub fn jac_normal_form(text: &str, field: Field) -> Result<JacobsonElement, JacError> {
    JacobsonElement::parse(text, field)
}

pub fn jac_matrix_unit(field: Field, i: u64, j: u64) -> JacobsonElement {
    JacobsonElement::matrix_unit(field, i, j)
}

/// The unexpanded word form `y^{i-1} (1 - y x) x^{j-1}` of `e_ij`.
pub fn matrix_unit_word(i: u64, j: u64) -> String {
    let mut parts = vec!["y"; i as usize - 1];
    parts.push("(1 - y x)");
    parts.extend(std::iter::repeat_n("x", j as usize - 1));
    parts.join(" ")
}

/// `F + Σ α_k c^(k)`: a finitary matrix plus finitely many constant
/// diagonals. Indices are 1-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlmostToeplitz {
    field: Field,
    band: BTreeMap<i64, Scalar>,
    finitary: BTreeMap<(usize, usize), Scalar>,
}

/// JSON form: `{"band": [[k, "c"]], "finitary": [[i, j, "c"]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatrixDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub band: Vec<(i64, String)>,
    #[serde(default)]
    pub finitary: Vec<(usize, usize, String)>,
}

impl AlmostToeplitz {
    pub fn zero(field: Field) -> Self {
        AlmostToeplitz {
            field,
            band: BTreeMap::new(),
            finitary: BTreeMap::new(),
        }
    }

    pub fn identity(field: Field) -> Self {
        Self::scalar_identity(field.one())
    }

    /// `c · Id`.
    pub fn scalar_identity(c: Scalar) -> Self {
        Self::band_matrix(c, 0)
    }

    /// `c · c^(k)`.
    pub fn band_matrix(c: Scalar, k: i64) -> Self {
        let mut m = Self::zero(c.field());
        add_into(&mut m.band, k, &c);
        m
    }

    /// `c · e_ij`.
    pub fn unit(c: Scalar, i: usize, j: usize) -> Self {
        assert!(i >= 1 && j >= 1, "matrix indices start at 1");
        let mut m = Self::zero(c.field());
        add_into(&mut m.finitary, (i, j), &c);
        m
    }

    pub fn from_parts(
        field: Field,
        band: impl IntoIterator<Item = (i64, Scalar)>,
        finitary: impl IntoIterator<Item = ((usize, usize), Scalar)>,
    ) -> Self {
        let mut m = Self::zero(field);
        for (k, c) in band {
            add_into(&mut m.band, k, &c);
        }
        for ((i, j), c) in finitary {
            assert!(i >= 1 && j >= 1, "matrix indices start at 1");
            add_into(&mut m.finitary, (i, j), &c);
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn band(&self) -> &BTreeMap<i64, Scalar> {
        &self.band
    }

    pub fn finitary(&self) -> &BTreeMap<(usize, usize), Scalar> {
        &self.finitary
    }

    pub fn band_coefficient(&self, k: i64) -> Scalar {
        self.band.get(&k).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// The matrix without its band part.
    pub fn finitary_part(&self) -> Self {
        AlmostToeplitz {
            field: self.field,
            band: BTreeMap::new(),
            finitary: self.finitary.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.band.is_empty() && self.finitary.is_empty()
    }

    pub fn is_finitary(&self) -> bool {
        self.band.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> Scalar {
        let b = self.band_coefficient(j as i64 - i as i64);
        match self.finitary.get(&(i, j)) {
            Some(c) => &b + c,
            None => b,
        }
    }

    /// Largest row or column index carrying a finitary entry.
    pub fn block_bound(&self) -> usize {
        self.finitary.keys().map(|(i, j)| *i.max(j)).max().unwrap_or(0)
    }

    /// Rows with a nonzero finitary entry.
    pub fn finitary_rows(&self) -> BTreeSet<usize> {
        self.finitary.keys().map(|(i, _)| *i).collect()
    }

    /// Columns with a nonzero finitary entry.
    pub fn finitary_columns(&self) -> BTreeSet<usize> {
        self.finitary.keys().map(|(_, j)| *j).collect()
    }

    fn check(&self, other: &Self) -> Result<(), JacError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(JacError::Mismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, JacError> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.band {
            add_into(&mut out.band, *k, c);
        }
        for (k, c) in &other.finitary {
            add_into(&mut out.finitary, *k, c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, JacError> {
        self.check(other)?;
        let mut out = Self::zero(self.field);
        // c^(a) c^(b) = c^(a+b) - Σ_{m=1..-a, m+a+b≥1} e_{m, m+a+b}
        for (a, x) in &self.band {
            for (b, y) in &other.band {
                let c = x * y;
                add_into(&mut out.band, a + b, &c);
                for m in 1..=(-a) {
                    let col = m + a + b;
                    if col >= 1 {
                        add_into(&mut out.finitary, (m as usize, col as usize), &-&c);
                    }
                }
            }
        }
        // e_ij c^(k) = e_{i, j+k}
        for ((i, j), x) in &self.finitary {
            for (k, y) in &other.band {
                let col = *j as i64 + k;
                if col >= 1 {
                    add_into(&mut out.finitary, (*i, col as usize), &(x * y));
                }
            }
        }
        // c^(k) e_ij = e_{i-k, j}
        for (k, x) in &self.band {
            for ((i, j), y) in &other.finitary {
                let row = *i as i64 - k;
                if row >= 1 {
                    add_into(&mut out.finitary, (row as usize, *j), &(x * y));
                }
            }
        }
        let mut rows: BTreeMap<usize, Vec<(usize, &Scalar)>> = BTreeMap::new();
        for ((k, j), y) in &other.finitary {
            rows.entry(*k).or_default().push((*j, y));
        }
        for ((i, k), x) in &self.finitary {
            for (j, y) in rows.get(k).into_iter().flatten() {
                add_into(&mut out.finitary, (*i, *j), &(x * *y));
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("same field")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("same field")
    }

    pub fn neg(&self) -> Self {
        self.scale(&-self.field.one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::from_parts(
            self.field,
            self.band.iter().map(|(k, x)| (*k, x * c)),
            self.finitary.iter().map(|(k, x)| (*k, x * c)),
        )
    }

    pub fn transpose(&self) -> Self {
        AlmostToeplitz {
            field: self.field,
            band: self.band.iter().map(|(k, c)| (-k, c.clone())).collect(),
            finitary: self.finitary.iter().map(|((i, j), c)| ((*j, *i), c.clone())).collect(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    /// The scalar `α` when the matrix is `α·Id + finitary` with `α ≠ 0`.
    pub fn diagonal_scalar(&self) -> Option<Scalar> {
        match self.band.iter().next() {
            Some((0, a)) if self.band.len() == 1 => Some(a.clone()),
            _ => None,
        }
    }

    /// The leading `n × n` block as a dense matrix.
    pub fn dense_block(&self, n: usize) -> Vec<Vec<Scalar>> {
        (1..=n)
            .map(|i| (1..=n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// `α·Id + finitary` built from a dense leading block.
    pub fn from_block(alpha: Scalar, block: &[Vec<Scalar>]) -> Self {
        let mut m = Self::scalar_identity(alpha.clone());
        for (i, row) in block.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let d = if i == j { c - &alpha } else { c.clone() };
                add_into(&mut m.finitary, (i + 1, j + 1), &d);
            }
        }
        m
    }

    /// Inverse of a matrix of the form `α·Id + finitary`, if it exists.
    pub fn try_inverse(&self) -> Option<Self> {
        let alpha = self.diagonal_scalar()?;
        let ainv = alpha.inv().ok()?;
        let n = self.block_bound();
        if n == 0 {
            return Some(Self::scalar_identity(ainv));
        }
        let inv = linalg::dense_inverse(self.field, &self.dense_block(n))?;
        Some(Self::from_block(ainv, &inv))
    }

    pub fn to_doc(&self) -> MatrixDoc {
        MatrixDoc {
            band: self.band.iter().map(|(k, c)| (*k, c.to_string())).collect(),
            finitary: self
                .finitary
                .iter()
                .map(|((i, j), c)| (*i, *j, c.to_string()))
                .collect(),
        }
    }

    pub fn from_doc(doc: &MatrixDoc, field: Field) -> Result<Self, JacError> {
        let mut band = Vec::new();
        for (k, c) in &doc.band {
            band.push((*k, field.parse_scalar(c)?));
        }
        let mut fin = Vec::new();
        for (i, j, c) in &doc.finitary {
            if *i == 0 || *j == 0 {
                return Err(JacError::BadMatrix(format!("index ({i}, {j}) is not positive")));
            }
            fin.push(((*i, *j), field.parse_scalar(c)?));
        }
        Ok(Self::from_parts(field, band, fin))
    }
}

impl fmt::Debug for AlmostToeplitz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(&self.to_doc()).expect("serializable"))
    }
}

impl fmt::Display for AlmostToeplitz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(String, &Scalar)> = self
            .band
            .iter()
            .map(|(k, c)| (format!("c^({k})"), c))
            .collect();
        parts.extend(self.finitary.iter().map(|((i, j), c)| (format!("e{i},{j}"), c)));
        write_sum(f, parts.iter().map(|(m, c)| (m, *c)), |m: &String| Some(m.clone()))
    }
}

fn require_quotient(name: &str, b: &JacobsonElement, exponent: i64) -> Result<(), JacError> {
    let q = b.quotient_laurent();
    let expected = LaurentPoly::monomial(b.field().one(), exponent);
    if q == expected {
        Ok(())
    } else {
        Err(JacError::QuotientMismatch {
            name: name.into(),
            expected: expected.to_string(),
            found: q.to_string(),
        })
    }
}

/// Which right ideal the descent is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowIdeal {
    /// Rows in `P(b)`.
    Rho,
    /// Rows up to `max P(b)`.
    RhoHat,
}

/// The orbit `a, ba, b^2 a, ...` measured against a row ideal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentTrace {
    /// `P(b)`: rows of the finitary part of `b`.
    pub p: Vec<usize>,
    pub ideal: RowIdeal,
    /// `|b^k a|` for `k = 0, 1, ...` until the first member of the ideal.
    pub measures: Vec<usize>,
    /// First `k` with `b^k a` in the ideal, if reached within the search.
    pub n_a: Option<usize>,
    /// The measures decrease strictly until membership.
    pub strictly_decreasing: bool,
    /// `b^k a` stays in the ideal for `N(a) ≤ k ≤ N(a) + 5`.
    pub persistent: bool,
}

fn row_measure(a: &AlmostToeplitz, allowed: &dyn Fn(usize) -> bool) -> Option<usize> {
    a.finitary_rows().into_iter().filter(|i| !allowed(*i)).max()
}

/// Iterates `a -> b a` for `b` with quotient image `t^-1` and a finitary
/// `a`, recording the largest row outside the chosen ideal.
pub fn descent_measure(
    a: &JacobsonElement,
    b: &JacobsonElement,
    ideal: RowIdeal,
) -> Result<DescentTrace, JacError> {
    a.check(b)?;
    require_quotient("b", b, -1)?;
    if !a.quotient_laurent().is_zero() {
        return Err(JacError::NotFinitary);
    }
    let bm = b.to_matrix();
    let p: BTreeSet<usize> = bm.finitary_rows();
    let hat = p.iter().max().copied().unwrap_or(0);
    let allowed = |i: usize| match ideal {
        RowIdeal::Rho => p.contains(&i),
        RowIdeal::RhoHat => i <= hat,
    };
    let mut cur = a.to_matrix();
    let start = row_measure(&cur, &allowed).unwrap_or(0);
    let limit = start + hat + 10;
    let mut measures = Vec::new();
    let mut n_a = None;
    for k in 0..=limit {
        match row_measure(&cur, &allowed) {
            None => {
                n_a = Some(k);
                break;
            }
            Some(m) => measures.push(m),
        }
        cur = bm.mul(&cur);
    }
    let strictly_decreasing = measures.windows(2).all(|w| w[1] < w[0]);
    let persistent = match n_a {
        None => false,
        Some(_) => (0..=5).all(|_| {
            let ok = row_measure(&cur, &allowed).is_none();
            cur = bm.mul(&cur);
            ok
        }),
    };
    Ok(DescentTrace {
        p: p.into_iter().collect(),
        ideal,
        measures,
        n_a,
        strictly_decreasing,
        persistent,
    })
}

/// `dim span{(1 - yx) w : w a word in x, y of length ≤ n}`.
pub fn corner_dimension(field: Field, n: u64) -> usize {
    let e11 = JacobsonElement::matrix_unit(field, 1, 1);
    let mut ech: EchelonBasis<(u64, u64)> = EchelonBasis::new(field);
    for d in 0..=n {
        for i in 0..=d {
            let v = e11.mul(&JacobsonElement::monomial(field, i, d - i));
            ech.insert(v.terms.clone());
        }
    }
    ech.rank()
}

/// The contradiction found by [`splitting_probe`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SplittingWitness {
    /// `b1 bm1 ≠ b0`: the candidates do not multiply like `t^-1 · t = 1`.
    ClosureFailure { defect: String },
    /// The corner `(1 - yx)A` outgrows the finite bound `dim ρ∩σ`.
    CornerGrowth { bound: usize, dimension: usize },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutationCertificate {
    pub n: u64,
    pub b1: String,
    pub bm1: String,
    pub b0: String,
    pub closure_holds: bool,
    /// `b1 bm1 - b0`.
    pub forward_defect: String,
    /// Further relations a lift of `F[t, t^-1]` would satisfy, by name.
    pub defects: BTreeMap<String, String>,
    /// Rows of `x - b1`.
    pub p_b1: Vec<usize>,
    /// Columns of `y - bm1`.
    pub p_bm1: Vec<usize>,
    pub rho_sigma_dim: usize,
    /// `corner_dims[k] = dim (1 - yx) A_{≤k}`.
    pub corner_dims: Vec<usize>,
    /// `ab_dims[k] = dim e11 B^(k)`, words in `b1, bm1` of length ≤ k.
    pub ab_dims: Vec<usize>,
    pub witness: SplittingWitness,
}

/// Tests candidate lifts `b1, bm1, b0` of `t^-1, t, 1` against the
/// obstructions to a splitting of `0 -> I -> A -> F[t, t^-1] -> 0`.
pub fn splitting_probe(
    b1: &JacobsonElement,
    bm1: &JacobsonElement,
    b0: &JacobsonElement,
    n: u64,
) -> Result<RefutationCertificate, JacError> {
    b1.check(bm1)?;
    b1.check(b0)?;
    require_quotient("b1", b1, -1)?;
    require_quotient("bm1", bm1, 1)?;
    require_quotient("b0", b0, 0)?;
    let f = b1.field();
    let forward = b1.mul(bm1).sub(b0);
    let mut defects = BTreeMap::new();
    let rel = [
        ("bm1 b1 - b0", bm1.mul(b1).sub(b0)),
        ("b0 b0 - b0", b0.mul(b0).sub(b0)),
        ("b0 b1 - b1", b0.mul(b1).sub(b1)),
        ("b1 b0 - b1", b1.mul(b0).sub(b1)),
        ("b0 bm1 - bm1", b0.mul(bm1).sub(bm1)),
        ("bm1 b0 - bm1", bm1.mul(b0).sub(bm1)),
    ];
    for (name, d) in rel {
        defects.insert(name.to_string(), d.to_string());
    }
    let p_b1: Vec<usize> = JacobsonElement::x(f).sub(b1).to_matrix().finitary_rows().into_iter().collect();
    let p_bm1: Vec<usize> = JacobsonElement::y(f)
        .sub(bm1)
        .to_matrix()
        .finitary_columns()
        .into_iter()
        .collect();
    let rho_sigma_dim = p_b1.len() * p_bm1.len();
    let corner_dims: Vec<usize> = (0..=n).map(|k| corner_dimension(f, k)).collect();

    let e11 = JacobsonElement::matrix_unit(f, 1, 1);
    let mut ech: EchelonBasis<(u64, u64)> = EchelonBasis::new(f);
    ech.insert(e11.terms.clone());
    let mut fresh = vec![e11];
    let mut ab_dims = vec![ech.rank()];
    for _ in 0..n {
        let mut next = Vec::new();
        for u in &fresh {
            for b in [b1, bm1] {
                let v = u.mul(b);
                if !v.is_zero() && ech.insert(v.terms.clone()) {
                    next.push(v);
                }
            }
        }
        ab_dims.push(ech.rank());
        fresh = next;
    }

    let closure_holds = forward.is_zero();
    let dimension = *corner_dims.last().expect("n + 1 entries");
    let witness = if !closure_holds {
        SplittingWitness::ClosureFailure {
            defect: forward.to_string(),
        }
    } else if dimension > rho_sigma_dim {
        SplittingWitness::CornerGrowth {
            bound: rho_sigma_dim,
            dimension,
        }
    } else {
        SplittingWitness::Inconclusive
    };
    Ok(RefutationCertificate {
        n,
        b1: b1.to_string(),
        bm1: bm1.to_string(),
        b0: b0.to_string(),
        closure_holds,
        forward_defect: forward.to_string(),
        defects,
        p_b1,
        p_bm1,
        rho_sigma_dim,
        corner_dims,
        ab_dims,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rationals
    }

    fn jac(s: &str) -> JacobsonElement {
        JacobsonElement::parse(s, q()).unwrap()
    }

    fn e(i: u64, j: u64) -> JacobsonElement {
        JacobsonElement::matrix_unit(q(), i, j)
    }

    #[test]
    fn normal_form_examples() {
        assert_eq!(jac("xy"), JacobsonElement::one(q()));
        assert_eq!(jac("yx"), JacobsonElement::monomial(q(), 1, 1));
        assert_eq!(jac("xyx"), JacobsonElement::x(q()));
        assert_eq!(jac("x y").to_string(), "1");
        assert_eq!(jac("y y x + 2 (1 - y x)").to_string(), "2 - 2 y x + y y x");
        assert!(matches!(
            JacobsonElement::parse("x z", q()),
            Err(JacError::UnknownSymbol { position: 2, .. })
        ));
        assert!(matches!(JacobsonElement::parse("x +", q()), Err(JacError::Syntax(_))));
    }

    #[test]
    fn matrix_unit_examples() {
        assert_eq!(e(1, 1), jac("1 - y x"));
        assert_eq!(e(1, 2).mul(&e(2, 1)), e(1, 1));
        assert!(e(1, 2).mul(&e(1, 2)).is_zero());
        assert_eq!(matrix_unit_word(2, 3), "y (1 - y x) x x");
        assert_eq!(e(2, 3).to_string(), "y x x - y y x x x");
        let x = JacobsonElement::x(q());
        let y = JacobsonElement::y(q());
        assert!(x.mul(&e(1, 1)).is_zero());
        assert!(e(1, 1).mul(&y).is_zero());
        assert_eq!(x.mul(&e(3, 5)), e(2, 5));
    }

    #[test]
    fn matrix_examples() {
        let y = JacobsonElement::y(q()).to_matrix();
        assert_eq!(y, AlmostToeplitz::band_matrix(q().one(), -1));
        assert_eq!(e(1, 1).to_matrix(), AlmostToeplitz::unit(q().one(), 1, 1));
        assert_eq!(jac("x y").to_matrix(), AlmostToeplitz::identity(q()));
        let c = AlmostToeplitz::band_matrix(q().one(), -1);
        assert_eq!(c.mul(&c.transpose()), AlmostToeplitz::identity(q()).sub(&e(1, 1).to_matrix()));
        assert_eq!(e(4, 2).to_matrix(), AlmostToeplitz::unit(q().one(), 4, 2));
    }

    #[test]
    fn quotient_examples() {
        let t = |k| LaurentPoly::monomial(q().one(), k);
        assert_eq!(jac("y y").quotient_laurent(), t(2));
        assert!(e(1, 1).quotient_laurent().is_zero());
        assert_eq!(
            jac("3 + y + x").quotient_laurent(),
            LaurentPoly::monomial(q().from_i64(3), 0).add(&t(1)).add(&t(-1))
        );
    }

    #[test]
    fn from_matrix_inverts_to_matrix() {
        for s in ["0", "1", "y y x + 2 (1 - y x)", "x x x - 3 y", "y y y x x - y x x x"] {
            let a = jac(s);
            assert_eq!(JacobsonElement::from_matrix(&a.to_matrix()), a, "{s}");
        }
    }

    #[test]
    fn inverse_of_identity_plus_finitary() {
        let g = AlmostToeplitz::identity(q()).add(&AlmostToeplitz::unit(q().one(), 1, 2));
        let h = g.try_inverse().unwrap();
        assert_eq!(g.mul(&h), AlmostToeplitz::identity(q()));
        assert_eq!(h, AlmostToeplitz::identity(q()).sub(&AlmostToeplitz::unit(q().one(), 1, 2)));
        assert!(AlmostToeplitz::band_matrix(q().one(), 1).try_inverse().is_none());
    }

    #[test]
    fn descent_examples() {
        let x = JacobsonElement::x(q());
        let t = descent_measure(&e(3, 5), &x, RowIdeal::Rho).unwrap();
        assert_eq!((t.measures.clone(), t.n_a), (vec![3, 2, 1], Some(3)));
        assert!(t.strictly_decreasing && t.persistent);
        let t = descent_measure(&e(1, 1), &x, RowIdeal::Rho).unwrap();
        assert_eq!(t.n_a, Some(1));
        let b = x.add(&e(1, 1));
        let t = descent_measure(&e(2, 2), &b, RowIdeal::Rho).unwrap();
        assert_eq!(t.p, vec![1]);
        assert!(t.n_a.unwrap() <= 2 && t.strictly_decreasing);
        assert!(matches!(
            descent_measure(&e(1, 1), &JacobsonElement::y(q()), RowIdeal::Rho),
            Err(JacError::QuotientMismatch { .. })
        ));
        assert_eq!(
            descent_measure(&x, &x, RowIdeal::Rho).unwrap_err(),
            JacError::NotFinitary
        );
    }

    #[test]
    fn descent_with_gap_in_rows() {
        // P(b) = {2}: e31 enters ρ after one step, but b e21 = e11 + e21
        // leaves it again and the orbit stays at e11 + e21.
        let b = JacobsonElement::x(q()).add(&e(2, 2));
        let t = descent_measure(&e(3, 1), &b, RowIdeal::Rho).unwrap();
        assert_eq!((t.measures.clone(), t.n_a), (vec![3], Some(1)));
        assert!(!t.persistent);
        assert_eq!(b.pow(3).mul(&e(2, 1)), e(1, 1).add(&e(2, 1)));
        let hat = descent_measure(&e(3, 1), &b, RowIdeal::RhoHat).unwrap();
        assert_eq!(hat.n_a, Some(1));
        assert!(hat.persistent);
        // rows inside P shift out of it: P = {5}, |e51 + e21| = 2, |b a| = 4
        let b = JacobsonElement::x(q()).add(&e(5, 5));
        let a = e(5, 1).add(&e(2, 1));
        let t = descent_measure(&a, &b, RowIdeal::Rho).unwrap();
        assert_eq!(&t.measures[..2], &[2, 4]);
        assert!(!t.strictly_decreasing);
        let hat = descent_measure(&a, &b, RowIdeal::RhoHat).unwrap();
        assert!(hat.strictly_decreasing && hat.persistent);
    }

    #[test]
    fn corner_examples() {
        assert_eq!(corner_dimension(q(), 0), 1);
        assert_eq!(corner_dimension(q(), 5), 6);
        assert_eq!(corner_dimension(q(), 20), 21);
    }

    #[test]
    fn probe_examples() {
        let c = splitting_probe(&jac("x"), &jac("y"), &jac("1"), 8).unwrap();
        assert!(c.closure_holds);
        assert_eq!(c.rho_sigma_dim, 0);
        assert_eq!(c.corner_dims.last(), Some(&9));
        assert_eq!(c.witness, SplittingWitness::CornerGrowth { bound: 0, dimension: 9 });
        let c2 = splitting_probe(
            &jac("x").add(&e(1, 2)),
            &jac("y").add(&e(2, 1)),
            &jac("1").add(&e(1, 1).scale(&q().from_i64(3))),
            8,
        )
        .unwrap();
        assert!(c2.closure_holds);
        assert_eq!((c2.p_b1.clone(), c2.p_bm1.clone(), c2.rho_sigma_dim), (vec![1], vec![1], 1));
        assert!(matches!(c2.witness, SplittingWitness::CornerGrowth { bound: 1, dimension: 9 }));
        let bad = splitting_probe(&jac("x"), &jac("y"), &jac("1").add(&e(1, 1)), 3).unwrap();
        assert!(matches!(bad.witness, SplittingWitness::ClosureFailure { .. }));
        assert!(matches!(
            splitting_probe(&jac("y"), &jac("y"), &jac("1"), 3),
            Err(JacError::QuotientMismatch { .. })
        ));
    }

    #[test]
    fn matrix_doc_round_trip() {
        let m = jac("y y x + 2 (1 - y x) - x").to_matrix();
        let doc = m.to_doc();
        let text = serde_json::to_string(&doc).unwrap();
        let back: MatrixDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(AlmostToeplitz::from_doc(&back, q()).unwrap(), m);
        let only_fin: MatrixDoc = serde_json::from_str(r#"{"finitary":[[1,2,"1"]]}"#).unwrap();
        assert_eq!(
            AlmostToeplitz::from_doc(&only_fin, q()).unwrap(),
            AlmostToeplitz::unit(q().one(), 1, 2)
        );
    }
}
