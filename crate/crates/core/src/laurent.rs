//! Laurent polynomials `F[t, t^-1]`, finite matrices over them, and the
//! isomorphism `L(C) ≅ M_d(F[t, t^-1])` for a cycle `C` without exits.
//!
//! Number the cycle vertices `v_1, ..., v_d` starting from the base vertex
//! and let `π_i` be the on-cycle path `v_1 -> v_i`. A path `p` on the cycle
//! satisfies `π_{i} p = c^{n_p} π_{k}` for `i = index(s(p))`,
//! `k = index(r(p))` and the full cycle `c` at `v_1`; the isomorphism sends
//! `p q*` to `t^{n_p - n_q} e_{index(s(p)), index(s(q))}`.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value;
use thiserror::Error;

use crate::field::{Field, Scalar};
use crate::graph::{Cycle, EdgeId, Graph, Path, VertexId};
use crate::rewrite::{AlgebraElement, LeavittAlgebra, Monomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("operands are over different fields")]
    Mismatch,
    #[error("matrix sizes differ: {left} and {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("path `{0}` does not lie on the cycle")]
    PathNotOnCycle(String),
    #[error("paths `{0}` and `{1}` end at different vertices")]
    EndpointMismatch(String, String),
    #[error("cycle ({0}) has exits")]
    NotNECycle(String),
}

/// A finite sum `Σ a_k t^k` with exact coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    field: Field,
    coeffs: BTreeMap<i64, Scalar>,
}

impl LaurentPoly {
    pub fn zero(field: Field) -> Self {
        LaurentPoly {
            field,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(field: Field) -> Self {
        Self::monomial(field.one(), 0)
    }

    /// `t` itself.
    pub fn t(field: Field) -> Self {
        Self::monomial(field.one(), 1)
    }

    /// `c t^k`.
    pub fn monomial(c: Scalar, k: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        let field = c.field();
        if !c.is_zero() {
            coeffs.insert(k, c);
        }
        LaurentPoly { field, coeffs }
    }

    pub fn from_terms(field: Field, terms: impl IntoIterator<Item = (i64, Scalar)>) -> Self {
        let mut p = Self::zero(field);
        for (k, c) in terms {
            p.add_term(k, &c);
        }
        p
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<i64, Scalar> {
        &self.coeffs
    }

    pub fn coefficient(&self, k: i64) -> Scalar {
        self.coeffs.get(&k).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Units of `F[t, t^-1]` are exactly the nonzero monomials.
    pub fn is_unit(&self) -> bool {
        self.coeffs.len() == 1
    }

    fn add_term(&mut self, k: i64, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let sum = match self.coeffs.get(&k) {
            Some(x) => x + c,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, sum);
        }
    }

    fn check(&self, other: &Self) -> Result<(), LaurentError> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(LaurentError::Mismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(*k, c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check(other)?;
        let mut out = Self::zero(self.field);
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                out.add_term(a + b, &(x * y));
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
        Self::from_terms(self.field, self.coeffs.iter().map(|(k, x)| (*k, x * c)))
    }

    /// The substitution `t -> t^-1`.
    pub fn bar(&self) -> Self {
        LaurentPoly {
            field: self.field,
            coeffs: self.coeffs.iter().map(|(k, c)| (-k, c.clone())).collect(),
        }
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.coeffs.iter().enumerate() {
            let (neg, abs) = if c.is_negative() {
                (true, -c)
            } else {
                (false, c.clone())
            };
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let coef = abs.to_string();
            let coef = if coef.contains('+') || coef.contains('x') {
                format!("[{coef}]")
            } else {
                coef
            };
            match (*k, abs.is_one()) {
                (0, _) => write!(f, "{coef}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{coef}t")?,
                (k, true) => write!(f, "t^{k}")?,
                (k, false) => write!(f, "{coef}t^{k}")?,
            }
        }
        Ok(())
    }
}

/// A `d × d` matrix over `F[t, t^-1]`, stored sparsely with 1-based indices.
#[derive(Clone, PartialEq, Eq)]
pub struct LaurentMatrix {
    field: Field,
    d: usize,
    entries: BTreeMap<(usize, usize), LaurentPoly>,
}

impl LaurentMatrix {
    pub fn zero(field: Field, d: usize) -> Self {
        assert!(d >= 1, "matrix size must be positive");
        LaurentMatrix {
            field,
            d,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(field: Field, d: usize) -> Self {
        let mut m = Self::zero(field, d);
        for i in 1..=d {
            m.set(i, i, LaurentPoly::one(field));
        }
        m
    }

    /// `p · e_ij`.
    pub fn unit(d: usize, i: usize, j: usize, p: LaurentPoly) -> Self {
        let mut m = Self::zero(p.field(), d);
        m.set(i, j, p);
        m
    }

    pub fn size(&self) -> usize {
        self.d
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> LaurentPoly {
        self.entries
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| LaurentPoly::zero(self.field))
    }

    pub fn set(&mut self, i: usize, j: usize, p: LaurentPoly) {
        assert!((1..=self.d).contains(&i) && (1..=self.d).contains(&j), "index out of range");
        if p.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), p);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn check(&self, other: &Self) -> Result<(), LaurentError> {
        if self.field != other.field {
            return Err(LaurentError::Mismatch);
        }
        if self.d != other.d {
            return Err(LaurentError::SizeMismatch {
                left: self.d,
                right: other.d,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check(other)?;
        let mut out = self.clone();
        for ((i, j), p) in &other.entries {
            let s = out.get(*i, *j).add(p);
            out.set(*i, *j, s);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check(other)?;
        let mut rows: BTreeMap<usize, Vec<(usize, &LaurentPoly)>> = BTreeMap::new();
        for ((k, j), p) in &other.entries {
            rows.entry(*k).or_default().push((*j, p));
        }
        let mut out = Self::zero(self.field, self.d);
        for ((i, k), a) in &self.entries {
            for (j, b) in rows.get(k).into_iter().flatten() {
                let s = out.get(*i, *j).add(&a.mul(b));
                out.set(*i, *j, s);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("compatible matrices")
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("compatible matrices")
    }

    /// Transpose combined with `t -> t^-1` on every entry.
    pub fn conjugate_transpose(&self) -> Self {
        let mut out = Self::zero(self.field, self.d);
        for ((i, j), p) in &self.entries {
            out.set(*j, *i, p.bar());
        }
        out
    }

    /// Row-major nested arrays of printed polynomials.
    pub fn to_json(&self) -> Value {
        Value::Array(
            (1..=self.d)
                .map(|i| {
                    Value::Array(
                        (1..=self.d)
                            .map(|j| Value::String(self.get(i, j).to_string()))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

impl fmt::Debug for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

/// The isomorphism between the cycle subalgebra `L(C)` and
/// `M_d(F[t, t^-1])`.
#[derive(Debug, Clone)]
pub struct CycleIso {
    cycle: Cycle,
    field: Field,
    index: BTreeMap<VertexId, usize>,
    edges: Vec<EdgeId>,
}

/// The image `t^exponent e_{row, col}` of a monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleImage {
    pub row: usize,
    pub col: usize,
    pub exponent: i64,
}

impl CycleImage {
    pub fn matrix(&self, field: Field, d: usize) -> LaurentMatrix {
        LaurentMatrix::unit(d, self.row, self.col, LaurentPoly::monomial(field.one(), self.exponent))
    }
}

impl CycleIso {
    pub fn new(g: &Graph, cycle: &Cycle, field: Field) -> Self {
        let index = cycle
            .vertices(g)
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, i + 1))
            .collect();
        CycleIso {
            cycle: cycle.clone(),
            field,
            index,
            edges: cycle.edges().to_vec(),
        }
    }

    pub fn size(&self) -> usize {
        self.cycle.len()
    }

    pub fn cycle(&self) -> &Cycle {
        &self.cycle
    }

    fn vertex_index(&self, g: &Graph, p: &Path) -> Result<(usize, usize), LaurentError> {
        let on = |v: VertexId| self.index.get(&v).copied();
        if p.edges.iter().any(|e| !self.edges.contains(e)) {
            return Err(LaurentError::PathNotOnCycle(p.display(g)));
        }
        match (on(p.source()), on(p.range(g))) {
            (Some(i), Some(k)) => Ok((i, k)),
            _ => Err(LaurentError::PathNotOnCycle(p.display(g))),
        }
    }

    /// The winding number `n_p` with `π_{s(p)} p = c^{n_p} π_{r(p)}`.
    pub fn winding(&self, g: &Graph, p: &Path) -> Result<i64, LaurentError> {
        let (i, k) = self.vertex_index(g, p)?;
        let d = self.size() as i64;
        let total = (i as i64 - 1) + p.len() as i64 - (k as i64 - 1);
        assert_eq!(total.rem_euclid(d), 0, "on-cycle path length is consistent with its endpoints");
        Ok(total / d)
    }

    pub fn image(&self, g: &Graph, p: &Path, q: &Path) -> Result<CycleImage, LaurentError> {
        let (i, k) = self.vertex_index(g, p)?;
        let (j, l) = self.vertex_index(g, q)?;
        if k != l {
            return Err(LaurentError::EndpointMismatch(p.display(g), q.display(g)));
        }
        Ok(CycleImage {
            row: i,
            col: j,
            exponent: self.winding(g, p)? - self.winding(g, q)?,
        })
    }

    pub fn monomial_image(&self, g: &Graph, m: &Monomial) -> Result<CycleImage, LaurentError> {
        self.image(g, &m.p_path(g), &m.q_path(g))
    }

    /// The image of an element of `L(C)` (all of its monomials on `C`).
    pub fn element_image(&self, x: &AlgebraElement) -> Result<LaurentMatrix, LaurentError> {
        let g = x.algebra().graph();
        let mut out = LaurentMatrix::zero(self.field, self.size());
        for (m, c) in x.terms() {
            let im = self.monomial_image(g, m)?;
            let s = out
                .get(im.row, im.col)
                .add(&LaurentPoly::monomial(c.clone(), im.exponent));
            out.set(im.row, im.col, s);
        }
        Ok(out)
    }

    /// The on-cycle path `v_i -> v_d`; the monomials `ρ_i ρ_j*` map to the
    /// matrix units `e_ij`.
    pub fn unit_path(&self, i: usize) -> Path {
        let d = self.size();
        let base = self.edges_from(i);
        Path {
            base: self.vertex_at(i),
            edges: base[..d - i].to_vec(),
        }
    }

    fn vertex_at(&self, i: usize) -> VertexId {
        *self
            .index
            .iter()
            .find(|(_, k)| **k == i)
            .expect("index in range")
            .0
    }

    /// Cycle edges starting at `v_i`, once around.
    fn edges_from(&self, i: usize) -> Vec<EdgeId> {
        let mut out = self.edges[i - 1..].to_vec();
        out.extend_from_slice(&self.edges[..i - 1]);
        out
    }

    /// All on-cycle paths of length at most `maxlen`.
    pub fn paths(&self, maxlen: usize) -> Vec<Path> {
        let d = self.size();
        let mut out = Vec::new();
        for i in 1..=d {
            let around = self.edges_from(i);
            for len in 0..=maxlen {
                out.push(Path {
                    base: self.vertex_at(i),
                    edges: (0..len).map(|k| around[k % d]).collect(),
                });
            }
        }
        out
    }
}

pub fn cycle_iso_image(g: &Graph, p: &Path, q: &Path, cycle: &Cycle, field: Field) -> Result<(usize, usize, LaurentPoly), LaurentError> {
    let im = CycleIso::new(g, cycle, field).image(g, p, q)?;
    Ok((im.row, im.col, LaurentPoly::monomial(field.one(), im.exponent)))
}

/// Outcome of an exhaustive multiplicativity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IsoVerification {
    pub pairs: usize,
    pub failures: usize,
}

impl IsoVerification {
    pub fn holds(&self) -> bool {
        self.failures == 0
    }
}

/// Checks `φ(m1 m2) = φ(m1) φ(m2)` for all on-cycle monomials `p q*` with
/// `|p|, |q| ≤ maxlen`, the left side computed by the rewriting engine.
pub fn verify_cycle_iso(alg: &LeavittAlgebra, cycle: &Cycle, maxlen: usize) -> Result<IsoVerification, LaurentError> {
    let g = alg.graph();
    let a = g.analyze();
    let is_ne = a
        .cycles
        .iter()
        .zip(&a.exits)
        .any(|(c, ex)| c == cycle && ex.is_empty());
    if !is_ne {
        return Err(LaurentError::NotNECycle(cycle.display(g)));
    }
    let iso = CycleIso::new(g, cycle, alg.field());
    let d = iso.size();
    let paths = iso.paths(maxlen);
    let mut monomials = Vec::new();
    for p in &paths {
        for q in &paths {
            if p.range(g) == q.range(g) {
                let img = iso.image(g, p, q)?.matrix(alg.field(), d);
                let elt = alg.pq_star(p, q).expect("same range");
                monomials.push((elt, img));
            }
        }
    }
    let mut failures = 0;
    let mut pairs = 0;
    for (x, fx) in &monomials {
        for (y, fy) in &monomials {
            pairs += 1;
            if iso.element_image(&x.mul(y))? != fx.mul(fy) {
                failures += 1;
            }
        }
    }
    Ok(IsoVerification { pairs, failures })
}
