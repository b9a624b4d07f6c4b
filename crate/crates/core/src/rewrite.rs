//! Exact arithmetic in the Leavitt path algebra L(G) of a finite graph.
//!
//! Elements are linear combinations of normal monomials `p q*` where `p` and
//! `q` are paths with the same range. For every non-sink vertex `v` the
//! special edge `γ_v` is its first out-edge in document order, and the
//! relation `v = Σ_{s(e)=v} e e*` is oriented as
//!
//! ```text
//! γ_v γ_v*  ->  v - Σ_{s(f)=v, f≠γ_v} f f*
//! ```
//!
//! A monomial is normal unless `p` and `q` end with the same special edge.
//! Normal monomials form a basis, and every product reduces to a unique
//! combination of them.
//!
//! Two independent reduction routes are provided: multiplication of normal
//! monomials ([`Strategy::Multiply`]) and rewriting of generator words with
//! a chosen redex order ([`Strategy::Leftmost`], [`Strategy::Rightmost`],
//! [`Strategy::Random`]). They agree on every input; tests use one as an
//! oracle for the other.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use thiserror::Error;

use crate::expr::{self, Expr, ParseError};
use crate::field::{Field, FieldError, Scalar};
use crate::graph::{EdgeId, Graph, Path, VertexId};
use crate::linalg::{self, EchelonBasis, SparseVec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error(transparent)]
    Syntax(#[from] ParseError),
    #[error("unknown identifier `{name}` at {position}")]
    UnknownId { name: String, position: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("elements belong to different algebras")]
    Mismatch,
    #[error("paths end at different vertices")]
    RangeMismatch,
}

/// A generator of L(G): a vertex, an edge, or a ghost edge `e*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    Vertex(VertexId),
    Edge(EdgeId),
    Ghost(EdgeId),
}

/// The monomial `p q*` with `r(p) = r(q) = range`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub p: Vec<EdgeId>,
    pub q: Vec<EdgeId>,
    pub range: VertexId,
}

impl Monomial {
    pub fn vertex(v: VertexId) -> Self {
        Monomial {
            p: Vec::new(),
            q: Vec::new(),
            range: v,
        }
    }

    pub fn degree(&self) -> usize {
        self.p.len() + self.q.len()
    }

    pub fn p_path(&self, g: &Graph) -> Path {
        path_of(g, &self.p, self.range)
    }

    pub fn q_path(&self, g: &Graph) -> Path {
        path_of(g, &self.q, self.range)
    }

    pub fn is_normal(&self, g: &Graph) -> bool {
        match (self.p.last(), self.q.last()) {
            (Some(a), Some(b)) => a != b || !g.is_special(*a),
            _ => true,
        }
    }

    pub fn star(&self) -> Monomial {
        Monomial {
            p: self.q.clone(),
            q: self.p.clone(),
            range: self.range,
        }
    }

    fn order_key(&self) -> (usize, impl Iterator<Item = &EdgeId>, usize, VertexId) {
        (
            self.degree(),
            self.p.iter().chain(self.q.iter()),
            self.p.len(),
            self.range,
        )
    }

    pub fn display(&self, g: &Graph) -> String {
        if self.p.is_empty() && self.q.is_empty() {
            return g.vertex_name(self.range).to_string();
        }
        let mut parts: Vec<String> = self.p.iter().map(|e| g.edge(*e).id.clone()).collect();
        parts.extend(self.q.iter().rev().map(|e| format!("{}'", g.edge(*e).id)));
        parts.join(" ")
    }
}

fn path_of(g: &Graph, edges: &[EdgeId], range: VertexId) -> Path {
    match edges.first() {
        None => Path::trivial(range),
        Some(e) => Path {
            base: g.edge(*e).source,
            edges: edges.to_vec(),
        },
    }
}

/// Degree first, then the concatenated edge sequence of `p` and `q`, then
/// longer `p` first.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (da, ea, la, ra) = self.order_key();
        let (db, eb, lb, rb) = other.order_key();
        da.cmp(&db)
            .then_with(|| ea.cmp(eb))
            .then_with(|| lb.cmp(&la))
            .then_with(|| ra.cmp(&rb))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reduction route used by [`LeavittAlgebra::normal_form`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Evaluate with normal-monomial multiplication.
    Multiply,
    /// Word rewriting, always reducing the leftmost redex.
    Leftmost,
    /// Word rewriting, always reducing the rightmost redex.
    Rightmost,
    /// Word rewriting with redexes picked by a seeded generator.
    Random(u64),
}

/// An unevaluated formal expression over the generators.
#[derive(Debug, Clone)]
pub enum RawTerm {
    Scalar(Scalar),
    Gen(Generator),
    Element(AlgebraElement),
    Star(Box<RawTerm>),
    Sum(Vec<RawTerm>),
    Product(Vec<RawTerm>),
}

impl RawTerm {
    pub fn word(gens: &[Generator]) -> RawTerm {
        RawTerm::Product(gens.iter().map(|g| RawTerm::Gen(*g)).collect())
    }

    pub fn sub(a: RawTerm, b: RawTerm, field: Field) -> RawTerm {
        RawTerm::Sum(vec![
            a,
            RawTerm::Product(vec![RawTerm::Scalar(-field.one()), b]),
        ])
    }
}

struct Inner {
    graph: Graph,
    field: Field,
}

/// L(G) over a field: a cheap, shareable handle.
#[derive(Clone)]
pub struct LeavittAlgebra(Arc<Inner>);

impl fmt::Debug for LeavittAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({}) over {}", self.0.graph, self.0.field)
    }
}

impl PartialEq for LeavittAlgebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.field == other.0.field && self.0.graph == other.0.graph)
    }
}

impl Eq for LeavittAlgebra {}

#[derive(Clone)]
enum Replacement {
    Zero,
    Word(Vec<Generator>),
    Sum(Vec<(bool, Vec<Generator>)>),
}

const WORD_STEP_CAP: usize = 1_000_000;

impl LeavittAlgebra {
    pub fn new(graph: Graph, field: Field) -> Self {
        LeavittAlgebra(Arc::new(Inner { graph, field }))
    }

    pub fn graph(&self) -> &Graph {
        &self.0.graph
    }

    pub fn field(&self) -> Field {
        self.0.field
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement {
            alg: self.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The identity, the sum of all vertices.
    pub fn one(&self) -> AlgebraElement {
        let terms = self
            .graph()
            .vertex_ids()
            .map(|v| (Monomial::vertex(v), self.field().one()))
            .collect();
        AlgebraElement {
            alg: self.clone(),
            terms,
        }
    }

    pub fn scalar(&self, c: Scalar) -> AlgebraElement {
        self.one().scale(&c)
    }

    pub fn monomial(&self, m: Monomial) -> AlgebraElement {
        let mut out = BTreeMap::new();
        self.reduce_into(m.p, m.q, m.range, &self.field().one(), &mut out);
        AlgebraElement {
            alg: self.clone(),
            terms: out,
        }
    }

    pub fn generator(&self, g: Generator) -> AlgebraElement {
        let gr = self.graph();
        self.monomial(match g {
            Generator::Vertex(v) => Monomial::vertex(v),
            Generator::Edge(e) => Monomial {
                p: vec![e],
                q: Vec::new(),
                range: gr.edge(e).range,
            },
            Generator::Ghost(e) => Monomial {
                p: Vec::new(),
                q: vec![e],
                range: gr.edge(e).range,
            },
        })
    }

    pub fn generators(&self) -> Vec<Generator> {
        let g = self.graph();
        let mut out: Vec<Generator> = g.vertex_ids().map(Generator::Vertex).collect();
        out.extend(g.edge_ids().map(Generator::Edge));
        out.extend(g.edge_ids().map(Generator::Ghost));
        out
    }

    pub fn vertex(&self, name: &str) -> AlgebraElement {
        self.generator(Generator::Vertex(
            self.graph().find_vertex(name).expect("known vertex"),
        ))
    }

    pub fn edge(&self, name: &str) -> AlgebraElement {
        self.generator(Generator::Edge(
            self.graph().find_edge(name).expect("known edge"),
        ))
    }

    pub fn ghost(&self, name: &str) -> AlgebraElement {
        self.generator(Generator::Ghost(
            self.graph().find_edge(name).expect("known edge"),
        ))
    }

    /// `p q*` in normal form.
    pub fn pq_star(&self, p: &Path, q: &Path) -> Result<AlgebraElement, RewriteError> {
        let g = self.graph();
        if p.range(g) != q.range(g) {
            return Err(RewriteError::RangeMismatch);
        }
        Ok(self.monomial(Monomial {
            p: p.edges.clone(),
            q: q.edges.clone(),
            range: p.range(g),
        }))
    }

    /// The idempotent `p p*`.
    pub fn path_idempotent(&self, p: &Path) -> AlgebraElement {
        self.pq_star(p, p).expect("same path")
    }

    /// Reduces `p q*` to normal monomials and accumulates `coef` times the
    /// result into `out`.
    fn reduce_into(
        &self,
        p: Vec<EdgeId>,
        q: Vec<EdgeId>,
        range: VertexId,
        coef: &Scalar,
        out: &mut BTreeMap<Monomial, Scalar>,
    ) {
        let g = self.graph();
        let neg = -coef;
        let mut stack = vec![(p, q, range, false)];
        while let Some((mut p, mut q, range, negative)) = stack.pop() {
            match (p.last(), q.last()) {
                (Some(a), Some(b)) if a == b && g.is_special(*a) => {
                    let gamma = *a;
                    let v = g.edge(gamma).source;
                    p.pop();
                    q.pop();
                    for f in g.out_edges(v) {
                        if *f != gamma {
                            let mut pf = p.clone();
                            pf.push(*f);
                            let mut qf = q.clone();
                            qf.push(*f);
                            stack.push((pf, qf, g.edge(*f).range, !negative));
                        }
                    }
                    stack.push((p, q, v, negative));
                }
                _ => {
                    let c = if negative { &neg } else { coef };
                    add_term(out, Monomial { p, q, range }, c);
                }
            }
        }
    }

    fn path_source(&self, edges: &[EdgeId], range: VertexId) -> VertexId {
        edges.first().map_or(range, |e| self.graph().edge(*e).source)
    }

    /// Product of two monomials, accumulated with coefficient `coef`.
    fn mul_monomials_into(
        &self,
        a: &Monomial,
        b: &Monomial,
        coef: &Scalar,
        out: &mut BTreeMap<Monomial, Scalar>,
    ) {
        // (p1 q1*)(p2 q2*): q1* p2 is a path, a ghost path, or zero.
        if self.path_source(&a.q, a.range) != self.path_source(&b.p, b.range) {
            return;
        }
        let l = a.q.len().min(b.p.len());
        if a.q[..l] != b.p[..l] {
            return;
        }
        if a.q.len() <= b.p.len() {
            let mut p = a.p.clone();
            p.extend_from_slice(&b.p[l..]);
            self.reduce_into(p, b.q.clone(), b.range, coef, out);
        } else {
            let mut q = b.q.clone();
            q.extend_from_slice(&a.q[l..]);
            self.reduce_into(a.p.clone(), q, a.range, coef, out);
        }
    }

    fn mul_terms(
        &self,
        a: &BTreeMap<Monomial, Scalar>,
        b: &BTreeMap<Monomial, Scalar>,
    ) -> BTreeMap<Monomial, Scalar> {
        let mut out = BTreeMap::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                self.mul_monomials_into(ma, mb, &(ca * cb), &mut out);
            }
        }
        out
    }

    /// Converts a parsed expression, resolving identifiers against `env`
    /// first and then against the graph.
    pub fn raw_from_expr(
        &self,
        e: &Expr,
        env: &BTreeMap<String, AlgebraElement>,
    ) -> Result<RawTerm, RewriteError> {
        Ok(match e {
            Expr::Scalar { text, .. } => RawTerm::Scalar(self.field().parse_scalar(text)?),
            Expr::Symbol { name, position } => {
                if let Some(x) = env.get(name) {
                    if x.alg != *self {
                        return Err(RewriteError::Mismatch);
                    }
                    RawTerm::Element(x.clone())
                } else if let Some(v) = self.graph().find_vertex(name) {
                    RawTerm::Gen(Generator::Vertex(v))
                } else if let Some(ed) = self.graph().find_edge(name) {
                    RawTerm::Gen(Generator::Edge(ed))
                } else {
                    return Err(RewriteError::UnknownId {
                        name: name.clone(),
                        position: *position,
                    });
                }
            }
            Expr::Star(x) => RawTerm::Star(Box::new(self.raw_from_expr(x, env)?)),
            Expr::Neg(x) => RawTerm::Product(vec![
                RawTerm::Scalar(-self.field().one()),
                self.raw_from_expr(x, env)?,
            ]),
            Expr::Sum(xs) => RawTerm::Sum(
                xs.iter()
                    .map(|x| self.raw_from_expr(x, env))
                    .collect::<Result<_, _>>()?,
            ),
            Expr::Product(xs) => RawTerm::Product(
                xs.iter()
                    .map(|x| self.raw_from_expr(x, env))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }

    pub fn parse(&self, text: &str) -> Result<AlgebraElement, RewriteError> {
        self.parse_with(text, &BTreeMap::new())
    }

    pub fn parse_with(
        &self,
        text: &str,
        env: &BTreeMap<String, AlgebraElement>,
    ) -> Result<AlgebraElement, RewriteError> {
        let e = expr::parse(text)?;
        let raw = self.raw_from_expr(&e, env)?;
        Ok(self.normal_form(&raw, Strategy::Multiply))
    }

    pub fn normal_form(&self, raw: &RawTerm, strategy: Strategy) -> AlgebraElement {
        match strategy {
            Strategy::Multiply => self.evaluate(raw),
            Strategy::Leftmost => self.rewrite_words(raw, |n| {
                let _ = n;
                0
            }),
            Strategy::Rightmost => self.rewrite_words(raw, |n| n - 1),
            Strategy::Random(seed) => {
                let mut rng = StdRng::seed_from_u64(seed);
                self.rewrite_words(raw, move |n| rng.gen_range(0..n))
            }
        }
    }

    fn evaluate(&self, raw: &RawTerm) -> AlgebraElement {
        match raw {
            RawTerm::Scalar(c) => self.scalar(c.clone()),
            RawTerm::Gen(g) => self.generator(*g),
            RawTerm::Element(x) => x.clone(),
            RawTerm::Star(x) => self.evaluate(x).star(),
            RawTerm::Sum(xs) => xs
                .iter()
                .fold(self.zero(), |acc, x| acc.add(&self.evaluate(x))),
            RawTerm::Product(xs) => xs
                .iter()
                .fold(self.one(), |acc, x| acc.mul(&self.evaluate(x))),
        }
    }

    /// Expands a raw term into a combination of generator words. The empty
    /// word stands for the identity.
    fn expand_words(&self, raw: &RawTerm, starred: bool) -> Vec<(Scalar, Vec<Generator>)> {
        let f = self.field();
        let star_gen = |g: Generator| match g {
            Generator::Vertex(v) => Generator::Vertex(v),
            Generator::Edge(e) => Generator::Ghost(e),
            Generator::Ghost(e) => Generator::Edge(e),
        };
        match raw {
            RawTerm::Scalar(c) => vec![(c.clone(), Vec::new())],
            RawTerm::Gen(g) => vec![(f.one(), vec![if starred { star_gen(*g) } else { *g }])],
            RawTerm::Element(x) => x
                .terms
                .iter()
                .map(|(m, c)| {
                    let m = if starred { m.star() } else { m.clone() };
                    (c.clone(), monomial_word(&m))
                })
                .collect(),
            RawTerm::Star(x) => self.expand_words(x, !starred),
            RawTerm::Sum(xs) => xs.iter().flat_map(|x| self.expand_words(x, starred)).collect(),
            RawTerm::Product(xs) => {
                let factors: Vec<Vec<(Scalar, Vec<Generator>)>> = if starred {
                    xs.iter().rev().map(|x| self.expand_words(x, true)).collect()
                } else {
                    xs.iter().map(|x| self.expand_words(x, false)).collect()
                };
                let mut acc = vec![(f.one(), Vec::new())];
                for fac in factors {
                    let mut next = Vec::with_capacity(acc.len() * fac.len());
                    for (ca, wa) in &acc {
                        for (cb, wb) in &fac {
                            let c = ca * cb;
                            if c.is_zero() {
                                continue;
                            }
                            let mut w = wa.clone();
                            w.extend_from_slice(wb);
                            next.push((c, w));
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }

    fn pair_rule(&self, a: Generator, b: Generator) -> Option<Replacement> {
        use Generator::*;
        let g = self.graph();
        let keep_or_zero = |ok: bool, w: Generator| {
            Some(if ok {
                Replacement::Word(vec![w])
            } else {
                Replacement::Zero
            })
        };
        match (a, b) {
            (Vertex(x), Vertex(y)) => keep_or_zero(x == y, a),
            (Vertex(x), Edge(e)) => keep_or_zero(g.edge(e).source == x, b),
            (Vertex(x), Ghost(e)) => keep_or_zero(g.edge(e).range == x, b),
            (Edge(e), Vertex(x)) => keep_or_zero(g.edge(e).range == x, a),
            (Ghost(e), Vertex(x)) => keep_or_zero(g.edge(e).source == x, a),
            (Edge(e), Edge(f)) => (g.edge(e).range != g.edge(f).source).then_some(Replacement::Zero),
            (Ghost(e), Ghost(f)) => (g.edge(e).source != g.edge(f).range).then_some(Replacement::Zero),
            (Ghost(e), Edge(f)) => Some(if e == f {
                Replacement::Word(vec![Vertex(g.edge(e).range)])
            } else {
                Replacement::Zero
            }),
            (Edge(e), Ghost(f)) => {
                if g.edge(e).range != g.edge(f).range {
                    Some(Replacement::Zero)
                } else if e == f && g.is_special(e) {
                    let v = g.edge(e).source;
                    let mut terms = vec![(false, vec![Vertex(v)])];
                    terms.extend(
                        g.out_edges(v)
                            .iter()
                            .filter(|x| **x != e)
                            .map(|x| (true, vec![Edge(*x), Ghost(*x)])),
                    );
                    Some(Replacement::Sum(terms))
                } else {
                    None
                }
            }
        }
    }

    fn rewrite_words(&self, raw: &RawTerm, mut pick: impl FnMut(usize) -> usize) -> AlgebraElement {
        let g = self.graph();
        let mut work: Vec<(Scalar, Vec<Generator>)> = Vec::new();
        for (c, w) in self.expand_words(raw, false) {
            if w.is_empty() {
                for v in g.vertex_ids() {
                    work.push((c.clone(), vec![Generator::Vertex(v)]));
                }
            } else {
                work.push((c, w));
            }
        }
        let mut out = BTreeMap::new();
        let mut steps = 0usize;
        while let Some((c, w)) = work.pop() {
            let redexes: Vec<(usize, Replacement)> = w
                .windows(2)
                .enumerate()
                .filter_map(|(i, pair)| self.pair_rule(pair[0], pair[1]).map(|r| (i, r)))
                .collect();
            if redexes.is_empty() {
                add_term(&mut out, word_monomial(g, &w), &c);
                continue;
            }
            steps += 1;
            assert!(steps < WORD_STEP_CAP, "word rewriting did not terminate");
            let (i, rep) = redexes[pick(redexes.len())].clone();
            let splice = |mid: &[Generator]| {
                let mut nw = w[..i].to_vec();
                nw.extend_from_slice(mid);
                nw.extend_from_slice(&w[i + 2..]);
                nw
            };
            match rep {
                Replacement::Zero => {}
                Replacement::Word(mid) => work.push((c.clone(), splice(&mid))),
                Replacement::Sum(parts) => {
                    for (neg, mid) in parts {
                        work.push((if neg { -&c } else { c.clone() }, splice(&mid)));
                    }
                }
            }
        }
        AlgebraElement {
            alg: self.clone(),
            terms: out,
        }
    }

    /// All normal monomials of degree at most `maxdeg`, in canonical order.
    pub fn enumerate_basis(&self, maxdeg: usize) -> Vec<Monomial> {
        let g = self.graph();
        let mut by_range: BTreeMap<VertexId, Vec<Path>> = BTreeMap::new();
        for p in g.all_paths(maxdeg) {
            by_range.entry(p.range(g)).or_default().push(p);
        }
        let mut out = Vec::new();
        for (v, paths) in &by_range {
            for p in paths {
                for q in paths {
                    if p.len() + q.len() > maxdeg {
                        continue;
                    }
                    let m = Monomial {
                        p: p.edges.clone(),
                        q: q.edges.clone(),
                        range: *v,
                    };
                    if m.is_normal(g) {
                        out.push(m);
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Bases of the filtration `W_0 = span(V)`, `W_n = W_{n-1} + W_{n-1} G`
    /// where `G` is the span of all generators; `W_n` is the span of all
    /// products of at most `n` generators. Returns a basis of `W_n` for each
    /// `n` up to `max_n`.
    pub fn generator_filtration(&self, max_n: usize) -> Vec<Vec<AlgebraElement>> {
        let gens: Vec<AlgebraElement> = self
            .generators()
            .into_iter()
            .map(|g| self.generator(g))
            .collect();
        let mut echelon: EchelonBasis<Monomial> = EchelonBasis::new(self.field());
        let mut basis: Vec<AlgebraElement> = Vec::new();
        let mut fresh: Vec<AlgebraElement> = Vec::new();
        for v in self.graph().vertex_ids() {
            let x = self.generator(Generator::Vertex(v));
            if echelon.insert(x.terms.clone()) {
                fresh.push(x);
            }
        }
        basis.extend(fresh.iter().cloned());
        let mut levels = vec![basis.clone()];
        for _ in 0..max_n {
            let mut next = Vec::new();
            for x in &fresh {
                for gen in &gens {
                    let y = x.mul(gen);
                    if !y.is_zero() && echelon.insert(y.terms.clone()) {
                        next.push(y);
                    }
                }
            }
            basis.extend(next.iter().cloned());
            levels.push(basis.clone());
            fresh = next;
        }
        levels
    }

    /// `dim W_n` (see [`Self::generator_filtration`]); `|V|` for `n = 0`.
    pub fn graded_dimension(&self, n: usize) -> usize {
        self.generator_filtration(n)[n].len()
    }

    pub fn span_dimension(&self, elements: &[AlgebraElement]) -> Result<usize, RewriteError> {
        if elements.iter().any(|x| x.alg != *self) {
            return Err(RewriteError::Mismatch);
        }
        Ok(linalg::rank(
            self.field(),
            elements.iter().map(|x| x.terms.clone()),
        ))
    }

    /// The defining relations as (name, lhs, rhs) raw terms.
    pub fn ck_relations(&self) -> Vec<(String, RawTerm, RawTerm)> {
        use Generator::*;
        let g = self.graph();
        let f = self.field();
        let name_v = |v: VertexId| g.vertex_name(v).to_string();
        let name_e = |e: EdgeId| g.edge(e).id.clone();
        let zero = || RawTerm::Scalar(f.zero());
        let mut out = Vec::new();
        for a in g.vertex_ids() {
            for b in g.vertex_ids() {
                out.push((
                    format!("(i) {} {}", name_v(a), name_v(b)),
                    RawTerm::word(&[Vertex(a), Vertex(b)]),
                    if a == b { RawTerm::Gen(Vertex(a)) } else { zero() },
                ));
            }
        }
        for e in g.edge_ids() {
            let (s, r) = (g.edge(e).source, g.edge(e).range);
            let n = name_e(e);
            out.push((format!("(ii) s({n}) {n}"), RawTerm::word(&[Vertex(s), Edge(e)]), RawTerm::Gen(Edge(e))));
            out.push((format!("(ii) {n} r({n})"), RawTerm::word(&[Edge(e), Vertex(r)]), RawTerm::Gen(Edge(e))));
            out.push((format!("(ii) r({n}) {n}'"), RawTerm::word(&[Vertex(r), Ghost(e)]), RawTerm::Gen(Ghost(e))));
            out.push((format!("(ii) {n}' s({n})"), RawTerm::word(&[Ghost(e), Vertex(s)]), RawTerm::Gen(Ghost(e))));
            for f2 in g.edge_ids() {
                out.push((
                    format!("(iii) {n}' {}", name_e(f2)),
                    RawTerm::word(&[Ghost(e), Edge(f2)]),
                    if e == f2 { RawTerm::Gen(Vertex(r)) } else { zero() },
                ));
            }
        }
        for v in g.vertex_ids().filter(|v| !g.is_sink(*v)) {
            out.push((
                format!("(iv) {}", name_v(v)),
                RawTerm::Gen(Vertex(v)),
                RawTerm::Sum(
                    g.out_edges(v)
                        .iter()
                        .map(|e| RawTerm::word(&[Edge(*e), Ghost(*e)]))
                        .collect(),
                ),
            ));
        }
        out
    }
}

fn add_term(out: &mut BTreeMap<Monomial, Scalar>, m: Monomial, c: &Scalar) {
    if c.is_zero() {
        return;
    }
    match out.get_mut(&m) {
        Some(slot) => {
            let s = &*slot + c;
            if s.is_zero() {
                out.remove(&m);
            } else {
                *slot = s;
            }
        }
        None => {
            out.insert(m, c.clone());
        }
    }
}

fn monomial_word(m: &Monomial) -> Vec<Generator> {
    if m.p.is_empty() && m.q.is_empty() {
        return vec![Generator::Vertex(m.range)];
    }
    let mut w: Vec<Generator> = m.p.iter().map(|e| Generator::Edge(*e)).collect();
    w.extend(m.q.iter().rev().map(|e| Generator::Ghost(*e)));
    w
}

/// Reads an irreducible word `e_1..e_n f_m*..f_1*` (or a lone vertex) as a
/// monomial.
fn word_monomial(g: &Graph, w: &[Generator]) -> Monomial {
    if let [Generator::Vertex(v)] = w {
        return Monomial::vertex(*v);
    }
    let mut p = Vec::new();
    let mut ghosts = Vec::new();
    for x in w {
        match x {
            Generator::Edge(e) => {
                debug_assert!(ghosts.is_empty(), "edge after ghost in irreducible word");
                p.push(*e);
            }
            Generator::Ghost(e) => ghosts.push(*e),
            Generator::Vertex(_) => unreachable!("vertices are absorbed in irreducible words"),
        }
    }
    let range = match (p.last(), ghosts.first()) {
        (Some(e), _) | (None, Some(e)) => g.edge(*e).range,
        (None, None) => unreachable!("nonempty word"),
    };
    ghosts.reverse();
    Monomial { p, q: ghosts, range }
}

/// A finite linear combination of normal monomials.
#[derive(Clone)]
pub struct AlgebraElement {
    alg: LeavittAlgebra,
    terms: BTreeMap<Monomial, Scalar>,
}

impl PartialEq for AlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.alg == other.alg && self.terms == other.terms
    }
}

impl Eq for AlgebraElement {}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl AlgebraElement {
    pub fn algebra(&self) -> &LeavittAlgebra {
        &self.alg
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Scalar> {
        &self.terms
    }

    pub fn coordinates(&self) -> SparseVec<Monomial> {
        self.terms.clone()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.alg.field().zero())
    }

    fn same_algebra(&self, other: &Self) -> Result<(), RewriteError> {
        if self.alg == other.alg {
            Ok(())
        } else {
            Err(RewriteError::Mismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, RewriteError> {
        self.same_algebra(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, m.clone(), c);
        }
        Ok(AlgebraElement {
            alg: self.alg.clone(),
            terms,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, RewriteError> {
        self.same_algebra(other)?;
        Ok(AlgebraElement {
            alg: self.alg.clone(),
            terms: self.alg.mul_terms(&self.terms, &other.terms),
        })
    }

    /// Sum; panics if the operands live in different algebras.
    pub fn add(&self, other: &Self) -> Self {
        self.try_add(other).expect("same algebra")
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Product; panics if the operands live in different algebras.
    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).expect("same algebra")
    }

    pub fn neg(&self) -> Self {
        self.scale(&-self.alg.field().one())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let terms = if c.is_zero() {
            BTreeMap::new()
        } else {
            self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect()
        };
        AlgebraElement {
            alg: self.alg.clone(),
            terms,
        }
    }

    /// The involution: `p q* -> q p*`, coefficients fixed.
    pub fn star(&self) -> Self {
        AlgebraElement {
            alg: self.alg.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.star(), c.clone()))
                .collect(),
        }
    }

    pub fn is_idempotent(&self) -> bool {
        self.mul(self) == *self
    }

    pub fn pow(&self, n: usize) -> Self {
        (0..n).fold(self.alg.one(), |acc, _| acc.mul(self))
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let g = self.alg.graph();
        for (i, (m, c)) in self.terms.iter().enumerate() {
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
            if !abs.is_one() {
                let s = abs.to_string();
                if s.contains('+') || s.contains('x') {
                    write!(f, "[{s}] ")?;
                } else {
                    write!(f, "{s} ")?;
                }
            }
            write!(f, "{}", m.display(g))?;
        }
        Ok(())
    }
}
