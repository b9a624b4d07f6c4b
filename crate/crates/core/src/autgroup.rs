//! Automorphisms and involutions of the Toeplitz algebra in its
//! almost-Toeplitz matrix picture.
//!
//! An automorphism is a pair `(α, g)` with `α ≠ 0` and `g ∈ Id + M_∞(F)`
//! invertible, acting by conjugation with `π(α)g` where
//! `π(α) = diag(1, α, α², ...)`. The diagonal `π(α)` is never stored; its
//! action is applied entrywise by [`pi_conjugate`].

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, Scalar};
use crate::linalg;
use crate::toeplitz::{AlmostToeplitz, JacError, MatrixDoc};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutError {
    #[error(transparent)]
    Jac(#[from] JacError),
    #[error("alpha must be nonzero")]
    ZeroAlpha,
    #[error("matrix is not of the form {0}")]
    NotAdmissible(&'static str),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("image left the almost-Toeplitz algebra: {0}")]
    ClosureViolation(String),
    #[error("inconsistent corner images: {0}")]
    InconsistentImages(String),
    #[error("image of e11 has no nonzero fixed vector")]
    DegenerateIdempotent,
    #[error("no square root of {0} in the field")]
    NoSquareRoot(String),
    #[error("elimination stuck on an alternating block of size {0}")]
    StuckAlternatingBlock(usize),
}

/// `π(α)^-1 a π(α)`: entry `(i, j)` scaled by `α^(j-i)`, band `k` by `α^k`.
pub fn pi_conjugate(alpha: &Scalar, a: &AlmostToeplitz) -> Result<AlmostToeplitz, AutError> {
    if alpha.is_zero() {
        return Err(AutError::ZeroAlpha);
    }
    let pw = |k: i64| alpha.powi(k).expect("alpha is nonzero");
    Ok(AlmostToeplitz::from_parts(
        a.field(),
        a.band().iter().map(|(k, c)| (*k, c * &pw(*k))),
        a.finitary()
            .iter()
            .map(|((i, j), c)| ((*i, *j), c * &pw(*j as i64 - *i as i64))),
    ))
}

fn doc_or_identity(doc: &MatrixDoc, field: Field) -> Result<AlmostToeplitz, AutError> {
    let m = AlmostToeplitz::from_doc(doc, field)?;
    Ok(if doc.band.is_empty() {
        AlmostToeplitz::identity(field).add(&m)
    } else {
        m
    })
}

/// The automorphism `a -> (π(α)g)^-1 a (π(α)g)`.
#[derive(Clone, PartialEq, Eq)]
pub struct ToeplitzAutomorphism {
    alpha: Scalar,
    g: AlmostToeplitz,
    g_inv: AlmostToeplitz,
}

/// JSON form: `{"alpha": "<scalar>", "g": {"finitary": [[i, j, "c"]]}}`,
/// where `g` is the identity plus the listed entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismDoc {
    pub alpha: String,
    pub g: MatrixDoc,
}

impl ToeplitzAutomorphism {
    pub fn new(alpha: Scalar, g: AlmostToeplitz) -> Result<Self, AutError> {
        if alpha.is_zero() {
            return Err(AutError::ZeroAlpha);
        }
        if !g.diagonal_scalar().is_some_and(|s| s.is_one()) {
            return Err(AutError::NotAdmissible("Id + finitary"));
        }
        let g_inv = g.try_inverse().ok_or(AutError::NotInvertible)?;
        Ok(ToeplitzAutomorphism { alpha, g, g_inv })
    }

    pub fn identity(field: Field) -> Self {
        Self::new(field.one(), AlmostToeplitz::identity(field)).expect("identity is admissible")
    }

    pub fn alpha(&self) -> &Scalar {
        &self.alpha
    }

    pub fn g(&self) -> &AlmostToeplitz {
        &self.g
    }

    pub fn field(&self) -> Field {
        self.alpha.field()
    }

    pub fn apply(&self, a: &AlmostToeplitz) -> Result<AlmostToeplitz, AutError> {
        let twisted = pi_conjugate(&self.alpha, a)?;
        let out = self.g_inv.try_mul(&twisted)?.try_mul(&self.g)?;
        // conjugation by Id + finitary only moves finitary entries
        if out.band() != twisted.band() {
            return Err(AutError::ClosureViolation(format!("{out:?}")));
        }
        Ok(out)
    }

    /// The automorphism acting as `other ∘ self`; its conjugator is
    /// `π(α)g · π(β)h = π(αβ) · (π(β)^-1 g π(β)) · h`.
    pub fn compose(&self, other: &Self) -> Result<Self, AutError> {
        let g = pi_conjugate(&other.alpha, &self.g)?.try_mul(&other.g)?;
        Self::new(&self.alpha * &other.alpha, g)
    }

    pub fn invert(&self) -> Self {
        let ainv = self.alpha.inv().expect("alpha is nonzero");
        let g = pi_conjugate(&ainv, &self.g_inv).expect("alpha is nonzero");
        Self::new(ainv, g).expect("inverse of an admissible pair")
    }

    /// The scalar `a` of the induced quotient map `t -> a t`.
    pub fn induced_scalar(&self) -> Scalar {
        let c = AlmostToeplitz::band_matrix(self.field().one(), -1);
        self.apply(&c).expect("c stays almost-Toeplitz").band_coefficient(-1)
    }

    pub fn to_doc(&self) -> AutomorphismDoc {
        let fin = self.g.sub(&AlmostToeplitz::identity(self.field()));
        AutomorphismDoc {
            alpha: self.alpha.to_string(),
            g: fin.to_doc(),
        }
    }

    pub fn from_doc(doc: &AutomorphismDoc, field: Field) -> Result<Self, AutError> {
        let alpha = field.parse_scalar(&doc.alpha).map_err(JacError::from)?;
        Self::new(alpha, doc_or_identity(&doc.g, field)?)
    }
}

impl fmt::Debug for ToeplitzAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(&self.to_doc()).expect("serializable"))
    }
}

/// Images of the first column and row of matrix units under an
/// automorphism: `col[j-1] = φ(e_j1)`, `row[j-1] = φ(e_1j)`.
#[derive(Debug, Clone)]
pub struct CornerImages {
    pub m: usize,
    pub col: Vec<AlmostToeplitz>,
    pub row: Vec<AlmostToeplitz>,
}

impl CornerImages {
    /// Images under `a -> T^-1 a T`.
    pub fn from_conjugator(t: &AlmostToeplitz, m: usize) -> Result<Self, AutError> {
        let t_inv = t.try_inverse().ok_or(AutError::NotInvertible)?;
        let one = t.field().one();
        let phi = |i, j| t_inv.mul(&AlmostToeplitz::unit(one.clone(), i, j)).mul(t);
        Ok(CornerImages {
            m,
            col: (1..=m).map(|j| phi(j, 1)).collect(),
            row: (1..=m).map(|j| phi(1, j)).collect(),
        })
    }
}

/// Recovers `S` with `φ(a) = S^-1 a S` on the `m × m` corner, normalized
/// so the first nonzero entry of the first column is 1.
///
/// The columns `φ(e_j1) w` determine `S^-1` on the first `m` columns; the
/// remaining diagonal is read from column `m`, so the conjugator's
/// finitary part must lie strictly inside the corner.
pub fn reconstruct_conjugator(images: &CornerImages) -> Result<AlmostToeplitz, AutError> {
    let m = images.m;
    if m == 0 || images.col.len() != m || images.row.len() != m {
        return Err(AutError::InconsistentImages("need m ≥ 1 images of each kind".into()));
    }
    let p = &images.col[0];
    let field = p.field();
    if *p != images.row[0] {
        return Err(AutError::InconsistentImages("two different images of e11".into()));
    }
    if p.mul(p) != *p {
        return Err(AutError::InconsistentImages("image of e11 is not idempotent".into()));
    }
    for j in 0..m {
        for k in 0..m {
            let prod = images.row[j].try_mul(&images.col[k])?;
            let want = if j == k { p.clone() } else { AlmostToeplitz::zero(field) };
            if prod != want {
                return Err(AutError::InconsistentImages(format!(
                    "φ(e1{}) φ(e{}1) is wrong",
                    j + 1,
                    k + 1
                )));
            }
        }
    }
    if !p.is_finitary() {
        return Err(AutError::InconsistentImages("image of e11 is not finitary".into()));
    }
    let w_col = p.finitary_columns().into_iter().next().ok_or(AutError::DegenerateIdempotent)?;
    let w = p.mul(&AlmostToeplitz::unit(field.one(), w_col, 1));
    let mut block_cols: Vec<AlmostToeplitz> = Vec::with_capacity(m);
    for img in &images.col {
        block_cols.push(img.try_mul(&w)?);
    }
    let n = block_cols
        .iter()
        .map(AlmostToeplitz::block_bound)
        .max()
        .unwrap_or(0)
        .max(m);
    let mu = block_cols[m - 1].entry(m, 1);
    if mu.is_zero() {
        return Err(AutError::InconsistentImages(
            "conjugator is not diagonal at the corner edge".into(),
        ));
    }
    let mut dense = vec![vec![field.zero(); n]; n];
    for (j, col) in block_cols.iter().enumerate() {
        for ((i, k), c) in col.finitary() {
            debug_assert_eq!(*k, 1);
            dense[i - 1][j] = c.clone();
        }
    }
    for (j, row) in dense.iter_mut().enumerate().skip(m) {
        row[j] = mu.clone();
    }
    let u = AlmostToeplitz::from_block(mu, &dense);
    let s = u.try_inverse().ok_or(AutError::DegenerateIdempotent)?;
    let one = field.one();
    for i in 1..=m {
        for j in 1..=m {
            let phi = images.col[i - 1].mul(&images.row[j - 1]);
            let conj = u.mul(&AlmostToeplitz::unit(one.clone(), i, j)).mul(&s);
            if phi != conj {
                return Err(AutError::InconsistentImages(format!("image of e{i}{j} is not inner")));
            }
        }
    }
    let lead = (1..=s.block_bound().max(1))
        .map(|i| s.entry(i, 1))
        .find(|c| !c.is_zero())
        .ok_or(AutError::DegenerateIdempotent)?;
    Ok(s.scale(&lead.inv().expect("nonzero")))
}

/// The involution `a -> T^-1 a^t T` for symmetric admissible `T`.
#[derive(Clone, PartialEq, Eq)]
pub struct Involution {
    t: AlmostToeplitz,
    t_inv: AlmostToeplitz,
}

/// JSON form: `{"T": {"band": [[0, "α"]], "finitary": [[i, j, "c"]]}}`;
/// a missing band means `α = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvolutionDoc {
    #[serde(rename = "T")]
    pub t: MatrixDoc,
}

impl Involution {
    pub fn new(t: AlmostToeplitz) -> Result<Self, AutError> {
        if !t.is_symmetric() {
            return Err(AutError::NotSymmetric);
        }
        if t.diagonal_scalar().is_none() {
            return Err(AutError::NotAdmissible("α·Id + finitary"));
        }
        let t_inv = t.try_inverse().ok_or(AutError::NotInvertible)?;
        Ok(Involution { t, t_inv })
    }

    pub fn standard(field: Field) -> Self {
        Self::new(AlmostToeplitz::identity(field)).expect("identity is admissible")
    }

    pub fn t(&self) -> &AlmostToeplitz {
        &self.t
    }

    pub fn apply(&self, a: &AlmostToeplitz) -> Result<AlmostToeplitz, AutError> {
        Ok(self.t_inv.try_mul(&a.transpose())?.try_mul(&self.t)?)
    }

    pub fn to_doc(&self) -> InvolutionDoc {
        InvolutionDoc { t: self.t.to_doc() }
    }

    pub fn from_doc(doc: &InvolutionDoc, field: Field) -> Result<Self, AutError> {
        Self::new(doc_or_identity(&doc.t, field)?)
    }
}

impl fmt::Debug for Involution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(&self.to_doc()).expect("serializable"))
    }
}

pub fn involution_apply(iota: &Involution, a: &AlmostToeplitz) -> Result<AlmostToeplitz, AutError> {
    iota.apply(a)
}

fn bilinear(a: &[Vec<Scalar>], u: &[Scalar], v: &[Scalar]) -> Scalar {
    let f = u[0].field();
    let mut acc = f.zero();
    for (i, ui) in u.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        for (j, vj) in v.iter().enumerate() {
            if !vj.is_zero() && !a[i][j].is_zero() {
                acc = &acc + &(&(ui * &a[i][j]) * vj);
            }
        }
    }
    acc
}

fn axpy(v: &mut [Scalar], c: &Scalar, u: &[Scalar]) {
    for (x, y) in v.iter_mut().zip(u) {
        *x = &*x + &(c * y);
    }
}

/// `Q` of the form `√α·(Id + finitary)` with `Q^t Q = T`.
///
/// Symmetric elimination diagonalizes the block `M^t (T/α) M = D`. In
/// characteristic 2 an alternating remainder is resolved by pulling in
/// the next index beyond the block, where `T/α` is the identity.
pub fn congruence_decompose(t: &AlmostToeplitz) -> Result<AlmostToeplitz, AutError> {
    if !t.is_symmetric() {
        return Err(AutError::NotSymmetric);
    }
    let alpha = t.diagonal_scalar().ok_or(AutError::NotAdmissible("α·Id + finitary"))?;
    if alpha.is_zero() {
        return Err(AutError::NotAdmissible("α·Id + finitary"));
    }
    t.try_inverse().ok_or(AutError::NotInvertible)?;
    let field = t.field();
    let root_alpha = alpha.sqrt().ok_or_else(|| AutError::NoSquareRoot(alpha.to_string()))?;
    let n = t.block_bound();
    let ainv = alpha.inv().expect("nonzero");
    let mut a = t.scale(&ainv).dense_block(n);
    let unit = |len: usize, i: usize| {
        let mut v = vec![field.zero(); len];
        v[i] = field.one();
        v
    };
    let mut size = n;
    let mut remaining: Vec<Vec<Scalar>> = (0..n).map(|i| unit(n, i)).collect();
    let mut pivots: Vec<Vec<Scalar>> = Vec::new();
    let mut diag: Vec<Scalar> = Vec::new();
    while !remaining.is_empty() {
        let pos = remaining.iter().position(|v| !bilinear(&a, v, v).is_zero());
        let pos = match pos {
            Some(p) => p,
            None => {
                let pair = (0..remaining.len())
                    .flat_map(|i| (i + 1..remaining.len()).map(move |j| (i, j)))
                    .find(|&(i, j)| !bilinear(&a, &remaining[i], &remaining[j]).is_zero())
                    .ok_or(AutError::NotInvertible)?;
                if field.characteristic() != 2 {
                    let w = remaining[pair.1].clone();
                    axpy(&mut remaining[pair.0], &field.one(), &w);
                    continue;
                }
                if size >= 2 * n {
                    return Err(AutError::StuckAlternatingBlock(remaining.len()));
                }
                // T/α is the identity at the next index and orthogonal to the block
                size += 1;
                for row in a.iter_mut() {
                    row.push(field.zero());
                }
                a.push(unit(size, size - 1));
                for v in remaining.iter_mut().chain(pivots.iter_mut()) {
                    v.push(field.zero());
                }
                remaining[pair.0][size - 1] = field.one();
                remaining.push(unit(size, size - 1));
                continue;
            }
        };
        let v = remaining.remove(pos);
        let d = bilinear(&a, &v, &v);
        let dinv = d.inv().expect("nonzero pivot");
        for w in remaining.iter_mut() {
            let c = -&(&bilinear(&a, w, &v) * &dinv);
            axpy(w, &c, &v);
        }
        pivots.push(v);
        diag.push(d);
    }
    if size == 0 {
        return Ok(AlmostToeplitz::scalar_identity(root_alpha));
    }
    // M has the pivots as columns; R = √D M^-1 satisfies R^t R = T/α
    let m: Vec<Vec<Scalar>> = (0..size)
        .map(|i| pivots.iter().map(|v| v[i].clone()).collect())
        .collect();
    let m_inv = linalg::dense_inverse(field, &m).ok_or(AutError::NotInvertible)?;
    let mut q = Vec::with_capacity(size);
    for (row, d) in m_inv.iter().zip(&diag) {
        let r = d.sqrt().ok_or_else(|| AutError::NoSquareRoot(d.to_string()))?;
        let s = &r * &root_alpha;
        q.push(row.iter().map(|x| x * &s).collect::<Vec<_>>());
    }
    let q = AlmostToeplitz::from_block(root_alpha, &q);
    if q.transpose().mul(&q) != *t {
        return Err(AutError::ClosureViolation("Q^t Q differs from T".into()));
    }
    Ok(q)
}

/// `Q` such that `a -> Q a Q^-1` carries `ι` to transposition:
/// `(Q a Q^-1)^t = Q ι(a) Q^-1`.
pub fn involution_equivalence(iota: &Involution) -> Result<AlmostToeplitz, AutError> {
    congruence_decompose(&iota.t)
}

/// Checks the intertwining identity of [`involution_equivalence`] on `a`.
pub fn intertwines(
    iota: &Involution,
    q: &AlmostToeplitz,
    a: &AlmostToeplitz,
) -> Result<bool, AutError> {
    let q_inv = q.try_inverse().ok_or(AutError::NotInvertible)?;
    let lhs = q.try_mul(a)?.try_mul(&q_inv)?.transpose();
    let rhs = q.try_mul(&iota.apply(a)?)?.try_mul(&q_inv)?;
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rationals
    }

    fn unit(f: Field, i: usize, j: usize) -> AlmostToeplitz {
        AlmostToeplitz::unit(f.one(), i, j)
    }

    fn c(f: Field) -> AlmostToeplitz {
        AlmostToeplitz::band_matrix(f.one(), -1)
    }

    fn id(f: Field) -> AlmostToeplitz {
        AlmostToeplitz::identity(f)
    }

    #[test]
    fn pi_conjugate_examples() {
        let a = q().from_i64(3);
        assert_eq!(pi_conjugate(&a, &id(q())).unwrap(), id(q()));
        assert_eq!(pi_conjugate(&a, &c(q())).unwrap(), c(q()).scale(&a.inv().unwrap()));
        assert_eq!(pi_conjugate(&a, &unit(q(), 1, 1)).unwrap(), unit(q(), 1, 1));
        assert_eq!(pi_conjugate(&a, &unit(q(), 1, 3)).unwrap(), unit(q(), 1, 3).scale(&q().from_i64(9)));
        assert_eq!(pi_conjugate(&q().zero(), &c(q())), Err(AutError::ZeroAlpha));
    }

    #[test]
    fn apply_examples() {
        let a = q().from_i64(2);
        let phi = ToeplitzAutomorphism::new(a.clone(), id(q())).unwrap();
        assert_eq!(phi.apply(&c(q())).unwrap(), c(q()).scale(&a.inv().unwrap()));
        assert_eq!(phi.induced_scalar(), a.inv().unwrap());
        let g = id(q()).add(&unit(q(), 1, 2));
        let psi = ToeplitzAutomorphism::new(q().one(), g).unwrap();
        // (Id - e12) e11 (Id + e12) = e11 + e12
        assert_eq!(psi.apply(&unit(q(), 1, 1)).unwrap(), unit(q(), 1, 1).add(&unit(q(), 1, 2)));
        assert!(psi.induced_scalar().is_one());
        assert_eq!(
            ToeplitzAutomorphism::new(q().one(), c(q())).unwrap_err(),
            AutError::NotAdmissible("Id + finitary")
        );
    }

    #[test]
    fn group_law_examples() {
        let a = q().from_i64(2);
        let b = q().from_i64(5);
        let pa = ToeplitzAutomorphism::new(a.clone(), id(q())).unwrap();
        let pb = ToeplitzAutomorphism::new(b.clone(), id(q())).unwrap();
        let ab = pa.compose(&pb).unwrap();
        assert_eq!((ab.alpha().clone(), ab.g().clone()), (&a * &b, id(q())));
        let g = id(q()).add(&unit(q(), 1, 2));
        let h = id(q()).add(&unit(q(), 3, 1).scale(&a));
        let pg = ToeplitzAutomorphism::new(q().one(), g.clone()).unwrap();
        let ph = ToeplitzAutomorphism::new(q().one(), h.clone()).unwrap();
        assert_eq!(pg.compose(&ph).unwrap().g(), &g.mul(&h));
        let phi = ToeplitzAutomorphism::new(a, g).unwrap();
        let inv = phi.invert();
        for x in [c(q()), c(q()).transpose(), unit(q(), 1, 1)] {
            assert_eq!(inv.apply(&phi.apply(&x).unwrap()).unwrap(), x);
            assert_eq!(phi.compose(&inv).unwrap().apply(&x).unwrap(), x);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let ident = CornerImages::from_conjugator(&id(q()), 4).unwrap();
        assert_eq!(reconstruct_conjugator(&ident).unwrap(), id(q()));
        let t = id(q()).add(&unit(q(), 1, 2));
        let images = CornerImages::from_conjugator(&t, 6).unwrap();
        assert_eq!(reconstruct_conjugator(&images).unwrap(), t);
        let mut bad = images.clone();
        bad.col[0] = unit(q(), 1, 1).scale(&q().from_i64(2));
        bad.row[0] = bad.col[0].clone();
        assert!(matches!(reconstruct_conjugator(&bad), Err(AutError::InconsistentImages(_))));
    }

    #[test]
    fn involution_examples() {
        let std = Involution::standard(q());
        assert_eq!(std.apply(&c(q())).unwrap(), c(q()).transpose());
        assert_eq!(std.apply(&unit(q(), 1, 2)).unwrap(), unit(q(), 2, 1));
        assert_eq!(
            Involution::new(id(q()).add(&unit(q(), 1, 2))).unwrap_err(),
            AutError::NotSymmetric
        );
    }

    #[test]
    fn congruence_examples() {
        assert_eq!(congruence_decompose(&id(q())).unwrap(), id(q()));
        let f2 = Field::prime(2).unwrap();
        let t = id(f2)
            .add(&unit(f2, 1, 2))
            .add(&unit(f2, 2, 1))
            .add(&unit(f2, 2, 2));
        let expected = id(f2).add(&unit(f2, 1, 2));
        assert_eq!(expected.transpose().mul(&expected), t);
        let qm = congruence_decompose(&t).unwrap();
        assert_eq!(qm.transpose().mul(&qm), t);
        let iota = Involution::new(t).unwrap();
        for x in [c(f2), c(f2).transpose(), unit(f2, 1, 1)] {
            assert!(intertwines(&iota, &qm, &x).unwrap());
        }
        let two = AlmostToeplitz::scalar_identity(q().from_i64(2));
        assert!(matches!(congruence_decompose(&two), Err(AutError::NoSquareRoot(_))));
        let four = AlmostToeplitz::scalar_identity(q().from_i64(4)).add(&unit(q(), 1, 1).scale(&q().from_i64(5)));
        let qm = congruence_decompose(&four).unwrap();
        assert_eq!(qm.transpose().mul(&qm), four);
    }

    #[test]
    fn docs_round_trip() {
        let phi = ToeplitzAutomorphism::new(
            q().from_i64(3),
            id(q()).add(&unit(q(), 2, 1).scale(&q().from_i64(-4))),
        )
        .unwrap();
        let text = serde_json::to_string(&phi.to_doc()).unwrap();
        assert_eq!(text, r#"{"alpha":"3","g":{"finitary":[[2,1,"-4"]]}}"#);
        let back: AutomorphismDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(ToeplitzAutomorphism::from_doc(&back, q()).unwrap(), phi);
        let iota = Involution::new(AlmostToeplitz::scalar_identity(q().from_i64(2))).unwrap();
        let text = serde_json::to_string(&iota.to_doc()).unwrap();
        let back: InvolutionDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(Involution::from_doc(&back, q()).unwrap(), iota);
    }
}
