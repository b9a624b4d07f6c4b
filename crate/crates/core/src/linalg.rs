//! Sparse Gaussian elimination over an exact field.
//!
//! Vectors are finite-support maps from an ordered coordinate type to
//! nonzero scalars. Every stored row is monic at its least coordinate and no
//! two rows share that pivot coordinate.

use std::collections::BTreeMap;

use crate::field::{Field, Scalar};

pub type SparseVec<K> = BTreeMap<K, Scalar>;

/// `acc += coef * v`, dropping entries that cancel.
pub fn axpy<K: Ord + Clone>(acc: &mut SparseVec<K>, coef: &Scalar, v: &SparseVec<K>) {
    if coef.is_zero() {
        return;
    }
    for (k, c) in v {
        let add = coef * c;
        match acc.get_mut(k) {
            Some(slot) => {
                let s = &*slot + &add;
                if s.is_zero() {
                    acc.remove(k);
                } else {
                    *slot = s;
                }
            }
            None => {
                acc.insert(k.clone(), add);
            }
        }
    }
}

/// Incrementally maintained row-echelon basis of a subspace.
#[derive(Debug, Clone)]
pub struct EchelonBasis<K: Ord + Clone> {
    field: Field,
    rows: BTreeMap<K, SparseVec<K>>,
}

impl<K: Ord + Clone> EchelonBasis<K> {
    pub fn new(field: Field) -> Self {
        EchelonBasis {
            field,
            rows: BTreeMap::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `v` against the stored rows.
    pub fn reduce(&self, mut v: SparseVec<K>) -> SparseVec<K> {
        let mut floor: Option<K> = None;
        loop {
            let next = match &floor {
                None => v.keys().next().cloned(),
                Some(f) => v
                    .range((std::ops::Bound::Excluded(f.clone()), std::ops::Bound::Unbounded))
                    .next()
                    .map(|(k, _)| k.clone()),
            };
            let Some(lead) = next else { return v };
            if let Some(row) = self.rows.get(&lead) {
                let c = -&v[&lead];
                axpy(&mut v, &c, row);
            }
            floor = Some(lead);
        }
    }

    pub fn contains(&self, v: &SparseVec<K>) -> bool {
        self.reduce(v.clone()).is_empty()
    }

    /// Adds `v`; returns true when it enlarged the span.
    pub fn insert(&mut self, v: SparseVec<K>) -> bool {
        let mut r = self.reduce(v);
        let Some((lead, c)) = r.iter().next().map(|(k, c)| (k.clone(), c.clone())) else {
            return false;
        };
        let inv = c.inv().expect("leading coefficient is nonzero");
        for val in r.values_mut() {
            *val = &*val * &inv;
        }
        debug_assert_eq!(inv.field(), self.field);
        self.rows.insert(lead, r);
        true
    }
}

/// Rank of a family of sparse vectors.
pub fn rank<K: Ord + Clone>(field: Field, vectors: impl IntoIterator<Item = SparseVec<K>>) -> usize {
    let mut basis = EchelonBasis::new(field);
    for v in vectors {
        basis.insert(v);
    }
    basis.rank()
}

/// Dense square matrix inverse by Gauss-Jordan elimination; `None` when
/// singular.
pub fn dense_inverse(field: Field, m: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = m.len();
    let mut a: Vec<Vec<Scalar>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].inv().ok()?;
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot) {
                    *x = &*x - &(&f * p);
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}
