#![allow(dead_code)]

use leavitt::field::{Field, Scalar};
use leavitt::rewrite::{AlgebraElement, LeavittAlgebra};
use leavitt::toeplitz::{AlmostToeplitz, JacobsonElement};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn q() -> Field {
    Field::Rationals
}

pub fn gf(desc: &str) -> Field {
    Field::parse(desc).unwrap()
}

pub fn fields() -> Vec<Field> {
    vec![q(), gf("gf2"), gf("gf5")]
}

pub fn scalar(field: Field, rng: &mut StdRng) -> Scalar {
    match field {
        Field::Binary { k, .. } => field.from_bits(rng.gen_range(0..1u32 << k)),
        _ => field.from_i64(rng.gen_range(-3..=3)),
    }
}

pub fn nonzero_scalar(field: Field, rng: &mut StdRng) -> Scalar {
    loop {
        let c = scalar(field, rng);
        if !c.is_zero() {
            return c;
        }
    }
}

/// A sum of up to three scaled products of at most `deg` generators.
pub fn element(alg: &LeavittAlgebra, rng: &mut StdRng, deg: usize) -> AlgebraElement {
    let gens = alg.generators();
    let mut acc = alg.zero();
    for _ in 0..rng.gen_range(1..=3) {
        let mut w = alg.one();
        for _ in 0..rng.gen_range(0..=deg) {
            w = w.mul(&alg.generator(gens[rng.gen_range(0..gens.len())]));
        }
        acc = acc.add(&w.scale(&scalar(alg.field(), rng)));
    }
    acc
}

/// A sum of up to four terms `c y^i x^j` with `i + j ≤ deg`.
pub fn jac(field: Field, rng: &mut StdRng, deg: u64) -> JacobsonElement {
    let mut acc = JacobsonElement::zero(field);
    for _ in 0..rng.gen_range(1..=4) {
        let i = rng.gen_range(0..=deg);
        let j = rng.gen_range(0..=deg - i);
        acc = acc.add(&JacobsonElement::term(scalar(field, rng), i, j));
    }
    acc
}

/// A random combination of matrix units `e_ij` with `i, j ≤ n`.
pub fn finitary(field: Field, rng: &mut StdRng, n: usize) -> AlmostToeplitz {
    let mut m = AlmostToeplitz::zero(field);
    for _ in 0..rng.gen_range(1..=4) {
        let (i, j) = (rng.gen_range(1..=n), rng.gen_range(1..=n));
        m = m.add(&AlmostToeplitz::unit(scalar(field, rng), i, j));
    }
    m
}

/// An invertible `Id + finitary` supported on the leading `n × n` block.
pub fn gl(field: Field, rng: &mut StdRng, n: usize) -> AlmostToeplitz {
    loop {
        let g = AlmostToeplitz::identity(field).add(&finitary(field, rng, n));
        if g.try_inverse().is_some() {
            return g;
        }
    }
}

/// A symmetric invertible `α·Id + finitary` on the leading `n × n` block.
pub fn symmetric(field: Field, rng: &mut StdRng, n: usize) -> AlmostToeplitz {
    loop {
        let alpha = nonzero_scalar(field, rng);
        let mut t = AlmostToeplitz::scalar_identity(alpha);
        for i in 1..=n {
            for j in i..=n {
                if rng.gen_bool(0.5) {
                    let c = scalar(field, rng);
                    t = t.add(&AlmostToeplitz::unit(c.clone(), i, j));
                    if i != j {
                        t = t.add(&AlmostToeplitz::unit(c, j, i));
                    }
                }
            }
        }
        if t.try_inverse().is_some() {
            return t;
        }
    }
}

/// Jacobson elements and almost-Toeplitz matrices exercising every band
/// and the first rows and columns.
pub fn matrix(field: Field, rng: &mut StdRng) -> AlmostToeplitz {
    jac(field, rng, 3).to_matrix().add(&finitary(field, rng, 4))
}
