mod common;

use leavitt::field::Field;
use leavitt::graph::corpus;
use leavitt::rewrite::{AlgebraElement, Generator, LeavittAlgebra, RawTerm, Strategy as Route};
use proptest::prelude::*;

type Spec = Vec<(i64, Vec<usize>)>;

fn spec() -> impl Strategy<Value = Spec> {
    prop::collection::vec((-3i64..=3, prop::collection::vec(0usize..64, 0..=3)), 1..=3)
}

fn raw(alg: &LeavittAlgebra, s: &Spec) -> RawTerm {
    let gens = alg.generators();
    RawTerm::Sum(
        s.iter()
            .map(|(c, w)| {
                let word: Vec<Generator> = w.iter().map(|i| gens[i % gens.len()]).collect();
                RawTerm::Product(vec![RawTerm::Scalar(alg.field().from_i64(*c)), RawTerm::word(&word)])
            })
            .collect(),
    )
}

fn build(alg: &LeavittAlgebra, s: &Spec) -> AlgebraElement {
    alg.normal_form(&raw(alg, s), Route::Multiply)
}

fn algebras() -> Vec<LeavittAlgebra> {
    let mut out = Vec::new();
    for (_, g) in corpus::all() {
        for f in common::fields() {
            out.push(LeavittAlgebra::new(g.clone(), f));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms(k in 0usize..30, a in spec(), b in spec(), c in spec()) {
        let alg = &algebras()[k];
        let (a, b, c) = (build(alg, &a), build(alg, &b), build(alg, &c));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b).star(), b.star().mul(&a.star()));
        prop_assert_eq!(a.star().star(), a.clone());
        prop_assert_eq!(alg.one().mul(&a), a.clone());
    }

    #[test]
    fn rewriting_is_confluent(k in 0usize..30, a in spec(), seed in any::<u64>()) {
        let alg = &algebras()[k];
        let r = raw(alg, &a);
        let nf = alg.normal_form(&r, Route::Multiply);
        prop_assert_eq!(&alg.normal_form(&r, Route::Leftmost), &nf);
        prop_assert_eq!(&alg.normal_form(&r, Route::Rightmost), &nf);
        prop_assert_eq!(&alg.normal_form(&r, Route::Random(seed)), &nf);
    }

    #[test]
    fn normal_forms_are_normal(k in 0usize..30, a in spec()) {
        let alg = &algebras()[k];
        let x = build(alg, &a);
        prop_assert!(x.terms().keys().all(|m| m.is_normal(alg.graph())));
        prop_assert!(x.terms().values().all(|c| !c.is_zero()));
    }
}

#[test]
fn relations_vanish_on_corpus() {
    for alg in algebras() {
        for (name, lhs, rhs) in alg.ck_relations() {
            let l = alg.normal_form(&lhs, Route::Multiply);
            let r = alg.normal_form(&rhs, Route::Multiply);
            assert_eq!(l, r, "{name} in {}", alg.graph());
        }
    }
}

#[test]
fn calculator_examples() {
    let t = LeavittAlgebra::new(corpus::toeplitz(), Field::Rationals);
    assert_eq!(t.parse("c' c").unwrap().to_string(), "v1");
    assert_eq!(t.parse("c c'").unwrap().to_string(), "v1 - f f'");
    assert_eq!(t.parse("c").unwrap().star().to_string(), "c'");
    assert_eq!(t.parse("c' f").unwrap().to_string(), "0");
    assert_eq!(t.parse("1").unwrap(), t.parse("v1 + v2").unwrap());
}

#[test]
fn basis_enumeration_matches_spans() {
    // the enumerated normal monomials are independent and span the filtration
    for (_, g) in corpus::all().into_iter().filter(|(n, _)| *n != "R1") {
        let alg = LeavittAlgebra::new(g, Field::Rationals);
        let basis: Vec<AlgebraElement> =
            alg.enumerate_basis(3).into_iter().map(|m| alg.monomial(m)).collect();
        assert_eq!(alg.span_dimension(&basis).unwrap(), basis.len());
    }
}
