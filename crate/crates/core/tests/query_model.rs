mod common;

use aggequiv::aggregation::AggFn;
use aggequiv::oracle::eval_concrete;
use aggequiv::query::{int, parse_query, reduce_query, term_size_pair, Domain, ParseErrorKind, Parser};
use common::*;
use proptest::prelude::*;

fn shape(function: AggFn, domain: Domain) -> QueryShape {
    QueryShape { function, domain, constants: vec![1, 3], max_disjuncts: 3, negation: true, binary: true }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>(), f in 0..AggFn::ALL.len(), int_domain in any::<bool>()) {
        let domain = if int_domain { Domain::Integers } else { Domain::Rationals };
        let mut r = rng(seed);
        let q = random_query(&mut r, &shape(AggFn::ALL[f], domain), "q");
        let again = parse_query(&q.to_string(), domain).unwrap();
        prop_assert_eq!(&again, &q);
        prop_assert_eq!(again.to_string(), q.to_string());
    }

    #[test]
    fn reduction_preserves_results(seed in any::<u64>(), f in 0..AggFn::ALL.len(), int_domain in any::<bool>()) {
        let domain = if int_domain { Domain::Integers } else { Domain::Rationals };
        let mut r = rng(seed);
        let q = random_query(&mut r, &shape(AggFn::ALL[f], domain), "q");
        let reduced = reduce_query(&q);
        let pool = integer_pool(&[0, 1, 2, 3, 4]);
        for _ in 0..8 {
            let db = random_database(&mut r, &pool, 6);
            prop_assert_eq!(rendered(&eval_concrete(&q, &db)), rendered(&eval_concrete(&reduced, &db)), "{} vs {}", q, reduced);
        }
    }
}

#[test]
fn term_sizes() {
    let q = parse_query("q(X; sum(Y)) :- p(X, Y), Y > 3", Domain::Integers).unwrap();
    assert_eq!(q.term_size(), 3);
    let q = parse_query("q(; count()) :- p(X, Y) | r(A, B, C, D)", Domain::Rationals).unwrap();
    assert_eq!(q.term_size(), 4);
    let a = parse_query("q(; count()) :- p(X, Y), X > 3", Domain::Rationals).unwrap();
    let b = parse_query("q(; count()) :- p(X, Y), r(Z), X > 3, Z < 7", Domain::Rationals).unwrap();
    assert_eq!(term_size_pair(&a, &b), 5);
}

#[test]
fn reduction_examples() {
    let q = parse_query("q(; sum(Y)) :- p(X, Y), X = Y", Domain::Rationals).unwrap();
    assert_eq!(reduce_query(&q).to_string(), "q(; sum(X)) :- p(X, X)");
    let q = parse_query("q(; sum(X)) :- p(X), 0 < X, X < 2", Domain::Integers).unwrap();
    assert_eq!(reduce_query(&q).aggregate_args(), &[aggequiv::query::Term::Const(int(1))]);
    let q = parse_query("q(X; max(Y)) :- e(X, Y), X < Y", Domain::Rationals).unwrap();
    assert_eq!(reduce_query(&q), q);
}

#[test]
fn parse_errors_carry_positions() {
    let mut p = Parser::new(Domain::Rationals);
    let e = p.queries("q(; count()) :- p(X).\nr(; count()) :- p(X, Y).").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(matches!(e.kind, ParseErrorKind::ArityMismatch { expected: 1, got: 2, .. }));
    assert!(parse_query("q(; sum(Y)) :- p(X)", Domain::Rationals).is_err());
    assert!(parse_query("q(; sum(Y)) :- p(Y), !r(Z)", Domain::Rationals).is_err());
    assert!(parse_query("q(; sum(Y)) :- p(Y), Y > 1/2", Domain::Integers).is_err());
}
