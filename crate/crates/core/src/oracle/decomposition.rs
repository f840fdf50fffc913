//! Database decompositions and the decomposition principles, as checkable
//! evidence for reducing equivalence to local equivalence.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{satisfying_assignments, value_of, Binding, OracleError};
use crate::aggregation::monoid::{
    BottomTwoMonoid, CountMonoid, MaxMonoid, MinMonoid, Monoid, ParityMonoid, ProductMonoid, SumMonoid, TopTwoMonoid,
};
use crate::aggregation::AggFn;
use crate::database::{Database, Fact};
use crate::query::{term_size_pair, Query, Value};

/// A satisfying assignment tagged with the disjunct it satisfies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LabeledAssignment {
    pub disjunct: usize,
    pub assignment: Binding,
}

/// Labeled assignments of `q` into `db` that retrieve the group `key`,
/// in ascending order.
pub fn assignments_for_group(q: &Query, db: &Database, key: &[Value]) -> BTreeSet<LabeledAssignment> {
    let mut out = BTreeSet::new();
    for (i, d) in q.disjuncts.iter().enumerate() {
        for b in satisfying_assignments(d, db) {
            let k: Vec<Value> = q.grouping.iter().map(|t| value_of(t, &b).expect("safe")).collect();
            if k == key {
                out.insert(LabeledAssignment { disjunct: i, assignment: b });
            }
        }
    }
    out
}

fn first_blocking(q: &Query, current: &Database, db: &Database) -> Vec<Fact> {
    for d in &q.disjuncts {
        for b in satisfying_assignments(d, current) {
            let hits: Vec<Fact> = d
                .negated_atoms()
                .map(|a| Fact {
                    predicate: a.predicate.clone(),
                    args: a.args.iter().map(|t| value_of(t, &b).expect("safe")).collect(),
                })
                .filter(|f| db.contains(f))
                .collect();
            if !hits.is_empty() {
                return hits;
            }
        }
    }
    Vec::new()
}

/// Closes `start` under the extension loop: as long as an assignment
/// satisfies a disjunct over the previous database while one of its negated
/// atoms is instantiated inside `db`, add those instances. Each round takes
/// the first such assignment of `q` and then the first of `q2`.
pub fn extend_database(start: &Database, q: &Query, q2: &Query, db: &Database) -> Database {
    let mut current = start.clone();
    loop {
        let mut next = current.clone();
        for f in first_blocking(q, &current, db) {
            next.insert(f);
        }
        for f in first_blocking(q2, &current, db) {
            next.insert(f);
        }
        if next == current {
            return current;
        }
        current = next;
    }
}

fn positive_image(q: &Query, la: &LabeledAssignment) -> Database {
    q.disjuncts[la.disjunct]
        .positive_atoms()
        .map(|a| Fact {
            predicate: a.predicate.clone(),
            args: a.args.iter().map(|t| value_of(t, &la.assignment).expect("safe")).collect(),
        })
        .collect()
}

/// The family `{ extend(γ(P_γ)) }` over all labeled assignments of both
/// queries retrieving `key`, without duplicates.
pub fn build_decomposition(db: &Database, q: &Query, q2: &Query, key: &[Value]) -> Vec<Database> {
    let mut family: BTreeSet<Database> = BTreeSet::new();
    for query in [q, q2] {
        for la in assignments_for_group(query, db, key) {
            family.insert(extend_database(&positive_image(query, &la), q, q2, db));
        }
    }
    family.into_iter().collect()
}

/// Which decomposition property fails, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecompositionFailure {
    NotSubset(usize),
    TooLarge(usize),
    UnionMismatch { query: usize },
    IntersectionMismatch { query: usize, members: Vec<usize> },
}

/// Checks the three decomposition properties by direct enumeration, over
/// every nonempty subfamily for the intersection property.
pub fn verify_decomposition(
    family: &[Database],
    db: &Database,
    q: &Query,
    q2: &Query,
    key: &[Value],
) -> Result<Option<DecompositionFailure>, OracleError> {
    if family.len() > 16 {
        return Err(OracleError::Invalid(format!("family of {} databases is too large to verify", family.len())));
    }
    let bound = term_size_pair(q, q2);
    for (i, d) in family.iter().enumerate() {
        if !d.is_subset(db) {
            return Ok(Some(DecompositionFailure::NotSubset(i)));
        }
        if d.carrier().len() > bound {
            return Ok(Some(DecompositionFailure::TooLarge(i)));
        }
    }
    for (j, query) in [q, q2].into_iter().enumerate() {
        let whole = assignments_for_group(query, db, key);
        let parts: Vec<BTreeSet<LabeledAssignment>> =
            family.iter().map(|d| assignments_for_group(query, d, key)).collect();
        let union: BTreeSet<LabeledAssignment> = parts.iter().flatten().cloned().collect();
        if union != whole {
            return Ok(Some(DecompositionFailure::UnionMismatch { query: j }));
        }
        for mask in 1u32..(1u32 << family.len()) {
            let members: Vec<usize> = (0..family.len()).filter(|i| mask >> i & 1 == 1).collect();
            let mut common = family[members[0]].clone();
            let mut inter = parts[members[0]].clone();
            for &m in &members[1..] {
                common = common.intersection(&family[m]);
                inter = inter.intersection(&parts[m]).cloned().collect();
            }
            if inter != assignments_for_group(query, &common, key) {
                return Ok(Some(DecompositionFailure::IntersectionMismatch { query: j, members }));
            }
        }
    }
    Ok(None)
}

/// An element of an assignment set: a distinct identity and its ȳ tuple.
pub type Item = (usize, Vec<Value>);

fn intersect_all(family: &[BTreeSet<Item>], members: &[usize]) -> BTreeSet<Item> {
    let mut out = family[members[0]].clone();
    for &m in &members[1..] {
        out = out.intersection(&family[m]).cloned().collect();
    }
    out
}

fn group_principle<M: Monoid>(m: &M, f: impl Fn(&[Value]) -> M::Elem, family: &[BTreeSet<Item>]) -> bool {
    let union: BTreeSet<Item> = family.iter().flatten().cloned().collect();
    let lhs = m.sum(&union.iter().map(|(_, y)| f(y)).collect::<Vec<_>>());
    let mut rhs = m.zero();
    for mask in 1u32..(1u32 << family.len()) {
        let members: Vec<usize> = (0..family.len()).filter(|i| mask >> i & 1 == 1).collect();
        let inter = intersect_all(family, &members);
        let part = m.sum(&inter.iter().map(|(_, y)| f(y)).collect::<Vec<_>>());
        let signed = if members.len() % 2 == 1 { part } else { m.inverse(&part).expect("group") };
        rhs = m.plus(&rhs, &signed);
    }
    lhs == rhs
}

fn idempotent_principle<M: Monoid>(m: &M, f: impl Fn(&[Value]) -> M::Elem, family: &[BTreeSet<Item>]) -> bool {
    let union: BTreeSet<Item> = family.iter().flatten().cloned().collect();
    let lhs = m.sum(&union.iter().map(|(_, y)| f(y)).collect::<Vec<_>>());
    let parts: Vec<M::Elem> = family
        .iter()
        .map(|s| m.sum(&s.iter().map(|(_, y)| f(y)).collect::<Vec<_>>()))
        .collect();
    lhs == m.sum(&parts)
}

/// Evaluates both sides of the decomposition principle for `function`: the
/// inclusion–exclusion form for group functions and the idempotent form
/// otherwise.
pub fn inclusion_exclusion_check(function: AggFn, family: &[BTreeSet<Item>]) -> Result<bool, OracleError> {
    if family.len() > 16 {
        return Err(OracleError::Invalid("family too large".into()));
    }
    let scalar = |y: &[Value]| y[0].clone();
    Ok(match function {
        AggFn::Count => group_principle(&CountMonoid, |_| BigInt::one(), family),
        AggFn::Parity => group_principle(&ParityMonoid, |_| true, family),
        AggFn::Sum => group_principle(&SumMonoid, scalar, family),
        AggFn::Prod => {
            if family.iter().flatten().any(|(_, y)| y[0].is_zero()) {
                return Err(OracleError::Invalid("PROD decomposes only over nonzero values".into()));
            }
            group_principle(&ProductMonoid, scalar, family)
        }
        AggFn::Max => idempotent_principle(&MaxMonoid, |y| Some(y[0].clone()), family),
        AggFn::Min => idempotent_principle(&MinMonoid, |y| Some(y[0].clone()), family),
        AggFn::Top2 => idempotent_principle(&TopTwoMonoid, |y| (Some(y[0].clone()), None), family),
        AggFn::Bot2 => idempotent_principle(&BottomTwoMonoid, |y| (Some(y[0].clone()), None), family),
        AggFn::Avg | AggFn::Cntd => {
            return Err(OracleError::Invalid(format!("{function} is not decomposable")));
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{int, parse_database, parse_queries, Domain};

    fn pair(text: &str) -> (Query, Query) {
        let mut qs = parse_queries(text, Domain::Rationals).unwrap();
        let b = qs.pop().unwrap();
        (qs.pop().unwrap(), b)
    }

    #[test]
    fn extension_adds_blocking_negated_atoms() {
        let (q, q2) = pair("q(; count()) :- p(X), !b(X). q2(; count()) :- p(X).");
        let db = parse_database("p(1). b(1).").unwrap();
        let start = parse_database("p(1).").unwrap();
        assert_eq!(extend_database(&start, &q, &q2, &db), db);
        let (q, q2) = pair("q(; count()) :- p(X). q2(; count()) :- p(X).");
        assert_eq!(extend_database(&start, &q, &q2, &db), start);
    }

    #[test]
    fn decomposition_of_a_single_instance() {
        let (q, q2) = pair("q(X; count()) :- e(X, Y). q2(X; count()) :- e(X, Y), e(Y, Z).");
        let db = parse_database("e(1, 2).").unwrap();
        let fam = build_decomposition(&db, &q, &q2, &[int(1)]);
        assert_eq!(fam, vec![db.clone()]);
        assert_eq!(verify_decomposition(&fam, &db, &q, &q2, &[int(1)]).unwrap(), None);
        let fam = build_decomposition(&db, &q, &q2, &[int(7)]);
        assert!(fam.is_empty());
    }

    #[test]
    fn decomposition_with_negation() {
        let (q, q2) = pair("q(X; sum(Y)) :- e(X, Y), !b(Y). q2(X; sum(Y)) :- e(X, Y) | e(X, Y), b(X).");
        let db = parse_database("e(1, 2). e(1, 3). b(3). b(1).").unwrap();
        let fam = build_decomposition(&db, &q, &q2, &[int(1)]);
        assert_eq!(verify_decomposition(&fam, &db, &q, &q2, &[int(1)]).unwrap(), None);
    }

    fn set(items: &[(usize, i64)]) -> BTreeSet<Item> {
        items.iter().map(|(i, v)| (*i, vec![int(*v)])).collect()
    }

    #[test]
    fn decomposition_principles() {
        let fam = vec![set(&[(0, 1), (1, 5)]), set(&[(1, 5), (2, 7)]), set(&[(2, 7), (3, 2)])];
        for f in [AggFn::Count, AggFn::Parity, AggFn::Sum, AggFn::Prod, AggFn::Max, AggFn::Min, AggFn::Top2, AggFn::Bot2] {
            assert!(inclusion_exclusion_check(f, &fam).unwrap(), "{f}");
        }
        assert!(inclusion_exclusion_check(AggFn::Avg, &fam).is_err());
        let zero = vec![set(&[(0, 0)])];
        assert!(inclusion_exclusion_check(AggFn::Prod, &zero).is_err());
    }

    #[test]
    fn sum_without_overlap_correction_fails() {
        let a = set(&[(0, 1), (1, 5)]);
        let union: BTreeSet<Item> = a.iter().cloned().collect();
        assert!(idempotent_principle(&MaxMonoid, |y| Some(y[0].clone()), &[a.clone(), union.clone()]));
        assert!(!idempotent_principle(&SumMonoid, |y| y[0].clone(), &[a, union]));
    }
}
