//! Equivalence of quasilinear conjunctive queries.
//!
//! A conjunctive query is quasilinear if no predicate occurs twice
//! positively and none occurs with both polarities. For singleton-determining
//! functions two reduced satisfiable quasilinear queries are equivalent iff
//! they are isomorphic; for CNTD the same holds when comparisons use only
//! `<=`/`>=` and the queries range over the rationals or have no constants.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::aggregation::AggFn;
use crate::database::{Database, Fact};
use crate::engine::{self, EngineError, EngineOptions, Status, Verdict};
use crate::oracle::{self, Counterexample};
use crate::orderings::{Assignment, CompleteOrdering};
use crate::query::{is_unsatisfiable, reduce_query, term_size_pair, Atom, CmpOp, Comparison, Condition, ConstraintSet, Domain, Query, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuasilinearError {
    #[error("query {0} is not conjunctive")]
    Disjunctive(String),
    #[error("query {0} is not quasilinear")]
    NotQuasilinear(String),
    #[error("queries use different aggregation functions")]
    FunctionMismatch,
    #[error("queries range over different domains")]
    DomainMismatch,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A substitution from the terms of one query to the terms of another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homomorphism {
    pub substitution: BTreeMap<Term, Term>,
}

impl Homomorphism {
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Const(_) => t.clone(),
            Term::Var(_) => self.substitution.get(t).cloned().unwrap_or_else(|| t.clone()),
        }
    }

    fn apply_atom(&self, a: &Atom) -> Atom {
        Atom { predicate: a.predicate.clone(), args: a.args.iter().map(|t| self.apply(t)).collect(), negated: a.negated }
    }

    fn inverse(&self) -> Option<Homomorphism> {
        let mut inv = BTreeMap::new();
        for (k, v) in &self.substitution {
            if !v.is_var() || inv.insert(v.clone(), k.clone()).is_some() {
                return None;
            }
        }
        Some(Homomorphism { substitution: inv })
    }
}

fn body(q: &Query) -> Result<&Condition, QuasilinearError> {
    match q.disjuncts.as_slice() {
        [d] => Ok(d),
        _ => Err(QuasilinearError::Disjunctive(q.name.to_string())),
    }
}

/// Whether no predicate repeats positively or occurs with both polarities.
///
/// A predicate may repeat when all its positive atoms are ground, since each
/// ground atom then behaves like a nullary predicate of its own.
pub fn is_quasilinear(q: &Query) -> Result<bool, QuasilinearError> {
    let d = body(q)?;
    let mut positive: BTreeMap<&Arc<str>, Vec<&Atom>> = BTreeMap::new();
    for a in d.positive_atoms() {
        positive.entry(&a.predicate).or_default().push(a);
    }
    let ground = |a: &&Atom| a.args.iter().all(|t| !t.is_var());
    let repeats_ok = positive.values().all(|atoms| atoms.len() == 1 || atoms.iter().all(ground));
    Ok(repeats_ok && d.negated_atoms().all(|a| !positive.contains_key(&a.predicate)))
}

/// Checks the homomorphism conditions for `theta` from `q2` to `q`.
fn is_homomorphism(theta: &Homomorphism, q2: &Query, q: &Query) -> bool {
    let (d, d2) = match (q.disjuncts.as_slice(), q2.disjuncts.as_slice()) {
        ([d], [d2]) => (d, d2),
        _ => return false,
    };
    let heads_match = q2.grouping.len() == q.grouping.len()
        && q2.grouping.iter().zip(&q.grouping).all(|(a, b)| theta.apply(a) == *b)
        && q2.aggregate_args().len() == q.aggregate_args().len()
        && q2.aggregate_args().iter().zip(q.aggregate_args()).all(|(a, b)| theta.apply(a) == *b);
    if !heads_match {
        return false;
    }
    let positive: BTreeSet<&Atom> = d.positive_atoms().collect();
    let negative: BTreeSet<&Atom> = d.negated_atoms().collect();
    if !d2.positive_atoms().all(|a| positive.contains(&theta.apply_atom(a))) {
        return false;
    }
    if !d2.negated_atoms().all(|a| negative.contains(&theta.apply_atom(a))) {
        return false;
    }
    let c = ConstraintSet::new(q.domain, d.comparisons.clone());
    d2.comparisons
        .iter()
        .all(|cmp| c.entails(&Comparison::new(theta.apply(&cmp.lhs), cmp.op, theta.apply(&cmp.rhs))))
}

/// Homomorphisms from `q2` to `q` restricted to their positive atoms, found
/// by matching atoms of `q2` against atoms of `q` with the same predicate.
fn positive_matches(q2: &Condition, q: &Condition, mut accept: impl FnMut(&Homomorphism) -> bool) -> Option<Homomorphism> {
    let mut by_pred: HashMap<&Arc<str>, Vec<&Atom>> = HashMap::new();
    for a in q.positive_atoms() {
        by_pred.entry(&a.predicate).or_default().push(a);
    }
    let atoms: Vec<&Atom> = q2.positive_atoms().collect();

    fn go(
        k: usize,
        atoms: &[&Atom],
        by_pred: &HashMap<&Arc<str>, Vec<&Atom>>,
        theta: &mut BTreeMap<Term, Term>,
        accept: &mut dyn FnMut(&Homomorphism) -> bool,
    ) -> Option<Homomorphism> {
        if k == atoms.len() {
            let h = Homomorphism { substitution: theta.clone() };
            return accept(&h).then_some(h);
        }
        let a = atoms[k];
        for target in by_pred.get(&a.predicate).into_iter().flatten() {
            if target.args.len() != a.args.len() {
                continue;
            }
            let saved = theta.clone();
            let ok = a.args.iter().zip(&target.args).all(|(s, t)| match s {
                Term::Const(_) => s == t,
                Term::Var(_) => match theta.get(s) {
                    Some(u) => u == t,
                    None => {
                        theta.insert(s.clone(), t.clone());
                        true
                    }
                },
            });
            if ok {
                if let Some(h) = go(k + 1, atoms, by_pred, theta, accept) {
                    return Some(h);
                }
            }
            *theta = saved;
        }
        None
    }

    let mut theta = BTreeMap::new();
    go(0, &atoms, &by_pred, &mut theta, &mut accept)
}

/// An isomorphism from `q2` to `q`: a bijective homomorphism whose inverse
/// is a homomorphism. Both queries should be reduced and conjunctive.
///
/// For quasilinear queries every positive atom has at most one candidate
/// image, so the search does not branch.
pub fn find_isomorphism(q: &Query, q2: &Query) -> Option<Homomorphism> {
    let (d, d2) = match (q.disjuncts.as_slice(), q2.disjuncts.as_slice()) {
        ([d], [d2]) => (d, d2),
        _ => return None,
    };
    if d.variables().len() != d2.variables().len() || d.constants() != d2.constants() {
        return None;
    }
    positive_matches(d2, d, |theta| {
        theta.inverse().is_some_and(|inv| is_homomorphism(theta, q2, q) && is_homomorphism(&inv, q, q2))
    })
}

/// Positive part of a conjunctive query.
fn positive_part(q: &Query) -> Query {
    let mut p = q.clone();
    for d in &mut p.disjuncts {
        d.atoms.retain(|a| !a.negated);
    }
    p
}

/// A complete ordering of the terms of `d` satisfying its comparisons,
/// preferring orderings that keep all terms apart.
fn satisfying_ordering(d: &Condition, domain: Domain) -> Option<CompleteOrdering> {
    let consts: Vec<Term> = d.constants().into_iter().map(Term::Const).collect();
    let vars: Vec<Term> = d.variables().into_iter().map(Term::Var).collect();
    let classes: Vec<Vec<Term>> = consts.into_iter().map(|c| vec![c]).collect();

    fn consistent(classes: &[Vec<Term>], comparisons: &[Comparison], domain: Domain) -> bool {
        let Ok(order) = CompleteOrdering::from_classes(classes.to_vec(), domain) else {
            return false;
        };
        comparisons.iter().all(|c| {
            let pending = |t: &Term| t.is_var() && order.class_of(t).is_none();
            pending(&c.lhs) || pending(&c.rhs) || order.entails(c).unwrap_or(false)
        })
    }

    fn go(k: usize, vars: &[Term], classes: &mut Vec<Vec<Term>>, d: &Condition, domain: Domain) -> Option<CompleteOrdering> {
        if k == vars.len() {
            return CompleteOrdering::from_classes(classes.clone(), domain).ok();
        }
        let n = classes.len();
        for gap in 0..=n {
            classes.insert(gap, vec![vars[k].clone()]);
            if consistent(classes, &d.comparisons, domain) {
                if let Some(o) = go(k + 1, vars, classes, d, domain) {
                    return Some(o);
                }
            }
            classes.remove(gap);
        }
        for i in 0..n {
            classes[i].push(vars[k].clone());
            if consistent(classes, &d.comparisons, domain) {
                if let Some(o) = go(k + 1, vars, classes, d, domain) {
                    return Some(o);
                }
            }
            classes[i].pop();
        }
        None
    }

    let mut classes = classes;
    go(0, &vars, &mut classes, d, domain)
}

fn value(t: &Term, gamma: &Assignment) -> Value {
    match t {
        Term::Const(c) => c.clone(),
        Term::Var(_) => gamma[t].clone(),
    }
}

fn instantiate(atoms: &[&Atom], gamma: &Assignment) -> Database {
    atoms
        .iter()
        .map(|a| Fact { predicate: a.predicate.clone(), args: a.args.iter().map(|t| value(t, gamma)).collect() })
        .collect()
}

/// The database `γ(P)` for an injective satisfying `γ`, with `γ`.
fn canonical_database(q: &Query) -> Option<(Database, Assignment)> {
    let d = q.disjuncts.first()?;
    let gamma = satisfying_ordering(d, q.domain)?.satisfying_assignment();
    let atoms: Vec<&Atom> = d.positive_atoms().collect();
    Some((instantiate(&atoms, &gamma), gamma))
}

/// Databases suggested by the proof that non-isomorphic queries differ: the
/// canonical databases of both queries and, when the positive parts are
/// isomorphic, the canonical database extended by a negated atom that the
/// other query lacks.
fn candidate_databases(q: &Query, q2: &Query) -> Vec<Database> {
    let mut out = Vec::new();
    let (pq, pq2) = (positive_part(q), positive_part(q2));
    if let Some(theta) = find_isomorphism(&pq, &pq2) {
        let (d, d2) = (&q.disjuncts[0], &q2.disjuncts[0]);
        if let Some((base, gamma)) = canonical_database(q) {
            let mapped: BTreeSet<Atom> = d2.negated_atoms().map(|a| theta.apply_atom(a)).collect();
            let own: BTreeSet<&Atom> = d.negated_atoms().collect();
            let extra = d
                .negated_atoms()
                .filter(|a| !mapped.contains(*a))
                .cloned()
                .chain(mapped.iter().filter(|a| !own.contains(a)).cloned());
            for a in extra {
                let mut db = base.clone();
                db.insert(Fact { predicate: a.predicate.clone(), args: a.args.iter().map(|t| value(t, &gamma)).collect() });
                out.push(db);
            }
        }
    }
    out.extend(canonical_database(q).map(|(db, _)| db));
    out.extend(canonical_database(q2).map(|(db, _)| db));
    out
}

fn found(c: Counterexample) -> Verdict {
    Verdict { status: Status::NotEquivalent, counterexample: Some(c), n_used: None, reason: None }
}

fn equivalent_verdict() -> Verdict {
    Verdict { status: Status::Equivalent, counterexample: None, n_used: None, reason: None }
}

/// A verified counterexample for a pair known to be inequivalent.
fn counterexample(q: &Query, q2: &Query, options: &EngineOptions) -> Result<Verdict, QuasilinearError> {
    for db in candidate_databases(q, q2) {
        if let Some(c) = oracle::compare_on(q, q2, &db) {
            return Ok(found(c));
        }
    }
    let n = term_size_pair(q, q2);
    for k in n..=n + 2 {
        match engine::n_equivalent(q, q2, k, options) {
            Ok(v) if v.status == Status::NotEquivalent => return Ok(v),
            Ok(_) => {}
            Err(EngineError::TooManyAtoms { .. }) => break,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Verdict::unsupported("queries are not isomorphic but no counterexample was found"))
}

fn cntd_shape_supported(q: &Query) -> bool {
    let d = &q.disjuncts[0];
    d.comparisons.iter().all(|c| matches!(c.op, CmpOp::Le | CmpOp::Ge))
        && (q.domain == Domain::Rationals || q.constants().is_empty())
}

/// CNTD of a constant, or of a grouping variable, is 1 in every group.
fn cntd_is_one(q: &Query) -> bool {
    q.aggregate_args().iter().all(|t| !t.is_var() || q.grouping.contains(t))
}

fn without_aggregate(q: &Query) -> Query {
    Query { aggregate: None, ..q.clone() }
}

/// Equivalence of quasilinear conjunctive queries with the same function.
pub fn equivalent_quasilinear(q: &Query, q2: &Query, options: &EngineOptions) -> Result<Verdict, QuasilinearError> {
    if q.domain != q2.domain {
        return Err(QuasilinearError::DomainMismatch);
    }
    if q.function() != q2.function() {
        return Err(QuasilinearError::FunctionMismatch);
    }
    for x in [q, q2] {
        if !is_quasilinear(x)? {
            return Err(QuasilinearError::NotQuasilinear(x.name.to_string()));
        }
    }
    let (r, r2) = (reduce_query(q), reduce_query(q2));
    match (is_unsatisfiable(&r), is_unsatisfiable(&r2)) {
        (true, true) => return Ok(equivalent_verdict()),
        (false, false) => {}
        _ => return counterexample(q, q2, options),
    }
    if r.grouping.len() != r2.grouping.len() {
        return counterexample(q, q2, options);
    }
    let f = q.function().unwrap_or(AggFn::Count);
    let isomorphic = if f.singleton_determining() {
        find_isomorphism(&r, &r2).is_some()
    } else {
        if !(cntd_shape_supported(&r) && cntd_shape_supported(&r2)) {
            return Ok(Verdict::unsupported(
                "CNTD queries are only decided with <= and >= comparisons over the rationals or without constants",
            ));
        }
        match (cntd_is_one(&r), cntd_is_one(&r2)) {
            (true, true) => find_isomorphism(&without_aggregate(&r), &without_aggregate(&r2)).is_some(),
            (false, false) => find_isomorphism(&r, &r2).is_some(),
            _ => false,
        }
    };
    if isomorphic {
        Ok(equivalent_verdict())
    } else {
        counterexample(&r, &r2, options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn q(text: &str) -> Query {
        parse_query(text, Domain::Rationals).unwrap()
    }

    fn decide(a: &str, b: &str) -> Verdict {
        let v = equivalent_quasilinear(&q(a), &q(b), &EngineOptions::default()).unwrap();
        if let Some(c) = &v.counterexample {
            assert!(oracle::compare_on(&q(a), &q(b), &c.database).is_some());
        }
        v
    }

    #[test]
    fn recognises_quasilinear_bodies() {
        assert!(is_quasilinear(&q("q(; count()) :- p(X), r(X, Y), !s(X)")).unwrap());
        assert!(!is_quasilinear(&q("q(; count()) :- p(X), p(Y)")).unwrap());
        assert!(!is_quasilinear(&q("q(; count()) :- r(X), !p(X), p(Y)")).unwrap());
        assert!(is_quasilinear(&q("q(; count()) :- p(1), p(2)")).unwrap());
        assert!(!is_quasilinear(&q("q(; count()) :- p(1), p(X)")).unwrap());
        assert!(is_quasilinear(&q("q(; count()) :- p(X) | p(X)")).is_err());
    }

    #[test]
    fn isomorphism_examples() {
        let a = q("q(X; sum(Y)) :- p(X, Y)");
        let b = q("r(U; sum(V)) :- p(U, V)");
        let h = find_isomorphism(&a, &b).unwrap();
        assert_eq!(h.apply(&Term::var("U")), Term::var("X"));
        assert!(find_isomorphism(&q("q(; max(Y)) :- p(X, Y), X < Y"), &q("q(; max(Y)) :- p(X, Y), Y > X")).is_some());
        assert!(find_isomorphism(&q("q(; count()) :- p(X), !s(X)"), &q("q(; count()) :- p(X), !t(X)")).is_none());
        assert!(find_isomorphism(&q("q(; max(Y)) :- p(X, Y), X < Y"), &q("q(; max(Y)) :- p(X, Y), X <= Y")).is_none());
    }

    #[test]
    fn singleton_determining_pairs() {
        assert_eq!(decide("q(; max(Y)) :- p(X, Y)", "r(; max(B)) :- p(A, B)").status, Status::Equivalent);
        let v = decide("q(; sum(Y)) :- p(X, Y), !s(X)", "q(; sum(Y)) :- p(X, Y), !t(X)");
        assert_eq!(v.status, Status::NotEquivalent);
        assert_eq!(v.counterexample.unwrap().database.len(), 2);
        assert_eq!(decide("q(; max(Y)) :- p(X, Y), X < Y", "q(; max(Y)) :- p(X, Y), X <= Y").status, Status::NotEquivalent);
        assert_eq!(decide("q(; max(X)) :- p(X, Y)", "q(; max(Y)) :- p(X, Y)").status, Status::NotEquivalent);
    }

    #[test]
    fn cntd_constants() {
        assert_eq!(decide("q(; cntd(1)) :- p(1), p(2)", "q(; cntd(2)) :- p(1), p(2)").status, Status::Equivalent);
        assert!(find_isomorphism(&q("q(; cntd(1)) :- p(1), p(2)"), &q("q(; cntd(2)) :- p(1), p(2)")).is_none());
        assert_eq!(decide("q(; cntd(X)) :- p(X)", "q(; cntd(X)) :- p(X), X >= 3").status, Status::NotEquivalent);
        assert_eq!(decide("q(; cntd(X)) :- p(X)", "q(; cntd(X)) :- p(X), X > 3").status, Status::Unsupported);
    }

    #[test]
    fn unsatisfiable_pairs() {
        assert_eq!(decide("q(; count()) :- p(X), X < 1, X > 2", "q(; count()) :- r(X), X > X").status, Status::Equivalent);
        assert_eq!(decide("q(; count()) :- p(X), X < 1, X > 2", "q(; count()) :- r(X)").status, Status::NotEquivalent);
    }

    #[test]
    fn fifty_atom_pair_is_fast() {
        let body = |v: &str| (0..50).map(|i| format!("p{i}({v}{i}, {v}{})", i + 1)).collect::<Vec<_>>().join(", ");
        let a = q(&format!("q(X0; sum(X50)) :- {}", body("X")));
        let b = q(&format!("q(Y0; sum(Y50)) :- {}", body("Y")));
        let start = std::time::Instant::now();
        let v = equivalent_quasilinear(&a, &b, &EngineOptions::default()).unwrap();
        assert_eq!(v.status, Status::Equivalent);
        assert!(start.elapsed().as_secs_f64() < 1.0);
    }
}
