//! Reduction: drop unsatisfiable disjuncts and eliminate entailed equalities.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{CmpOp, Comparison, Condition, ConstraintSet, Query, Term, Value};

/// Reduces every disjunct of `q`.
///
/// Unsatisfiable disjuncts are removed, so an unsatisfiable query comes back
/// with no disjuncts. Variables entailed equal to a constant or to another
/// variable are replaced by a representative: the constant if there is one,
/// otherwise the least variable name. When `q` has several disjuncts its
/// head must stay shared, so head variables are never replaced; the entailed
/// equality is kept as an explicit `=` comparison instead.
pub fn reduce_query(q: &Query) -> Query {
    let head_vars: BTreeSet<Arc<str>> =
        q.head_terms().filter_map(|t| t.as_var().map(Arc::from)).collect();
    let conjunctive = q.is_conjunctive();
    let mut out = q.clone();
    out.disjuncts.clear();
    for d in &q.disjuncts {
        let protected = if conjunctive { BTreeSet::new() } else { head_vars.clone() };
        if let Some((cond, subst)) = reduce_condition(d, q, &protected) {
            if conjunctive {
                let apply = |t: &Term| substitute(t, &subst);
                out.grouping = q.grouping.iter().map(apply).collect();
                if let (Some(agg), Some(src)) = (out.aggregate.as_mut(), q.aggregate.as_ref()) {
                    agg.args = src.args.iter().map(apply).collect();
                }
            }
            out.disjuncts.push(cond);
        }
    }
    out
}

/// Whether the query has no satisfiable disjunct.
pub fn is_unsatisfiable(q: &Query) -> bool {
    reduce_query(q).disjuncts.is_empty()
}

fn substitute(t: &Term, subst: &BTreeMap<Arc<str>, Term>) -> Term {
    match t {
        Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
    }
}

fn reduce_condition(
    d: &Condition,
    q: &Query,
    protected: &BTreeSet<Arc<str>>,
) -> Option<(Condition, BTreeMap<Arc<str>, Term>)> {
    let cs = ConstraintSet::new(q.domain, d.comparisons.clone());
    if !cs.satisfiable() {
        return None;
    }
    let vars: Vec<Arc<str>> = d.variables().into_iter().collect();
    let forced: BTreeMap<Arc<str>, Value> =
        vars.iter().filter_map(|v| cs.forced_value(v).map(|c| (v.clone(), c))).collect();
    // Union of variables entailed equal; vars are sorted so the first is the least.
    let free: Vec<&Arc<str>> = vars.iter().filter(|v| !forced.contains_key(*v)).collect();
    let mut classes: Vec<Vec<Arc<str>>> = Vec::new();
    for v in &free {
        let hit = classes.iter().position(|cl| {
            cs.entails(&Comparison::new(Term::Var(cl[0].clone()), CmpOp::Eq, Term::Var((*v).clone())))
        });
        match hit {
            Some(i) => classes[i].push((*v).clone()),
            None => classes.push(vec![(*v).clone()]),
        }
    }

    let mut subst: BTreeMap<Arc<str>, Term> = BTreeMap::new();
    let mut kept: Vec<Comparison> = Vec::new();
    for (v, c) in &forced {
        if protected.contains(v) {
            kept.push(Comparison::new(Term::Var(v.clone()), CmpOp::Eq, Term::Const(c.clone())));
        } else {
            subst.insert(v.clone(), Term::Const(c.clone()));
        }
    }
    for class in &classes {
        let rep = class.iter().find(|v| protected.contains(*v)).unwrap_or(&class[0]).clone();
        for v in class.iter().filter(|v| **v != rep) {
            if protected.contains(v) {
                kept.push(Comparison::new(Term::Var(rep.clone()), CmpOp::Eq, Term::Var(v.clone())));
            } else {
                subst.insert(v.clone(), Term::Var(rep.clone()));
            }
        }
    }

    let mut atoms = Vec::new();
    for a in &d.atoms {
        let mut a = a.clone();
        a.args = a.args.iter().map(|t| substitute(t, &subst)).collect();
        if !atoms.contains(&a) {
            atoms.push(a);
        }
    }
    let contradictory = atoms.iter().any(|a| {
        a.negated && atoms.iter().any(|b| !b.negated && b.predicate == a.predicate && b.args == a.args)
    });
    if contradictory {
        return None;
    }

    let mut comparisons: Vec<Comparison> = Vec::new();
    for c in d.comparisons.iter().cloned().chain(kept) {
        let c = Comparison::new(substitute(&c.lhs, &subst), c.op, substitute(&c.rhs, &subst));
        if is_trivial(&c) {
            continue;
        }
        let mirrored = Comparison::new(c.rhs.clone(), c.op.flip(), c.lhs.clone());
        if !comparisons.contains(&c) && !comparisons.contains(&mirrored) {
            comparisons.push(c);
        }
    }
    Some((Condition { atoms, comparisons }, subst))
}

/// True comparisons between constants, and reflexive `t = t`, `t <= t`, `t >= t`.
fn is_trivial(c: &Comparison) -> bool {
    match (&c.lhs, &c.rhs) {
        (Term::Const(a), Term::Const(b)) => c.op.eval(a, b),
        (a, b) if a == b => matches!(c.op, CmpOp::Eq | CmpOp::Le | CmpOp::Ge),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{parse_query, Domain};

    fn reduced(text: &str, domain: Domain) -> String {
        reduce_query(&parse_query(text, domain).unwrap()).to_string()
    }

    #[test]
    fn drops_unsatisfiable_disjuncts() {
        assert_eq!(
            reduced("q(; count()) :- p(X), X < 1, X > 2 | p(X)", Domain::Rationals),
            "q(; count()) :- p(X)"
        );
        let q = parse_query("q(; count()) :- p(X), X > 0, X < 1", Domain::Integers).unwrap();
        assert!(is_unsatisfiable(&q));
        let q = parse_query("q(; count()) :- p(X), !p(X)", Domain::Rationals).unwrap();
        assert!(is_unsatisfiable(&q));
    }

    #[test]
    fn substitutes_forced_values_and_equalities() {
        assert_eq!(reduced("q(; count()) :- p(X), X > 0, X < 2", Domain::Integers), "q(; count()) :- p(1)");
        assert_eq!(
            reduced("q(; count()) :- p(X, Y), X <= Y, Y <= X", Domain::Rationals),
            "q(; count()) :- p(X, X)"
        );
        assert_eq!(reduced("q(X; sum(Y)) :- p(X, Y), Y = 3", Domain::Rationals), "q(X; sum(3)) :- p(X, 3)");
    }

    #[test]
    fn keeps_head_variables_in_disjunctions() {
        assert_eq!(
            reduced("q(X; count()) :- p(X), X = 3 | r(X)", Domain::Rationals),
            "q(X; count()) :- p(X), X = 3 | r(X)"
        );
    }

    #[test]
    fn deduplicates_literals() {
        assert_eq!(
            reduced("q(X) :- p(X), p(X), X < 3, 3 > X", Domain::Rationals),
            "q(X) :- p(X), X < 3"
        );
    }
}
