//! Satisfiability and entailment for conjunctions of comparisons.
//!
//! Comparisons between terms are difference constraints `a - b <= k` or
//! `a - b < k` over variables and a distinguished zero node. Closure by
//! Floyd–Warshall decides satisfiability over the rationals; over the
//! integers strict bounds are tightened to `k - 1` first. Disequalities
//! are handled by branching into `<` and `>`.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::{CmpOp, Comparison, Domain, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Bound {
    value: Value,
    strict: bool,
}

impl Bound {
    fn tighter_than(&self, other: &Bound) -> bool {
        self.value < other.value || (self.value == other.value && self.strict && !other.strict)
    }

    fn add(&self, other: &Bound) -> Bound {
        Bound { value: &self.value + &other.value, strict: self.strict || other.strict }
    }

    fn is_negative(&self) -> bool {
        self.value < Value::zero() || (self.value.is_zero() && self.strict)
    }
}

/// A conjunction of comparisons over a numeric domain.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    pub domain: Domain,
    pub comparisons: Vec<Comparison>,
}

/// Difference constraint `to - from <= / < bound`.
struct Edge {
    from: usize,
    to: usize,
    bound: Bound,
}

impl ConstraintSet {
    pub fn new(domain: Domain, comparisons: Vec<Comparison>) -> Self {
        ConstraintSet { domain, comparisons }
    }

    /// The set extended with one more comparison.
    pub fn with(&self, extra: Comparison) -> ConstraintSet {
        let mut comparisons = self.comparisons.clone();
        comparisons.push(extra);
        ConstraintSet { domain: self.domain, comparisons }
    }

    pub fn satisfiable(&self) -> bool {
        let mut nodes: HashMap<Arc<str>, usize> = HashMap::new();
        for c in &self.comparisons {
            for t in [&c.lhs, &c.rhs] {
                if let Term::Var(v) = t {
                    let n = nodes.len() + 1;
                    nodes.entry(v.clone()).or_insert(n);
                }
            }
        }
        let mut edges = Vec::new();
        let mut disequalities = Vec::new();
        for c in &self.comparisons {
            if c.op == CmpOp::Ne {
                disequalities.push(c);
            } else {
                self.push_edges(c, c.op, &nodes, &mut edges);
            }
        }
        self.branch(&nodes, &mut edges, &disequalities)
    }

    fn branch<'a>(&self, nodes: &HashMap<Arc<str>, usize>, edges: &mut Vec<Edge>, rest: &[&'a Comparison]) -> bool {
        match rest.split_first() {
            None => self.closure_consistent(nodes.len() + 1, edges),
            Some((c, tail)) => {
                for op in [CmpOp::Lt, CmpOp::Gt] {
                    let before = edges.len();
                    self.push_edges(c, op, nodes, edges);
                    let ok = self.closure_consistent(nodes.len() + 1, edges) && self.branch(nodes, edges, tail);
                    edges.truncate(before);
                    if ok {
                        return true;
                    }
                }
                false
            }
        }
    }

    fn push_edges(&self, c: &Comparison, op: CmpOp, nodes: &HashMap<Arc<str>, usize>, edges: &mut Vec<Edge>) {
        let split = |t: &Term| match t {
            Term::Var(v) => (nodes[v], Value::zero()),
            Term::Const(k) => (0usize, k.clone()),
        };
        let (a, ca) = split(&c.lhs);
        let (b, cb) = split(&c.rhs);
        // lhs op rhs  <=>  a - b op (cb - ca)
        let k = &cb - &ca;
        let mut push = |to: usize, from: usize, value: Value, strict: bool| {
            let bound = self.normalize(Bound { value, strict });
            edges.push(Edge { from, to, bound });
        };
        match op {
            CmpOp::Lt => push(a, b, k, true),
            CmpOp::Le => push(a, b, k, false),
            CmpOp::Gt => push(b, a, -k, true),
            CmpOp::Ge => push(b, a, -k, false),
            CmpOp::Eq => {
                push(a, b, k.clone(), false);
                push(b, a, -k, false);
            }
            CmpOp::Ne => unreachable!("disequalities are branched"),
        }
    }

    fn normalize(&self, b: Bound) -> Bound {
        match self.domain {
            Domain::Rationals => b,
            Domain::Integers => {
                let floor = b.value.floor();
                if b.strict && floor == b.value {
                    Bound { value: floor - Value::one(), strict: false }
                } else {
                    Bound { value: floor, strict: false }
                }
            }
        }
    }

    fn closure_consistent(&self, n: usize, edges: &[Edge]) -> bool {
        let mut d: Vec<Vec<Option<Bound>>> = vec![vec![None; n]; n];
        for e in edges {
            let slot = &mut d[e.from][e.to];
            if slot.as_ref().is_none_or(|cur| e.bound.tighter_than(cur)) {
                *slot = Some(e.bound.clone());
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = d[i][k].clone() else { continue };
                for j in 0..n {
                    let Some(kj) = &d[k][j] else { continue };
                    let via = self.normalize(ik.add(kj));
                    if d[i][j].as_ref().is_none_or(|cur| via.tighter_than(cur)) {
                        d[i][j] = Some(via);
                    }
                }
                if d[i][i].as_ref().is_some_and(Bound::is_negative) {
                    return false;
                }
            }
        }
        (0..n).all(|i| !d[i][i].as_ref().is_some_and(Bound::is_negative))
    }

    /// Whether every solution satisfies `phi`.
    pub fn entails(&self, phi: &Comparison) -> bool {
        !self.with(phi.negated()).satisfiable()
    }

    /// The single value `var` takes in every solution, if there is one.
    pub fn forced_value(&self, var: &str) -> Option<Value> {
        let x = Term::var(var);
        let (lo, hi) = self.bounds(var);
        if let (Some(lo), Some(hi)) = (&lo, &hi) {
            if lo == hi {
                let c = lo.clone();
                return self.entails(&Comparison::new(x, CmpOp::Eq, Term::Const(c.clone()))).then_some(c);
            }
            if self.domain == Domain::Integers && hi - lo <= Value::from_integer(64.into()) {
                let mut found = None;
                let mut v = lo.clone();
                while &v <= hi {
                    if self.with(Comparison::new(x.clone(), CmpOp::Eq, Term::Const(v.clone()))).satisfiable() {
                        if found.is_some() {
                            return None;
                        }
                        found = Some(v.clone());
                    }
                    v += Value::one();
                }
                return found;
            }
        }
        None
    }

    /// Non-strict lower and upper bounds on `var` implied by the non-disequality part.
    fn bounds(&self, var: &str) -> (Option<Value>, Option<Value>) {
        let mut nodes: HashMap<Arc<str>, usize> = HashMap::new();
        for c in &self.comparisons {
            for t in [&c.lhs, &c.rhs] {
                if let Term::Var(v) = t {
                    let n = nodes.len() + 1;
                    nodes.entry(v.clone()).or_insert(n);
                }
            }
        }
        let Some(&x) = nodes.get(var) else { return (None, None) };
        let mut edges = Vec::new();
        for c in self.comparisons.iter().filter(|c| c.op != CmpOp::Ne) {
            self.push_edges(c, c.op, &nodes, &mut edges);
        }
        let n = nodes.len() + 1;
        let mut d: Vec<Vec<Option<Bound>>> = vec![vec![None; n]; n];
        for e in &edges {
            let slot = &mut d[e.from][e.to];
            if slot.as_ref().is_none_or(|cur| e.bound.tighter_than(cur)) {
                *slot = Some(e.bound.clone());
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(ik) = d[i][k].clone() else { continue };
                for j in 0..n {
                    let Some(kj) = &d[k][j] else { continue };
                    let via = self.normalize(ik.add(kj));
                    if d[i][j].as_ref().is_none_or(|cur| via.tighter_than(cur)) {
                        d[i][j] = Some(via);
                    }
                }
            }
        }
        // x - 0 <= d[0][x]; 0 - x <= d[x][0]
        let hi = d[0][x].as_ref().map(|b| b.value.clone());
        let lo = d[x][0].as_ref().map(|b| -b.value.clone());
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::int;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn c(l: Term, op: CmpOp, r: Term) -> Comparison {
        Comparison::new(l, op, r)
    }

    #[test]
    fn strict_gap_depends_on_domain() {
        let cs = vec![c(v("X"), CmpOp::Gt, Term::int(0)), c(v("X"), CmpOp::Lt, Term::int(1))];
        assert!(ConstraintSet::new(Domain::Rationals, cs.clone()).satisfiable());
        assert!(!ConstraintSet::new(Domain::Integers, cs).satisfiable());
    }

    #[test]
    fn cycle_of_strict_is_unsat() {
        let cs = vec![c(v("X"), CmpOp::Lt, v("Y")), c(v("Y"), CmpOp::Le, v("X"))];
        assert!(!ConstraintSet::new(Domain::Rationals, cs).satisfiable());
    }

    #[test]
    fn disequality_branches() {
        let cs = vec![c(v("X"), CmpOp::Ge, Term::int(0)), c(v("X"), CmpOp::Le, Term::int(0)), c(v("X"), CmpOp::Ne, Term::int(0))];
        assert!(!ConstraintSet::new(Domain::Rationals, cs).satisfiable());
        let cs = vec![c(v("X"), CmpOp::Ne, v("Y")), c(v("X"), CmpOp::Le, v("Y"))];
        assert!(ConstraintSet::new(Domain::Rationals, cs).satisfiable());
    }

    #[test]
    fn entailment_and_forced_values() {
        let cs = ConstraintSet::new(Domain::Integers, vec![c(v("X"), CmpOp::Gt, Term::int(0)), c(v("X"), CmpOp::Lt, Term::int(2))]);
        assert_eq!(cs.forced_value("X"), Some(int(1)));
        assert!(cs.entails(&c(v("X"), CmpOp::Eq, Term::int(1))));
        let cs = ConstraintSet::new(Domain::Rationals, vec![c(v("X"), CmpOp::Gt, Term::int(0)), c(v("X"), CmpOp::Lt, Term::int(2))]);
        assert_eq!(cs.forced_value("X"), None);
        let cs = ConstraintSet::new(
            Domain::Rationals,
            vec![c(v("X"), CmpOp::Le, v("Y")), c(v("Y"), CmpOp::Le, Term::int(3)), c(v("X"), CmpOp::Ge, Term::int(3))],
        );
        assert_eq!(cs.forced_value("Y"), Some(int(3)));
        assert!(cs.entails(&c(v("X"), CmpOp::Eq, v("Y"))));
    }

    #[test]
    fn constant_only_comparisons() {
        assert!(ConstraintSet::new(Domain::Rationals, vec![c(Term::int(1), CmpOp::Lt, Term::int(2))]).satisfiable());
        assert!(!ConstraintSet::new(Domain::Rationals, vec![c(Term::int(2), CmpOp::Lt, Term::int(2))]).satisfiable());
        assert!(!ConstraintSet::new(Domain::Rationals, vec![c(Term::int(2), CmpOp::Ne, Term::int(2))]).satisfiable());
    }
}
