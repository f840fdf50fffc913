//! Independent concrete semantics and exhaustive small-model search.
//!
//! Everything here works on concrete databases only and shares no code with
//! the symbolic engine apart from the query types and `aggregation::apply`.

pub mod decomposition;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::aggregation::{apply, AggFn, AggregateValue};
use crate::database::{Database, Fact};
use crate::query::{Atom, Condition, Domain, Query, Term, Value};

/// A satisfying assignment of one disjunct.
pub type Binding = BTreeMap<Arc<str>, Value>;

/// Result of a query: one aggregate value per group.
pub type Results = BTreeMap<Vec<Value>, AggregateValue>;

/// Groups with their bags of aggregated tuples.
pub type Bags = BTreeMap<Vec<Value>, Vec<Vec<Value>>>;

pub(crate) fn value_of(t: &Term, b: &Binding) -> Option<Value> {
    match t {
        Term::Const(c) => Some(c.clone()),
        Term::Var(v) => b.get(v).cloned(),
    }
}

fn ground_atom(a: &Atom, b: &Binding) -> Option<Vec<Value>> {
    a.args.iter().map(|t| value_of(t, b)).collect()
}

/// Evaluates each literal whose terms are all bound; `false` on a violation.
fn consistent(d: &Condition, b: &Binding, db: &Database) -> bool {
    for a in &d.atoms {
        if let Some(args) = ground_atom(a, b) {
            if db.contains_atom(&a.predicate, &args) == a.negated {
                return false;
            }
        }
    }
    for c in &d.comparisons {
        if let (Some(l), Some(r)) = (value_of(&c.lhs, b), value_of(&c.rhs, b)) {
            if !c.op.eval(&l, &r) {
                return false;
            }
        }
    }
    true
}

/// All assignments of `d` over the carrier of `db`, in lexicographic order of
/// the variables sorted by name and values sorted numerically.
pub fn satisfying_assignments(d: &Condition, db: &Database) -> Vec<Binding> {
    let vars: Vec<Arc<str>> = d.variables().into_iter().collect();
    let carrier: Vec<Value> = db.carrier().into_iter().collect();
    let mut out = Vec::new();
    let mut b = Binding::new();
    fn go(
        i: usize,
        vars: &[Arc<str>],
        carrier: &[Value],
        d: &Condition,
        db: &Database,
        b: &mut Binding,
        out: &mut Vec<Binding>,
    ) {
        if !consistent(d, b, db) {
            return;
        }
        if i == vars.len() {
            out.push(b.clone());
            return;
        }
        for v in carrier {
            b.insert(vars[i].clone(), v.clone());
            go(i + 1, vars, carrier, d, db, b, out);
        }
        b.remove(&vars[i]);
    }
    go(0, &vars, &carrier, d, db, &mut b, &mut out);
    out
}

/// Groups and bags of `q` on `db` under labeled-assignment semantics: every
/// satisfied disjunct contributes its own copy.
pub fn eval_bags(q: &Query, db: &Database) -> Bags {
    let mut bags = Bags::new();
    for d in &q.disjuncts {
        for b in satisfying_assignments(d, db) {
            let key: Vec<Value> = q.grouping.iter().map(|t| value_of(t, &b).expect("safe")).collect();
            let tuple: Vec<Value> = q.aggregate_args().iter().map(|t| value_of(t, &b).expect("safe")).collect();
            bags.entry(key).or_default().push(tuple);
        }
    }
    bags
}

/// Concrete result of `q` on `db`. Queries without aggregate term count.
pub fn eval_concrete(q: &Query, db: &Database) -> Results {
    let f = q.function().unwrap_or(AggFn::Count);
    eval_bags(q, db)
        .into_iter()
        .map(|(k, bag)| {
            let bag = if q.aggregate.is_none() { vec![vec![]; bag.len()] } else { bag };
            let v = apply(f, &bag).expect("groups are nonempty");
            (k, v)
        })
        .collect()
}

/// Numeric view of a value, so that for example COUNT 1 equals SUM 1.
pub fn normalize(v: &AggregateValue) -> AggregateValue {
    match v {
        AggregateValue::Integer(n) => AggregateValue::Rational(Value::from_integer(n.clone())),
        AggregateValue::Bit(b) => AggregateValue::Rational(if *b { Value::one() } else { Value::zero() }),
        other => other.clone(),
    }
}

/// A database on which two queries disagree, with the first differing group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub database: Database,
    pub grouping: Vec<Value>,
    pub value_q: Option<AggregateValue>,
    pub value_q_prime: Option<AggregateValue>,
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let key: Vec<String> = self.grouping.iter().map(crate::query::value_to_string).collect();
        let show = |v: &Option<AggregateValue>| v.as_ref().map_or("no group".to_string(), |v| v.to_string());
        write!(f, "group ({}): {} vs {}", key.join(", "), show(&self.value_q), show(&self.value_q_prime))
    }
}

/// The first group (in key order) whose values differ.
pub fn first_difference(a: &Results, b: &Results) -> Option<(Vec<Value>, Option<AggregateValue>, Option<AggregateValue>)> {
    let keys: BTreeSet<&Vec<Value>> = a.keys().chain(b.keys()).collect();
    keys.into_iter().find_map(|k| {
        let (x, y) = (a.get(k), b.get(k));
        let same = match (x, y) {
            (Some(x), Some(y)) => normalize(x) == normalize(y),
            _ => false,
        };
        (!same).then(|| (k.clone(), x.cloned(), y.cloned()))
    })
}

/// Evaluates both queries on `db` and reports a difference, if any.
pub fn compare_on(q: &Query, q2: &Query, db: &Database) -> Option<Counterexample> {
    first_difference(&eval_concrete(q, db), &eval_concrete(q2, db)).map(|(grouping, value_q, value_q_prime)| {
        Counterexample { database: db.clone(), grouping, value_q, value_q_prime }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("search space of {candidates} databases exceeds the cap of {cap}")]
    TooLarge { candidates: u128, cap: u128 },
    #[error("{0}")]
    Invalid(String),
}

/// Predicates of both queries with their arities.
pub fn joint_predicates(q: &Query, q2: &Query) -> Vec<(Arc<str>, usize)> {
    let mut ps = q.predicates();
    ps.extend(q2.predicates());
    ps.into_iter().collect()
}

/// All facts over `preds` with arguments from `values`.
pub fn all_facts(preds: &[(Arc<str>, usize)], values: &[Value]) -> Vec<Fact> {
    let mut out = Vec::new();
    for (p, k) in preds {
        let mut tuples: Vec<Vec<Value>> = vec![Vec::new()];
        for _ in 0..*k {
            tuples = tuples
                .iter()
                .flat_map(|t| {
                    values.iter().map(move |v| {
                        let mut t = t.clone();
                        t.push(v.clone());
                        t
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|args| Fact { predicate: p.clone(), args }));
    }
    out
}

fn subsets_up_to<T: Clone>(items: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for x in items {
        let extra: Vec<Vec<T>> = out
            .iter()
            .filter(|s| s.len() < max)
            .map(|s| {
                let mut s = s.clone();
                s.push(x.clone());
                s
            })
            .collect();
        out.extend(extra);
    }
    out
}

/// Number of databases `brute_force_check` would visit.
pub fn brute_force_size(preds: &[(Arc<str>, usize)], pool: &[Value], bound: usize) -> u128 {
    let mut total: u128 = 0;
    for vs in subsets_up_to(pool, bound) {
        let atoms = all_facts(preds, &vs).len() as u32;
        total = total.saturating_add(if atoms >= 127 { u128::MAX } else { 1u128 << atoms });
    }
    total
}

/// Exhaustively compares two queries on every database whose carrier is a
/// subset of `pool` with at most `bound` elements. Returns the first
/// counterexample found.
pub fn brute_force_check(
    q: &Query,
    q2: &Query,
    pool: &[Value],
    bound: usize,
    cap: u128,
) -> Result<Option<Counterexample>, OracleError> {
    let preds = joint_predicates(q, q2);
    let candidates = brute_force_size(&preds, pool, bound);
    if candidates > cap {
        return Err(OracleError::TooLarge { candidates, cap });
    }
    for vs in subsets_up_to(pool, bound) {
        let facts = all_facts(&preds, &vs);
        let used: BTreeSet<Value> = vs.iter().cloned().collect();
        for mask in 0u64..(1u64 << facts.len()) {
            let db: Database = facts
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, f)| f.clone())
                .collect();
            if db.carrier() != used {
                continue;
            }
            if let Some(c) = compare_on(q, q2, &db) {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

/// Query constants plus 0, 1 and 2.
pub fn default_pool(q: &Query, q2: &Query) -> Vec<Value> {
    let mut pool = q.constants();
    pool.extend(q2.constants());
    pool.extend([0, 1, 2].map(|i| Value::from_integer(BigInt::from(i))));
    pool.into_iter().collect()
}

/// A pool with `n + 1` representatives of every region cut out by the query
/// constants: below the least, inside each gap, above the greatest. Over the
/// integers a gap contributes at most its number of integer points.
pub fn matched_pool(q: &Query, q2: &Query, n: usize) -> Vec<Value> {
    let mut constants = q.constants();
    constants.extend(q2.constants());
    let domain = if q.domain == Domain::Integers || q2.domain == Domain::Integers { Domain::Integers } else { Domain::Rationals };
    let k = |i: usize| Value::from_integer(BigInt::from(i));
    let cs: Vec<Value> = constants.iter().cloned().collect();
    if cs.is_empty() {
        return (0..=n).map(k).collect();
    }
    let mut pool: BTreeSet<Value> = constants.clone();
    let lo = cs[0].clone();
    let hi = cs[cs.len() - 1].clone();
    for i in 1..=n + 1 {
        pool.insert(&lo - k(i));
        pool.insert(&hi + k(i));
    }
    for w in cs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        match domain {
            Domain::Rationals => {
                for i in 1..=n + 1 {
                    pool.insert(a + (b - a) * k(i) / k(n + 2));
                }
            }
            Domain::Integers => {
                let mut v = a + Value::one();
                let mut count = 0;
                while &v < b && count <= n {
                    pool.insert(v.clone());
                    v += Value::one();
                    count += 1;
                }
            }
        }
    }
    pool.into_iter().collect()
}
