//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use aggequiv::aggregation::AggFn;
use aggequiv::database::{Database, Fact};
use aggequiv::identity::OrderedIdentity;
use aggequiv::orderings::{enumerate_complete_orderings, Assignment, CompleteOrdering};
use aggequiv::query::{int, parse_query, ratio, Domain, Query, Term, Value};
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_value(r: &mut impl Rng, domain: Domain) -> Value {
    match domain {
        Domain::Integers => int(r.gen_range(-4..=4)),
        Domain::Rationals => ratio(r.gen_range(-8..=8), r.gen_range(1..=3)),
    }
}

fn positive_step(r: &mut impl Rng, domain: Domain) -> Value {
    match domain {
        Domain::Integers => int(r.gen_range(1..=3)),
        Domain::Rationals => ratio(r.gen_range(1..=8), r.gen_range(1..=4)),
    }
}

// ---------------------------------------------------------------------------
// Weak orders.

/// All weak orders of `n` labelled items as rank vectors, by brute force.
pub fn weak_orders(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut ranks = vec![0; n];
    fn go(i: usize, n: usize, ranks: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            let used: BTreeSet<usize> = ranks.iter().copied().collect();
            if used.iter().copied().eq(0..used.len()) {
                out.push(ranks.clone());
            }
            return;
        }
        for r in 0..n {
            ranks[i] = r;
            go(i + 1, n, ranks, out);
        }
    }
    go(0, n, &mut ranks, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Orderings and assignments.

pub fn var_terms(k: usize) -> Vec<Term> {
    ["X", "Y", "Z", "U", "V", "W"][..k].iter().map(|v| Term::var(v)).collect()
}

/// A uniformly chosen complete ordering of `terms`.
pub fn random_ordering(r: &mut impl Rng, terms: &[Term], domain: Domain) -> CompleteOrdering {
    let set: BTreeSet<Term> = terms.iter().cloned().collect();
    let all: Vec<CompleteOrdering> = enumerate_complete_orderings(&set, domain).collect();
    all.choose(r).expect("some ordering exists").clone()
}

/// A random assignment satisfying `ordering`, built class by class.
pub fn sample_assignment(r: &mut impl Rng, ordering: &CompleteOrdering) -> Assignment {
    let domain = ordering.domain();
    let classes = ordering.classes();
    let anchor = |i: usize| classes[i].iter().find_map(|t| t.as_const().cloned());
    let mut values: Vec<Value> = Vec::with_capacity(classes.len());
    for i in 0..classes.len() {
        if let Some(a) = anchor(i) {
            values.push(a);
            continue;
        }
        let prev = values.last().cloned();
        let next = (i + 1..classes.len()).find_map(|j| anchor(j).map(|a| (j, a)));
        let v = match (prev, next) {
            (None, None) => small_value(r, domain),
            (Some(p), None) => p + positive_step(r, domain),
            (None, Some((j, b))) => {
                let room = match domain {
                    Domain::Integers => int((j - i) as i64),
                    Domain::Rationals => Value::zero(),
                };
                b - room - positive_step(r, domain) + if domain == Domain::Integers { int(1) } else { Value::zero() }
            }
            (Some(p), Some((j, b))) => match domain {
                Domain::Integers => {
                    let lo = &p + int(1);
                    let hi = &b - int((j - i) as i64);
                    let span = (&hi - &lo).to_integer().try_into().unwrap_or(0i64).max(0);
                    lo + int(r.gen_range(0..=span))
                }
                Domain::Rationals => {
                    let k = r.gen_range(1..=7);
                    &p + (&b - &p) * ratio(k, 8)
                }
            },
        };
        values.push(v);
    }
    let mut delta = Assignment::new();
    for (class, v) in classes.iter().zip(values) {
        for t in class {
            if t.is_var() {
                delta.insert(t.clone(), v.clone());
            }
        }
    }
    delta
}

/// Whether `delta` satisfies `ordering`, checked directly.
pub fn satisfies(ordering: &CompleteOrdering, delta: &Assignment) -> bool {
    let value = |t: &Term| match t {
        Term::Const(c) => Some(c.clone()),
        Term::Var(_) => delta.get(t).cloned(),
    };
    let mut prev: Option<Value> = None;
    for class in ordering.classes() {
        let vals: Option<Vec<Value>> = class.iter().map(value).collect();
        let Some(vals) = vals else { return false };
        if vals.iter().any(|v| v != &vals[0]) || !ordering.domain().contains(&vals[0]) {
            return false;
        }
        if prev.as_ref().is_some_and(|p| p >= &vals[0]) {
            return false;
        }
        prev = Some(vals[0].clone());
    }
    true
}

// ---------------------------------------------------------------------------
// Fourier–Motzkin over the rationals.

/// `coeffs · x + constant > 0` (strict) or `>= 0`.
#[derive(Clone, Debug)]
pub struct Ineq {
    pub coeffs: Vec<Value>,
    pub constant: Value,
    pub strict: bool,
}

pub fn fm_feasible(mut rows: Vec<Ineq>, nvars: usize) -> bool {
    for k in 0..nvars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for row in rows {
            match row.coeffs[k].cmp(&Value::zero()) {
                std::cmp::Ordering::Greater => pos.push(row),
                std::cmp::Ordering::Less => neg.push(row),
                std::cmp::Ordering::Equal => rest.push(row),
            }
        }
        for p in &pos {
            for n in &neg {
                let (a, b) = (p.coeffs[k].clone(), -n.coeffs[k].clone());
                rest.push(Ineq {
                    coeffs: p.coeffs.iter().zip(&n.coeffs).map(|(x, y)| x * &b + y * &a).collect(),
                    constant: &p.constant * &b + &n.constant * &a,
                    strict: p.strict || n.strict,
                });
            }
        }
        rows = rest;
    }
    rows.iter().all(|r| if r.strict { r.constant.is_positive() } else { !r.constant.is_negative() })
}

type Linear = (Vec<Value>, Value);

fn linear_of(t: &Term, vars: &[Term]) -> Linear {
    let mut coeffs = vec![Value::zero(); vars.len()];
    match t {
        Term::Const(c) => (coeffs, c.clone()),
        Term::Var(_) => {
            coeffs[vars.iter().position(|v| v == t).unwrap()] = Value::one();
            (coeffs, Value::zero())
        }
    }
}

fn sub(a: &Linear, b: &Linear) -> Linear {
    (a.0.iter().zip(&b.0).map(|(x, y)| x - y).collect(), &a.1 - &b.1)
}

fn scale(a: &Linear, k: &Value) -> Linear {
    (a.0.iter().map(|x| x * k).collect(), &a.1 * k)
}

/// Constraints of a complete ordering over its variables.
fn ordering_rows(ordering: &CompleteOrdering, vars: &[Term]) -> Vec<Ineq> {
    let mut rows = Vec::new();
    let lin = |t: &Term| linear_of(t, vars);
    let classes = ordering.classes();
    for class in classes {
        for t in &class[1..] {
            let d = sub(&lin(t), &lin(&class[0]));
            rows.push(Ineq { coeffs: d.0.clone(), constant: d.1.clone(), strict: false });
            let d = scale(&d, &-Value::one());
            rows.push(Ineq { coeffs: d.0, constant: d.1, strict: false });
        }
    }
    for w in classes.windows(2) {
        let d = sub(&lin(&w[1][0]), &lin(&w[0][0]));
        rows.push(Ineq { coeffs: d.0, constant: d.1, strict: true });
    }
    rows
}

/// Validity of a SUM or AVG identity over the rationals, by deciding whether
/// the ordering together with a strict difference of the two sides is
/// feasible.
pub fn fm_sum_identity_valid(id: &OrderedIdentity) -> bool {
    assert_eq!(id.ordering.domain(), Domain::Rationals);
    let vars: Vec<Term> = id.ordering.terms().filter(|t| t.is_var()).cloned().collect();
    let total = |bag: &[Vec<Term>]| {
        bag.iter().fold((vec![Value::zero(); vars.len()], Value::zero()), |acc, t| {
            let l = linear_of(&t[0], &vars);
            (acc.0.iter().zip(&l.0).map(|(x, y)| x + y).collect(), acc.1 + l.1)
        })
    };
    let (l, r) = (total(&id.left), total(&id.right));
    let diff = match id.function {
        AggFn::Sum => sub(&l, &r),
        AggFn::Avg => sub(&scale(&l, &int(id.right.len() as i64)), &scale(&r, &int(id.left.len() as i64))),
        f => panic!("not a linear function: {f}"),
    };
    let base = ordering_rows(&id.ordering, &vars);
    [Value::one(), -Value::one()].iter().all(|sign| {
        let d = scale(&diff, sign);
        let mut rows = base.clone();
        rows.push(Ineq { coeffs: d.0, constant: d.1, strict: true });
        !fm_feasible(rows, vars.len())
    })
}

// ---------------------------------------------------------------------------
// Box search over the integers.

/// Every satisfying integer assignment with values within `slack` of the
/// ordering's constants (or of 0 when there are none).
pub fn box_assignments(ordering: &CompleteOrdering, slack: i64) -> Vec<Assignment> {
    let consts: Vec<Value> = ordering.terms().filter_map(|t| t.as_const().cloned()).collect();
    let lo = consts.iter().min().cloned().unwrap_or_else(Value::zero) - int(slack);
    let hi = consts.iter().max().cloned().unwrap_or_else(Value::zero) + int(slack);
    let classes = ordering.classes().to_vec();
    let mut out = Vec::new();
    fn go(i: usize, classes: &[Vec<Term>], prev: Option<Value>, hi: &Value, lo: &Value, acc: &mut Vec<Value>, out: &mut Vec<Vec<Value>>) {
        if i == classes.len() {
            out.push(acc.clone());
            return;
        }
        let anchor = classes[i].iter().find_map(|t| t.as_const().cloned());
        let start = prev.map_or(lo.clone(), |p| p + int(1));
        let candidates: Vec<Value> = match anchor {
            Some(a) => if a >= start { vec![a] } else { vec![] },
            None => {
                let mut v = start;
                let mut vs = Vec::new();
                while &v <= hi {
                    vs.push(v.clone());
                    v += int(1);
                }
                vs
            }
        };
        for v in candidates {
            acc.push(v.clone());
            go(i + 1, classes, Some(v), hi, lo, acc, out);
            acc.pop();
        }
    }
    let mut raw = Vec::new();
    go(0, &classes, None, &hi, &lo, &mut Vec::new(), &mut raw);
    for vals in raw {
        let mut delta = Assignment::new();
        for (class, v) in classes.iter().zip(&vals) {
            for t in class.iter().filter(|t| t.is_var()) {
                delta.insert(t.clone(), v.clone());
            }
        }
        out.push(delta);
    }
    out
}

// ---------------------------------------------------------------------------
// Random identities.

pub fn random_identity(r: &mut impl Rng, f: AggFn, domain: Domain) -> OrderedIdentity {
    let nvars = r.gen_range(1..=4);
    let nconsts = r.gen_range(0..=(5 - nvars).min(2));
    let mut terms = var_terms(nvars);
    let mut consts = BTreeSet::new();
    while consts.len() < nconsts {
        consts.insert(int(r.gen_range(-2..=3)));
    }
    terms.extend(consts.into_iter().map(Term::Const));
    let ordering = random_ordering(r, &terms, domain);
    let bag = |r: &mut ChaCha8Rng| -> Vec<Vec<Term>> {
        let n = r.gen_range(1..=4);
        (0..n)
            .map(|_| if f.arity() == 0 { vec![] } else { vec![terms.choose(r).unwrap().clone()] })
            .collect()
    };
    let mut local = ChaCha8Rng::seed_from_u64(r.gen());
    let left = bag(&mut local);
    let right = bag(&mut local);
    OrderedIdentity::new(ordering, left, right, f).expect("well-formed identity")
}

// ---------------------------------------------------------------------------
// Random queries and databases.

/// Shape of random queries: unary `p`, `b` and binary `e` over `X`, `Y`.
pub struct QueryShape {
    pub function: AggFn,
    pub domain: Domain,
    pub constants: Vec<i64>,
    pub max_disjuncts: usize,
    pub negation: bool,
    pub binary: bool,
}

fn random_disjunct(r: &mut impl Rng, shape: &QueryShape, head: &[&str]) -> String {
    let mut lits: Vec<String> = Vec::new();
    let needs_y = head.contains(&"Y");
    let two_vars = needs_y || r.gen_bool(0.4);
    if two_vars && shape.binary {
        lits.push(if r.gen_bool(0.5) { "e(X, Y)".into() } else { "e(Y, X)".into() });
    } else if two_vars {
        lits.push("p(X)".into());
        lits.push("p(Y)".into());
    } else {
        lits.push("p(X)".into());
    }
    let vars: Vec<&str> = if two_vars { vec!["X", "Y"] } else { vec!["X"] };
    if shape.negation && r.gen_bool(0.4) {
        lits.push(format!("!b({})", vars.choose(r).unwrap()));
    }
    if r.gen_bool(0.5) {
        let ops = ["<", "<=", ">", ">=", "!="];
        let op = ops.choose(r).unwrap();
        let lhs = vars.choose(r).unwrap().to_string();
        let rhs = if !shape.constants.is_empty() && (vars.len() == 1 || r.gen_bool(0.5)) {
            shape.constants.choose(r).unwrap().to_string()
        } else {
            vars.iter().find(|v| **v != lhs).map_or(lhs.clone(), |v| v.to_string())
        };
        if lhs != rhs {
            lits.push(format!("{lhs} {op} {rhs}"));
        }
    }
    lits.join(", ")
}

pub fn random_query(r: &mut impl Rng, shape: &QueryShape, name: &str) -> Query {
    let grouping = r.gen_bool(0.4);
    let arg = shape.function.arity() == 1;
    let mut head_vars = Vec::new();
    if grouping {
        head_vars.push("X");
    }
    if arg {
        head_vars.push(if grouping { "Y" } else if r.gen_bool(0.5) { "X" } else { "Y" });
    }
    let n = r.gen_range(1..=shape.max_disjuncts);
    let body: Vec<String> = (0..n).map(|_| random_disjunct(r, shape, &head_vars)).collect();
    let g = if grouping { "X" } else { "" };
    let a = if arg { head_vars.last().unwrap().to_string() } else { String::new() };
    let text = format!("{name}({g}; {}({a})) :- {}", shape.function, body.join(" | "));
    parse_query(&text, shape.domain).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// A random database over `p`, `b` and `e` with values from `pool`.
pub fn random_database(r: &mut impl Rng, pool: &[Value], max_facts: usize) -> Database {
    let mut db = Database::new();
    let n = r.gen_range(0..=max_facts);
    for _ in 0..n {
        let pick = |r: &mut dyn rand::RngCore| pool.choose(r).unwrap().clone();
        let fact = match r.gen_range(0..3) {
            0 => Fact::new("p", vec![pick(r)]),
            1 => Fact::new("b", vec![pick(r)]),
            _ => Fact::new("e", vec![pick(r), pick(r)]),
        };
        db.insert(fact);
    }
    db
}

pub fn integer_pool(values: &[i64]) -> Vec<Value> {
    values.iter().map(|&v| int(v)).collect()
}

/// Groups of the results as a map of rendered values, for comparisons.
pub fn rendered(results: &BTreeMap<Vec<Value>, aggequiv::aggregation::AggregateValue>) -> BTreeMap<Vec<Value>, String> {
    results.iter().map(|(k, v)| (k.clone(), aggequiv::oracle::normalize(v).to_string())).collect()
}

/// A random quasilinear query over `p/1`, `e/2` and negated `b/1`.
pub fn random_quasilinear(r: &mut impl Rng, f: AggFn, domain: Domain, name: &str) -> Query {
    let mut lits = vec![if r.gen_bool(0.5) { "e(X, Y)" } else { "e(Y, X)" }.to_string()];
    if r.gen_bool(0.5) {
        lits.push(if r.gen_bool(0.5) { "p(X)" } else { "p(Y)" }.into());
    }
    if r.gen_bool(0.5) {
        lits.push(if r.gen_bool(0.5) { "!b(X)" } else { "!b(Y)" }.into());
    }
    if r.gen_bool(0.6) {
        let op = ["<", "<=", ">", ">=", "!="].choose(r).unwrap();
        let rhs = if r.gen_bool(0.3) { "1" } else { "Y" };
        lits.push(format!("X {op} {rhs}"));
    }
    let group = if r.gen_bool(0.4) { "X" } else { "" };
    let arg = if f.arity() == 0 { "" } else if !group.is_empty() || r.gen_bool(0.5) { "Y" } else { "X" };
    let text = format!("{name}({group}; {f}({arg})) :- {}", lits.join(", "));
    parse_query(&text, domain).unwrap()
}

// ---------------------------------------------------------------------------
// Curated query pairs: (first, second, domain, N).

pub const CURATED: &[(&str, &str, &str, usize)] = &[
    ("q(; count()) :- p(X)", "q(; count()) :- p(X) | p(X)", "rat", 1),
    ("q(; count()) :- p(X)", "q(; count()) :- p(Y)", "rat", 2),
    ("q(; count()) :- p(X)", "q(; count()) :- p(X), X <= 3 | p(X), X > 3", "rat", 2),
    ("q(; count()) :- p(X)", "q(; count()) :- p(X), X <= 3 | p(X), X >= 3", "rat", 2),
    ("q(X; count()) :- e(X, Y)", "q(X; count()) :- e(X, Y), X < Y | e(X, Y), X >= Y", "int", 2),
    ("q(X; count()) :- e(X, Y), !b(Y)", "q(X; count()) :- e(X, Y)", "rat", 2),
    ("q(; parity()) :- p(X)", "q(; parity()) :- p(X) | p(X) | p(X)", "rat", 2),
    ("q(; parity()) :- p(X)", "q(; parity()) :- p(X) | p(X)", "rat", 1),
    ("q(; sum(Y)) :- p(Y)", "q(; sum(Y)) :- p(Y), Y < 2 | p(Y), Y >= 2", "rat", 2),
    ("q(; sum(Y)) :- p(Y)", "q(; sum(Y)) :- p(Y) | p(Y)", "rat", 1),
    ("q(; sum(Y)) :- p(Y)", "q(; sum(Y)) :- p(Y) | p(Y), Y = 0", "rat", 2),
    ("q(; sum(Y)) :- p(Y), Y > 0", "q(; sum(Y)) :- p(Y), Y >= 1", "int", 2),
    ("q(X; sum(Y)) :- e(X, Y), !b(X)", "q(X; sum(Y)) :- e(X, Y), !b(Y)", "rat", 2),
    ("q(; max(Y)) :- p(Y)", "q(; max(Y)) :- p(Y) | p(Y), Y > 3", "rat", 3),
    ("q(; max(Y)) :- p(Y)", "q(; max(Y)) :- p(Y), Y > 3", "rat", 2),
    ("q(X; max(Y)) :- e(X, Y)", "q(X; max(Y)) :- e(X, Y) | e(X, Y), X < Y", "int", 2),
    ("q(; min(Y)) :- p(Y)", "q(; min(Y)) :- p(Y) | p(Y), Y < 1", "rat", 2),
    ("q(; min(Y)) :- p(Y), !b(Y)", "q(; min(Y)) :- p(Y)", "int", 2),
    ("q(; prod(Y)) :- p(Y)", "q(; prod(Y)) :- p(Y) | p(Y), Y = 1", "rat", 2),
    ("q(; prod(Y)) :- p(Y)", "q(; prod(Y)) :- p(Y) | p(Y), Y = 2", "rat", 2),
    ("q(; prod(Y)) :- p(Y)", "q(; prod(Y)) :- p(Y) | p(Y), Y = 0", "rat", 2),
    ("q(; prod(Y)) :- p(Y), Y > 0", "q(; prod(Y)) :- p(Y), Y >= 1", "int", 2),
    ("q(; top2(Y)) :- p(Y)", "q(; top2(Y)) :- p(Y) | p(Y), Y > 2", "rat", 2),
    ("q(; top2(Y)) :- p(Y)", "q(; top2(Y)) :- p(Y) | p(Y)", "rat", 2),
    ("q(; top2(Y)) :- p(Y)", "q(; top2(Y)) :- p(Y), Y >= 0 | p(Y), Y < 0", "int", 2),
    ("q(; cntd(Y)) :- p(Y)", "q(; cntd(Y)) :- p(Y) | p(Y)", "rat", 2),
    ("q(; cntd(Y)) :- e(X, Y)", "q(; cntd(X)) :- e(X, Y)", "rat", 2),
    ("q(; cntd(Y)) :- p(Y)", "q(; cntd(Y)) :- p(Y), Y != 1", "int", 2),
    ("q(; avg(Y)) :- p(Y)", "q(; avg(Y)) :- p(Y) | p(Y)", "rat", 2),
    ("q(; avg(Y)) :- p(Y)", "q(; avg(Y)) :- p(Y) | p(Y), Y > 0", "rat", 2),
    ("q(; avg(Y)) :- e(X, Y)", "q(; avg(Y)) :- e(Y, X)", "int", 2),
    ("q(X; avg(Y)) :- e(X, Y), X < Y", "q(X; avg(Y)) :- e(X, Y), Y > X", "rat", 2),
    ("q(; count()) :- p(X), !b(X)", "q(; count()) :- p(X), !b(X), X < 2 | p(X), !b(X), X > 1", "int", 2),
    ("q(; sum(Y)) :- e(X, Y), X = Y", "q(; sum(X)) :- e(X, X)", "rat", 2),
];

pub fn curated_pairs() -> Vec<(Query, Query, usize)> {
    CURATED
        .iter()
        .map(|(a, b, d, n)| {
            let domain: Domain = d.parse().unwrap();
            (parse_query(a, domain).unwrap(), parse_query(b, domain).unwrap(), *n)
        })
        .collect()
}
