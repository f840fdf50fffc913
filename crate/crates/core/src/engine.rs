//! Bounded equivalence, local equivalence and equivalence of aggregate queries.
//!
//! Two queries are N-equivalent if they agree on every database whose
//! carrier has at most N constants. Such databases are covered, up to the
//! order type of their values relative to the query constants, by pairs
//! (L, S): L a complete ordering of the query constants together with N
//! fresh variables, and S a set of atoms over the terms of L. For each pair
//! both queries are evaluated symbolically, group keys are compared and every
//! shared group becomes an ordered identity decided by [`crate::identity`].

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::aggregation::{AggFn, AggregationFunction};
use crate::database::{Database, Fact};
use crate::identity::{decide, IdentityError, OrderedIdentity};
use crate::oracle::{self, Counterexample};
use crate::orderings::{enumerate_complete_orderings, Assignment, CompleteOrdering};
use crate::query::{term_size_pair, Atom, CmpOp, Domain, Query, Term, Value};

/// Outcome of a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Equivalent,
    NotEquivalent,
    Unsupported,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Equivalent => "equivalent",
            Status::NotEquivalent => "not_equivalent",
            Status::Unsupported => "unsupported",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub status: Status,
    /// Present for `NotEquivalent`; verified against the concrete evaluator.
    pub counterexample: Option<Counterexample>,
    /// The bound searched, when a bounded search ran.
    pub n_used: Option<usize>,
    /// Explanation for `Unsupported`.
    pub reason: Option<String>,
}

impl Verdict {
    pub(crate) fn equivalent(n: usize) -> Self {
        Verdict { status: Status::Equivalent, counterexample: None, n_used: Some(n), reason: None }
    }

    pub(crate) fn refuted(c: Counterexample, n: usize) -> Self {
        Verdict { status: Status::NotEquivalent, counterexample: Some(c), n_used: Some(n), reason: None }
    }

    pub(crate) fn unsupported(reason: impl Into<String>) -> Self {
        Verdict { status: Status::Unsupported, counterexample: None, n_used: None, reason: Some(reason.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("queries range over different domains")]
    DomainMismatch,
    #[error("bag-set equivalence needs queries without aggregate terms")]
    AggregateInput,
    #[error("{atoms} candidate atoms over {terms} terms is beyond what subsets can be enumerated for")]
    TooManyAtoms { atoms: usize, terms: usize },
    #[error(transparent)]
    Identity(#[from] IdentityError),
    #[error("counterexample failed verification: {0}")]
    Verification(String),
    #[error("could not start worker pool: {0}")]
    Workers(String),
}

/// Search settings.
#[derive(Debug, Clone, Copy, Default)]
pub struct EngineOptions {
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

fn fresh(i: usize) -> Term {
    Term::var(&format!("u#{i}"))
}

/// Predicates of both queries with their arities.
fn predicates(q: &Query, q2: &Query) -> Vec<(Arc<str>, usize)> {
    oracle::joint_predicates(q, q2)
}

/// The term set `constants ∪ {u1..uN}` and every atom over it.
pub fn build_base(q: &Query, q2: &Query, n: usize) -> (BTreeSet<Term>, Vec<Atom>) {
    let mut terms: BTreeSet<Term> = q.constants().into_iter().map(Term::Const).collect();
    terms.extend(q2.constants().into_iter().map(Term::Const));
    terms.extend((1..=n).map(fresh));
    let list: Vec<Term> = terms.iter().cloned().collect();
    let atoms = atoms_over(&predicates(q, q2), &list)
        .into_iter()
        .map(|(p, args)| Atom { predicate: p, args, negated: false })
        .collect();
    (terms, atoms)
}

fn atoms_over<T: Clone>(preds: &[(Arc<str>, usize)], items: &[T]) -> Vec<(Arc<str>, Vec<T>)> {
    let mut out = Vec::new();
    for (p, k) in preds {
        let mut tuples: Vec<Vec<T>> = vec![Vec::new()];
        for _ in 0..*k {
            tuples = tuples
                .iter()
                .flat_map(|t| {
                    items.iter().map(move |x| {
                        let mut t = t.clone();
                        t.push(x.clone());
                        t
                    })
                })
                .collect();
        }
        out.extend(tuples.into_iter().map(|t| (p.clone(), t)));
    }
    out
}

/// Size of BASE for the pair at bound `n`.
pub fn base_size(q: &Query, q2: &Query, n: usize) -> usize {
    let mut consts = q.constants();
    consts.extend(q2.constants());
    let t = consts.len() + n;
    predicates(q, q2).iter().map(|(_, k)| t.pow(*k as u32)).sum()
}

// ---------------------------------------------------------------------------
// Symbolic evaluation over a reduced ordering: terms are class indices.

#[derive(Debug, Clone)]
enum CTerm {
    Var(usize),
    Idx(usize),
}

#[derive(Debug, Clone)]
struct CDisjunct {
    nvars: usize,
    positive: Vec<(usize, Vec<CTerm>)>,
    negative: Vec<(usize, Vec<CTerm>)>,
    comparisons: Vec<(CTerm, CmpOp, CTerm)>,
    /// Equalities used to bind variables missing from positive atoms.
    equalities: Vec<(usize, usize)>,
    grouping: Vec<CTerm>,
    args: Vec<CTerm>,
}

#[derive(Debug, Clone)]
struct Compiled {
    disjuncts: Vec<CDisjunct>,
}

/// Facts of a symbolic database as index tuples, per predicate.
struct IndexDb {
    by_pred: Vec<Vec<Vec<usize>>>,
    set: HashSet<(usize, Vec<usize>)>,
}

type SymGroups = BTreeMap<Vec<usize>, Vec<Vec<usize>>>;

fn compile(q: &Query, pred_ids: &HashMap<Arc<str>, usize>, index_of: &HashMap<Term, usize>) -> Compiled {
    let disjuncts = q
        .disjuncts
        .iter()
        .map(|d| {
            let var_ix: HashMap<Arc<str>, usize> =
                d.variables().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
            let ct = |t: &Term| match t {
                Term::Var(v) => CTerm::Var(var_ix[v]),
                Term::Const(_) => CTerm::Idx(index_of[t]),
            };
            let atom = |a: &Atom| (pred_ids[&a.predicate], a.args.iter().map(ct).collect::<Vec<_>>());
            let equalities = d
                .comparisons
                .iter()
                .filter(|c| c.op == CmpOp::Eq)
                .filter_map(|c| match (&c.lhs, &c.rhs) {
                    (Term::Var(a), Term::Var(b)) => Some((var_ix[a], var_ix[b])),
                    _ => None,
                })
                .collect();
            CDisjunct {
                nvars: var_ix.len(),
                positive: d.positive_atoms().map(atom).collect(),
                negative: d.negated_atoms().map(atom).collect(),
                comparisons: d.comparisons.iter().map(|c| (ct(&c.lhs), c.op, ct(&c.rhs))).collect(),
                equalities,
                grouping: q.grouping.iter().map(ct).collect(),
                args: q.aggregate_args().iter().map(ct).collect(),
            }
        })
        .collect();
    Compiled { disjuncts }
}

fn resolve(t: &CTerm, b: &[Option<usize>]) -> Option<usize> {
    match t {
        CTerm::Idx(i) => Some(*i),
        CTerm::Var(v) => b[*v],
    }
}

fn eval_disjunct(d: &CDisjunct, db: &IndexDb, emit: &mut dyn FnMut(&[Option<usize>])) {
    fn go(d: &CDisjunct, db: &IndexDb, k: usize, b: &mut Vec<Option<usize>>, emit: &mut dyn FnMut(&[Option<usize>])) {
        if k == d.positive.len() {
            let mut bound = b.clone();
            loop {
                let mut changed = false;
                for &(x, y) in &d.equalities {
                    match (bound[x], bound[y]) {
                        (Some(v), None) => {
                            bound[y] = Some(v);
                            changed = true;
                        }
                        (None, Some(v)) => {
                            bound[x] = Some(v);
                            changed = true;
                        }
                        _ => {}
                    }
                }
                if !changed {
                    break;
                }
            }
            for (p, args) in &d.negative {
                let tuple: Vec<usize> = args.iter().map(|t| resolve(t, &bound).expect("safe")).collect();
                if db.set.contains(&(*p, tuple)) {
                    return;
                }
            }
            for (l, op, r) in &d.comparisons {
                let (l, r) = (resolve(l, &bound).expect("safe"), resolve(r, &bound).expect("safe"));
                if !op.holds(l.cmp(&r)) {
                    return;
                }
            }
            emit(&bound);
            return;
        }
        let (p, args) = &d.positive[k];
        for fact in &db.by_pred[*p] {
            let saved = b.clone();
            let mut ok = true;
            for (t, &v) in args.iter().zip(fact) {
                match t {
                    CTerm::Idx(i) => {
                        if *i != v {
                            ok = false;
                            break;
                        }
                    }
                    CTerm::Var(x) => match b[*x] {
                        Some(w) if w != v => {
                            ok = false;
                            break;
                        }
                        Some(_) => {}
                        None => b[*x] = Some(v),
                    },
                }
            }
            if ok {
                go(d, db, k + 1, b, emit);
            }
            *b = saved;
        }
    }
    let mut b = vec![None; d.nvars];
    go(d, db, 0, &mut b, emit);
}

fn eval_compiled(c: &Compiled, db: &IndexDb) -> SymGroups {
    let mut groups = SymGroups::new();
    for d in &c.disjuncts {
        let mut emit = |b: &[Option<usize>]| {
            let key: Vec<usize> = d.grouping.iter().map(|t| resolve(t, b).expect("head bound")).collect();
            let tuple: Vec<usize> = d.args.iter().map(|t| resolve(t, b).expect("head bound")).collect();
            groups.entry(key).or_default().push(tuple);
        };
        eval_disjunct(d, db, &mut emit);
    }
    groups
}

/// A symbolic database: a reduced ordering and atoms over its terms.
#[derive(Debug, Clone)]
pub struct SymbolicDatabase {
    pub ordering: CompleteOrdering,
    pub atoms: Vec<Atom>,
}

/// Groups of `q` over a symbolic database, keyed by term tuples.
///
/// The ordering must be reduced and contain every constant of `q`.
pub fn evaluate_symbolic(q: &Query, sdb: &SymbolicDatabase) -> BTreeMap<Vec<Term>, Vec<Vec<Term>>> {
    let terms: Vec<Term> = sdb.ordering.classes().iter().map(|c| c[0].clone()).collect();
    let index_of: HashMap<Term, usize> = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
    let mut preds: Vec<(Arc<str>, usize)> = q.predicates().into_iter().collect();
    for a in &sdb.atoms {
        if !preds.iter().any(|(p, _)| *p == a.predicate) {
            preds.push((a.predicate.clone(), a.args.len()));
        }
    }
    let pred_ids: HashMap<Arc<str>, usize> = preds.iter().enumerate().map(|(i, (p, _))| (p.clone(), i)).collect();
    let mut db = IndexDb { by_pred: vec![Vec::new(); preds.len()], set: HashSet::new() };
    for a in &sdb.atoms {
        let p = pred_ids[&a.predicate];
        let tuple: Vec<usize> = a.args.iter().map(|t| index_of[t]).collect();
        if db.set.insert((p, tuple.clone())) {
            db.by_pred[p].push(tuple);
        }
    }
    let compiled = compile(q, &pred_ids, &index_of);
    eval_compiled(&compiled, &db)
        .into_iter()
        .map(|(k, bag)| {
            let key = k.into_iter().map(|i| terms[i].clone()).collect();
            let bag = bag.into_iter().map(|t| t.into_iter().map(|i| terms[i].clone()).collect()).collect();
            (key, bag)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// The bounded search.

/// Distinct reduced orderings of `terms`, with variables renamed canonically.
fn canonical_orderings(terms: &BTreeSet<Term>, domain: Domain) -> Vec<CompleteOrdering> {
    let mut seen: HashSet<Vec<Option<Value>>> = HashSet::new();
    let mut out = Vec::new();
    for l in enumerate_complete_orderings(terms, domain) {
        let (reduced, _) = l.reduce_terms();
        let shape: Vec<Option<Value>> = reduced.classes().iter().map(|c| c[0].as_const().cloned()).collect();
        if seen.insert(shape.clone()) {
            let mut k = 0;
            let classes = shape
                .iter()
                .map(|s| match s {
                    Some(v) => vec![Term::Const(v.clone())],
                    None => {
                        k += 1;
                        vec![fresh(k)]
                    }
                })
                .collect();
            out.push(CompleteOrdering::from_classes(classes, domain).expect("reduced ordering stays valid"));
        }
    }
    out
}

struct Pair<'a> {
    q: &'a Query,
    q2: &'a Query,
    n: usize,
    preds: Vec<(Arc<str>, usize)>,
    same_head: bool,
}

impl Pair<'_> {
    /// Searches every atom subset over one ordering; the first counterexample
    /// in subset order wins.
    fn search(&self, ordering: &CompleteOrdering) -> Option<Result<Counterexample, EngineError>> {
        let terms: Vec<Term> = ordering.classes().iter().map(|c| c[0].clone()).collect();
        let index_of: HashMap<Term, usize> = terms.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        let pred_ids: HashMap<Arc<str>, usize> =
            self.preds.iter().enumerate().map(|(i, (p, _))| (p.clone(), i)).collect();
        let indices: Vec<usize> = (0..terms.len()).collect();
        let atoms: Vec<(usize, Vec<usize>)> = atoms_over(&self.preds, &indices)
            .into_iter()
            .map(|(p, t)| (pred_ids[&p], t))
            .collect();
        if atoms.len() > 40 {
            return Some(Err(EngineError::TooManyAtoms { atoms: atoms.len(), terms: terms.len() }));
        }
        let term_mask: Vec<u64> = atoms.iter().map(|(_, t)| t.iter().fold(0u64, |m, &i| m | 1 << i)).collect();
        let c1 = compile(self.q, &pred_ids, &index_of);
        let c2 = compile(self.q2, &pred_ids, &index_of);
        for mask in 0u64..(1u64 << atoms.len()) {
            let used = (0..atoms.len()).filter(|i| mask >> i & 1 == 1).fold(0u64, |m, i| m | term_mask[i]);
            if used.count_ones() as usize > self.n {
                continue;
            }
            let mut db = IndexDb { by_pred: vec![Vec::new(); self.preds.len()], set: HashSet::new() };
            for (i, (p, t)) in atoms.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    db.by_pred[*p].push(t.clone());
                    db.set.insert((*p, t.clone()));
                }
            }
            let g1 = eval_compiled(&c1, &db);
            let g2 = eval_compiled(&c2, &db);
            let witness = match self.compare(ordering, &terms, &g1, &g2) {
                Ok(Some(w)) => w,
                Ok(None) => continue,
                Err(e) => return Some(Err(e)),
            };
            let facts: Vec<(Arc<str>, Vec<Term>)> = atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, (p, t))| (self.preds[*p].0.clone(), t.iter().map(|&i| terms[i].clone()).collect()))
                .collect();
            match self.materialize(&facts, &witness) {
                Ok(Some(c)) => return Some(Ok(c)),
                Ok(None) if !self.same_head => continue,
                Ok(None) => return Some(Err(EngineError::Verification(format!("no difference on the database for ordering {ordering}")))),
                Err(e) => return Some(Err(e)),
            }
        }
        None
    }

    /// A witness assignment if the two symbolic results can differ.
    fn compare(
        &self,
        ordering: &CompleteOrdering,
        terms: &[Term],
        g1: &SymGroups,
        g2: &SymGroups,
    ) -> Result<Option<Assignment>, EngineError> {
        if !self.same_head {
            return Ok((!g1.is_empty() || !g2.is_empty()).then(|| ordering.satisfying_assignment()));
        }
        if g1.keys().ne(g2.keys()) {
            return Ok(Some(ordering.satisfying_assignment()));
        }
        let f = self.q.function().unwrap_or(AggFn::Count);
        let to_terms = |bag: &Vec<Vec<usize>>| -> Vec<Vec<Term>> {
            bag.iter().map(|t| t.iter().map(|&i| terms[i].clone()).collect()).collect()
        };
        for (key, b1) in g1 {
            let b2 = &g2[key];
            let id = OrderedIdentity::new(ordering.clone(), to_terms(b1), to_terms(b2), f)?;
            let v = decide(&id)?;
            if let Some(w) = v.witness {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    fn materialize(&self, facts: &[(Arc<str>, Vec<Term>)], delta: &Assignment) -> Result<Option<Counterexample>, EngineError> {
        let value = |t: &Term| -> Result<Value, EngineError> {
            match t {
                Term::Const(c) => Ok(c.clone()),
                Term::Var(_) => delta.get(t).cloned().ok_or_else(|| EngineError::Verification(format!("witness misses {t}"))),
            }
        };
        let mut db = Database::new();
        for (p, args) in facts {
            db.insert(Fact { predicate: p.clone(), args: args.iter().map(value).collect::<Result<_, _>>()? });
        }
        if db.carrier().len() > self.n {
            return Err(EngineError::Verification(format!("carrier of {} exceeds the bound {}", db.carrier().len(), self.n)));
        }
        Ok(oracle::compare_on(self.q, self.q2, &db))
    }
}

fn with_pool<T: Send>(options: &EngineOptions, f: impl FnOnce() -> T + Send) -> Result<T, EngineError> {
    match options.workers {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| EngineError::Workers(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn same_head(q: &Query, q2: &Query) -> bool {
    q.grouping.len() == q2.grouping.len() && q.function() == q2.function()
}

/// Decides whether `q` and `q2` agree on all databases with at most `n`
/// constants. Queries without aggregate terms are treated as COUNT queries.
pub fn n_equivalent(q: &Query, q2: &Query, n: usize, options: &EngineOptions) -> Result<Verdict, EngineError> {
    if q.domain != q2.domain {
        return Err(EngineError::DomainMismatch);
    }
    let (terms, _) = build_base(q, q2, n);
    let orderings = canonical_orderings(&terms, q.domain);
    let pair = Pair { q, q2, n, preds: predicates(q, q2), same_head: same_head(q, q2) };
    let found = with_pool(options, || orderings.par_iter().find_map_first(|l| pair.search(l)))?;
    match found {
        None => Ok(Verdict::equivalent(n)),
        Some(Ok(c)) => Ok(Verdict::refuted(c, n)),
        Some(Err(e)) => Err(e),
    }
}

/// N-equivalence at `N = tsize(q, q2)`.
pub fn locally_equivalent(q: &Query, q2: &Query, options: &EngineOptions) -> Result<Verdict, EngineError> {
    n_equivalent(q, q2, term_size_pair(q, q2), options)
}

/// Full equivalence, via local equivalence, for decomposable functions and
/// for PROD over the rationals.
pub fn equivalent(q: &Query, q2: &Query, options: &EngineOptions) -> Result<Verdict, EngineError> {
    if q.domain != q2.domain {
        return Err(EngineError::DomainMismatch);
    }
    if !same_head(q, q2) {
        let v = locally_equivalent(q, q2, options)?;
        if v.status == Status::NotEquivalent {
            return Ok(v);
        }
        if crate::query::is_unsatisfiable(q) && crate::query::is_unsatisfiable(q2) {
            return Ok(v);
        }
        return Ok(Verdict::unsupported("queries with different heads and no counterexample at the local bound"));
    }
    let f = q.function().unwrap_or(AggFn::Count);
    let desc = AggregationFunction::describe(f, q.domain);
    if !(desc.decomposable || desc.prod_special) {
        let reason = match f {
            AggFn::Prod => "equivalence of PROD queries is only decided over the rationals".to_string(),
            _ => format!("equivalence of {f} queries is not decidable by reduction to local equivalence"),
        };
        return Ok(Verdict::unsupported(reason));
    }
    locally_equivalent(q, q2, options)
}

/// Bag-set equivalence of queries without aggregate terms, via COUNT.
pub fn bagset_equivalent(q: &Query, q2: &Query, options: &EngineOptions) -> Result<Verdict, EngineError> {
    if q.aggregate.is_some() || q2.aggregate.is_some() {
        return Err(EngineError::AggregateInput);
    }
    equivalent(&q.with_count(), &q2.with_count(), options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{int, parse_queries};

    fn pair(text: &str, domain: Domain) -> (Query, Query) {
        let mut qs = parse_queries(text, domain).unwrap();
        let b = qs.pop().unwrap();
        (qs.pop().unwrap(), b)
    }

    fn opts() -> EngineOptions {
        EngineOptions::default()
    }

    #[test]
    fn base_sizes() {
        let (q, q2) = pair("q(; count()) :- p(X). r(; count()) :- p(X).", Domain::Rationals);
        assert_eq!(build_base(&q, &q2, 2).1.len(), 2);
        assert_eq!(build_base(&q, &q2, 0).1.len(), 0);
        let (q, q2) = pair("q(; count()) :- p(X), X > 3. r(; count()) :- r(X, Y).", Domain::Rationals);
        assert_eq!(build_base(&q, &q2, 1).1.len(), 6);
        assert_eq!(base_size(&q, &q2, 1), 6);
    }

    #[test]
    fn symbolic_examples() {
        let (q, _) = pair("q(; count()) :- p(X). r(; count()) :- p(X) | p(X).", Domain::Rationals);
        let order = CompleteOrdering::from_classes(vec![vec![fresh(1)], vec![fresh(2)]], Domain::Rationals).unwrap();
        let atoms = vec![Atom::positive("p", vec![fresh(1)]), Atom::positive("p", vec![fresh(2)])];
        let g = evaluate_symbolic(&q, &SymbolicDatabase { ordering: order.clone(), atoms });
        assert_eq!(g[&vec![]].len(), 2);
        let (_, q2) = pair("q(; count()) :- p(X). r(; count()) :- p(X) | p(X).", Domain::Rationals);
        let g = evaluate_symbolic(&q2, &SymbolicDatabase { ordering: order.clone(), atoms: vec![Atom::positive("p", vec![fresh(1)])] });
        assert_eq!(g[&vec![]].len(), 2);
        let (q3, _) = pair("q(X; max(Y)) :- e(X, Y), !b(X). r(; count()) :- b(X).", Domain::Rationals);
        let atoms = vec![Atom::positive("e", vec![fresh(1), fresh(2)]), Atom::positive("b", vec![fresh(1)])];
        assert!(evaluate_symbolic(&q3, &SymbolicDatabase { ordering: order, atoms }).is_empty());
    }

    #[test]
    fn duplicate_disjunct_is_not_one_equivalent() {
        let (q, q2) = pair("q(; count()) :- p(X). r(; count()) :- p(X) | p(X).", Domain::Rationals);
        let v = n_equivalent(&q, &q2, 1, &opts()).unwrap();
        assert_eq!(v.status, Status::NotEquivalent);
        let c = v.counterexample.unwrap();
        assert_eq!(c.database.to_string(), "p(0).\n");
        assert_eq!(c.value_q.unwrap().to_string(), "1");
        assert_eq!(c.value_q_prime.unwrap().to_string(), "2");
    }

    #[test]
    fn max_absorbs_subsumed_disjunct() {
        let (q, q2) = pair("q(; max(Y)) :- p(Y). r(; max(Y)) :- p(Y) | p(Y), Y > 3.", Domain::Rationals);
        for n in [1, 2, 3] {
            assert_eq!(n_equivalent(&q, &q2, n, &opts()).unwrap().status, Status::Equivalent);
        }
    }

    #[test]
    fn sum_split_is_locally_equivalent() {
        let (q, q2) = pair("q(; sum(Y)) :- p(Y). r(; sum(Y)) :- p(Y), Y <= 5 | p(Y), Y > 5.", Domain::Rationals);
        assert_eq!(locally_equivalent(&q, &q2, &opts()).unwrap().status, Status::Equivalent);
        let (q, q2) = pair("q(; sum(Y)) :- p(Y). r(; sum(Y)) :- p(Y), Y <= 5 | p(Y), Y >= 5.", Domain::Rationals);
        let v = locally_equivalent(&q, &q2, &opts()).unwrap();
        assert_eq!(v.status, Status::NotEquivalent);
        assert!(v.counterexample.unwrap().database.carrier().contains(&int(5)));
    }

    #[test]
    fn unsupported_and_bagset() {
        let (q, q2) = pair("q(; avg(Y)) :- p(Y). r(; avg(Y)) :- p(Y).", Domain::Rationals);
        assert_eq!(equivalent(&q, &q2, &opts()).unwrap().status, Status::Unsupported);
        let (q, q2) = pair("q(X) :- p(X). r(X) :- p(X), p(X).", Domain::Rationals);
        assert_eq!(bagset_equivalent(&q, &q2, &opts()).unwrap().status, Status::Equivalent);
        let (q, q2) = pair("q(X) :- p(X). r(X) :- p(X) | p(X).", Domain::Rationals);
        assert_eq!(bagset_equivalent(&q, &q2, &opts()).unwrap().status, Status::NotEquivalent);
    }

    #[test]
    fn head_mismatch() {
        let (q, q2) = pair("q(X; count()) :- p(X). r(; count()) :- p(X).", Domain::Rationals);
        assert_eq!(equivalent(&q, &q2, &opts()).unwrap().status, Status::NotEquivalent);
    }

    #[test]
    fn worker_count_does_not_change_the_answer() {
        let (q, q2) = pair("q(X; sum(Y)) :- e(X, Y). r(X; sum(Y)) :- e(X, Y), X < Y | e(X, Y), X > Y.", Domain::Integers);
        let a = n_equivalent(&q, &q2, 2, &EngineOptions { workers: Some(1) }).unwrap();
        let b = n_equivalent(&q, &q2, 2, &EngineOptions { workers: Some(4) }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.status, Status::NotEquivalent);
    }
}
