//! Terms, atoms, conditions and aggregate queries.
//!
//! A query has the shape `q(x̄; α(ȳ)) :- A_1 | ... | A_n` where every
//! disjunct `A_i` is a conjunction of positive atoms, negated atoms and
//! comparisons. Queries without an aggregate term are plain disjunctive
//! queries; they are used for bag-set equivalence.

mod constraints;
mod parse;
mod reduce;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::aggregation::AggFn;

pub use constraints::ConstraintSet;
pub use parse::{
    parse_database, parse_ordering, parse_queries, parse_query, parse_term, ArityRegistry,
    ParseError, ParseErrorKind, Parser,
};
pub use reduce::{is_unsatisfiable, reduce_query};

/// Exact numeric constant.
pub type Value = BigRational;

/// Builds an integer constant.
pub fn int(v: i64) -> Value {
    BigRational::from_integer(BigInt::from(v))
}

/// Builds the rational constant `n/d`.
pub fn ratio(n: i64, d: i64) -> Value {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Writes a value as `n` or `n/d`.
pub fn fmt_value(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v.is_integer() {
        write!(f, "{}", v.numer())
    } else {
        write!(f, "{}/{}", v.numer(), v.denom())
    }
}

/// Renders a value as text in the query/database syntax.
pub fn value_to_string(v: &Value) -> String {
    struct V<'a>(&'a Value);
    impl fmt::Display for V<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            fmt_value(self.0, f)
        }
    }
    V(v).to_string()
}

/// Numeric domain over which comparisons range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Integers,
    Rationals,
}

impl Domain {
    /// Whether `v` belongs to the domain.
    pub fn contains(&self, v: &Value) -> bool {
        match self {
            Domain::Integers => v.is_integer(),
            Domain::Rationals => true,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Integers => f.write_str("int"),
            Domain::Rationals => f.write_str("rat"),
        }
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "int" | "integer" | "integers" | "z" => Ok(Domain::Integers),
            "rat" | "rational" | "rationals" | "q" => Ok(Domain::Rationals),
            other => Err(format!("unknown domain `{other}` (expected `int` or `rat`)")),
        }
    }
}

/// A variable or an exact constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Arc<str>),
    Const(Value),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn constant(v: Value) -> Term {
        Term::Const(v)
    }

    pub fn int(v: i64) -> Term {
        Term::Const(int(v))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_const(&self) -> Option<&Value> {
        match self {
            Term::Const(v) => Some(v),
            Term::Var(_) => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => fmt_value(c, f),
        }
    }
}

/// A relational atom `p(t_1, ..., t_k)`, possibly negated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: Arc<str>,
    pub args: Vec<Term>,
    pub negated: bool,
}

impl Atom {
    pub fn positive(predicate: &str, args: Vec<Term>) -> Atom {
        Atom { predicate: Arc::from(predicate), args, negated: false }
    }

    pub fn negative(predicate: &str, args: Vec<Term>) -> Atom {
        Atom { predicate: Arc::from(predicate), args, negated: true }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        write!(f, "{}(", self.predicate)?;
        write_joined(f, &self.args, ", ")?;
        f.write_str(")")
    }
}

/// Comparison operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
    Eq,
}

impl CmpOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Ne => "!=",
            CmpOp::Eq => "=",
        }
    }

    /// Operator with swapped operands: `a op b` iff `b op.flip() a`.
    pub fn flip(&self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            CmpOp::Ne => CmpOp::Ne,
            CmpOp::Eq => CmpOp::Eq,
        }
    }

    /// Logical negation.
    pub fn negate(&self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Eq => CmpOp::Ne,
        }
    }

    /// Evaluates the operator on an ordering outcome of `lhs.cmp(rhs)`.
    pub fn holds(&self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            CmpOp::Lt => ord == Less,
            CmpOp::Le => ord != Greater,
            CmpOp::Gt => ord == Greater,
            CmpOp::Ge => ord != Less,
            CmpOp::Ne => ord != Equal,
            CmpOp::Eq => ord == Equal,
        }
    }

    pub fn eval(&self, lhs: &Value, rhs: &Value) -> bool {
        self.holds(lhs.cmp(rhs))
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Comparison {
    pub lhs: Term,
    pub op: CmpOp,
    pub rhs: Term,
}

impl Comparison {
    pub fn new(lhs: Term, op: CmpOp, rhs: Term) -> Comparison {
        Comparison { lhs, op, rhs }
    }

    pub fn negated(&self) -> Comparison {
        Comparison { lhs: self.lhs.clone(), op: self.op.negate(), rhs: self.rhs.clone() }
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op, self.rhs)
    }
}

/// A conjunction of literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Condition {
    pub atoms: Vec<Atom>,
    pub comparisons: Vec<Comparison>,
}

impl Condition {
    pub fn positive_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| !a.negated)
    }

    pub fn negated_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().filter(|a| a.negated)
    }

    /// All terms occurring in the condition.
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.atoms
            .iter()
            .flat_map(|a| a.args.iter())
            .chain(self.comparisons.iter().flat_map(|c| [&c.lhs, &c.rhs]))
    }

    pub fn variables(&self) -> BTreeSet<Arc<str>> {
        self.terms()
            .filter_map(|t| match t {
                Term::Var(v) => Some(v.clone()),
                Term::Const(_) => None,
            })
            .collect()
    }

    pub fn constants(&self) -> BTreeSet<Value> {
        self.terms().filter_map(|t| t.as_const().cloned()).collect()
    }

    /// Safety: every variable occurs in a positive atom or is linked to
    /// such a variable by a chain of `=` comparisons. Returns the first
    /// offending variable.
    pub fn unsafe_variable(&self) -> Option<Arc<str>> {
        let mut bound: BTreeSet<Arc<str>> = self
            .positive_atoms()
            .flat_map(|a| a.args.iter())
            .filter_map(|t| t.as_var().map(Arc::from))
            .collect();
        loop {
            let mut changed = false;
            for c in self.comparisons.iter().filter(|c| c.op == CmpOp::Eq) {
                if let (Term::Var(a), Term::Var(b)) = (&c.lhs, &c.rhs) {
                    if bound.contains(a) && !bound.contains(b) {
                        bound.insert(b.clone());
                        changed = true;
                    } else if bound.contains(b) && !bound.contains(a) {
                        bound.insert(a.clone());
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        self.variables().into_iter().find(|v| !bound.contains(v))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for a in &self.atoms {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{a}")?;
        }
        for c in &self.comparisons {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// The aggregate term `α(ȳ)` of a query head.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AggregateTerm {
    pub function: AggFn,
    pub args: Vec<Term>,
}

impl fmt::Display for AggregateTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.function)?;
        write_joined(f, &self.args, ", ")?;
        f.write_str(")")
    }
}

/// A disjunctive query, with or without an aggregate term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub name: Arc<str>,
    pub grouping: Vec<Term>,
    pub aggregate: Option<AggregateTerm>,
    pub disjuncts: Vec<Condition>,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("disjunct {disjunct} is unsafe: variable {variable} occurs in no positive atom")]
    Unsafe { disjunct: usize, variable: String },
    #[error("grouping variable {0} also occurs in the aggregate term")]
    GroupingInAggregate(String),
    #[error("disjunct {disjunct} does not contain head variable {variable}")]
    MissingHeadVariable { disjunct: usize, variable: String },
    #[error("{function} takes {expected} argument(s), got {got}")]
    AggregateArity { function: AggFn, expected: usize, got: usize },
    #[error("constant {0} is not an integer but the query ranges over the integers")]
    NonIntegerConstant(String),
    #[error("query has no disjuncts")]
    Empty,
}

impl Query {
    /// Checks head discipline, safety and domain membership of constants.
    pub fn validate(&self) -> Result<(), QueryError> {
        if self.disjuncts.is_empty() {
            return Err(QueryError::Empty);
        }
        if let Some(agg) = &self.aggregate {
            let expected = agg.function.arity();
            if agg.args.len() != expected {
                return Err(QueryError::AggregateArity {
                    function: agg.function,
                    expected,
                    got: agg.args.len(),
                });
            }
            for g in self.grouping.iter().filter_map(Term::as_var) {
                if agg.args.iter().any(|t| t.as_var() == Some(g)) {
                    return Err(QueryError::GroupingInAggregate(g.to_string()));
                }
            }
        }
        let head_vars: BTreeSet<&str> = self.head_terms().filter_map(Term::as_var).collect();
        for (i, d) in self.disjuncts.iter().enumerate() {
            let vars = d.variables();
            if let Some(v) = head_vars.iter().find(|v| !vars.contains(**v)) {
                return Err(QueryError::MissingHeadVariable { disjunct: i, variable: v.to_string() });
            }
            if let Some(v) = d.unsafe_variable() {
                return Err(QueryError::Unsafe { disjunct: i, variable: v.to_string() });
            }
        }
        if self.domain == Domain::Integers {
            if let Some(c) = self.constants().into_iter().find(|c| !c.is_integer()) {
                return Err(QueryError::NonIntegerConstant(value_to_string(&c)));
            }
        }
        Ok(())
    }

    /// Grouping terms followed by aggregate arguments.
    pub fn head_terms(&self) -> impl Iterator<Item = &Term> {
        self.grouping.iter().chain(self.aggregate.iter().flat_map(|a| a.args.iter()))
    }

    pub fn aggregate_args(&self) -> &[Term] {
        self.aggregate.as_ref().map(|a| a.args.as_slice()).unwrap_or(&[])
    }

    pub fn function(&self) -> Option<AggFn> {
        self.aggregate.as_ref().map(|a| a.function)
    }

    pub fn is_conjunctive(&self) -> bool {
        self.disjuncts.len() == 1
    }

    /// Constants occurring anywhere in the query, head included.
    pub fn constants(&self) -> BTreeSet<Value> {
        let mut out: BTreeSet<Value> = self.head_terms().filter_map(|t| t.as_const().cloned()).collect();
        for d in &self.disjuncts {
            out.extend(d.constants());
        }
        out
    }

    /// Maximum number of variables over the disjuncts.
    pub fn variable_size(&self) -> usize {
        self.disjuncts.iter().map(|d| d.variables().len()).max().unwrap_or(0)
    }

    /// Number of constants plus the variable size.
    pub fn term_size(&self) -> usize {
        self.constants().len() + self.variable_size()
    }

    /// Predicates with their arities, in name order.
    pub fn predicates(&self) -> BTreeSet<(Arc<str>, usize)> {
        self.disjuncts
            .iter()
            .flat_map(|d| d.atoms.iter())
            .map(|a| (a.predicate.clone(), a.arity()))
            .collect()
    }

    /// The same query with `count()` as aggregate term, for bag-set semantics.
    pub fn with_count(&self) -> Query {
        Query { aggregate: Some(AggregateTerm { function: AggFn::Count, args: vec![] }), ..self.clone() }
    }
}

/// Term size of a pair: union of the constants plus the larger variable size.
pub fn term_size_pair(q: &Query, q2: &Query) -> usize {
    let mut constants = q.constants();
    constants.extend(q2.constants());
    constants.len() + q.variable_size().max(q2.variable_size())
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        write_joined(f, &self.grouping, ", ")?;
        if let Some(agg) = &self.aggregate {
            write!(f, "; {agg}")?;
        }
        f.write_str(") :- ")?;
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

fn write_joined<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T], sep: &str) -> fmt::Result {
    for (i, t) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{t}")?;
    }
    Ok(())
}
