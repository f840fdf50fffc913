//! Complete orderings of finite term sets over the integers or rationals.
//!
//! A complete ordering is a sequence of classes; members of a class are
//! equal and classes increase strictly from left to right. A class holding
//! a constant is anchored; the others are free.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::query::{fmt_value, value_to_string, CmpOp, Comparison, Domain, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderingError {
    #[error("term {0} occurs twice")]
    Duplicate(String),
    #[error("constants {0} and {1} are out of order or share a class")]
    ConstantOrder(String, String),
    #[error("not enough integers between {0} and {1}")]
    NoIntegerRoom(String, String),
    #[error("constant {0} is not an integer")]
    NonInteger(String),
    #[error("empty class")]
    EmptyClass,
    #[error("unknown term {0}")]
    UnknownTerm(String),
    #[error("{value} is not a possible value for {var}")]
    NotPossible { var: String, value: String },
    #[error("{0} is not a reduced term set")]
    NotReduced(String),
}

/// A variable-to-constant assignment; constants map to themselves.
pub type Assignment = BTreeMap<Term, Value>;

/// A set of values: endpoints with an inclusive flag, `None` for unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<(Value, bool)>,
    pub hi: Option<(Value, bool)>,
}

impl Interval {
    pub fn point(v: Value) -> Interval {
        Interval { lo: Some((v.clone(), true)), hi: Some((v, true)) }
    }

    pub fn contains(&self, v: &Value) -> bool {
        let above = match &self.lo {
            None => true,
            Some((lo, inc)) => v > lo || (*inc && v == lo),
        };
        let below = match &self.hi {
            None => true,
            Some((hi, inc)) => v < hi || (*inc && v == hi),
        };
        above && below
    }

    /// The unique member, if the interval is a single point.
    pub fn single_point(&self) -> Option<Value> {
        match (&self.lo, &self.hi) {
            (Some((a, true)), Some((b, true))) if a == b => Some(a.clone()),
            _ => None,
        }
    }

    /// Whether every member `v` satisfies `v op k`.
    pub fn all(&self, op: CmpOp, k: &Value) -> bool {
        let below = |strict: bool| match &self.hi {
            None => false,
            Some((hi, inc)) => hi < k || (hi == k && (!strict || !inc)),
        };
        let above = |strict: bool| match &self.lo {
            None => false,
            Some((lo, inc)) => lo > k || (lo == k && (!strict || !inc)),
        };
        match op {
            CmpOp::Lt => below(true),
            CmpOp::Le => below(false),
            CmpOp::Gt => above(true),
            CmpOp::Ge => above(false),
            CmpOp::Eq => self.single_point().as_ref() == Some(k),
            CmpOp::Ne => !self.contains(k),
        }
    }
}

/// A weak order on a finite set of terms, consistent with the numeric order
/// of its constants and satisfiable over its domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompleteOrdering {
    classes: Vec<Vec<Term>>,
    domain: Domain,
}

impl CompleteOrdering {
    /// Builds and validates an ordering from its classes, lowest first.
    pub fn from_classes(classes: Vec<Vec<Term>>, domain: Domain) -> Result<Self, OrderingError> {
        let mut seen = BTreeSet::new();
        let mut last_anchor: Option<(usize, Value)> = None;
        for (i, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(OrderingError::EmptyClass);
            }
            let mut anchor: Option<&Value> = None;
            for t in class {
                if !seen.insert(t.clone()) {
                    return Err(OrderingError::Duplicate(t.to_string()));
                }
                if let Term::Const(c) = t {
                    if !domain.contains(c) {
                        return Err(OrderingError::NonInteger(value_to_string(c)));
                    }
                    if let Some(a) = anchor {
                        return Err(OrderingError::ConstantOrder(value_to_string(a), value_to_string(c)));
                    }
                    anchor = Some(c);
                }
            }
            if let Some(c) = anchor {
                if let Some((j, prev)) = &last_anchor {
                    if prev >= c {
                        return Err(OrderingError::ConstantOrder(value_to_string(prev), value_to_string(c)));
                    }
                    let free = i - j - 1;
                    if domain == Domain::Integers && c - prev - Value::one() < Value::from_integer(BigInt::from(free)) {
                        return Err(OrderingError::NoIntegerRoom(value_to_string(prev), value_to_string(c)));
                    }
                }
                last_anchor = Some((i, c.clone()));
            }
        }
        Ok(CompleteOrdering { classes, domain })
    }

    pub fn classes(&self) -> &[Vec<Term>] {
        &self.classes
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.classes.iter().flatten()
    }

    pub fn class_of(&self, t: &Term) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(t))
    }

    /// The constant of class `i`, if it is anchored.
    pub fn anchor(&self, i: usize) -> Option<&Value> {
        self.classes[i].iter().find_map(Term::as_const)
    }

    fn anchors(&self) -> Vec<Option<Value>> {
        (0..self.classes.len()).map(|i| self.anchor(i).cloned()).collect()
    }

    /// The values class `i` can take in assignments satisfying the ordering.
    pub fn class_range(&self, i: usize) -> Interval {
        if let Some(c) = self.anchor(i) {
            return Interval::point(c.clone());
        }
        let left = (0..i).rev().find_map(|j| self.anchor(j).map(|c| (j, c.clone())));
        let right = (i + 1..self.classes.len()).find_map(|j| self.anchor(j).map(|c| (j, c.clone())));
        match self.domain {
            Domain::Rationals => Interval {
                lo: left.map(|(_, a)| (a, false)),
                hi: right.map(|(_, b)| (b, false)),
            },
            Domain::Integers => Interval {
                lo: left.map(|(j, a)| (a + Value::from_integer(BigInt::from(i - j)), true)),
                hi: right.map(|(j, b)| (b - Value::from_integer(BigInt::from(j - i)), true)),
            },
        }
    }

    /// Whether every assignment satisfying the ordering satisfies `c`.
    pub fn entails(&self, c: &Comparison) -> Result<bool, OrderingError> {
        let locate = |t: &Term| -> Result<Option<usize>, OrderingError> {
            match self.class_of(t) {
                Some(i) => Ok(Some(i)),
                None if !t.is_var() => Ok(None),
                None => Err(OrderingError::UnknownTerm(t.to_string())),
            }
        };
        let (l, r) = (locate(&c.lhs)?, locate(&c.rhs)?);
        Ok(match (l, r) {
            (Some(i), Some(j)) => c.op.holds(i.cmp(&j)),
            (Some(i), None) => self.class_range(i).all(c.op, c.rhs.as_const().expect("constant")),
            (None, Some(j)) => self.class_range(j).all(c.op.flip(), c.lhs.as_const().expect("constant")),
            (None, None) => c.op.eval(c.lhs.as_const().expect("constant"), c.rhs.as_const().expect("constant")),
        })
    }

    /// Canonical values for every class, given one fixed value per anchored class.
    fn canonical_values(&self, fixed: &[Option<Value>]) -> Vec<Value> {
        let n = fixed.len();
        let anchored: Vec<usize> = (0..n).filter(|&i| fixed[i].is_some()).collect();
        let mut out: Vec<Value> = vec![Value::zero(); n];
        if anchored.is_empty() {
            for (i, v) in out.iter_mut().enumerate() {
                *v = Value::from_integer(BigInt::from(i));
            }
            return out;
        }
        let step = |k: usize| Value::from_integer(BigInt::from(k));
        let first = anchored[0];
        let last = *anchored.last().expect("nonempty");
        for i in 0..n {
            if let Some(c) = &fixed[i] {
                out[i] = c.clone();
            } else if i < first {
                out[i] = fixed[first].clone().expect("anchor") - step(first - i);
            } else if i > last {
                out[i] = fixed[last].clone().expect("anchor") + step(i - last);
            }
        }
        for w in anchored.windows(2) {
            let (j, k) = (w[0], w[1]);
            let a = fixed[j].clone().expect("anchor");
            let b = fixed[k].clone().expect("anchor");
            for i in j + 1..k {
                let pos = i - j;
                out[i] = match self.domain {
                    Domain::Integers => &a + step(pos),
                    Domain::Rationals => {
                        let frac = Value::one() - Value::new(BigInt::one(), BigInt::from(2u8).pow(pos as u32));
                        &a + (&b - &a) * frac
                    }
                };
            }
        }
        out
    }

    /// Deterministic assignment realizing the ordering.
    pub fn satisfying_assignment(&self) -> Assignment {
        self.assignment_from(&self.canonical_values(&self.anchors()))
    }

    fn assignment_from(&self, values: &[Value]) -> Assignment {
        let mut out = Assignment::new();
        for (class, v) in self.classes.iter().zip(values) {
            for t in class {
                out.insert(t.clone(), v.clone());
            }
        }
        out
    }

    /// Whether `delta` maps every term of the ordering and realizes every relation.
    pub fn is_satisfied_by(&self, delta: &Assignment) -> bool {
        let mut prev: Option<Value> = None;
        for class in &self.classes {
            let mut vals = class.iter().map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => delta.get(t).cloned(),
            });
            let Some(Some(v)) = vals.next() else { return false };
            if !self.domain.contains(&v) || vals.any(|w| w.as_ref() != Some(&v)) {
                return false;
            }
            if prev.as_ref().is_some_and(|p| p >= &v) {
                return false;
            }
            prev = Some(v);
        }
        true
    }

    /// Merges equal terms into a single representative per class.
    ///
    /// The representative is the class constant, or over the integers the
    /// single point of a class pinned between constants, or the least variable.
    /// Returns the reduced ordering and the renaming of every original term.
    pub fn reduce_terms(&self) -> (CompleteOrdering, BTreeMap<Term, Term>) {
        let mut renaming = BTreeMap::new();
        let mut classes = Vec::with_capacity(self.classes.len());
        for (i, class) in self.classes.iter().enumerate() {
            let rep = match self.anchor(i) {
                Some(c) => Term::Const(c.clone()),
                None => match self.class_range(i).single_point() {
                    Some(p) => Term::Const(p),
                    None => class.iter().min().expect("nonempty").clone(),
                },
            };
            for t in class {
                renaming.insert(t.clone(), rep.clone());
            }
            classes.push(vec![rep]);
        }
        (CompleteOrdering { classes, domain: self.domain }, renaming)
    }

    /// Whether no two distinct terms are equal and no variable is pinned to a value.
    pub fn is_reduced(&self) -> bool {
        (0..self.classes.len()).all(|i| {
            self.classes[i].len() == 1 && (self.anchor(i).is_some() || self.class_range(i).single_point().is_none())
        })
    }

    /// Two assignments satisfying the ordering that agree except on `x`,
    /// mapping `x` to `c1` and `c2`.
    pub fn witness_pair(&self, x: &Term, c1: &Value, c2: &Value) -> Result<(Assignment, Assignment), OrderingError> {
        let i = self.class_of(x).ok_or_else(|| OrderingError::UnknownTerm(x.to_string()))?;
        if self.classes[i].len() != 1 || self.anchor(i).is_some() {
            return Err(OrderingError::NotReduced(x.to_string()));
        }
        let range = self.class_range(i);
        for c in [c1, c2] {
            if !range.contains(c) || !self.domain.contains(c) {
                return Err(OrderingError::NotPossible { var: x.to_string(), value: value_to_string(c) });
            }
        }
        let with_x = |c: &Value| {
            let mut fixed = self.anchors();
            fixed[i] = Some(c.clone());
            self.canonical_values(&fixed)
        };
        let (v1, v2) = (with_x(c1), with_x(c2));
        let merged: Vec<Value> = (0..self.classes.len())
            .map(|j| {
                use std::cmp::Ordering::*;
                match j.cmp(&i) {
                    Less => v1[j].clone().min(v2[j].clone()),
                    Greater => v1[j].clone().max(v2[j].clone()),
                    Equal => Value::zero(),
                }
            })
            .collect();
        let mut d1 = merged.clone();
        d1[i] = c1.clone();
        let mut d2 = merged;
        d2[i] = c2.clone();
        Ok((self.assignment_from(&d1), self.assignment_from(&d2)))
    }

    /// Every ordering of the terms plus constant `k` that restricts to this one.
    pub fn extensions_with(&self, k: &Value) -> Vec<CompleteOrdering> {
        if self.terms().any(|t| t.as_const() == Some(k)) {
            return vec![self.clone()];
        }
        let mut out = Vec::new();
        for pos in 0..=self.classes.len() {
            let mut classes = self.classes.clone();
            classes.insert(pos, vec![Term::Const(k.clone())]);
            if let Ok(o) = CompleteOrdering::from_classes(classes, self.domain) {
                out.push(o);
            }
            if pos < self.classes.len() && self.anchor(pos).is_none() {
                let mut classes = self.classes.clone();
                classes[pos].push(Term::Const(k.clone()));
                if let Ok(o) = CompleteOrdering::from_classes(classes, self.domain) {
                    out.push(o);
                }
            }
        }
        out
    }
}

impl fmt::Display for CompleteOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, class) in self.classes.iter().enumerate() {
            if i > 0 {
                f.write_str(" < ")?;
            }
            for (j, t) in class.iter().enumerate() {
                if j > 0 {
                    f.write_str(" = ")?;
                }
                match t {
                    Term::Const(c) => fmt_value(c, f)?,
                    Term::Var(v) => f.write_str(v)?,
                }
            }
        }
        Ok(())
    }
}

/// Streams every complete ordering of `terms` exactly once.
///
/// Constants are placed first in numeric order; variables are then inserted
/// one at a time, sorted by name, either into an existing class or as a new
/// class in some gap. Over the integers, partial orders without enough
/// integer room between constants are pruned.
pub fn enumerate_complete_orderings(terms: &BTreeSet<Term>, domain: Domain) -> OrderingIter {
    let constants: Vec<Vec<Term>> = terms.iter().filter(|t| !t.is_var()).map(|t| vec![t.clone()]).collect();
    let variables: Vec<Term> = terms.iter().filter(|t| t.is_var()).cloned().collect();
    let start = CompleteOrdering::from_classes(constants, domain).ok();
    OrderingIter { variables, domain, stack: start.into_iter().map(|o| (o.classes, 0)).collect() }
}

pub struct OrderingIter {
    variables: Vec<Term>,
    domain: Domain,
    stack: Vec<(Vec<Vec<Term>>, usize)>,
}

impl Iterator for OrderingIter {
    type Item = CompleteOrdering;

    fn next(&mut self) -> Option<CompleteOrdering> {
        while let Some((classes, k)) = self.stack.pop() {
            if k == self.variables.len() {
                return Some(CompleteOrdering { classes, domain: self.domain });
            }
            let v = &self.variables[k];
            let mut children = Vec::new();
            for pos in 0..=classes.len() {
                let mut c = classes.clone();
                c.insert(pos, vec![v.clone()]);
                if self.domain == Domain::Rationals || integer_room(&c) {
                    children.push(c);
                }
                if pos < classes.len() {
                    let mut c = classes.clone();
                    c[pos].push(v.clone());
                    children.push(c);
                }
            }
            for c in children.into_iter().rev() {
                self.stack.push((c, k + 1));
            }
        }
        None
    }
}

fn integer_room(classes: &[Vec<Term>]) -> bool {
    let mut last: Option<(usize, &Value)> = None;
    for (i, class) in classes.iter().enumerate() {
        if let Some(c) = class.iter().find_map(Term::as_const) {
            if let Some((j, prev)) = last {
                let free = Value::from_integer(BigInt::from(i - j - 1));
                if c - prev - Value::one() < free {
                    return false;
                }
            }
            last = Some((i, c));
        }
    }
    true
}
