//! Validity of ordered identities `L → α(B) = α(B′)`.

mod linear;
mod prod;

use std::fmt;

use crate::aggregation::{apply, AggFn, AggregateValue};
use crate::orderings::{Assignment, CompleteOrdering};
use crate::query::{Term, Value};

pub use linear::decide_sum;
pub use prod::decide_prod;

/// A bag of term tuples.
pub type TermBag = Vec<Vec<Term>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedIdentity {
    pub ordering: CompleteOrdering,
    pub left: TermBag,
    pub right: TermBag,
    pub function: AggFn,
}

impl fmt::Display for OrderedIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bag = |b: &TermBag| {
            let items: Vec<String> = b
                .iter()
                .map(|t| match t.as_slice() {
                    [x] => x.to_string(),
                    ts => format!("({})", ts.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")),
                })
                .collect();
            format!("{{{}}}", items.join(", "))
        };
        write!(f, "{} -> {}({}) = {}({})", self.ordering, self.function, bag(&self.left), self.function, bag(&self.right))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityVerdict {
    pub valid: bool,
    /// Present exactly when the identity is invalid.
    pub witness: Option<Assignment>,
}

impl IdentityVerdict {
    pub fn valid() -> Self {
        IdentityVerdict { valid: true, witness: None }
    }

    pub fn refuted(witness: Assignment) -> Self {
        IdentityVerdict { valid: false, witness: Some(witness) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdentityError {
    #[error("{0} is not shiftable")]
    NotShiftable(AggFn),
    #[error("{0} is not handled by this decision procedure")]
    WrongFunction(AggFn),
    #[error("term {0} does not occur in the ordering")]
    UnknownTerm(String),
    #[error("{function} expects tuples of arity {expected}")]
    Arity { function: AggFn, expected: usize },
    #[error("bags must be nonempty")]
    EmptyBag,
    #[error("internal: {0}")]
    Internal(String),
}

impl OrderedIdentity {
    pub fn new(ordering: CompleteOrdering, left: TermBag, right: TermBag, function: AggFn) -> Result<Self, IdentityError> {
        let id = OrderedIdentity { ordering, left, right, function };
        id.check()?;
        Ok(id)
    }

    fn check(&self) -> Result<(), IdentityError> {
        if self.left.is_empty() || self.right.is_empty() {
            return Err(IdentityError::EmptyBag);
        }
        let k = self.function.arity();
        for tuple in self.left.iter().chain(&self.right) {
            if tuple.len() != k {
                return Err(IdentityError::Arity { function: self.function, expected: k });
            }
            for t in tuple {
                if self.ordering.class_of(t).is_none() {
                    return Err(IdentityError::UnknownTerm(t.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Both sides aggregated under `delta`.
    pub fn evaluate(&self, delta: &Assignment) -> Result<(AggregateValue, AggregateValue), IdentityError> {
        let inst = |b: &TermBag| -> Result<Vec<Vec<Value>>, IdentityError> {
            b.iter()
                .map(|t| t.iter().map(|x| instantiate(x, delta)).collect())
                .collect()
        };
        let l = apply(self.function, &inst(&self.left)?).map_err(|e| IdentityError::Internal(e.to_string()))?;
        let r = apply(self.function, &inst(&self.right)?).map_err(|e| IdentityError::Internal(e.to_string()))?;
        Ok((l, r))
    }

    /// Whether `delta` satisfies the ordering and separates the two sides.
    pub fn refuted_by(&self, delta: &Assignment) -> bool {
        self.ordering.is_satisfied_by(delta) && self.evaluate(delta).is_ok_and(|(l, r)| l != r)
    }
}

pub(crate) fn instantiate(t: &Term, delta: &Assignment) -> Result<Value, IdentityError> {
    match t {
        Term::Const(c) => Ok(c.clone()),
        Term::Var(_) => delta.get(t).cloned().ok_or_else(|| IdentityError::UnknownTerm(t.to_string())),
    }
}

/// Shiftable functions: one canonical assignment decides the identity.
pub fn decide_shiftable(id: &OrderedIdentity) -> Result<IdentityVerdict, IdentityError> {
    if !id.function.shiftable() {
        return Err(IdentityError::NotShiftable(id.function));
    }
    id.check()?;
    let delta = id.ordering.satisfying_assignment();
    let (l, r) = id.evaluate(&delta)?;
    Ok(if l == r { IdentityVerdict::valid() } else { IdentityVerdict::refuted(delta) })
}

/// Dispatches on the aggregation function.
pub fn decide(id: &OrderedIdentity) -> Result<IdentityVerdict, IdentityError> {
    match id.function {
        f if f.shiftable() => decide_shiftable(id),
        AggFn::Sum | AggFn::Avg => decide_sum(id),
        AggFn::Prod => decide_prod(id),
        f => Err(IdentityError::WrongFunction(f)),
    }
}
