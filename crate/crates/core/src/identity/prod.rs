//! PROD identities.
//!
//! The ordering is extended with the constant 0 in every consistent way.
//! On each extension the term set is reduced, and both sides become
//! monomials `c·u_1^{m_1}⋯u_k^{m_k}` and `d·u_1^{n_1}⋯u_k^{n_k}` over
//! variables that are nonzero and pairwise distinct. The identity holds on
//! the extension iff `c = d = 0`, or `c = d` and the exponents agree.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::{IdentityError, IdentityVerdict, OrderedIdentity, TermBag};
use crate::aggregation::AggFn;
use crate::orderings::{Assignment, CompleteOrdering, Interval};
use crate::query::{Domain, Term, Value};

struct Monomial {
    coefficient: Value,
    exponents: BTreeMap<Term, usize>,
}

fn monomial(bag: &TermBag, renaming: &BTreeMap<Term, Term>) -> Monomial {
    let mut coefficient = Value::one();
    let mut exponents = BTreeMap::new();
    for tuple in bag {
        let t = renaming.get(&tuple[0]).cloned().unwrap_or_else(|| tuple[0].clone());
        match t {
            Term::Const(c) => coefficient *= c,
            v => *exponents.entry(v).or_insert(0) += 1,
        }
    }
    if coefficient.is_zero() {
        exponents.clear();
    }
    Monomial { coefficient, exponents }
}

/// Two distinct values of the same sign inside `range`.
fn two_values(range: &Interval, domain: Domain) -> (Value, Value) {
    let one = Value::one();
    let two = &one + &one;
    match (&range.lo, &range.hi, domain) {
        (Some((a, _)), _, Domain::Integers) => (a.clone(), a + &one),
        (None, Some((b, _)), Domain::Integers) => (b - &one, b.clone()),
        (Some((a, _)), Some((b, _)), Domain::Rationals) => {
            let d = b - a;
            (a + &d / &two, a + &d * Value::new(3.into(), 4.into()))
        }
        (Some((a, _)), None, Domain::Rationals) => (a + &one, a + &two),
        (None, Some((b, _)), Domain::Rationals) => (b - &two, b - &one),
        (None, None, _) => (one, two),
    }
}

/// Maps an assignment of the reduced ordering back to the original terms.
fn pull_back(original: &CompleteOrdering, renaming: &BTreeMap<Term, Term>, delta: &Assignment) -> Assignment {
    original
        .terms()
        .map(|t| {
            let v = match &renaming[t] {
                Term::Const(c) => c.clone(),
                rep => delta[rep].clone(),
            };
            (t.clone(), v)
        })
        .collect()
}

/// Decides PROD identities.
pub fn decide_prod(id: &OrderedIdentity) -> Result<IdentityVerdict, IdentityError> {
    if id.function != AggFn::Prod {
        return Err(IdentityError::WrongFunction(id.function));
    }
    id.check()?;
    let domain = id.ordering.domain();
    for extension in id.ordering.extensions_with(&Value::zero()) {
        let (reduced, renaming) = extension.reduce_terms();
        let left = monomial(&id.left, &renaming);
        let right = monomial(&id.right, &renaming);
        let both_zero = left.coefficient.is_zero() && right.coefficient.is_zero();
        let same = left.coefficient == right.coefficient && left.exponents == right.exponents;
        if both_zero || same {
            continue;
        }
        let candidates: Vec<Assignment> = if left.exponents == right.exponents {
            vec![reduced.satisfying_assignment()]
        } else {
            let u = left
                .exponents
                .keys()
                .chain(right.exponents.keys())
                .find(|v| left.exponents.get(*v) != right.exponents.get(*v))
                .expect("exponents differ")
                .clone();
            let i = reduced.class_of(&u).expect("reduced term");
            let (c1, c2) = two_values(&reduced.class_range(i), domain);
            let (d1, d2) = reduced
                .witness_pair(&u, &c1, &c2)
                .map_err(|e| IdentityError::Internal(e.to_string()))?;
            vec![d1, d2]
        };
        for delta in candidates {
            let witness = pull_back(&id.ordering, &renaming, &delta);
            if id.refuted_by(&witness) {
                return Ok(IdentityVerdict::refuted(witness));
            }
        }
        return Err(IdentityError::Internal(format!("no refuting assignment found for {id}")));
    }
    Ok(IdentityVerdict::valid())
}
