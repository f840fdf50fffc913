//! Abelian monoids underlying the aggregation functions.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::query::Value;

/// An abelian monoid. `inverse` is `Some` exactly for groups.
pub trait Monoid {
    type Elem: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn plus(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inverse(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn idempotent(&self) -> bool;

    fn sum<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items.into_iter().fold(self.zero(), |acc, x| self.plus(&acc, x))
    }
}

/// (ℚ, +) or (ℤ, +).
#[derive(Debug, Clone, Copy, Default)]
pub struct SumMonoid;

impl Monoid for SumMonoid {
    type Elem = Value;

    fn zero(&self) -> Value {
        Value::zero()
    }

    fn plus(&self, a: &Value, b: &Value) -> Value {
        a + b
    }

    fn inverse(&self, a: &Value) -> Option<Value> {
        Some(-a)
    }

    fn idempotent(&self) -> bool {
        false
    }
}

/// (ℤ, +) used by COUNT.
#[derive(Debug, Clone, Copy, Default)]
pub struct CountMonoid;

impl Monoid for CountMonoid {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }

    fn plus(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }

    fn inverse(&self, a: &BigInt) -> Option<BigInt> {
        Some(-a)
    }

    fn idempotent(&self) -> bool {
        false
    }
}

/// ℤ₂ with `1 + 1 = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParityMonoid;

impl Monoid for ParityMonoid {
    type Elem = bool;

    fn zero(&self) -> bool {
        false
    }

    fn plus(&self, a: &bool, b: &bool) -> bool {
        a ^ b
    }

    fn inverse(&self, a: &bool) -> Option<bool> {
        Some(*a)
    }

    fn idempotent(&self) -> bool {
        false
    }
}

/// Maximum with bottom element `None`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxMonoid;

impl Monoid for MaxMonoid {
    type Elem = Option<Value>;

    fn zero(&self) -> Option<Value> {
        None
    }

    fn plus(&self, a: &Option<Value>, b: &Option<Value>) -> Option<Value> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.max(y).clone()),
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        }
    }

    fn inverse(&self, _: &Option<Value>) -> Option<Option<Value>> {
        None
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// Minimum with bottom element `None`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinMonoid;

impl Monoid for MinMonoid {
    type Elem = Option<Value>;

    fn zero(&self) -> Option<Value> {
        None
    }

    fn plus(&self, a: &Option<Value>, b: &Option<Value>) -> Option<Value> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y).clone()),
            (Some(x), None) | (None, Some(x)) => Some(x.clone()),
            (None, None) => None,
        }
    }

    fn inverse(&self, _: &Option<Value>) -> Option<Option<Value>> {
        None
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// Pairs of the two greatest distinct elements, `(⊥, ⊥)` as zero.
///
/// Invariant: `(Some(d), Some(e))` has `d > e`; `(None, Some(_))` never occurs.
#[derive(Debug, Clone, Copy, Default)]
pub struct TopTwoMonoid;

pub type Pair = (Option<Value>, Option<Value>);

fn best_two(a: &Pair, b: &Pair, greater: impl Fn(&Value, &Value) -> bool) -> Pair {
    let mut items: Vec<&Value> = [&a.0, &a.1, &b.0, &b.1].into_iter().flatten().collect();
    items.sort_by(|x, y| {
        if greater(x, y) {
            std::cmp::Ordering::Less
        } else if greater(y, x) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    items.dedup();
    (items.first().map(|v| (*v).clone()), items.get(1).map(|v| (*v).clone()))
}

impl Monoid for TopTwoMonoid {
    type Elem = Pair;

    fn zero(&self) -> Pair {
        (None, None)
    }

    fn plus(&self, a: &Pair, b: &Pair) -> Pair {
        best_two(a, b, |x, y| x > y)
    }

    fn inverse(&self, _: &Pair) -> Option<Pair> {
        None
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// Mirror of [`TopTwoMonoid`]: the two least distinct elements.
#[derive(Debug, Clone, Copy, Default)]
pub struct BottomTwoMonoid;

impl Monoid for BottomTwoMonoid {
    type Elem = Pair;

    fn zero(&self) -> Pair {
        (None, None)
    }

    fn plus(&self, a: &Pair, b: &Pair) -> Pair {
        best_two(a, b, |x, y| x < y)
    }

    fn inverse(&self, _: &Pair) -> Option<Pair> {
        None
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// Multiplicative group on the nonzero rationals. Zero is handled by the
/// caller as an annihilator.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProductMonoid;

impl Monoid for ProductMonoid {
    type Elem = Value;

    fn zero(&self) -> Value {
        Value::one()
    }

    fn plus(&self, a: &Value, b: &Value) -> Value {
        a * b
    }

    fn inverse(&self, a: &Value) -> Option<Value> {
        (!a.is_zero()).then(|| a.recip())
    }

    fn idempotent(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::int;

    #[test]
    fn top_two_merge() {
        let m = TopTwoMonoid;
        let a = (Some(int(5)), None);
        let b = (Some(int(2)), Some(int(1)));
        assert_eq!(m.plus(&a, &b), (Some(int(5)), Some(int(2))));
        assert_eq!(m.plus(&a, &a), a);
        assert_eq!(m.plus(&m.zero(), &b), b);
    }

    #[test]
    fn bottom_two_merge() {
        let m = BottomTwoMonoid;
        let a = (Some(int(5)), None);
        let b = (Some(int(1)), Some(int(2)));
        assert_eq!(m.plus(&a, &b), (Some(int(1)), Some(int(2))));
    }

    #[test]
    fn parity_is_a_group() {
        let m = ParityMonoid;
        assert!(!m.plus(&true, &true));
        assert_eq!(m.plus(&true, &m.inverse(&true).unwrap()), m.zero());
    }
}
