//! Aggregation functions, their monoids and their abstract properties.

pub mod monoid;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::query::{fmt_value, Domain, Value};
use monoid::{BottomTwoMonoid, CountMonoid, MaxMonoid, MinMonoid, Monoid, ParityMonoid, ProductMonoid, SumMonoid, TopTwoMonoid};

/// The supported aggregation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggFn {
    Count,
    Parity,
    Sum,
    Prod,
    Avg,
    Max,
    Min,
    Cntd,
    Top2,
    Bot2,
}

impl AggFn {
    pub const ALL: [AggFn; 10] = [
        AggFn::Count,
        AggFn::Parity,
        AggFn::Sum,
        AggFn::Prod,
        AggFn::Avg,
        AggFn::Max,
        AggFn::Min,
        AggFn::Cntd,
        AggFn::Top2,
        AggFn::Bot2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AggFn::Count => "count",
            AggFn::Parity => "parity",
            AggFn::Sum => "sum",
            AggFn::Prod => "prod",
            AggFn::Avg => "avg",
            AggFn::Max => "max",
            AggFn::Min => "min",
            AggFn::Cntd => "cntd",
            AggFn::Top2 => "top2",
            AggFn::Bot2 => "bot2",
        }
    }

    /// Number of arguments of the aggregate term.
    pub fn arity(&self) -> usize {
        match self {
            AggFn::Count | AggFn::Parity => 0,
            _ => 1,
        }
    }

    pub fn shiftable(&self) -> bool {
        matches!(self, AggFn::Count | AggFn::Parity | AggFn::Cntd | AggFn::Max | AggFn::Min | AggFn::Top2 | AggFn::Bot2)
    }

    pub fn singleton_determining(&self) -> bool {
        !matches!(self, AggFn::Cntd)
    }

    pub fn monoid_kind(&self) -> MonoidKind {
        match self {
            AggFn::Max | AggFn::Min | AggFn::Top2 | AggFn::Bot2 => MonoidKind::Idempotent,
            AggFn::Count | AggFn::Parity | AggFn::Sum => MonoidKind::Group,
            AggFn::Prod | AggFn::Avg | AggFn::Cntd => MonoidKind::None,
        }
    }
}

impl fmt::Display for AggFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AggFn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "count" => AggFn::Count,
            "parity" | "prty" => AggFn::Parity,
            "sum" => AggFn::Sum,
            "prod" | "product" => AggFn::Prod,
            "avg" | "average" => AggFn::Avg,
            "max" => AggFn::Max,
            "min" => AggFn::Min,
            "cntd" => AggFn::Cntd,
            "top2" | "toptwo" => AggFn::Top2,
            "bot2" | "bottwo" => AggFn::Bot2,
            other => return Err(format!("unknown aggregation function `{other}`")),
        })
    }
}

/// How the monoid of a function decomposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonoidKind {
    Idempotent,
    Group,
    None,
}

/// Descriptor of an aggregation function over a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregationFunction {
    pub function: AggFn,
    pub domain: Domain,
    pub arity: usize,
    pub monoid: MonoidKind,
    pub shiftable: bool,
    pub singleton_determining: bool,
    pub decomposable: bool,
    /// PROD over the rationals: a group on ℚ∖{0} plus a zero annihilator.
    pub prod_special: bool,
}

impl AggregationFunction {
    pub fn describe(function: AggFn, domain: Domain) -> Self {
        let monoid = function.monoid_kind();
        AggregationFunction {
            function,
            domain,
            arity: function.arity(),
            monoid,
            shiftable: function.shiftable(),
            singleton_determining: function.singleton_determining(),
            decomposable: monoid != MonoidKind::None,
            prod_special: function == AggFn::Prod && domain == Domain::Rationals,
        }
    }
}

/// Result of aggregating a group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AggregateValue {
    Rational(Value),
    Integer(BigInt),
    Bit(bool),
    /// Greatest element and, if any, the second greatest distinct element.
    TopTwo(Value, Option<Value>),
    /// Least element and, if any, the second least distinct element.
    BottomTwo(Value, Option<Value>),
}

impl fmt::Display for AggregateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregateValue::Rational(v) => fmt_value(v, f),
            AggregateValue::Integer(n) => write!(f, "{n}"),
            AggregateValue::Bit(b) => f.write_str(if *b { "1" } else { "0" }),
            AggregateValue::TopTwo(d, e) | AggregateValue::BottomTwo(d, e) => {
                f.write_str("(")?;
                fmt_value(d, f)?;
                f.write_str(", ")?;
                match e {
                    Some(e) => fmt_value(e, f)?,
                    None => f.write_str("⊥")?,
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AggError {
    #[error("empty group")]
    EmptyGroup,
    #[error("{function} expects tuples of arity {expected}, got {got}")]
    Arity { function: AggFn, expected: usize, got: usize },
    #[error("shifting map is not strictly increasing")]
    NotIncreasing,
    #[error("shifting map is undefined on {0}")]
    Undefined(String),
}

/// Aggregates a nonempty bag of tuples.
pub fn apply(function: AggFn, bag: &[Vec<Value>]) -> Result<AggregateValue, AggError> {
    if bag.is_empty() {
        return Err(AggError::EmptyGroup);
    }
    let k = function.arity();
    if let Some(t) = bag.iter().find(|t| t.len() != k) {
        return Err(AggError::Arity { function, expected: k, got: t.len() });
    }
    let first = |t: &Vec<Value>| t[0].clone();
    Ok(match function {
        AggFn::Count => {
            let ones: Vec<BigInt> = bag.iter().map(|_| BigInt::one()).collect();
            AggregateValue::Integer(CountMonoid.sum(&ones))
        }
        AggFn::Parity => {
            let bits: Vec<bool> = bag.iter().map(|_| true).collect();
            AggregateValue::Bit(ParityMonoid.sum(&bits))
        }
        AggFn::Sum => {
            let xs: Vec<Value> = bag.iter().map(first).collect();
            AggregateValue::Rational(SumMonoid.sum(&xs))
        }
        AggFn::Prod => {
            let xs: Vec<Value> = bag.iter().map(first).collect();
            if xs.iter().any(Zero::is_zero) {
                AggregateValue::Rational(Value::zero())
            } else {
                AggregateValue::Rational(ProductMonoid.sum(&xs))
            }
        }
        AggFn::Avg => {
            let xs: Vec<Value> = bag.iter().map(first).collect();
            let n = Value::from_integer(BigInt::from(xs.len()));
            AggregateValue::Rational(SumMonoid.sum(&xs) / n)
        }
        AggFn::Max => {
            let xs: Vec<Option<Value>> = bag.iter().map(|t| Some(first(t))).collect();
            AggregateValue::Rational(MaxMonoid.sum(&xs).expect("nonempty"))
        }
        AggFn::Min => {
            let xs: Vec<Option<Value>> = bag.iter().map(|t| Some(first(t))).collect();
            AggregateValue::Rational(MinMonoid.sum(&xs).expect("nonempty"))
        }
        AggFn::Cntd => {
            let distinct: BTreeSet<&Value> = bag.iter().map(|t| &t[0]).collect();
            AggregateValue::Integer(BigInt::from(distinct.len()))
        }
        AggFn::Top2 => {
            let xs: Vec<monoid::Pair> = bag.iter().map(|t| (Some(first(t)), None)).collect();
            let (d, e) = TopTwoMonoid.sum(&xs);
            AggregateValue::TopTwo(d.expect("nonempty"), e)
        }
        AggFn::Bot2 => {
            let xs: Vec<monoid::Pair> = bag.iter().map(|t| (Some(first(t)), None)).collect();
            let (d, e) = BottomTwoMonoid.sum(&xs);
            AggregateValue::BottomTwo(d.expect("nonempty"), e)
        }
    })
}

/// Applies a strictly increasing partial map to every constant of the bag.
pub fn apply_shifting(phi: &BTreeMap<Value, Value>, bag: &[Vec<Value>]) -> Result<Vec<Vec<Value>>, AggError> {
    let images: Vec<&Value> = phi.values().collect();
    if images.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AggError::NotIncreasing);
    }
    bag.iter()
        .map(|t| {
            t.iter()
                .map(|c| phi.get(c).cloned().ok_or_else(|| AggError::Undefined(crate::query::value_to_string(c))))
                .collect()
        })
        .collect()
}
