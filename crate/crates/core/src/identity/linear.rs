//! SUM and AVG identities: sign analysis of one linear form along the chain.
//!
//! The form `s = Σ B − Σ B′` (for AVG, `|B′|·Σ B − |B|·Σ B′`) is rewritten
//! in gap variables. Between two anchors the gaps are positive and sum to
//! the anchor distance; outside the anchors they are positive and unbounded.
//! The extreme values of `s` are then read off segment by segment.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{IdentityError, IdentityVerdict, OrderedIdentity};
use crate::aggregation::AggFn;
use crate::orderings::Assignment;
use crate::query::{Domain, Value};

/// An extended bound: finite with an attained flag, or infinite.
#[derive(Debug, Clone, PartialEq)]
enum Ext {
    Inf,
    Finite(Value, bool),
}

/// Infimum and supremum of a set of values.
#[derive(Debug, Clone)]
struct Range {
    inf: Ext,
    sup: Ext,
}

impl Range {
    fn point(v: Value) -> Range {
        Range { inf: Ext::Finite(v.clone(), true), sup: Ext::Finite(v, true) }
    }

    fn add(&self, other: &Range) -> Range {
        let add = |a: &Ext, b: &Ext| match (a, b) {
            (Ext::Finite(x, ax), Ext::Finite(y, by)) => Ext::Finite(x + y, *ax && *by),
            _ => Ext::Inf,
        };
        Range { inf: add(&self.inf, &other.inf), sup: add(&self.sup, &other.sup) }
    }

    fn can_be_positive(&self) -> bool {
        match &self.sup {
            Ext::Inf => true,
            Ext::Finite(v, _) => v.is_positive(),
        }
    }

    fn can_be_negative(&self) -> bool {
        match &self.inf {
            Ext::Inf => true,
            Ext::Finite(v, _) => v.is_negative(),
        }
    }
}

/// Contribution of one gap `w·g` with `g > 0` unbounded (`g >= 1` over ℤ).
fn unbounded_gap(w: &Value, domain: Domain) -> Range {
    if w.is_zero() {
        return Range::point(Value::zero());
    }
    let near = match domain {
        Domain::Rationals => Ext::Finite(Value::zero(), false),
        Domain::Integers => Ext::Finite(w.clone(), true),
    };
    if w.is_positive() {
        Range { inf: near, sup: Ext::Inf }
    } else {
        Range { inf: Ext::Inf, sup: near }
    }
}

/// Contribution `Σ w_l g_l` of a bounded segment whose gaps sum to `span`.
/// The last gap has weight zero and is included in `weights`.
fn bounded_segment(weights: &[Value], span: &Value, domain: Domain) -> Range {
    let min = weights.iter().min().expect("nonempty").clone();
    let max = weights.iter().max().expect("nonempty").clone();
    match domain {
        Domain::Rationals => {
            if min == max {
                Range::point(span * &min)
            } else {
                Range { inf: Ext::Finite(span * &min, false), sup: Ext::Finite(span * &max, false) }
            }
        }
        Domain::Integers => {
            let base: Value = weights.iter().sum();
            let spare = span - Value::from_integer(BigInt::from(weights.len()));
            Range { inf: Ext::Finite(&base + &spare * &min, true), sup: Ext::Finite(&base + &spare * &max, true) }
        }
    }
}

struct Form {
    /// Coefficient of each class value.
    coeffs: Vec<Value>,
    constant: Value,
}

fn linear_form(id: &OrderedIdentity) -> Form {
    let n = id.ordering.len();
    let mut coeffs = vec![Value::zero(); n];
    let (wl, wr) = match id.function {
        AggFn::Avg => (
            Value::from_integer(BigInt::from(id.right.len())),
            Value::from_integer(BigInt::from(id.left.len())),
        ),
        _ => (Value::one(), Value::one()),
    };
    for (bag, w) in [(&id.left, wl), (&id.right, -wr)] {
        for tuple in bag {
            let i = id.ordering.class_of(&tuple[0]).expect("checked");
            coeffs[i] += &w;
        }
    }
    let mut constant = Value::zero();
    for (i, c) in coeffs.iter_mut().enumerate() {
        if let Some(a) = id.ordering.anchor(i) {
            constant += &*c * a;
            *c = Value::zero();
        }
    }
    Form { coeffs, constant }
}

/// A run of free classes and the anchors around it.
struct Segment {
    classes: Vec<usize>,
    left: Option<Value>,
    right: Option<Value>,
}

fn segments(id: &OrderedIdentity) -> Vec<Segment> {
    let o = &id.ordering;
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut left: Option<Value> = None;
    for i in 0..o.len() {
        match o.anchor(i) {
            Some(c) => {
                if !current.is_empty() {
                    out.push(Segment { classes: std::mem::take(&mut current), left: left.clone(), right: Some(c.clone()) });
                }
                left = Some(c.clone());
            }
            None => current.push(i),
        }
    }
    if !current.is_empty() {
        out.push(Segment { classes: current, left, right: None });
    }
    out
}

/// Suffix sums `w_l = Σ_{j >= l} c_j` of the coefficients along a segment.
fn suffix_weights(coeffs: &[Value]) -> Vec<Value> {
    let mut out = vec![Value::zero(); coeffs.len()];
    let mut acc = Value::zero();
    for (i, c) in coeffs.iter().enumerate().rev() {
        acc += c;
        out[i] = acc.clone();
    }
    out
}

fn range_of(form: &Form, segs: &[Segment], domain: Domain) -> Range {
    let mut total = Range::point(form.constant.clone());
    for seg in segs {
        let cs: Vec<Value> = seg.classes.iter().map(|&i| form.coeffs[i].clone()).collect();
        let sum: Value = cs.iter().sum();
        match (&seg.left, &seg.right) {
            (Some(a), Some(b)) => {
                // v_i = a + g_1 + ... + g_i, the final gap reaches b.
                let mut w = suffix_weights(&cs);
                w.push(Value::zero());
                total = total.add(&Range::point(a * &sum)).add(&bounded_segment(&w, &(b - a), domain));
            }
            (Some(a), None) => {
                total = total.add(&Range::point(a * &sum));
                for w in suffix_weights(&cs) {
                    total = total.add(&unbounded_gap(&w, domain));
                }
            }
            (None, Some(b)) => {
                // v_i = b - (gaps between class i and b), gap l lies left of the l-th class from b.
                let rev: Vec<Value> = cs.iter().rev().cloned().collect();
                total = total.add(&Range::point(b * &sum));
                for w in suffix_weights(&rev) {
                    total = total.add(&unbounded_gap(&-w, domain));
                }
            }
            (None, None) => {
                // v_0 is free, v_i = v_0 + g_1 + ... + g_i.
                if !sum.is_zero() {
                    total = total.add(&Range { inf: Ext::Inf, sup: Ext::Inf });
                }
                for w in suffix_weights(&cs).into_iter().skip(1) {
                    total = total.add(&unbounded_gap(&w, domain));
                }
            }
        }
    }
    total
}

/// Class values pushing `s` toward its supremum (`sign = 1`) or infimum (`sign = -1`).
fn extreme_values(form: &Form, segs: &[Segment], domain: Domain, sign: i64, j: u32, n: usize, anchors: &[Option<Value>]) -> Vec<Value> {
    let two = Value::from_integer(BigInt::from(2));
    let big = two.pow(j as i32);
    let small = match domain {
        Domain::Rationals => Value::one() / &big,
        Domain::Integers => Value::one(),
    };
    let sign = Value::from_integer(BigInt::from(sign));
    let mut values: Vec<Value> = (0..n).map(|i| anchors[i].clone().unwrap_or_else(Value::zero)).collect();
    let gap_for = |w: &Value| -> Value { if (w * &sign).is_positive() { big.clone() } else { small.clone() } };
    for seg in segs {
        let cs: Vec<Value> = seg.classes.iter().map(|&i| form.coeffs[i].clone()).collect();
        match (&seg.left, &seg.right) {
            (Some(a), Some(b)) => {
                let mut w = suffix_weights(&cs);
                w.push(Value::zero());
                let m = w.len();
                let best = (0..m)
                    .max_by(|&x, &y| (&w[x] * &sign).cmp(&(&w[y] * &sign)).then(y.cmp(&x)))
                    .expect("nonempty");
                let span = b - a;
                let unit = match domain {
                    Domain::Rationals => {
                        let cap = &span / Value::from_integer(BigInt::from(2 * m));
                        small.clone().min(cap)
                    }
                    Domain::Integers => Value::one(),
                };
                let heavy = &span - &unit * Value::from_integer(BigInt::from(m - 1));
                let mut v = a.clone();
                for (l, &class) in seg.classes.iter().enumerate() {
                    v += if l == best { heavy.clone() } else { unit.clone() };
                    values[class] = v.clone();
                }
            }
            (Some(a), None) => {
                let mut v = a.clone();
                for (w, &class) in suffix_weights(&cs).iter().zip(&seg.classes) {
                    v += gap_for(w);
                    values[class] = v.clone();
                }
            }
            (None, Some(b)) => {
                let rev: Vec<Value> = cs.iter().rev().cloned().collect();
                let mut v = b.clone();
                for (w, &class) in suffix_weights(&rev).iter().zip(seg.classes.iter().rev()) {
                    v -= gap_for(&-w.clone());
                    values[class] = v.clone();
                }
            }
            (None, None) => {
                let sum: Value = cs.iter().sum();
                let mut v = if (&sum * &sign).is_positive() {
                    big.clone()
                } else if sum.is_zero() {
                    Value::zero()
                } else {
                    -big.clone()
                };
                let w = suffix_weights(&cs);
                for (l, &class) in seg.classes.iter().enumerate() {
                    if l > 0 {
                        v += gap_for(&w[l]);
                    }
                    values[class] = v.clone();
                }
            }
        }
    }
    values
}

fn evaluate_form(form: &Form, values: &[Value]) -> Value {
    form.coeffs.iter().zip(values).map(|(c, v)| c * v).sum::<Value>() + &form.constant
}

/// Decides SUM and AVG identities.
pub fn decide_sum(id: &OrderedIdentity) -> Result<IdentityVerdict, IdentityError> {
    if !matches!(id.function, AggFn::Sum | AggFn::Avg) {
        return Err(IdentityError::WrongFunction(id.function));
    }
    id.check()?;
    let domain = id.ordering.domain();
    let form = linear_form(id);
    let segs = segments(id);
    let range = range_of(&form, &segs, domain);
    let n = id.ordering.len();
    let anchors: Vec<Option<Value>> = (0..n).map(|i| id.ordering.anchor(i).cloned()).collect();
    for (feasible, sign) in [(range.can_be_positive(), 1i64), (range.can_be_negative(), -1i64)] {
        if !feasible {
            continue;
        }
        for j in 1..=512u32 {
            let values = extreme_values(&form, &segs, domain, sign, j, n, &anchors);
            let s = evaluate_form(&form, &values);
            if (sign > 0 && s.is_positive()) || (sign < 0 && s.is_negative()) {
                let mut delta = Assignment::new();
                for (class, v) in id.ordering.classes().iter().zip(&values) {
                    for t in class {
                        delta.insert(t.clone(), v.clone());
                    }
                }
                debug_assert!(id.ordering.is_satisfied_by(&delta));
                return Ok(IdentityVerdict::refuted(delta));
            }
        }
        return Err(IdentityError::Internal(format!("no witness found for feasible side of {id}")));
    }
    Ok(IdentityVerdict::valid())
}
