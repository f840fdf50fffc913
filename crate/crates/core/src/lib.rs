//! Decision procedures for equivalence of disjunctive aggregate queries with
//! negation, constants and comparisons.

pub mod aggregation;
pub mod database;
pub mod query;
pub mod orderings;
pub mod identity;
pub mod oracle;
pub mod engine;
pub mod quasilinear;
