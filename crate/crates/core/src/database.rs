//! Finite databases of ground facts.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::query::{fmt_value, Value};

/// A ground atom `p(c_1, ..., c_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub predicate: Arc<str>,
    pub args: Vec<Value>,
}

impl Fact {
    pub fn new(predicate: &str, args: Vec<Value>) -> Fact {
        Fact { predicate: Arc::from(predicate), args }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            fmt_value(a, f)?;
        }
        f.write_str(")")
    }
}

/// A set of facts, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Database {
    facts: BTreeSet<Fact>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, fact: Fact) -> bool {
        self.facts.insert(fact)
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    /// Membership test for `predicate(args)`.
    pub fn contains_atom(&self, predicate: &str, args: &[Value]) -> bool {
        self.facts.contains(&Fact { predicate: Arc::from(predicate), args: args.to_vec() })
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn is_subset(&self, other: &Database) -> bool {
        self.facts.is_subset(&other.facts)
    }

    pub fn union(&self, other: &Database) -> Database {
        Database { facts: self.facts.union(&other.facts).cloned().collect() }
    }

    pub fn intersection(&self, other: &Database) -> Database {
        Database { facts: self.facts.intersection(&other.facts).cloned().collect() }
    }

    /// Constants occurring in some fact.
    pub fn carrier(&self) -> BTreeSet<Value> {
        self.facts.iter().flat_map(|f| f.args.iter().cloned()).collect()
    }

    /// Facts for one predicate.
    pub fn facts_of<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a Fact> + 'a {
        self.facts.iter().filter(move |f| &*f.predicate == predicate)
    }
}

impl FromIterator<Fact> for Database {
    fn from_iter<I: IntoIterator<Item = Fact>>(iter: I) -> Self {
        Database { facts: iter.into_iter().collect() }
    }
}

impl<'a> IntoIterator for &'a Database {
    type Item = &'a Fact;
    type IntoIter = std::collections::btree_set::Iter<'a, Fact>;

    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}

impl fmt::Display for Database {
    /// One fact per line, each terminated by `.`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{fact}.")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{int, parse_database, ratio};

    #[test]
    fn prints_sorted_and_round_trips() {
        let db: Database = [Fact::new("p", vec![int(2)]), Fact::new("p", vec![ratio(3, 2)]), Fact::new("e", vec![int(1), int(0)])]
            .into_iter()
            .collect();
        let text = db.to_string();
        assert_eq!(text, "e(1, 0).\np(3/2).\np(2).\n");
        assert_eq!(parse_database(&text).unwrap(), db);
    }

    #[test]
    fn carrier_collects_constants() {
        let db = parse_database("e(1, 2). e(2, 5).").unwrap();
        assert_eq!(db.carrier().into_iter().collect::<Vec<_>>(), vec![int(1), int(2), int(5)]);
    }
}
