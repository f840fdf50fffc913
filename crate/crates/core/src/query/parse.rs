//! Lexer and recursive-descent parser for queries, databases and orderings.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{
    value_to_string, AggregateTerm, Atom, CmpOp, Comparison, Condition, Domain, Query, QueryError,
    Term,
};
use crate::aggregation::AggFn;
use crate::database::{Database, Fact};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("predicate {predicate} used with arity {got}, but earlier with arity {expected}")]
    ArityMismatch { predicate: String, expected: usize, got: usize },
    #[error("unknown aggregation function `{0}`")]
    UnknownFunction(String),
    #[error("{0}")]
    Invalid(QueryError),
}

/// Parse failure with the 1-based position of the offending token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.kind)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Number(BigInt),
    Slash,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Pipe,
    Bang,
    Op(CmpOp),
    Implies,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::Number(n) => write!(f, "`{n}`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Pipe => f.write_str("`|`"),
            Tok::Bang => f.write_str("`!`"),
            Tok::Op(op) => write!(f, "`{op}`"),
            Tok::Implies => f.write_str("`:-`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, msg: String| ParseError { line, column, kind: ParseErrorKind::Syntax(msg) };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned { tok, line: start_line, column: start_col });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' | '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '|' => push(Tok::Pipe, 1, &mut i, &mut col),
            '/' => push(Tok::Slash, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::Op(CmpOp::Ne), 2, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'=') => push(Tok::Op(CmpOp::Le), 2, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'>') => push(Tok::Op(CmpOp::Ne), 2, &mut i, &mut col),
            '<' => push(Tok::Op(CmpOp::Lt), 1, &mut i, &mut col),
            '>' if chars.get(i + 1) == Some(&'=') => push(Tok::Op(CmpOp::Ge), 2, &mut i, &mut col),
            '>' => push(Tok::Op(CmpOp::Gt), 1, &mut i, &mut col),
            '=' => push(Tok::Op(CmpOp::Eq), 1, &mut i, &mut col),
            ':' if chars.get(i + 1) == Some(&'-') => push(Tok::Implies, 2, &mut i, &mut col),
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let n: BigInt = s.parse().map_err(|_| err(line, col, format!("bad number `{s}`")))?;
                push(Tok::Number(n), j - i, &mut i, &mut col);
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let tok = if c.is_uppercase() || c == '_' { Tok::Var(s) } else { Tok::Ident(s) };
                push(tok, j - i, &mut i, &mut col);
            }
            other => return Err(err(line, col, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Predicate arities fixed by their first occurrence.
#[derive(Debug, Clone, Default)]
pub struct ArityRegistry {
    arities: HashMap<Arc<str>, usize>,
}

impl ArityRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, predicate: &str) -> Option<usize> {
        self.arities.get(predicate).copied()
    }

    /// Registers `predicate` with `arity`, or checks it against the known arity.
    pub fn check(&mut self, predicate: &str, arity: usize) -> Result<(), ParseErrorKind> {
        match self.arities.get(predicate) {
            Some(&expected) if expected != arity => Err(ParseErrorKind::ArityMismatch {
                predicate: predicate.to_string(),
                expected,
                got: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(Arc::from(predicate), arity);
                Ok(())
            }
        }
    }
}

/// Parsing session: the arity registry is shared by everything parsed with it.
#[derive(Debug, Clone)]
pub struct Parser {
    pub domain: Domain,
    pub registry: ArityRegistry,
}

struct Cursor<'a> {
    toks: &'a [Spanned],
    pos: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> (usize, usize) {
        let s = &self.toks[self.pos];
        (s.line, s.column)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        let (line, column) = self.here();
        ParseError { line, column, kind }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error(ParseErrorKind::Syntax(format!("expected {expected}, found {}", self.peek())))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }
}

impl Parser {
    pub fn new(domain: Domain) -> Self {
        Parser { domain, registry: ArityRegistry::new() }
    }

    /// Parses one or more query declarations.
    pub fn queries(&mut self, text: &str) -> Result<Vec<Query>, ParseError> {
        let toks = lex(text)?;
        let mut cur = Cursor { toks: &toks, pos: 0 };
        let mut out = Vec::new();
        while *cur.peek() != Tok::Eof {
            out.push(self.query(&mut cur)?);
            cur.eat(&Tok::Dot);
        }
        if out.is_empty() {
            return Err(cur.unexpected("a query declaration"));
        }
        Ok(out)
    }

    /// Parses exactly one query declaration.
    pub fn query_text(&mut self, text: &str) -> Result<Query, ParseError> {
        let toks = lex(text)?;
        let mut cur = Cursor { toks: &toks, pos: 0 };
        let q = self.query(&mut cur)?;
        cur.eat(&Tok::Dot);
        if *cur.peek() != Tok::Eof {
            return Err(cur.unexpected("end of input"));
        }
        Ok(q)
    }

    /// Parses a database: ground atoms separated by `.` or newlines.
    pub fn database(&mut self, text: &str) -> Result<Database, ParseError> {
        let toks = lex(text)?;
        let mut cur = Cursor { toks: &toks, pos: 0 };
        let mut db = Database::new();
        while *cur.peek() != Tok::Eof {
            let (line, column) = cur.here();
            let atom = self.atom(&mut cur, false)?;
            let mut args = Vec::with_capacity(atom.args.len());
            for t in atom.args {
                match t {
                    Term::Const(v) => args.push(v),
                    Term::Var(v) => {
                        return Err(ParseError {
                            line,
                            column,
                            kind: ParseErrorKind::Syntax(format!("database facts must be ground, found variable {v}")),
                        })
                    }
                }
            }
            db.insert(Fact { predicate: atom.predicate, args });
            cur.eat(&Tok::Dot);
            cur.eat(&Tok::Comma);
        }
        Ok(db)
    }

    fn query(&mut self, cur: &mut Cursor<'_>) -> Result<Query, ParseError> {
        let (line, column) = cur.here();
        let name = match cur.bump() {
            Tok::Ident(s) => s,
            _ => {
                cur.pos = cur.pos.saturating_sub(1);
                return Err(cur.unexpected("query name"));
            }
        };
        cur.expect(Tok::LParen, "`(`")?;
        let mut grouping = Vec::new();
        if !matches!(cur.peek(), Tok::Semi | Tok::RParen) {
            grouping = self.term_list(cur)?;
        }
        let aggregate = if cur.eat(&Tok::Semi) {
            Some(self.aggregate(cur)?)
        } else {
            None
        };
        cur.expect(Tok::RParen, "`)`")?;
        cur.expect(Tok::Implies, "`:-`")?;
        let mut disjuncts = vec![self.disjunct(cur)?];
        while cur.eat(&Tok::Pipe) {
            disjuncts.push(self.disjunct(cur)?);
        }
        let q = Query { name: Arc::from(name.as_str()), grouping, aggregate, disjuncts, domain: self.domain };
        q.validate().map_err(|e| ParseError { line, column, kind: ParseErrorKind::Invalid(e) })?;
        Ok(q)
    }

    fn aggregate(&mut self, cur: &mut Cursor<'_>) -> Result<AggregateTerm, ParseError> {
        let name = match cur.peek().clone() {
            Tok::Ident(s) => s,
            _ => return Err(cur.unexpected("aggregation function")),
        };
        let function: AggFn =
            name.parse().map_err(|_| cur.error(ParseErrorKind::UnknownFunction(name.clone())))?;
        cur.bump();
        cur.expect(Tok::LParen, "`(`")?;
        let args = if *cur.peek() == Tok::RParen { Vec::new() } else { self.term_list(cur)? };
        cur.expect(Tok::RParen, "`)`")?;
        Ok(AggregateTerm { function, args })
    }

    fn disjunct(&mut self, cur: &mut Cursor<'_>) -> Result<Condition, ParseError> {
        let mut cond = Condition::default();
        loop {
            self.literal(cur, &mut cond)?;
            if !cur.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(cond)
    }

    fn literal(&mut self, cur: &mut Cursor<'_>, cond: &mut Condition) -> Result<(), ParseError> {
        match cur.peek() {
            Tok::Bang => {
                cur.bump();
                cond.atoms.push(self.atom(cur, true)?);
            }
            Tok::Ident(s) if s == "not" && matches!(cur.peek_at(1), Tok::Ident(_)) => {
                cur.bump();
                cond.atoms.push(self.atom(cur, true)?);
            }
            Tok::Ident(_) => cond.atoms.push(self.atom(cur, false)?),
            Tok::Var(_) | Tok::Number(_) => {
                let lhs = self.term(cur)?;
                let op = match cur.bump() {
                    Tok::Op(op) => op,
                    _ => {
                        cur.pos -= 1;
                        return Err(cur.unexpected("comparison operator"));
                    }
                };
                let rhs = self.term(cur)?;
                cond.comparisons.push(Comparison::new(lhs, op, rhs));
            }
            _ => return Err(cur.unexpected("literal")),
        }
        Ok(())
    }

    fn atom(&mut self, cur: &mut Cursor<'_>, negated: bool) -> Result<Atom, ParseError> {
        let (line, column) = cur.here();
        let predicate = match cur.peek().clone() {
            Tok::Ident(s) => s,
            _ => return Err(cur.unexpected("predicate name")),
        };
        cur.bump();
        cur.expect(Tok::LParen, "`(`")?;
        let args = if *cur.peek() == Tok::RParen { Vec::new() } else { self.term_list(cur)? };
        cur.expect(Tok::RParen, "`)`")?;
        self.registry
            .check(&predicate, args.len())
            .map_err(|kind| ParseError { line, column, kind })?;
        Ok(Atom { predicate: Arc::from(predicate.as_str()), args, negated })
    }

    fn term_list(&mut self, cur: &mut Cursor<'_>) -> Result<Vec<Term>, ParseError> {
        let mut out = vec![self.term(cur)?];
        while cur.eat(&Tok::Comma) {
            out.push(self.term(cur)?);
        }
        Ok(out)
    }

    fn term(&mut self, cur: &mut Cursor<'_>) -> Result<Term, ParseError> {
        match cur.peek().clone() {
            Tok::Var(v) => {
                cur.bump();
                Ok(Term::var(&v))
            }
            Tok::Number(n) => {
                let (line, column) = cur.here();
                cur.bump();
                let value = if *cur.peek() == Tok::Slash {
                    cur.bump();
                    let d = match cur.bump() {
                        Tok::Number(d) => d,
                        _ => {
                            cur.pos -= 1;
                            return Err(cur.unexpected("denominator"));
                        }
                    };
                    if d.is_zero() {
                        return Err(ParseError {
                            line,
                            column,
                            kind: ParseErrorKind::Syntax("zero denominator".into()),
                        });
                    }
                    BigRational::new(n, d)
                } else {
                    BigRational::from_integer(n)
                };
                if !self.domain.contains(&value) {
                    return Err(ParseError {
                        line,
                        column,
                        kind: ParseErrorKind::Invalid(QueryError::NonIntegerConstant(value_to_string(&value))),
                    });
                }
                Ok(Term::Const(value))
            }
            _ => Err(cur.unexpected("term")),
        }
    }

    /// Parses a chain such as `0 < X = Z < Y` into its classes, lowest first.
    pub fn ordering(&mut self, text: &str) -> Result<Vec<Vec<Term>>, ParseError> {
        let toks = lex(text)?;
        let mut cur = Cursor { toks: &toks, pos: 0 };
        let mut classes = vec![vec![self.term(&mut cur)?]];
        loop {
            match cur.peek() {
                Tok::Op(CmpOp::Lt) => {
                    cur.bump();
                    classes.push(vec![self.term(&mut cur)?]);
                }
                Tok::Op(CmpOp::Eq) => {
                    cur.bump();
                    let t = self.term(&mut cur)?;
                    classes.last_mut().expect("nonempty").push(t);
                }
                Tok::Eof => break,
                _ => return Err(cur.unexpected("`<`, `=` or end of input")),
            }
        }
        Ok(classes)
    }

    /// Parses a bag `{t, ...}` of single terms or empty tuples `()`.
    pub fn bag(&mut self, text: &str) -> Result<Vec<Vec<Term>>, ParseError> {
        let toks = lex(text)?;
        let mut cur = Cursor { toks: &toks, pos: 0 };
        cur.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        if !cur.eat(&Tok::RBrace) {
            loop {
                if cur.eat(&Tok::LParen) {
                    let inner = if *cur.peek() == Tok::RParen { Vec::new() } else { self.term_list(&mut cur)? };
                    cur.expect(Tok::RParen, "`)`")?;
                    out.push(inner);
                } else {
                    out.push(vec![self.term(&mut cur)?]);
                }
                if cur.eat(&Tok::RBrace) {
                    break;
                }
                cur.expect(Tok::Comma, "`,` or `}`")?;
            }
        }
        if *cur.peek() != Tok::Eof {
            return Err(cur.unexpected("end of input"));
        }
        Ok(out)
    }
}

/// Parses a single query with a fresh arity registry.
pub fn parse_query(text: &str, domain: Domain) -> Result<Query, ParseError> {
    Parser::new(domain).query_text(text)
}

/// Parses every query declaration in `text` with one shared registry.
pub fn parse_queries(text: &str, domain: Domain) -> Result<Vec<Query>, ParseError> {
    Parser::new(domain).queries(text)
}

/// Parses a database with a fresh arity registry.
pub fn parse_database(text: &str) -> Result<Database, ParseError> {
    Parser::new(Domain::Rationals).database(text)
}

/// Parses an ordering chain such as `X < 3 = Y`.
pub fn parse_ordering(text: &str, domain: Domain) -> Result<Vec<Vec<Term>>, ParseError> {
    Parser::new(domain).ordering(text)
}

/// Parses a single term.
pub fn parse_term(text: &str, domain: Domain) -> Result<Term, ParseError> {
    let toks = lex(text)?;
    let mut cur = Cursor { toks: &toks, pos: 0 };
    let t = Parser::new(domain).term(&mut cur)?;
    if *cur.peek() != Tok::Eof {
        return Err(cur.unexpected("end of input"));
    }
    Ok(t)
}
