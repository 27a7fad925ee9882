//! Boolean expressions over primitive symbols.

use std::fmt;
use std::str::FromStr;

use crate::atoms::{AtomCode, Decomposition, MAX_ENUMERATED_WIDTH};
use crate::capability::{Mode, Primitive};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// `P{id}`, 1-based.
    Prim(usize),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl std::ops::Not for Expr {
    type Output = Expr;

    fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }
}

impl Expr {
    /// Truth value on an atom code.
    pub fn evaluate(&self, code: AtomCode) -> Result<bool> {
        Ok(match self {
            Expr::Prim(id) => {
                if *id == 0 || *id > code.width() {
                    return Err(Error::UnknownPrimitive(*id));
                }
                code.has(id - 1)
            }
            Expr::Not(e) => !e.evaluate(code)?,
            Expr::And(v) => {
                let mut out = true;
                for e in v {
                    out &= e.evaluate(code)?;
                }
                out
            }
            Expr::Or(v) => {
                let mut out = false;
                for e in v {
                    out |= e.evaluate(code)?;
                }
                out
            }
        })
    }

    /// Largest primitive id mentioned.
    pub fn max_symbol(&self) -> usize {
        match self {
            Expr::Prim(id) => *id,
            Expr::Not(e) => e.max_symbol(),
            Expr::And(v) | Expr::Or(v) => v.iter().map(Expr::max_symbol).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, v: &[Expr], op: &str, empty: &str| match v {
            [] => f.write_str(empty),
            [e] => write!(f, "{e}"),
            _ => {
                f.write_str("(")?;
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " {op} ")?;
                    }
                    write!(f, "{e}")?;
                }
                f.write_str(")")
            }
        };
        match self {
            Expr::Prim(id) => write!(f, "P{id}"),
            Expr::Not(e) => write!(f, "~{e}"),
            Expr::And(v) => join(f, v, "∩", "Ω"),
            Expr::Or(v) => join(f, v, "∪", "∅"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Prim(usize),
    Not,
    And,
    Or,
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        let t = match c {
            c if c.is_whitespace() => continue,
            '~' | '!' | '¬' => Token::Not,
            '∩' | '&' => Token::And,
            '∪' | '|' => Token::Or,
            '(' => Token::Open,
            ')' => Token::Close,
            'P' | 'p' => {
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                let id = digits
                    .parse()
                    .map_err(|_| Error::Parse(format!("expected a primitive number after P in {s:?}")))?;
                Token::Prim(id)
            }
            c => return Err(Error::Parse(format!("unexpected {c:?} in {s:?}"))),
        };
        out.push(t);
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).copied()
    }

    fn or(&mut self) -> Result<Expr> {
        let mut e = self.and()?;
        while self.peek() == Some(Token::Or) {
            self.pos += 1;
            e = Expr::Or(vec![e, self.and()?]);
        }
        Ok(e)
    }

    fn and(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        while self.peek() == Some(Token::And) {
            self.pos += 1;
            e = Expr::And(vec![e, self.unary()?]);
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr> {
        let t = self.peek().ok_or_else(|| Error::Parse("unexpected end of expression".into()))?;
        self.pos += 1;
        match t {
            Token::Not => Ok(!self.unary()?),
            Token::Prim(id) => Ok(Expr::Prim(id)),
            Token::Open => {
                let e = self.or()?;
                if self.peek() != Some(Token::Close) {
                    return Err(Error::Parse("unbalanced parenthesis".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            t => Err(Error::Parse(format!("unexpected {t:?}"))),
        }
    }
}

impl FromStr for Expr {
    type Err = Error;

    /// Accepts `∪ ∩ ~` or ASCII `| & !`; `∩` binds tighter than `∪` and
    /// chains associate to the left.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { tokens: tokenize(s)?, pos: 0 };
        let e = p.or()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("trailing input in {s:?}")));
        }
        Ok(e)
    }
}

/// Code set two expressions are compared over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Every one of the 2ⁿ codes.
    Logical,
    /// Only codes of nonempty atoms of the decomposition.
    Conditional,
}

pub fn equivalent(a: &Expr, b: &Expr, d: &Decomposition, scope: Scope) -> Result<bool> {
    let n = d.n();
    for e in [a, b] {
        let m = e.max_symbol();
        if m > n {
            return Err(Error::UnknownPrimitive(m));
        }
    }
    match scope {
        Scope::Logical => {
            if n > MAX_ENUMERATED_WIDTH {
                return Err(Error::TooManyPrimitives(n, MAX_ENUMERATED_WIDTH));
            }
            for bits in 0..1u64 << n {
                let c = AtomCode::new(bits, n);
                if a.evaluate(c)? != b.evaluate(c)? {
                    return Ok(false);
                }
            }
        }
        Scope::Conditional => {
            for atom in d.atoms() {
                if a.evaluate(atom.code)? != b.evaluate(atom.code)? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Disjunction of one full conjunctive clause per target atom.
pub fn minimal_dnf(d: &Decomposition) -> Result<Expr> {
    if !d.is_classified() {
        return Err(Error::Unclassified);
    }
    Ok(Expr::Or(d.target_mask().into_iter().map(clause).collect()))
}

/// Conjunction selecting exactly `code`.
pub fn clause(code: AtomCode) -> Expr {
    Expr::And((0..code.width()).map(|i| if code.has(i) { Expr::Prim(i + 1) } else { !Expr::Prim(i + 1) }).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LintIssue {
    /// Some interior node has no leaf child.
    NotAntiBalanced,
    UnknownPrimitive(usize),
    /// The first action is not a positive AM primitive.
    FirstNotAdditive(usize),
    /// AM primitives must be united, SM primitives intersected as complements.
    WrongPolarity(usize),
    RawStockAfterFirst(usize),
}

impl fmt::Display for LintIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LintIssue::NotAntiBalanced => f.write_str("expression tree is not anti-balanced"),
            LintIssue::UnknownPrimitive(id) => write!(f, "unknown primitive P{id}"),
            LintIssue::FirstNotAdditive(id) => write!(f, "first action P{id} is not an AM deposition"),
            LintIssue::WrongPolarity(id) => write!(f, "P{id} is used against its mode"),
            LintIssue::RawStockAfterFirst(id) => write!(f, "raw stock P{id} appears after the first action"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Or,
    And,
}

fn leaf(e: &Expr) -> Option<(bool, usize)> {
    match e {
        Expr::Prim(id) => Some((true, *id)),
        Expr::Not(inner) => match **inner {
            Expr::Prim(id) => Some((false, id)),
            _ => None,
        },
        Expr::And(v) | Expr::Or(v) if v.len() == 1 => leaf(&v[0]),
        _ => None,
    }
}

/// Flattens an anti-balanced tree into (operation, positive?, id) steps.
fn linearize(e: &Expr) -> Option<Vec<(Option<Op>, bool, usize)>> {
    if let Some((pos, id)) = leaf(e) {
        return Some(vec![(None, pos, id)]);
    }
    let (op, v) = match e {
        Expr::And(v) => (Op::And, v),
        Expr::Or(v) => (Op::Or, v),
        _ => return None,
    };
    if v.len() == 1 {
        return linearize(&v[0]);
    }
    // n-ary nodes read as a left fold
    let (first, rest) = (&v[0], &v[1..]);
    let mut acc = if rest.len() == 1 && leaf(first).is_some() && leaf(&rest[0]).is_none() {
        // leaf on the left of a composite: the operation commutes
        let mut seq = linearize(&rest[0])?;
        let (pos, id) = leaf(first)?;
        seq.push((Some(op), pos, id));
        return Some(seq);
    } else {
        linearize(first)?
    };
    for r in rest {
        let (pos, id) = leaf(r)?;
        acc.push((Some(op), pos, id));
    }
    Some(acc)
}

/// Checks validity conditions C1 to C4 against the primitive modes.
pub fn lint(e: &Expr, primitives: &[Primitive]) -> Vec<LintIssue> {
    let Some(seq) = linearize(e) else {
        return vec![LintIssue::NotAntiBalanced];
    };
    let mut issues = Vec::new();
    for (i, &(op, pos, id)) in seq.iter().enumerate() {
        let Some(p) = id.checked_sub(1).and_then(|k| primitives.get(k)) else {
            issues.push(LintIssue::UnknownPrimitive(id));
            continue;
        };
        let ok = match (op, p.mode) {
            (None, Mode::Am) | (Some(Op::Or), Mode::Am) => pos,
            (Some(Op::And), Mode::Sm) => !pos,
            _ => false,
        };
        if i == 0 && !ok {
            issues.push(LintIssue::FirstNotAdditive(id));
        } else if !ok {
            issues.push(LintIssue::WrongPolarity(id));
        }
        if i > 0 && p.is_raw_stock {
            issues.push(LintIssue::RawStockAfterFirst(id));
        }
    }
    issues
}

/// Primitive sequence of a valid plan expression.
pub fn plan_from_expression(e: &Expr, primitives: &[Primitive]) -> Result<Vec<usize>> {
    let issues = lint(e, primitives);
    if let Some(first) = issues.first() {
        return Err(Error::Parse(format!("{e} is not a valid plan: {first}")));
    }
    Ok(linearize(e).expect("lint passed").into_iter().map(|(_, _, id)| id).collect())
}
