//! Operand expressions.
//!
//! A cell is written `L1:L2:term'offset`. Terms are decimal integers,
//! symbols, the relative forms `?` and `n?`, the built-ins `w` and `k`, or a
//! parenthesized `+`/`-` chain of those. The offset uses the same grammar.

use std::collections::HashMap;
use std::fmt;

use crate::word::WordSpec;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Int(i64),
    Sym(String),
    /// `n?`: this cell's bit address plus `n` words.
    Rel(i64),
    /// Highest bit index, `word_size - 1`.
    W,
    /// `log2(word_size)`.
    K,
    /// Signed sum; `true` marks a subtracted element.
    Group(Vec<(bool, Term)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordExpr {
    pub labels: Vec<String>,
    pub term: Term,
    pub offset: Option<Term>,
}

impl WordExpr {
    pub fn new(term: Term) -> Self {
        WordExpr {
            labels: Vec::new(),
            term,
            offset: None,
        }
    }

    pub fn next_cell() -> Self {
        WordExpr::new(Term::Rel(1))
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        let mut out = Vec::new();
        self.term.collect_symbols(&mut out);
        if let Some(off) = &self.offset {
            off.collect_symbols(&mut out);
        }
        out.into_iter()
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Names with a built-in meaning inside expressions.
pub fn is_builtin(s: &str) -> bool {
    s == "w" || s == "k"
}

impl Term {
    pub fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Sym(s) => out.push(s),
            Term::Group(items) => items.iter().for_each(|(_, t)| t.collect_symbols(out)),
            Term::Int(_) | Term::Rel(_) | Term::W | Term::K => {}
        }
    }

    /// Rewrites every symbol through `f`.
    pub fn map_symbols<E>(&self, f: &mut impl FnMut(&str) -> Result<Term, E>) -> Result<Term, E> {
        Ok(match self {
            Term::Sym(s) => f(s)?,
            Term::Group(items) => Term::Group(
                items
                    .iter()
                    .map(|(neg, t)| Ok((*neg, t.map_symbols(f)?)))
                    .collect::<Result<_, E>>()?,
            ),
            other => other.clone(),
        })
    }

    /// Value before reduction to the word size. `position` is the bit address
    /// of the cell holding the expression.
    pub fn eval(
        &self,
        position: u64,
        symbols: &HashMap<String, u64>,
        spec: WordSpec,
    ) -> Result<i128, String> {
        Ok(match self {
            Term::Int(n) => i128::from(*n),
            Term::Sym(s) => i128::from(*symbols.get(s).ok_or_else(|| s.clone())?),
            Term::Rel(n) => i128::from(position) + i128::from(*n) * i128::from(spec.word_size()),
            Term::W => i128::from(spec.w()),
            Term::K => i128::from(spec.k()),
            Term::Group(items) => {
                let mut sum = 0i128;
                for (neg, t) in items {
                    let v = t.eval(position, symbols, spec)?;
                    sum = if *neg { sum - v } else { sum + v };
                }
                sum
            }
        })
    }

    pub fn parse(text: &str) -> Result<Term, String> {
        let mut p = TermParser { s: text.as_bytes(), pos: 0, src: text };
        let t = p.term()?;
        if p.pos != p.s.len() {
            return Err(format!("unexpected `{}` in `{text}`", &text[p.pos..]));
        }
        Ok(t)
    }

    /// A single-term operand whose value is a plain number rather than an
    /// address, other than the I/O address -1.
    pub fn is_constant_like(&self) -> bool {
        match self {
            Term::Int(n) => *n != -1,
            Term::Group(_) | Term::W | Term::K => true,
            Term::Sym(_) | Term::Rel(_) => false,
        }
    }
}

/// Parses `term` or `term'offset`, without labels.
pub fn parse_operand(text: &str) -> Result<(Term, Option<Term>), String> {
    let mut depth = 0i32;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '\'' if depth == 0 => {
                let term = Term::parse(&text[..i])?;
                let rest = &text[i + 1..];
                if rest.contains('\'') {
                    return Err(format!("more than one bit offset in `{text}`"));
                }
                return Ok((term, Some(Term::parse(rest)?)));
            }
            _ => {}
        }
    }
    Ok((Term::parse(text)?, None))
}

struct TermParser<'a> {
    s: &'a [u8],
    pos: usize,
    src: &'a str,
}

impl TermParser<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> String {
        if self.src.is_empty() {
            format!("expected {what}, found empty operand")
        } else {
            format!("expected {what} in `{}`", self.src)
        }
    }

    fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let mut items = Vec::new();
                let mut first = true;
                loop {
                    let neg = match self.peek() {
                        Some(b'+') => {
                            self.pos += 1;
                            false
                        }
                        Some(b'-') => {
                            self.pos += 1;
                            true
                        }
                        _ if first => false,
                        Some(b')') => break,
                        _ => return Err(self.err("`+`, `-` or `)`")),
                    };
                    first = false;
                    items.push((neg, self.term()?));
                }
                self.pos += 1;
                if items.is_empty() {
                    return Err(self.err("an expression inside `()`"));
                }
                Ok(Term::Group(items))
            }
            Some(b'?') => {
                self.pos += 1;
                Ok(Term::Rel(1))
            }
            Some(c) if c.is_ascii_digit() || c == b'-' || c == b'+' => {
                let start = self.pos;
                self.pos += 1;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits = &self.src[start..self.pos];
                let n: i64 = digits.parse().map_err(|_| self.err("a number"))?;
                if self.peek() == Some(b'?') {
                    self.pos += 1;
                    Ok(Term::Rel(n))
                } else {
                    Ok(Term::Int(n))
                }
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.pos += 1;
                }
                Ok(match &self.src[start..self.pos] {
                    "w" => Term::W,
                    "k" => Term::K,
                    name => Term::Sym(name.to_string()),
                })
            }
            _ => Err(self.err("a term")),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Sym(s) => f.write_str(s),
            Term::Rel(1) => f.write_str("?"),
            Term::Rel(n) => write!(f, "{n}?"),
            Term::W => f.write_str("w"),
            Term::K => f.write_str("k"),
            Term::Group(items) => {
                f.write_str("(")?;
                for (i, (neg, t)) in items.iter().enumerate() {
                    if *neg {
                        f.write_str("-")?;
                    } else if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.labels {
            write!(f, "{l}:")?;
        }
        write!(f, "{}", self.term)?;
        if let Some(off) = &self.offset {
            write!(f, "'{off}")?;
        }
        Ok(())
    }
}
