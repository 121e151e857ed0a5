//! Assembled programs and their on-disk form.
//!
//! An object file is the header line `bbj1 <word_size>` followed by
//! whitespace-separated unsigned decimal words. The optional symbol sidecar
//! holds one `name address` pair per line, sorted by name.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::word::WordSpec;

pub const OBJECT_MAGIC: &str = "bbj1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectProgram {
    pub spec: WordSpec,
    pub words: Vec<u64>,
    /// Global labels and their bit addresses.
    pub symbols: BTreeMap<String, u64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ObjectError {
    #[error("missing or malformed `{OBJECT_MAGIC} <word_size>` header")]
    BadHeader,
    #[error(transparent)]
    WordSize(#[from] crate::word::InvalidWordSize),
    #[error("word {index}: `{token}` is not a {word_size}-bit unsigned value")]
    BadWord {
        index: usize,
        token: String,
        word_size: u32,
    },
    #[error("symbol file line {line}: expected `name address`")]
    BadSymbolLine { line: usize },
}

impl ObjectProgram {
    pub fn new(spec: WordSpec, words: Vec<u64>) -> Self {
        ObjectProgram {
            spec,
            words,
            symbols: BTreeMap::new(),
        }
    }

    pub fn symbol(&self, name: &str) -> Option<u64> {
        self.symbols.get(name).copied()
    }

    /// Word stored at a cell-aligned symbol.
    pub fn value_of(&self, name: &str) -> Option<u64> {
        let addr = self.symbol(name)?;
        let idx = addr / u64::from(self.spec.word_size());
        self.words.get(idx as usize).copied()
    }

    pub fn instruction_count(&self) -> usize {
        self.words.len() / 3
    }

    pub fn to_object_text(&self) -> String {
        let mut out = format!("{OBJECT_MAGIC} {}\n", self.spec.word_size());
        for row in self.words.chunks(3) {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn to_symbol_text(&self) -> String {
        let mut out = String::new();
        for (name, addr) in &self.symbols {
            let _ = writeln!(out, "{name} {addr}");
        }
        out
    }

    /// Parses object text; symbols are left empty.
    pub fn parse_object(text: &str) -> Result<Self, ObjectError> {
        let mut tokens = text.split_whitespace();
        if tokens.next() != Some(OBJECT_MAGIC) {
            return Err(ObjectError::BadHeader);
        }
        let ws: u32 = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(ObjectError::BadHeader)?;
        let spec = WordSpec::new(ws)?;
        let words = tokens
            .enumerate()
            .map(|(index, token)| {
                token
                    .parse::<u64>()
                    .ok()
                    .filter(|&v| spec.contains(v))
                    .ok_or_else(|| ObjectError::BadWord {
                        index,
                        token: token.to_string(),
                        word_size: ws,
                    })
            })
            .collect::<Result<_, _>>()?;
        Ok(ObjectProgram::new(spec, words))
    }

    pub fn parse_symbols(text: &str) -> Result<BTreeMap<String, u64>, ObjectError> {
        let mut symbols = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next().and_then(|a| a.parse().ok()), parts.next()) {
                (Some(name), Some(addr), None) => {
                    symbols.insert(name.to_string(), addr);
                }
                _ => return Err(ObjectError::BadSymbolLine { line: i + 1 }),
            }
        }
        Ok(symbols)
    }

    /// True when `text` starts with the object header token.
    pub fn looks_like_object(text: &str) -> bool {
        text.split_whitespace().next() == Some(OBJECT_MAGIC)
    }
}
