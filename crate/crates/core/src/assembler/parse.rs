use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::expr::{is_builtin, is_identifier, parse_operand, Term, WordExpr};
use super::include::IncludeResolver;
use super::AsmError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceLoc {
    pub file: Arc<str>,
    pub line: usize,
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.line)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineKind {
    Words(Vec<WordExpr>),
    Invoke {
        labels: Vec<String>,
        name: String,
        args: Vec<Term>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceLine {
    pub kind: LineKind,
    /// Line began with `:`; it is assembled only if its first label is
    /// otherwise unresolved.
    pub conditional: bool,
    pub loc: SourceLoc,
}

impl SourceLine {
    pub fn labels(&self) -> &[String] {
        match &self.kind {
            LineKind::Words(exprs) => exprs.first().map_or(&[], |e| &e.labels[..]),
            LineKind::Invoke { labels, .. } => labels,
        }
    }

    pub fn trigger(&self) -> Option<&str> {
        if self.conditional {
            self.labels().first().map(String::as_str)
        } else {
            None
        }
    }

    /// Every label the line defines, on any cell.
    pub fn defined_labels(&self) -> Vec<&str> {
        match &self.kind {
            LineKind::Words(exprs) => exprs
                .iter()
                .flat_map(|e| e.labels.iter().map(String::as_str))
                .collect(),
            LineKind::Invoke { labels, .. } => labels.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroDef {
    pub name: String,
    pub formals: Vec<String>,
    /// Names resolved in the global scope rather than per expansion.
    pub externals: Vec<String>,
    pub body: Vec<SourceLine>,
    pub loc: SourceLoc,
}

impl MacroDef {
    /// Labels defined inside the body; renamed on every expansion.
    pub fn locals(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.body
            .iter()
            .flat_map(SourceLine::defined_labels)
            .filter(|l| seen.insert(*l))
            .collect()
    }

    /// Names of macros invoked directly by the body.
    pub fn invoked(&self) -> impl Iterator<Item = &str> {
        self.body.iter().filter_map(|l| match &l.kind {
            LineKind::Invoke { name, .. } => Some(name.as_str()),
            LineKind::Words(_) => None,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedProgram {
    pub lines: Vec<SourceLine>,
    pub macros: BTreeMap<String, MacroDef>,
}

const RESERVED: [&str; 3] = ["def", "end", "include"];

struct Parser<'r> {
    resolver: &'r IncludeResolver,
    included: HashSet<String>,
    out: ParsedProgram,
}

/// Parses `text` and, recursively, every file it includes.
pub fn parse(
    text: &str,
    file: &str,
    dir: Option<&Path>,
    resolver: &IncludeResolver,
) -> Result<ParsedProgram, AsmError> {
    let mut p = Parser {
        resolver,
        included: HashSet::new(),
        out: ParsedProgram::default(),
    };
    p.parse_file(text, Arc::from(file), dir.map(Path::to_path_buf))?;
    Ok(p.out)
}

impl Parser<'_> {
    fn parse_file(&mut self, text: &str, file: Arc<str>, dir: Option<PathBuf>) -> Result<(), AsmError> {
        let mut open_def: Option<MacroDef> = None;
        for (i, raw) in text.lines().enumerate() {
            let loc = SourceLoc {
                file: file.clone(),
                line: i + 1,
            };
            let code = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = code.split_whitespace().collect();
            let Some(&first) = tokens.first() else {
                continue;
            };
            match first {
                ".def" => {
                    if open_def.is_some() {
                        return Err(syntax(&loc, "nested .def"));
                    }
                    open_def = Some(parse_def_header(&tokens[1..], &loc)?);
                }
                ".end" => {
                    if tokens.len() > 1 {
                        return Err(syntax(&loc, "unexpected tokens after .end"));
                    }
                    let def = open_def
                        .take()
                        .ok_or_else(|| syntax(&loc, ".end without .def"))?;
                    self.add_macro(def)?;
                }
                ".include" => {
                    if open_def.is_some() {
                        return Err(syntax(&loc, ".include inside a macro definition"));
                    }
                    let [_, name] = tokens[..] else {
                        return Err(syntax(&loc, ".include takes exactly one name"));
                    };
                    self.include(name, dir.as_deref(), &loc)?;
                }
                _ => {
                    let line = parse_line(&tokens, loc)?;
                    match &mut open_def {
                        Some(def) => {
                            if line.conditional {
                                return Err(syntax(&line.loc, "conditional line inside a macro definition"));
                            }
                            def.body.push(line);
                        }
                        None => self.out.lines.push(line),
                    }
                }
            }
        }
        match open_def {
            Some(def) => Err(AsmError::UnterminatedDef {
                name: def.name,
                loc: def.loc,
            }),
            None => Ok(()),
        }
    }

    fn add_macro(&mut self, def: MacroDef) -> Result<(), AsmError> {
        if let Some(prev) = self.out.macros.get(&def.name) {
            return Err(AsmError::DuplicateMacro {
                name: def.name,
                first: prev.loc.clone(),
                second: def.loc,
            });
        }
        self.out.macros.insert(def.name.clone(), def);
        Ok(())
    }

    fn include(&mut self, name: &str, dir: Option<&Path>, loc: &SourceLoc) -> Result<(), AsmError> {
        let found = self
            .resolver
            .resolve(name, dir)
            .map_err(|searched| AsmError::IncludeNotFound {
                name: name.to_string(),
                loc: loc.clone(),
                searched,
            })?;
        if !self.included.insert(found.key.clone()) {
            return Ok(());
        }
        let text = found.load().map_err(|source| AsmError::Io {
            path: found.display.clone(),
            source,
        })?;
        self.parse_file(&text, Arc::from(found.display.as_str()), found.dir.clone())
    }
}

fn syntax(loc: &SourceLoc, msg: impl Into<String>) -> AsmError {
    AsmError::Syntax {
        loc: loc.clone(),
        msg: msg.into(),
    }
}

fn parse_def_header(tokens: &[&str], loc: &SourceLoc) -> Result<MacroDef, AsmError> {
    let (&name, rest) = tokens
        .split_first()
        .ok_or_else(|| syntax(loc, ".def needs a macro name"))?;
    check_name(name, loc, "macro name")?;
    if RESERVED.contains(&name) {
        return Err(syntax(loc, format!("`{name}` is a reserved directive name")));
    }
    let (formals, externals) = match rest.iter().position(|&t| t == ":") {
        Some(i) => (&rest[..i], &rest[i + 1..]),
        None => (rest, &[][..]),
    };
    let mut seen = HashSet::new();
    for &n in formals.iter().chain(externals) {
        check_name(n, loc, "parameter")?;
        if !seen.insert(n) {
            return Err(syntax(loc, format!("`{n}` listed twice in .def {name}")));
        }
    }
    Ok(MacroDef {
        name: name.to_string(),
        formals: formals.iter().map(|s| s.to_string()).collect(),
        externals: externals.iter().map(|s| s.to_string()).collect(),
        body: Vec::new(),
        loc: loc.clone(),
    })
}

fn check_name(name: &str, loc: &SourceLoc, what: &str) -> Result<(), AsmError> {
    if !is_identifier(name) || is_builtin(name) {
        return Err(syntax(loc, format!("invalid {what} `{name}`")));
    }
    Ok(())
}

/// Splits leading `name:` prefixes off a token.
fn peel_labels<'t>(mut token: &'t str, labels: &mut Vec<String>, loc: &SourceLoc) -> Result<&'t str, AsmError> {
    while let Some(i) = token.find(':') {
        let name = &token[..i];
        if !is_identifier(name) || is_builtin(name) {
            return Err(syntax(loc, format!("invalid label `{name}`")));
        }
        labels.push(name.to_string());
        token = &token[i + 1..];
    }
    Ok(token)
}

/// Classifies one non-directive line.
pub fn parse_line(tokens: &[&str], loc: SourceLoc) -> Result<SourceLine, AsmError> {
    let mut tokens = tokens.to_vec();
    let conditional = tokens.first().is_some_and(|t| t.starts_with(':'));
    if conditional {
        let rest = &tokens[0][1..];
        if rest.is_empty() {
            tokens.remove(0);
        } else {
            tokens[0] = rest;
        }
    }

    let mut exprs = Vec::new();
    let mut pending = Vec::new();
    let mut iter = tokens.iter().enumerate();
    while let Some((i, &tok)) = iter.next() {
        let rest = peel_labels(tok, &mut pending, &loc)?;
        if rest.is_empty() {
            continue;
        }
        if let Some(name) = rest.strip_prefix('.') {
            if !exprs.is_empty() {
                return Err(syntax(&loc, format!("macro call `.{name}` must start the line")));
            }
            check_name(name, &loc, "macro name")?;
            if RESERVED.contains(&name) {
                return Err(syntax(&loc, format!("directive .{name} must start the line")));
            }
            let args = tokens[i + 1..]
                .iter()
                .map(|a| parse_actual(a, &loc))
                .collect::<Result<_, _>>()?;
            let line = SourceLine {
                kind: LineKind::Invoke {
                    labels: std::mem::take(&mut pending),
                    name: name.to_string(),
                    args,
                },
                conditional,
                loc,
            };
            return finish_conditional(line);
        }
        let (term, offset) = parse_operand(rest).map_err(|m| syntax(&loc, m))?;
        exprs.push(WordExpr {
            labels: std::mem::take(&mut pending),
            term,
            offset,
        });
    }
    if !pending.is_empty() {
        return Err(syntax(&loc, format!("label `{}` is not followed by a cell", pending[0])));
    }
    if exprs.is_empty() {
        return Err(syntax(&loc, "a lone `:` is not a line"));
    }
    finish_conditional(SourceLine {
        kind: LineKind::Words(exprs),
        conditional,
        loc,
    })
}

fn finish_conditional(line: SourceLine) -> Result<SourceLine, AsmError> {
    if line.conditional && line.labels().is_empty() {
        return Err(syntax(&line.loc, "a conditional line needs a label on its first cell"));
    }
    Ok(line)
}

/// Macro arguments are single terms; `X'3` is folded to `(X+3)`.
fn parse_actual(token: &str, loc: &SourceLoc) -> Result<Term, AsmError> {
    if token.contains(':') {
        return Err(syntax(loc, format!("macro argument `{token}` cannot carry a label")));
    }
    let (term, offset) = parse_operand(token).map_err(|m| syntax(loc, m))?;
    Ok(match offset {
        None => term,
        Some(off) => Term::Group(vec![(false, term), (false, off)]),
    })
}
