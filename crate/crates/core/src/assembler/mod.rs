//! Macro assembler.
//!
//! Source goes through four stages: [`parse`] (lines, `.def` blocks and
//! `.include`), [`expand`] (macro substitution with per-expansion label
//! renaming), [`pad_implicit_c`] (two-cell lines jump to the next cell) and
//! [`resolve_with_conditionals`] (conditional inclusion, layout and
//! evaluation).

mod expand;
mod expr;
mod include;
mod parse;
mod resolve;

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::machine::RunLimits;
use crate::object::ObjectProgram;
use crate::word::WordSpec;

pub use expand::{duplicate_labels, expand, is_local, pad_implicit_c, FlatLine, LOCAL_SEP};
pub use expr::{parse_operand, Term, WordExpr};
pub use include::{IncludeResolver, BUILTIN_LIB, INCLUDE_ENV};
pub use parse::{parse, parse_line, LineKind, MacroDef, ParsedProgram, SourceLine, SourceLoc};
pub use resolve::{activate, eval_expr, layout, resolve_with_conditionals, unresolved, Layout, Resolved};

#[derive(Debug, Error)]
pub enum AsmError {
    #[error("{loc}: {msg}")]
    Syntax { loc: SourceLoc, msg: String },
    #[error("{loc}: .def {name} has no matching .end")]
    UnterminatedDef { name: String, loc: SourceLoc },
    #[error("{loc}: macro `{name}` already defined at {first}", loc = .second)]
    DuplicateMacro {
        name: String,
        first: SourceLoc,
        second: SourceLoc,
    },
    #[error("{loc}: cannot find include `{name}`; searched: {}", fmt_paths(.searched))]
    IncludeNotFound {
        name: String,
        loc: SourceLoc,
        searched: Vec<PathBuf>,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{loc}: unknown macro `.{name}`")]
    UnknownMacro { name: String, loc: SourceLoc },
    #[error("{loc}: macro `.{name}` takes {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
        loc: SourceLoc,
    },
    #[error("recursive macro expansion: {}", .0.join(" -> "))]
    Recursion(Vec<String>),
    #[error("{loc}: `{name}` in macro `{macro_name}` is not a parameter, local label or declared external")]
    UnknownName {
        name: String,
        macro_name: String,
        loc: SourceLoc,
    },
    #[error("duplicate label `{name}`: defined at {first} and again at {second}")]
    DuplicateLabel {
        name: String,
        first: SourceLoc,
        second: SourceLoc,
    },
    #[error("unresolved symbols: {}", fmt_unresolved(.0))]
    Unresolved(Vec<(String, SourceLoc)>),
    #[error("program needs {bits} bits of memory, limit is {limit}")]
    TooLarge { bits: u128, limit: u64 },
}

fn fmt_paths(paths: &[PathBuf]) -> String {
    if paths.is_empty() {
        return "(no directories)".into();
    }
    paths
        .iter()
        .map(|p| p.display().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn fmt_unresolved(items: &[(String, SourceLoc)]) -> String {
    items
        .iter()
        .map(|(n, loc)| format!("`{n}` (first used at {loc})"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub loc: SourceLoc,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.loc, self.message)
    }
}

/// Output of a successful assembly.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub object: ObjectProgram,
    pub warnings: Vec<Warning>,
    /// Expanded and padded lines, active or not.
    pub lines: Vec<FlatLine>,
    pub active: Vec<bool>,
    pub all_symbols: std::collections::HashMap<String, u64>,
}

#[derive(Debug, Clone)]
pub struct Assembler {
    spec: WordSpec,
    resolver: IncludeResolver,
    max_memory_bits: u64,
}

impl Assembler {
    /// Assembler whose `.include lib` is the generated library for `spec`.
    pub fn new(spec: WordSpec) -> Self {
        Assembler {
            spec,
            resolver: IncludeResolver::new(Some(spec)),
            max_memory_bits: RunLimits::DEFAULT_MAX_MEMORY_BITS,
        }
    }

    pub fn with_resolver(mut self, resolver: IncludeResolver) -> Self {
        self.resolver = resolver;
        self
    }

    pub fn with_max_memory_bits(mut self, bits: u64) -> Self {
        self.max_memory_bits = bits;
        self
    }

    pub fn spec(&self) -> WordSpec {
        self.spec
    }

    pub fn resolver(&self) -> &IncludeResolver {
        &self.resolver
    }

    fn expanded(&self, source: &str, name: &str, dir: Option<&Path>) -> Result<(Vec<FlatLine>, Vec<Warning>), AsmError> {
        let program = parse(source, name, dir, &self.resolver)?;
        let (mut lines, warnings) = expand(&program)?;
        pad_implicit_c(&mut lines);
        Ok((lines, warnings))
    }

    /// Assembles in-memory source. Relative includes resolve against `dir`.
    pub fn assemble_source(&self, source: &str, name: &str, dir: Option<&Path>) -> Result<Assembly, AsmError> {
        let (lines, mut warnings) = self.expanded(source, name, dir)?;
        let resolved = resolve_with_conditionals(&lines, self.spec, self.max_memory_bits)?;
        warnings.extend(resolved.warnings);
        Ok(Assembly {
            object: resolved.object,
            warnings,
            lines,
            active: resolved.active,
            all_symbols: resolved.all_symbols,
        })
    }

    pub fn assemble_str(&self, source: &str) -> Result<Assembly, AsmError> {
        self.assemble_source(source, "<input>", None)
    }

    pub fn assemble_file(&self, path: &Path) -> Result<Assembly, AsmError> {
        let source = read_source(path)?;
        self.assemble_source(&source, &path.display().to_string(), path.parent())
    }

    /// Post-expansion listing: one padded line per row, locals suffixed
    /// with their expansion number, conditional rows annotated with their
    /// trigger and whether they were included.
    pub fn expand_dump(&self, source: &str, name: &str, dir: Option<&Path>) -> Result<String, AsmError> {
        let (lines, _) = self.expanded(source, name, dir)?;
        let active = activate(&lines, &[]);
        let mut out = String::new();
        for (line, on) in lines.iter().zip(active) {
            let cells: Vec<String> = line.exprs.iter().map(ToString::to_string).collect();
            out.push_str(&cells.join(" "));
            if let Some(t) = &line.trigger {
                let state = if on { "active" } else { "inactive" };
                out.push_str(&format!(" # if {t} {state}"));
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn expand_dump_file(&self, path: &Path) -> Result<String, AsmError> {
        let source = read_source(path)?;
        self.expand_dump(&source, &path.display().to_string(), path.parent())
    }
}

fn read_source(path: &Path) -> Result<String, AsmError> {
    std::fs::read_to_string(path).map_err(|source| AsmError::Io {
        path: path.display().to_string(),
        source,
    })
}
