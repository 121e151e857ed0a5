use std::collections::{BTreeMap, HashMap, HashSet};

use super::expr::{Term, WordExpr};
use super::parse::{LineKind, MacroDef, ParsedProgram, SourceLine, SourceLoc};
use super::{AsmError, Warning};

/// Separates a local label from its per-expansion serial number.
pub const LOCAL_SEP: char = '@';

/// A line of cells after macro substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatLine {
    pub exprs: Vec<WordExpr>,
    /// Set for conditional lines: the label whose absence activates them.
    pub trigger: Option<String>,
    pub loc: SourceLoc,
}

impl FlatLine {
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.exprs.iter().flat_map(|e| e.labels.iter().map(String::as_str))
    }

    pub fn references(&self) -> impl Iterator<Item = &str> {
        self.exprs.iter().flat_map(WordExpr::symbols)
    }
}

/// Appends `?` to every two-cell line, making its jump go to the next cell.
pub fn pad_implicit_c(lines: &mut [FlatLine]) {
    for line in lines {
        if line.exprs.len() == 2 {
            line.exprs.push(WordExpr::next_cell());
        }
    }
}

pub fn is_local(name: &str) -> bool {
    name.contains(LOCAL_SEP)
}

struct Expander<'m> {
    macros: &'m BTreeMap<String, MacroDef>,
    serial: u64,
    stack: Vec<String>,
    /// Top-level line being expanded; warnings point here.
    root: Option<SourceLoc>,
    out: Vec<FlatLine>,
    warnings: Vec<Warning>,
}

/// Replaces every macro invocation by its body, innermost first.
pub fn expand(program: &ParsedProgram) -> Result<(Vec<FlatLine>, Vec<Warning>), AsmError> {
    let mut ex = Expander {
        macros: &program.macros,
        serial: 0,
        stack: Vec::new(),
        root: None,
        out: Vec::new(),
        warnings: Vec::new(),
    };
    for line in &program.lines {
        let trigger = line.trigger().map(str::to_string);
        match &line.kind {
            LineKind::Words(exprs) => ex.out.push(FlatLine {
                exprs: exprs.clone(),
                trigger,
                loc: line.loc.clone(),
            }),
            LineKind::Invoke { labels, name, args } => {
                ex.root = Some(line.loc.clone());
                ex.invoke(name, args.clone(), labels.clone(), &trigger, &line.loc)?;
            }
        }
    }
    let mut seen = HashSet::new();
    ex.warnings.retain(|w| seen.insert((w.loc.clone(), w.message.clone())));
    Ok((ex.out, ex.warnings))
}

/// What a name inside a macro body stands for during one expansion.
enum Binding<'a> {
    Actual(&'a Term),
    Local(String),
    Global,
}

impl Expander<'_> {
    fn invoke(
        &mut self,
        name: &str,
        args: Vec<Term>,
        labels: Vec<String>,
        trigger: &Option<String>,
        loc: &SourceLoc,
    ) -> Result<(), AsmError> {
        let macros = self.macros;
        let def = macros.get(name).ok_or_else(|| AsmError::UnknownMacro {
            name: name.to_string(),
            loc: loc.clone(),
        })?;
        if args.len() != def.formals.len() {
            return Err(AsmError::Arity {
                name: name.to_string(),
                expected: def.formals.len(),
                got: args.len(),
                loc: loc.clone(),
            });
        }
        if self.stack.iter().any(|n| n == name) {
            let mut cycle: Vec<String> = self
                .stack
                .iter()
                .skip_while(|n| *n != name)
                .cloned()
                .collect();
            cycle.push(name.to_string());
            return Err(AsmError::Recursion(cycle));
        }

        self.serial += 1;
        let serial = self.serial;
        let locals = def.locals();
        let mut env: HashMap<&str, Binding> = HashMap::new();
        for (f, a) in def.formals.iter().zip(&args) {
            env.insert(f, Binding::Actual(a));
        }
        for e in &def.externals {
            env.insert(e, Binding::Global);
        }
        for l in &locals {
            if env.contains_key(l) {
                return Err(AsmError::Syntax {
                    loc: def.loc.clone(),
                    msg: format!("label `{l}` in macro `{name}` clashes with a parameter or external"),
                });
            }
            env.insert(l, Binding::Local(format!("{l}{LOCAL_SEP}{serial}")));
        }

        let rename = |label: &String| match env.get(label.as_str()) {
            Some(Binding::Local(n)) => n.clone(),
            _ => unreachable!("every body label is a local"),
        };
        let subst = |t: &Term, line: &SourceLine| -> Result<Term, AsmError> {
            t.map_symbols(&mut |s: &str| match env.get(s) {
                Some(Binding::Actual(a)) => Ok((*a).clone()),
                Some(Binding::Local(n)) => Ok(Term::Sym(n.clone())),
                Some(Binding::Global) => Ok(Term::Sym(s.to_string())),
                None => Err(AsmError::UnknownName {
                    name: s.to_string(),
                    macro_name: def.name.clone(),
                    loc: line.loc.clone(),
                }),
            })
        };

        self.stack.push(name.to_string());
        let first = self.out.len();
        for line in &def.body {
            match &line.kind {
                LineKind::Words(exprs) => {
                    let mut cells = Vec::with_capacity(exprs.len() + 1);
                    for (i, e) in exprs.iter().enumerate() {
                        if i < 2 {
                            self.lint_operand(&e.term, &env, def);
                        }
                        cells.push(WordExpr {
                            labels: e.labels.iter().map(rename).collect(),
                            term: subst(&e.term, line)?,
                            offset: e.offset.as_ref().map(|o| subst(o, line)).transpose()?,
                        });
                    }
                    self.out.push(FlatLine {
                        exprs: cells,
                        trigger: trigger.clone(),
                        loc: line.loc.clone(),
                    });
                }
                LineKind::Invoke {
                    labels: inner_labels,
                    name: inner,
                    args: inner_args,
                } => {
                    let inner_args = inner_args
                        .iter()
                        .map(|a| subst(a, line))
                        .collect::<Result<_, _>>()?;
                    let inner_labels = inner_labels.iter().map(rename).collect();
                    self.invoke(inner, inner_args, inner_labels, trigger, &line.loc)?;
                }
            }
        }
        self.stack.pop();

        if !labels.is_empty() {
            let Some(line) = self.out.get_mut(first) else {
                return Err(AsmError::Syntax {
                    loc: loc.clone(),
                    msg: format!("label `{}` on macro `{name}`, which expands to nothing", labels[0]),
                });
            };
            let cell = &mut line.exprs[0];
            let mut all = labels;
            all.append(&mut cell.labels);
            cell.labels = all;
        }
        Ok(())
    }

    /// Warns when a numeric actual lands in an instruction's A or B slot.
    fn lint_operand(&mut self, term: &Term, env: &HashMap<&str, Binding>, def: &MacroDef) {
        if let Term::Sym(s) = term {
            if let Some(Binding::Actual(a)) = env.get(s.as_str()) {
                if a.is_constant_like() {
                    self.warnings.push(Warning {
                        loc: self.root.clone().unwrap_or_else(|| def.loc.clone()),
                        message: format!(
                            "constant `{a}` passed to `{}` is used as a bit address in `.{}`",
                            s, def.name
                        ),
                    });
                }
            }
        }
    }
}

/// Labels defined more than once across `lines`.
pub fn duplicate_labels(lines: &[FlatLine]) -> Vec<&str> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for l in lines.iter().flat_map(FlatLine::labels) {
        if !seen.insert(l) {
            dups.push(l);
        }
    }
    dups
}
