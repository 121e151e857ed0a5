use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::expand::{is_local, FlatLine};
use super::expr::WordExpr;
use super::parse::SourceLoc;
use super::{AsmError, Warning};
use crate::object::ObjectProgram;
use crate::word::WordSpec;

/// Cell placement: the bit address of every active label, plus the index
/// of each active line's first cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layout {
    pub symbols: HashMap<String, u64>,
    pub line_start: Vec<Option<u64>>,
    pub cells: u64,
}

/// Symbols referenced by active lines but defined by none of them.
pub fn unresolved(lines: &[FlatLine], active: &[bool]) -> BTreeSet<String> {
    let mut defined = HashSet::new();
    for (l, _) in lines.iter().zip(active).filter(|(_, &a)| a) {
        defined.extend(l.labels());
    }
    let mut missing = BTreeSet::new();
    for (l, _) in lines.iter().zip(active).filter(|(_, &a)| a) {
        for r in l.references() {
            if !defined.contains(r) {
                missing.insert(r.to_string());
            }
        }
    }
    missing
}

/// Grows `seed` until no inactive conditional line's trigger is unresolved.
///
/// Unconditional lines are always active. Activation only ever adds lines,
/// so any seed below the least fixpoint converges to it.
pub fn activate(lines: &[FlatLine], seed: &[bool]) -> Vec<bool> {
    let mut active: Vec<bool> = lines
        .iter()
        .zip(seed.iter().chain(std::iter::repeat(&false)))
        .map(|(l, &s)| s || l.trigger.is_none())
        .collect();

    let mut by_trigger: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, l) in lines.iter().enumerate() {
        if let Some(t) = &l.trigger {
            by_trigger.entry(t).or_default().push(i);
        }
    }
    loop {
        let missing = unresolved(lines, &active);
        let mut grew = false;
        for name in &missing {
            for &i in by_trigger.get(name.as_str()).into_iter().flatten() {
                if !active[i] {
                    active[i] = true;
                    grew = true;
                }
            }
        }
        if !grew {
            return active;
        }
    }
}

/// Assigns consecutive cells to active lines in source order.
pub fn layout(lines: &[FlatLine], active: &[bool], spec: WordSpec) -> Result<Layout, AsmError> {
    let mut out = Layout::default();
    let mut defined_at: HashMap<&str, &SourceLoc> = HashMap::new();
    for (line, &on) in lines.iter().zip(active) {
        if !on {
            out.line_start.push(None);
            continue;
        }
        out.line_start.push(Some(out.cells));
        for e in &line.exprs {
            for l in &e.labels {
                if let Some(first) = defined_at.insert(l, &line.loc) {
                    return Err(AsmError::DuplicateLabel {
                        name: l.clone(),
                        first: first.clone(),
                        second: line.loc.clone(),
                    });
                }
                out.symbols.insert(l.clone(), spec.cell_addr(out.cells));
            }
            out.cells += 1;
        }
    }
    Ok(out)
}

/// Value of one cell at bit address `position`, reduced to the word size.
pub fn eval_expr(
    expr: &WordExpr,
    position: u64,
    symbols: &HashMap<String, u64>,
    spec: WordSpec,
) -> Result<u64, String> {
    let mut v = expr.term.eval(position, symbols, spec)?;
    if let Some(off) = &expr.offset {
        v += off.eval(position, symbols, spec)?;
    }
    Ok(spec.reduce(v))
}

/// Result of resolving a flat program.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub object: ObjectProgram,
    pub active: Vec<bool>,
    /// Every label, including per-expansion locals.
    pub all_symbols: HashMap<String, u64>,
    pub warnings: Vec<Warning>,
}

/// Runs conditional activation, lays out the active lines and evaluates
/// every cell.
pub fn resolve_with_conditionals(
    lines: &[FlatLine],
    spec: WordSpec,
    max_memory_bits: u64,
) -> Result<Resolved, AsmError> {
    let active = activate(lines, &[]);
    let missing = unresolved(lines, &active);
    if !missing.is_empty() {
        let mut first_use: BTreeMap<String, SourceLoc> = BTreeMap::new();
        for (l, _) in lines.iter().zip(&active).filter(|(_, &a)| a) {
            for r in l.references() {
                if missing.contains(r) && !first_use.contains_key(r) {
                    first_use.insert(r.to_string(), l.loc.clone());
                }
            }
        }
        return Err(AsmError::Unresolved(first_use.into_iter().collect()));
    }

    let lay = layout(lines, &active, spec)?;
    let bits = u128::from(lay.cells) * u128::from(spec.word_size());
    if bits > u128::from(max_memory_bits) {
        return Err(AsmError::TooLarge {
            bits,
            limit: max_memory_bits,
        });
    }

    let mut words = Vec::with_capacity(lay.cells as usize);
    for (line, start) in lines.iter().zip(&lay.line_start) {
        let Some(start) = start else { continue };
        for (i, e) in line.exprs.iter().enumerate() {
            let pos = spec.cell_addr(start + i as u64);
            let v = eval_expr(e, pos, &lay.symbols, spec)
                .expect("all symbols resolved before evaluation");
            words.push(v);
        }
    }

    let mut warnings = Vec::new();
    // The last address is the halt/I-O word, so code must end below it.
    if bits > u128::from(spec.neg_one()) {
        if let Some(l) = lines.iter().zip(&active).filter(|(_, &a)| a).map(|(l, _)| l).last() {
            warnings.push(Warning {
                loc: l.loc.clone(),
                message: format!(
                    "program is {bits} bits but word size {} addresses only {}; addresses wrap",
                    spec.word_size(),
                    spec.neg_one()
                ),
            });
        }
    }
    for (name, want) in [("Z0", 0), ("Z1", spec.cell_addr(1))] {
        match lay.symbols.get(name) {
            Some(&at) if at != want => warnings.push(Warning {
                loc: lines
                    .iter()
                    .find(|l| l.labels().any(|x| x == name))
                    .map(|l| l.loc.clone())
                    .expect("label has a defining line"),
                message: format!("{name} is at bit {at}, but bit tests expect it at {want}"),
            }),
            _ => {}
        }
    }

    let mut object = ObjectProgram::new(spec, words);
    object.symbols = lay
        .symbols
        .iter()
        .filter(|(n, _)| !is_local(n))
        .map(|(n, &a)| (n.clone(), a))
        .collect();
    Ok(Resolved {
        object,
        active,
        all_symbols: lay.symbols,
        warnings,
    })
}
