use std::collections::{BTreeMap, BTreeSet};

use crate::assembler::{parse, IncludeResolver, MacroDef};
use crate::word::WordSpec;

/// How a library macro reaches its code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// The body expands at the call site.
    Inline,
    /// The call site copies arguments into `<name>_f_*` cells and jumps to
    /// the shared body `<name>_f_def`.
    Function,
}

/// Inputs a macro is specified for, in the signed view where relevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Any,
    /// Signed operands whose difference does not overflow.
    Comparable,
    /// First operand non-negative.
    NonNegativeFirst,
    /// Dividend non-negative, divisor positive.
    PositiveDivision,
    /// Any signed value except the most negative one.
    NotMinimum,
    /// Pointer operand holds the bit address of a cell.
    Pointer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroContract {
    pub name: &'static str,
    pub kind: Kind,
    /// Dependency layer. A macro only invokes macros of lower layers.
    pub layer: u8,
    pub params: &'static [&'static str],
    /// Indices into `params` of cells the macro writes.
    pub outputs: &'static [usize],
    /// Global cells the macro itself may change, not counting what the
    /// macros it invokes change.
    pub scratch: &'static [&'static str],
    /// An output may name one of the inputs.
    pub alias_safe: bool,
    pub domain: Domain,
}

const fn row(
    name: &'static str,
    kind: Kind,
    layer: u8,
    params: &'static [&'static str],
    outputs: &'static [usize],
    scratch: &'static [&'static str],
    domain: Domain,
) -> MacroContract {
    MacroContract {
        name,
        kind,
        layer,
        params,
        outputs,
        scratch,
        alias_safe: true,
        domain,
    }
}

use Domain::*;
use Kind::*;

static CONTRACTS: &[MacroContract] = &[
    row("copy", Inline, 0, &["A", "B"], &[1], &[], Any),
    row("shiftL", Inline, 0, &["X"], &[0], &[], Any),
    row("shiftR", Inline, 0, &["X"], &[0], &[], Any),
    row("jump01", Inline, 0, &["A", "b"], &[], &[], Any),
    row("out", Inline, 0, &["H"], &[], &[], Any),
    row("in", Inline, 0, &["H"], &[0], &[], Any),
    row("halt", Inline, 0, &[], &[], &[], Any),
    row("rollL", Inline, 1, &["X"], &[0], &["TMP"], Any),
    row("rollR", Inline, 1, &["X"], &[0], &["TMP"], Any),
    row("test", Inline, 1, &["A", "b", "B0", "B1"], &[], &["Z0", "Z1", "SEL"], Any),
    row("testL", Inline, 2, &["A", "B0", "B1"], &[], &[], Any),
    row("testH", Inline, 2, &["A", "B0", "B1"], &[], &[], Any),
    row("inc", Function, 3, &["A"], &[0], &["inc_f_X", "inc_f_RET", "inc_ctr"], Any),
    row("inv", Function, 3, &["A"], &[0], &["inv_f_X", "inv_f_RET", "inv_ctr"], Any),
    row("ifzero", Inline, 4, &["Z", "yes", "no"], &[], &[], Any),
    row(
        "add",
        Function,
        4,
        &["X", "Y", "Z"],
        &[2],
        &["add_f_X", "add_f_Y", "add_f_Z", "add_f_RET", "add_ctr", "adr", "btr"],
        Any,
    ),
    row(
        "deref",
        Function,
        4,
        &["P", "X"],
        &[1],
        &["deref_f_X", "deref_f_Z", "deref_f_RET", "deref_ctr"],
        Pointer,
    ),
    row(
        "toref",
        Function,
        4,
        &["Z", "P"],
        &[],
        &["toref_f_X", "toref_f_Y", "toref_f_RET", "toref_ctr"],
        Pointer,
    ),
    row(
        "sub",
        Function,
        5,
        &["X", "Y", "Z"],
        &[2],
        &["sub_f_X", "sub_f_Y", "sub_f_Z", "sub_f_RET"],
        Any,
    ),
    row(
        "mul",
        Function,
        5,
        &["X", "Y", "Z"],
        &[2],
        &["mul_f_X", "mul_f_Y", "mul_f_Z", "mul_f_RET"],
        NonNegativeFirst,
    ),
    row("ifeq", Inline, 6, &["X", "Y", "yes", "no"], &[], &[], Comparable),
    row("iflt", Inline, 6, &["A", "B", "yes", "no"], &[], &[], Comparable),
    row(
        "div",
        Function,
        7,
        &["X", "Y", "Z", "R"],
        &[2, 3],
        &["div_f_X", "div_f_Y", "div_f_Z", "div_f_R", "div_f_RET"],
        PositiveDivision,
    ),
    row(
        "prn",
        Function,
        8,
        &["X"],
        &[],
        &["prn_f_X", "prn_f_RET"],
        NotMinimum,
    ),
];

/// Every public library macro.
pub fn contracts() -> &'static [MacroContract] {
    CONTRACTS
}

pub fn contract(name: &str) -> Option<&'static MacroContract> {
    CONTRACTS.iter().find(|c| c.name == name)
}

/// Macro definitions of the generated library.
pub fn library_macros(spec: WordSpec) -> BTreeMap<String, MacroDef> {
    let text = super::library_text(spec);
    parse(&text, "<lib>", None, &IncludeResolver::default())
        .expect("generated library parses")
        .macros
}

/// Library macros invoked directly by `name`, counting a function's body as
/// part of the function.
pub fn direct_dependencies(macros: &BTreeMap<String, MacroDef>, name: &str) -> BTreeSet<String> {
    let mut deps = BTreeSet::new();
    let body = format!("{name}_f_def");
    for m in [name, body.as_str()] {
        if let Some(def) = macros.get(m) {
            deps.extend(def.invoked().filter(|d| *d != body).map(str::to_string));
        }
    }
    deps
}

/// Global cells a call to `name` may change besides its outputs: its own
/// scratch plus everything the macros below it change.
pub fn clobbers(spec: WordSpec, name: &str) -> BTreeSet<&'static str> {
    let macros = library_macros(spec);
    let mut seen = BTreeSet::new();
    let mut todo = vec![name.to_string()];
    let mut out = BTreeSet::new();
    while let Some(m) = todo.pop() {
        if !seen.insert(m.clone()) {
            continue;
        }
        if let Some(c) = contract(&m) {
            out.extend(c.scratch.iter().copied());
        }
        todo.extend(direct_dependencies(&macros, &m));
    }
    out
}
