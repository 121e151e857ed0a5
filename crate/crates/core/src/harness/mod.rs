//! Differential testing of library macros.
//!
//! A driver program invokes one macro on labelled cells, runs to halt, and
//! its `RES*` cells or output bytes are compared with a host oracle. Each
//! driver is assembled once per macro, word size and static bit index; cases
//! only patch the input cells of the object.

mod oracle;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rayon::prelude::*;
use thiserror::Error;

use crate::assembler::{AsmError, Assembler};
use crate::machine::{BitIo, Machine, RunLimits, RunStatus};
use crate::object::ObjectProgram;
use crate::stdlib::{self, LIBRARY_CELLS};
use crate::word::WordSpec;

pub use oracle::{expected, in_domain, Outcome};

/// Step budget of a single case.
pub const DEFAULT_CASE_STEPS: u64 = 100_000_000;

/// Macros the harness has drivers and oracles for, in suite order.
pub const MACROS: &[&str] = &[
    "copy", "shiftL", "shiftR", "rollL", "rollR", "jump01", "test", "testL", "testH", "inc", "inv",
    "ifzero", "add", "deref", "toref", "sub", "mul", "ifeq", "iflt", "div", "out", "in", "prn",
    "halt",
];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no driver for macro `{0}`")]
    UnknownMacro(String),
    #[error("driver for `{name}` at word size {word_size}: {source}")]
    Assembly {
        name: String,
        word_size: u32,
        #[source]
        source: AsmError,
    },
    #[error("driver for `{name}` needs {bits} bits but word size {word_size} addresses fewer")]
    AddressSpace { name: String, word_size: u32, bits: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub macro_name: String,
    pub word_size: u32,
    pub inputs: Vec<u64>,
    /// Static bit index for `test` and `jump01`.
    pub bit: Option<u32>,
    pub expected: Outcome,
    pub seed: u64,
}

impl TestCase {
    /// Builds a case with its oracle outcome.
    pub fn new(name: &str, spec: WordSpec, inputs: Vec<u64>, bit: Option<u32>, seed: u64) -> Result<Self, HarnessError> {
        let expected = expected(spec, name, &inputs, bit).ok_or_else(|| HarnessError::UnknownMacro(name.into()))?;
        Ok(TestCase {
            macro_name: name.into(),
            word_size: spec.word_size(),
            inputs,
            bit,
            expected,
            seed,
        })
    }

    pub fn spec(&self) -> WordSpec {
        WordSpec::new(self.word_size).expect("case word size is valid")
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ws={} inputs={:?}", self.macro_name, self.word_size, self.inputs)?;
        if let Some(b) = self.bit {
            write!(f, " bit={b}")?;
        }
        write!(f, " seed={}", self.seed)
    }
}

/// How a driver feeds the macro and what it observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    /// `.m RES0`, RES0 starts at the input.
    InPlace,
    /// `.m IN0 RES0`.
    Unary,
    /// `.m IN0 IN1 RES0`.
    Binary,
    /// `.m IN0 IN1 RES0 RES1`.
    DivMod,
    /// Writes 1 or 2 into RES0 depending on the target taken.
    Branch { args: usize, bit: bool },
    /// Z0/Z1 set by the driver, then `.jump01 IN0 b`.
    Jump01,
    Deref,
    Toref,
    Out,
    In,
    Prn,
    Halt,
}

fn shape(name: &str) -> Option<Shape> {
    use Shape::*;
    Some(match name {
        "shiftL" | "shiftR" | "rollL" | "rollR" | "inc" | "inv" => InPlace,
        "copy" => Unary,
        "add" | "sub" | "mul" => Binary,
        "div" => DivMod,
        "test" => Branch { args: 1, bit: true },
        "testL" | "testH" | "ifzero" => Branch { args: 1, bit: false },
        "ifeq" | "iflt" => Branch { args: 2, bit: false },
        "jump01" => Jump01,
        "deref" => Deref,
        "toref" => Toref,
        "out" => Out,
        "in" => In,
        "prn" => Prn,
        "halt" => Halt,
        _ => return None,
    })
}

/// Driver source for `case`. Input cells start at zero; [`run_case`] patches
/// them in the assembled object.
pub fn gen_driver(case: &TestCase) -> Result<String, HarnessError> {
    driver_source(&case.macro_name, case.bit)
}

fn driver_source(name: &str, bit: Option<u32>) -> Result<String, HarnessError> {
    use Shape::*;
    let shape = shape(name).ok_or_else(|| HarnessError::UnknownMacro(name.into()))?;
    let b = bit.unwrap_or(0);
    let probe = "B0: .copy K1 RES0\n.halt\nB1: .copy K2 RES0\n.halt\nK1:1 K2:2 RES0:0\n";
    let body = match shape {
        InPlace => format!(".{name} RES0\n.halt\nRES0:0\n"),
        Unary => format!(".{name} IN0 RES0\n.halt\nIN0:0 RES0:0\n"),
        Binary => format!(".{name} IN0 IN1 RES0\n.halt\nIN0:0 IN1:0 RES0:0\n"),
        DivMod => format!(".{name} IN0 IN1 RES0 RES1\n.halt\nIN0:0 IN1:0\nRES0:0 RES1:0\n"),
        Branch { args: 1, bit: true } => format!(".{name} IN0 {b} B0 B1\n{probe}IN0:0\n"),
        Branch { args: 1, .. } => format!(".{name} IN0 B0 B1\n{probe}IN0:0\n"),
        Branch { .. } => format!(".{name} IN0 IN1 B0 B1\n{probe}IN0:0 IN1:0\n"),
        Jump01 => format!(".copy T0 Z0\n.copy T1 Z1\n.jump01 IN0 {b}\n{probe}IN0:0\nT0:B0 T1:B1\n"),
        Deref => ".deref IN0 RES0\n.halt\nIN0:D D:0 RES0:0\n".into(),
        Toref => ".toref IN0 P\n.deref P RES1\n.halt\nIN0:0 P:RES0\nRES0:0 RES1:0\n".into(),
        Out => ".out IN0\n.halt\nIN0:0\n".into(),
        In => ".in RES0\n.halt\nRES0:0\n".into(),
        Prn => ".prn IN0\n.halt\nIN0:0\n".into(),
        Halt => ".halt\n".into(),
    };
    Ok(format!("Z0:0 Z1:0\n{body}.include lib\n"))
}

/// Symbols whose cells receive the case inputs, in order. The second input
/// of `in` goes to the input stream instead.
fn input_cells(name: &str) -> &'static [&'static str] {
    match shape(name) {
        Some(Shape::InPlace | Shape::In) => &["RES0"],
        Some(Shape::Binary | Shape::DivMod | Shape::Branch { args: 2, .. }) => &["IN0", "IN1"],
        Some(Shape::Deref) => &["D"],
        Some(Shape::Halt) => &[],
        _ => &["IN0"],
    }
}

fn output_cells(name: &str) -> &'static [&'static str] {
    match shape(name) {
        Some(Shape::DivMod | Shape::Toref) => &["RES0", "RES1"],
        Some(Shape::Out | Shape::Prn | Shape::Halt) => &[],
        _ => &["RES0"],
    }
}

/// An assembled driver, shared by all cases with the same key.
#[derive(Debug)]
pub struct Driver {
    pub object: ObjectProgram,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

impl Driver {
    fn cell(object: &ObjectProgram, name: &str) -> usize {
        let addr = object.symbol(name).expect("driver labels its cells");
        (addr / u64::from(object.spec.word_size())) as usize
    }

    fn patched(&self, inputs: &[u64]) -> ObjectProgram {
        let mut obj = self.object.clone();
        for (&i, &v) in self.inputs.iter().zip(inputs) {
            obj.words[i] = v & obj.spec.mask();
        }
        obj
    }
}

/// The assembled driver for `case`, cached per macro, word size and bit.
pub fn driver(case: &TestCase) -> Result<Arc<Driver>, HarnessError> {
    type Key = (String, u32, Option<u32>);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Driver>>>> = OnceLock::new();
    let key = (case.macro_name.clone(), case.word_size, case.bit);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(d) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(d.clone());
    }
    let src = gen_driver(case)?;
    let object = Assembler::new(case.spec())
        .assemble_str(&src)
        .map_err(|source| HarnessError::Assembly {
            name: case.macro_name.clone(),
            word_size: case.word_size,
            source,
        })?
        .object;
    let bits = object.words.len() as u64 * u64::from(case.word_size);
    if bits > case.spec().neg_one() {
        return Err(HarnessError::AddressSpace {
            name: case.macro_name.clone(),
            word_size: case.word_size,
            bits,
        });
    }
    let cells = |names: &[&str]| names.iter().map(|n| Driver::cell(&object, n)).collect();
    let d = Arc::new(Driver {
        inputs: cells(input_cells(&case.macro_name)),
        outputs: cells(output_cells(&case.macro_name)),
        object,
    });
    cache.lock().unwrap_or_else(|e| e.into_inner()).insert(key, d.clone());
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub case: TestCase,
    /// What the driver produced, or why it produced nothing.
    pub actual: Result<Outcome, String>,
    pub steps: u64,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.actual.as_ref() == Ok(&self.case.expected)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "ok" } else { "MISMATCH" };
        write!(f, "{status}: {} expected {:?}", self.case, self.case.expected)?;
        match &self.actual {
            Ok(o) => write!(f, " got {o:?} in {} steps", self.steps),
            Err(e) => write!(f, " failed: {e}"),
        }
    }
}

struct Run {
    machine: Machine,
    status: RunStatus,
    steps: u64,
    output: Vec<u8>,
    driver: Arc<Driver>,
    before: ObjectProgram,
}

fn execute(case: &TestCase, max_steps: u64) -> Result<Run, String> {
    let driver = driver(case).map_err(|e| e.to_string())?;
    let before = driver.patched(&case.inputs);
    let limits = RunLimits::default().with_max_steps(max_steps);
    let mut machine = Machine::load(&before, &limits).map_err(|e| e.to_string())?;
    let stdin: Vec<u8> = match case.macro_name.as_str() {
        "in" => vec![case.inputs.get(1).copied().unwrap_or(0) as u8],
        _ => Vec::new(),
    };
    let mut io = BitIo::new(&stdin[..], Vec::new());
    let r = machine.run(&mut io, &limits).map_err(|e| e.to_string())?;
    Ok(Run {
        machine,
        status: r.status,
        steps: r.steps,
        output: io.into_output(),
        driver,
        before,
    })
}

/// Assembles (or reuses) the driver, runs the case and compares with the
/// oracle. Assembly failures and exhausted limits are mismatches.
pub fn run_case(case: &TestCase) -> Verdict {
    run_case_with(case, DEFAULT_CASE_STEPS)
}

pub fn run_case_with(case: &TestCase, max_steps: u64) -> Verdict {
    let (actual, steps) = match execute(case, max_steps) {
        Err(e) => (Err(e), 0),
        Ok(run) if run.status != RunStatus::Halted => (Err(format!("{:?}", run.status)), run.steps),
        Ok(run) => {
            let ws = u64::from(case.word_size);
            let mem = run.machine.memory();
            let cells = run
                .driver
                .outputs
                .iter()
                .map(|&i| mem.read_word(i as u64 * ws))
                .collect();
            (
                Ok(Outcome {
                    cells,
                    output: run.output,
                }),
                run.steps,
            )
        }
    };
    Verdict {
        case: case.clone(),
        actual,
        steps,
    }
}

/// Named cells changed by a driver run that the macro's contract does not
/// allow it to change.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClobberReport {
    pub macro_name: String,
    /// Every watched cell that changed.
    pub changed: BTreeSet<String>,
    /// Changed cells outside outputs and declared clobbers.
    pub unexpected: BTreeSet<String>,
}

impl ClobberReport {
    pub fn clean(&self) -> bool {
        self.unexpected.is_empty()
    }
}

fn watched(name: &str) -> bool {
    const DRIVER: &[&str] = &["Z0", "Z1", "IN0", "IN1", "RES0", "RES1", "K1", "K2", "D", "P", "T0", "T1"];
    DRIVER.contains(&name)
        || LIBRARY_CELLS.iter().any(|(c, _)| *c == name)
        || ["_f_X", "_f_Y", "_f_Z", "_f_R", "_f_RET"].iter().any(|s| name.ends_with(s))
}

/// Snapshots the driver's cells, the library cells and every function
/// argument cell before and after a run, and checks each change against the
/// macro's outputs and transitive clobber set.
pub fn clobber_scan(case: &TestCase) -> Result<ClobberReport, String> {
    let run = execute(case, DEFAULT_CASE_STEPS)?;
    if run.status != RunStatus::Halted {
        return Err(format!("{:?}", run.status));
    }
    let spec = case.spec();
    let mut allowed: BTreeSet<&str> = stdlib::clobbers(spec, &case.macro_name);
    allowed.extend(output_cells(&case.macro_name));
    match case.macro_name.as_str() {
        "jump01" => allowed.extend(["Z0", "Z1"]),
        "toref" => allowed.extend(stdlib::clobbers(spec, "deref")),
        _ => {}
    }
    let mut changed = BTreeSet::new();
    let mem = run.machine.memory();
    for (name, &addr) in &run.before.symbols {
        if !watched(name) || addr % u64::from(spec.word_size()) != 0 {
            continue;
        }
        let idx = (addr / u64::from(spec.word_size())) as usize;
        if run.before.words.get(idx) != Some(&mem.read_word(addr)) {
            changed.insert(name.clone());
        }
    }
    let unexpected = changed.iter().filter(|c| !allowed.contains(c.as_str())).cloned().collect();
    Ok(ClobberReport {
        macro_name: case.macro_name.clone(),
        changed,
        unexpected,
    })
}

/// Inputs every suite covers, filtered to the macro's domain.
pub fn boundary_inputs(spec: WordSpec, name: &str) -> Vec<(Vec<u64>, Option<u32>)> {
    let edges = [0, 1, spec.neg_one(), spec.sign_bit()];
    let arity = arity(name);
    let mut out = Vec::new();
    let bits: Vec<Option<u32>> = if takes_bit(name) {
        vec![Some(0), Some(1), Some(spec.w())]
    } else {
        vec![None]
    };
    for bit in bits {
        match arity {
            0 => out.push((Vec::new(), bit)),
            1 => out.extend(edges.iter().map(|&x| (vec![x], bit))),
            _ => {
                for &x in &edges {
                    for &y in &edges {
                        out.push((vec![x, y], bit));
                    }
                }
            }
        }
    }
    out.retain(|(i, _)| in_domain(spec, name, i));
    out
}

fn takes_bit(name: &str) -> bool {
    matches!(name, "test" | "jump01")
}

fn arity(name: &str) -> usize {
    match name {
        "halt" => 0,
        "add" | "sub" | "mul" | "div" | "ifeq" | "iflt" | "in" => 2,
        _ => 1,
    }
}

/// One random in-domain input vector.
pub fn random_inputs(spec: WordSpec, name: &str, rng: &mut StdRng) -> (Vec<u64>, Option<u32>) {
    let mask = spec.mask();
    let ws = spec.word_size();
    let nonneg = spec.sign_bit() - 1;
    let bit = takes_bit(name).then(|| rng.random_range(0..ws));
    let inputs = loop {
        let mut word = || rng.random::<u64>() & mask;
        let v: Vec<u64> = match name {
            "halt" => vec![],
            "mul" => {
                let lim = 1u64 << 15.min(ws - 1);
                vec![rng.random_range(0..lim), rng.random_range(0..lim)]
            }
            "div" => {
                let x = rng.random::<u64>() & nonneg;
                let shift = rng.random_range(0..ws - 1);
                let y = (rng.random::<u64>() & nonneg) >> shift;
                vec![x, y]
            }
            // Short numbers as often as long ones.
            "prn" => {
                let shift = rng.random_range(0..ws);
                vec![spec.reduce(i128::from(spec.to_signed(rng.random::<u64>() & mask)) >> shift)]
            }
            "in" => vec![word(), word() & 0xff],
            _ if arity(name) == 2 => vec![word(), word()],
            _ => vec![word()],
        };
        if in_domain(spec, name, &v) {
            break v;
        }
    };
    (inputs, bit)
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub word_size: u32,
    pub seed: u64,
    pub cases: usize,
    pub failures: Vec<Verdict>,
    pub steps: u64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "suite={} ws={} seed={} cases={} failures={}",
            self.name,
            self.word_size,
            self.seed,
            self.cases,
            self.failures.len()
        )
    }
}

/// Per-suite seed derived from the run seed, so a suite reproduces alone.
pub fn suite_seed(seed: u64, name: &str, ws: u32) -> u64 {
    let mut h = seed ^ u64::from(ws).rotate_left(32);
    for b in name.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3);
    }
    h
}

/// The cases of one suite: boundary inputs then `random` seeded cases.
pub fn suite_cases(name: &str, spec: WordSpec, seed: u64, random: usize) -> Result<Vec<TestCase>, HarnessError> {
    shape(name).ok_or_else(|| HarnessError::UnknownMacro(name.into()))?;
    let s = suite_seed(seed, name, spec.word_size());
    let mut rng = StdRng::seed_from_u64(s);
    let mut cases = Vec::new();
    for (inputs, bit) in boundary_inputs(spec, name) {
        cases.push(TestCase::new(name, spec, inputs, bit, s)?);
    }
    for _ in 0..random {
        let (inputs, bit) = random_inputs(spec, name, &mut rng);
        cases.push(TestCase::new(name, spec, inputs, bit, s)?);
    }
    Ok(cases)
}

pub fn run_suite(name: &str, spec: WordSpec, seed: u64, random: usize) -> Result<SuiteReport, HarnessError> {
    let cases = suite_cases(name, spec, seed, random)?;
    // Assemble the drivers up front so an assembly error surfaces as one
    // error rather than a failure per case.
    for c in &cases {
        driver(c)?;
    }
    let verdicts: Vec<Verdict> = cases.par_iter().map(run_case).collect();
    Ok(SuiteReport {
        name: name.into(),
        word_size: spec.word_size(),
        seed,
        cases: verdicts.len(),
        steps: verdicts.iter().map(|v| v.steps).sum(),
        failures: verdicts.into_iter().filter(|v| !v.passed()).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct SelftestOptions {
    /// Empty means every macro in [`MACROS`].
    pub macros: Vec<String>,
    pub word_sizes: Vec<u32>,
    pub seed: u64,
    /// Random cases per suite; `None` uses 200 for binary macros and 100
    /// for the rest.
    pub cases: Option<usize>,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            macros: Vec::new(),
            word_sizes: vec![16, 32],
            seed: 1,
            cases: None,
        }
    }
}

/// Runs the selected suites. Suites whose driver cannot be assembled come
/// back as errors in place.
pub fn selftest(opts: &SelftestOptions) -> Vec<Result<SuiteReport, HarnessError>> {
    let names: Vec<&str> = if opts.macros.is_empty() {
        MACROS.to_vec()
    } else {
        opts.macros.iter().map(String::as_str).collect()
    };
    let mut out = Vec::new();
    for &ws in &opts.word_sizes {
        let spec = match WordSpec::new(ws) {
            Ok(s) => s,
            Err(_) => continue,
        };
        for name in &names {
            let n = opts.cases.unwrap_or(if arity(name) == 2 { 200 } else { 100 });
            out.push(run_suite(name, spec, opts.seed, n));
        }
    }
    out
}
