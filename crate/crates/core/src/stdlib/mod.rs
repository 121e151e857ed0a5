//! The standard library, generated per word size, and the sample programs.
//!
//! Bit-level macros expand at every call site. Counting, arithmetic, pointer
//! and printing routines are functions: the macro a program calls copies its
//! arguments into the function's own cells, patches the return address and
//! jumps into a shared body. Bodies and their cells are conditional lines,
//! so a program only carries the functions it reaches.

mod contract;
mod samples;

use std::collections::HashMap;
use std::fmt::Write;
use std::sync::{Arc, Mutex, OnceLock};

use crate::word::WordSpec;

pub use contract::{clobbers, contract, contracts, direct_dependencies, library_macros, Domain, Kind, MacroContract};
pub use samples::{sample, samples, SampleProgram};

/// Library source for `spec`. Deterministic.
pub fn gen_lib(spec: WordSpec) -> String {
    let mut g = Gen {
        out: String::new(),
        ws: spec.word_size(),
    };
    g.header();
    g.bit_macros();
    g.counters();
    g.control();
    g.functions();
    g.cells();
    g.out
}

/// Cached [`gen_lib`] text, shared across assemblies.
pub fn library_text(spec: WordSpec) -> Arc<str> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<str>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(spec.word_size())
        .or_insert_with(|| Arc::from(gen_lib(spec)))
        .clone()
}

/// Length of the digit array in `prn`: the decimal digits of the largest
/// magnitude plus two spare cells (12 at word size 32).
pub fn prn_digits(spec: WordSpec) -> usize {
    spec.sign_bit().to_string().len() + 2
}

/// Library-wide cells, each emitted as its own conditional line.
pub const LIBRARY_CELLS: &[(&str, &str)] = &[
    ("ZERO", "0"),
    ("ONE", "1"),
    ("TMP", "0"),
    ("WS", "(w+1)"),
    ("SEL", "0"),
    ("inc_ctr", "0"),
    ("inv_ctr", "0"),
    ("add_ctr", "0"),
    ("adr", "0"),
    ("btr", "0"),
    ("deref_ctr", "0"),
    ("toref_ctr", "0"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    In,
    Out,
    InOut,
}

use Role::*;

struct Gen {
    out: String,
    ws: u32,
}

impl Gen {
    fn w(&self) -> u32 {
        self.ws - 1
    }

    /// Bit index as written in bodies: numerals, `w` for the top bit.
    fn bit(&self, i: u32) -> String {
        if i == self.w() {
            "w".into()
        } else {
            i.to_string()
        }
    }

    fn line(&mut self, s: &str) {
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn def(&mut self, head: &str, body: &str) {
        writeln!(self.out, ".def {head}").unwrap();
        for l in body.lines().map(str::trim).filter(|l| !l.is_empty()) {
            self.line(l);
        }
        self.line(".end");
        self.out.push('\n');
    }

    fn header(&mut self) {
        writeln!(self.out, "# bbj standard library, word size {}", self.ws).unwrap();
        self.line("# Programs must start with `Z0:0 Z1:0`; bit tests jump through cells 0 and 1.");
        self.out.push('\n');
    }

    fn bit_macros(&mut self) {
        let w = self.w();
        let mut body = String::new();
        for i in 0..=w {
            writeln!(body, "X'{b} Y'{b}", b = self.bit(i)).unwrap();
        }
        self.def("copy X Y", &body);

        let mut body = String::new();
        for i in (0..w).rev() {
            writeln!(body, "X'{} X'{}", self.bit(i), self.bit(i + 1)).unwrap();
        }
        body.push_str("ZERO X\n");
        self.def("shiftL X : ZERO", &body);

        let mut body = String::new();
        for i in 0..w {
            writeln!(body, "X'{} X'{}", self.bit(i + 1), self.bit(i)).unwrap();
        }
        body.push_str("ZERO X'w\n");
        self.def("shiftR X : ZERO", &body);

        self.def("rollR X : TMP", "X TMP\n.shiftR X\nTMP X'w");
        self.def("rollL X : TMP", "X'w TMP\n.shiftL X\nTMP X");

        let mut body = String::new();
        for i in 0..w {
            writeln!(body, "A'b 2?'k\n{i} J'{i}").unwrap();
        }
        body.push_str("A'b 2?'k\nw J'w J:0\n");
        self.def("jump01 A b", &body);

        // The tested bit goes to SEL and one shared jump01 over SEL picks
        // Z0 or Z1.
        self.def(
            "test A b B0 B1 : Z0 Z1 SEL jump_f",
            ".copy L0 Z0\n.copy L1 Z1\nA'b SEL jump_f\nL0:B0 L1:B1",
        );
        self.line(":jump_f: .jump01 SEL 0");
        self.out.push('\n');
        self.def("testL A B0 B1", ".test A 0 B0 B1");
        self.def("testH A B0 B1", ".test A w B0 B1");

        let mut out = String::new();
        let mut inp = String::new();
        for i in 0..8 {
            writeln!(out, "H'{i} -1").unwrap();
            writeln!(inp, "-1 H'{i}").unwrap();
        }
        self.def("out H", &out);
        self.def("in H", &inp);
        self.def("halt", "0 0 -1");
    }

    fn counters(&mut self) {
        // Walks the carry up from bit 0, then rolls A back into place.
        self.function(
            "inc",
            &[("A", InOut)],
            "ONE ZERO inc_ctr",
            "
            .copy ONE inc_ctr
            begin: .testL A test0 test1
            test0: ONE A rollback
            test1: ZERO A
            .testH inc_ctr next rollback
            next: .shiftL inc_ctr
            .rollR A
            0 0 begin
            rollback: .testL inc_ctr roll End
            roll: .shiftR inc_ctr
            .rollL A
            0 0 rollback
            ",
        );
        // One extra roll after the last bit brings A round to where it started.
        self.function(
            "inv",
            &[("A", InOut)],
            "ONE ZERO inv_ctr",
            "
            .copy ONE inv_ctr
            begin: .testL A copy1 copy0
            copy1: ONE A 4?
            copy0: ZERO A
            .testH inv_ctr rollcont last
            rollcont: .shiftL inv_ctr
            .rollR A
            0 0 begin
            last: .rollR A
            ",
        );
    }

    fn control(&mut self) {
        self.def(
            "ifzero Z yes no",
            "
            .testH Z cont no
            cont: .copy Z A
            .inv A
            .inc A
            .testH A yes no
            A:0
            ",
        );
        self.def("ifeq X Y yes no", ".sub X Y Z\n.ifzero Z yes no\nZ:0");
        self.def("iflt A B yes no", ".sub A B Z\n.testH Z no yes\nZ:0");
    }

    /// Emits the calling macro, the body macro, the conditional entry line
    /// and the function's own cells.
    ///
    /// Inputs travel in `<f>_X`, `<f>_Y`; results come back from `<f>_Z`,
    /// `<f>_R`. An in-place parameter goes in and comes back through the
    /// same cell.
    fn function(&mut self, name: &str, params: &[(&str, Role)], externals: &str, body: &str) {
        let f = format!("{name}_f");
        let mut ins = ["X", "Y"].into_iter();
        let mut outs = ["Z", "R"].into_iter();
        let cells: Vec<String> = params
            .iter()
            .map(|(_, role)| {
                let c = match role {
                    In | InOut => ins.next(),
                    Out => outs.next(),
                };
                format!("{f}_{}", c.expect("at most two inputs and two outputs"))
            })
            .collect();
        let formals: Vec<&str> = params.iter().map(|(p, _)| *p).collect();

        let mut call = String::new();
        for ((p, role), c) in params.iter().zip(&cells) {
            if *role != Out {
                writeln!(call, ".copy {p} {c}").unwrap();
            }
        }
        writeln!(call, ".copy L {f}_RET\n0 0 {f}\nL:?").unwrap();
        for ((p, role), c) in params.iter().zip(&cells) {
            if *role != In {
                writeln!(call, ".copy {c} {p}").unwrap();
            }
        }
        let head = format!("{} : {} {f}_RET {f}", [name].iter().chain(&formals).copied().collect::<Vec<_>>().join(" "), cells.join(" "));
        self.def(&head, &call);

        let mut head = format!("{f}_def {} : {f}_RET", formals.join(" "));
        if !externals.is_empty() {
            write!(head, " {externals}").unwrap();
        }
        let body = format!(".copy {f}_RET Return\n{body}\nEnd:0 0 Return:0");
        self.def(&head, &body);

        writeln!(self.out, ":{f}: .{f}_def {}", cells.join(" ")).unwrap();
        for c in cells.iter().map(String::as_str).chain([format!("{f}_RET").as_str()]) {
            writeln!(self.out, ":{c}:0").unwrap();
        }
        self.out.push('\n');
    }

    fn functions(&mut self) {
        // Sum bit by bit: btr counts the ones among the carry, X and Y; its
        // low bit goes to Z and its high bit carries through adr. X and Y are
        // the function's own copies, so only Z is rolled back into place.
        self.function(
            "add",
            &[("X", In), ("Y", In), ("Z", Out)],
            "ONE ZERO add_ctr adr btr",
            "
            .copy ONE add_ctr
            .copy ZERO adr
            begin: .copy ZERO btr
            .testL adr testx inctestx
            inctestx: .inc btr
            testx: .testL X testy inctesty
            inctesty: .inc btr
            testy: .testL Y testz inctestz
            inctestz: .inc btr
            testz: btr Z
            btr'1 adr'1
            .testH add_ctr rollcont rollback
            rollcont: .shiftL add_ctr
            .rollR adr
            .rollR X
            .rollR Y
            .rollR Z
            0 0 begin
            rollback: .rollR Z
            ",
        );
        self.function(
            "sub",
            &[("X", In), ("Y", In), ("Z", Out)],
            "",
            "
            .inv Y
            .inc Y
            .add X Y Z
            ",
        );
        self.function(
            "mul",
            &[("X", In), ("Y", In), ("Z", Out)],
            "ZERO",
            "
            .copy ZERO Z
            begin: .ifzero X End L1
            L1: .testL X next L2
            L2: .add Z Y Z
            next: .shiftR X
            .shiftL Y
            0 0 begin
            ",
        );
        self.function(
            "div",
            &[("X", In), ("Y", In), ("Z", Out), ("R", Out)],
            "ZERO ONE",
            "
            .copy ZERO Z
            .testH X L1 End
            L1: .testH Y L2 End
            L2: .ifzero Y End begin
            begin: .iflt X Y L3 L4
            L3: .copy X R
            0 0 End
            L4: .copy Y b1
            .copy ONE i1
            next: .copy b1 bp
            .copy i1 ip
            .shiftL b1
            .shiftL i1
            .iflt X b1 rec L5
            rec: .sub X bp X
            .add Z ip Z
            0 0 begin
            L5: .testH b1 next End
            b1:0 bp:0 i1:0 ip:0
            ",
        );
        self.function(
            "deref",
            &[("P", In), ("X", Out)],
            "ONE deref_ctr",
            "
            .copy ONE deref_ctr
            .copy P A
            .copy L B
            begin: A:0 B:0
            .testH deref_ctr next End
            next: .shiftL deref_ctr
            .inc A
            .inc B
            0 0 begin
            L:X
            ",
        );
        self.function(
            "toref",
            &[("Z", In), ("P", In)],
            "ONE toref_ctr",
            "
            .copy ONE toref_ctr
            .copy L A
            .copy P B
            begin: A:0 B:0
            .testH toref_ctr next End
            next: .shiftL toref_ctr
            .inc A
            .inc B
            0 0 begin
            L:Z
            ",
        );
        let digits = vec!["0"; prn_digits(WordSpec::new(self.ws).expect("valid spec"))].join(" ");
        self.function(
            "prn",
            &[("X", In)],
            "WS",
            &format!(
                "
                .testH X begin negate
                negate: .inv X
                .inc X
                .out minus
                begin: .div X ten X Z
                .toref Z p
                .add p WS p
                .ifzero X print begin
                print: .sub p WS p
                .deref p Z
                .add Z d0 Z
                .out Z
                .ifeq p q End print
                Z:0 d0:48 ten:10
                p:A q:A minus:45
                A:{digits}
                "
            ),
        );
    }

    fn cells(&mut self) {
        for (name, value) in LIBRARY_CELLS {
            writeln!(self.out, ":{name}:{value}").unwrap();
        }
    }
}

#[cfg(test)]
mod tests;
