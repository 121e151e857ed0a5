use super::contract::{direct_dependencies, library_macros};
use super::*;
use crate::assembler::Assembler;
use crate::machine::{BitIo, Machine, RunLimits, RunStatus};

fn spec(ws: u32) -> WordSpec {
    WordSpec::new(ws).unwrap()
}

fn body_of<'a>(lib: &'a str, name: &str) -> Vec<&'a str> {
    let head = format!(".def {name} ");
    let head_bare = format!(".def {name}");
    let mut lines = lib.lines().skip_while(|l| !(l.starts_with(&head) || *l == head_bare));
    lines.next().expect("definition present");
    lines.take_while(|l| *l != ".end").collect()
}

#[test]
fn copy_has_one_line_per_bit() {
    let lib = gen_lib(spec(8));
    let body = body_of(&lib, "copy");
    assert_eq!(body.len(), 8);
    assert_eq!(body[0], "X'0 Y'0");
    assert_eq!(body[7], "X'w Y'w");
}

#[test]
fn jump01_has_a_pair_per_bit() {
    let lib = gen_lib(spec(32));
    let body = body_of(&lib, "jump01");
    assert_eq!(body.len(), 64);
    assert!(body.iter().step_by(2).all(|l| *l == "A'b 2?'k"));
    assert_eq!(body[1], "0 J'0");
    assert_eq!(body[61], "30 J'30");
    assert_eq!(*body.last().unwrap(), "w J'w J:0");
}

#[test]
fn generation_is_deterministic_and_cached() {
    for ws in [8, 16, 32, 64] {
        assert_eq!(gen_lib(spec(ws)), gen_lib(spec(ws)));
        assert_eq!(&*library_text(spec(ws)), gen_lib(spec(ws)));
    }
    assert_ne!(gen_lib(spec(16)), gen_lib(spec(32)));
}

#[test]
fn empty_program_pulls_in_nothing() {
    for ws in [8, 16, 32, 64] {
        let a = Assembler::new(spec(ws)).assemble_str("Z0:0 Z1:0\n.include lib\n").unwrap();
        assert_eq!(a.object.words, [0, 0, spec(ws).cell_addr(3)]);
        assert!(a.warnings.is_empty(), "{:?}", a.warnings);
    }
}

#[test]
fn every_function_assembles_alone() {
    let calls = [
        ".add A B C",
        ".sub A B C",
        ".mul A B C",
        ".div A B C D",
        ".deref A B",
        ".toref A B",
        ".prn A",
        ".ifeq A B -1 -1",
        ".iflt A B -1 -1",
        ".ifzero A -1 -1",
        ".inv A",
        ".inc A",
    ];
    for ws in [16, 32] {
        for call in calls {
            // div and prn outgrow the 16-bit address space.
            if ws == 16 && (call.starts_with(".div") || call.starts_with(".prn")) {
                continue;
            }
            let src = format!("Z0:0 Z1:0\n{call}\n.halt\nA:0 B:0 C:0 D:0\n.include lib\n");
            let a = Assembler::new(spec(ws)).assemble_str(&src);
            let a = a.unwrap_or_else(|e| panic!("{call} at {ws}: {e}"));
            assert!(a.warnings.is_empty(), "{call}: {:?}", a.warnings);
        }
    }
}

#[test]
fn oversized_programs_warn() {
    let src = "Z0:0 Z1:0\n.div A B C D\n.halt\nA:0 B:0 C:0 D:0\n.include lib\n";
    let a = Assembler::new(spec(16)).assemble_str(src).unwrap();
    assert!(a.warnings.iter().any(|w| w.message.contains("addresses wrap")));
}

#[test]
fn dead_code_is_left_out() {
    let a = Assembler::new(spec(32))
        .assemble_str(include_str!("../../samples/hi.asm"))
        .unwrap();
    for f in ["add_f", "sub_f", "mul_f", "div_f", "prn_f", "deref_f", "toref_f", "ZERO", "ONE"] {
        assert_eq!(a.object.symbol(f), None, "{f} present");
    }

    let a = Assembler::new(spec(32))
        .assemble_str("Z0:0 Z1:0\n.sub A A A\n.halt\nA:0\n.include lib\n")
        .unwrap();
    for f in ["sub_f", "sub_f_X", "sub_f_RET", "add_f", "inc_ctr", "inv_ctr", "ONE", "ZERO"] {
        assert!(a.object.symbol(f).is_some(), "{f} missing");
    }
    for f in ["div_f", "mul_f", "prn_f", "deref_f", "toref_f", "WS"] {
        assert_eq!(a.object.symbol(f), None, "{f} present");
    }
}

#[test]
fn layers_only_point_down() {
    let macros = library_macros(spec(16));
    for c in contracts() {
        assert!(macros.contains_key(c.name), "{} not generated", c.name);
        if c.kind == Kind::Function {
            assert!(macros.contains_key(&format!("{}_f_def", c.name)));
        }
        for d in direct_dependencies(&macros, c.name) {
            let dep = contract(&d).unwrap_or_else(|| panic!("{} uses unlisted {d}", c.name));
            assert!(dep.layer < c.layer, "{} (layer {}) uses {d} (layer {})", c.name, c.layer, dep.layer);
        }
    }
    // Every generated macro is either public or the body of a function.
    for name in macros.keys() {
        let public = name.strip_suffix("_f_def").unwrap_or(name);
        assert!(contract(public).is_some(), "{name} has no contract");
    }
}

#[test]
fn clobber_sets_follow_dependencies() {
    let s = spec(32);
    let inc = clobbers(s, "inc");
    assert_eq!(inc.into_iter().collect::<Vec<_>>(), ["SEL", "TMP", "Z0", "Z1", "inc_ctr", "inc_f_RET", "inc_f_X"]);
    assert!(clobbers(s, "copy").is_empty());
    let sub = clobbers(s, "sub");
    for c in ["sub_f_X", "add_f_Z", "inv_ctr", "inc_ctr", "adr"] {
        assert!(sub.contains(c), "{c}");
    }
    assert!(!sub.contains("div_f_X"));
}

fn run(ws: u32, src: &str, input: &[u8]) -> (RunStatus, Vec<u8>, u64) {
    let obj = Assembler::new(spec(ws)).assemble_str(src).unwrap().object;
    let limits = RunLimits::default().with_max_steps(100_000_000);
    let mut m = Machine::load(&obj, &limits).unwrap();
    let mut io = BitIo::new(input, Vec::new());
    let r = m.run(&mut io, &limits).unwrap();
    (r.status, io.into_output(), r.steps)
}

#[test]
fn small_samples_run() {
    for name in ["hi", "hello", "echo"] {
        let s = sample(name).unwrap();
        let (status, out, _) = run(32, s.source, &s.input);
        assert_eq!(status, s.expected_status, "{name}");
        assert_eq!(out, s.expected_output, "{name}");
    }
}

#[test]
fn samples_follow_program_shape() {
    for s in samples() {
        let lines: Vec<&str> = s.source.lines().filter(|l| !l.trim().is_empty()).collect();
        assert_eq!(lines.first().map(|l| l.trim()), Some("Z0:0 Z1:0"), "{}", s.name);
        assert_eq!(lines.last().map(|l| l.trim()), Some(".include lib"), "{}", s.name);
    }
}

#[test]
fn prn_prints_small_values() {
    for v in [0i64, 9, 10, -1, -42, 1234] {
        let src = format!("Z0:0 Z1:0\n.prn X\n.halt\nX:{v}\n.include lib\n");
        let (status, out, _) = run(32, &src, &[]);
        assert_eq!(status, RunStatus::Halted);
        assert_eq!(String::from_utf8(out).unwrap(), v.to_string());
    }
}
