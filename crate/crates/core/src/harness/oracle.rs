//! Host-arithmetic oracles. Each works on raw words reduced to the word size
//! and never looks at the machine or the library.

use crate::word::WordSpec;

/// What a driver run is compared on.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    /// Values of the driver's `RES0..RESn` cells, in order.
    pub cells: Vec<u64>,
    /// Bytes written to the output stream.
    pub output: Vec<u8>,
}

impl Outcome {
    pub fn cells(cells: Vec<u64>) -> Self {
        Outcome {
            cells,
            output: Vec::new(),
        }
    }

    pub fn bytes(output: Vec<u8>) -> Self {
        Outcome {
            cells: Vec::new(),
            output,
        }
    }
}

/// Branch probes write 1 when the first target is taken and 2 for the second.
fn branch(first: bool) -> Outcome {
    Outcome::cells(vec![if first { 1 } else { 2 }])
}

fn signed(spec: WordSpec, v: u64) -> i128 {
    let v = v & spec.mask();
    if v & spec.sign_bit() != 0 {
        i128::from(v) - (1i128 << spec.word_size())
    } else {
        i128::from(v)
    }
}

fn wrap(spec: WordSpec, v: i128) -> u64 {
    (v.rem_euclid(1i128 << spec.word_size())) as u64
}

/// Expected outcome of `name` on `inputs`. `bit` is the static bit index of
/// `test` and `jump01`. Returns `None` for names without an oracle.
pub fn expected(spec: WordSpec, name: &str, inputs: &[u64], bit: Option<u32>) -> Option<Outcome> {
    let ws = spec.word_size();
    let mask = spec.mask();
    let x = inputs.first().copied().unwrap_or(0) & mask;
    let y = inputs.get(1).copied().unwrap_or(0) & mask;
    let top = ws - 1;
    let one = |v: u64| Outcome::cells(vec![v & mask]);
    Some(match name {
        "copy" => one(x),
        "shiftL" => one(x << 1),
        "shiftR" => one(x >> 1),
        "rollL" => one((x << 1) | (x >> top)),
        "rollR" => one((x >> 1) | ((x & 1) << top)),
        "inc" => one(wrap(spec, i128::from(x) + 1)),
        "inv" => one(!x),
        "add" => one(wrap(spec, i128::from(x) + i128::from(y))),
        "sub" => one(wrap(spec, i128::from(x) - i128::from(y))),
        "mul" => one(wrap(spec, i128::from(x) * i128::from(y))),
        "div" => Outcome::cells(vec![x / y, x % y]),
        "test" | "jump01" => branch((x >> bit?) & 1 == 0),
        "testL" => branch(x & 1 == 0),
        "testH" => branch(x >> top == 0),
        "ifzero" => branch(x == 0),
        "ifeq" => branch(x == y),
        "iflt" => branch(signed(spec, x) < signed(spec, y)),
        "deref" => one(x),
        "toref" => Outcome::cells(vec![x, x]),
        "out" => Outcome::bytes(vec![x as u8]),
        "in" => one((x & !0xff) | (y & 0xff)),
        "prn" => Outcome::bytes(signed(spec, x).to_string().into_bytes()),
        "halt" => Outcome::default(),
        _ => return None,
    })
}

/// Whether `inputs` lie in the domain the macro is specified for.
pub fn in_domain(spec: WordSpec, name: &str, inputs: &[u64]) -> bool {
    let x = inputs.first().map_or(0, |&v| signed(spec, v));
    let y = inputs.get(1).map_or(0, |&v| signed(spec, v));
    let min = -(1i128 << (spec.word_size() - 1));
    let max = -min - 1;
    match name {
        "mul" => x >= 0,
        "div" => x >= 0 && y > 0,
        "iflt" | "ifeq" => (min..=max).contains(&(x - y)),
        "prn" => x != min,
        _ => true,
    }
}
