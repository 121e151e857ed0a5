use crate::machine::RunStatus;

/// A shipped program with its input and byte-exact expected output at word
/// size 32.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleProgram {
    pub name: &'static str,
    pub source: &'static str,
    pub input: Vec<u8>,
    pub expected_output: Vec<u8>,
    pub expected_status: RunStatus,
}

fn halting(name: &'static str, source: &'static str, expected: &[u8]) -> SampleProgram {
    SampleProgram {
        name,
        source,
        input: Vec::new(),
        expected_output: expected.to_vec(),
        expected_status: RunStatus::Halted,
    }
}

pub fn samples() -> Vec<SampleProgram> {
    let all_bytes: Vec<u8> = (0..=255).collect();
    vec![
        halting(
            "hello",
            include_str!("../../samples/hello.asm"),
            include_bytes!("../../samples/hello.out"),
        ),
        halting(
            "hi",
            include_str!("../../samples/hi.asm"),
            include_bytes!("../../samples/hi.out"),
        ),
        halting(
            "factorial",
            include_str!("../../samples/factorial.asm"),
            include_bytes!("../../samples/factorial.out"),
        ),
        SampleProgram {
            name: "echo",
            source: include_str!("../../samples/echo.asm"),
            input: all_bytes.clone(),
            expected_output: all_bytes,
            expected_status: RunStatus::InputExhausted,
        },
        halting(
            "printnum",
            include_str!("../../samples/printnum.asm"),
            include_bytes!("../../samples/printnum.out"),
        ),
    ]
}

pub fn sample(name: &str) -> Option<SampleProgram> {
    samples().into_iter().find(|s| s.name == name)
}
