use proptest::prelude::*;

use super::*;

fn spec(ws: u32) -> WordSpec {
    WordSpec::new(ws).unwrap()
}

fn machine(ws: u32, words: &[u64]) -> Machine {
    Machine::new(BitMemory::from_words(spec(ws), words, 1 << 20).unwrap())
}

fn no_io() -> BitIo<&'static [u8], Vec<u8>> {
    BitIo::new(&[][..], Vec::new())
}

#[test]
fn two_instruction_example() {
    // A'0 B'1 A / A:18 B:7 0, assembled by hand at word size 8.
    let mut m = machine(8, &[24, 33, 24, 18, 7, 0]);
    let status = m.step(&mut no_io(), &RunLimits::default()).unwrap();
    assert_eq!(status, StepStatus::Running);
    assert_eq!(m.memory().read_word(32), 5);
    assert_eq!(m.ip(), 24);
    assert_eq!(m.steps(), 1);
}

#[test]
fn self_copy_loops_forever() {
    let mut m = machine(8, &[0, 0, 0]);
    let before = m.memory().clone();
    let r = m
        .run(&mut no_io(), &RunLimits::default().with_max_steps(1000))
        .unwrap();
    assert_eq!(r.status, RunStatus::StepLimit);
    assert_eq!(r.steps, 1000);
    assert_eq!(m.ip(), 0);
    assert_eq!(m.memory(), &before);
}

#[test]
fn empty_program_spins_at_zero() {
    let obj = ObjectProgram::new(spec(32), vec![]);
    let mut m = Machine::load(&obj, &RunLimits::default()).unwrap();
    assert_eq!(m.memory().len_bits(), 0);
    let r = m
        .run(&mut no_io(), &RunLimits::default().with_max_steps(10))
        .unwrap();
    assert_eq!(r.status, RunStatus::StepLimit);
    assert_eq!(m.ip(), 0);
    // Copying bit 0 onto itself allocates the first word.
    assert_eq!(r.peak_memory_bits, 32);
}

#[test]
fn halts_when_c_is_all_ones() {
    let obj = ObjectProgram::new(spec(8), vec![0, 0, 255]);
    let mut m = Machine::load(&obj, &RunLimits::default()).unwrap();
    let r = m.run(&mut no_io(), &RunLimits::default()).unwrap();
    assert_eq!(r.status, RunStatus::Halted);
    assert_eq!(r.steps, 1);
    assert!(m.is_halted());
}

#[test]
fn load_places_words_at_cells() {
    let obj = ObjectProgram::new(spec(8), vec![24, 33, 24, 18, 7, 0]);
    let m = Machine::load(&obj, &RunLimits::default()).unwrap();
    assert_eq!(m.memory().read_word(24), 18);
    assert_eq!(m.ip(), 0);
    assert_eq!(m.steps(), 0);

    let limits = RunLimits {
        max_memory_bits: 40,
        ..RunLimits::default()
    };
    assert!(matches!(
        Machine::load(&obj, &limits),
        Err(MachineError::MemoryLimit { .. })
    ));
}

/// Word-size-8 program whose first instruction copies a 1 into bit k (3) of
/// its own C operand. C holds 32 (cell 4); with bit 3 set it becomes 40
/// (cell 5). `patch_c` selects whether B targets C or a scratch cell.
fn ordering_program(patch_c: bool) -> Vec<u64> {
    let b = if patch_c { 2 * 8 + 3 } else { 3 * 8 };
    vec![56, b, 32, 0, 0, 0, 0, 1]
}

#[test]
fn jump_target_is_read_after_the_copy() {
    let mut m = machine(8, &ordering_program(true));
    m.step(&mut no_io(), &RunLimits::default()).unwrap();
    assert_eq!(m.ip(), 40);
    assert_eq!(m.memory().read_word(16), 40);

    let mut m = machine(8, &ordering_program(false));
    m.step(&mut no_io(), &RunLimits::default()).unwrap();
    assert_eq!(m.ip(), 32);
    assert_eq!(m.memory().read_word(24), 1);
}

#[test]
fn fetch_reports_operands_before_the_copy() {
    let m = machine(8, &ordering_program(true));
    assert_eq!(m.fetch(), Instruction { a: 56, b: 19, c: 32 });
}

/// Word-size-16 echo: eight `-1 X'i` copies, eight `X'i -1` copies, halt.
fn echo_program() -> Vec<u64> {
    let ws = 16u64;
    let x = 17 * 3 * ws;
    let mut words = Vec::new();
    for i in 0..8 {
        let next = (words.len() as u64 + 3) * ws;
        words.extend([0xFFFF, x + i, next]);
    }
    for i in 0..8 {
        let next = (words.len() as u64 + 3) * ws;
        words.extend([x + i, 0xFFFF, next]);
    }
    words.extend([0, 0, 0xFFFF]);
    words.push(0xAB00);
    words
}

#[test]
fn echo_round_trips_every_byte() {
    for byte in 0..=255u8 {
        let mut m = machine(16, &echo_program());
        let input = [byte];
        let mut io = BitIo::new(&input[..], Vec::new());
        let r = m.run(&mut io, &RunLimits::default()).unwrap();
        assert_eq!(r.status, RunStatus::Halted);
        assert_eq!(r.steps, 17);
        assert_eq!(r.output_bytes, 1);
        assert_eq!(r.discarded_output_bits, 0);
        assert_eq!(io.into_output(), vec![byte]);
        // Only the low 8 bits of the cell are touched.
        let x = m.memory().read_word(17 * 3 * 16);
        assert_eq!(x, 0xAB00 | u64::from(byte));
    }
}

#[test]
fn input_exhaustion() {
    let mut m = machine(16, &echo_program());
    let r = m.run(&mut no_io(), &RunLimits::default()).unwrap();
    assert_eq!(r.status, RunStatus::InputExhausted);
    assert_eq!(r.steps, 0);

    let mut m = machine(16, &echo_program());
    let limits = RunLimits {
        eof_policy: EofPolicy::FeedZero,
        ..RunLimits::default()
    };
    let mut io = no_io();
    let r = m.run(&mut io, &limits).unwrap();
    assert_eq!(r.status, RunStatus::Halted);
    assert_eq!(io.into_output(), vec![0]);
}

#[test]
fn input_forwards_straight_to_output() {
    // -1 -1 next, eight times, then halt.
    let mut words = Vec::new();
    for i in 0..8u64 {
        words.extend([0xFFFF, 0xFFFF, (i + 1) * 3 * 16]);
    }
    words.extend([0, 0, 0xFFFF]);
    let mut m = machine(16, &words);
    let mut io = BitIo::new(&b"Z"[..], Vec::new());
    let r = m.run(&mut io, &RunLimits::default()).unwrap();
    assert_eq!(r.status, RunStatus::Halted);
    assert_eq!(io.into_output(), b"Z");
}

#[test]
fn partial_output_is_discarded_and_counted() {
    let words = vec![0, 255, 24, 0, 255, 48, 0, 0, 255];
    let mut m = machine(8, &words);
    let mut io = no_io();
    let r = m.run(&mut io, &RunLimits::default()).unwrap();
    assert_eq!(r.status, RunStatus::Halted);
    assert_eq!(r.discarded_output_bits, 2);
    assert_eq!(r.output_bytes, 0);
    assert!(io.into_output().is_empty());
}

#[test]
fn memory_limit_stops_the_run() {
    // Copy bit 0 to a far address.
    let mut m = Machine::new(BitMemory::from_words(spec(16), &[0, 60000, 0], 1024).unwrap());
    let r = m.run(&mut no_io(), &RunLimits::default()).unwrap();
    assert_eq!(r.status, RunStatus::MemoryLimit);
    assert_eq!(r.steps, 0);
}

#[test]
fn trace_lines() {
    let mut m = machine(8, &[24, 33, 24, 18, 7, 0]);
    let mut trace = Vec::new();
    let r = m
        .run_traced(&mut no_io(), &RunLimits::default().with_max_steps(2), &mut trace)
        .unwrap();
    assert_eq!(r.steps, 2);
    let text = String::from_utf8(trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, ["0 0 24 33 0 24", "1 24 18 5 0 0"]);
}

fn bits_of(mem: &BitMemory, upto: u64) -> Vec<bool> {
    (0..upto).map(|i| mem.get_bit(i)).collect()
}

proptest! {
    #[test]
    fn at_most_one_bit_changes_per_step(words in prop::collection::vec(0u64..256, 3..32), input in any::<Vec<u8>>()) {
        let limits = RunLimits { eof_policy: EofPolicy::FeedZero, ..RunLimits::default() };
        let mut m = machine(8, &words);
        let mut io = BitIo::new(&input[..], Vec::new());
        for _ in 0..64 {
            let before = m.memory().clone();
            let ins = m.fetch();
            let steps = m.steps();
            if m.step(&mut io, &limits).unwrap() == StepStatus::Halted {
                break;
            }
            prop_assert_eq!(m.steps(), steps + 1);
            let span = 256;
            let old = bits_of(&before, span);
            let new = bits_of(m.memory(), span);
            let changed: Vec<usize> = (0..span as usize).filter(|&i| old[i] != new[i]).collect();
            prop_assert!(changed.len() <= 1);
            if ins.b == 255 {
                prop_assert!(changed.is_empty());
            } else if let Some(&i) = changed.first() {
                prop_assert_eq!(i as u64, ins.b);
            }
        }
    }

    #[test]
    fn runs_are_deterministic(words in prop::collection::vec(0u64..65536, 3..64), input in any::<Vec<u8>>()) {
        let limits = RunLimits { max_steps: 5000, max_memory_bits: 1 << 14, eof_policy: EofPolicy::FeedZero };
        let go = || {
            let mut m = Machine::new(BitMemory::from_words(spec(16), &words, 1 << 14).unwrap());
            let mut io = BitIo::new(&input[..], Vec::new());
            let r = m.run(&mut io, &limits).unwrap();
            (r, io.into_output(), m)
        };
        prop_assert_eq!(go(), go());
    }
}
