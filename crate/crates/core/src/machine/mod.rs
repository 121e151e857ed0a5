//! The bit-copying machine.
//!
//! Every instruction is three words `A B C` at the instruction pointer: copy
//! the bit addressed by `A` to the bit addressed by `B`, then jump to `C`.
//! `C` is fetched only after the copy, so an instruction can rewrite its own
//! jump target. The all-ones word doubles as the halt target (as `C`), the
//! input stream (as `A`) and the output stream (as `B`).

mod io;
mod memory;

use std::io::{Read, Write};

use thiserror::Error;

use crate::object::ObjectProgram;
use crate::word::WordSpec;

pub use io::BitIo;
pub use memory::BitMemory;

#[derive(Debug, Error)]
pub enum MachineError {
    #[error("memory limit exceeded writing bit {addr}")]
    MemoryLimit { addr: u64 },
    #[error("input exhausted")]
    InputExhausted,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What to do when the program reads past the end of input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EofPolicy {
    #[default]
    Halt,
    FeedZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunLimits {
    pub max_steps: u64,
    pub max_memory_bits: u64,
    pub eof_policy: EofPolicy,
}

impl RunLimits {
    pub const DEFAULT_MAX_STEPS: u64 = 10_000_000_000;
    pub const DEFAULT_MAX_MEMORY_BITS: u64 = 1 << 26;

    pub fn with_max_steps(self, max_steps: u64) -> Self {
        RunLimits { max_steps, ..self }
    }
}

impl Default for RunLimits {
    fn default() -> Self {
        RunLimits {
            max_steps: Self::DEFAULT_MAX_STEPS,
            max_memory_bits: Self::DEFAULT_MAX_MEMORY_BITS,
            eof_policy: EofPolicy::Halt,
        }
    }
}

/// The three operands of one instruction, as fetched before the copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instruction {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Running,
    Halted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Halted,
    StepLimit,
    MemoryLimit,
    InputExhausted,
}

impl RunStatus {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Halted => 0,
            RunStatus::StepLimit => 2,
            RunStatus::MemoryLimit => 3,
            RunStatus::InputExhausted => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunResult {
    pub status: RunStatus,
    pub steps: u64,
    pub peak_memory_bits: u64,
    pub discarded_output_bits: u8,
    pub output_bytes: u64,
}

/// One executed step, as reported to a trace sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepRecord {
    pub ip: u64,
    pub a: u64,
    pub b: u64,
    pub bit: bool,
    /// Jump target, read after the copy.
    pub c: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    mem: BitMemory,
    ip: u64,
    steps: u64,
    halted: bool,
}

impl Machine {
    pub fn new(mem: BitMemory) -> Self {
        Machine {
            mem,
            ip: 0,
            steps: 0,
            halted: false,
        }
    }

    pub fn load(obj: &ObjectProgram, limits: &RunLimits) -> Result<Self, MachineError> {
        let mem = BitMemory::from_words(obj.spec, &obj.words, limits.max_memory_bits)?;
        Ok(Machine::new(mem))
    }

    pub fn spec(&self) -> WordSpec {
        self.mem.spec()
    }

    pub fn memory(&self) -> &BitMemory {
        &self.mem
    }

    pub fn memory_mut(&mut self) -> &mut BitMemory {
        &mut self.mem
    }

    pub fn ip(&self) -> u64 {
        self.ip
    }

    pub fn set_ip(&mut self, ip: u64) {
        self.ip = ip;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    /// Operands at the instruction pointer, ignoring any self-modification
    /// the copy might perform.
    pub fn fetch(&self) -> Instruction {
        let ws = u64::from(self.spec().word_size());
        Instruction {
            a: self.mem.read_word(self.ip),
            b: self.word_after(self.ip, ws),
            c: self.word_after(self.ip, 2 * ws),
        }
    }

    #[inline]
    fn word_after(&self, base: u64, offset: u64) -> u64 {
        base.checked_add(offset)
            .map_or(0, |addr| self.mem.read_word(addr))
    }

    /// Executes one instruction.
    ///
    /// On error the step does not count and the instruction pointer is left
    /// on the failing instruction.
    #[inline]
    pub fn step<R: Read, W: Write>(
        &mut self,
        io: &mut BitIo<R, W>,
        limits: &RunLimits,
    ) -> Result<StepStatus, MachineError> {
        self.step_record(io, limits).map(|(status, _)| status)
    }

    #[inline]
    fn step_record<R: Read, W: Write>(
        &mut self,
        io: &mut BitIo<R, W>,
        limits: &RunLimits,
    ) -> Result<(StepStatus, StepRecord), MachineError> {
        let neg_one = self.spec().neg_one();
        let ws = u64::from(self.spec().word_size());
        let ip = self.ip;
        let a = self.mem.read_word(ip);
        let b = self.word_after(ip, ws);
        let bit = if a == neg_one {
            io.read_bit(limits.eof_policy)?
        } else {
            self.mem.get_bit(a)
        };
        if b == neg_one {
            io.write_bit(bit)?;
        } else {
            self.mem.set_bit(b, bit)?;
        }
        let c = self.word_after(ip, 2 * ws);
        self.steps += 1;
        let status = if c == neg_one {
            self.halted = true;
            StepStatus::Halted
        } else {
            self.ip = c;
            StepStatus::Running
        };
        Ok((status, StepRecord { ip, a, b, bit, c }))
    }

    /// Runs until halt or a limit, then drops any partial output byte.
    pub fn run<R: Read, W: Write>(
        &mut self,
        io: &mut BitIo<R, W>,
        limits: &RunLimits,
    ) -> std::io::Result<RunResult> {
        self.run_inner(io, limits, None)
    }

    /// Like [`Machine::run`], writing one `step ip a b bit c` line per step.
    pub fn run_traced<R: Read, W: Write>(
        &mut self,
        io: &mut BitIo<R, W>,
        limits: &RunLimits,
        trace: &mut dyn Write,
    ) -> std::io::Result<RunResult> {
        self.run_inner(io, limits, Some(trace))
    }

    fn run_inner<R: Read, W: Write>(
        &mut self,
        io: &mut BitIo<R, W>,
        limits: &RunLimits,
        mut trace: Option<&mut dyn Write>,
    ) -> std::io::Result<RunResult> {
        let status = loop {
            if self.halted {
                break RunStatus::Halted;
            }
            if self.steps >= limits.max_steps {
                break RunStatus::StepLimit;
            }
            let outcome = match trace.as_deref_mut() {
                None => self.step(io, limits),
                Some(sink) => self.step_record(io, limits).and_then(|(status, r)| {
                    writeln!(
                        sink,
                        "{} {} {} {} {} {}",
                        self.steps - 1,
                        r.ip,
                        r.a,
                        r.b,
                        u8::from(r.bit),
                        r.c
                    )?;
                    Ok(status)
                }),
            };
            match outcome {
                Ok(_) => {}
                Err(MachineError::MemoryLimit { .. }) => break RunStatus::MemoryLimit,
                Err(MachineError::InputExhausted) => break RunStatus::InputExhausted,
                Err(MachineError::Io(e)) => return Err(e),
            }
        };
        if let Some(sink) = trace {
            sink.flush()?;
        }
        let discarded_output_bits = io.finish()?;
        Ok(RunResult {
            status,
            steps: self.steps,
            peak_memory_bits: self.mem.len_bits(),
            discarded_output_bits,
            output_bytes: io.bytes_out(),
        })
    }
}

#[cfg(test)]
mod tests;
