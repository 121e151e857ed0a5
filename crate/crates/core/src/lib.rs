//! Toolchain for a one-instruction machine whose only operation copies a
//! single bit and jumps.
//!
//! - [`machine`]: the bit-addressed emulator with stream I/O.
//! - [`assembler`]: macro assembler with conditional inclusion.
//! - [`stdlib`]: the generated standard library and sample programs.
//! - [`harness`]: differential tests of library macros against host oracles.

pub mod assembler;
pub mod harness;
pub mod machine;
pub mod object;
pub mod stdlib;
pub mod word;

pub use assembler::{AsmError, Assembler, Assembly, IncludeResolver, Warning};
pub use machine::{BitIo, BitMemory, EofPolicy, Machine, MachineError, RunLimits, RunResult, RunStatus};
pub use object::ObjectProgram;
pub use word::WordSpec;
