//! Criterion benchmarks for the emulator and assembler; see `benches/`.
