use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bbj_core::harness::{self, SelftestOptions};
use bbj_core::{
    stdlib, AsmError, Assembler, Assembly, BitIo, EofPolicy, IncludeResolver, Machine, ObjectProgram, RunLimits,
    WordSpec,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bbj", version, about = "Assembler and emulator for the bit-copying machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a source file into an object file.
    Asm {
        source: PathBuf,
        #[command(flatten)]
        asm: AsmOpts,
        /// Object path, `-` for standard output. Defaults to the source with
        /// extension `obj`.
        #[arg(short = 'o')]
        output: Option<PathBuf>,
        /// Also write `name address` symbols next to the object (`.sym`).
        #[arg(long)]
        symbols: bool,
    },
    /// Run an object file, or assemble and run a source file.
    Run {
        program: PathBuf,
        #[command(flatten)]
        asm: AsmOpts,
        /// Print `step ip a b bit c` per executed step to stderr.
        #[arg(long)]
        trace: bool,
        /// Print step and memory counters to stderr.
        #[arg(long)]
        stats: bool,
        #[arg(long, default_value_t = RunLimits::DEFAULT_MAX_STEPS)]
        max_steps: u64,
        #[arg(long, default_value_t = RunLimits::DEFAULT_MAX_MEMORY_BITS)]
        max_mem_bits: u64,
        /// Read zero bits past the end of input instead of stopping.
        #[arg(long)]
        eof_zero: bool,
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long = "out")]
        output: Option<PathBuf>,
    },
    /// Print the source after macro expansion and padding.
    Expand {
        source: PathBuf,
        #[command(flatten)]
        asm: AsmOpts,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Print the generated standard library.
    Genlib {
        /// Word size; same as --word-size.
        size: Option<u32>,
        #[arg(long, value_parser = parse_word_size)]
        word_size: Option<WordSpec>,
        #[arg(short = 'o')]
        output: Option<PathBuf>,
    },
    /// Run the differential suites against the host oracles.
    Selftest {
        #[arg(long = "macro")]
        macro_name: Vec<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Restrict to one word size (default: 16 and 32).
        #[arg(long, value_parser = parse_word_size)]
        word_size: Option<WordSpec>,
        /// Random cases per suite.
        #[arg(long)]
        cases: Option<usize>,
    },
}

#[derive(Args)]
struct AsmOpts {
    #[arg(long, default_value = "32", value_parser = parse_word_size)]
    word_size: WordSpec,
    /// Include directory, searched after the including file's directory.
    #[arg(short = 'I')]
    include: Vec<PathBuf>,
}

impl AsmOpts {
    fn assembler(&self, max_mem_bits: u64) -> Assembler {
        let mut r = IncludeResolver::new(Some(self.word_size));
        for p in &self.include {
            r = r.with_search_path(p);
        }
        Assembler::new(self.word_size)
            .with_resolver(r.with_env_path())
            .with_max_memory_bits(max_mem_bits)
    }

    fn assemble(&self, path: &Path, max_mem_bits: u64) -> Result<Assembly, AsmError> {
        let a = self.assembler(max_mem_bits).assemble_file(path)?;
        for w in &a.warnings {
            eprintln!("{w}");
        }
        Ok(a)
    }
}

fn parse_word_size(s: &str) -> Result<WordSpec, String> {
    let n: u32 = s.parse().map_err(|e| format!("{e}"))?;
    WordSpec::new(n).map_err(|e| e.to_string())
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Asm(#[from] AsmError),
    #[error(transparent)]
    Object(#[from] bbj_core::object::ObjectError),
    #[error(transparent)]
    Machine(#[from] bbj_core::MachineError),
    #[error("{0}: {1}")]
    Io(String, io::Error),
    #[error("{0}")]
    Other(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::Io(path.display().to_string(), e)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) if p != Path::new("-") => fs::write(p, text).map_err(io_err(p)),
        _ => io::stdout()
            .write_all(text.as_bytes())
            .map_err(io_err(Path::new("<stdout>"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("bbj: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Asm {
            source,
            asm,
            output,
            symbols,
        } => {
            let a = asm.assemble(&source, RunLimits::DEFAULT_MAX_MEMORY_BITS)?;
            let out = output.unwrap_or_else(|| source.with_extension("obj"));
            write_out(Some(&out), &a.object.to_object_text())?;
            if symbols {
                let sym = if out == Path::new("-") {
                    source.with_extension("sym")
                } else {
                    out.with_extension("sym")
                };
                write_out(Some(&sym), &a.object.to_symbol_text())?;
            }
            Ok(0)
        }
        Command::Run {
            program,
            asm,
            trace,
            stats,
            max_steps,
            max_mem_bits,
            eof_zero,
            input,
            output,
        } => {
            let limits = RunLimits {
                max_steps,
                max_memory_bits: max_mem_bits,
                eof_policy: if eof_zero { EofPolicy::FeedZero } else { EofPolicy::Halt },
            };
            run(&program, &asm, &limits, trace, stats, input.as_deref(), output.as_deref())
        }
        Command::Expand { source, asm, output } => {
            let text = asm.assembler(RunLimits::DEFAULT_MAX_MEMORY_BITS).expand_dump_file(&source)?;
            write_out(output.as_deref(), &text)?;
            Ok(0)
        }
        Command::Genlib {
            size,
            word_size,
            output,
        } => {
            let spec = match (size, word_size) {
                (Some(n), _) => WordSpec::new(n).map_err(|e| CliError::Other(e.to_string()))?,
                (None, Some(s)) => s,
                (None, None) => WordSpec::new(32).expect("32 is a valid word size"),
            };
            write_out(output.as_deref(), &stdlib::gen_lib(spec))?;
            Ok(0)
        }
        Command::Selftest {
            macro_name,
            seed,
            word_size,
            cases,
        } => selftest(macro_name, seed, word_size, cases),
    }
}

fn run(
    program: &Path,
    asm: &AsmOpts,
    limits: &RunLimits,
    trace: bool,
    stats: bool,
    input: Option<&Path>,
    output: Option<&Path>,
) -> Result<u8, CliError> {
    let text = fs::read_to_string(program).map_err(io_err(program))?;
    let obj = if ObjectProgram::looks_like_object(&text) {
        ObjectProgram::parse_object(&text)?
    } else {
        asm.assemble(program, limits.max_memory_bits)?.object
    };
    let mut machine = Machine::load(&obj, limits)?;

    let reader: Box<dyn Read> = match input {
        Some(p) => Box::new(io::BufReader::new(fs::File::open(p).map_err(io_err(p))?)),
        None => Box::new(io::stdin().lock()),
    };
    let writer: Box<dyn Write> = match output {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).map_err(io_err(p))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let mut bio = BitIo::new(reader, writer);
    let start = Instant::now();
    let result = if trace {
        let mut sink = BufWriter::new(io::stderr().lock());
        let r = machine.run_traced(&mut bio, limits, &mut sink);
        sink.flush().map_err(io_err(Path::new("<stderr>")))?;
        r
    } else {
        machine.run(&mut bio, limits)
    }
    .map_err(io_err(Path::new("<output>")))?;
    bio.into_output().flush().map_err(io_err(Path::new("<output>")))?;

    if stats {
        eprintln!(
            "status={:?} steps={} instructions={} peak_memory_bits={} output_bytes={} discarded_bits={} elapsed={:.3}s",
            result.status,
            result.steps,
            obj.instruction_count(),
            result.peak_memory_bits,
            result.output_bytes,
            result.discarded_output_bits,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(result.status.exit_code() as u8)
}

fn selftest(macros: Vec<String>, seed: u64, word_size: Option<WordSpec>, cases: Option<usize>) -> Result<u8, CliError> {
    let mut opts = SelftestOptions {
        macros,
        seed,
        cases,
        ..Default::default()
    };
    if let Some(s) = word_size {
        opts.word_sizes = vec![s.word_size()];
    }
    let sizes = opts.word_sizes.clone();
    let names: Vec<String> = if opts.macros.is_empty() {
        harness::MACROS.iter().map(|s| s.to_string()).collect()
    } else {
        opts.macros.clone()
    };
    let mut failed = false;
    let mut out = io::stdout().lock();
    let results = harness::selftest(&opts);
    let labels = sizes.iter().flat_map(|ws| names.iter().map(move |n| (n, ws)));
    for ((name, ws), r) in labels.zip(results) {
        let line = match r {
            Ok(rep) => {
                for f in &rep.failures {
                    eprintln!("{f}");
                }
                failed |= !rep.passed();
                rep.to_string()
            }
            Err(e) => {
                failed = true;
                format!("suite={name} ws={ws} seed={seed} cases=0 failures=1 error={e}")
            }
        };
        writeln!(out, "{line}").map_err(io_err(Path::new("<stdout>")))?;
    }
    Ok(u8::from(failed))
}
