//! `sfa` — compile regular expressions to simultaneous finite automata, match
//! inputs in parallel, and collect size and throughput statistics.
//!
//! Exit codes:
//!
//! | code | meaning                                            |
//! |------|----------------------------------------------------|
//! | 0    | success; for `match`, the input was accepted       |
//! | 1    | `match` rejected the input                         |
//! | 2    | syntax error or unsupported regex feature          |
//! | 3    | a state cap was exceeded                           |
//! | 4    | I/O failure                                        |
//! | 5    | no input could be generated for `bench`            |
//! | 64   | invalid command line                               |

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use memmap2::Mmap;

use sfa_regex::corpus::{self, BenchConfig, BenchError, InputSpec, StatsConfig, StatsSummary};
use sfa_regex::dot;
use sfa_regex::engine::run_engine;
use sfa_regex::{
    compile, make_chunk_plan, substring_pattern, ChunkPlan, CompileError, Compiled, EngineKind, Limits, Reduction,
    RegexError, DEFAULT_STATE_CAP,
};

const EXIT_REJECT: u8 = 1;
const EXIT_SYNTAX: u8 = 2;
const EXIT_CAPACITY: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_GENERATION: u8 = 5;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "sfa",
    version,
    about = "Parallel regular expression matching with simultaneous automata"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build every automaton for a pattern and print their sizes.
    Compile(CompileArgs),
    /// Decide whether an input, as a whole, is in the pattern's language.
    Match(MatchArgs),
    /// Automaton sizes for every pattern of a list file, as CSV.
    Stats(StatsArgs),
    /// Time the matching engines on one pattern, as CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct PatternArgs {
    /// The regular expression, taken verbatim.
    #[arg(required_unless_present = "pattern_file", conflicts_with = "pattern_file")]
    pattern: Option<String>,
    /// Read the pattern from a file; one trailing newline is dropped.
    #[arg(long, env = "SFA_PATTERN_FILE")]
    pattern_file: Option<PathBuf>,
    /// Match anywhere in the input, by compiling `.*(PATTERN).*`.
    #[arg(long, env = "SFA_SUBSTRING")]
    substring: bool,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, env = "SFA_MAX_NFA_STATES", default_value_t = DEFAULT_STATE_CAP, value_parser = at_least_one)]
    max_nfa_states: usize,
    #[arg(long, env = "SFA_MAX_DFA_STATES", default_value_t = DEFAULT_STATE_CAP, value_parser = at_least_one)]
    max_dfa_states: usize,
    #[arg(long, env = "SFA_MAX_SFA_STATES", default_value_t = DEFAULT_STATE_CAP, value_parser = at_least_one)]
    max_sfa_states: usize,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            max_nfa_states: self.max_nfa_states,
            max_dfa_states: self.max_dfa_states,
            max_sfa_states: self.max_sfa_states,
        }
    }
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    pattern: PatternArgs,
    #[command(flatten)]
    limits: LimitArgs,
    /// Write nfa.dot, dfa.dot, min_dfa.dot, sfa.dot and sfa_mappings.txt here.
    #[arg(long, env = "SFA_DOT")]
    dot: Option<PathBuf>,
    /// Print every SFA state's mapping after the summary.
    #[arg(long)]
    mappings: bool,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    pattern: PatternArgs,
    #[command(flatten)]
    limits: LimitArgs,
    /// Input file; standard input when absent or `-`.
    #[arg(short, long, env = "SFA_INPUT")]
    input: Option<PathBuf>,
    #[arg(long, env = "SFA_ENGINE", default_value = "sfa")]
    engine: EngineKind,
    /// Number of chunks; defaults to the available cores.
    #[arg(long, env = "SFA_THREADS", value_parser = at_least_one)]
    threads: Option<usize>,
    /// Fixed chunk length in bytes instead of an even split.
    #[arg(long, env = "SFA_CHUNK_SIZE", conflicts_with = "threads", value_parser = at_least_one)]
    chunk_size: Option<usize>,
    #[arg(long, env = "SFA_REDUCTION", default_value = "seq")]
    reduction: Reduction,
}

#[derive(Args)]
struct StatsArgs {
    /// File with one pattern per line.
    patterns: PathBuf,
    #[arg(long, env = "SFA_MAX_NFA_STATES", default_value_t = StatsConfig::default().max_nfa_states, value_parser = at_least_one)]
    max_nfa_states: usize,
    /// Budget for the unminimized subset construction.
    #[arg(long, env = "SFA_MAX_SUBSET_STATES", default_value_t = StatsConfig::default().max_subset_states, value_parser = at_least_one)]
    max_subset_states: usize,
    /// Minimal DFAs with more live states are not expanded into an SFA.
    #[arg(long, env = "SFA_MAX_DFA_STATES", default_value_t = StatsConfig::default().max_dfa_states, value_parser = at_least_one)]
    max_dfa_states: usize,
    #[arg(long, env = "SFA_MAX_SFA_STATES", default_value_t = StatsConfig::default().max_sfa_states, value_parser = at_least_one)]
    max_sfa_states: usize,
    /// Write the CSV here instead of standard output.
    #[arg(long, env = "SFA_CSV")]
    csv: Option<PathBuf>,
    /// Also write `min_dfa sfa` pairs for gnuplot.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    pattern: PatternArgs,
    #[command(flatten)]
    limits: LimitArgs,
    /// Engines to time, comma separated.
    #[arg(long, env = "SFA_ENGINE", value_delimiter = ',', default_value = "sfa")]
    engine: Vec<EngineKind>,
    /// Thread counts to sweep, comma separated; defaults to the available cores.
    #[arg(long, env = "SFA_THREADS", value_delimiter = ',', value_parser = at_least_one)]
    threads: Vec<usize>,
    #[arg(long, env = "SFA_REDUCTION", default_value = "seq")]
    reduction: Reduction,
    /// Timed runs per configuration; the median is reported.
    #[arg(long, env = "SFA_REPEATS", default_value_t = 3)]
    repeats: usize,
    /// Benchmark on this file instead of a generated word.
    #[arg(short, long, env = "SFA_INPUT", conflicts_with_all = ["len", "seed"])]
    input: Option<PathBuf>,
    /// Length of the generated accepted word.
    #[arg(long, env = "SFA_LEN", default_value_t = 1 << 20)]
    len: usize,
    #[arg(long, env = "SFA_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long, env = "SFA_CSV")]
    csv: Option<PathBuf>,
    /// Also write `threads throughput` rows per engine for gnuplot.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

fn at_least_one(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".to_string()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Failure {
        Failure {
            code,
            error: error.into(),
        }
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Failure {
        let code = match &e {
            CompileError::Regex(RegexError::TooLarge { .. }) | CompileError::Capacity(_) => EXIT_CAPACITY,
            CompileError::Regex(_) => EXIT_SYNTAX,
        };
        Failure::new(code, e)
    }
}

fn io_failure(e: io::Error, what: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_IO, anyhow::Error::new(e).context(what.to_string()))
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Compile(args) => cmd_compile(args),
        Command::Match(args) => cmd_match(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("sfa: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn resolve_pattern(args: &PatternArgs) -> Result<String, Failure> {
    let pattern = match (&args.pattern, &args.pattern_file) {
        (Some(p), _) => p.clone(),
        (None, Some(path)) => {
            let mut text =
                fs::read_to_string(path).map_err(|e| io_failure(e, format!("reading {}", path.display())))?;
            if text.ends_with('\n') {
                text.pop();
                if text.ends_with('\r') {
                    text.pop();
                }
            }
            text
        }
        (None, None) => unreachable!("clap requires a pattern source"),
    };
    Ok(if args.substring {
        substring_pattern(&pattern)
    } else {
        pattern
    })
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn cmd_compile(args: CompileArgs) -> Outcome {
    let pattern = resolve_pattern(&args.pattern)?;
    let c = compile(&pattern, &args.limits.limits())?;
    let mut out = io::stdout().lock();
    let write = |out: &mut io::StdoutLock, c: &Compiled| -> io::Result<()> {
        writeln!(
            out,
            "nfa={} dfa={} min_dfa={} sfa={} dfa_live={} min_dfa_live={} sfa_live={} sfa_bytes={}",
            c.nfa.state_count(),
            c.dfa.state_count(),
            c.min_dfa.state_count(),
            c.sfa.state_count(),
            c.dfa.live_state_count(),
            c.min_dfa.live_state_count(),
            c.sfa.live_state_count(),
            c.sfa.memory_bytes(),
        )?;
        if args.mappings {
            out.write_all(dot::sfa_mapping_dump(&c.sfa).as_bytes())?;
        }
        out.flush()
    };
    write(&mut out, &c).map_err(|e| io_failure(e, "writing to standard output"))?;
    if let Some(dir) = &args.dot {
        write_dot_files(dir, &c).map_err(|e| io_failure(e, format!("writing DOT files to {}", dir.display())))?;
    }
    Ok(0)
}

fn write_dot_files(dir: &Path, c: &Compiled) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("nfa.dot"), dot::nfa_to_dot(&c.nfa))?;
    fs::write(dir.join("dfa.dot"), dot::dfa_to_dot(&c.dfa))?;
    fs::write(dir.join("min_dfa.dot"), dot::dfa_to_dot(&c.min_dfa))?;
    fs::write(dir.join("sfa.dot"), dot::sfa_to_dot(&c.sfa))?;
    fs::write(dir.join("sfa_mappings.txt"), dot::sfa_mapping_dump(&c.sfa))
}

/// Input bytes: memory-mapped for regular files, read fully otherwise.
enum Input {
    Mapped(Mmap),
    Owned(Vec<u8>),
}

impl Input {
    fn bytes(&self) -> &[u8] {
        match self {
            Input::Mapped(m) => m,
            Input::Owned(v) => v,
        }
    }
}

fn read_input(path: Option<&Path>) -> io::Result<Input> {
    match path {
        None => read_stdin(),
        Some(p) if p == Path::new("-") => read_stdin(),
        Some(p) => {
            let file = File::open(p)?;
            let meta = file.metadata()?;
            if !meta.is_file() || meta.len() == 0 {
                // Empty files cannot be mapped; pipes and devices have no
                // fixed length.
                let mut buf = Vec::new();
                (&file).read_to_end(&mut buf)?;
                return Ok(Input::Owned(buf));
            }
            // SAFETY: the mapping is read-only; a concurrent writer could
            // change the bytes under us, which only affects the verdict.
            let map = unsafe { Mmap::map(&file)? };
            Ok(Input::Mapped(map))
        }
    }
}

fn read_stdin() -> io::Result<Input> {
    let mut buf = Vec::new();
    io::stdin().lock().read_to_end(&mut buf)?;
    Ok(Input::Owned(buf))
}

fn cmd_match(args: MatchArgs) -> Outcome {
    let pattern = resolve_pattern(&args.pattern)?;
    let c = compile(&pattern, &args.limits.limits())?;
    let input = read_input(args.input.as_deref()).map_err(|e| {
        let name = args
            .input
            .as_deref()
            .map_or("standard input".to_string(), |p| p.display().to_string());
        io_failure(e, format!("reading {name}"))
    })?;
    let data = input.bytes();
    let plan = match args.chunk_size {
        Some(size) => ChunkPlan::with_chunk_size(data.len(), size),
        None => make_chunk_plan(data.len(), args.threads.unwrap_or_else(default_threads)),
    }
    .map_err(|e| Failure::new(EXIT_USAGE, e))?;
    let out = run_engine(args.engine, &c.min_dfa, &c.sfa, data, &plan, args.reduction);
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{}", if out.accepted { "accept" } else { "reject" })
        .and_then(|_| {
            writeln!(
                stdout,
                "engine={} threads={} bytes={} total_ns={} scan_ns={} reduce_ns={} scan_lookups={} reduce_accesses={}",
                out.engine,
                out.threads,
                data.len(),
                out.timing.total.as_nanos(),
                out.timing.scan.as_nanos(),
                out.timing.reduce.as_nanos(),
                out.work.scan_lookups,
                out.work.reduce_accesses,
            )
        })
        .and_then(|_| stdout.flush())
        .map_err(|e| io_failure(e, "writing to standard output"))?;
    Ok(if out.accepted { 0 } else { EXIT_REJECT })
}

/// Standard output, or a file when `path` is given.
fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| io_failure(e, format!("creating {}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_stats(args: StatsArgs) -> Outcome {
    let cfg = StatsConfig {
        max_nfa_states: args.max_nfa_states,
        max_subset_states: args.max_subset_states,
        max_dfa_states: args.max_dfa_states,
        max_sfa_states: args.max_sfa_states,
    };
    let records = corpus::corpus_stats(&args.patterns, &cfg)
        .map_err(|e| io_failure(e, format!("reading {}", args.patterns.display())))?;
    let out = output(args.csv.as_deref())?;
    corpus::write_stats_csv(&records, out).map_err(|e| Failure::new(EXIT_IO, e))?;
    if let Some(path) = &args.gnuplot {
        let file = File::create(path).map_err(|e| io_failure(e, format!("creating {}", path.display())))?;
        corpus::write_gnuplot_sizes(&records, BufWriter::new(file))
            .map_err(|e| io_failure(e, format!("writing {}", path.display())))?;
    }
    eprintln!("{}", StatsSummary::of(&records));
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> Outcome {
    let pattern = resolve_pattern(&args.pattern)?;
    let input = match &args.input {
        Some(path) => {
            let data = read_input(Some(path)).map_err(|e| io_failure(e, format!("reading {}", path.display())))?;
            InputSpec::Bytes(data.bytes().to_vec())
        }
        None => InputSpec::Accepted {
            len: args.len,
            seed: args.seed,
        },
    };
    let cfg = BenchConfig {
        threads: if args.threads.is_empty() {
            vec![default_threads()]
        } else {
            args.threads.clone()
        },
        engines: args.engine.clone(),
        repeats: args.repeats,
        reduction: args.reduction,
        limits: args.limits.limits(),
    };
    let records = corpus::run_benchmark(&pattern, &input, &cfg).map_err(|e| match e {
        BenchError::Compile(c) => Failure::from(c),
        e @ BenchError::Generation(_) => Failure::new(EXIT_GENERATION, e),
        e => Failure::new(EXIT_USAGE, e),
    })?;
    let out = output(args.csv.as_deref())?;
    corpus::write_bench_csv(&records, out).map_err(|e| Failure::new(EXIT_IO, e))?;
    if let Some(path) = &args.gnuplot {
        let file = File::create(path).map_err(|e| io_failure(e, format!("creating {}", path.display())))?;
        corpus::write_gnuplot_bench(&records, BufWriter::new(file))
            .map_err(|e| io_failure(e, format!("writing {}", path.display())))?;
    }
    for r in &records {
        eprintln!(
            "{} threads={} {:.1} MB/s ({})",
            r.engine,
            r.threads,
            r.throughput_bps / 1e6,
            if r.accepted { "accept" } else { "reject" }
        );
    }
    Ok(0)
}
