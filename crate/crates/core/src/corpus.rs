//! Size statistics over pattern lists, throughput benchmarks, and
//! generation of accepted inputs.
//!
//! Sizes in [`SizeRecord`] are given twice. The *live* count leaves out
//! states from which no input can be accepted: the sink of a DFA and the
//! mapping that sends every state to the sink. The *complete* count keeps
//! them. The main CSV columns carry live counts.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dfa::{subset_construct, Dfa};
use crate::engine::{make_chunk_plan, run_engine, EngineKind, Reduction};
use crate::minimize::minimize_dfa;
use crate::nfa::build_nfa;
use crate::regex::{parse_regex_with_limit, RegexError};
use crate::sfa::{construct_from_dfa, Sfa};
use crate::{CompileError, Limits, Stage, StateId};

/// How the SFA size compares with powers of the minimal DFA size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RatioClass {
    Linear,
    Square,
    Cube,
    Quartic,
    Above,
}

impl RatioClass {
    pub fn classify(dfa: usize, sfa: usize) -> RatioClass {
        let (d, s) = (dfa as u128, sfa as u128);
        if s <= d.max(1) {
            RatioClass::Linear
        } else if s <= d * d {
            RatioClass::Square
        } else if s <= d * d * d {
            RatioClass::Cube
        } else if s <= d * d * d * d {
            RatioClass::Quartic
        } else {
            RatioClass::Above
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            RatioClass::Linear => "<=linear",
            RatioClass::Square => "<=square",
            RatioClass::Cube => "<=cube",
            RatioClass::Quartic => "<=quartic",
            RatioClass::Above => "above",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    Skipped(String),
    Capped(Stage),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Ok => f.write_str("ok"),
            Status::Skipped(reason) => write!(f, "skipped:{reason}"),
            Status::Capped(stage) => write!(f, "capped:{stage}"),
        }
    }
}

/// Live and complete size of one automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Size {
    pub live: usize,
    pub complete: usize,
}

impl Size {
    fn of_dfa(d: &Dfa) -> Size {
        Size {
            live: d.live_state_count(),
            complete: d.state_count(),
        }
    }

    fn of_sfa(s: &Sfa) -> Size {
        Size {
            live: s.live_state_count(),
            complete: s.state_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeRecord {
    pub pattern: String,
    pub nfa_states: Option<usize>,
    pub dfa_states: Option<Size>,
    pub min_dfa_states: Option<Size>,
    pub sfa_states: Option<Size>,
    pub status: Status,
}

impl SizeRecord {
    /// Present when both the minimal DFA and the SFA were built.
    pub fn ratio_class(&self) -> Option<RatioClass> {
        Some(RatioClass::classify(self.min_dfa_states?.live, self.sfa_states?.live))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatsConfig {
    pub max_nfa_states: usize,
    /// Budget for the unminimized subset construction.
    pub max_subset_states: usize,
    /// Patterns whose minimal DFA has more live states are not expanded
    /// into an SFA.
    pub max_dfa_states: usize,
    pub max_sfa_states: usize,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            max_nfa_states: 1 << 16,
            max_subset_states: 1 << 16,
            max_dfa_states: 1000,
            max_sfa_states: 100_000,
        }
    }
}

pub fn size_record(pattern: &str, cfg: &StatsConfig) -> SizeRecord {
    let mut rec = SizeRecord {
        pattern: pattern.to_string(),
        nfa_states: None,
        dfa_states: None,
        min_dfa_states: None,
        sfa_states: None,
        status: Status::Ok,
    };
    let ast = match parse_regex_with_limit(pattern, cfg.max_nfa_states as u64) {
        Ok(ast) => ast,
        Err(RegexError::TooLarge { .. }) => {
            rec.status = Status::Capped(Stage::Nfa);
            return rec;
        }
        Err(RegexError::Unsupported { feature, .. }) => {
            rec.status = Status::Skipped(format!("unsupported {feature}"));
            return rec;
        }
        Err(RegexError::Syntax { .. }) => {
            rec.status = Status::Skipped("syntax".to_string());
            return rec;
        }
    };
    let Ok(nfa) = build_nfa(&ast, cfg.max_nfa_states) else {
        rec.status = Status::Capped(Stage::Nfa);
        return rec;
    };
    rec.nfa_states = Some(nfa.state_count());
    let Ok(dfa) = subset_construct(&nfa, cfg.max_subset_states) else {
        rec.status = Status::Capped(Stage::Dfa);
        return rec;
    };
    rec.dfa_states = Some(Size::of_dfa(&dfa));
    let min = minimize_dfa(&dfa);
    let min_size = Size::of_dfa(&min);
    rec.min_dfa_states = Some(min_size);
    if min_size.live > cfg.max_dfa_states {
        rec.status = Status::Capped(Stage::Dfa);
        return rec;
    }
    match construct_from_dfa(&min, cfg.max_sfa_states) {
        Ok(sfa) => rec.sfa_states = Some(Size::of_sfa(&sfa)),
        Err(_) => rec.status = Status::Capped(Stage::Sfa),
    }
    rec
}

/// One record per pattern, in input order. Patterns are processed in
/// parallel; a failing pattern only affects its own record.
pub fn corpus_stats_for<S: AsRef<str> + Sync>(patterns: &[S], cfg: &StatsConfig) -> Vec<SizeRecord> {
    patterns.par_iter().map(|p| size_record(p.as_ref(), cfg)).collect()
}

/// Reads one pattern per line. Blank lines are ignored; nothing else is
/// interpreted.
pub fn read_pattern_list(path: &Path) -> io::Result<Vec<String>> {
    let text = fs::read(path)?;
    Ok(String::from_utf8_lossy(&text)
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

pub fn corpus_stats(path: &Path, cfg: &StatsConfig) -> io::Result<Vec<SizeRecord>> {
    Ok(corpus_stats_for(&read_pattern_list(path)?, cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StatsSummary {
    pub total: usize,
    pub ok: usize,
    pub skipped: usize,
    pub capped: usize,
    /// Records with more SFA states than the square of the DFA size.
    pub above_square: usize,
    pub above_cube: usize,
}

impl StatsSummary {
    pub fn of(records: &[SizeRecord]) -> StatsSummary {
        let mut s = StatsSummary {
            total: records.len(),
            ..Default::default()
        };
        for r in records {
            match r.status {
                Status::Ok => s.ok += 1,
                Status::Skipped(_) => s.skipped += 1,
                Status::Capped(_) => s.capped += 1,
            }
            if let Some(class) = r.ratio_class() {
                s.above_square += usize::from(class > RatioClass::Square);
                s.above_cube += usize::from(class > RatioClass::Cube);
            }
        }
        s
    }

    pub fn fraction_above_square(&self) -> f64 {
        if self.ok == 0 {
            0.0
        } else {
            self.above_square as f64 / self.ok as f64
        }
    }
}

impl fmt::Display for StatsSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "patterns={} ok={} skipped={} capped={} above_square={} ({:.2}%) above_cube={}",
            self.total,
            self.ok,
            self.skipped,
            self.capped,
            self.above_square,
            100.0 * self.fraction_above_square(),
            self.above_cube
        )
    }
}

pub const STATS_HEADER: [&str; 10] = [
    "pattern",
    "nfa",
    "dfa",
    "min_dfa",
    "sfa",
    "ratio_class",
    "status",
    "dfa_complete",
    "min_dfa_complete",
    "sfa_complete",
];

pub fn write_stats_csv<W: Write>(records: &[SizeRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(STATS_HEADER)?;
    let num = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.pattern.clone(),
            num(r.nfa_states),
            num(r.dfa_states.map(|s| s.live)),
            num(r.min_dfa_states.map(|s| s.live)),
            num(r.sfa_states.map(|s| s.live)),
            r.ratio_class().map(|c| c.tag().to_string()).unwrap_or_default(),
            r.status.to_string(),
            num(r.dfa_states.map(|s| s.complete)),
            num(r.min_dfa_states.map(|s| s.complete)),
            num(r.sfa_states.map(|s| s.complete)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated `min_dfa sfa` pairs of the complete records, for a
/// log-log scatter plot.
pub fn write_gnuplot_sizes<W: Write>(records: &[SizeRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "# min_dfa sfa")?;
    for r in records {
        if let (Some(d), Some(s)) = (r.min_dfa_states, r.sfa_states) {
            writeln!(out, "{} {}", d.live, s.live)?;
        }
    }
    Ok(())
}

/// One gnuplot data block per engine, `threads throughput_bps` per line.
/// Blocks are separated by two blank lines so `index` can select them.
pub fn write_gnuplot_bench<W: Write>(records: &[BenchRecord], mut out: W) -> io::Result<()> {
    let mut engines: Vec<EngineKind> = Vec::new();
    for r in records {
        if !engines.contains(&r.engine) {
            engines.push(r.engine);
        }
    }
    for (i, e) in engines.iter().enumerate() {
        if i > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# {e}: threads throughput_bps")?;
        for r in records.iter().filter(|r| r.engine == *e) {
            writeln!(out, "{} {:.0}", r.threads, r.throughput_bps)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum GenerationError {
    #[error("the language is empty")]
    EmptyLanguage,
    #[error("the language is finite; its longest word has {longest} bytes")]
    NoLongWord { longest: usize },
}

/// A word of at least `target_len` bytes accepted by `dfa`.
///
/// Walks randomly, choosing only transitions into states from which a
/// cycle of live states is still reachable, until the word is long enough,
/// then appends a shortest path to an accepting state. Finite languages
/// fall back to their longest word.
pub fn generate_accepted_word(dfa: &Dfa, target_len: usize, seed: u64) -> Result<Vec<u8>, GenerationError> {
    let n = dfa.state_count();
    let k = dfa.stride();
    let dead = dfa.dead_states();
    let q0 = dfa.initial() as usize;
    if dead[q0] {
        return Err(GenerationError::EmptyLanguage);
    }
    let succ = |q: usize, c: usize| dfa.next_class(q as StateId, c) as usize;
    let members: Vec<Vec<u8>> = (0..k).map(|c| dfa.classes().members(c).iter().collect()).collect();

    // dist[q]: shortest distance to an accepting state.
    let mut dist = vec![usize::MAX; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in 0..n {
        for c in 0..k {
            preds[succ(q, c)].push(q);
        }
    }
    let mut queue: std::collections::VecDeque<usize> = (0..n).filter(|&q| dfa.is_final(q as StateId)).collect();
    for &q in &queue {
        dist[q] = 0;
    }
    while let Some(q) = queue.pop_front() {
        for &p in &preds[q] {
            if dist[p] == usize::MAX {
                dist[p] = dist[q] + 1;
                queue.push_back(p);
            }
        }
    }

    let pump = pumpable(n, k, &dead, succ);
    let mut word = Vec::with_capacity(target_len + n);
    let mut q = q0;
    if pump[q0] {
        let choices: Vec<Vec<usize>> = (0..n).map(|q| (0..k).filter(|&c| pump[succ(q, c)]).collect()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while word.len() < target_len {
            let opts = &choices[q];
            let c = opts[rng.gen_range(0..opts.len())];
            let bytes = &members[c];
            word.push(bytes[rng.gen_range(0..bytes.len())]);
            q = succ(q, c);
        }
    } else {
        let longest = longest_words(n, k, &dead, dfa, succ);
        if longest[q0] < target_len {
            return Err(GenerationError::NoLongWord { longest: longest[q0] });
        }
        // Follow the longest path; it ends in an accepting state.
        while longest[q] > 0 {
            let c = (0..k)
                .find(|&c| !dead[succ(q, c)] && longest[succ(q, c)] + 1 == longest[q])
                .expect("longest path continues");
            word.push(members[c][0]);
            q = succ(q, c);
        }
        return Ok(word);
    }
    while dist[q] > 0 {
        let c = (0..k)
            .find(|&c| dist[succ(q, c)].checked_add(1) == Some(dist[q]))
            .expect("shortest path continues");
        word.push(members[c][0]);
        q = succ(q, c);
    }
    Ok(word)
}

/// States from which a cycle through live states is reachable by live
/// states only.
fn pumpable(n: usize, k: usize, dead: &[bool], succ: impl Fn(usize, usize) -> usize) -> Vec<bool> {
    // Repeatedly strip live states without live successors in the
    // remaining graph; what is left is exactly the set we want.
    let mut out_deg = vec![0usize; n];
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for q in (0..n).filter(|&q| !dead[q]) {
        for c in 0..k {
            let t = succ(q, c);
            if !dead[t] {
                out_deg[q] += 1;
                rev[t].push(q);
            }
        }
    }
    let mut keep: Vec<bool> = dead.iter().map(|d| !d).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&q| keep[q] && out_deg[q] == 0).collect();
    while let Some(q) = stack.pop() {
        if !keep[q] {
            continue;
        }
        keep[q] = false;
        for &p in &rev[q] {
            out_deg[p] -= 1;
            if out_deg[p] == 0 && keep[p] {
                stack.push(p);
            }
        }
    }
    keep
}

/// Length of the longest accepted suffix from each live state of an acyclic
/// live subgraph.
fn longest_words(n: usize, k: usize, dead: &[bool], dfa: &Dfa, succ: impl Fn(usize, usize) -> usize) -> Vec<usize> {
    fn visit(
        q: usize,
        k: usize,
        dead: &[bool],
        dfa: &Dfa,
        succ: &dyn Fn(usize, usize) -> usize,
        memo: &mut Vec<Option<usize>>,
    ) -> usize {
        if let Some(v) = memo[q] {
            return v;
        }
        let mut best = 0;
        let mut any = dfa.is_final(q as StateId);
        for c in 0..k {
            let t = succ(q, c);
            if !dead[t] {
                best = best.max(visit(t, k, dead, dfa, succ, memo) + 1);
                any = true;
            }
        }
        debug_assert!(any);
        memo[q] = Some(best);
        best
    }
    let mut memo = vec![None; n];
    (0..n)
        .map(|q| {
            if dead[q] {
                0
            } else {
                visit(q, k, dead, dfa, &succ, &mut memo)
            }
        })
        .collect()
}

/// Benchmark input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSpec {
    /// A generated word accepted by the pattern.
    Accepted {
        len: usize,
        seed: u64,
    },
    /// `unit` repeated to `len` bytes.
    Repeat {
        unit: Vec<u8>,
        len: usize,
    },
    Bytes(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub threads: Vec<usize>,
    pub engines: Vec<EngineKind>,
    pub repeats: usize,
    pub reduction: Reduction,
    pub limits: Limits,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            threads: vec![1],
            engines: vec![EngineKind::SfaParallel],
            repeats: 3,
            reduction: Reduction::Sequential,
            limits: Limits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub pattern: String,
    pub engine: EngineKind,
    pub threads: usize,
    pub input_bytes: usize,
    /// Median scan phase.
    pub scan: Duration,
    /// Median reduction phase.
    pub reduce: Duration,
    /// `input_bytes` per second of median scan time.
    pub throughput_bps: f64,
    pub dfa_build: Duration,
    pub sfa_build: Duration,
    pub accepted: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error("at least 3 repeats are required, got {0}")]
    TooFewRepeats(usize),
    #[error("thread counts must be at least 1")]
    InvalidThreads,
    #[error("{engine} with {threads} threads disagrees with the sequential DFA verdict")]
    VerdictMismatch { engine: EngineKind, threads: usize },
}

pub const BENCH_HEADER: [&str; 9] = [
    "pattern",
    "engine",
    "threads",
    "input_bytes",
    "scan_ns",
    "reduce_ns",
    "throughput_bps",
    "dfa_build_s",
    "sfa_build_s",
];

/// Builds the automata once, then times every engine and thread count.
/// Each measurement is preceded by one discarded warm-up run. The
/// sequential DFA engine runs once regardless of the thread list.
pub fn run_benchmark(pattern: &str, input: &InputSpec, cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    if cfg.repeats < 3 {
        return Err(BenchError::TooFewRepeats(cfg.repeats));
    }
    if cfg.threads.contains(&0) {
        return Err(BenchError::InvalidThreads);
    }
    let limits = &cfg.limits;
    let start = Instant::now();
    let ast = parse_regex_with_limit(pattern, limits.max_nfa_states as u64).map_err(CompileError::from)?;
    let nfa = build_nfa(&ast, limits.max_nfa_states).map_err(CompileError::from)?;
    let dfa = minimize_dfa(&subset_construct(&nfa, limits.max_dfa_states).map_err(CompileError::from)?);
    let dfa_build = start.elapsed();
    let start = Instant::now();
    let sfa = construct_from_dfa(&dfa, limits.max_sfa_states).map_err(CompileError::from)?;
    let sfa_build = start.elapsed();

    let data = match input {
        InputSpec::Accepted { len, seed } => generate_accepted_word(&dfa, *len, *seed)?,
        InputSpec::Repeat { unit, len } => unit.iter().copied().cycle().take(*len).collect(),
        InputSpec::Bytes(b) => b.clone(),
    };
    let expected = dfa.accepts(&data);

    let mut records = Vec::new();
    for &engine in &cfg.engines {
        let thread_list: &[usize] = if engine == EngineKind::DfaSequential {
            &[1]
        } else {
            &cfg.threads
        };
        for &threads in thread_list {
            let plan = make_chunk_plan(data.len(), threads).map_err(|_| BenchError::InvalidThreads)?;
            let mut scans = Vec::with_capacity(cfg.repeats);
            let mut reduces = Vec::with_capacity(cfg.repeats);
            for run in 0..=cfg.repeats {
                let out = run_engine(engine, &dfa, &sfa, &data, &plan, cfg.reduction);
                if out.accepted != expected {
                    return Err(BenchError::VerdictMismatch { engine, threads });
                }
                if run > 0 {
                    scans.push(out.timing.scan);
                    reduces.push(out.timing.reduce);
                }
            }
            let scan = median(&mut scans);
            let reduce = median(&mut reduces);
            records.push(BenchRecord {
                pattern: pattern.to_string(),
                engine,
                threads,
                input_bytes: data.len(),
                scan,
                reduce,
                throughput_bps: data.len() as f64 / scan.as_secs_f64().max(1e-9),
                dfa_build,
                sfa_build,
                accepted: expected,
            });
        }
    }
    Ok(records)
}

fn median(v: &mut [Duration]) -> Duration {
    v.sort_unstable();
    v[v.len() / 2]
}

pub fn write_bench_csv<W: Write>(records: &[BenchRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER)?;
    for r in records {
        w.write_record([
            r.pattern.clone(),
            r.engine.tag().to_string(),
            r.threads.to_string(),
            r.input_bytes.to_string(),
            r.scan.as_nanos().to_string(),
            r.reduce.as_nanos().to_string(),
            format!("{:.0}", r.throughput_bps),
            format!("{:.6}", r.dfa_build.as_secs_f64()),
            format!("{:.6}", r.sfa_build.as_secs_f64()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
