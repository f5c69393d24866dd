//! Matching engines.
//!
//! * [`run_dfa_sequential`] walks the DFA table once over the input.
//! * [`run_dfa_speculative`] splits the input into chunks and, per chunk,
//!   tracks the transition of every DFA state at once. Each byte costs
//!   `|Q_d|` lookups.
//! * [`run_sfa_parallel`] splits the input the same way but each chunk walks
//!   the SFA table from the identity mapping, one lookup per byte.
//!
//! Chunk results are combined by sequential reduction (thread the current
//! set of source states through each chunk's mapping) or by parallel
//! reduction (compose all chunk mappings in a balanced tree first). Both
//! yield the same final states for every chunking of the input.
//!
//! All engines decide whole-input membership. Substring search is done by
//! compiling `.*(p).*` instead.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::dfa::Dfa;
use crate::sfa::{compose, Sfa, StateMapping};
use crate::StateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("thread count must be at least 1")]
    InvalidThreadCount,
    #[error("chunk size must be at least 1")]
    InvalidChunkSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineKind {
    DfaSequential,
    DfaSpeculative,
    SfaParallel,
}

impl EngineKind {
    pub fn tag(&self) -> &'static str {
        match self {
            EngineKind::DfaSequential => "dfa-seq",
            EngineKind::DfaSpeculative => "dfa-spec",
            EngineKind::SfaParallel => "sfa-par",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dfa" | "dfa-seq" => Ok(EngineKind::DfaSequential),
            "dfa-spec" => Ok(EngineKind::DfaSpeculative),
            "sfa" | "sfa-par" => Ok(EngineKind::SfaParallel),
            other => Err(format!("unknown engine {other:?} (expected dfa, dfa-spec or sfa)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    #[default]
    Sequential,
    Parallel,
}

impl FromStr for Reduction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "seq" | "sequential" => Ok(Reduction::Sequential),
            "par" | "parallel" => Ok(Reduction::Parallel),
            other => Err(format!("unknown reduction {other:?} (expected seq or par)")),
        }
    }
}

/// Where chunk scans execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dispatch {
    /// One worker thread per chunk; the calling thread takes the first chunk.
    #[default]
    Threads,
    /// Every chunk on the calling thread, in order. Same algorithm, no
    /// thread start-up cost.
    Inline,
}

/// A partition of the input into contiguous `(offset, length)` chunks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    boundaries: Vec<(usize, usize)>,
}

impl ChunkPlan {
    /// Chunks of the given lengths, laid out back to back. Empty chunks are
    /// allowed.
    pub fn from_lengths(lengths: &[usize]) -> ChunkPlan {
        let mut offset = 0;
        let boundaries = lengths
            .iter()
            .map(|&len| {
                let b = (offset, len);
                offset += len;
                b
            })
            .collect();
        ChunkPlan { boundaries }
    }

    /// Fixed-size chunks, the last one possibly shorter.
    pub fn with_chunk_size(input_len: usize, chunk: usize) -> Result<ChunkPlan, EngineError> {
        if chunk == 0 {
            return Err(EngineError::InvalidChunkSize);
        }
        if input_len == 0 {
            return Ok(ChunkPlan::from_lengths(&[0]));
        }
        let lengths: Vec<usize> = (0..input_len)
            .step_by(chunk)
            .map(|off| chunk.min(input_len - off))
            .collect();
        Ok(ChunkPlan::from_lengths(&lengths))
    }

    pub fn boundaries(&self) -> &[(usize, usize)] {
        &self.boundaries
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.boundaries.iter().map(|&(_, l)| l).collect()
    }

    /// Number of chunks, which is the number of workers.
    pub fn thread_count(&self) -> usize {
        self.boundaries.len()
    }

    pub fn total_len(&self) -> usize {
        self.boundaries.iter().map(|&(_, l)| l).sum()
    }

    pub fn covers(&self, input_len: usize) -> bool {
        let mut expect = 0;
        for &(off, len) in &self.boundaries {
            if off != expect {
                return false;
            }
            expect += len;
        }
        expect == input_len && !self.boundaries.is_empty()
    }

    fn slices<'a>(&self, input: &'a [u8]) -> Vec<&'a [u8]> {
        assert!(
            self.covers(input.len()),
            "chunk plan does not cover an input of {} bytes",
            input.len()
        );
        self.boundaries
            .iter()
            .map(|&(off, len)| &input[off..off + len])
            .collect()
    }
}

/// Splits `input_len` bytes into `threads` chunks of near-equal size, the
/// leading chunks taking the remainder. Short inputs get one chunk per byte,
/// and an empty input gets a single empty chunk.
pub fn make_chunk_plan(input_len: usize, threads: usize) -> Result<ChunkPlan, EngineError> {
    if threads == 0 {
        return Err(EngineError::InvalidThreadCount);
    }
    if input_len == 0 {
        return Ok(ChunkPlan::from_lengths(&[0]));
    }
    let p = threads.min(input_len);
    let (base, extra) = (input_len / p, input_len % p);
    let lengths: Vec<usize> = (0..p).map(|i| base + usize::from(i < extra)).collect();
    Ok(ChunkPlan::from_lengths(&lengths))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Timing {
    pub total: Duration,
    /// Until every chunk scan has finished.
    pub scan: Duration,
    pub reduce: Duration,
}

/// Instrumented access counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Work {
    /// Transition table lookups during chunk scans.
    pub scan_lookups: u64,
    /// Mapping entries read or produced during reduction.
    pub reduce_accesses: u64,
}

impl Work {
    pub fn total(&self) -> u64 {
        self.scan_lookups + self.reduce_accesses
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchOutcome {
    pub accepted: bool,
    /// States of the underlying automaton reached from its initial states.
    pub final_states: Vec<StateId>,
    pub engine: EngineKind,
    pub threads: usize,
    pub timing: Timing,
    pub work: Work,
}

pub fn run_dfa_sequential(dfa: &Dfa, input: &[u8]) -> MatchOutcome {
    let start = Instant::now();
    let (q, lookups) = walk(dfa.table(), dfa, dfa.initial(), input);
    let elapsed = start.elapsed();
    MatchOutcome {
        accepted: dfa.is_final(q),
        final_states: vec![q],
        engine: EngineKind::DfaSequential,
        threads: 1,
        timing: Timing {
            total: elapsed,
            scan: elapsed,
            reduce: Duration::ZERO,
        },
        work: Work {
            scan_lookups: lookups,
            reduce_accesses: 0,
        },
    }
}

trait Classify {
    fn class(&self, byte: u8) -> usize;
    fn stride(&self) -> usize;
}

impl Classify for Dfa {
    #[inline(always)]
    fn class(&self, byte: u8) -> usize {
        self.classes().get(byte)
    }
    fn stride(&self) -> usize {
        Dfa::stride(self)
    }
}

impl Classify for Sfa {
    #[inline(always)]
    fn class(&self, byte: u8) -> usize {
        self.classes().get(byte)
    }
    fn stride(&self) -> usize {
        Sfa::stride(self)
    }
}

/// Table walk shared by the sequential DFA scan and SFA chunk scans.
#[inline]
fn walk<C: Classify>(table: &[StateId], classes: &C, start: StateId, input: &[u8]) -> (StateId, u64) {
    let k = classes.stride();
    let mut s = start;
    let mut lookups = 0u64;
    for &b in input {
        s = table[s as usize * k + classes.class(b)];
        lookups += 1;
    }
    (s, lookups)
}

fn scan_chunks<'a, T, F>(input: &'a [u8], plan: &ChunkPlan, dispatch: Dispatch, scan: F) -> Vec<T>
where
    T: Send,
    F: Fn(&'a [u8]) -> T + Sync,
{
    let chunks = plan.slices(input);
    if dispatch == Dispatch::Inline || chunks.len() == 1 {
        return chunks.into_iter().map(&scan).collect();
    }
    std::thread::scope(|scope| {
        let scan = &scan;
        let workers: Vec<_> = chunks[1..]
            .iter()
            .map(|&chunk| scope.spawn(move || scan(chunk)))
            .collect();
        let mut out = Vec::with_capacity(chunks.len());
        out.push(scan(chunks[0]));
        out.extend(workers.into_iter().map(|w| w.join().expect("chunk worker panicked")));
        out
    })
}

/// Composes `items` left to right as a balanced binary tree.
fn tree_reduce<T>(mut items: Vec<T>, mut op: impl FnMut(&T, &T) -> T) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut iter = items.into_iter();
        while let Some(a) = iter.next() {
            match iter.next() {
                Some(b) => next.push(op(&a, &b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

pub fn run_dfa_speculative(dfa: &Dfa, input: &[u8], plan: &ChunkPlan, reduction: Reduction) -> MatchOutcome {
    run_dfa_speculative_with(dfa, input, plan, reduction, Dispatch::Threads)
}

pub fn run_dfa_speculative_with(
    dfa: &Dfa,
    input: &[u8],
    plan: &ChunkPlan,
    reduction: Reduction,
    dispatch: Dispatch,
) -> MatchOutcome {
    let start = Instant::now();
    let n = dfa.state_count();
    let k = dfa.stride();
    let table = dfa.table();
    let results = scan_chunks(input, plan, dispatch, |chunk| {
        let mut t: Vec<StateId> = (0..n as StateId).collect();
        let mut lookups = 0u64;
        for &b in chunk {
            let c = dfa.classes().get(b);
            for q in t.iter_mut() {
                *q = table[*q as usize * k + c];
            }
            lookups += n as u64;
        }
        (t, lookups)
    });
    let scanned = start.elapsed();
    let scan_lookups = results.iter().map(|(_, l)| l).sum();

    let mut reduce_accesses = 0u64;
    let q_final = match reduction {
        Reduction::Sequential => results.iter().fold(dfa.initial(), |q, (t, _)| {
            reduce_accesses += 1;
            t[q as usize]
        }),
        Reduction::Parallel => {
            let maps: Vec<Vec<StateId>> = results.into_iter().map(|(t, _)| t).collect();
            let t = tree_reduce(maps, |f, g| {
                reduce_accesses += n as u64;
                f.iter().map(|&x| g[x as usize]).collect()
            })
            .expect("a plan has at least one chunk");
            reduce_accesses += 1;
            t[dfa.initial() as usize]
        }
    };
    let total = start.elapsed();
    MatchOutcome {
        accepted: dfa.is_final(q_final),
        final_states: vec![q_final],
        engine: EngineKind::DfaSpeculative,
        threads: plan.thread_count(),
        timing: Timing {
            total,
            scan: scanned,
            reduce: total - scanned,
        },
        work: Work {
            scan_lookups,
            reduce_accesses,
        },
    }
}

pub fn run_sfa_parallel(sfa: &Sfa, input: &[u8], plan: &ChunkPlan, reduction: Reduction) -> MatchOutcome {
    run_sfa_parallel_with(sfa, input, plan, reduction, Dispatch::Threads)
}

pub fn run_sfa_parallel_with(
    sfa: &Sfa,
    input: &[u8],
    plan: &ChunkPlan,
    reduction: Reduction,
    dispatch: Dispatch,
) -> MatchOutcome {
    let start = Instant::now();
    let table = sfa.table();
    let results = scan_chunks(input, plan, dispatch, |chunk| walk(table, sfa, sfa.initial(), chunk));
    let scanned = start.elapsed();
    let scan_lookups = results.iter().map(|(_, l)| l).sum();

    let origin = sfa.origin();
    let mut reduce_accesses = 0u64;
    let final_states = match reduction {
        Reduction::Sequential => {
            let mut current = origin.initial.clone();
            let mut next = Vec::new();
            for &(s, _) in &results {
                let m = sfa.mapping_ref(s);
                next.clear();
                for &q in &current {
                    m.image_into(q, &mut next);
                }
                reduce_accesses += current.len() as u64;
                next.sort_unstable();
                next.dedup();
                std::mem::swap(&mut current, &mut next);
            }
            current
        }
        Reduction::Parallel => {
            let n = origin.state_count as u64;
            let maps: Vec<StateMapping> = results.iter().map(|&(s, _)| sfa.mapping(s)).collect();
            let f = tree_reduce(maps, |f, g| {
                reduce_accesses += n;
                compose(f, g).expect("mappings of one automaton share a domain")
            })
            .expect("a plan has at least one chunk");
            reduce_accesses += origin.initial.len() as u64;
            f.apply_set(&origin.initial)
        }
    };
    let total = start.elapsed();
    MatchOutcome {
        accepted: origin.any_final(&final_states),
        final_states,
        engine: EngineKind::SfaParallel,
        threads: plan.thread_count(),
        timing: Timing {
            total,
            scan: scanned,
            reduce: total - scanned,
        },
        work: Work {
            scan_lookups,
            reduce_accesses,
        },
    }
}

/// Dispatches to one of the engines. `sfa` must have been built from `dfa`.
pub fn run_engine(
    kind: EngineKind,
    dfa: &Dfa,
    sfa: &Sfa,
    input: &[u8],
    plan: &ChunkPlan,
    reduction: Reduction,
) -> MatchOutcome {
    match kind {
        EngineKind::DfaSequential => run_dfa_sequential(dfa, input),
        EngineKind::DfaSpeculative => run_dfa_speculative(dfa, input, plan, reduction),
        EngineKind::SfaParallel => run_sfa_parallel(sfa, input, plan, reduction),
    }
}
