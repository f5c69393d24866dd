//! Acceptance criteria. Each test prints one line:
//!
//! `[acceptance] <n> <name>: PASS|FAIL|NOT EVALUATED — <details>`
//!
//! The lines go straight to stderr, past the test harness's output capture,
//! so they appear for passing tests too. Add `-- --test-threads=1` to see
//! them in order.

mod common;

use std::collections::HashSet;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sfa_regex::corpus::generate_accepted_word;
use sfa_regex::engine::{run_dfa_speculative_with, run_sfa_parallel_with};
use sfa_regex::sfa::construct_from_nfa;
use sfa_regex::*;

use common::{random_chunking, random_re, DerivDfa, CORPUS};

// Tolerances and workloads, pinned.
const C1_MAX_RUNTIME: Duration = Duration::from_secs(1);
const C4_MAX_RUNTIME: Duration = Duration::from_secs(10);
const C6_EXPRESSIONS: usize = 500;
const C6_MAX_DEPTH: u32 = 6;
const C6_MAX_WORD: usize = 8;
const C7_CHUNKINGS: usize = 20;
const C7_THREADS: [usize; 5] = [1, 2, 3, 4, 7];
const C7_INPUT_LEN: usize = 64;
const C8_TRIPLES: usize = 10_000;
const C10_MIN_CORES: usize = 4;
const C10_INPUT: usize = 64 << 20;
const C10_REPEATS: usize = 3;
const C10_REQUIRED_PASSES: usize = 2;
const C10_SPEEDUP: f64 = 2.0;
const C10_MAX_RUNTIME: Duration = Duration::from_secs(120);
const C11_MAX_INPUT: usize = 8 << 20;
const C11_MIN_INPUT: usize = 16 << 10;
const C11_SAMPLES: usize = 7;

fn report(n: u32, name: &str, verdict: &str, detail: &str) {
    let line = format!("[acceptance] {n} {name}: {verdict} — {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn compiled(p: &str) -> Compiled {
    compile(p, &Limits::default()).unwrap_or_else(|e| panic!("{p:?}: {e}"))
}

fn det(v: &[StateId]) -> StateMapping {
    StateMapping::Det(v.to_vec())
}

/// Mappings reachable from the identity using only `bytes`, computed by a
/// plain search over image vectors.
fn restricted_sfa_size(dfa: &Dfa, bytes: &[u8]) -> (usize, usize) {
    let n = dfa.state_count() as StateId;
    let id: Vec<StateId> = (0..n).collect();
    let mut seen: HashSet<Vec<StateId>> = HashSet::from([id.clone()]);
    let mut stack = vec![id];
    while let Some(f) = stack.pop() {
        for &b in bytes {
            let g: Vec<StateId> = f.iter().map(|&q| dfa.next(q, b)).collect();
            if seen.insert(g.clone()) {
                stack.push(g);
            }
        }
    }
    let mut states = HashSet::from([dfa.initial()]);
    let mut stack = vec![dfa.initial()];
    while let Some(q) = stack.pop() {
        for &b in bytes {
            let t = dfa.next(q, b);
            if states.insert(t) {
                stack.push(t);
            }
        }
    }
    (states.len(), seen.len())
}

#[test]
fn c01_golden_ab_star() {
    let start = Instant::now();
    let c = compiled("(ab)*");
    let elapsed = start.elapsed();
    // Expected mappings, one per SFA state: images of DFA states 0, 1, 2.
    let table = [
        det(&[0, 1, 2]),
        det(&[1, 2, 2]),
        det(&[2, 0, 2]),
        det(&[2, 2, 2]),
        det(&[0, 2, 2]),
        det(&[2, 1, 2]),
    ];
    let ours: Vec<StateMapping> = (0..c.sfa.state_count() as StateId).map(|s| c.sfa.mapping(s)).collect();
    let same_set = ours.len() == table.len() && table.iter().all(|m| ours.contains(m));
    let same_order = ours == table;
    let pass = c.min_dfa.state_count() == 3 && c.sfa.state_count() == 6 && same_set && elapsed < C1_MAX_RUNTIME;
    report(
        1,
        "golden (ab)*",
        verdict(pass),
        &format!(
            "min_dfa={} sfa={} table_match={same_set} identical_numbering={same_order} in {elapsed:?}",
            c.min_dfa.state_count(),
            c.sfa.state_count()
        ),
    );
    assert!(pass);
}

#[test]
fn c02_golden_rn() {
    let mut details = Vec::new();
    let mut pass = true;
    for (n, d, s) in [(5, 10, 109), (50, 100, 10099)] {
        let start = Instant::now();
        let c = compiled(&format!("([0-4]{{{n}}}[5-9]{{{n}}})*"));
        let (dl, sl) = (c.min_dfa.live_state_count(), c.sfa.live_state_count());
        pass &= dl == d && sl == s;
        details.push(format!(
            "r_{n}: min_dfa={dl} sfa={sl} (with sink {}/{}) in {:?}",
            c.min_dfa.state_count(),
            c.sfa.state_count(),
            start.elapsed()
        ));
    }
    report(2, "golden r_5, r_50", verdict(pass), &details.join("; "));
    assert!(pass);
}

#[test]
#[ignore = "builds a 1,000,999-state SFA (about 2 GB); run with --ignored"]
fn c02_optional_r500() {
    let start = Instant::now();
    let c = compiled("([0-4]{500}[5-9]{500})*");
    let elapsed = start.elapsed();
    let (dl, sl) = (c.min_dfa.live_state_count(), c.sfa.live_state_count());
    let pass = dl == 1000 && sl == 1_000_999 && elapsed < Duration::from_secs(60);
    report(
        2,
        "optional r_500",
        verdict(pass),
        &format!(
            "min_dfa={dl} sfa={sl} in {elapsed:?}, {} MB",
            c.sfa.memory_bytes() >> 20
        ),
    );
    assert!(pass);
}

#[test]
fn c03_golden_dot_star() {
    let c = compiled(".*(T.*T.*Y.*P.*P.*R.*O.*M.*P.*T.*)");
    let (dl, sl) = (c.min_dfa.live_state_count(), c.sfa.live_state_count());
    // Same count from an independent search over the pattern's letters plus
    // one foreign byte.
    let (_, restricted) = restricted_sfa_size(&c.min_dfa, b"TYPROM#");
    let pass = dl == 10 && sl == 3739;
    report(
        3,
        "golden dot-star",
        verdict(pass),
        &format!("expected min_dfa=10 sfa=3739, got min_dfa={dl} sfa={sl} (independent search: {restricted})"),
    );
    assert!(pass, "see the decisions ledger for the analysis of this mismatch");
}

#[test]
fn c04_explosion_dfa() {
    let start = Instant::now();
    let mut sizes = Vec::new();
    let mut pass = true;
    for n in 3..=8u32 {
        let c = compiled(&format!("[ap]*[al][alp]{{{}}}", n - 2));
        let (states, _) = restricted_sfa_size(&c.min_dfa, b"alp");
        pass &= c.min_dfa.state_count() == 1 << n && states == 1 << n;
        sizes.push(format!("n={n}:{}", c.min_dfa.state_count()));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < C4_MAX_RUNTIME;
    report(
        4,
        "explosion |D|=2^n",
        verdict(pass),
        &format!("{} in {elapsed:?}", sizes.join(" ")),
    );
    assert!(pass);
}

#[test]
fn c05_explosion_sfa() {
    let mut pass = true;
    let mut details = Vec::new();
    for n in [3u32, 4] {
        let c = compiled(&format!("(m|(t|c([mt]*c){{{}}})[cmt])*", n - 2));
        // Over {c, m, t} the DFA has no sink.
        let (d, s) = restricted_sfa_size(&c.min_dfa, b"cmt");
        let (dl, sl) = (c.min_dfa.live_state_count(), c.sfa.live_state_count());
        let expect = (d as u64).pow(d as u32) as usize;
        pass &= d == n as usize && s == expect && dl == d && sl == expect;
        details.push(format!("n={n}: |D|={d} |S|={s} (|D|^|D|={expect}; live {dl}/{sl})"));
    }
    report(5, "explosion |S|=|D|^|D|", verdict(pass), &details.join("; "));
    assert!(pass);
}

/// Per-word state of every automaton under test.
#[derive(Clone)]
struct Frame {
    oracle: usize,
    nfa: Vec<StateId>,
    dfa: StateId,
    min: StateId,
    sfa: StateId,
}

struct Sweep<'a> {
    c: &'a Compiled,
    oracle: &'a DerivDfa,
    pattern: &'a str,
    word: Vec<u8>,
    words: u64,
    discrepancies: Vec<String>,
}

impl Sweep<'_> {
    fn visit(&mut self, f: &Frame) {
        let c = self.c;
        let w = self.word.as_slice();
        self.words += 1;
        let expect = self.oracle.nullable[f.oracle];
        let got = [
            f.nfa.iter().any(|&q| c.nfa.is_final(q)),
            c.dfa.is_final(f.dfa),
            c.min_dfa.is_final(f.min),
            c.sfa.is_final(f.sfa),
        ];
        let p = 1 + w.len() % 4;
        let plan = make_chunk_plan(w.len(), p).unwrap();
        let seq = run_dfa_sequential(&c.min_dfa, w);
        let spec = run_dfa_speculative_with(&c.min_dfa, w, &plan, Reduction::Sequential, Dispatch::Inline);
        let sfa = run_sfa_parallel_with(&c.sfa, w, &plan, Reduction::Parallel, Dispatch::Inline);
        let agree = seq.final_states == vec![f.min]
            && spec.final_states == seq.final_states
            && sfa.final_states == seq.final_states
            && [seq.accepted, spec.accepted, sfa.accepted].iter().all(|&a| a == expect);
        if (!agree || got.iter().any(|&g| g != expect)) && self.discrepancies.len() < 5 {
            self.discrepancies.push(format!(
                "{:?} on {:?}: oracle={expect} automata={got:?} engines seq={:?} spec={:?} sfa={:?}",
                self.pattern,
                String::from_utf8_lossy(w),
                seq.final_states,
                spec.final_states,
                sfa.final_states
            ));
        }
        if w.len() == C6_MAX_WORD {
            return;
        }
        let oracle = self.oracle;
        for (li, &b) in oracle.alphabet.iter().enumerate() {
            let next = Frame {
                oracle: oracle.next(f.oracle, li),
                nfa: c.nfa.step(&f.nfa, b),
                dfa: c.dfa.next(f.dfa, b),
                min: c.min_dfa.next(f.min, b),
                sfa: c.sfa.next(f.sfa, b),
            };
            self.word.push(b);
            self.visit(&next);
            self.word.pop();
        }
    }
}

#[test]
fn c06_oracle_equivalence() {
    let alphabet = b"abcd";
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let start = Instant::now();
    let mut words = 0;
    let mut discrepancies = Vec::new();
    for _ in 0..C6_EXPRESSIONS {
        let (re, pattern) = random_re(&mut rng, C6_MAX_DEPTH, alphabet);
        let c = compiled(&pattern);
        let oracle = DerivDfa::new(&re, alphabet);
        let mut sweep = Sweep {
            c: &c,
            oracle: &oracle,
            pattern: &pattern,
            word: Vec::with_capacity(C6_MAX_WORD),
            words: 0,
            discrepancies: Vec::new(),
        };
        sweep.visit(&Frame {
            oracle: 0,
            nfa: c.nfa.initial().to_vec(),
            dfa: c.dfa.initial(),
            min: c.min_dfa.initial(),
            sfa: c.sfa.initial(),
        });
        words += sweep.words;
        discrepancies.extend(sweep.discrepancies);
    }
    let pass = discrepancies.is_empty();
    report(
        6,
        "oracle equivalence",
        verdict(pass),
        &format!(
            "{C6_EXPRESSIONS} expressions, {words} (expression, word) pairs, {} discrepancies in {:?}",
            discrepancies.len(),
            start.elapsed()
        ),
    );
    assert!(pass, "{discrepancies:#?}");
}

fn corpus_inputs(rng: &mut ChaCha8Rng, dfa: &Dfa) -> Vec<Vec<u8>> {
    let reps = dfa.classes().representatives();
    let mut inputs: Vec<Vec<u8>> = (0..3)
        .map(|_| (0..C7_INPUT_LEN).map(|_| reps[rng.gen_range(0..reps.len())]).collect())
        .collect();
    inputs.push((0..C7_INPUT_LEN).map(|_| rng.gen()).collect());
    if let Ok(mut w) = generate_accepted_word(dfa, C7_INPUT_LEN, rng.gen()) {
        w.truncate(C7_INPUT_LEN);
        inputs.push(w);
    }
    inputs
}

#[test]
fn c07_split_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut runs = 0u64;
    let mut discrepancies = Vec::new();
    for pattern in CORPUS {
        let c = compiled(pattern);
        // Set-valued SFAs too, where they stay small.
        let nsfa = construct_from_nfa(&c.nfa, 1 << 16).ok();
        for input in corpus_inputs(&mut rng, &c.min_dfa) {
            let expect = run_dfa_sequential(&c.min_dfa, &input).final_states;
            let nfa_expect = input.iter().fold(c.nfa.initial().to_vec(), |s, &b| c.nfa.step(&s, b));
            for p in C7_THREADS {
                for _ in 0..C7_CHUNKINGS {
                    let plan = ChunkPlan::from_lengths(&random_chunking(&mut rng, input.len(), p));
                    for reduction in [Reduction::Sequential, Reduction::Parallel] {
                        let got = run_sfa_parallel_with(&c.sfa, &input, &plan, reduction, Dispatch::Inline);
                        let spec = run_dfa_speculative_with(&c.min_dfa, &input, &plan, reduction, Dispatch::Inline);
                        runs += 2;
                        if got.final_states != expect || spec.final_states != expect {
                            discrepancies.push(format!("{pattern:?} {:?} {reduction:?}", plan.lengths()));
                        }
                        if let Some(n) = &nsfa {
                            runs += 1;
                            let got = run_sfa_parallel_with(n, &input, &plan, reduction, Dispatch::Inline);
                            if got.final_states != nfa_expect {
                                discrepancies.push(format!("{pattern:?} N-SFA {:?} {reduction:?}", plan.lengths()));
                            }
                        }
                    }
                }
            }
        }
    }
    let pass = discrepancies.is_empty();
    report(
        7,
        "split invariance",
        verdict(pass),
        &format!(
            "{} automata, {runs} chunked runs, {} discrepancies",
            CORPUS.len(),
            discrepancies.len()
        ),
    );
    assert!(pass, "{:#?}", &discrepancies[..discrepancies.len().min(5)]);
}

#[test]
fn c08_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut sfas: Vec<(String, Dfa, Sfa)> = CORPUS
        .iter()
        .map(|p| {
            let c = compiled(p);
            (p.to_string(), c.min_dfa, c.sfa)
        })
        .collect();
    // Set-valued mappings as well.
    for p in ["(ab)*", "(a|b)*abb", "[ap]*[al][alp]{3}", "x(yz)+|[a-c]?q{2,4}"] {
        let c = compiled(p);
        let n = construct_from_nfa(&c.nfa, 1 << 16).unwrap();
        sfas.push((format!("{p} (nfa)"), c.min_dfa, n));
    }

    let mut failures = Vec::new();
    for _ in 0..C8_TRIPLES {
        let (name, _, sfa) = &sfas[rng.gen_range(0..sfas.len())];
        let mut pick = || sfa.mapping(rng.gen_range(0..sfa.state_count() as StateId));
        let (f, g, h) = (pick(), pick(), pick());
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        let id = f.identity_like();
        if left != right || compose(&id, &f).unwrap() != f || compose(&f, &id).unwrap() != f {
            failures.push(format!("{name}: {f:?} {g:?} {h:?}"));
        }
    }

    // Coherence: the mapping of δ_S(s, b) is mapping(s) followed by δ^b.
    let mut checked = 0u64;
    for (name, dfa, sfa) in &sfas {
        if !sfa.is_deterministic() {
            continue;
        }
        let n = dfa.state_count() as StateId;
        let steps: Vec<StateMapping> = (0..=255u8)
            .map(|b| StateMapping::Det((0..n).map(|q| dfa.next(q, b)).collect()))
            .collect();
        for s in 0..sfa.state_count() as StateId {
            let m = sfa.mapping(s);
            for b in 0..=255u8 {
                checked += 1;
                if sfa.mapping(sfa.next(s, b)) != compose(&m, &steps[b as usize]).unwrap() && failures.len() < 5 {
                    failures.push(format!("{name}: state {s} byte {b}"));
                }
            }
        }
    }
    let pass = failures.is_empty();
    report(
        8,
        "algebraic suite",
        verdict(pass),
        &format!(
            "{C8_TRIPLES} triples, {checked} (state, byte) coherence checks, {} failures",
            failures.len()
        ),
    );
    assert!(pass, "{failures:#?}");
}

#[test]
fn c09_work_contract() {
    let c = compiled("([0-4]{5}[5-9]{5})*");
    let input = generate_accepted_word(&c.min_dfa, 1 << 20, 9).unwrap();
    let len = input.len() as u64;
    let q = c.min_dfa.state_count() as u64;
    let mut pass = q >= 2;
    let mut details = Vec::new();
    for p in [1usize, 2, 4, 7] {
        let plan = make_chunk_plan(input.len(), p).unwrap();
        let p = p as u64;
        for reduction in [Reduction::Sequential, Reduction::Parallel] {
            let sfa = run_sfa_parallel_with(&c.sfa, &input, &plan, reduction, Dispatch::Inline);
            let spec = run_dfa_speculative_with(&c.min_dfa, &input, &plan, reduction, Dispatch::Inline);
            let reduce_expect = match reduction {
                Reduction::Sequential => p,
                Reduction::Parallel => (p - 1) * q + 1,
            };
            pass &= sfa.work.scan_lookups == len
                && sfa.work.reduce_accesses == reduce_expect
                && sfa.work.total() <= len + p * q
                && spec.work.scan_lookups == q * len
                && spec.work.total() >= q * len;
            details.push(format!(
                "p={p}/{reduction:?}: sfa={} spec={}",
                sfa.work.total(),
                spec.work.total()
            ));
        }
    }
    report(
        9,
        "work contract",
        verdict(pass),
        &format!("input={len} |Q|={q}; {}", details.join(", ")),
    );
    assert!(pass);
}

fn best_of(samples: usize, mut f: impl FnMut() -> Duration) -> Duration {
    let mut v: Vec<Duration> = (0..samples).map(|_| f()).collect();
    v.sort_unstable();
    v[v.len() / 2]
}

#[test]
fn c10_scalability() {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let start = Instant::now();
    let c = compiled("([0-4]{5}[5-9]{5})*");
    let input = generate_accepted_word(&c.min_dfa, C10_INPUT, 10).unwrap();
    let plan = make_chunk_plan(input.len(), 4).unwrap();
    let mut spec_slower = 0;
    let mut speedups = Vec::new();
    for _ in 0..C10_REPEATS {
        let seq = run_dfa_sequential(&c.min_dfa, &input);
        let sfa = run_sfa_parallel(&c.sfa, &input, &plan, Reduction::Sequential);
        let spec = run_dfa_speculative(&c.min_dfa, &input, &plan, Reduction::Sequential);
        assert!(seq.accepted && sfa.accepted && spec.accepted);
        spec_slower += usize::from(spec.timing.total > sfa.timing.total);
        speedups.push(seq.timing.total.as_secs_f64() / sfa.timing.total.as_secs_f64());
    }
    let elapsed = start.elapsed();
    let spec_pass = spec_slower >= C10_REQUIRED_PASSES && elapsed < C10_MAX_RUNTIME;
    let speedup_passes = speedups.iter().filter(|&&s| s >= C10_SPEEDUP).count();
    let speedups_text: Vec<String> = speedups.iter().map(|s| format!("{s:.2}x")).collect();
    if cores >= C10_MIN_CORES {
        let pass = spec_pass && speedup_passes >= C10_REQUIRED_PASSES;
        report(
            10,
            "scalability",
            verdict(pass),
            &format!(
                "{cores} cores; sfa-par(4)/dfa-seq speedups {speedups_text:?}; dfa-spec(4) slower in {spec_slower}/{C10_REPEATS} in {elapsed:?}"
            ),
        );
        assert!(pass);
    } else {
        report(
            10,
            "scalability",
            if spec_pass { "NOT EVALUATED (speedup) / PASS (dfa-spec slower)" } else { "NOT EVALUATED (speedup) / FAIL (dfa-spec slower)" },
            &format!(
                "only {cores} hardware thread(s), speedup clause needs {C10_MIN_CORES}; observed {speedups_text:?}; dfa-spec(4) slower than sfa-par(4) in {spec_slower}/{C10_REPEATS} in {elapsed:?}"
            ),
        );
        assert!(spec_pass);
    }
}

#[test]
fn c11_overhead_crossover() {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let c = compiled("(([02468][13579]){5})*");
    let full = generate_accepted_word(&c.min_dfa, C11_MAX_INPUT, 11).unwrap();
    let mut rows = Vec::new();
    let mut size = C11_MIN_INPUT;
    while size <= C11_MAX_INPUT {
        let input = &full[..size];
        let plan = make_chunk_plan(size, 2).unwrap();
        let seq = best_of(C11_SAMPLES, || run_dfa_sequential(&c.min_dfa, input).timing.total);
        let par = best_of(C11_SAMPLES, || {
            run_sfa_parallel(&c.sfa, input, &plan, Reduction::Sequential)
                .timing
                .total
        });
        rows.push((size, seq, par));
        size *= 2;
    }
    // Smallest size from which sfa-par wins at every larger measured size.
    let crossover = (0..rows.len())
        .find(|&i| rows[i..].iter().all(|&(_, seq, par)| par < seq))
        .map(|i| rows[i].0);
    let table: Vec<String> = rows
        .iter()
        .map(|(s, seq, par)| {
            format!(
                "{}K:{:.0}/{:.0}us",
                s >> 10,
                seq.as_secs_f64() * 1e6,
                par.as_secs_f64() * 1e6
            )
        })
        .collect();
    let pass = crossover.is_some();
    report(
        11,
        "overhead crossover",
        verdict(pass),
        &format!(
            "{cores} hardware thread(s); crossover={}; dfa-seq/sfa-par(2) medians {}",
            crossover.map_or("none".to_string(), |s| format!("{}K", s >> 10)),
            table.join(" ")
        ),
    );
    assert!(pass, "no crossover up to {} MB", C11_MAX_INPUT >> 20);
}
