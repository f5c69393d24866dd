//! Simultaneous finite automata.
//!
//! An SFA built from an automaton `A = (Q, Σ, δ, I, F)` has mappings
//! `f: Q → P(Q)` as states. Its initial state is the identity `f_I`, its
//! transition on `σ` sends `f` to `f • δ^σ`, and `f` is final when some
//! `q ∈ I` has `f(q) ∩ F ≠ ∅`. Reading `w` from `f_I` yields `δ̂^w`, so
//! the SFA accepts exactly `L(A)` while also recording where every other
//! state of `A` would have gone.
//!
//! [`correspondence_construct`] explores the mappings reachable from `f_I`
//! breadth-first, deduplicating them by hash with a full equality check.

mod mapping;

pub use mapping::{compose, BoolMatrix, MappingError, StateMapping};

use std::collections::VecDeque;
use std::hash::{Hash, Hasher};

use rustc_hash::{FxHashMap, FxHasher};

use crate::alphabet::ByteClasses;
use crate::dfa::Dfa;
use crate::nfa::Nfa;
use crate::{CapacityError, Stage, StateId};

/// The parts of the source automaton needed to interpret SFA states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Origin {
    pub state_count: usize,
    pub initial: Vec<StateId>,
    pub finals: Vec<bool>,
    /// States of the source from which no final state is reachable.
    pub dead: Vec<bool>,
    pub deterministic: bool,
}

impl Origin {
    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q as usize]
    }

    pub fn any_final(&self, states: &[StateId]) -> bool {
        states.iter().any(|&q| self.is_final(q))
    }
}

/// Flat storage for every mapping of an SFA, `width` elements per mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Store {
    /// Image vectors for sources with at most 65536 states.
    Narrow(Vec<u16>),
    Wide(Vec<u32>),
    /// Matrix rows, `words_for(n)` words per row.
    Matrix(Vec<u64>),
}

/// A simultaneous finite automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sfa {
    classes: ByteClasses,
    table: Vec<StateId>,
    store: Store,
    width: usize,
    finals: Vec<bool>,
    origin: Origin,
}

/// Borrowed view of one SFA state's mapping.
#[derive(Debug, Clone, Copy)]
pub enum MappingRef<'a> {
    Narrow(&'a [u16]),
    Wide(&'a [u32]),
    Matrix { n: usize, rows: &'a [u64] },
}

impl MappingRef<'_> {
    /// Adds `f(q)` to `out`.
    #[inline]
    pub fn image_into(&self, q: StateId, out: &mut Vec<StateId>) {
        match *self {
            MappingRef::Narrow(v) => out.push(StateId::from(v[q as usize])),
            MappingRef::Wide(v) => out.push(v[q as usize]),
            MappingRef::Matrix { n, rows } => {
                let w = mapping::words_for(n);
                out.extend(mapping::members(&rows[q as usize * w..(q as usize + 1) * w]));
            }
        }
    }

    pub fn to_owned(&self) -> StateMapping {
        match *self {
            MappingRef::Narrow(v) => StateMapping::Det(v.iter().map(|&x| StateId::from(x)).collect()),
            MappingRef::Wide(v) => StateMapping::Det(v.to_vec()),
            MappingRef::Matrix { n, rows } => StateMapping::NonDet(BoolMatrix::from_rows(n, rows.to_vec())),
        }
    }
}

impl Sfa {
    pub fn state_count(&self) -> usize {
        self.finals.len()
    }

    /// The identity mapping is always discovered first.
    pub fn initial(&self) -> StateId {
        0
    }

    pub fn classes(&self) -> &ByteClasses {
        &self.classes
    }

    pub fn stride(&self) -> usize {
        self.classes.len()
    }

    pub fn table(&self) -> &[StateId] {
        &self.table
    }

    pub fn origin(&self) -> &Origin {
        &self.origin
    }

    pub fn is_deterministic(&self) -> bool {
        self.origin.deterministic
    }

    #[inline(always)]
    pub fn next(&self, s: StateId, byte: u8) -> StateId {
        self.table[s as usize * self.stride() + self.classes.get(byte)]
    }

    #[inline(always)]
    pub fn next_class(&self, s: StateId, class: usize) -> StateId {
        self.table[s as usize * self.stride() + class]
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals[s as usize]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.finals
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(s, _)| s as StateId)
    }

    pub fn mapping_ref(&self, s: StateId) -> MappingRef<'_> {
        let (lo, hi) = (s as usize * self.width, (s as usize + 1) * self.width);
        match &self.store {
            Store::Narrow(v) => MappingRef::Narrow(&v[lo..hi]),
            Store::Wide(v) => MappingRef::Wide(&v[lo..hi]),
            Store::Matrix(v) => MappingRef::Matrix {
                n: self.origin.state_count,
                rows: &v[lo..hi],
            },
        }
    }

    pub fn mapping(&self, s: StateId) -> StateMapping {
        self.mapping_ref(s).to_owned()
    }

    /// The SFA state reached from `f_I` on `word`.
    pub fn run(&self, word: &[u8]) -> StateId {
        word.iter().fold(self.initial(), |s, &b| self.next(s, b))
    }

    pub fn accepts(&self, word: &[u8]) -> bool {
        self.is_final(self.run(word))
    }

    /// True when `s` maps every source state into the dead states, which
    /// makes it an absorbing non-accepting state.
    pub fn is_dead_mapping(&self, s: StateId) -> bool {
        let mut image = Vec::new();
        let m = self.mapping_ref(s);
        for q in 0..self.origin.state_count as StateId {
            image.clear();
            m.image_into(q, &mut image);
            if image.iter().any(|&p| !self.origin.dead[p as usize]) {
                return false;
            }
        }
        true
    }

    /// Number of states excluding dead mappings, the counterpart of
    /// [`Dfa::live_state_count`].
    pub fn live_state_count(&self) -> usize {
        (0..self.state_count() as StateId)
            .filter(|&s| !self.is_dead_mapping(s))
            .count()
    }

    /// Approximate heap footprint of the table and mapping store in bytes.
    pub fn memory_bytes(&self) -> usize {
        let store = match &self.store {
            Store::Narrow(v) => v.len() * 2,
            Store::Wide(v) => v.len() * 4,
            Store::Matrix(v) => v.len() * 8,
        };
        self.table.len() * 4 + store
    }
}

/// `true` iff `s` is a final SFA state.
pub fn sfa_accept_state(sfa: &Sfa, s: StateId) -> bool {
    sfa.is_final(s)
}

/// Source automaton for [`correspondence_construct`].
#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    Dfa(&'a Dfa),
    Nfa(&'a Nfa),
}

impl<'a> From<&'a Dfa> for Source<'a> {
    fn from(d: &'a Dfa) -> Self {
        Source::Dfa(d)
    }
}

impl<'a> From<&'a Nfa> for Source<'a> {
    fn from(n: &'a Nfa) -> Self {
        Source::Nfa(n)
    }
}

/// Builds the SFA of a DFA (a D-SFA) or of an NFA (an N-SFA).
///
/// Construction from an NFA may produce up to `2^(n²)` states and is
/// mainly useful for small automata.
pub fn correspondence_construct<'a>(source: impl Into<Source<'a>>, state_cap: usize) -> Result<Sfa, CapacityError> {
    match source.into() {
        Source::Dfa(d) => construct_from_dfa(d, state_cap),
        Source::Nfa(n) => construct_from_nfa(n, state_cap),
    }
}

pub fn construct_from_dfa(dfa: &Dfa, state_cap: usize) -> Result<Sfa, CapacityError> {
    let n = dfa.state_count();
    let origin = Origin {
        state_count: n,
        initial: vec![dfa.initial()],
        finals: dfa.final_flags().to_vec(),
        dead: dfa.dead_states(),
        deterministic: true,
    };
    if n <= 1 << 16 {
        let (data, table) = explore_det::<u16>(dfa, state_cap)?;
        Ok(finish(dfa.classes().clone(), table, Store::Narrow(data), n, origin))
    } else {
        let (data, table) = explore_det::<u32>(dfa, state_cap)?;
        Ok(finish(dfa.classes().clone(), table, Store::Wide(data), n, origin))
    }
}

pub fn construct_from_nfa(nfa: &Nfa, state_cap: usize) -> Result<Sfa, CapacityError> {
    let n = nfa.state_count();
    let classes = nfa.byte_classes();
    let reps = classes.representatives();
    let w = mapping::words_for(n);

    // step[c] holds the matrix of δ^c.
    let step: Vec<BoolMatrix> = reps
        .iter()
        .map(|&r| {
            let mut m = BoolMatrix::zeros(n);
            for q in 0..n {
                for t in nfa.targets(q as StateId, r) {
                    m.set(q, t as usize);
                }
            }
            m
        })
        .collect();

    let identity = BoolMatrix::identity(n);
    let (data, table) = explore(identity.raw(), &classes.visit_order(), state_cap, |cur, c, out| {
        out.clear();
        out.resize(n * w, 0);
        for q in 0..n {
            for p in mapping::members(&cur[q * w..(q + 1) * w]) {
                for (dst, &src) in out[q * w..(q + 1) * w].iter_mut().zip(step[c].row(p as usize)) {
                    *dst |= src;
                }
            }
        }
    })?;

    let origin = Origin {
        state_count: n,
        initial: nfa.initial().to_vec(),
        finals: (0..n as StateId).map(|q| nfa.is_final(q)).collect(),
        dead: nfa_dead_states(nfa),
        deterministic: false,
    };
    Ok(finish(classes, table, Store::Matrix(data), n * w, origin))
}

fn finish(classes: ByteClasses, table: Vec<StateId>, store: Store, width: usize, origin: Origin) -> Sfa {
    let count = match &store {
        Store::Narrow(v) => v.len(),
        Store::Wide(v) => v.len(),
        Store::Matrix(v) => v.len(),
    } / width.max(1);
    let mut sfa = Sfa {
        classes,
        table,
        store,
        width,
        finals: Vec::new(),
        origin,
    };
    let mut image = Vec::new();
    sfa.finals = (0..count as StateId)
        .map(|s| {
            let m = sfa.mapping_ref(s);
            image.clear();
            for &q in &sfa.origin.initial {
                m.image_into(q, &mut image);
            }
            sfa.origin.any_final(&image)
        })
        .collect();
    sfa
}

fn nfa_dead_states(nfa: &Nfa) -> Vec<bool> {
    let n = nfa.state_count();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for q in 0..n as StateId {
        for &(_, t) in nfa.edges(q) {
            preds[t as usize].push(q);
        }
    }
    let mut live: Vec<bool> = (0..n as StateId).map(|q| nfa.is_final(q)).collect();
    let mut queue: VecDeque<StateId> = nfa.finals().collect();
    while let Some(q) = queue.pop_front() {
        for &p in &preds[q as usize] {
            if !live[p as usize] {
                live[p as usize] = true;
                queue.push_back(p);
            }
        }
    }
    live.into_iter().map(|l| !l).collect()
}

/// Element type of a deterministic mapping image.
trait Image: Copy + Eq + Hash + Default {
    fn from_state(q: StateId) -> Self;
    fn index(self) -> usize;
}

impl Image for u16 {
    fn from_state(q: StateId) -> Self {
        q as u16
    }
    fn index(self) -> usize {
        self as usize
    }
}

impl Image for u32 {
    fn from_state(q: StateId) -> Self {
        q
    }
    fn index(self) -> usize {
        self as usize
    }
}

fn explore_det<T: Image>(dfa: &Dfa, state_cap: usize) -> Result<(Vec<T>, Vec<StateId>), CapacityError> {
    let n = dfa.state_count();
    let k = dfa.stride();
    // columns[c][q] = δ(q, c)
    let columns: Vec<Vec<T>> = (0..k)
        .map(|c| (0..n as StateId).map(|q| T::from_state(dfa.next_class(q, c))).collect())
        .collect();
    let identity: Vec<T> = (0..n as StateId).map(T::from_state).collect();
    explore(&identity, &dfa.classes().visit_order(), state_cap, |cur, c, out| {
        let col = &columns[c];
        out.clear();
        out.extend(cur.iter().map(|&q| col[q.index()]));
    })
}

/// Breadth-first exploration of the mappings reachable from `identity`.
/// `step(cur, class, out)` writes the successor of `cur` on `class` to `out`.
fn explore<T, F>(
    identity: &[T],
    order: &[usize],
    state_cap: usize,
    mut step: F,
) -> Result<(Vec<T>, Vec<StateId>), CapacityError>
where
    T: Copy + Eq + Hash + Default,
    F: FnMut(&[T], usize, &mut Vec<T>),
{
    let mut interner = Interner::new(identity.len());
    interner.intern(identity);
    let mut table: Vec<StateId> = Vec::new();
    let mut cur: Vec<T> = Vec::with_capacity(identity.len());
    let mut next: Vec<T> = Vec::with_capacity(identity.len());
    let k = order.len();
    let mut s = 0;
    while s < interner.len() {
        cur.clear();
        cur.extend_from_slice(interner.get(s));
        table.resize((s + 1) * k, 0);
        for &c in order {
            step(&cur, c, &mut next);
            let id = match interner.find(&next) {
                Some(id) => id,
                None => {
                    if interner.len() >= state_cap {
                        return Err(CapacityError {
                            stage: Stage::Sfa,
                            limit: state_cap,
                        });
                    }
                    interner.intern(&next)
                }
            };
            table[s * k + c] = id;
        }
        s += 1;
    }
    Ok((interner.data, table))
}

/// Fixed-width slice interner: ids are assigned in insertion order.
struct Interner<T> {
    width: usize,
    data: Vec<T>,
    heads: FxHashMap<u64, StateId>,
    chain: Vec<StateId>,
}

impl<T: Copy + Eq + Hash> Interner<T> {
    fn new(width: usize) -> Self {
        Interner {
            width,
            data: Vec::new(),
            heads: FxHashMap::default(),
            chain: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.chain.len()
    }

    fn get(&self, id: usize) -> &[T] {
        &self.data[id * self.width..(id + 1) * self.width]
    }

    fn hash(item: &[T]) -> u64 {
        let mut h = FxHasher::default();
        item.hash(&mut h);
        h.finish()
    }

    fn find(&self, item: &[T]) -> Option<StateId> {
        let mut id = *self.heads.get(&Self::hash(item))?;
        loop {
            if self.get(id as usize) == item {
                return Some(id);
            }
            id = self.chain[id as usize];
            if id == StateId::MAX {
                return None;
            }
        }
    }

    /// Appends `item`, which must not already be present.
    fn intern(&mut self, item: &[T]) -> StateId {
        let id = self.chain.len() as StateId;
        self.data.extend_from_slice(item);
        let prev = self.heads.insert(Self::hash(item), id);
        self.chain.push(prev.unwrap_or(StateId::MAX));
        id
    }
}
