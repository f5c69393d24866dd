//! Complete deterministic automata and subset construction.

use std::collections::VecDeque;

use rustc_hash::FxHashMap;

use crate::alphabet::{ByteClasses, ByteSet};
use crate::nfa::Nfa;
use crate::{CapacityError, Stage, StateId};

/// A complete DFA over bytes.
///
/// The transition table is dense over byte classes: the successor of state
/// `q` on byte `b` is `table[q * stride + classes.get(b)]`. Every state has a
/// successor on every byte, so an empty-language residual is an explicit sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    classes: ByteClasses,
    table: Vec<StateId>,
    initial: StateId,
    finals: Vec<bool>,
}

impl Dfa {
    /// Assembles a DFA from a class-indexed table. Panics if the table is
    /// not `finals.len() * classes.len()` long or has out-of-range entries.
    pub fn from_parts(classes: ByteClasses, table: Vec<StateId>, initial: StateId, finals: Vec<bool>) -> Dfa {
        let n = finals.len();
        assert_eq!(table.len(), n * classes.len(), "table shape mismatch");
        assert!((initial as usize) < n, "initial state out of range");
        assert!(table.iter().all(|&t| (t as usize) < n), "target out of range");
        Dfa {
            classes,
            table,
            initial,
            finals,
        }
    }

    /// Builds a DFA from a 256-wide table (`dense[q * 256 + byte]`),
    /// compressing equivalent bytes into classes.
    pub fn from_dense(dense: &[StateId], initial: StateId, finals: Vec<bool>) -> Dfa {
        let n = finals.len();
        assert_eq!(dense.len(), n * 256, "dense table must have 256 columns");
        let mut column_ids: FxHashMap<Vec<StateId>, u16> = FxHashMap::default();
        let mut labels = [0u16; 256];
        for (b, label) in labels.iter_mut().enumerate() {
            let column: Vec<StateId> = (0..n).map(|q| dense[q * 256 + b]).collect();
            let next = column_ids.len() as u16;
            *label = *column_ids.entry(column).or_insert(next);
        }
        let classes = ByteClasses::from_labels(&labels);
        let reps = classes.representatives();
        let mut table = Vec::with_capacity(n * reps.len());
        for q in 0..n {
            for &r in &reps {
                table.push(dense[q * 256 + r as usize]);
            }
        }
        Dfa::from_parts(classes, table, initial, finals)
    }

    pub fn state_count(&self) -> usize {
        self.finals.len()
    }

    pub fn classes(&self) -> &ByteClasses {
        &self.classes
    }

    /// Number of byte classes, i.e. the row width of the table.
    pub fn stride(&self) -> usize {
        self.classes.len()
    }

    pub fn table(&self) -> &[StateId] {
        &self.table
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    #[inline(always)]
    pub fn next(&self, q: StateId, byte: u8) -> StateId {
        self.table[q as usize * self.stride() + self.classes.get(byte)]
    }

    #[inline(always)]
    pub fn next_class(&self, q: StateId, class: usize) -> StateId {
        self.table[q as usize * self.stride() + class]
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q as usize]
    }

    pub fn final_flags(&self) -> &[bool] {
        &self.finals
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.finals
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(q, _)| q as StateId)
    }

    /// The state reached from the initial state after reading `word`.
    pub fn run(&self, word: &[u8]) -> StateId {
        word.iter().fold(self.initial, |q, &b| self.next(q, b))
    }

    pub fn accepts(&self, word: &[u8]) -> bool {
        self.is_final(self.run(word))
    }

    /// `dead[q]` is true when no final state is reachable from `q`.
    pub fn dead_states(&self) -> Vec<bool> {
        let n = self.state_count();
        let k = self.stride();
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for q in 0..n {
            for c in 0..k {
                preds[self.table[q * k + c] as usize].push(q as StateId);
            }
        }
        let mut live = self.finals.clone();
        let mut queue: VecDeque<StateId> = self.finals().collect();
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

    /// Number of states from which some final state is reachable. This is
    /// the size of the automaton with its sink removed.
    pub fn live_state_count(&self) -> usize {
        self.dead_states().iter().filter(|&&d| !d).count()
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let k = self.stride();
        let mut seen = vec![false; self.state_count()];
        seen[self.initial as usize] = true;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            for c in 0..k {
                let t = self.table[q as usize * k + c];
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// Views this DFA as an NFA with singleton transitions.
    pub fn to_nfa(&self) -> Nfa {
        let k = self.stride();
        let members: Vec<ByteSet> = (0..k).map(|c| self.classes.members(c)).collect();
        let mut edges = Vec::new();
        for q in 0..self.state_count() {
            // Merge classes that share a target into one labelled edge.
            let mut by_target: Vec<(StateId, ByteSet)> = Vec::new();
            for (c, label) in members.iter().enumerate() {
                let t = self.table[q * k + c];
                match by_target.iter_mut().find(|(tt, _)| *tt == t) {
                    Some((_, set)) => *set = set.union(label),
                    None => by_target.push((t, *label)),
                }
            }
            edges.extend(by_target.into_iter().map(|(t, set)| (q as StateId, set, t)));
        }
        Nfa::new(self.state_count(), edges, vec![self.initial], self.finals().collect())
    }

    /// True when there is a bijection of states preserving the initial state,
    /// finality and every byte transition. Both automata must be fully
    /// reachable for this to succeed.
    pub fn is_isomorphic(&self, other: &Dfa) -> bool {
        let n = self.state_count();
        if n != other.state_count() {
            return false;
        }
        let mut fwd = vec![StateId::MAX; n];
        let mut bwd = vec![StateId::MAX; n];
        fwd[self.initial as usize] = other.initial;
        bwd[other.initial as usize] = self.initial;
        let mut queue = VecDeque::from([self.initial]);
        let mut mapped = 1;
        while let Some(q) = queue.pop_front() {
            let p = fwd[q as usize];
            if self.is_final(q) != other.is_final(p) {
                return false;
            }
            for b in 0..=255u8 {
                let (tq, tp) = (self.next(q, b), other.next(p, b));
                match (fwd[tq as usize], bwd[tp as usize]) {
                    (StateId::MAX, StateId::MAX) => {
                        fwd[tq as usize] = tp;
                        bwd[tp as usize] = tq;
                        mapped += 1;
                        queue.push_back(tq);
                    }
                    (x, y) if x == tp && y == tq => {}
                    _ => return false,
                }
            }
        }
        mapped == n
    }
}

/// Determinizes `nfa` by the accessible-subset construction.
///
/// DFA state `i` is the `i`-th subset discovered in breadth-first order from
/// the set of initial states, exploring classes in
/// [`ByteClasses::visit_order`]. The empty
/// subset, when reachable, becomes the sink.
pub fn subset_construct(nfa: &Nfa, state_cap: usize) -> Result<Dfa, CapacityError> {
    let classes = nfa.byte_classes();
    let reps = classes.representatives();
    let k = reps.len();
    let n = nfa.state_count();

    // moves[q * k + c] lists δ(q, c).
    let moves: Vec<Vec<StateId>> = (0..n)
        .flat_map(|q| reps.iter().map(move |&r| nfa.targets(q as StateId, r)))
        .collect();

    let mut index: FxHashMap<Box<[StateId]>, StateId> = FxHashMap::default();
    let mut subsets: Vec<Box<[StateId]>> = Vec::new();
    let mut table: Vec<StateId> = Vec::new();

    let start: Box<[StateId]> = nfa.initial().into();
    index.insert(start.clone(), 0);
    subsets.push(start);

    let mut stamp = vec![usize::MAX; n];
    let mut scratch: Vec<StateId> = Vec::new();
    let order = classes.visit_order();
    let mut current = 0;
    while current < subsets.len() {
        table.resize((current + 1) * k, 0);
        for &c in &order {
            scratch.clear();
            let tag = current * k + c;
            for &q in subsets[current].iter() {
                for &t in &moves[q as usize * k + c] {
                    if stamp[t as usize] != tag {
                        stamp[t as usize] = tag;
                        scratch.push(t);
                    }
                }
            }
            scratch.sort_unstable();
            let id = match index.get(scratch.as_slice()) {
                Some(&id) => id,
                None => {
                    if subsets.len() >= state_cap {
                        return Err(CapacityError {
                            stage: Stage::Dfa,
                            limit: state_cap,
                        });
                    }
                    let id = subsets.len() as StateId;
                    let key: Box<[StateId]> = scratch.as_slice().into();
                    index.insert(key.clone(), id);
                    subsets.push(key);
                    id
                }
            };
            table[current * k + c] = id;
        }
        current += 1;
    }

    let finals = subsets.iter().map(|s| s.iter().any(|&q| nfa.is_final(q))).collect();
    Ok(Dfa {
        classes,
        table,
        initial: 0,
        finals,
    })
}
