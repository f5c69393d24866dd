//! Hopcroft's partition-refinement minimization.
//!
//! The result is canonical: unreachable states are dropped, equivalent
//! states merged, byte classes coarsened to the minimal partition, and states
//! numbered in breadth-first order from the initial state, visiting classes
//! in [`ByteClasses::visit_order`] of the coarsened classes.
//! Two DFAs for the same language minimize to equal values.

use rustc_hash::FxHashMap;

use crate::alphabet::ByteClasses;
use crate::dfa::Dfa;
use crate::StateId;

pub fn minimize_dfa(dfa: &Dfa) -> Dfa {
    let k = dfa.stride();
    let reachable = dfa.reachable();
    let old_ids: Vec<StateId> = (0..dfa.state_count() as StateId)
        .filter(|&q| reachable[q as usize])
        .collect();
    let mut compact = vec![StateId::MAX; dfa.state_count()];
    for (i, &q) in old_ids.iter().enumerate() {
        compact[q as usize] = i as StateId;
    }
    let n = old_ids.len();
    let delta = |s: usize, c: usize| compact[dfa.next_class(old_ids[s], c) as usize] as usize;

    // Predecessors per class in CSR form: preds[offsets[t*k+c]..offsets[t*k+c+1]].
    let mut offsets = vec![0usize; n * k + 1];
    for s in 0..n {
        for c in 0..k {
            offsets[delta(s, c) * k + c + 1] += 1;
        }
    }
    for i in 0..n * k {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut preds = vec![0u32; n * k];
    for s in 0..n {
        for c in 0..k {
            let slot = &mut fill[delta(s, c) * k + c];
            preds[*slot] = s as u32;
            *slot += 1;
        }
    }

    let mut part = Partition::new(n, |s| dfa.is_final(old_ids[s]));
    let mut pending = vec![false; part.len() * k];
    let mut work: Vec<(usize, usize)> = Vec::new();
    if part.len() == 2 {
        let smaller = if part.size(0) <= part.size(1) { 0 } else { 1 };
        for c in 0..k {
            pending[smaller * k + c] = true;
            work.push((smaller, c));
        }
    }

    let mut splitter: Vec<u32> = Vec::new();
    let mut touched: Vec<usize> = Vec::new();
    while let Some((block, c)) = work.pop() {
        pending[block * k + c] = false;
        splitter.clear();
        splitter.extend_from_slice(part.members(block));
        for &t in &splitter {
            let t = t as usize;
            for &s in &preds[offsets[t * k + c]..offsets[t * k + c + 1]] {
                if let Some(b) = part.mark(s as usize) {
                    touched.push(b);
                }
            }
        }
        for b in touched.drain(..) {
            let Some(nb) = part.split(b) else { continue };
            pending.resize(part.len() * k, false);
            for d in 0..k {
                let push = if pending[b * k + d] || part.size(nb) <= part.size(b) {
                    nb
                } else {
                    b
                };
                if !pending[push * k + d] {
                    pending[push * k + d] = true;
                    work.push((push, d));
                }
            }
        }
    }

    // Block transition table, then coarsened classes, then breadth-first
    // renumbering over the coarse classes.
    let blocks = part.len();
    let rep = |b: usize| part.members(b)[0] as usize;
    let mut block_table = Vec::with_capacity(blocks * k);
    for b in 0..blocks {
        for c in 0..k {
            block_table.push(part.block_of(delta(rep(b), c)) as StateId);
        }
    }
    let (classes, block_table) = coarsen(dfa.classes(), block_table, blocks);
    let k = classes.len();
    let visit = classes.visit_order();
    let start = part.block_of(compact[dfa.initial() as usize] as usize);
    let mut order = vec![usize::MAX; blocks];
    let mut seq = Vec::with_capacity(blocks);
    order[start] = 0;
    seq.push(start);
    let mut i = 0;
    while i < seq.len() {
        let b = seq[i];
        for &c in &visit {
            let t = block_table[b * k + c] as usize;
            if order[t] == usize::MAX {
                order[t] = seq.len();
                seq.push(t);
            }
        }
        i += 1;
    }

    let mut table = Vec::with_capacity(blocks * k);
    for &b in &seq {
        for c in 0..k {
            table.push(order[block_table[b * k + c] as usize] as StateId);
        }
    }
    let finals = seq.iter().map(|&b| dfa.is_final(old_ids[rep(b)])).collect();
    Dfa::from_parts(classes, table, 0, finals)
}

/// Merges byte classes whose columns are identical.
fn coarsen(classes: &ByteClasses, table: Vec<StateId>, n: usize) -> (ByteClasses, Vec<StateId>) {
    let k = classes.len();
    let mut column_ids: FxHashMap<Vec<StateId>, u16> = FxHashMap::default();
    let mut class_label = Vec::with_capacity(k);
    for c in 0..k {
        let column: Vec<StateId> = (0..n).map(|q| table[q * k + c]).collect();
        let next = column_ids.len() as u16;
        class_label.push(*column_ids.entry(column).or_insert(next));
    }
    if column_ids.len() == k {
        return (classes.clone(), table);
    }
    let mut labels = [0u16; 256];
    for (b, label) in labels.iter_mut().enumerate() {
        *label = class_label[classes.get(b as u8)];
    }
    let merged = ByteClasses::from_labels(&labels);
    let reps = merged.representatives();
    let mut out = Vec::with_capacity(n * reps.len());
    for q in 0..n {
        for &r in &reps {
            out.push(table[q * k + classes.get(r)]);
        }
    }
    (merged, out)
}

/// Refinable partition of `0..n`. Each block is a contiguous run of `elems`.
struct Partition {
    elems: Vec<u32>,
    index: Vec<usize>,
    block: Vec<usize>,
    bounds: Vec<(usize, usize)>,
    marked: Vec<usize>,
}

impl Partition {
    fn new(n: usize, is_final: impl Fn(usize) -> bool) -> Partition {
        let mut elems: Vec<u32> = (0..n as u32).filter(|&s| is_final(s as usize)).collect();
        let split = elems.len();
        elems.extend((0..n as u32).filter(|&s| !is_final(s as usize)));
        let mut bounds = Vec::new();
        if split > 0 {
            bounds.push((0, split));
        }
        if split < n {
            bounds.push((split, n));
        }
        let mut index = vec![0; n];
        let mut block = vec![0; n];
        for (i, &s) in elems.iter().enumerate() {
            index[s as usize] = i;
            block[s as usize] = if split > 0 && i >= split { 1 } else { 0 };
        }
        let marked = vec![0; bounds.len()];
        Partition {
            elems,
            index,
            block,
            bounds,
            marked,
        }
    }

    fn len(&self) -> usize {
        self.bounds.len()
    }

    fn size(&self, b: usize) -> usize {
        self.bounds[b].1 - self.bounds[b].0
    }

    fn members(&self, b: usize) -> &[u32] {
        let (lo, hi) = self.bounds[b];
        &self.elems[lo..hi]
    }

    fn block_of(&self, s: usize) -> usize {
        self.block[s]
    }

    /// Moves `s` into the marked prefix of its block. Returns the block when
    /// this is its first mark.
    fn mark(&mut self, s: usize) -> Option<usize> {
        let b = self.block[s];
        let (lo, _) = self.bounds[b];
        let slot = lo + self.marked[b];
        let i = self.index[s];
        if i < slot {
            return None;
        }
        let other = self.elems[slot];
        self.elems.swap(i, slot);
        self.index[other as usize] = i;
        self.index[s] = slot;
        self.marked[b] += 1;
        (self.marked[b] == 1).then_some(b)
    }

    /// Splits the marked prefix of `b` off into a new block, unless every
    /// member is marked. Clears the marks either way.
    fn split(&mut self, b: usize) -> Option<usize> {
        let m = std::mem::take(&mut self.marked[b]);
        let (lo, hi) = self.bounds[b];
        if m == hi - lo {
            return None;
        }
        let nb = self.bounds.len();
        self.bounds.push((lo, lo + m));
        self.marked.push(0);
        self.bounds[b] = (lo + m, hi);
        for i in lo..lo + m {
            self.block[self.elems[i] as usize] = nb;
        }
        Some(nb)
    }
}
