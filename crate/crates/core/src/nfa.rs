//! ε-free nondeterministic automata and the position (Glushkov) construction.

use crate::alphabet::{ByteClasses, ByteSet};
use crate::regex::RegexAst;
use crate::{CapacityError, Stage, StateId};

/// An NFA `(Q, Σ, δ, I, F)` over bytes.
///
/// Transitions are stored as labelled edges: state `q` reaches `target` on
/// every byte in `label`. The automaton has no ε-moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    edges: Vec<Vec<(ByteSet, StateId)>>,
    initial: Vec<StateId>,
    finals: Vec<bool>,
}

impl Nfa {
    /// Builds an NFA from explicit parts. Panics if any referenced state is
    /// out of range.
    pub fn new(
        state_count: usize,
        edges: Vec<(StateId, ByteSet, StateId)>,
        initial: Vec<StateId>,
        finals: Vec<StateId>,
    ) -> Nfa {
        let mut out = vec![Vec::new(); state_count];
        for (from, label, to) in edges {
            assert!(
                (from as usize) < state_count && (to as usize) < state_count,
                "edge {from}->{to} out of range"
            );
            if !label.is_empty() {
                out[from as usize].push((label, to));
            }
        }
        let mut fin = vec![false; state_count];
        for f in finals {
            fin[f as usize] = true;
        }
        let mut initial = initial;
        initial.sort_unstable();
        initial.dedup();
        assert!(initial.iter().all(|&q| (q as usize) < state_count));
        Nfa {
            edges: out,
            initial,
            finals: fin,
        }
    }

    pub fn state_count(&self) -> usize {
        self.edges.len()
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals[q as usize]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.finals
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(q, _)| q as StateId)
    }

    pub fn edges(&self, q: StateId) -> &[(ByteSet, StateId)] {
        &self.edges[q as usize]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// The coarsest byte partition respecting every edge label.
    pub fn byte_classes(&self) -> ByteClasses {
        ByteClasses::from_sets(self.edges.iter().flatten().map(|(label, _)| label))
    }

    /// `δ(q, byte)` in ascending order.
    pub fn targets(&self, q: StateId, byte: u8) -> Vec<StateId> {
        let mut out: Vec<StateId> = self.edges[q as usize]
            .iter()
            .filter(|(label, _)| label.contains(byte))
            .map(|&(_, t)| t)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The additive extension of `δ` to a sorted set of states.
    pub fn step(&self, states: &[StateId], byte: u8) -> Vec<StateId> {
        let mut seen = vec![false; self.state_count()];
        let mut out = Vec::new();
        for &q in states {
            for &(ref label, t) in &self.edges[q as usize] {
                if label.contains(byte) && !seen[t as usize] {
                    seen[t as usize] = true;
                    out.push(t);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whole-word membership by stepping the set of reachable states.
    pub fn accepts(&self, word: &[u8]) -> bool {
        let end = word.iter().fold(self.initial.clone(), |set, &b| self.step(&set, b));
        end.iter().any(|&q| self.is_final(q))
    }
}

/// Convenience wrapper for [`Nfa::accepts`].
pub fn nfa_accepts(nfa: &Nfa, word: &[u8]) -> bool {
    nfa.accepts(word)
}

/// Position automaton of `ast`: state 0 is the initial state and state `i`
/// (for `i >= 1`) is the `i`-th literal or class leaf, read left to right.
/// Every edge into a position is labelled with that position's byte set.
pub fn build_nfa(ast: &RegexAst, state_cap: usize) -> Result<Nfa, CapacityError> {
    let ast = ast.expand_repeats();
    let positions = ast.positions();
    if positions.saturating_add(1) > state_cap as u64 {
        return Err(CapacityError {
            stage: Stage::Nfa,
            limit: state_cap,
        });
    }
    let mut builder = Glushkov {
        labels: vec![ByteSet::empty()],
        follow: vec![Vec::new()],
    };
    let info = builder.visit(&ast);
    builder.follow[0] = info.first.clone();

    let n = builder.labels.len();
    let mut edges = vec![Vec::new(); n];
    for (q, follow) in builder.follow.iter_mut().enumerate() {
        follow.sort_unstable();
        follow.dedup();
        edges[q] = follow.iter().map(|&p| (builder.labels[p as usize], p)).collect();
    }
    let mut finals = vec![false; n];
    for &p in &info.last {
        finals[p as usize] = true;
    }
    if info.nullable {
        finals[0] = true;
    }
    Ok(Nfa {
        edges,
        initial: vec![0],
        finals,
    })
}

struct Glushkov {
    labels: Vec<ByteSet>,
    follow: Vec<Vec<StateId>>,
}

struct Info {
    nullable: bool,
    first: Vec<StateId>,
    last: Vec<StateId>,
}

impl Glushkov {
    fn leaf(&mut self, set: ByteSet) -> Info {
        let p = self.labels.len() as StateId;
        self.labels.push(set);
        self.follow.push(Vec::new());
        Info {
            nullable: false,
            first: vec![p],
            last: vec![p],
        }
    }

    fn link(&mut self, from: &[StateId], to: &[StateId]) {
        for &l in from {
            self.follow[l as usize].extend_from_slice(to);
        }
    }

    fn visit(&mut self, node: &RegexAst) -> Info {
        match node {
            RegexAst::Empty => Info {
                nullable: false,
                first: vec![],
                last: vec![],
            },
            RegexAst::Epsilon => Info {
                nullable: true,
                first: vec![],
                last: vec![],
            },
            RegexAst::Literal(b) => self.leaf(ByteSet::singleton(*b)),
            RegexAst::Class(set) => self.leaf(*set),
            RegexAst::Concat(items) => {
                let mut acc = Info {
                    nullable: true,
                    first: vec![],
                    last: vec![],
                };
                for item in items {
                    let next = self.visit(item);
                    self.link(&acc.last, &next.first);
                    if acc.nullable {
                        acc.first.extend_from_slice(&next.first);
                    }
                    if next.nullable {
                        acc.last.extend_from_slice(&next.last);
                    } else {
                        acc.last = next.last;
                    }
                    acc.nullable &= next.nullable;
                }
                acc
            }
            RegexAst::Union(items) => {
                let mut acc = Info {
                    nullable: false,
                    first: vec![],
                    last: vec![],
                };
                for item in items {
                    let next = self.visit(item);
                    acc.nullable |= next.nullable;
                    acc.first.extend(next.first);
                    acc.last.extend(next.last);
                }
                acc
            }
            RegexAst::Star(child) => {
                let inner = self.visit(child);
                self.link(&inner.last, &inner.first);
                Info {
                    nullable: true,
                    ..inner
                }
            }
            RegexAst::Repeat { .. } => unreachable!("repeats are expanded before construction"),
        }
    }
}
