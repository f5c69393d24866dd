use std::fmt;

use crate::StateId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum MappingError {
    #[error("mapping domains differ ({left} vs {right} states)")]
    DomainMismatch { left: usize, right: usize },
    #[error("cannot compose a deterministic mapping with a set-valued one")]
    FormMismatch,
}

/// A square boolean matrix; row `q` is the set of states `q` maps to.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BoolMatrix {
    pub fn zeros(n: usize) -> BoolMatrix {
        let words = words_for(n);
        BoolMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn identity(n: usize) -> BoolMatrix {
        let mut m = BoolMatrix::zeros(n);
        for q in 0..n {
            m.set(q, q);
        }
        m
    }

    /// Wraps row-major bit rows, `words_for(n)` words per row.
    pub fn from_rows(n: usize, bits: Vec<u64>) -> BoolMatrix {
        let words = words_for(n);
        assert_eq!(bits.len(), n * words);
        BoolMatrix { n, words, bits }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, row: usize, col: usize) {
        self.bits[row * self.words + col / 64] |= 1 << (col % 64);
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.words + col / 64] & (1 << (col % 64)) != 0
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.bits[row * self.words..(row + 1) * self.words]
    }

    pub fn raw(&self) -> &[u64] {
        &self.bits
    }

    pub fn row_members(&self, row: usize) -> Vec<StateId> {
        members(self.row(row))
    }

    /// Boolean product `self · other`: row `q` of the result is the union of
    /// `other`'s rows selected by row `q` of `self`.
    pub fn product(&self, other: &BoolMatrix) -> BoolMatrix {
        let mut out = BoolMatrix::zeros(self.n);
        for q in 0..self.n {
            let dst = q * self.words;
            for p in members(self.row(q)) {
                for (w, &o) in other.row(p as usize).iter().enumerate() {
                    out.bits[dst + w] |= o;
                }
            }
        }
        out
    }
}

impl fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.n).map(|q| self.row_members(q)))
            .finish()
    }
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

pub(crate) fn members(row: &[u64]) -> Vec<StateId> {
    let mut out = Vec::new();
    for (w, &word) in row.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let b = bits.trailing_zeros();
            out.push((w * 64) as StateId + b);
            bits &= bits - 1;
        }
    }
    out
}

/// One state of a simultaneous automaton: a mapping from states of the
/// source automaton to sets of its states.
///
/// Mappings built from a DFA send every state to exactly one state and are
/// stored as an image vector. Mappings built from an NFA are boolean matrices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum StateMapping {
    Det(Vec<StateId>),
    NonDet(BoolMatrix),
}

impl StateMapping {
    pub fn identity_det(n: usize) -> StateMapping {
        StateMapping::Det((0..n as StateId).collect())
    }

    pub fn identity_nondet(n: usize) -> StateMapping {
        StateMapping::NonDet(BoolMatrix::identity(n))
    }

    /// The identity on the same domain and in the same form as `self`.
    pub fn identity_like(&self) -> StateMapping {
        match self {
            StateMapping::Det(v) => StateMapping::identity_det(v.len()),
            StateMapping::NonDet(m) => StateMapping::identity_nondet(m.size()),
        }
    }

    pub fn domain_size(&self) -> usize {
        match self {
            StateMapping::Det(v) => v.len(),
            StateMapping::NonDet(m) => m.size(),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == self.identity_like()
    }

    /// `f(q)` in ascending order.
    pub fn image(&self, q: StateId) -> Vec<StateId> {
        match self {
            StateMapping::Det(v) => vec![v[q as usize]],
            StateMapping::NonDet(m) => m.row_members(q as usize),
        }
    }

    /// `⋃_{q ∈ states} f(q)` in ascending order.
    pub fn apply_set(&self, states: &[StateId]) -> Vec<StateId> {
        let mut out: Vec<StateId> = states.iter().flat_map(|&q| self.image(q)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Canonical byte encoding: a form tag, the domain size, then the image
    /// vector or matrix rows, little-endian. Equal mappings encode equally.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            StateMapping::Det(v) => {
                out.push(b'D');
                out.extend_from_slice(&(v.len() as u64).to_le_bytes());
                for &t in v {
                    out.extend_from_slice(&t.to_le_bytes());
                }
            }
            StateMapping::NonDet(m) => {
                out.push(b'N');
                out.extend_from_slice(&(m.size() as u64).to_le_bytes());
                for &w in m.raw() {
                    out.extend_from_slice(&w.to_le_bytes());
                }
            }
        }
        out
    }
}

impl fmt::Debug for StateMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateMapping::Det(v) => f.debug_tuple("Det").field(v).finish(),
            StateMapping::NonDet(m) => f.debug_tuple("NonDet").field(m).finish(),
        }
    }
}

/// Reverse composition `f • g`: apply `f`, then `g`.
pub fn compose(f: &StateMapping, g: &StateMapping) -> Result<StateMapping, MappingError> {
    if f.domain_size() != g.domain_size() {
        return Err(MappingError::DomainMismatch {
            left: f.domain_size(),
            right: g.domain_size(),
        });
    }
    match (f, g) {
        (StateMapping::Det(a), StateMapping::Det(b)) => {
            Ok(StateMapping::Det(a.iter().map(|&x| b[x as usize]).collect()))
        }
        (StateMapping::NonDet(a), StateMapping::NonDet(b)) => Ok(StateMapping::NonDet(a.product(b))),
        _ => Err(MappingError::FormMismatch),
    }
}
