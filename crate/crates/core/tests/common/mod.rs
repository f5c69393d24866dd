//! Test oracles that share no code with the library's pipeline.
//!
//! `Re` is a tiny regex type over bytes with its own printer. Membership is
//! decided with Brzozowski derivatives, interned into an explicit automaton
//! (`DerivDfa`) so whole word sets can be swept cheaply.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Re {
    Empty,
    Eps,
    Set(BTreeSet<u8>),
    Cat(Vec<Re>),
    Alt(Vec<Re>),
    Star(Box<Re>),
}

pub fn set(bytes: &[u8]) -> Re {
    if bytes.is_empty() {
        Re::Empty
    } else {
        Re::Set(bytes.iter().copied().collect())
    }
}

pub fn cat(items: Vec<Re>) -> Re {
    let mut out = Vec::new();
    for r in items {
        match r {
            Re::Empty => return Re::Empty,
            Re::Eps => {}
            Re::Cat(v) => out.extend(v),
            r => out.push(r),
        }
    }
    match out.len() {
        0 => Re::Eps,
        1 => out.pop().unwrap(),
        _ => Re::Cat(out),
    }
}

pub fn alt(items: Vec<Re>) -> Re {
    let mut out = BTreeSet::new();
    for r in items {
        match r {
            Re::Empty => {}
            Re::Alt(v) => out.extend(v),
            r => {
                out.insert(r);
            }
        }
    }
    let mut out: Vec<Re> = out.into_iter().collect();
    match out.len() {
        0 => Re::Empty,
        1 => out.pop().unwrap(),
        _ => Re::Alt(out),
    }
}

pub fn star(r: Re) -> Re {
    match r {
        Re::Empty | Re::Eps => Re::Eps,
        Re::Star(_) => r,
        r => Re::Star(Box::new(r)),
    }
}

impl Re {
    pub fn nullable(&self) -> bool {
        match self {
            Re::Empty | Re::Set(_) => false,
            Re::Eps | Re::Star(_) => true,
            Re::Cat(v) => v.iter().all(Re::nullable),
            Re::Alt(v) => v.iter().any(Re::nullable),
        }
    }

    pub fn deriv(&self, b: u8) -> Re {
        match self {
            Re::Empty | Re::Eps => Re::Empty,
            Re::Set(s) => {
                if s.contains(&b) {
                    Re::Eps
                } else {
                    Re::Empty
                }
            }
            Re::Cat(v) => {
                let head = cat(std::iter::once(v[0].deriv(b)).chain(v[1..].iter().cloned()).collect());
                if v[0].nullable() {
                    alt(vec![head, cat(v[1..].to_vec()).deriv(b)])
                } else {
                    head
                }
            }
            Re::Alt(v) => alt(v.iter().map(|r| r.deriv(b)).collect()),
            Re::Star(r) => cat(vec![r.deriv(b), self.clone()]),
        }
    }

    pub fn matches(&self, word: &[u8]) -> bool {
        let mut r = self.clone();
        for &b in word {
            r = r.deriv(b);
        }
        r.nullable()
    }

    /// Pattern text in the library's syntax.
    pub fn to_pattern(&self) -> String {
        match self {
            Re::Empty => "[^\\x00-\\xff]".to_string(),
            Re::Eps => "()".to_string(),
            Re::Set(s) if s.len() == 1 => byte_text(*s.iter().next().unwrap()),
            Re::Set(s) => format!("[{}]", s.iter().map(|&b| byte_text(b)).collect::<String>()),
            Re::Cat(v) => v.iter().map(|r| format!("({})", r.to_pattern())).collect(),
            Re::Alt(v) => format!("({})", v.iter().map(|r| r.to_pattern()).collect::<Vec<_>>().join("|")),
            Re::Star(r) => format!("({})*", r.to_pattern()),
        }
    }
}

fn byte_text(b: u8) -> String {
    if b.is_ascii_alphanumeric() {
        (b as char).to_string()
    } else {
        format!("\\x{b:02x}")
    }
}

/// A random expression of depth at most `depth` over `alphabet`. Besides the
/// core forms, the generated pattern text may use `+`, `?` and `{m,n}`, whose
/// oracle meaning is given by expansion.
pub fn random_re<R: Rng>(rng: &mut R, depth: u32, alphabet: &[u8]) -> (Re, String) {
    if depth <= 1 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => (Re::Eps, "()".to_string()),
            1 => {
                let k = rng.gen_range(1..=alphabet.len());
                let mut bytes: Vec<u8> = alphabet.choose_multiple(rng, k).copied().collect();
                bytes.sort_unstable();
                let r = set(&bytes);
                let p = r.to_pattern();
                (r, p)
            }
            _ => {
                let b = *alphabet.choose(rng).unwrap();
                (set(&[b]), byte_text(b))
            }
        };
    }
    match rng.gen_range(0..7) {
        0 | 1 => {
            let n = rng.gen_range(2..=3);
            let parts: Vec<(Re, String)> = (0..n).map(|_| random_re(rng, depth - 1, alphabet)).collect();
            let text = parts.iter().map(|(_, p)| format!("({p})")).collect();
            (cat(parts.into_iter().map(|(r, _)| r).collect()), text)
        }
        2 | 3 => {
            let n = rng.gen_range(2..=3);
            let parts: Vec<(Re, String)> = (0..n).map(|_| random_re(rng, depth - 1, alphabet)).collect();
            let text = format!(
                "({})",
                parts.iter().map(|(_, p)| p.as_str()).collect::<Vec<_>>().join("|")
            );
            (alt(parts.into_iter().map(|(r, _)| r).collect()), text)
        }
        4 => {
            let (r, p) = random_re(rng, depth - 1, alphabet);
            (star(r), format!("({p})*"))
        }
        5 => {
            let (r, p) = random_re(rng, depth - 1, alphabet);
            if rng.gen_bool(0.5) {
                (cat(vec![r.clone(), star(r)]), format!("({p})+"))
            } else {
                (alt(vec![Re::Eps, r]), format!("({p})?"))
            }
        }
        _ => {
            let (r, p) = random_re(rng, depth - 1, alphabet);
            let min = rng.gen_range(0..=2u32);
            let max = min + rng.gen_range(0..=2u32);
            let mut parts = vec![r.clone(); min as usize];
            parts.extend(std::iter::repeat_n(alt(vec![Re::Eps, r]), (max - min) as usize));
            (cat(parts), format!("({p}){{{min},{max}}}"))
        }
    }
}

/// Derivatives of one expression, interned: state 0 is the expression
/// itself and `next(s, i)` is the derivative by `alphabet[i]`.
pub struct DerivDfa {
    pub alphabet: Vec<u8>,
    terms: Vec<Re>,
    ids: HashMap<Re, usize>,
    trans: Vec<Vec<usize>>,
    pub nullable: Vec<bool>,
}

impl DerivDfa {
    pub fn new(re: &Re, alphabet: &[u8]) -> DerivDfa {
        let mut d = DerivDfa {
            alphabet: alphabet.to_vec(),
            terms: Vec::new(),
            ids: HashMap::new(),
            trans: Vec::new(),
            nullable: Vec::new(),
        };
        d.intern(re.clone());
        let mut i = 0;
        while i < d.terms.len() {
            let row: Vec<usize> = alphabet
                .iter()
                .map(|&b| {
                    let t = d.terms[i].deriv(b);
                    d.intern(t)
                })
                .collect();
            d.trans.push(row);
            i += 1;
        }
        d
    }

    fn intern(&mut self, r: Re) -> usize {
        if let Some(&id) = self.ids.get(&r) {
            return id;
        }
        let id = self.terms.len();
        self.nullable.push(r.nullable());
        self.ids.insert(r.clone(), id);
        self.terms.push(r);
        id
    }

    pub fn next(&self, s: usize, letter: usize) -> usize {
        self.trans[s][letter]
    }
}

/// Calls `visit(word, letters)` for every word over `alphabet` of length at
/// most `max_len`, in depth-first order; `letters` are alphabet indices.
pub fn for_each_word(alphabet: &[u8], max_len: usize, mut visit: impl FnMut(&[u8], &[usize])) {
    fn go(
        alphabet: &[u8],
        max_len: usize,
        word: &mut Vec<u8>,
        idx: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[u8], &[usize]),
    ) {
        visit(word, idx);
        if word.len() == max_len {
            return;
        }
        for (i, &b) in alphabet.iter().enumerate() {
            word.push(b);
            idx.push(i);
            go(alphabet, max_len, word, idx, visit);
            word.pop();
            idx.pop();
        }
    }
    go(alphabet, max_len, &mut Vec::new(), &mut Vec::new(), &mut visit);
}

/// Lengths of a random division of `len` into `parts` chunks; chunks may be
/// empty.
pub fn random_chunking<R: Rng>(rng: &mut R, len: usize, parts: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = (0..parts - 1).map(|_| rng.gen_range(0..=len)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(len - prev);
    out
}

/// Patterns used as a fixed corpus by several suites.
pub const CORPUS: &[&str] = &[
    "(ab)*",
    "",
    "[^\\x00-\\xff]",
    "a*",
    ".*",
    "(a|b)*abb",
    "([0-4]{2}[5-9]{2})*",
    "([0-4]{5}[5-9]{5})*",
    "(([02468][13579]){5})*",
    "[ap]*[al][alp]{3}",
    "(m|(t|c([mt]*c){1})[cmt])*",
    "(m|(t|c([mt]*c){2})[cmt])*",
    ".*(T.*T.*Y.*P.*P.*R.*O.*M.*P.*T.*)",
    ".*(ab|cd).*",
    "x(yz)+|[a-c]?q{2,4}",
    "\\d+\\.\\d*|\\w\\s",
];
