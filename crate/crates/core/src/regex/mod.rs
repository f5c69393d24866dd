//! Regular expression syntax trees over the byte alphabet.
//!
//! The supported syntax is a POSIX-ERE-like subset:
//!
//! * literals, with `\` escaping any metacharacter (`\.[]()|*+?{}^$`);
//! * `\n \t \r \f \v \a \e \0`, `\xHH` and `\x{HH}` byte escapes;
//! * `\d \D \w \W \s \S` ASCII class escapes;
//! * `.` for any byte, newline included;
//! * bracket classes `[...]` with ranges, `^` negation and POSIX names such as
//!   `[:alpha:]`;
//! * grouping with `(...)`, `(?:...)` and named groups;
//! * `|`, `*`, `+`, `?`, `{n}`, `{n,}` and `{n,m}`.
//!
//! Back-references, anchors, look-around and inline flags are rejected with
//! [`RegexError::Unsupported`]. Bounded repetition is unrolled while parsing,
//! so trees returned by [`parse_regex`] never contain [`RegexAst::Repeat`].

mod parse;

pub use parse::{parse_regex, parse_regex_with_limit, DEFAULT_POSITION_LIMIT};

use std::fmt;

use crate::alphabet::ByteSet;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum RegexError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unsupported feature at offset {position}: {feature}")]
    Unsupported { position: usize, feature: String },
    #[error("expression expands to {positions} positions, limit is {limit}")]
    TooLarge { positions: u64, limit: u64 },
}

/// A regular expression over bytes.
///
/// Use the constructor functions ([`RegexAst::concat`], [`RegexAst::union`],
/// [`RegexAst::star`], ...) to keep trees normalized: `Concat` and `Union`
/// always have at least two children, never directly nest themselves, and
/// `Class` is never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RegexAst {
    /// The empty language.
    Empty,
    /// The language containing only the empty word.
    Epsilon,
    Literal(u8),
    Class(ByteSet),
    Concat(Vec<RegexAst>),
    Union(Vec<RegexAst>),
    Star(Box<RegexAst>),
    Repeat {
        child: Box<RegexAst>,
        min: u32,
        max: Option<u32>,
    },
}

impl RegexAst {
    pub fn class(set: ByteSet) -> RegexAst {
        if set.is_empty() {
            RegexAst::Empty
        } else {
            RegexAst::Class(set)
        }
    }

    pub fn any_byte() -> RegexAst {
        RegexAst::Class(ByteSet::full())
    }

    pub fn concat(items: Vec<RegexAst>) -> RegexAst {
        let mut flat = Vec::with_capacity(items.len());
        for item in items {
            match item {
                RegexAst::Empty => return RegexAst::Empty,
                RegexAst::Epsilon => {}
                RegexAst::Concat(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => RegexAst::Epsilon,
            1 => flat.pop().unwrap(),
            _ => RegexAst::Concat(flat),
        }
    }

    pub fn union(items: Vec<RegexAst>) -> RegexAst {
        let mut flat = Vec::with_capacity(items.len());
        for item in items {
            match item {
                RegexAst::Empty => {}
                RegexAst::Union(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => RegexAst::Empty,
            1 => flat.pop().unwrap(),
            _ => RegexAst::Union(flat),
        }
    }

    pub fn star(child: RegexAst) -> RegexAst {
        match child {
            RegexAst::Empty | RegexAst::Epsilon => RegexAst::Epsilon,
            s @ RegexAst::Star(_) => s,
            other => RegexAst::Star(Box::new(other)),
        }
    }

    /// `x+`, desugared to `x x*`.
    pub fn plus(child: RegexAst) -> RegexAst {
        RegexAst::concat(vec![child.clone(), RegexAst::star(child)])
    }

    /// `x?`, desugared to `x | ε`.
    pub fn optional(child: RegexAst) -> RegexAst {
        match child {
            RegexAst::Epsilon => RegexAst::Epsilon,
            RegexAst::Empty => RegexAst::Epsilon,
            other => RegexAst::union(vec![other, RegexAst::Epsilon]),
        }
    }

    /// `x{min,max}` unrolled into concatenations and nested optionals, so
    /// the result has `max` (or `min + 1` when unbounded) copies of `x`.
    pub fn repeat(child: RegexAst, min: u32, max: Option<u32>) -> RegexAst {
        let mut parts: Vec<RegexAst> = (0..min).map(|_| child.clone()).collect();
        match max {
            None => parts.push(RegexAst::star(child)),
            Some(max) => {
                let mut tail = RegexAst::Epsilon;
                for _ in min..max {
                    tail = RegexAst::optional(RegexAst::concat(vec![child.clone(), tail]));
                }
                parts.push(tail);
            }
        }
        RegexAst::concat(parts)
    }

    /// Rewrites any `Repeat` nodes into their unrolled form.
    pub fn expand_repeats(&self) -> RegexAst {
        match self {
            RegexAst::Concat(items) => RegexAst::concat(items.iter().map(RegexAst::expand_repeats).collect()),
            RegexAst::Union(items) => RegexAst::union(items.iter().map(RegexAst::expand_repeats).collect()),
            RegexAst::Star(child) => RegexAst::star(child.expand_repeats()),
            RegexAst::Repeat { child, min, max } => RegexAst::repeat(child.expand_repeats(), *min, *max),
            RegexAst::Class(set) => RegexAst::class(*set),
            other => other.clone(),
        }
    }

    /// Number of literal and class leaves once repeats are unrolled. This is
    /// the number of non-initial states of the position automaton.
    pub fn positions(&self) -> u64 {
        match self {
            RegexAst::Empty | RegexAst::Epsilon => 0,
            RegexAst::Literal(_) | RegexAst::Class(_) => 1,
            RegexAst::Concat(items) | RegexAst::Union(items) => {
                items.iter().map(RegexAst::positions).fold(0u64, u64::saturating_add)
            }
            RegexAst::Star(child) => child.positions(),
            RegexAst::Repeat { child, min, max } => {
                let copies = match max {
                    Some(m) => u64::from(*m),
                    None => u64::from(*min) + 1,
                };
                child.positions().saturating_mul(copies)
            }
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(
            self,
            RegexAst::Empty | RegexAst::Epsilon | RegexAst::Literal(_) | RegexAst::Class(_)
        )
    }
}

const META: &[u8] = b"\\.[]()|*+?{}^$";

fn write_literal(f: &mut fmt::Formatter<'_>, byte: u8) -> fmt::Result {
    if META.contains(&byte) {
        write!(f, "\\{}", byte as char)
    } else if byte.is_ascii_graphic() || byte == b' ' {
        write!(f, "{}", byte as char)
    } else {
        write!(f, "\\x{:02x}", byte)
    }
}

fn write_class_byte(f: &mut fmt::Formatter<'_>, byte: u8) -> fmt::Result {
    if byte.is_ascii_alphanumeric() {
        write!(f, "{}", byte as char)
    } else {
        write!(f, "\\x{:02x}", byte)
    }
}

fn write_class(f: &mut fmt::Formatter<'_>, set: &ByteSet) -> fmt::Result {
    if set.is_full() {
        return write!(f, ".");
    }
    write!(f, "[")?;
    for (lo, hi) in set.ranges() {
        write_class_byte(f, lo)?;
        if hi - lo == 1 {
            write_class_byte(f, hi)?;
        } else if hi > lo {
            write!(f, "-")?;
            write_class_byte(f, hi)?;
        }
    }
    write!(f, "]")
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &RegexAst) -> fmt::Result {
    match node {
        RegexAst::Empty => write!(f, "[^\\x00-\\xff]"),
        RegexAst::Epsilon => write!(f, "()"),
        RegexAst::Literal(b) => write_literal(f, *b),
        RegexAst::Class(set) => write_class(f, set),
        RegexAst::Concat(items) => {
            for item in items {
                if matches!(item, RegexAst::Union(_)) {
                    write!(f, "(")?;
                    write_node(f, item)?;
                    write!(f, ")")?;
                } else {
                    write_node(f, item)?;
                }
            }
            Ok(())
        }
        RegexAst::Union(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, "|")?;
                }
                write_node(f, item)?;
            }
            Ok(())
        }
        RegexAst::Star(child) => {
            write_quantified(f, child)?;
            write!(f, "*")
        }
        RegexAst::Repeat { child, min, max } => {
            write_quantified(f, child)?;
            match max {
                Some(m) if m == min => write!(f, "{{{}}}", min),
                Some(m) => write!(f, "{{{},{}}}", min, m),
                None => write!(f, "{{{},}}", min),
            }
        }
    }
}

fn write_quantified(f: &mut fmt::Formatter<'_>, child: &RegexAst) -> fmt::Result {
    if child.is_atomic() && !matches!(child, RegexAst::Epsilon) {
        write_node(f, child)
    } else {
        write!(f, "(")?;
        write_node(f, child)?;
        write!(f, ")")
    }
}

/// Prints the tree in the accepted syntax. Re-parsing the output of a
/// normalized tree yields the same tree.
impl fmt::Display for RegexAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, self)
    }
}
