//! Graphviz DOT export.
//!
//! States are circles, accepting states double circles. Parallel edges
//! between the same pair of states are merged and labelled with the byte
//! ranges they cover.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::alphabet::{ByteClasses, ByteSet};
use crate::dfa::Dfa;
use crate::nfa::Nfa;
use crate::sfa::Sfa;
use crate::StateId;

pub fn nfa_to_dot(nfa: &Nfa) -> String {
    let mut out = header("nfa", (0..nfa.state_count() as StateId).map(|q| (q, nfa.is_final(q))));
    for &q in nfa.initial() {
        let _ = writeln!(out, "  start -> {q};");
    }
    for q in 0..nfa.state_count() as StateId {
        let mut merged: BTreeMap<StateId, ByteSet> = BTreeMap::new();
        for (set, t) in nfa.edges(q) {
            let e = merged.entry(*t).or_insert_with(ByteSet::empty);
            *e = e.union(set);
        }
        for (t, set) in merged {
            edge(&mut out, q, t, &set);
        }
    }
    out.push_str("}\n");
    out
}

pub fn dfa_to_dot(dfa: &Dfa) -> String {
    table_to_dot(
        "dfa",
        dfa.state_count(),
        dfa.initial(),
        dfa.classes(),
        |q, c| dfa.next_class(q, c),
        |q| dfa.is_final(q),
    )
}

pub fn sfa_to_dot(sfa: &Sfa) -> String {
    table_to_dot(
        "sfa",
        sfa.state_count(),
        sfa.initial(),
        sfa.classes(),
        |s, c| sfa.next_class(s, c),
        |s| sfa.is_final(s),
    )
}

/// One line per SFA state: the state, then the image of every source state.
///
/// ```text
/// f0: 0->{0} 1->{1} 2->{2}
/// ```
pub fn sfa_mapping_dump(sfa: &Sfa) -> String {
    let mut out = String::new();
    let n = sfa.origin().state_count as StateId;
    for s in 0..sfa.state_count() as StateId {
        let m = sfa.mapping(s);
        let _ = write!(out, "f{s}:");
        for q in 0..n {
            let image: Vec<String> = m.image(q).iter().map(|t| t.to_string()).collect();
            let _ = write!(out, " {q}->{{{}}}", image.join(","));
        }
        if sfa.is_final(s) {
            out.push_str(" final");
        }
        out.push('\n');
    }
    out
}

fn table_to_dot(
    name: &str,
    n: usize,
    initial: StateId,
    classes: &ByteClasses,
    next: impl Fn(StateId, usize) -> StateId,
    is_final: impl Fn(StateId) -> bool,
) -> String {
    let mut out = header(name, (0..n as StateId).map(|q| (q, is_final(q))));
    let _ = writeln!(out, "  start -> {initial};");
    for q in 0..n as StateId {
        let mut merged: BTreeMap<StateId, ByteSet> = BTreeMap::new();
        for c in 0..classes.len() {
            let e = merged.entry(next(q, c)).or_insert_with(ByteSet::empty);
            *e = e.union(&classes.members(c));
        }
        for (t, set) in merged {
            edge(&mut out, q, t, &set);
        }
    }
    out.push_str("}\n");
    out
}

fn header(name: &str, states: impl Iterator<Item = (StateId, bool)>) -> String {
    let mut out = format!("digraph {name} {{\n  rankdir=LR;\n  start [shape=point];\n");
    for (q, fin) in states {
        let shape = if fin { "doublecircle" } else { "circle" };
        let _ = writeln!(out, "  {q} [shape={shape}];");
    }
    out
}

fn edge(out: &mut String, from: StateId, to: StateId, set: &ByteSet) {
    let _ = writeln!(out, "  {from} -> {to} [label=\"{}\"];", range_label(set));
}

/// `a-c,x` style label; the full byte range is `.`.
pub fn range_label(set: &ByteSet) -> String {
    if set.is_full() {
        return ".".to_string();
    }
    set.ranges()
        .into_iter()
        .map(|(lo, hi)| match hi - lo {
            0 => show(lo),
            1 => format!("{},{}", show(lo), show(hi)),
            _ => format!("{}-{}", show(lo), show(hi)),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn show(b: u8) -> String {
    if b.is_ascii_alphanumeric() {
        (b as char).to_string()
    } else {
        format!("\\\\x{b:02x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{compile, Limits};

    #[test]
    fn labels() {
        assert_eq!(range_label(&ByteSet::range(b'a', b'c')), "a-c");
        assert_eq!(range_label(&ByteSet::from_bytes(b"ab")), "a,b");
        assert_eq!(range_label(&ByteSet::full()), ".");
        assert_eq!(range_label(&ByteSet::singleton(b' ')), "\\\\x20");
    }

    #[test]
    fn ab_star_graphs() {
        let c = compile("(ab)*", &Limits::default()).unwrap();
        let dot = dfa_to_dot(&c.min_dfa);
        assert!(dot.starts_with("digraph dfa {"));
        assert!(dot.contains("0 [shape=doublecircle]"));
        assert!(dot.contains("0 -> 1 [label=\"a\"]"));
        assert!(dot.contains("1 -> 0 [label=\"b\"]"));
        let nfa = nfa_to_dot(&c.nfa);
        assert!(nfa.contains("start -> 0;"));
        assert!(nfa.contains("0 -> 1 [label=\"a\"]"));
        assert!(nfa.contains("2 -> 1 [label=\"a\"]"));
        let sfa = sfa_to_dot(&c.sfa);
        assert_eq!(sfa.matches("doublecircle").count(), 2);
    }

    #[test]
    fn mapping_dump() {
        let c = compile("(ab)*", &Limits::default()).unwrap();
        let dump = sfa_mapping_dump(&c.sfa);
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "f0: 0->{0} 1->{1} 2->{2} final");
        assert_eq!(lines[1], "f1: 0->{1} 1->{2} 2->{2}");
    }
}
