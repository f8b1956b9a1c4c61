// SPDX-License-Identifier: Apache-2.0

//! Graphviz rendering of composed automata and contracts.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::automata::Alphabet;
use crate::composition::ComposedAutomaton;
use crate::contract::{ContractAutomaton, Guard};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn header(name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph {} {{", quote(name));
    let _ = writeln!(s, "  rankdir=LR;");
    let _ = writeln!(s, "  node [shape=ellipse];");
    let _ = writeln!(s, "  __init [shape=point];");
    s
}

/// Composed automaton; states in `flagged` get a double border. Edge labels
/// carry the participation tag.
pub fn composed(
    name: &str,
    c: &ComposedAutomaton,
    state_notes: impl Fn(usize) -> Vec<String>,
    flagged: &BTreeSet<usize>,
) -> String {
    let al = c.alphabet();
    let mut s = header(name);
    let _ = writeln!(s, "  __init -> n{};", c.initial());
    for i in 0..c.state_count() {
        let mut label = c.state_name(i).to_string();
        for note in state_notes(i) {
            label.push('\n');
            label.push_str(&note);
        }
        let extra = if flagged.contains(&i) { ", peripheries=2" } else { "" };
        let _ = writeln!(s, "  n{i} [label={}{extra}];", quote(&label));
    }
    for t in c.transitions() {
        let label = format!("{} [{}]", al.render(t.label), t.participation);
        let _ = writeln!(s, "  n{} -> n{} [label={}];", t.source, t.target, quote(&label));
    }
    s.push_str("}\n");
    s
}

/// Contract automaton with clause labels and guards.
pub fn contract(
    name: &str,
    ca: &ContractAutomaton,
    parties: Option<&[String; 2]>,
    flagged: &BTreeSet<usize>,
) -> String {
    let al: &Alphabet = ca.alphabet();
    let mut s = header(name);
    let _ = writeln!(s, "  __init -> n{};", ca.initial().0);
    for q in ca.states() {
        let mut label = ca.state_name(q).to_string();
        let clauses: Vec<String> = ca.clauses(q).iter().map(|c| c.render_with(al, parties)).collect();
        if !clauses.is_empty() {
            label.push('\n');
            label.push_str(&clauses.join(", "));
        }
        let extra = if flagged.contains(&q.0) { ", peripheries=2" } else { "" };
        let _ = writeln!(s, "  n{} [label={}{extra}];", q.0, quote(&label));
    }
    for q in ca.states() {
        for arm in ca.arms(q) {
            let g = if arm.is_else {
                "else".to_string()
            } else {
                arm.guard.render(al)
            };
            let _ = writeln!(s, "  n{} -> n{} [label={}];", q.0, arm.target.0, quote(&g));
        }
        let covered = ca.arms(q).iter().any(|a| a.guard == Guard::Const(true));
        if !covered {
            let _ = writeln!(s, "  n{0} -> n{0} [label=\"else\", style=dashed];", q.0);
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting() {
        assert_eq!(quote("a\"b\nc"), "\"a\\\"b\\nc\"");
    }
}
