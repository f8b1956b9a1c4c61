// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::ast::*;

fn names(ids: &[Ident]) -> String {
    ids.iter().map(|i| i.name.as_str()).collect::<Vec<_>>().join(", ")
}

fn guard(g: &GuardAst, prec: u8) -> String {
    match g {
        GuardAst::Const(b) => b.to_string(),
        GuardAst::Contains(a) => format!("contains({})", a.name),
        GuardAst::Not(x) => format!("not {}", guard(x, 3)),
        GuardAst::And(x, y) => {
            let s = format!("{} and {}", guard(x, 2), guard(y, 3));
            if prec > 2 {
                format!("({s})")
            } else {
                s
            }
        }
        GuardAst::Or(x, y) => {
            let s = format!("{} or {}", guard(x, 1), guard(y, 2));
            if prec > 1 {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

fn clause(c: &ClauseAst) -> String {
    let m = match c.modality {
        ModalityAst::Obligation => 'O',
        ModalityAst::Permission => 'P',
    };
    let p = match &c.party {
        PartyRef::Index(n) => n.to_string(),
        PartyRef::Name(s) => s.clone(),
    };
    let bang = if c.negated { "!" } else { "" };
    format!("{m}<{p}>({bang}{})", c.action.name)
}

/// Canonical text of a parsed file. Prohibitions print in their desugared
/// form.
pub fn pretty(f: &SystemFile) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "system {} {{", f.name.name);
    if let Some(al) = &f.alphabet {
        let _ = writeln!(w, "  alphabet {{{}}}", names(al));
    }
    let _ = writeln!(w, "  sync {{{}}}", names(&f.sync));
    if !f.mutex.is_empty() {
        let pairs: Vec<String> = f.mutex.iter().map(|(a, b)| format!("{}#{}", a.name, b.name)).collect();
        let _ = writeln!(w, "  mutex {{{}}}", pairs.join(", "));
    }
    for p in &f.parties {
        let _ = writeln!(w, "\n  party {} {{", p.name.name);
        for i in &p.inits {
            let _ = writeln!(w, "    init {};", i.name);
        }
        for s in &p.states {
            if s.edges.is_empty() {
                let _ = writeln!(w, "    state {} {{}}", s.name.name);
                continue;
            }
            let _ = writeln!(w, "    state {} {{", s.name.name);
            for e in &s.edges {
                let _ = writeln!(w, "      on {{{}}} -> {};", names(&e.label), e.target.name);
            }
            let _ = writeln!(w, "    }}");
        }
        let _ = writeln!(w, "  }}");
    }
    for c in &f.contracts {
        let _ = writeln!(w, "\n  contract {} {{", c.name.name);
        for i in &c.inits {
            let _ = writeln!(w, "    init {};", i.name);
        }
        for s in &c.states {
            let _ = writeln!(w, "    state {} {{", s.name.name);
            if !s.clauses.is_empty() {
                let cs: Vec<String> = s.clauses.iter().map(clause).collect();
                let _ = writeln!(w, "      clauses {{ {} }}", cs.join(", "));
            }
            for a in &s.arms {
                match &a.guard {
                    Some(g) => {
                        let _ = writeln!(w, "      on {} -> {};", guard(g, 0), a.target.name);
                    }
                    None => {
                        let _ = writeln!(w, "      else -> {};", a.target.name);
                    }
                }
            }
            let _ = writeln!(w, "    }}");
        }
        let _ = writeln!(w, "  }}");
    }
    if let Some(names) = &f.conjoin {
        let list: Vec<&str> = names.iter().map(|i| i.name.as_str()).collect();
        let _ = writeln!(w, "\n  conjoin {};", list.join(" "));
    }
    out.push_str("}\n");
    out
}
