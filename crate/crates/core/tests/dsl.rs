// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use cva_core::dsl::{load, parse, pretty, LoadOptions};

fn models() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models");
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cva"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

const PARTIES: &str = "  party p { init s; state s { on {a} -> s; } }
  party q { init t; state t { on {a} -> t; } }";

fn system(header: &str, body: &str) -> String {
    format!("system x {{\n{header}\n{body}\n}}\n")
}

fn with_parties(header: &str, contract: &str) -> String {
    system(header, &format!("{PARTIES}\n{contract}"))
}

/// First error, as `(code, line, col)`.
fn first_error(src: &str, opts: LoadOptions) -> (&'static str, u32, u32) {
    let loaded = load(src, opts);
    let d = loaded
        .diagnostics
        .iter()
        .find(|d| d.is_error())
        .unwrap_or_else(|| panic!("no error in\n{src}\n{:?}", loaded.diagnostics));
    assert!(loaded.system.is_none());
    (d.code, d.span.line, d.span.col)
}

fn err(src: &str) -> (&'static str, u32, u32) {
    first_error(src, LoadOptions::default())
}

#[test]
fn shipped_models_round_trip() {
    let all = models();
    assert!(all.len() >= 4);
    for (name, src) in all {
        let ast = parse(&src).unwrap_or_else(|d| panic!("{name}: {d:?}"));
        let printed = pretty(&ast);
        let again = parse(&printed).unwrap_or_else(|d| panic!("{name} reprinted: {d:?}\n{printed}"));
        assert_eq!(ast, again, "{name}");
        assert_eq!(pretty(&again), printed, "{name}: printing is not a fixpoint");

        let a = load(&src, LoadOptions::default());
        let b = load(&printed, LoadOptions::default());
        let codes = |l: &cva_core::dsl::Loaded| l.diagnostics.iter().map(|d| d.code).collect::<Vec<_>>();
        assert_eq!(codes(&a), codes(&b), "{name}");
        if let (Some(x), Some(y)) = (&a.system, &b.system) {
            assert_eq!(x.deadlocks().unwrap(), y.deadlocks().unwrap(), "{name}");
            if let (Ok(rx), Ok(ry)) = (x.regulated(), y.regulated()) {
                assert_eq!(rx.behaviour().state_count(), ry.behaviour().state_count(), "{name}");
                assert_eq!(rx.behaviour().transitions(), ry.behaviour().transitions(), "{name}");
            }
        }
    }
}

#[test]
fn banking_loads() {
    let (_, src) = models().into_iter().find(|(n, _)| n == "banking.cva").unwrap();
    let l = load(&src, LoadOptions::default());
    assert!(!l.has_errors(), "{:?}", l.diagnostics);
    let sys = l.system.unwrap();
    assert_eq!(sys.party_names, ["j".to_string(), "bank".to_string()]);
    assert_eq!(sys.effective_contract().unwrap().state_count(), 4);
    assert!(sys.deadlocks().unwrap().is_empty());
}

#[test]
fn e001_lexical_and_syntax() {
    assert_eq!(err("system x {\n  alphabet {a} $\n}\n"), ("E001", 2, 16));
    assert_eq!(err("system x {\n  alphabet {a\n}\n").0, "E001");
    assert_eq!(err("").0, "E001");
}

#[test]
fn e002_undeclared_action() {
    let src = with_parties("  alphabet {a}\n  sync {z}", "  contract c { init c0; state c0 {} }");
    assert_eq!(err(&src), ("E002", 3, 9));
}

#[test]
fn e003_mutex_label() {
    let (_, src) = models().into_iter().find(|(n, _)| n == "doors.cva").unwrap();
    assert_eq!(err(&src), ("E003", 11, 10));
}

#[test]
fn e004_duplicates() {
    let src = with_parties("  alphabet {a, a}\n  sync {a}", "  contract c { init c0; state c0 {} }");
    assert_eq!(err(&src), ("E004", 2, 16));
    let src = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 {} }\n  contract c { init c0; state c0 {} }",
    );
    assert_eq!(err(&src).0, "E004");
}

#[test]
fn e005_two_initial_states() {
    let src = system(
        "  alphabet {a}\n  sync {a}",
        "  party p { init s; init s; state s { on {a} -> s; } }
  party q { init t; state t { on {a} -> t; } }
  contract c { init c0; state c0 {} }",
    );
    assert_eq!(err(&src), ("E005", 4, 26));
}

#[test]
fn e006_party_count() {
    let src = system(
        "  alphabet {a}\n  sync {a}",
        "  party p { init s; state s { on {a} -> s; } }\n  contract c { init c0; state c0 {} }",
    );
    assert_eq!(err(&src), ("E006", 1, 8));
}

#[test]
fn e007_missing_alphabet() {
    let src = with_parties("  sync {}", "  contract c { init c0; state c0 {} }");
    assert_eq!(err(&src), ("E007", 1, 8));
}

#[test]
fn e008_missing_parts() {
    let src = system("  alphabet {a}\n  sync {a}", PARTIES);
    assert_eq!(err(&src), ("E008", 1, 8));
    let src = with_parties("  alphabet {a}\n  sync {a}", "  contract c { state c0 {} }");
    assert_eq!(err(&src).0, "E008");
}

#[test]
fn e009_unknown_names() {
    let src = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { on contains(a) -> c9; } }",
    );
    assert_eq!(err(&src), ("E009", 6, 54));
    let src = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { clauses { O<3>(a) } } }",
    );
    assert_eq!(err(&src).0, "E009");
    let src = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { clauses { O<carol>(a) } } }",
    );
    assert_eq!(err(&src).0, "E009");
    let src = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 {} }\n  conjoin c d;",
    );
    assert_eq!(err(&src).0, "E009");
}

#[test]
fn e010_mutex_in_sync_unless_allowed() {
    let src = with_parties(
        "  alphabet {a, b}\n  sync {a}\n  mutex {a#b}",
        "  contract c { init c0; state c0 {} }",
    );
    assert_eq!(err(&src), ("E010", 3, 9));
    let opts = LoadOptions {
        allow_mutex_sync: true,
        ..LoadOptions::default()
    };
    let l = load(&src, opts);
    assert!(!l.has_errors(), "{:?}", l.diagnostics);
    assert!(l.system.is_some());
}

#[test]
fn e011_self_exclusion() {
    let src = with_parties(
        "  alphabet {a}\n  sync {}\n  mutex {a#a}",
        "  contract c { init c0; state c0 {} }",
    );
    assert_eq!(err(&src), ("E011", 4, 10));
}

#[test]
fn e012_too_many_actions() {
    let names: Vec<String> = (0..65).map(|i| format!("x{i}")).collect();
    let src = system(
        &format!("  alphabet {{{}}}\n  sync {{}}", names.join(",")),
        "  party p { init s; state s { on {} -> s; } }
  party q { init t; state t { on {} -> t; } }
  contract c { init c0; state c0 {} }",
    );
    let (code, line, _) = err(&src);
    assert_eq!((code, line), ("E012", 2));
}

#[test]
fn e014_and_w002_totality() {
    let src = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { on contains(a) -> c0; } }",
    );
    let lenient = load(&src, LoadOptions::default());
    assert!(!lenient.has_errors());
    assert!(lenient
        .diagnostics
        .iter()
        .any(|d| d.code == "W002" && (d.span.line, d.span.col) == (6, 31)));
    let strict = LoadOptions {
        strict_totality: true,
        ..LoadOptions::default()
    };
    assert_eq!(first_error(&src, strict), ("E014", 6, 31));

    let src = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { on contains(a) -> c0; else -> c0; } }",
    );
    let l = load(&src, strict);
    assert!(!l.has_errors(), "{:?}", l.diagnostics);
    assert!(l.diagnostics.iter().all(|d| d.code != "W002"));
}

#[test]
fn w001_unreachable_state() {
    let src = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { on contains(a) -> c0; } state c1 { on contains(a) -> c0; } }",
    );
    let l = load(&src, LoadOptions::default());
    assert!(!l.has_errors());
    let w = l.diagnostics.iter().find(|d| d.code == "W001").expect("W001");
    assert_eq!((w.span.line, w.span.col), (6, 66));
    assert!(w.message.contains("c1"));
}

#[test]
fn named_and_numbered_parties_agree() {
    let by_name = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { clauses { O<q>(!a), P<p>(a) } } }",
    );
    let by_num = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { clauses { O<2>(!a), P<1>(a) } } }",
    );
    let x = load(&by_name, LoadOptions::default()).system.unwrap();
    let y = load(&by_num, LoadOptions::default()).system.unwrap();
    let cx = x.effective_contract().unwrap();
    let cy = y.effective_contract().unwrap();
    assert_eq!(cx.clauses(cx.initial()), cy.clauses(cy.initial()));
}

#[test]
fn prohibition_sugar() {
    let f = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { clauses { F<1>(a) } } }",
    );
    let o = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract c { init c0; state c0 { clauses { O<1>(!a) } } }",
    );
    let x = load(&f, LoadOptions::default())
        .system
        .unwrap()
        .effective_contract()
        .unwrap();
    let y = load(&o, LoadOptions::default())
        .system
        .unwrap()
        .effective_contract()
        .unwrap();
    assert_eq!(x.clauses(x.initial()), y.clauses(y.initial()));
}

#[test]
fn conjoin_directive() {
    let src = with_parties(
        "  alphabet {a}\n  sync {a}",
        "  contract l { init c0; state c0 { clauses { P<1>(a) } } }
  contract r { init d0; state d0 { clauses { O<2>(a) } } }
  conjoin l r;",
    );
    let l = load(&src, LoadOptions::default());
    assert!(!l.has_errors(), "{:?}", l.diagnostics);
    let ca = l.system.unwrap().effective_contract().unwrap();
    assert_eq!(ca.state_name(ca.initial()), "(c0,d0)");
    assert_eq!(ca.clauses(ca.initial()).len(), 2);
}
