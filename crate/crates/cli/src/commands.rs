// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;

use cva_core::conflicts::{
    conflict_closure, conflicting_states_ca, conflicting_states_system, ConflictRelation, StrictnessSource,
};
use cva_core::dsl::{self, Diagnostic, LoadOptions, System};
use cva_core::oracle::Bounds;
use cva_core::satisfaction::{self, breach_incapable, find_violations, LocationView, ReportView};
use cva_core::strictness::{self, Evidence, Relation, StrictnessVerdict};
use cva_core::{dot, Alphabet, Clause, ContractAutomaton, MutexRelation, Parallelism, Party, RegulatedSystem, SyncSet};

use crate::style::{paint, Tone};
use crate::views::*;
use crate::{Cli, Command, Global, Layer, StricterArgs, FINDING, OK};

pub fn run(cli: &Cli) -> Result<u8> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { file } => validate(g, file),
        Command::Check { file, party } => check(g, file, party),
        Command::Conflicts {
            file,
            ca,
            conjoin,
            semantic,
        } => conflicts(g, file, ca.as_deref(), conjoin.as_deref(), *semantic),
        Command::Stricter(args) => stricter(g, args),
        Command::Export { file, dot, layer } => export(g, file, dot, *layer),
        Command::Simulate { file, trace } => simulate(g, file, trace),
    }
}

fn mode(g: &Global) -> Parallelism {
    if g.sequential {
        Parallelism::Sequential
    } else {
        Parallelism::Parallel
    }
}

fn bounds(g: &Global) -> Bounds {
    Bounds {
        max_sigma: g.max_sigma,
        max_menu: g.max_menu,
        max_context: g.max_context,
        allow_mutex_in_sync: g.allow_mutex_sync,
    }
}

fn options(g: &Global) -> LoadOptions {
    LoadOptions {
        strict_totality: g.strict_totality,
        allow_mutex_sync: g.allow_mutex_sync,
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn render_diagnostic(d: &Diagnostic) -> String {
    let tone = if d.is_error() { Tone::Bad } else { Tone::Warn };
    let text = d.to_string();
    match text.split_once(": ") {
        Some((pos, rest)) => match rest.split_once(": ") {
            Some((head, msg)) => format!("{pos}: {}: {msg}", paint(head, tone)),
            None => text.clone(),
        },
        None => text,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Loads a file for analysis. Diagnostics go to stderr and errors abort.
fn load(g: &Global, path: &Path) -> Result<System> {
    let loaded = dsl::load(&read(path)?, options(g));
    if loaded.has_errors() {
        for d in loaded.diagnostics.iter().filter(|d| d.is_error()) {
            eprintln!("{}: {}", path.display(), render_diagnostic(d));
        }
        bail!("{} is not a valid system file", path.display());
    }
    loaded
        .system
        .ok_or_else(|| anyhow!("{} is not a valid system file", path.display()))
}

fn regulated(system: &System) -> Result<RegulatedSystem> {
    system.regulated().map_err(|e| anyhow!("{e}"))
}

fn validate(g: &Global, path: &Path) -> Result<u8> {
    let loaded = dsl::load(&read(path)?, options(g));
    let mut diagnostics = loaded.diagnostics.clone();
    if let (Some(system), Some(ast)) = (&loaded.system, &loaded.ast) {
        let span = ast.parties.first().map(|p| p.name.span).unwrap_or_default();
        for state in system.deadlocks()? {
            diagnostics.push(Diagnostic::error(
                "E013",
                span,
                format!("parties deadlock in joint state {state}"),
            ));
        }
    }
    let ok = !diagnostics.iter().any(Diagnostic::is_error);
    if g.json {
        print_json(&ValidateView {
            ok,
            diagnostics: diagnostics.iter().map(DiagnosticView::from).collect(),
        })?;
    } else {
        for d in &diagnostics {
            println!("{}: {}", path.display(), render_diagnostic(d));
        }
        let errors = diagnostics.iter().filter(|d| d.is_error()).count();
        let warnings = diagnostics.len() - errors;
        if ok {
            println!(
                "{}: {} ({warnings} warning(s))",
                path.display(),
                paint("ok", Tone::Good)
            );
        } else {
            println!("{}: {errors} error(s), {warnings} warning(s)", path.display());
        }
    }
    Ok(if ok { OK } else { FINDING })
}

fn requested_parties(system: &System, party: &str) -> Result<Vec<Party>> {
    Ok(match party {
        "both" => Party::BOTH.to_vec(),
        "1" => vec![Party::One],
        "2" => vec![Party::Two],
        name => vec![system
            .party_by_name(name)
            .ok_or_else(|| anyhow!("unknown party `{name}`; expected 1, 2, both or a party name"))?],
    })
}

fn location_text(loc: &LocationView) -> String {
    match loc {
        LocationView::State { state } => format!("state {state}"),
        LocationView::Transition { transition: t } => {
            format!(
                "transition {} --{} [{}]--> {}",
                t.source, t.label, t.participation, t.target
            )
        }
    }
}

fn check(g: &Global, path: &Path, party: &str) -> Result<u8> {
    let system = load(g, path)?;
    let parties = requested_parties(&system, party)?;
    let sys = regulated(&system)?;
    let names = &system.party_names;
    let al = sys.alphabet();
    let violations: Vec<ReportView> = find_violations(&sys, mode(g))
        .into_iter()
        .filter(|r| parties.contains(&r.party))
        .map(|r| r.view(&sys, Some(names)))
        .collect();
    let statuses: Vec<PartyStatus> = parties
        .iter()
        .map(|&p| {
            let w = breach_incapable(&sys, p);
            PartyStatus {
                party: p.number(),
                name: names[p.index()].clone(),
                breach_incapable: w.is_none(),
                witness_trace: w.map(|w| w.trace.iter().map(|s| al.render(*s)).collect()),
            }
        })
        .collect();
    let clean = statuses.iter().all(|s| s.breach_incapable);
    if g.json {
        print_json(&CheckView {
            system: system.name.clone(),
            parties: statuses,
            violations,
        })?;
    } else {
        println!(
            "system {}: {} reachable states",
            system.name,
            sys.behaviour().state_count()
        );
        for s in &statuses {
            match &s.witness_trace {
                None => println!(
                    "party {} ({}): {}",
                    s.party,
                    s.name,
                    paint("breach-incapable", Tone::Good)
                ),
                Some(t) => println!(
                    "party {} ({}): {}, shortest witness [{}]",
                    s.party,
                    s.name,
                    paint("can breach", Tone::Bad),
                    t.join("; ")
                ),
            }
        }
        for v in &violations {
            let clause = v.clause.as_deref().map(|c| format!(" {c}:")).unwrap_or_default();
            println!(
                "  party {} at {}:{clause} {} [trace: {}]",
                v.party,
                location_text(&v.location),
                v.reason,
                v.witness_trace.join("; ")
            );
        }
    }
    Ok(if clean { OK } else { FINDING })
}

fn closure(
    g: &Global,
    al: &Alphabet,
    sync: SyncSet,
    mutex: &MutexRelation,
    semantic: bool,
) -> Result<ConflictRelation> {
    let source = if semantic {
        StrictnessSource::Semantic {
            bounds: bounds(g),
            mode: mode(g),
        }
    } else {
        StrictnessSource::Syntactic
    };
    Ok(conflict_closure(al, sync.members(), mutex, source)?)
}

fn conflicts(g: &Global, path: &Path, ca: Option<&str>, conjoin: Option<&[String]>, semantic: bool) -> Result<u8> {
    let system = load(g, path)?;
    let names = &system.party_names;
    let al = &system.alphabet;
    let rel = closure(g, al, system.sync, &system.mutex, semantic)?;
    let (target, label, findings) = match (ca, conjoin) {
        (Some(name), _) => {
            let c = system
                .contract(name)
                .ok_or_else(|| anyhow!("unknown contract `{name}`"))?;
            ("contract", name.to_string(), conflicting_states_ca(c, &rel))
        }
        (None, Some(pair)) => {
            let c = system.conjoined(pair)?;
            ("conjoin", pair.join("&"), conflicting_states_ca(&c, &rel))
        }
        (None, None) => {
            let sys = regulated(&system)?;
            let label = match &system.conjoin {
                Some(n) => n.join("&"),
                None => system
                    .contracts
                    .iter()
                    .map(|(n, _)| n.as_str())
                    .collect::<Vec<_>>()
                    .join("&"),
            };
            ("regulated", label, conflicting_states_system(&sys, &rel))
        }
    };
    let views: Vec<FindingView> = findings.iter().map(|f| FindingView::new(f, al, Some(names))).collect();
    if g.json {
        print_json(&ConflictsView {
            target: target.to_string(),
            contract: label,
            conflicts: views,
        })?;
    } else {
        let states: BTreeSet<&str> = views.iter().map(|v| v.state.as_str()).collect();
        println!("{target} {label}: {} conflicting state(s)", states.len());
        for v in &views {
            let reach = match &v.trace {
                Some(t) => format!("reached by [{}]", t.join("; ")),
                None => "unreachable".to_string(),
            };
            println!(
                "  {} at {}: {} vs {} ({reach}; {})",
                paint("conflict", Tone::Bad),
                v.state,
                v.pair[0],
                v.pair[1],
                v.derivation.join(" > ")
            );
        }
    }
    Ok(if findings.is_empty() { OK } else { FINDING })
}

/// Action name inside `X<p>(…)`, without negation.
fn clause_action(text: &str) -> Option<&str> {
    let open = text.find('(')?;
    let close = text.rfind(')')?;
    let body = text.get(open + 1..close)?.trim();
    Some(body.strip_prefix('!').unwrap_or(body).trim())
}

fn parse_mutex(al: &Alphabet, pairs: &[String]) -> Result<MutexRelation> {
    let mut m = MutexRelation::new();
    for p in pairs {
        let (a, b) = p
            .split_once('#')
            .ok_or_else(|| anyhow!("mutex pair `{p}` must look like a#b"))?;
        m.insert(al.lookup(a.trim())?, al.lookup(b.trim())?)?;
    }
    Ok(m)
}

fn sync_for(g: &Global, al: &Alphabet, sync: Option<&[String]>, mutex: &MutexRelation) -> Result<SyncSet> {
    let members = match sync {
        Some(names) => al.set(names.iter().map(|s| s.trim()).filter(|s| !s.is_empty()))?,
        None if g.allow_mutex_sync => al.full_set(),
        None => al.full_set().difference(mutex.actions()),
    };
    Ok(if g.allow_mutex_sync {
        SyncSet::unchecked(al, members)?
    } else {
        SyncSet::new(al, members, mutex)?
    })
}

fn holds_for(v: &StrictnessVerdict, party: Option<Party>) -> bool {
    match (party, &v.evidence) {
        (Some(p), Evidence::Oracle { holds, .. }) => holds[p.index()],
        (Some(p), _) => matches!(
            (v.relation, p),
            (Relation::Equivalent | Relation::StricterGlobal, _)
                | (Relation::StricterForParty1, Party::One)
                | (Relation::StricterForParty2, Party::Two)
        ),
        (None, _) => matches!(v.relation, Relation::Equivalent | Relation::StricterGlobal),
    }
}

fn stricter(g: &Global, args: &StricterArgs) -> Result<u8> {
    let party = match args.party {
        None => None,
        Some(n) => Some(Party::from_number(n).ok_or_else(|| anyhow!("--party must be 1 or 2"))?),
    };
    let (al, weaker, stricter_text, verdict) = if let Some(file) = &args.file {
        let system = load(g, file)?;
        let n1 = args.ca1.as_deref().unwrap_or_default();
        let n2 = args.ca2.as_deref().unwrap_or_default();
        let a1: &ContractAutomaton = system.contract(n1).ok_or_else(|| anyhow!("unknown contract `{n1}`"))?;
        let a2 = system.contract(n2).ok_or_else(|| anyhow!("unknown contract `{n2}`"))?;
        let v = strictness::ca_stricter(a1, a2, party, system.sync.members(), &system.mutex, bounds(g), mode(g))?;
        (system.alphabet.clone(), n1.to_string(), n2.to_string(), v)
    } else {
        let (Some(c1), Some(c2)) = (&args.c1, &args.c2) else {
            bail!("give either --c1 and --c2, or a file with --ca1 and --ca2");
        };
        let al = match &args.sigma {
            Some(names) => Alphabet::new(names.iter().map(|s| s.trim()))?,
            None => {
                let mut names: Vec<String> = vec![];
                let mentioned = [c1, c2]
                    .into_iter()
                    .filter_map(|c| clause_action(c))
                    .map(str::to_string)
                    .chain(
                        args.mutex
                            .iter()
                            .flat_map(|p| p.split('#').map(|s| s.trim().to_string())),
                    );
                for n in mentioned {
                    if !names.contains(&n) {
                        names.push(n);
                    }
                }
                Alphabet::new(names)?
            }
        };
        let mutex = parse_mutex(&al, &args.mutex)?;
        let sync = sync_for(g, &al, args.sync.as_deref(), &mutex)?;
        let x = Clause::parse(c1, &al, None).map_err(|e| anyhow!("{e}"))?;
        let y = Clause::parse(c2, &al, None).map_err(|e| anyhow!("{e}"))?;
        let v = if args.semantic {
            strictness::clause_stricter_semantic(x, y, &al, sync.members(), &mutex, bounds(g), mode(g))?
        } else {
            strictness::clause_verdict_syntactic(x, y, sync.members(), &mutex)
        };
        let (wx, wy) = (x.render(&al), y.render(&al));
        (al, wx, wy, v)
    };
    let holds = holds_for(&verdict, party);
    let view = StricterView::new(weaker, stricter_text, holds, &verdict, &al);
    if g.json {
        print_json(&view)?;
    } else {
        let tone = if holds { Tone::Good } else { Tone::Bad };
        let method = match verdict.method {
            strictness::Method::Syntactic => "syntactic",
            strictness::Method::SemanticOracle => "semantic-oracle",
            strictness::Method::Monotonicity => "monotonicity",
        };
        println!(
            "{} vs {}: {} ({method})",
            view.weaker,
            view.stricter,
            paint(view.relation, tone)
        );
        if let Some(b) = verdict.bounds {
            println!(
                "  bounds: |sigma| <= {}, menu <= {}, context <= {}",
                b.max_sigma, b.max_menu, b.max_context
            );
        }
        match &view.evidence {
            EvidenceView::Derivation { steps } => {
                for s in steps {
                    println!("  {} => {} by {}", s.from, s.to, s.rule);
                }
            }
            EvidenceView::Oracle {
                counterexample: Some(cx),
                verified,
                ..
            } => {
                println!("  counterexample for party {} (verified: {verified})", cx.party);
                println!("    party 1 menu: [{}]", cx.menus[0].join(", "));
                println!("    party 2 menu: [{}]", cx.menus[1].join(", "));
                println!("    breach-incapable under {{{}}}", cx.stricter.join(", "));
                println!("    can breach under {{{}}}", cx.weaker.join(", "));
            }
            EvidenceView::NoDerivation => println!("  no derivation found (try --semantic)"),
            _ => {}
        }
    }
    Ok(if holds { OK } else { FINDING })
}

/// Clause pairs of one state that are in conflict.
fn conflict_flags(rel: &ConflictRelation, clauses: &BTreeSet<Clause>) -> Vec<[Clause; 2]> {
    let cs: Vec<Clause> = clauses.iter().copied().collect();
    let mut out = vec![];
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            if rel.conflicts(cs[i], cs[j]).is_some() {
                out.push([cs[i], cs[j]]);
            }
        }
    }
    out
}

fn export(g: &Global, path: &Path, out: &Path, layer: Layer) -> Result<u8> {
    let system = load(g, path)?;
    let names = &system.party_names;
    let al = &system.alphabet;
    let text = match layer {
        Layer::Parties => {
            let c = cva_core::sync_compose(&system.parties[0], &system.parties[1], system.sync, &system.mutex)?;
            let dead: BTreeSet<usize> = c.deadlocks().into_iter().collect();
            dot::composed(&system.name, &c, |_| vec![], &dead)
        }
        Layer::Contract => {
            let ca = system.effective_contract()?;
            let rel = closure(g, al, system.sync, &system.mutex, false)?;
            let flagged = ca
                .states()
                .filter(|&q| !conflict_flags(&rel, ca.clauses(q)).is_empty())
                .map(|q| q.0)
                .collect();
            dot::contract(&system.name, &ca, Some(names), &flagged)
        }
        Layer::Regulated => {
            let sys = regulated(&system)?;
            let rel = closure(g, al, system.sync, &system.mutex, false)?;
            let b = sys.behaviour();
            let flagged = (0..b.state_count())
                .filter(|&i| !conflict_flags(&rel, sys.contract().clauses(sys.contract_state(i))).is_empty())
                .collect();
            let notes = |i: usize| {
                let cs = sys.contract().clauses(sys.contract_state(i));
                if cs.is_empty() {
                    vec![]
                } else {
                    vec![cs
                        .iter()
                        .map(|c| c.render_with(al, Some(names)))
                        .collect::<Vec<_>>()
                        .join(", ")]
                }
            };
            dot::composed(&system.name, b, notes, &flagged)
        }
    };
    if out.as_os_str() == "-" {
        print!("{text}");
    } else {
        std::fs::write(out, text).with_context(|| format!("cannot write {}", out.display()))?;
        if !g.json {
            eprintln!("wrote {}", out.display());
        }
    }
    Ok(OK)
}

fn simulate(g: &Global, path: &Path, trace: &str) -> Result<u8> {
    let system = load(g, path)?;
    let names = &system.party_names;
    let sys = regulated(&system)?;
    let al = sys.alphabet();
    let b = sys.behaviour();
    let rel = closure(g, al, system.sync, &system.mutex, false)?;
    let report = |index: usize, i: usize, via: Option<MoveView>| {
        let qa = sys.contract_state(i);
        let clauses = sys.contract().clauses(qa);
        let pairs = conflict_flags(&rel, clauses);
        SimStepView {
            index,
            via,
            state: b.state_name(i).to_string(),
            contract_state: sys.contract().state_name(qa).to_string(),
            clauses: clauses.iter().map(|c| c.render_with(al, Some(names))).collect(),
            conflicting: !pairs.is_empty(),
            conflicts: pairs
                .iter()
                .map(|[x, y]| [x.render_with(al, Some(names)), y.render_with(al, Some(names))])
                .collect(),
            satisfied: Party::BOTH.map(|p| satisfaction::sat(&sys, p, satisfaction::Location::State(i))),
        }
    };
    let mut current = b.initial();
    let mut steps = vec![report(0, current, None)];
    for (k, raw) in trace.split(';').map(str::trim).filter(|s| !s.is_empty()).enumerate() {
        let label = al
            .parse_set(raw)
            .with_context(|| format!("step {}: cannot parse `{raw}`", k + 1))?;
        let Some(&t) = b
            .outgoing_ids(current)
            .iter()
            .find(|&&t| b.transitions()[t].label == label)
        else {
            let available: Vec<String> = b.acts(current).into_iter().map(|s| al.render(s)).collect();
            bail!(
                "step {}: {} is not enabled at {}; available: {}",
                k + 1,
                al.render(label),
                b.state_name(current),
                available.join(", ")
            );
        };
        let tr = &b.transitions()[t];
        let via = MoveView {
            label: al.render(tr.label),
            participation: tr.participation.to_string(),
            satisfied: Party::BOTH.map(|p| satisfaction::sat(&sys, p, satisfaction::Location::Transition(t))),
        };
        current = tr.target;
        steps.push(report(k + 1, current, Some(via)));
    }
    let clean = steps
        .iter()
        .all(|s| s.satisfied.iter().all(|&x| x) && s.via.as_ref().is_none_or(|v| v.satisfied.iter().all(|&x| x)));
    if g.json {
        print_json(&SimulateView {
            system: system.name.clone(),
            steps,
        })?;
    } else {
        let mark = |ok: bool| {
            if ok {
                paint("ok", Tone::Good)
            } else {
                paint("unsatisfied", Tone::Bad)
            }
        };
        for s in &steps {
            if let Some(v) = &s.via {
                println!(
                    "  --{} [{}]--> {}: {}, {}: {}",
                    v.label,
                    v.participation,
                    names[0],
                    mark(v.satisfied[0]),
                    names[1],
                    mark(v.satisfied[1])
                );
            }
            let flag = if s.conflicting {
                format!(" {}", paint("CONFLICT", Tone::Bad))
            } else {
                String::new()
            };
            println!("step {}: {}{flag}", s.index, s.state);
            println!("  clauses: {{{}}}", s.clauses.join(", "));
            for [x, y] in &s.conflicts {
                println!("  conflict: {x} vs {y}");
            }
            println!(
                "  {}: {}, {}: {}",
                names[0],
                mark(s.satisfied[0]),
                names[1],
                mark(s.satisfied[1])
            );
        }
    }
    Ok(if clean { OK } else { FINDING })
}
