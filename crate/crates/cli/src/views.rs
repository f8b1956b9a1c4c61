// SPDX-License-Identifier: Apache-2.0

//! JSON shapes printed by `--json`.

use serde::Serialize;

use cva_core::conflicts::ConflictFinding;
use cva_core::dsl::Diagnostic;
use cva_core::oracle::{Bounds, Counterexample};
use cva_core::satisfaction::ReportView;
use cva_core::strictness::{Evidence, StrictnessVerdict};
use cva_core::{Alphabet, Party};

#[derive(Serialize)]
pub struct DiagnosticView {
    pub severity: String,
    pub code: &'static str,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl From<&Diagnostic> for DiagnosticView {
    fn from(d: &Diagnostic) -> Self {
        DiagnosticView {
            severity: if d.is_error() { "error" } else { "warning" }.to_string(),
            code: d.code,
            line: d.span.line,
            col: d.span.col,
            message: d.message.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct ValidateView {
    pub ok: bool,
    pub diagnostics: Vec<DiagnosticView>,
}

#[derive(Serialize)]
pub struct PartyStatus {
    pub party: u8,
    pub name: String,
    pub breach_incapable: bool,
    /// Shortest trace to the first location where the party can breach.
    pub witness_trace: Option<Vec<String>>,
}

#[derive(Serialize)]
pub struct CheckView {
    pub system: String,
    pub parties: Vec<PartyStatus>,
    pub violations: Vec<ReportView>,
}

#[derive(Serialize)]
pub struct FindingView {
    pub state: String,
    pub pair: [String; 2],
    pub derivation: Vec<String>,
    pub trace: Option<Vec<String>>,
}

impl FindingView {
    pub fn new(f: &ConflictFinding, al: &Alphabet, names: Option<&[String; 2]>) -> Self {
        FindingView {
            state: f.state_name.clone(),
            pair: [f.pair.0.render_with(al, names), f.pair.1.render_with(al, names)],
            derivation: f.derivation.names(),
            trace: f.trace.as_ref().map(|t| t.iter().map(|s| al.render(*s)).collect()),
        }
    }
}

#[derive(Serialize)]
pub struct ConflictsView {
    /// `regulated`, `contract` or `conjoin`.
    pub target: String,
    pub contract: String,
    pub conflicts: Vec<FindingView>,
}

#[derive(Serialize)]
pub struct StepView {
    pub rule: &'static str,
    pub from: String,
    pub to: String,
}

#[derive(Serialize)]
pub struct CounterexampleView {
    pub party: u8,
    pub menus: [Vec<String>; 2],
    pub weaker: Vec<String>,
    pub stricter: Vec<String>,
}

impl CounterexampleView {
    pub fn new(cx: &Counterexample, al: &Alphabet) -> Self {
        let menu = |p: Party| cx.menus[p.index()].iter().map(|s| al.render(*s)).collect();
        CounterexampleView {
            party: cx.party.number(),
            menus: [menu(Party::One), menu(Party::Two)],
            weaker: cx.weaker.iter().map(|c| c.render(al)).collect(),
            stricter: cx.stricter.iter().map(|c| c.render(al)).collect(),
        }
    }
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EvidenceView {
    Derivation {
        steps: Vec<StepView>,
    },
    Oracle {
        holds: [bool; 2],
        converse: [bool; 2],
        verified: bool,
        counterexample: Option<CounterexampleView>,
    },
    Subset,
    NoDerivation,
}

impl EvidenceView {
    pub fn new(e: &Evidence, al: &Alphabet) -> Self {
        match e {
            Evidence::Derivation(d) => EvidenceView::Derivation {
                steps: d
                    .steps
                    .iter()
                    .map(|s| StepView {
                        rule: s.rule.name(),
                        from: s.from.render(al),
                        to: s.to.render(al),
                    })
                    .collect(),
            },
            Evidence::Oracle {
                holds,
                converse,
                counterexample,
                verified,
            } => EvidenceView::Oracle {
                holds: *holds,
                converse: *converse,
                verified: *verified,
                counterexample: counterexample.as_ref().map(|cx| CounterexampleView::new(cx, al)),
            },
            Evidence::Subset => EvidenceView::Subset,
            Evidence::NoDerivation => EvidenceView::NoDerivation,
        }
    }
}

#[derive(Serialize)]
pub struct StricterView {
    pub weaker: String,
    pub stricter: String,
    pub holds: bool,
    pub relation: &'static str,
    pub method: cva_core::strictness::Method,
    pub bounds: Option<Bounds>,
    pub evidence: EvidenceView,
}

impl StricterView {
    pub fn new(weaker: String, stricter: String, holds: bool, v: &StrictnessVerdict, al: &Alphabet) -> Self {
        StricterView {
            weaker,
            stricter,
            holds,
            relation: v.relation.name(),
            method: v.method,
            bounds: v.bounds,
            evidence: EvidenceView::new(&v.evidence, al),
        }
    }
}

#[derive(Serialize)]
pub struct MoveView {
    pub label: String,
    pub participation: String,
    /// Whether each party's obligations hold on the transition.
    pub satisfied: [bool; 2],
}

#[derive(Serialize)]
pub struct SimStepView {
    pub index: usize,
    pub via: Option<MoveView>,
    pub state: String,
    pub contract_state: String,
    pub clauses: Vec<String>,
    pub conflicting: bool,
    pub conflicts: Vec<[String; 2]>,
    /// Whether each party satisfies the contract at the state.
    pub satisfied: [bool; 2],
}

#[derive(Serialize)]
pub struct SimulateView {
    pub system: String,
    pub steps: Vec<SimStepView>,
}
