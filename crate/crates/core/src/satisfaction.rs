// SPDX-License-Identifier: Apache-2.0

//! Per-party satisfaction, violation reports and breach-incapability.
//!
//! Blame is indexed by the party that has to act: at a state, party `p` is
//! blamed when its menu fails the other party's permissions or obligations;
//! on a transition, `p` is blamed when the label is not viable for `p`.

use serde::Serialize;

use crate::automata::{ActionSet, MutexRelation};
use crate::composition::{ComposedTransition, RegulatedSystem};
use crate::contract::{Clause, Duties, Party};
use crate::par::{self, Parallelism};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    State(usize),
    Transition(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// A permission of the other party that `party` fails to enable.
    Permission(Clause),
    /// `party` offers nothing that lets the other party meet its obligations.
    ObligationOffer,
    /// The transition label breaks `party`'s own obligations.
    Obligation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    /// No offer contains (or avoids) the permitted action while staying
    /// viable for the permission holder.
    NoEnablingOffer { menu: Vec<ActionSet>, duties: Duties },
    /// No offer can be extended with local actions into a set viable for
    /// the other party.
    NoViableOffer { menu: Vec<ActionSet>, duties: Duties },
    /// Obliged actions missing from, or forbidden actions present in, the
    /// transition label.
    NotViable {
        label: ActionSet,
        missing: ActionSet,
        present: ActionSet,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolationReport {
    pub party: Party,
    pub location: Location,
    pub kind: ViolationKind,
    pub reason: Reason,
}

/// Whether some `A' ⊆ local` makes `offer ∪ A'` viable for `duties` without
/// combining mutually exclusive actions.
///
/// Only `O \ offer` has to be added and adding more cannot help, so the
/// minimal candidate decides the existential.
pub fn extendable(offer: ActionSet, duties: Duties, local: ActionSet, mutex: &MutexRelation) -> bool {
    let extra = duties.obliged.difference(offer);
    if !extra.is_subset(local) {
        return false;
    }
    let full = offer.union(extra);
    duties.forbidden.is_disjoint(full) && mutex.admits(full)
}

/// Permission clause of `clause.party` against the menu of the other party.
pub fn perm_enabled(
    clause: Clause,
    menu: &[ActionSet],
    holder: Duties,
    sync: ActionSet,
    local: ActionSet,
    mutex: &MutexRelation,
) -> bool {
    debug_assert!(clause.is_permission());
    if !sync.contains(clause.action()) {
        return true;
    }
    menu.iter()
        .any(|&a| clause.literal.holds_in(a) && extendable(a, holder, local, mutex))
}

/// The other party's obligations against `menu`. Vacuous when it has none.
pub fn obl_offered(menu: &[ActionSet], other: Duties, local: ActionSet, mutex: &MutexRelation) -> bool {
    other.is_empty() || menu.iter().any(|&a| extendable(a, other, local, mutex))
}

/// Own obligations on a transition. Solo moves of the other party are exempt.
pub fn obl_on_transition(p: Party, t: &ComposedTransition, own: Duties) -> bool {
    t.participation.is_solo(p.other()) || own.viable(t.label)
}

/// `sat^P` for one permission clause at a state, with `p` the party judged.
pub fn sat_perm_single(sys: &RegulatedSystem, state: usize, p: Party, clause: Clause) -> bool {
    if clause.party == p {
        return true;
    }
    let qa = sys.contract_state(state);
    perm_enabled(
        clause,
        sys.menu(p, state),
        sys.contract().duties(qa, clause.party),
        sys.sync().members(),
        sys.sync().complement(),
        sys.mutex(),
    )
}

/// Conjunction over the other party's permissions in force at `state`.
pub fn sat_perm_state(sys: &RegulatedSystem, state: usize, p: Party) -> bool {
    let qa = sys.contract_state(state);
    sys.contract()
        .clauses(qa)
        .iter()
        .filter(|c| c.is_permission())
        .all(|&c| sat_perm_single(sys, state, p, c))
}

pub fn sat_obl_state(sys: &RegulatedSystem, state: usize, p: Party) -> bool {
    let qa = sys.contract_state(state);
    obl_offered(
        sys.menu(p, state),
        sys.contract().duties(qa, p.other()),
        sys.sync().complement(),
        sys.mutex(),
    )
}

pub fn sat_obl_transition(sys: &RegulatedSystem, transition: usize, p: Party) -> bool {
    let t = &sys.behaviour().transitions()[transition];
    let own = sys.contract().duties(sys.contract_state(t.source), p);
    obl_on_transition(p, t, own)
}

/// `sat_p(X) = sat^P_p(X) ∧ sat^O_p(X)`.
pub fn sat(sys: &RegulatedSystem, p: Party, x: Location) -> bool {
    match x {
        Location::State(i) => sat_perm_state(sys, i, p) && sat_obl_state(sys, i, p),
        Location::Transition(t) => sat_obl_transition(sys, t, p),
    }
}

fn state_violations(sys: &RegulatedSystem, i: usize, p: Party) -> Vec<ViolationReport> {
    let qa = sys.contract_state(i);
    let menu = sys.menu(p, i);
    let mut out = vec![];
    for &c in sys.contract().clauses(qa) {
        if c.is_permission() && !sat_perm_single(sys, i, p, c) {
            out.push(ViolationReport {
                party: p,
                location: Location::State(i),
                kind: ViolationKind::Permission(c),
                reason: Reason::NoEnablingOffer {
                    menu: menu.to_vec(),
                    duties: sys.contract().duties(qa, c.party),
                },
            });
        }
    }
    if !sat_obl_state(sys, i, p) {
        out.push(ViolationReport {
            party: p,
            location: Location::State(i),
            kind: ViolationKind::ObligationOffer,
            reason: Reason::NoViableOffer {
                menu: menu.to_vec(),
                duties: sys.contract().duties(qa, p.other()),
            },
        });
    }
    out
}

fn transition_violation(sys: &RegulatedSystem, t: usize, p: Party) -> Option<ViolationReport> {
    if sat_obl_transition(sys, t, p) {
        return None;
    }
    let tr = &sys.behaviour().transitions()[t];
    let own = sys.contract().duties(sys.contract_state(tr.source), p);
    Some(ViolationReport {
        party: p,
        location: Location::Transition(t),
        kind: ViolationKind::Obligation,
        reason: Reason::NotViable {
            label: tr.label,
            missing: own.obliged.difference(tr.label),
            present: own.forbidden.intersection(tr.label),
        },
    })
}

/// Violations at one state and its outgoing transitions, party 1 first.
pub fn violations_at(sys: &RegulatedSystem, i: usize) -> Vec<ViolationReport> {
    let mut out = vec![];
    for p in Party::BOTH {
        out.extend(state_violations(sys, i, p));
    }
    for &t in sys.behaviour().outgoing_ids(i) {
        for p in Party::BOTH {
            out.extend(transition_violation(sys, t, p));
        }
    }
    out
}

/// Every violation in the reachable system, ordered by state, then by
/// location (state before its outgoing transitions), then by party.
pub fn find_violations(sys: &RegulatedSystem, mode: Parallelism) -> Vec<ViolationReport> {
    par::map_range(mode, sys.behaviour().state_count(), |i| violations_at(sys, i))
        .into_iter()
        .flatten()
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub location: Location,
    pub trace: Vec<ActionSet>,
}

/// `bi(p, R)`: `None` when `p` cannot breach the contract, otherwise a
/// violation reached by a shortest trace.
///
/// A transition's trace ends with its own label.
pub fn breach_incapable(sys: &RegulatedSystem, p: Party) -> Option<Witness> {
    let b = sys.behaviour();
    let mut best: Option<(usize, Location)> = None;
    for i in 0..b.state_count() {
        let depth = b.trace_to(i).len();
        if best.is_some_and(|(d, _)| d <= depth) {
            continue;
        }
        if !sat(sys, p, Location::State(i)) {
            best = Some((depth, Location::State(i)));
            continue;
        }
        if best.is_some_and(|(d, _)| d <= depth + 1) {
            continue;
        }
        if let Some(&t) = b.outgoing_ids(i).iter().find(|&&t| !sat_obl_transition(sys, t, p)) {
            best = Some((depth + 1, Location::Transition(t)));
        }
    }
    best.map(|(_, location)| Witness {
        trace: trace_of(sys, location),
        location,
    })
}

pub fn trace_of(sys: &RegulatedSystem, x: Location) -> Vec<ActionSet> {
    let b = sys.behaviour();
    match x {
        Location::State(i) => b.trace_to(i),
        Location::Transition(t) => {
            let tr = &b.transitions()[t];
            let mut trace = b.trace_to(tr.source);
            trace.push(tr.label);
            trace
        }
    }
}

/// Serializable summary of a violation.
#[derive(Clone, Debug, Serialize)]
pub struct ReportView {
    pub party: u8,
    pub location: LocationView,
    pub clause: Option<String>,
    pub reason: String,
    pub witness_trace: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LocationView {
    State { state: String },
    Transition { transition: TransitionView },
}

#[derive(Clone, Debug, Serialize)]
pub struct TransitionView {
    pub source: String,
    pub label: String,
    pub target: String,
    pub participation: String,
}

impl ViolationReport {
    pub fn view(&self, sys: &RegulatedSystem, party_names: Option<&[String; 2]>) -> ReportView {
        let al = sys.alphabet();
        let b = sys.behaviour();
        let location = match self.location {
            Location::State(i) => LocationView::State {
                state: b.state_name(i).to_string(),
            },
            Location::Transition(t) => {
                let tr = &b.transitions()[t];
                LocationView::Transition {
                    transition: TransitionView {
                        source: b.state_name(tr.source).to_string(),
                        label: al.render(tr.label),
                        target: b.state_name(tr.target).to_string(),
                        participation: tr.participation.to_string(),
                    },
                }
            }
        };
        let clause = match self.kind {
            ViolationKind::Permission(c) => Some(c.render_with(al, party_names)),
            _ => None,
        };
        let menu = |m: &[ActionSet]| m.iter().map(|&a| al.render(a)).collect::<Vec<_>>().join(", ");
        let reason = match &self.reason {
            Reason::NoEnablingOffer { menu: m, duties } => format!(
                "no offer in [{}] enables the permission while staying viable (obliged {}, forbidden {})",
                menu(m),
                al.render(duties.obliged),
                al.render(duties.forbidden)
            ),
            Reason::NoViableOffer { menu: m, duties } => format!(
                "no offer in [{}] extends to a viable set for the other party (obliged {}, forbidden {})",
                menu(m),
                al.render(duties.obliged),
                al.render(duties.forbidden)
            ),
            Reason::NotViable {
                label,
                missing,
                present,
            } => {
                let mut parts = vec![];
                if !missing.is_empty() {
                    parts.push(format!("misses obliged {}", al.render(*missing)));
                }
                if !present.is_empty() {
                    parts.push(format!("contains forbidden {}", al.render(*present)));
                }
                format!("label {} {}", al.render(*label), parts.join(" and "))
            }
        };
        ReportView {
            party: self.party.number(),
            location,
            clause,
            reason,
            witness_trace: trace_of(sys, self.location).into_iter().map(|a| al.render(a)).collect(),
        }
    }
}
