// SPDX-License-Identifier: Apache-2.0

//! Checks a parsed file and builds the automata it describes.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::{parse, Diagnostic, Span};
use crate::automata::{ActionId, ActionLiteral, ActionSet, Alphabet, MultiActionAutomaton, MutexRelation, MAX_ACTIONS};
use crate::composition::{build_regulated_system, check_well_formed, RegulatedSystem, SyncSet};
use crate::contract::{Clause, ContractAutomaton, Guard, Party};
use crate::error::ModelError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Every label must be matched by an explicit contract arm.
    pub strict_totality: bool,
    /// Accept mutually exclusive actions in the synchronisation set.
    pub allow_mutex_sync: bool,
}

/// A fully checked system description.
#[derive(Clone, Debug)]
pub struct System {
    pub name: String,
    pub alphabet: Alphabet,
    pub sync: SyncSet,
    pub mutex: MutexRelation,
    pub party_names: [String; 2],
    pub parties: [MultiActionAutomaton; 2],
    pub contracts: Vec<(String, ContractAutomaton)>,
    pub conjoin: Option<Vec<String>>,
}

impl System {
    pub fn contract(&self, name: &str) -> Option<&ContractAutomaton> {
        self.contracts.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    /// Conjunction of the named contracts, in order.
    pub fn conjoined<S: AsRef<str>>(&self, names: &[S]) -> Result<ContractAutomaton, ModelError> {
        let mut iter = names.iter().map(|n| {
            self.contract(n.as_ref())
                .ok_or_else(|| ModelError::UnknownState(n.as_ref().to_string()))
        });
        let first = iter.next().ok_or(ModelError::NoStates)??.clone();
        iter.try_fold(first, |acc, c| acc.conjoin(c?))
    }

    /// The contract regulating the parties: the `conjoin` directive if
    /// present, otherwise every declared contract conjoined in order.
    pub fn effective_contract(&self) -> Result<ContractAutomaton, ModelError> {
        match &self.conjoin {
            Some(names) => self.conjoined(names),
            None => {
                let names: Vec<&str> = self.contracts.iter().map(|(n, _)| n.as_str()).collect();
                self.conjoined(&names)
            }
        }
    }

    /// Joint states of the two parties with no way forward.
    pub fn deadlocks(&self) -> Result<Vec<String>, ModelError> {
        let dead = check_well_formed(&self.parties[0], &self.parties[1], self.sync, &self.mutex)?;
        Ok(dead
            .into_iter()
            .map(|[a, b]| format!("({},{})", self.parties[0].state_name(a), self.parties[1].state_name(b)))
            .collect())
    }

    pub fn regulated(&self) -> Result<RegulatedSystem, ModelError> {
        self.regulated_by(self.effective_contract()?)
    }

    pub fn regulated_by(&self, contract: ContractAutomaton) -> Result<RegulatedSystem, ModelError> {
        build_regulated_system(
            self.parties[0].clone(),
            self.parties[1].clone(),
            self.sync,
            self.mutex.clone(),
            contract,
        )
    }

    pub fn party_by_name(&self, name: &str) -> Option<Party> {
        match self.party_names.iter().position(|n| n == name) {
            Some(0) => Some(Party::One),
            Some(_) => Some(Party::Two),
            None => None,
        }
    }
}

/// Result of loading: the system when there were no errors, and every
/// diagnostic produced along the way.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub system: Option<System>,
    pub ast: Option<SystemFile>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Loaded {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

pub fn load(text: &str, opts: LoadOptions) -> Loaded {
    match parse(text) {
        Err(d) => Loaded {
            system: None,
            ast: None,
            diagnostics: vec![d],
        },
        Ok(ast) => {
            let mut cx = Lower { diags: vec![], opts };
            let system = cx.system(&ast);
            let system = if cx.diags.iter().any(Diagnostic::is_error) {
                None
            } else {
                system
            };
            Loaded {
                system,
                ast: Some(ast),
                diagnostics: cx.diags,
            }
        }
    }
}

struct Lower {
    diags: Vec<Diagnostic>,
    opts: LoadOptions,
}

impl Lower {
    fn error(&mut self, code: &'static str, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, span, msg));
    }

    fn action(&mut self, al: &Alphabet, id: &Ident) -> Option<ActionId> {
        let a = al.id(&id.name);
        if a.is_none() {
            self.error("E002", id.span, format!("undeclared action `{}`", id.name));
        }
        a
    }

    fn actions(&mut self, al: &Alphabet, ids: &[Ident]) -> Option<ActionSet> {
        let mut set = ActionSet::EMPTY;
        let mut ok = true;
        for id in ids {
            match self.action(al, id) {
                Some(a) => set = set.with(a),
                None => ok = false,
            }
        }
        ok.then_some(set)
    }

    fn system(&mut self, f: &SystemFile) -> Option<System> {
        let alphabet = self.alphabet(f)?;
        let mutex = self.mutex(f, &alphabet);
        let sync = self.sync(f, &alphabet, &mutex);

        let mut seen = HashSet::new();
        for p in &f.parties {
            if !seen.insert(p.name.name.clone()) {
                self.error("E004", p.name.span, format!("duplicate party `{}`", p.name.name));
            }
        }
        if f.parties.len() != 2 {
            let span = f.parties.get(2).map_or(f.name.span, |p| p.name.span);
            self.error(
                "E006",
                span,
                format!("a system needs exactly two parties, found {}", f.parties.len()),
            );
        }
        let parties: Vec<Option<MultiActionAutomaton>> =
            f.parties.iter().map(|p| self.party(p, &alphabet, &mutex)).collect();
        let party_names: Vec<String> = f.parties.iter().map(|p| p.name.name.clone()).collect();

        if f.contracts.is_empty() {
            self.error("E008", f.name.span, "a system needs at least one contract");
        }
        let mut seen = HashSet::new();
        let mut contracts = vec![];
        for c in &f.contracts {
            if !seen.insert(c.name.name.clone()) {
                self.error("E004", c.name.span, format!("duplicate contract `{}`", c.name.name));
            }
            if let Some(ca) = self.contract(c, &alphabet, &party_names) {
                contracts.push((c.name.name.clone(), ca));
            }
        }
        if let Some(names) = &f.conjoin {
            if names.is_empty() {
                self.error("E001", f.name.span, "`conjoin` needs at least one contract name");
            }
            for n in names {
                if !seen.contains(&n.name) {
                    self.error("E009", n.span, format!("unknown contract `{}`", n.name));
                }
            }
        }

        let sync = sync?;
        let [Some(p1), Some(p2)] = <[Option<MultiActionAutomaton>; 2]>::try_from(parties).ok()? else {
            return None;
        };
        let names = <[String; 2]>::try_from(party_names).ok()?;
        Some(System {
            name: f.name.name.clone(),
            alphabet,
            sync,
            mutex,
            party_names: names,
            parties: [p1, p2],
            contracts,
            conjoin: f.conjoin.as_ref().map(|v| v.iter().map(|i| i.name.clone()).collect()),
        })
    }

    fn alphabet(&mut self, f: &SystemFile) -> Option<Alphabet> {
        let Some(names) = &f.alphabet else {
            self.error("E007", f.name.span, "missing `alphabet` block");
            return None;
        };
        if names.is_empty() {
            self.error("E007", f.name.span, "the alphabet must declare at least one action");
            return None;
        }
        if names.len() > MAX_ACTIONS {
            self.error(
                "E012",
                names[MAX_ACTIONS].span,
                format!("at most {MAX_ACTIONS} actions are supported"),
            );
            return None;
        }
        let mut seen = HashSet::new();
        let mut ok = true;
        for n in names {
            if !seen.insert(&n.name) {
                self.error("E004", n.span, format!("duplicate action `{}`", n.name));
                ok = false;
            }
        }
        if !ok {
            return None;
        }
        Alphabet::new(names.iter().map(|n| n.name.as_str())).ok()
    }

    fn mutex(&mut self, f: &SystemFile, al: &Alphabet) -> MutexRelation {
        let mut m = MutexRelation::new();
        for (a, b) in &f.mutex {
            let (Some(x), Some(y)) = (self.action(al, a), self.action(al, b)) else {
                continue;
            };
            if m.insert(x, y).is_err() {
                self.error("E011", a.span, format!("action `{}` cannot exclude itself", a.name));
            }
        }
        m
    }

    fn sync(&mut self, f: &SystemFile, al: &Alphabet, m: &MutexRelation) -> Option<SyncSet> {
        let set = self.actions(al, &f.sync)?;
        if !self.opts.allow_mutex_sync {
            let mut bad = false;
            for id in &f.sync {
                if al.id(&id.name).is_some_and(|a| m.actions().contains(a)) {
                    self.error(
                        "E010",
                        id.span,
                        format!("mutually exclusive action `{}` may not be synchronised on", id.name),
                    );
                    bad = true;
                }
            }
            if bad {
                return None;
            }
        }
        SyncSet::unchecked(al, set).ok()
    }

    fn inits(&mut self, owner: &Ident, inits: &[Ident], known: &HashMap<String, usize>) -> Option<usize> {
        if let Some(extra) = inits.get(1) {
            self.error(
                "E005",
                extra.span,
                format!("`{}` declares more than one initial state", owner.name),
            );
        }
        let Some(init) = inits.first() else {
            self.error(
                "E008",
                owner.span,
                format!("`{}` has no `init` declaration", owner.name),
            );
            return None;
        };
        let q = known.get(&init.name).copied();
        if q.is_none() {
            self.error("E009", init.span, format!("unknown state `{}`", init.name));
        }
        q
    }

    fn state_index<'a, I: Iterator<Item = &'a Ident>>(&mut self, names: I) -> HashMap<String, usize> {
        let mut known = HashMap::new();
        for n in names {
            if known.contains_key(&n.name) {
                self.error("E004", n.span, format!("duplicate state `{}`", n.name));
            } else {
                known.insert(n.name.clone(), known.len());
            }
        }
        known
    }

    fn party(&mut self, p: &PartyDecl, al: &Alphabet, m: &MutexRelation) -> Option<MultiActionAutomaton> {
        let known = self.state_index(p.states.iter().map(|s| &s.name));
        let init = self.inits(&p.name, &p.inits, &known);
        let mut b = MultiActionAutomaton::builder(al.clone());
        let mut ids = vec![];
        for s in &p.states {
            ids.push(b.state_or_insert(&s.name.name));
        }
        let mut ok = init.is_some();
        for s in &p.states {
            let src = b.state_or_insert(&s.name.name);
            for e in &s.edges {
                let label = self.actions(al, &e.label);
                let target = known.get(&e.target.name).copied();
                if target.is_none() {
                    self.error("E009", e.target.span, format!("unknown state `{}`", e.target.name));
                }
                if let Some(l) = label {
                    if let Some((x, y)) = m.violation(l) {
                        self.error(
                            "E003",
                            e.label_span,
                            format!(
                                "label {} combines mutually exclusive actions `{}` and `{}`",
                                al.render(l),
                                al.name(x),
                                al.name(y)
                            ),
                        );
                        ok = false;
                    }
                }
                match (label, target) {
                    (Some(l), Some(t)) => {
                        let t = b.state_or_insert(&p.states[t].name.name);
                        b.transition(src, l, t);
                    }
                    _ => ok = false,
                }
            }
        }
        if p.states.is_empty() {
            return None;
        }
        if let Some(i) = init {
            b.initial(ids[i]);
        }
        if !ok {
            return None;
        }
        b.build().ok()
    }

    fn guard(&mut self, g: &GuardAst, al: &Alphabet) -> Option<Guard> {
        Some(match g {
            GuardAst::Const(b) => Guard::Const(*b),
            GuardAst::Contains(a) => Guard::Contains(self.action(al, a)?),
            GuardAst::Not(x) => Guard::Not(Box::new(self.guard(x, al)?)),
            GuardAst::And(x, y) => {
                let (x, y) = (self.guard(x, al), self.guard(y, al));
                Guard::And(Box::new(x?), Box::new(y?))
            }
            GuardAst::Or(x, y) => {
                let (x, y) = (self.guard(x, al), self.guard(y, al));
                Guard::Or(Box::new(x?), Box::new(y?))
            }
        })
    }

    fn clause(&mut self, c: &ClauseAst, al: &Alphabet, parties: &[String]) -> Option<Clause> {
        let party = match &c.party {
            PartyRef::Index(1) => Some(Party::One),
            PartyRef::Index(2) => Some(Party::Two),
            PartyRef::Index(n) => {
                self.error("E009", c.party_span, format!("party index must be 1 or 2, found {n}"));
                None
            }
            PartyRef::Name(n) => match parties.iter().position(|p| p == n) {
                Some(0) => Some(Party::One),
                Some(1) => Some(Party::Two),
                _ => {
                    self.error("E009", c.party_span, format!("unknown party `{n}`"));
                    None
                }
            },
        };
        let action = self.action(al, &c.action);
        let literal = ActionLiteral {
            action: action?,
            positive: !c.negated,
        };
        Some(match c.modality {
            ModalityAst::Obligation => Clause::obligation(party?, literal),
            ModalityAst::Permission => Clause::permission(party?, literal),
        })
    }

    fn contract(&mut self, c: &ContractDecl, al: &Alphabet, parties: &[String]) -> Option<ContractAutomaton> {
        if c.states.is_empty() {
            self.error(
                "E008",
                c.name.span,
                format!("contract `{}` declares no states", c.name.name),
            );
            return None;
        }
        let known = self.state_index(c.states.iter().map(|s| &s.name));
        let init = self.inits(&c.name, &c.inits, &known);
        let mut b = ContractAutomaton::builder(al.clone());
        let mut ok = init.is_some();
        let mut ids = vec![];
        for s in &c.states {
            let mut clauses = vec![];
            for cl in &s.clauses {
                match self.clause(cl, al, parties) {
                    Some(x) => clauses.push(x),
                    None => ok = false,
                }
            }
            match b.lookup(&s.name.name) {
                Some(id) => {
                    for x in clauses {
                        b.add_clause(id, x);
                    }
                    ids.push(id);
                }
                None => ids.push(b.state(&s.name.name, clauses).ok()?),
            }
        }
        for (s, &src) in c.states.iter().zip(&ids) {
            if b.lookup(&s.name.name) != Some(src) {
                continue;
            }
            for arm in &s.arms {
                let target = known.get(&arm.target.name).copied();
                if target.is_none() {
                    self.error("E009", arm.target.span, format!("unknown state `{}`", arm.target.name));
                }
                let guard = match &arm.guard {
                    Some(g) => self.guard(g, al),
                    None => Some(Guard::Const(true)),
                };
                match (guard, target) {
                    (Some(g), Some(t)) => {
                        let t = b.lookup(&c.states[t].name.name).expect("known state");
                        if arm.guard.is_none() {
                            b.else_arm(src, t);
                        } else {
                            b.arm(src, g, t);
                        }
                    }
                    _ => ok = false,
                }
            }
        }
        if let Some(i) = init {
            b.initial(ids[i]);
        }
        if !ok {
            return None;
        }
        let ca = b.build().ok()?;
        let report = ca.validate(self.opts.strict_totality);
        for q in report.unreachable {
            let span = c.states[q.0].name.span;
            self.diags.push(Diagnostic::warning(
                "W001",
                span,
                format!(
                    "state `{}` of contract `{}` is unreachable",
                    ca.state_name(q),
                    c.name.name
                ),
            ));
        }
        for q in report.implicit_else {
            let span = c.states[q.0].name.span;
            self.diags.push(Diagnostic::warning(
                "W002",
                span,
                format!("state `{}` stays put on labels no arm matches", ca.state_name(q)),
            ));
        }
        for (q, label) in report.not_total {
            let span = c.states[q.0].name.span;
            self.error(
                "E014",
                span,
                format!(
                    "no arm of state `{}` matches label {}",
                    ca.state_name(q),
                    al.render(label)
                ),
            );
        }
        Some(ca)
    }
}
