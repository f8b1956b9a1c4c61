// SPDX-License-Identifier: Apache-2.0

//! Deontic clauses and contract automata.
//!
//! A contract automaton is a multi-action automaton whose transition function
//! is total and deterministic. Each state carries an ordered list of guarded
//! arms; the first arm whose guard matches the action set wins, and a state
//! with no matching arm stays put (the implicit trailing `else`).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automata::{ActionId, ActionLiteral, ActionSet, Alphabet};
use crate::error::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Party {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Party {
    pub const BOTH: [Party; 2] = [Party::One, Party::Two];

    pub fn other(self) -> Party {
        match self {
            Party::One => Party::Two,
            Party::Two => Party::One,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Party::One => 0,
            Party::Two => 1,
        }
    }

    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Party> {
        match n {
            1 => Some(Party::One),
            2 => Some(Party::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    Permission,
    Obligation,
}

/// `P<p>(x)` or `O<p>(x)`. Prohibitions are desugared on construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Clause {
    pub modality: Modality,
    pub party: Party,
    pub literal: ActionLiteral,
}

impl Clause {
    pub fn obligation(party: Party, literal: ActionLiteral) -> Self {
        Clause {
            modality: Modality::Obligation,
            party,
            literal,
        }
    }

    pub fn permission(party: Party, literal: ActionLiteral) -> Self {
        Clause {
            modality: Modality::Permission,
            party,
            literal,
        }
    }

    /// `F<p>(x)` is `!P<p>(x)`, which is `O<p>(!x)`.
    pub fn prohibition(party: Party, literal: ActionLiteral) -> Self {
        Clause::permission(party, literal).negate()
    }

    /// Norm opposite: `!P(x) = O(!x)` and `!O(x) = P(!x)`.
    pub fn negate(self) -> Self {
        let modality = match self.modality {
            Modality::Permission => Modality::Obligation,
            Modality::Obligation => Modality::Permission,
        };
        Clause {
            modality,
            party: self.party,
            literal: self.literal.negate(),
        }
    }

    pub fn action(self) -> ActionId {
        self.literal.action
    }

    pub fn is_permission(self) -> bool {
        self.modality == Modality::Permission
    }

    pub fn is_obligation(self) -> bool {
        self.modality == Modality::Obligation
    }

    /// Concrete syntax with numeric party indices, e.g. `O<1>(!a)`.
    pub fn render(self, alphabet: &Alphabet) -> String {
        self.render_with(alphabet, None)
    }

    /// Concrete syntax using party names when given.
    pub fn render_with(self, alphabet: &Alphabet, parties: Option<&[String; 2]>) -> String {
        let m = match self.modality {
            Modality::Permission => 'P',
            Modality::Obligation => 'O',
        };
        let p = match parties {
            Some(names) => names[self.party.index()].clone(),
            None => self.party.number().to_string(),
        };
        format!("{m}<{p}>({})", self.literal.render(alphabet))
    }

    /// Parses `O<1>(a)`, `P<2>(!b)`, `F<1>(c)`. Party names, when given,
    /// may stand in for the numeric index.
    pub fn parse(text: &str, alphabet: &Alphabet, parties: Option<&[String; 2]>) -> Result<Clause, ClauseSyntaxError> {
        let text = text.trim();
        let err = || ClauseSyntaxError(text.to_string());
        let mut chars = text.chars();
        let kind = chars.next().ok_or_else(err)?;
        let rest = chars.as_str().trim_start();
        let rest = rest.strip_prefix('<').ok_or_else(err)?;
        let (party, rest) = rest.split_once('>').ok_or_else(err)?;
        let party = party.trim();
        let party = match party.parse::<u8>().ok().and_then(Party::from_number) {
            Some(p) => p,
            None => match parties.and_then(|n| n.iter().position(|x| x == party)) {
                Some(0) => Party::One,
                Some(_) => Party::Two,
                None => return Err(err()),
            },
        };
        let rest = rest.trim_start().strip_prefix('(').ok_or_else(err)?;
        let body = rest.trim_end().strip_suffix(')').ok_or_else(err)?.trim();
        let (positive, name) = match body.strip_prefix('!') {
            Some(n) => (false, n.trim()),
            None => (true, body),
        };
        let action = alphabet.id(name).ok_or_else(err)?;
        let literal = ActionLiteral { action, positive };
        match kind {
            'O' => Ok(Clause::obligation(party, literal)),
            'P' => Ok(Clause::permission(party, literal)),
            'F' => Ok(Clause::prohibition(party, literal)),
            _ => Err(err()),
        }
    }

    /// Every clause over an alphabet of `n` actions: both modalities, both
    /// parties, both polarities.
    pub fn universe(n: usize) -> Vec<Clause> {
        let mut out = Vec::with_capacity(8 * n);
        for modality in [Modality::Permission, Modality::Obligation] {
            for party in Party::BOTH {
                for i in 0..n {
                    for positive in [true, false] {
                        out.push(Clause {
                            modality,
                            party,
                            literal: ActionLiteral {
                                action: ActionId::new(i),
                                positive,
                            },
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed clause `{0}`")]
pub struct ClauseSyntaxError(pub String);

/// Boolean condition over an action set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Guard {
    Const(bool),
    Contains(ActionId),
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
}

impl Guard {
    pub fn contains(a: ActionId) -> Self {
        Guard::Contains(a)
    }

    pub fn and(self, other: Guard) -> Guard {
        match (self, other) {
            (Guard::Const(true), g) | (g, Guard::Const(true)) => g,
            (Guard::Const(false), _) | (_, Guard::Const(false)) => Guard::Const(false),
            (a, b) => Guard::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(self, other: Guard) -> Guard {
        match (self, other) {
            (Guard::Const(false), g) | (g, Guard::Const(false)) => g,
            (Guard::Const(true), _) | (_, Guard::Const(true)) => Guard::Const(true),
            (a, b) => Guard::Or(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Guard {
        match self {
            Guard::Const(b) => Guard::Const(!b),
            Guard::Not(g) => *g,
            g => Guard::Not(Box::new(g)),
        }
    }

    pub fn eval(&self, set: ActionSet) -> bool {
        match self {
            Guard::Const(b) => *b,
            Guard::Contains(a) => set.contains(*a),
            Guard::Not(g) => !g.eval(set),
            Guard::And(a, b) => a.eval(set) && b.eval(set),
            Guard::Or(a, b) => a.eval(set) || b.eval(set),
        }
    }

    /// Actions the guard mentions; evaluation depends on nothing else.
    pub fn atoms(&self) -> ActionSet {
        match self {
            Guard::Const(_) => ActionSet::EMPTY,
            Guard::Contains(a) => ActionSet::singleton(*a),
            Guard::Not(g) => g.atoms(),
            Guard::And(a, b) | Guard::Or(a, b) => a.atoms().union(b.atoms()),
        }
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.render_prec(alphabet, 0)
    }

    fn render_prec(&self, al: &Alphabet, prec: u8) -> String {
        match self {
            Guard::Const(true) => "true".into(),
            Guard::Const(false) => "false".into(),
            Guard::Contains(a) => format!("contains({})", al.name(*a)),
            Guard::Not(g) => format!("not {}", g.render_prec(al, 3)),
            Guard::And(a, b) => {
                let s = format!("{} and {}", a.render_prec(al, 2), b.render_prec(al, 2));
                if prec > 2 {
                    format!("({s})")
                } else {
                    s
                }
            }
            Guard::Or(a, b) => {
                let s = format!("{} or {}", a.render_prec(al, 1), b.render_prec(al, 1));
                if prec > 1 {
                    format!("({s})")
                } else {
                    s
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CaStateId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arm {
    pub guard: Guard,
    pub target: CaStateId,
    /// Written as `else` in the source.
    pub is_else: bool,
}

/// Positive and negative obligations of one party in one state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Duties {
    pub obliged: ActionSet,
    pub forbidden: ActionSet,
}

impl Duties {
    pub fn of<'a, I: IntoIterator<Item = &'a Clause>>(clauses: I, party: Party) -> Duties {
        let mut d = Duties::default();
        for c in clauses {
            if c.party == party && c.is_obligation() {
                if c.literal.positive {
                    d.obliged = d.obliged.with(c.action());
                } else {
                    d.forbidden = d.forbidden.with(c.action());
                }
            }
        }
        d
    }

    pub fn is_empty(self) -> bool {
        self.obliged.is_empty() && self.forbidden.is_empty()
    }

    /// `O ⊆ A ∧ F ∩ A = ∅`.
    pub fn viable(self, set: ActionSet) -> bool {
        self.obliged.is_subset(set) && self.forbidden.is_disjoint(set)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractAutomaton {
    alphabet: Alphabet,
    states: Vec<String>,
    initial: CaStateId,
    arms: Vec<Vec<Arm>>,
    contract: Vec<BTreeSet<Clause>>,
    duties: Vec<[Duties; 2]>,
}

impl ContractAutomaton {
    pub fn builder(alphabet: Alphabet) -> ContractBuilder {
        ContractBuilder {
            alphabet,
            states: Vec::new(),
            index: HashMap::new(),
            initial: None,
            arms: Vec::new(),
            contract: Vec::new(),
        }
    }

    /// One state, no clauses, self-loop on everything.
    pub fn trivial(alphabet: Alphabet) -> Self {
        let mut b = Self::builder(alphabet);
        b.state("c0", []).expect("fresh");
        b.build().expect("trivial contract")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> CaStateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = CaStateId> {
        (0..self.states.len()).map(CaStateId)
    }

    pub fn state_name(&self, q: CaStateId) -> &str {
        &self.states[q.0]
    }

    pub fn state(&self, name: &str) -> Result<CaStateId, ModelError> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(CaStateId)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn arms(&self, q: CaStateId) -> &[Arm] {
        &self.arms[q.0]
    }

    pub fn clauses(&self, q: CaStateId) -> &BTreeSet<Clause> {
        &self.contract[q.0]
    }

    pub fn duties(&self, q: CaStateId, p: Party) -> Duties {
        self.duties[q.0][p.index()]
    }

    /// `O_p(q)`.
    pub fn obliged_set(&self, q: CaStateId, p: Party) -> ActionSet {
        self.duties(q, p).obliged
    }

    /// `F_p(q)`.
    pub fn forbidden_set(&self, q: CaStateId, p: Party) -> ActionSet {
        self.duties(q, p).forbidden
    }

    pub fn viable(&self, p: Party, q: CaStateId, set: ActionSet) -> bool {
        self.duties(q, p).viable(set)
    }

    /// Index of the first matching arm, `None` for the implicit self-loop.
    pub fn matching_arm(&self, q: CaStateId, set: ActionSet) -> Option<usize> {
        self.arms[q.0].iter().position(|arm| arm.guard.eval(set))
    }

    pub fn step(&self, q: CaStateId, set: ActionSet) -> CaStateId {
        match self.matching_arm(q, set) {
            Some(i) => self.arms[q.0][i].target,
            None => q,
        }
    }

    /// Arms with the implicit `else` made explicit, in match order.
    pub fn total_arms(&self, q: CaStateId) -> Vec<(Guard, CaStateId)> {
        let mut arms: Vec<(Guard, CaStateId)> = self.arms[q.0].iter().map(|a| (a.guard.clone(), a.target)).collect();
        if !arms.iter().any(|(g, _)| *g == Guard::Const(true)) {
            arms.push((Guard::Const(true), q));
        }
        arms
    }

    fn atoms(&self, q: CaStateId) -> ActionSet {
        self.arms[q.0]
            .iter()
            .fold(ActionSet::EMPTY, |s, a| s.union(a.guard.atoms()))
    }

    /// One representative label per distinct successor, smallest label first.
    /// Guards only read their atoms, so enumerating subsets of the atoms
    /// covers every label.
    pub fn moves(&self, q: CaStateId) -> Vec<(ActionSet, CaStateId)> {
        let mut seen: BTreeMap<CaStateId, ActionSet> = BTreeMap::new();
        for label in minimal_labels(self.atoms(q)) {
            seen.entry(self.step(q, label)).or_insert(label);
        }
        let mut out: Vec<_> = seen.into_iter().map(|(t, l)| (l, t)).collect();
        out.sort_by_key(|&(l, t)| (l.len(), l, t));
        out
    }

    /// States reachable from the initial state, each with a shortest label
    /// trace, in breadth-first order.
    pub fn reachable(&self) -> Vec<(CaStateId, Vec<ActionSet>)> {
        let mut trace: HashMap<CaStateId, Vec<ActionSet>> = HashMap::new();
        let mut order = vec![];
        let mut queue = VecDeque::from([self.initial]);
        trace.insert(self.initial, vec![]);
        while let Some(q) = queue.pop_front() {
            order.push(q);
            for (label, t) in self.moves(q) {
                if !trace.contains_key(&t) {
                    let mut tr = trace[&q].clone();
                    tr.push(label);
                    trace.insert(t, tr);
                    queue.push_back(t);
                }
            }
        }
        order
            .into_iter()
            .map(|q| {
                let tr = trace.remove(&q).unwrap_or_default();
                (q, tr)
            })
            .collect()
    }

    /// Product contract: both components step together and a product state
    /// carries the union of the component clause sets. Only pairs reachable
    /// from the initial pair are kept.
    pub fn conjoin(&self, other: &ContractAutomaton) -> Result<ContractAutomaton, ModelError> {
        if self.alphabet != other.alphabet {
            return Err(ModelError::AlphabetMismatch);
        }
        let mut index: HashMap<(CaStateId, CaStateId), CaStateId> = HashMap::new();
        let mut order: Vec<(CaStateId, CaStateId)> = vec![];
        let mut queue = VecDeque::new();
        let start = (self.initial, other.initial);
        index.insert(start, CaStateId(0));
        order.push(start);
        queue.push_back(start);
        let mut arms_by_pair: Vec<Vec<Arm>> = vec![];
        while let Some((q, r)) = queue.pop_front() {
            let atoms = self.atoms(q).union(other.atoms(r));
            let left = self.total_arms(q);
            let right = other.total_arms(r);
            let mut arms = vec![];
            for (gl, tl) in &left {
                for (gr, tr) in &right {
                    // Lexicographic first match over (left, right) arms picks
                    // the first left arm that fires, then the first right arm.
                    let guard = gl.clone().and(gr.clone());
                    let fires = minimal_labels(atoms).any(|l| {
                        self.step(q, l) == *tl
                            && other.step(r, l) == *tr
                            && self.first_match_is(q, l, gl)
                            && other.first_match_is(r, l, gr)
                    });
                    if !fires {
                        continue;
                    }
                    let pair = (*tl, *tr);
                    let target = *index.entry(pair).or_insert_with(|| {
                        order.push(pair);
                        queue.push_back(pair);
                        CaStateId(order.len() - 1)
                    });
                    let is_else = guard == Guard::Const(true);
                    arms.push(Arm { guard, target, is_else });
                }
            }
            arms_by_pair.push(arms);
        }
        let mut b = ContractAutomaton::builder(self.alphabet.clone());
        for &(q, r) in &order {
            let clauses: BTreeSet<Clause> = self.clauses(q).union(other.clauses(r)).copied().collect();
            b.state(&format!("({},{})", self.state_name(q), other.state_name(r)), clauses)?;
        }
        for (i, arms) in arms_by_pair.into_iter().enumerate() {
            for arm in arms {
                b.push_arm(CaStateId(i), arm);
            }
        }
        b.build()
    }

    fn first_match_is(&self, q: CaStateId, label: ActionSet, guard: &Guard) -> bool {
        self.total_arms(q)
            .iter()
            .find(|(g, _)| g.eval(label))
            .map(|(g, _)| g == guard)
            .unwrap_or(false)
    }

    /// Totality and reachability report.
    ///
    /// With `strict` the implicit self-loop does not count: every label must
    /// be matched by an explicit arm.
    pub fn validate(&self, strict: bool) -> CaReport {
        let reachable: BTreeSet<CaStateId> = self.reachable().into_iter().map(|(q, _)| q).collect();
        let mut report = CaReport::default();
        for q in self.states() {
            if !reachable.contains(&q) {
                report.unreachable.push(q);
            }
            let uncovered = minimal_labels(self.atoms(q)).find(|&l| self.matching_arm(q, l).is_none());
            if let Some(label) = uncovered {
                if strict {
                    report.not_total.push((q, label));
                } else {
                    report.implicit_else.push(q);
                }
            }
        }
        report
    }
}

/// Subsets of `atoms` ordered by size, then by mask.
pub(crate) fn minimal_labels(atoms: ActionSet) -> impl Iterator<Item = ActionSet> {
    let mut labels: Vec<ActionSet> = atoms.subsets().collect();
    labels.sort_by_key(|l| (l.len(), *l));
    labels.into_iter()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CaReport {
    pub unreachable: Vec<CaStateId>,
    /// States relying on the implicit self-loop for some label.
    pub implicit_else: Vec<CaStateId>,
    /// Strict mode only: a state and a label no explicit arm matches.
    pub not_total: Vec<(CaStateId, ActionSet)>,
}

impl CaReport {
    pub fn is_total(&self) -> bool {
        self.not_total.is_empty()
    }
}

pub struct ContractBuilder {
    alphabet: Alphabet,
    states: Vec<String>,
    index: HashMap<String, CaStateId>,
    initial: Option<CaStateId>,
    arms: Vec<Vec<Arm>>,
    contract: Vec<BTreeSet<Clause>>,
}

impl ContractBuilder {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state<I: IntoIterator<Item = Clause>>(&mut self, name: &str, clauses: I) -> Result<CaStateId, ModelError> {
        if self.index.contains_key(name) {
            return Err(ModelError::DuplicateState(name.to_string()));
        }
        let id = CaStateId(self.states.len());
        self.states.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.arms.push(vec![]);
        self.contract.push(clauses.into_iter().collect());
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<CaStateId> {
        self.index.get(name).copied()
    }

    pub fn add_clause(&mut self, q: CaStateId, clause: Clause) {
        self.contract[q.0].insert(clause);
    }

    pub fn initial(&mut self, q: CaStateId) -> &mut Self {
        self.initial = Some(q);
        self
    }

    pub fn arm(&mut self, q: CaStateId, guard: Guard, target: CaStateId) -> &mut Self {
        self.push_arm(
            q,
            Arm {
                guard,
                target,
                is_else: false,
            },
        )
    }

    pub fn else_arm(&mut self, q: CaStateId, target: CaStateId) -> &mut Self {
        self.push_arm(
            q,
            Arm {
                guard: Guard::Const(true),
                target,
                is_else: true,
            },
        )
    }

    fn push_arm(&mut self, q: CaStateId, arm: Arm) -> &mut Self {
        self.arms[q.0].push(arm);
        self
    }

    pub fn build(self) -> Result<ContractAutomaton, ModelError> {
        let n = self.states.len();
        if n == 0 {
            return Err(ModelError::NoStates);
        }
        let initial = self.initial.unwrap_or(CaStateId(0));
        if initial.0 >= n {
            return Err(ModelError::UnknownState(format!("#{}", initial.0)));
        }
        let full = self.alphabet.full_set();
        for arms in &self.arms {
            for arm in arms {
                if arm.target.0 >= n {
                    return Err(ModelError::UnknownState(format!("#{}", arm.target.0)));
                }
                if !arm.guard.atoms().is_subset(full) {
                    return Err(ModelError::LabelOutsideAlphabet);
                }
            }
        }
        for clauses in &self.contract {
            if clauses.iter().any(|c| c.action().index() >= self.alphabet.len()) {
                return Err(ModelError::LabelOutsideAlphabet);
            }
        }
        let duties = self
            .contract
            .iter()
            .map(|cs| [Duties::of(cs, Party::One), Duties::of(cs, Party::Two)])
            .collect();
        Ok(ContractAutomaton {
            alphabet: self.alphabet,
            states: self.states,
            initial,
            arms: self.arms,
            contract: self.contract,
            duties,
        })
    }
}
