// SPDX-License-Identifier: Apache-2.0

//! Alphabets, action literals, action sets and raw multi-action automata.
//!
//! Action sets are bitmasks over the alphabet, so an alphabet holds at most
//! [`MAX_ACTIONS`] actions. State ids are indices scoped to the automaton that
//! issued them.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub const MAX_ACTIONS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionId(u8);

impl ActionId {
    pub fn new(index: usize) -> Self {
        assert!(index < MAX_ACTIONS, "action index {index} out of range");
        ActionId(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of actions performed together on one transition.
///
/// The ordering is the numeric order of the underlying mask; it is total and
/// stable, which is all the deterministic exploration order needs.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionSet(u64);

impl ActionSet {
    pub const EMPTY: ActionSet = ActionSet(0);

    pub fn from_bits(bits: u64) -> Self {
        ActionSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn singleton(a: ActionId) -> Self {
        ActionSet(1u64 << a.index())
    }

    pub fn contains(self, a: ActionId) -> bool {
        self.0 & (1u64 << a.index()) != 0
    }

    pub fn with(self, a: ActionId) -> Self {
        ActionSet(self.0 | (1u64 << a.index()))
    }

    pub fn union(self, other: ActionSet) -> Self {
        ActionSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ActionSet) -> Self {
        ActionSet(self.0 & other.0)
    }

    pub fn difference(self, other: ActionSet) -> Self {
        ActionSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: ActionSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: ActionSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = ActionId> {
        let bits = self.0;
        (0..MAX_ACTIONS)
            .filter(move |i| bits & (1u64 << i) != 0)
            .map(ActionId::new)
    }

    /// Every subset of `self`, smallest masks first.
    pub fn subsets(self) -> impl Iterator<Item = ActionSet> {
        let members: Vec<u64> = self.iter().map(|a| 1u64 << a.index()).collect();
        let count = 1u64 << members.len();
        (0..count).map(move |m| {
            let mut bits = 0;
            for (i, bit) in members.iter().enumerate() {
                if m & (1 << i) != 0 {
                    bits |= bit;
                }
            }
            ActionSet(bits)
        })
    }
}

impl fmt::Debug for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|a| a.index())).finish()
    }
}

impl FromIterator<ActionId> for ActionSet {
    fn from_iter<T: IntoIterator<Item = ActionId>>(iter: T) -> Self {
        iter.into_iter().fold(ActionSet::EMPTY, ActionSet::with)
    }
}

/// The finite, ordered action alphabet Σ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    actions: Vec<String>,
    index: HashMap<String, ActionId>,
}

impl Alphabet {
    pub fn new<I, S>(actions: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let actions: Vec<String> = actions.into_iter().map(Into::into).collect();
        if actions.is_empty() {
            return Err(ModelError::EmptyAlphabet);
        }
        if actions.len() > MAX_ACTIONS {
            return Err(ModelError::AlphabetTooLarge(actions.len()));
        }
        let mut index = HashMap::with_capacity(actions.len());
        for (i, name) in actions.iter().enumerate() {
            if name.is_empty() {
                return Err(ModelError::EmptyActionName);
            }
            if index.insert(name.clone(), ActionId::new(i)).is_some() {
                return Err(ModelError::DuplicateAction(name.clone()));
            }
        }
        Ok(Alphabet { actions, index })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<ActionId> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<ActionId, ModelError> {
        self.id(name).ok_or_else(|| ModelError::UnknownAction(name.to_string()))
    }

    pub fn name(&self, a: ActionId) -> &str {
        &self.actions[a.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.actions
    }

    pub fn ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len()).map(ActionId::new)
    }

    pub fn full_set(&self) -> ActionSet {
        self.ids().collect()
    }

    pub fn set<'a, I>(&self, names: I) -> Result<ActionSet, ModelError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        names
            .into_iter()
            .map(|n| self.lookup(n))
            .collect::<Result<ActionSet, _>>()
    }

    /// Renders `{a,b}` with members in declaration order.
    pub fn render(&self, set: ActionSet) -> String {
        let names: Vec<&str> = set.iter().map(|a| self.name(a)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Parses `{a,b}` (braces optional, whitespace ignored).
    pub fn parse_set(&self, text: &str) -> Result<ActionSet, ModelError> {
        let inner = text.trim();
        let inner = inner
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .unwrap_or(inner);
        inner
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|n| self.lookup(n))
            .collect()
    }
}

/// An action `a` or its absence `!a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionLiteral {
    pub action: ActionId,
    pub positive: bool,
}

impl ActionLiteral {
    pub fn pos(action: ActionId) -> Self {
        ActionLiteral { action, positive: true }
    }

    pub fn neg(action: ActionId) -> Self {
        ActionLiteral {
            action,
            positive: false,
        }
    }

    pub fn negate(self) -> Self {
        ActionLiteral {
            action: self.action,
            positive: !self.positive,
        }
    }

    /// Whether `set` agrees with the literal: contains the action for `a`,
    /// lacks it for `!a`.
    pub fn holds_in(self, set: ActionSet) -> bool {
        set.contains(self.action) == self.positive
    }

    pub fn render(self, alphabet: &Alphabet) -> String {
        if self.positive {
            alphabet.name(self.action).to_string()
        } else {
            format!("!{}", alphabet.name(self.action))
        }
    }
}

/// Symmetric, irreflexive mutual exclusion over actions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MutexRelation {
    pairs: BTreeSet<(ActionId, ActionId)>,
}

impl MutexRelation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I>(pairs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (ActionId, ActionId)>,
    {
        let mut rel = MutexRelation::new();
        for (a, b) in pairs {
            rel.insert(a, b)?;
        }
        Ok(rel)
    }

    pub fn insert(&mut self, a: ActionId, b: ActionId) -> Result<(), ModelError> {
        if a == b {
            return Err(ModelError::ReflexiveMutex(a.index()));
        }
        self.pairs.insert((a.min(b), a.max(b)));
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn related(&self, a: ActionId, b: ActionId) -> bool {
        self.pairs.contains(&(a.min(b), a.max(b)))
    }

    /// Each unordered pair once, smaller id first.
    pub fn pairs(&self) -> impl Iterator<Item = (ActionId, ActionId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn actions(&self) -> ActionSet {
        self.pairs.iter().fold(ActionSet::EMPTY, |s, &(a, b)| s.with(a).with(b))
    }

    /// First mutex pair contained in `set`, if any.
    pub fn violation(&self, set: ActionSet) -> Option<(ActionId, ActionId)> {
        self.pairs
            .iter()
            .copied()
            .find(|&(a, b)| set.contains(a) && set.contains(b))
    }

    pub fn admits(&self, set: ActionSet) -> bool {
        self.violation(set).is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: StateId,
    pub label: ActionSet,
    pub target: StateId,
}

/// An automaton whose transitions carry sets of simultaneous actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiActionAutomaton {
    alphabet: Alphabet,
    states: Vec<String>,
    initial: StateId,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

impl MultiActionAutomaton {
    pub fn builder(alphabet: Alphabet) -> AutomatonBuilder {
        AutomatonBuilder {
            alphabet,
            states: Vec::new(),
            index: HashMap::new(),
            initial: None,
            transitions: BTreeSet::new(),
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.0]
    }

    pub fn state(&self, name: &str) -> Result<StateId, ModelError> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(StateId)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    fn check(&self, q: StateId) -> Result<(), ModelError> {
        if q.0 < self.states.len() {
            Ok(())
        } else {
            Err(ModelError::UnknownState(format!("#{}", q.0)))
        }
    }

    /// Outgoing transitions of `q` in label order.
    pub fn outgoing(&self, q: StateId) -> Result<impl Iterator<Item = &Transition>, ModelError> {
        self.check(q)?;
        Ok(self.outgoing[q.0].iter().map(|&i| &self.transitions[i]))
    }

    /// `acts(q)`: the distinct labels leaving `q`.
    pub fn acts_of(&self, q: StateId) -> Result<BTreeSet<ActionSet>, ModelError> {
        Ok(self.outgoing(q)?.map(|t| t.label).collect())
    }

    /// `next(q)`: the (label, target) pairs leaving `q`.
    pub fn next_of(&self, q: StateId) -> Result<BTreeSet<(ActionSet, StateId)>, ModelError> {
        Ok(self.outgoing(q)?.map(|t| (t.label, t.target)).collect())
    }

    /// Transitions whose label contains both members of a mutex pair.
    pub fn validate_mutex(&self, mutex: &MutexRelation) -> Vec<Transition> {
        self.transitions
            .iter()
            .filter(|t| !mutex.admits(t.label))
            .copied()
            .collect()
    }
}

pub struct AutomatonBuilder {
    alphabet: Alphabet,
    states: Vec<String>,
    index: HashMap<String, StateId>,
    initial: Option<StateId>,
    transitions: BTreeSet<Transition>,
}

impl AutomatonBuilder {
    pub fn state(&mut self, name: &str) -> Result<StateId, ModelError> {
        if self.index.contains_key(name) {
            return Err(ModelError::DuplicateState(name.to_string()));
        }
        let id = StateId(self.states.len());
        self.states.push(name.to_string());
        self.index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Returns the id for `name`, declaring it if needed.
    pub fn state_or_insert(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        self.state(name).expect("fresh state name")
    }

    pub fn initial(&mut self, q: StateId) -> &mut Self {
        self.initial = Some(q);
        self
    }

    pub fn transition(&mut self, source: StateId, label: ActionSet, target: StateId) -> &mut Self {
        self.transitions.insert(Transition { source, label, target });
        self
    }

    pub fn build(self) -> Result<MultiActionAutomaton, ModelError> {
        let n = self.states.len();
        let initial = match self.initial {
            Some(q) if q.0 < n => q,
            Some(q) => return Err(ModelError::UnknownState(format!("#{}", q.0))),
            None if n > 0 => StateId(0),
            None => return Err(ModelError::NoStates),
        };
        let full = self.alphabet.full_set();
        let mut outgoing = vec![Vec::new(); n];
        let transitions: Vec<Transition> = self.transitions.into_iter().collect();
        for (i, t) in transitions.iter().enumerate() {
            if t.source.0 >= n {
                return Err(ModelError::UnknownState(format!("#{}", t.source.0)));
            }
            if t.target.0 >= n {
                return Err(ModelError::UnknownState(format!("#{}", t.target.0)));
            }
            if !t.label.is_subset(full) {
                return Err(ModelError::LabelOutsideAlphabet);
            }
            outgoing[t.source.0].push(i);
        }
        Ok(MultiActionAutomaton {
            alphabet: self.alphabet,
            states: self.states,
            initial,
            transitions,
            outgoing,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma(names: &[&str]) -> Alphabet {
        Alphabet::new(names.iter().copied()).unwrap()
    }

    #[test]
    fn acts_and_next_agree() {
        let al = sigma(&["f", "s", "w"]);
        let f = al.set(["f"]).unwrap();
        let fs = al.set(["f", "s"]).unwrap();
        let mut b = MultiActionAutomaton::builder(al);
        let q = b.state("q").unwrap();
        let r = b.state("r").unwrap();
        b.transition(q, f, r).transition(q, fs, q).transition(q, f, q);
        let aut = b.build().unwrap();
        assert_eq!(aut.acts_of(q).unwrap(), BTreeSet::from([f, fs]));
        assert!(aut.acts_of(r).unwrap().is_empty());
        let projected: BTreeSet<_> = aut.next_of(q).unwrap().into_iter().map(|(a, _)| a).collect();
        assert_eq!(projected, aut.acts_of(q).unwrap());
        assert_eq!(aut.next_of(q).unwrap().len(), 3);
    }

    #[test]
    fn parallel_transitions_are_kept() {
        let al = sigma(&["a"]);
        let a = al.set(["a"]).unwrap();
        let mut b = MultiActionAutomaton::builder(al);
        let q = b.state("q").unwrap();
        let q1 = b.state("q1").unwrap();
        let q2 = b.state("q2").unwrap();
        b.transition(q, a, q1).transition(q, a, q2);
        let aut = b.build().unwrap();
        assert_eq!(aut.next_of(q).unwrap(), BTreeSet::from([(a, q1), (a, q2)]));
    }

    #[test]
    fn total_deterministic_over_single_action() {
        let al = sigma(&["a"]);
        let full = al.full_set();
        let mut b = MultiActionAutomaton::builder(al);
        let q = b.state("q").unwrap();
        let r = b.state("r").unwrap();
        b.transition(q, ActionSet::EMPTY, q).transition(q, full, r);
        b.transition(r, ActionSet::EMPTY, r).transition(r, full, q);
        let aut = b.build().unwrap();
        for s in aut.states() {
            assert_eq!(aut.next_of(s).unwrap().len(), 2);
        }
    }

    #[test]
    fn self_loop_on_empty_label() {
        let al = sigma(&["a"]);
        let mut b = MultiActionAutomaton::builder(al);
        let q = b.state("q").unwrap();
        b.transition(q, ActionSet::EMPTY, q);
        let aut = b.build().unwrap();
        assert_eq!(aut.next_of(q).unwrap(), BTreeSet::from([(ActionSet::EMPTY, q)]));
    }

    #[test]
    fn unknown_state_is_a_lookup_error() {
        let mut b = MultiActionAutomaton::builder(sigma(&["a"]));
        b.state("q").unwrap();
        let aut = b.build().unwrap();
        assert!(matches!(aut.acts_of(StateId(3)), Err(ModelError::UnknownState(_))));
        assert!(aut.state("nope").is_err());
    }

    #[test]
    fn mutex_offences() {
        let al = sigma(&["openDoor", "closeDoor", "c"]);
        let open = al.id("openDoor").unwrap();
        let close = al.id("closeDoor").unwrap();
        let both = al.set(["openDoor", "closeDoor"]).unwrap();
        let mut b = MultiActionAutomaton::builder(al.clone());
        let q = b.state("q").unwrap();
        b.transition(q, both, q);
        b.transition(q, al.set(["openDoor", "c"]).unwrap(), q);
        let aut = b.build().unwrap();
        let mutex = MutexRelation::from_pairs([(open, close)]).unwrap();
        assert_eq!(aut.validate_mutex(&mutex).len(), 1);
        assert!(aut.validate_mutex(&MutexRelation::new()).is_empty());
    }

    #[test]
    fn mutex_free_labels_pass() {
        let al = sigma(&["a", "b", "c"]);
        let a = al.id("a").unwrap();
        let bb = al.id("b").unwrap();
        let mut b = MultiActionAutomaton::builder(al.clone());
        let q = b.state("q").unwrap();
        for l in [vec!["a"], vec!["b"], vec!["a", "c"]] {
            b.transition(q, al.set(l.iter().copied()).unwrap(), q);
        }
        let aut = b.build().unwrap();
        let mutex = MutexRelation::from_pairs([(a, bb)]).unwrap();
        assert!(aut.validate_mutex(&mutex).is_empty());
        assert!(mutex.related(bb, a));
        assert!(MutexRelation::from_pairs([(a, a)]).is_err());
    }

    #[test]
    fn alphabet_invariants() {
        assert!(matches!(
            Alphabet::new(Vec::<String>::new()),
            Err(ModelError::EmptyAlphabet)
        ));
        assert!(Alphabet::new(["a", "a"]).is_err());
        assert!(Alphabet::new([""]).is_err());
        let al = sigma(&["x", "y"]);
        let s = al.parse_set("{ y , x }").unwrap();
        assert_eq!(al.render(s), "{x,y}");
        assert_eq!(al.parse_set("{}").unwrap(), ActionSet::EMPTY);
    }

    #[test]
    fn literal_negation_is_an_involution() {
        let lit = ActionLiteral::pos(ActionId::new(2));
        assert_eq!(lit.negate().negate(), lit);
        assert_ne!(lit.negate(), lit);
    }

    #[test]
    fn subsets_enumerates_powerset() {
        let s = ActionSet::from_bits(0b1011);
        let subs: BTreeSet<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|x| x.is_subset(s)));
    }
}
