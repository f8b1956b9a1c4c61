// SPDX-License-Identifier: Apache-2.0

//! Synchronous composition of two parties and the regulated system built on
//! top of it.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automata::{ActionSet, Alphabet, MultiActionAutomaton, MutexRelation, StateId};
use crate::contract::{CaStateId, ContractAutomaton, Party};
use crate::error::ModelError;

/// The synchronisation set `G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SyncSet {
    members: ActionSet,
    universe: ActionSet,
}

impl SyncSet {
    /// Rejects mutually exclusive actions in `members`.
    pub fn new(alphabet: &Alphabet, members: ActionSet, mutex: &MutexRelation) -> Result<Self, ModelError> {
        if let Some(a) = members.intersection(mutex.actions()).iter().next() {
            return Err(ModelError::MutexInSync(alphabet.name(a).to_string()));
        }
        Self::unchecked(alphabet, members)
    }

    /// Accepts mutex actions in `members`. Used by exploratory analyses only.
    pub fn unchecked(alphabet: &Alphabet, members: ActionSet) -> Result<Self, ModelError> {
        let universe = alphabet.full_set();
        if !members.is_subset(universe) {
            return Err(ModelError::LabelOutsideAlphabet);
        }
        Ok(SyncSet { members, universe })
    }

    pub fn members(self) -> ActionSet {
        self.members
    }

    /// `G^c = Σ \ G`.
    pub fn complement(self) -> ActionSet {
        self.universe.difference(self.members)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Participation {
    #[serde(rename = "party1-only")]
    Party1,
    #[serde(rename = "party2-only")]
    Party2,
    #[serde(rename = "both")]
    Both,
}

impl Participation {
    pub fn solo(p: Party) -> Self {
        match p {
            Party::One => Participation::Party1,
            Party::Two => Participation::Party2,
        }
    }

    /// Whether `p` moves alone.
    pub fn is_solo(self, p: Party) -> bool {
        self == Participation::solo(p)
    }

    pub fn swap(self) -> Self {
        match self {
            Participation::Party1 => Participation::Party2,
            Participation::Party2 => Participation::Party1,
            Participation::Both => Participation::Both,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Participation::Party1 => "party1-only",
            Participation::Party2 => "party2-only",
            Participation::Both => "both",
        }
    }
}

impl fmt::Display for Participation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComposedState {
    pub parties: [StateId; 2],
    pub contract: Option<CaStateId>,
}

impl ComposedState {
    pub fn party(&self, p: Party) -> StateId {
        self.parties[p.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComposedTransition {
    pub source: usize,
    pub label: ActionSet,
    pub target: usize,
    pub participation: Participation,
}

/// Reachable part of `S1 ∥_G S2`, optionally paired with a contract.
///
/// States are numbered in breadth-first discovery order, so state 0 is the
/// initial state and parent links give shortest traces.
#[derive(Clone, Debug)]
pub struct ComposedAutomaton {
    alphabet: Alphabet,
    states: Vec<ComposedState>,
    names: Vec<String>,
    transitions: Vec<ComposedTransition>,
    outgoing: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
}

impl ComposedAutomaton {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &ComposedState {
        &self.states[i]
    }

    pub fn states(&self) -> &[ComposedState] {
        &self.states
    }

    pub fn state_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn find_state(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn transitions(&self) -> &[ComposedTransition] {
        &self.transitions
    }

    pub fn outgoing(&self, i: usize) -> impl Iterator<Item = &ComposedTransition> {
        self.outgoing[i].iter().map(move |&t| &self.transitions[t])
    }

    pub fn outgoing_ids(&self, i: usize) -> &[usize] {
        &self.outgoing[i]
    }

    /// Distinct labels leaving a state.
    pub fn acts(&self, i: usize) -> BTreeSet<ActionSet> {
        self.outgoing(i).map(|t| t.label).collect()
    }

    /// Shortest label trace from the initial state.
    pub fn trace_to(&self, mut i: usize) -> Vec<ActionSet> {
        let mut out = vec![];
        while let Some(t) = self.parent[i] {
            let t = &self.transitions[t];
            out.push(t.label);
            i = t.source;
        }
        out.reverse();
        out
    }

    /// States without outgoing transitions.
    pub fn deadlocks(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&i| self.outgoing[i].is_empty())
            .collect()
    }

    /// The underlying multi-action automaton, dropping participation tags.
    pub fn to_automaton(&self) -> MultiActionAutomaton {
        let mut b = MultiActionAutomaton::builder(self.alphabet.clone());
        for n in &self.names {
            b.state_or_insert(n);
        }
        for t in &self.transitions {
            b.transition(StateId(t.source), t.label, StateId(t.target));
        }
        b.build().expect("composed automaton is well-formed")
    }
}

/// Party-level moves out of `(q1, q2)`, sorted and deduplicated.
fn party_moves(
    s: [&MultiActionAutomaton; 2],
    g: SyncSet,
    mutex: &MutexRelation,
    q: [StateId; 2],
) -> Vec<(ActionSet, Participation, [StateId; 2])> {
    let gm = g.members();
    let out1: Vec<_> = s[0].outgoing(q[0]).expect("reachable state").collect();
    let out2: Vec<_> = s[1].outgoing(q[1]).expect("reachable state").collect();
    let mut moves = BTreeSet::new();
    for t in &out1 {
        if t.label.is_disjoint(gm) {
            moves.insert((t.label, Participation::Party1, [t.target, q[1]]));
        }
    }
    for t in &out2 {
        if t.label.is_disjoint(gm) {
            moves.insert((t.label, Participation::Party2, [q[0], t.target]));
        }
    }
    for a in &out1 {
        let shared = a.label.intersection(gm);
        if shared.is_empty() {
            continue;
        }
        for b in &out2 {
            if b.label.intersection(gm) != shared {
                continue;
            }
            let label = a.label.union(b.label);
            // A joint label may not combine mutually exclusive actions.
            if mutex.admits(label) {
                moves.insert((label, Participation::Both, [a.target, b.target]));
            }
        }
    }
    moves.into_iter().collect()
}

fn explore(
    s: [&MultiActionAutomaton; 2],
    g: SyncSet,
    mutex: &MutexRelation,
    ca: Option<&ContractAutomaton>,
) -> Result<ComposedAutomaton, ModelError> {
    let alphabet = s[0].alphabet().clone();
    if *s[1].alphabet() != alphabet || ca.is_some_and(|c| *c.alphabet() != alphabet) {
        return Err(ModelError::AlphabetMismatch);
    }
    let start = ComposedState {
        parties: [s[0].initial(), s[1].initial()],
        contract: ca.map(|c| c.initial()),
    };
    let mut index: HashMap<ComposedState, usize> = HashMap::from([(start, 0)]);
    let mut states = vec![start];
    let mut parent = vec![None];
    let mut transitions = vec![];
    let mut outgoing = vec![];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let here = states[i];
        let mut out = vec![];
        for (label, participation, parties) in party_moves(s, g, mutex, here.parties) {
            let next = ComposedState {
                parties,
                contract: ca.zip(here.contract).map(|(c, q)| c.step(q, label)),
            };
            let target = match index.get(&next) {
                Some(&j) => j,
                None => {
                    let j = states.len();
                    index.insert(next, j);
                    states.push(next);
                    parent.push(Some(transitions.len()));
                    queue.push_back(j);
                    j
                }
            };
            out.push(transitions.len());
            transitions.push(ComposedTransition {
                source: i,
                label,
                target,
                participation,
            });
        }
        outgoing.push(out);
    }
    let names = states
        .iter()
        .map(|st| {
            let base = format!(
                "({},{})",
                s[0].state_name(st.parties[0]),
                s[1].state_name(st.parties[1])
            );
            match (ca, st.contract) {
                (Some(c), Some(q)) => format!("{base}_{{{}}}", c.state_name(q)),
                _ => base,
            }
        })
        .collect();
    Ok(ComposedAutomaton {
        alphabet,
        states,
        names,
        transitions,
        outgoing,
        parent,
    })
}

/// `S1 ∥_G S2`, restricted to states reachable from the initial pair.
pub fn sync_compose(
    s1: &MultiActionAutomaton,
    s2: &MultiActionAutomaton,
    g: SyncSet,
    mutex: &MutexRelation,
) -> Result<ComposedAutomaton, ModelError> {
    explore([s1, s2], g, mutex, None)
}

/// Reachable joint states with no outgoing transition.
pub fn check_well_formed(
    s1: &MultiActionAutomaton,
    s2: &MultiActionAutomaton,
    g: SyncSet,
    mutex: &MutexRelation,
) -> Result<Vec<[StateId; 2]>, ModelError> {
    let c = sync_compose(s1, s2, g, mutex)?;
    Ok(c.deadlocks().into_iter().map(|i| c.state(i).parties).collect())
}

/// A two-party system regulated by a contract automaton.
#[derive(Clone, Debug)]
pub struct RegulatedSystem {
    parties: [MultiActionAutomaton; 2],
    sync: SyncSet,
    mutex: MutexRelation,
    contract: ContractAutomaton,
    behaviour: ComposedAutomaton,
    menus: [Vec<Vec<ActionSet>>; 2],
}

/// `(S1 ∥_G S2) ∥_Σ CA`. Fails if the party composition can deadlock.
pub fn build_regulated_system(
    s1: MultiActionAutomaton,
    s2: MultiActionAutomaton,
    sync: SyncSet,
    mutex: MutexRelation,
    contract: ContractAutomaton,
) -> Result<RegulatedSystem, ModelError> {
    let plain = sync_compose(&s1, &s2, sync, &mutex)?;
    let dead = plain.deadlocks();
    if !dead.is_empty() {
        return Err(ModelError::NotWellFormed(
            dead.into_iter().map(|i| plain.state_name(i).to_string()).collect(),
        ));
    }
    let behaviour = explore([&s1, &s2], sync, &mutex, Some(&contract))?;
    let menu = |s: &MultiActionAutomaton| -> Vec<Vec<ActionSet>> {
        s.states()
            .map(|q| s.acts_of(q).expect("own state").into_iter().collect())
            .collect()
    };
    let menus = [menu(&s1), menu(&s2)];
    Ok(RegulatedSystem {
        parties: [s1, s2],
        sync,
        mutex,
        contract,
        behaviour,
        menus,
    })
}

impl RegulatedSystem {
    pub fn alphabet(&self) -> &Alphabet {
        self.behaviour.alphabet()
    }

    pub fn party(&self, p: Party) -> &MultiActionAutomaton {
        &self.parties[p.index()]
    }

    pub fn sync(&self) -> SyncSet {
        self.sync
    }

    pub fn mutex(&self) -> &MutexRelation {
        &self.mutex
    }

    pub fn contract(&self) -> &ContractAutomaton {
        &self.contract
    }

    pub fn behaviour(&self) -> &ComposedAutomaton {
        &self.behaviour
    }

    /// `acts(q_p)` at joint state `i`, in ascending label order.
    pub fn menu(&self, p: Party, i: usize) -> &[ActionSet] {
        let q = self.behaviour.state(i).party(p);
        &self.menus[p.index()][q.0]
    }

    pub fn contract_state(&self, i: usize) -> CaStateId {
        self.behaviour.state(i).contract.expect("regulated state")
    }
}
