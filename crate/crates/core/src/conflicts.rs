// SPDX-License-Identifier: Apache-2.0

//! The conflict relation on clauses and conflict detection.
//!
//! Conflicts are seeded by opposite permissions and by obligations to
//! perform mutually exclusive actions, then closed under symmetry and under
//! strengthening either side. Every member keeps a shortest derivation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::automata::{ActionId, ActionLiteral, ActionSet, Alphabet, MutexRelation};
use crate::composition::RegulatedSystem;
use crate::contract::{Clause, ContractAutomaton, Party};
use crate::error::OracleError;
use crate::oracle::{Bounds, Oracle};
use crate::par::Parallelism;
use crate::strictness::{syntactic_successors, Rule};

/// Which strictness relation drives the closure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrictnessSource {
    Syntactic,
    Semantic { bounds: Bounds, mode: Parallelism },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Justification {
    Rule(Rule),
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConflictStep {
    /// `P_p(x) ⚔ !P_p(x)`.
    OppositePermissions(Clause, Clause),
    /// `O_p(a) ⚔ O_p(b)` for `a ⋈ b`.
    MutexObligations(Clause, Clause),
    Symmetry,
    /// Replaces the right-hand clause by a stricter one.
    Strengthen {
        to: Clause,
        by: Justification,
    },
}

impl ConflictStep {
    pub fn name(self) -> &'static str {
        match self {
            ConflictStep::OppositePermissions(..) => "opposite-permissions",
            ConflictStep::MutexObligations(..) => "mutex-obligations",
            ConflictStep::Symmetry => "symmetry",
            ConflictStep::Strengthen { .. } => "strictness",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictDerivation {
    pub steps: Vec<ConflictStep>,
}

impl ConflictDerivation {
    /// Step names, with the rule used by each strengthening.
    pub fn names(&self) -> Vec<String> {
        self.steps
            .iter()
            .map(|s| match s {
                ConflictStep::Strengthen {
                    by: Justification::Rule(r),
                    ..
                } => format!("strictness({})", r.name()),
                ConflictStep::Strengthen {
                    by: Justification::Oracle,
                    ..
                } => "strictness(oracle)".to_string(),
                s => s.name().to_string(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PreconditionError {
    #[error("the original clauses are not in conflict")]
    NotInConflict,
    #[error("the replacement clause is not stricter than the original")]
    NotStricter,
}

/// Symmetric conflict relation over every clause of one alphabet.
#[derive(Clone, Debug)]
pub struct ConflictRelation {
    n: usize,
    members: BTreeMap<(Clause, Clause), ConflictDerivation>,
    /// One-step strengthenings used by the closure.
    edges: HashMap<Clause, Vec<(Clause, Justification)>>,
    /// Reflexive-transitive closure of `edges`.
    le: BTreeSet<(Clause, Clause)>,
    sync: ActionSet,
    mutex: MutexRelation,
}

fn seeds(n: usize, mutex: &MutexRelation) -> Vec<((Clause, Clause), ConflictStep)> {
    let mut out = vec![];
    for p in Party::BOTH {
        for i in 0..n {
            let a = ActionId::new(i);
            for lit in [ActionLiteral::pos(a), ActionLiteral::neg(a)] {
                let perm = Clause::permission(p, lit);
                let opp = perm.negate();
                out.push(((perm, opp), ConflictStep::OppositePermissions(perm, opp)));
            }
        }
        for (a, b) in mutex.pairs() {
            let (x, y) = (
                Clause::obligation(p, ActionLiteral::pos(a)),
                Clause::obligation(p, ActionLiteral::pos(b)),
            );
            out.push(((x, y), ConflictStep::MutexObligations(x, y)));
        }
    }
    out
}

fn strictness_edges(
    alphabet: &Alphabet,
    sync: ActionSet,
    mutex: &MutexRelation,
    source: StrictnessSource,
) -> Result<HashMap<Clause, Vec<(Clause, Justification)>>, OracleError> {
    let universe = Clause::universe(alphabet.len());
    let mut edges: HashMap<Clause, Vec<(Clause, Justification)>> = HashMap::new();
    match source {
        StrictnessSource::Syntactic => {
            for &c in &universe {
                let succ = syntactic_successors(c, sync, mutex)
                    .into_iter()
                    .map(|(r, d)| (d, Justification::Rule(r)))
                    .collect();
                edges.insert(c, succ);
            }
        }
        StrictnessSource::Semantic { bounds, mode } => {
            let oracle = Oracle::new(alphabet, sync, mutex, bounds)?;
            for &c in &universe {
                let mut succ = vec![];
                for &d in &universe {
                    if c != d && oracle.compare(c, d, mode)?.holds_globally() {
                        succ.push((d, Justification::Oracle));
                    }
                }
                edges.insert(c, succ);
            }
        }
    }
    Ok(edges)
}

/// Least relation containing the seeds and closed under symmetry and
/// strengthening.
pub fn conflict_closure(
    alphabet: &Alphabet,
    sync: ActionSet,
    mutex: &MutexRelation,
    source: StrictnessSource,
) -> Result<ConflictRelation, OracleError> {
    let n = alphabet.len();
    let edges = strictness_edges(alphabet, sync, mutex, source)?;
    let mut members: BTreeMap<(Clause, Clause), ConflictDerivation> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for (pair, step) in seeds(n, mutex) {
        if let std::collections::btree_map::Entry::Vacant(e) = members.entry(pair) {
            e.insert(ConflictDerivation { steps: vec![step] });
            queue.push_back(pair);
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        let base = members[&(x, y)].steps.clone();
        let mut next = vec![((y, x), ConflictStep::Symmetry)];
        for &(z, by) in edges.get(&y).into_iter().flatten() {
            next.push(((x, z), ConflictStep::Strengthen { to: z, by }));
        }
        for (pair, step) in next {
            if members.contains_key(&pair) {
                continue;
            }
            let mut steps = base.clone();
            steps.push(step);
            members.insert(pair, ConflictDerivation { steps });
            queue.push_back(pair);
        }
    }
    let mut le = BTreeSet::new();
    for c in Clause::universe(n) {
        let mut seen = BTreeSet::from([c]);
        let mut stack = vec![c];
        while let Some(x) = stack.pop() {
            for &(y, _) in edges.get(&x).into_iter().flatten() {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        le.extend(seen.into_iter().map(|d| (c, d)));
    }
    Ok(ConflictRelation {
        n,
        members,
        edges,
        le,
        sync,
        mutex: mutex.clone(),
    })
}

impl ConflictRelation {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Ordered pairs; both orientations of each conflict are present.
    pub fn pairs(&self) -> impl Iterator<Item = (Clause, Clause)> + '_ {
        self.members.keys().copied()
    }

    pub fn conflicts(&self, c1: Clause, c2: Clause) -> Option<&ConflictDerivation> {
        self.members.get(&(c1, c2))
    }

    /// Whether `c ⊑ d` in the strictness relation that drove the closure.
    pub fn stricter(&self, c: Clause, d: Clause) -> bool {
        self.le.contains(&(c, d))
    }

    /// Direct strengthenings of `c`.
    pub fn strengthenings(&self, c: Clause) -> impl Iterator<Item = Clause> + '_ {
        self.edges.get(&c).into_iter().flatten().map(|&(d, _)| d)
    }

    /// Re-derives `(c1, c2)` from its recorded derivation, checking every
    /// step against the axioms. Returns the pair the derivation ends in.
    pub fn replay(&self, d: &ConflictDerivation) -> Option<(Clause, Clause)> {
        let mut steps = d.steps.iter();
        let mut pair = match steps.next()? {
            ConflictStep::OppositePermissions(x, y) => (x.is_permission() && *y == x.negate()).then_some((*x, *y))?,
            ConflictStep::MutexObligations(x, y) => {
                let ok = x.is_obligation()
                    && y.is_obligation()
                    && x.party == y.party
                    && x.literal.positive
                    && y.literal.positive
                    && self.mutex.related(x.action(), y.action());
                ok.then_some((*x, *y))?
            }
            _ => return None,
        };
        for s in steps {
            pair = match *s {
                ConflictStep::Symmetry => (pair.1, pair.0),
                ConflictStep::Strengthen { to, by } => {
                    let ok = match by {
                        Justification::Rule(r) => {
                            syntactic_successors(pair.1, self.sync, &self.mutex).contains(&(r, to))
                        }
                        Justification::Oracle => self.edges.get(&pair.1).is_some_and(|e| e.contains(&(to, by))),
                    };
                    if !ok {
                        return None;
                    }
                    (pair.0, to)
                }
                _ => return None,
            };
        }
        Some(pair)
    }

    /// Whether strengthening both sides of a conflict keeps it.
    pub fn strictness_preserves_conflict(
        &self,
        c1: Clause,
        c2: Clause,
        c1s: Clause,
        c2s: Clause,
    ) -> Result<bool, PreconditionError> {
        if self.conflicts(c1, c2).is_none() {
            return Err(PreconditionError::NotInConflict);
        }
        if !self.stricter(c1, c1s) || !self.stricter(c2, c2s) {
            return Err(PreconditionError::NotStricter);
        }
        Ok(self.conflicts(c1s, c2s).is_some())
    }

    pub fn alphabet_len(&self) -> usize {
        self.n
    }
}

/// A conflicting clause pair found in one state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictFinding {
    /// Contract state index, or joint state index for regulated systems.
    pub state: usize,
    pub state_name: String,
    pub pair: (Clause, Clause),
    pub derivation: ConflictDerivation,
    /// Shortest trace reaching the state, if it is reachable.
    pub trace: Option<Vec<ActionSet>>,
}

fn pairs_in<'a>(
    clauses: &'a BTreeSet<Clause>,
    rel: &'a ConflictRelation,
) -> impl Iterator<Item = ((Clause, Clause), ConflictDerivation)> + 'a {
    let cs: Vec<Clause> = clauses.iter().copied().collect();
    (0..cs.len()).flat_map(move |i| {
        let cs = cs.clone();
        (i + 1..cs.len()).filter_map(move |j| rel.conflicts(cs[i], cs[j]).map(|d| ((cs[i], cs[j]), d.clone())))
    })
}

/// Every state of a contract automaton, reachable or not.
pub fn conflicting_states_ca(ca: &ContractAutomaton, rel: &ConflictRelation) -> Vec<ConflictFinding> {
    let traces: HashMap<_, _> = ca.reachable().into_iter().collect();
    let mut out = vec![];
    for q in ca.states() {
        for (pair, derivation) in pairs_in(ca.clauses(q), rel) {
            out.push(ConflictFinding {
                state: q.0,
                state_name: ca.state_name(q).to_string(),
                pair,
                derivation,
                trace: traces.get(&q).cloned(),
            });
        }
    }
    out
}

/// Reachable states of a regulated system.
pub fn conflicting_states_system(sys: &RegulatedSystem, rel: &ConflictRelation) -> Vec<ConflictFinding> {
    let b = sys.behaviour();
    let mut out = vec![];
    for i in 0..b.state_count() {
        for (pair, derivation) in pairs_in(sys.contract().clauses(sys.contract_state(i)), rel) {
            out.push(ConflictFinding {
                state: i,
                state_name: b.state_name(i).to_string(),
                pair,
                derivation,
                trace: Some(b.trace_to(i)),
            });
        }
    }
    out
}
