// SPDX-License-Identifier: Apache-2.0

//! Strictness between clauses and between contract automata.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::automata::{ActionLiteral, ActionSet, Alphabet, MutexRelation};
use crate::contract::{minimal_labels, CaStateId, Clause, ContractAutomaton, Modality, Party};
use crate::error::OracleError;
use crate::oracle::{contexts, Bounds, ClauseSet, Counterexample, Oracle};
use crate::par::Parallelism;

/// State bijection between two contract automata with the same transition
/// structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoWitness {
    map: BTreeMap<CaStateId, CaStateId>,
}

impl IsoWitness {
    pub fn image(&self, q: CaStateId) -> CaStateId {
        self.map[&q]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (CaStateId, CaStateId)> + '_ {
        self.map.iter().map(|(&a, &b)| (a, b))
    }
}

/// Pairs states by simultaneous traversal from the initial states.
///
/// States unreachable in both automata are paired by name and traversed
/// from there. Contract labels are ignored.
pub fn structurally_isomorphic(a1: &ContractAutomaton, a2: &ContractAutomaton) -> Option<IsoWitness> {
    if a1.alphabet() != a2.alphabet() || a1.state_count() != a2.state_count() {
        return None;
    }
    type Map = HashMap<CaStateId, CaStateId>;
    fn bind(
        fwd: &mut Map,
        bwd: &mut Map,
        q: CaStateId,
        r: CaStateId,
        queue: &mut VecDeque<(CaStateId, CaStateId)>,
    ) -> bool {
        match (fwd.get(&q), bwd.get(&r)) {
            (None, None) => {
                fwd.insert(q, r);
                bwd.insert(r, q);
                queue.push_back((q, r));
                true
            }
            (Some(&x), Some(&y)) => x == r && y == q,
            _ => false,
        }
    }
    let mut fwd = Map::new();
    let mut bwd = Map::new();
    let mut roots = vec![(a1.initial(), a2.initial())];
    let mut queue = VecDeque::new();
    loop {
        for (q, r) in roots.drain(..) {
            if !bind(&mut fwd, &mut bwd, q, r, &mut queue) {
                return None;
            }
        }
        while let Some((q, r)) = queue.pop_front() {
            let atoms = a1
                .arms(q)
                .iter()
                .chain(a2.arms(r))
                .fold(ActionSet::EMPTY, |s, a| s.union(a.guard.atoms()));
            for label in minimal_labels(atoms) {
                if !bind(&mut fwd, &mut bwd, a1.step(q, label), a2.step(r, label), &mut queue) {
                    return None;
                }
            }
        }
        let left: Vec<CaStateId> = a1.states().filter(|q| !fwd.contains_key(q)).collect();
        if left.is_empty() {
            break;
        }
        let q = left[0];
        let r = a2.state(a1.state_name(q)).ok()?;
        if bwd.contains_key(&r) {
            return None;
        }
        roots.push((q, r));
    }
    Some(IsoWitness {
        map: fwd.into_iter().collect(),
    })
}

/// Whether `a2` is `a1` with zero or more occurrences of `c` replaced by
/// `c2`.
pub fn clause_replace_related(
    a1: &ContractAutomaton,
    a2: &ContractAutomaton,
    c: Clause,
    c2: Clause,
) -> Result<bool, OracleError> {
    let iso = structurally_isomorphic(a1, a2).ok_or(OracleError::NotIsomorphic)?;
    let related = iso.pairs().all(|(q, r)| {
        let before = a1.clauses(q);
        let after = a2.clauses(r);
        if before == after {
            return true;
        }
        if !before.contains(&c) {
            return false;
        }
        let mut swapped = before.clone();
        swapped.remove(&c);
        swapped.insert(c2);
        &swapped == after
    });
    Ok(related)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Reflexivity,
    /// `P_p(x) ⊑ O_p(x)`.
    ObligationOverPermission,
    /// `P_p(x) ⊑ O_p̄(x)` for synchronised actions.
    CrossPartySync,
    /// `O_p(!a) ⊑ O_p(b)` for `a ⋈ b`.
    MutexObligation,
    /// `P_p(!a) ⊑ P_p(b)` for `a ⋈ b`.
    MutexPermission,
    /// `O_p̄(!b) ⊑ O_p(a)` for `a ⋈ b`.
    MutexCrossObligation,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Reflexivity => "reflexivity",
            Rule::ObligationOverPermission => "obligation-over-permission",
            Rule::CrossPartySync => "cross-party-sync",
            Rule::MutexObligation => "mutex-obligation",
            Rule::MutexPermission => "mutex-permission",
            Rule::MutexCrossObligation => "mutex-cross-obligation",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub rule: Rule,
    pub from: Clause,
    pub to: Clause,
}

/// Chain of rule applications; consecutive steps compose by transitivity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn rules(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = self.steps.iter().map(|s| s.rule.name()).collect();
        if self.steps.len() > 1 {
            out.push("transitivity");
        }
        out
    }
}

/// One-step strengthenings of `c` under the syntactic rules.
pub fn syntactic_successors(c: Clause, sync: ActionSet, mutex: &MutexRelation) -> Vec<(Rule, Clause)> {
    let mut out = vec![];
    let x = c.literal;
    let a = x.action;
    match c.modality {
        Modality::Permission => {
            out.push((Rule::ObligationOverPermission, Clause::obligation(c.party, x)));
            if sync.contains(a) {
                out.push((Rule::CrossPartySync, Clause::obligation(c.party.other(), x)));
            }
            if !x.positive {
                for (l, r) in mutex.pairs() {
                    let b = if l == a {
                        r
                    } else if r == a {
                        l
                    } else {
                        continue;
                    };
                    out.push((
                        Rule::MutexPermission,
                        Clause::permission(c.party, ActionLiteral::pos(b)),
                    ));
                }
            }
        }
        Modality::Obligation => {
            if !x.positive {
                for (l, r) in mutex.pairs() {
                    let b = if l == a {
                        r
                    } else if r == a {
                        l
                    } else {
                        continue;
                    };
                    out.push((
                        Rule::MutexObligation,
                        Clause::obligation(c.party, ActionLiteral::pos(b)),
                    ));
                    out.push((
                        Rule::MutexCrossObligation,
                        Clause::obligation(c.party.other(), ActionLiteral::pos(b)),
                    ));
                }
            }
        }
    }
    out
}

/// Shortest chain of syntactic rules from `c` to `c2`. Absence is not a
/// disproof.
pub fn clause_stricter_syntactic(c: Clause, c2: Clause, sync: ActionSet, mutex: &MutexRelation) -> Option<Derivation> {
    if c == c2 {
        return Some(Derivation {
            steps: vec![Step {
                rule: Rule::Reflexivity,
                from: c,
                to: c2,
            }],
        });
    }
    let mut prev: HashMap<Clause, Step> = HashMap::new();
    let mut queue = VecDeque::from([c]);
    while let Some(x) = queue.pop_front() {
        for (rule, y) in syntactic_successors(x, sync, mutex) {
            if y == c || prev.contains_key(&y) {
                continue;
            }
            prev.insert(y, Step { rule, from: x, to: y });
            if y == c2 {
                let mut steps = vec![];
                let mut cur = y;
                while cur != c {
                    let s = prev[&cur];
                    steps.push(s);
                    cur = s.from;
                }
                steps.reverse();
                return Some(Derivation { steps });
            }
            queue.push_back(y);
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    StricterForParty1,
    StricterForParty2,
    StricterGlobal,
    Equivalent,
    Incomparable,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::StricterForParty1 => "stricter-for-party-1",
            Relation::StricterForParty2 => "stricter-for-party-2",
            Relation::StricterGlobal => "stricter-global",
            Relation::Equivalent => "equivalent",
            Relation::Incomparable => "incomparable",
        }
    }

    /// From per-party results for `x ⊑ y` and `y ⊑ x`.
    pub fn classify(holds: [bool; 2], converse: [bool; 2]) -> Relation {
        match holds {
            [true, true] if converse == [true, true] => Relation::Equivalent,
            [true, true] => Relation::StricterGlobal,
            [true, false] => Relation::StricterForParty1,
            [false, true] => Relation::StricterForParty2,
            [false, false] => Relation::Incomparable,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Syntactic,
    SemanticOracle,
    Monotonicity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    Derivation(Derivation),
    /// Per-party outcomes in both directions, with the first counterexample
    /// to the queried direction.
    Oracle {
        holds: [bool; 2],
        converse: [bool; 2],
        counterexample: Option<Counterexample>,
        /// The counterexample re-checked through full system construction.
        verified: bool,
    },
    /// Every state of the weaker automaton carries a subset of the clauses
    /// of its image.
    Subset,
    /// No derivation found. Not a disproof.
    NoDerivation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrictnessVerdict {
    pub relation: Relation,
    pub method: Method,
    pub bounds: Option<Bounds>,
    pub evidence: Evidence,
}

fn oracle_verdict(
    oracle: &Oracle,
    holds: [Option<Counterexample>; 2],
    converse: [Option<Counterexample>; 2],
) -> Result<StrictnessVerdict, OracleError> {
    let flags = |r: &[Option<Counterexample>; 2]| [r[0].is_none(), r[1].is_none()];
    let relation = Relation::classify(flags(&holds), flags(&converse));
    let counterexample = holds.iter().flatten().next().cloned();
    let verified = match &counterexample {
        Some(cx) => cx.verify(oracle)?,
        None => true,
    };
    Ok(StrictnessVerdict {
        relation,
        method: Method::SemanticOracle,
        bounds: Some(oracle.bounds()),
        evidence: Evidence::Oracle {
            holds: flags(&holds),
            converse: flags(&converse),
            counterexample,
            verified,
        },
    })
}

/// Decides `c ⊑ c2` by the syntactic rules alone.
pub fn clause_verdict_syntactic(c: Clause, c2: Clause, sync: ActionSet, mutex: &MutexRelation) -> StrictnessVerdict {
    let fwd = clause_stricter_syntactic(c, c2, sync, mutex);
    let bwd = clause_stricter_syntactic(c2, c, sync, mutex);
    let (relation, evidence) = match (fwd, bwd) {
        (Some(d), Some(_)) => (Relation::Equivalent, Evidence::Derivation(d)),
        (Some(d), None) => (Relation::StricterGlobal, Evidence::Derivation(d)),
        (None, _) => (Relation::Incomparable, Evidence::NoDerivation),
    };
    StrictnessVerdict {
        relation,
        method: Method::Syntactic,
        bounds: None,
        evidence,
    }
}

/// Decides `c ⊑ c2` exhaustively within `bounds`.
pub fn clause_stricter_semantic(
    c: Clause,
    c2: Clause,
    alphabet: &Alphabet,
    sync: ActionSet,
    mutex: &MutexRelation,
    bounds: Bounds,
    mode: Parallelism,
) -> Result<StrictnessVerdict, OracleError> {
    let oracle = Oracle::new(alphabet, sync, mutex, bounds)?;
    semantic_with(&oracle, c, c2, mode)
}

/// As [`clause_stricter_semantic`], reusing a prepared oracle.
pub fn semantic_with(
    oracle: &Oracle,
    c: Clause,
    c2: Clause,
    mode: Parallelism,
) -> Result<StrictnessVerdict, OracleError> {
    let cmp = oracle.compare(c, c2, mode)?;
    oracle_verdict(oracle, cmp.forward, cmp.backward)
}

/// Per-party semantic check of `c ⊑ c2` for one party only.
pub fn semantic_for_party(
    oracle: &Oracle,
    c: Clause,
    c2: Clause,
    p: Party,
    mode: Parallelism,
) -> Result<Option<Counterexample>, OracleError> {
    let pairs = contexts(oracle.alphabet().len(), c, c2, oracle.bounds().max_context);
    oracle.implication(&pairs, p, mode)
}

/// Whether `a2` is stricter than `a1`.
///
/// Requires isomorphic automata. Clause-subset labelling is accepted
/// directly; otherwise paired states are compared pointwise by the oracle.
/// With `party` set, only that party is decided and the other is reported
/// as not holding.
#[allow(clippy::too_many_arguments)]
pub fn ca_stricter(
    a1: &ContractAutomaton,
    a2: &ContractAutomaton,
    party: Option<Party>,
    sync: ActionSet,
    mutex: &MutexRelation,
    bounds: Bounds,
    mode: Parallelism,
) -> Result<StrictnessVerdict, OracleError> {
    let iso = structurally_isomorphic(a1, a2).ok_or(OracleError::NotIsomorphic)?;
    let subset = iso.pairs().all(|(q, r)| a1.clauses(q).is_subset(a2.clauses(r)));
    if subset {
        let equal = iso.pairs().all(|(q, r)| a1.clauses(q) == a2.clauses(r));
        return Ok(StrictnessVerdict {
            relation: if equal {
                Relation::Equivalent
            } else {
                Relation::StricterGlobal
            },
            method: Method::Monotonicity,
            bounds: None,
            evidence: Evidence::Subset,
        });
    }
    let oracle = Oracle::new(a1.alphabet(), sync, mutex, bounds)?;
    let fwd: Vec<(ClauseSet, ClauseSet)> = iso
        .pairs()
        .map(|(q, r)| (a1.clauses(q).clone(), a2.clauses(r).clone()))
        .collect();
    let bwd: Vec<(ClauseSet, ClauseSet)> = fwd.iter().map(|(x, y)| (y.clone(), x.clone())).collect();
    let parties: Vec<Party> = match party {
        Some(p) => vec![p],
        None => Party::BOTH.to_vec(),
    };
    let mut holds = [true, true];
    let mut converse = [true, true];
    let mut counterexample = None;
    for &p in &parties {
        let cx = oracle.implication(&fwd, p, mode)?;
        holds[p.index()] = cx.is_none();
        if counterexample.is_none() {
            counterexample = cx;
        }
        converse[p.index()] = oracle.implication(&bwd, p, mode)?.is_none();
    }
    let relation = match party {
        None => Relation::classify(holds, converse),
        Some(p) if holds[p.index()] && converse[p.index()] => Relation::Equivalent,
        Some(Party::One) if holds[0] => Relation::StricterForParty1,
        Some(Party::Two) if holds[1] => Relation::StricterForParty2,
        Some(_) => Relation::Incomparable,
    };
    let verified = match &counterexample {
        Some(cx) => cx.verify(&oracle)?,
        None => true,
    };
    Ok(StrictnessVerdict {
        relation,
        method: Method::SemanticOracle,
        bounds: Some(oracle.bounds()),
        evidence: Evidence::Oracle {
            holds,
            converse,
            counterexample,
            verified,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::Guard;

    fn al(names: &[&str]) -> Alphabet {
        Alphabet::new(names.iter().copied()).unwrap()
    }

    fn cl(al: &Alphabet, s: &str) -> Clause {
        Clause::parse(s, al, None).unwrap()
    }

    fn loop2(al: &Alphabet, go: &str, back: &str, c0: &[&str], c1: &[&str]) -> ContractAutomaton {
        let mut b = ContractAutomaton::builder(al.clone());
        let s0 = b.state("s0", c0.iter().map(|c| cl(al, c))).unwrap();
        let s1 = b.state("s1", c1.iter().map(|c| cl(al, c))).unwrap();
        b.arm(s0, Guard::contains(al.id(go).unwrap()), s1)
            .arm(s1, Guard::contains(al.id(back).unwrap()), s0);
        b.build().unwrap()
    }

    #[test]
    fn isomorphism_basics() {
        let a = al(&["login", "logout", "malicious", "cleared"]);
        let left = loop2(&a, "login", "logout", &[], &[]);
        let right = loop2(&a, "malicious", "cleared", &[], &[]);
        assert!(structurally_isomorphic(&left, &left).is_some());
        assert!(structurally_isomorphic(&left, &right).is_none());
        let more = loop2(&a, "login", "logout", &["P<1>(login)"], &[]);
        let w = structurally_isomorphic(&left, &more).unwrap();
        assert_eq!(w.image(left.initial()), more.initial());
    }

    #[test]
    fn replacement_relation() {
        let a = al(&["a", "b"]);
        let base = loop2(&a, "a", "b", &["P<1>(a)"], &[]);
        let swapped = loop2(&a, "a", "b", &["O<1>(a)"], &[]);
        let extra = loop2(&a, "a", "b", &["P<1>(a)"], &["O<2>(b)"]);
        let (c, c2) = (cl(&a, "P<1>(a)"), cl(&a, "O<1>(a)"));
        assert!(clause_replace_related(&base, &base, c, c2).unwrap());
        assert!(clause_replace_related(&base, &swapped, c, c2).unwrap());
        assert!(!clause_replace_related(&base, &extra, c, c2).unwrap());
    }

    #[test]
    fn syntactic_rules() {
        let a = al(&["a", "b"]);
        let mut m = MutexRelation::new();
        m.insert(a.id("a").unwrap(), a.id("b").unwrap()).unwrap();
        let none = ActionSet::EMPTY;
        let d = clause_stricter_syntactic(cl(&a, "P<1>(a)"), cl(&a, "O<1>(a)"), none, &m).unwrap();
        assert_eq!(d.rules(), vec!["obligation-over-permission"]);
        let g = a.set(["a"]).unwrap();
        assert!(clause_stricter_syntactic(cl(&a, "P<1>(a)"), cl(&a, "O<2>(a)"), g, &MutexRelation::new()).is_some());
        assert!(clause_stricter_syntactic(cl(&a, "P<2>(!b)"), cl(&a, "P<1>(a)"), none, &m).is_none());
        let chain = clause_stricter_syntactic(cl(&a, "P<1>(!a)"), cl(&a, "O<2>(b)"), none, &m).unwrap();
        assert_eq!(chain.steps.len(), 2);
        assert_eq!(chain.steps[0].from, cl(&a, "P<1>(!a)"));
        assert_eq!(chain.steps[1].to, cl(&a, "O<2>(b)"));
    }

    #[test]
    fn semantic_reflexive_is_equivalent() {
        let a = al(&["a"]);
        let c = cl(&a, "O<2>(!a)");
        let v = clause_stricter_semantic(
            c,
            c,
            &a,
            a.full_set(),
            &MutexRelation::new(),
            Bounds::default(),
            Parallelism::Sequential,
        )
        .unwrap();
        assert_eq!(v.relation, Relation::Equivalent);
    }

    #[test]
    fn semantic_permission_obligation_single_action() {
        let a = al(&["a"]);
        for g in [ActionSet::EMPTY, a.full_set()] {
            let v = clause_stricter_semantic(
                cl(&a, "P<1>(a)"),
                cl(&a, "O<1>(a)"),
                &a,
                g,
                &MutexRelation::new(),
                Bounds::default(),
                Parallelism::Parallel,
            )
            .unwrap();
            assert_eq!(v.relation, Relation::StricterGlobal);
        }
    }

    #[test]
    fn ca_monotonic_and_pointwise() {
        let a = al(&["a", "b"]);
        let base = loop2(&a, "a", "b", &["P<1>(a)"], &[]);
        let more = loop2(&a, "a", "b", &["P<1>(a)", "O<2>(b)"], &["O<1>(!b)"]);
        let swapped = loop2(&a, "a", "b", &["O<1>(a)"], &[]);
        let g = a.full_set();
        let m = MutexRelation::new();
        let b = Bounds::default();
        let mode = Parallelism::Sequential;
        let v = ca_stricter(&base, &more, None, g, &m, b, mode).unwrap();
        assert_eq!((v.relation, v.method), (Relation::StricterGlobal, Method::Monotonicity));
        let v = ca_stricter(&base, &base, None, g, &m, b, mode).unwrap();
        assert_eq!(v.relation, Relation::Equivalent);
        let v = ca_stricter(&base, &swapped, None, g, &m, b, mode).unwrap();
        assert_eq!(
            (v.relation, v.method),
            (Relation::StricterGlobal, Method::SemanticOracle)
        );
        let other = loop2(&a, "b", "a", &[], &[]);
        assert_eq!(
            ca_stricter(&base, &other, None, g, &m, b, mode),
            Err(OracleError::NotIsomorphic)
        );
    }
}
