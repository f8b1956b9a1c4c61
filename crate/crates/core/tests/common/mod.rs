// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

//! Reference implementations for the integration tests. Everything here
//! works on plain integers and bitmasks and shares no code with the
//! library beyond building its inputs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;

use cva_core::composition::ComposedTransition;
use cva_core::satisfaction::{Location, ViolationKind, ViolationReport};
use cva_core::{
    build_regulated_system, ActionId, ActionLiteral, ActionSet, Alphabet, Clause, ContractAutomaton, Guard,
    MultiActionAutomaton, MutexRelation, Participation, Party, RegulatedSystem, SyncSet,
};

pub const NAMES: [&str; 4] = ["a", "b", "c", "d"];

pub fn alphabet(n: usize) -> Alphabet {
    Alphabet::new(NAMES[..n].iter().copied()).unwrap()
}

#[derive(Clone, Debug)]
pub struct RawParty {
    /// State 0 is initial.
    pub states: usize,
    pub trans: Vec<(usize, u64, usize)>,
}

/// `require ⊆ A ∧ exclude ∩ A = ∅`.
#[derive(Clone, Copy, Debug)]
pub struct RawArm {
    pub require: u64,
    pub exclude: u64,
    pub target: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RawClause {
    pub obligation: bool,
    /// 0 or 1.
    pub party: usize,
    pub action: usize,
    pub positive: bool,
}

#[derive(Clone, Debug)]
pub struct RawCa {
    pub clauses: Vec<Vec<RawClause>>,
    pub arms: Vec<Vec<RawArm>>,
    pub fallback: Vec<Option<usize>>,
}

#[derive(Clone, Debug)]
pub struct RawSystem {
    pub n: usize,
    pub sync: u64,
    pub mutex: Vec<(usize, usize)>,
    pub parties: [RawParty; 2],
    pub ca: RawCa,
}

pub fn admits(mutex: &[(usize, usize)], set: u64) -> bool {
    mutex.iter().all(|&(a, b)| set & (1 << a) == 0 || set & (1 << b) == 0)
}

fn subsets(mask: u64) -> Vec<u64> {
    let mut out = vec![0];
    let mut s = mask;
    while s != 0 {
        out.push(s);
        s = (s - 1) & mask;
    }
    out
}

impl RawCa {
    pub fn step(&self, q: usize, label: u64) -> usize {
        for arm in &self.arms[q] {
            if label & arm.require == arm.require && label & arm.exclude == 0 {
                return arm.target;
            }
        }
        self.fallback[q].unwrap_or(q)
    }

    /// `(obliged, forbidden)` of `party` at `q`.
    pub fn duties(&self, q: usize, party: usize) -> (u64, u64) {
        let mut o = 0;
        let mut f = 0;
        for c in &self.clauses[q] {
            if c.obligation && c.party == party {
                if c.positive {
                    o |= 1 << c.action;
                } else {
                    f |= 1 << c.action;
                }
            }
        }
        (o, f)
    }
}

pub fn viable((o, f): (u64, u64), set: u64) -> bool {
    set & o == o && set & f == 0
}

/// 0: first party alone, 1: second party alone, 2: both.
pub type Who = u8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RawMove {
    pub label: u64,
    pub targets: (usize, usize),
    pub who: Who,
}

impl RawSystem {
    pub fn acts(&self, p: usize, q: usize) -> BTreeSet<u64> {
        self.parties[p].trans.iter().filter(|t| t.0 == q).map(|t| t.1).collect()
    }

    /// The three composition rules, applied literally.
    pub fn party_moves(&self, q1: usize, q2: usize) -> BTreeSet<RawMove> {
        let g = self.sync;
        let mut out = BTreeSet::new();
        for &(s, a, t) in &self.parties[0].trans {
            if s == q1 && a & g == 0 {
                out.insert(RawMove {
                    label: a,
                    targets: (t, q2),
                    who: 0,
                });
            }
        }
        for &(s, b, t) in &self.parties[1].trans {
            if s == q2 && b & g == 0 {
                out.insert(RawMove {
                    label: b,
                    targets: (q1, t),
                    who: 1,
                });
            }
        }
        for &(s1, a, t1) in &self.parties[0].trans {
            for &(s2, b, t2) in &self.parties[1].trans {
                if s1 == q1 && s2 == q2 && a & g == b & g && a & g != 0 && admits(&self.mutex, a | b) {
                    out.insert(RawMove {
                        label: a | b,
                        targets: (t1, t2),
                        who: 2,
                    });
                }
            }
        }
        out
    }

    /// Reachable joint party states and the deadlocked ones.
    pub fn party_product(&self) -> (Vec<Pair>, Vec<Pair>) {
        let mut seen = BTreeSet::from([(0, 0)]);
        let mut order = vec![(0, 0)];
        let mut queue = VecDeque::from([(0, 0)]);
        let mut dead = vec![];
        while let Some((q1, q2)) = queue.pop_front() {
            let moves = self.party_moves(q1, q2);
            if moves.is_empty() {
                dead.push((q1, q2));
            }
            for m in moves {
                if seen.insert(m.targets) {
                    order.push(m.targets);
                    queue.push_back(m.targets);
                }
            }
        }
        (order, dead)
    }

    pub fn well_formed(&self) -> bool {
        self.party_product().1.is_empty()
    }
}

pub type Pair = (usize, usize);

/// Joint state `(q1, q2, qA)`.
pub type Joint = (usize, usize, usize);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Blame {
    /// Party, state, and the permission it fails to enable.
    Permission(usize, Joint, RawClause),
    /// Party fails to offer a way to meet the other's obligations.
    Offer(usize, Joint),
    /// Party's own obligations broken by a transition.
    Transition(usize, Joint, u64, Joint, Who),
}

pub struct Brute {
    pub states: Vec<Joint>,
    pub trans: Vec<(Joint, u64, Joint, Who)>,
}

pub fn regulated(sys: &RawSystem) -> Brute {
    let mut seen = BTreeSet::from([(0, 0, 0)]);
    let mut states = vec![(0, 0, 0)];
    let mut queue = VecDeque::from([(0, 0, 0)]);
    let mut trans = BTreeSet::new();
    while let Some(s @ (q1, q2, qa)) = queue.pop_front() {
        for m in sys.party_moves(q1, q2) {
            let t = (m.targets.0, m.targets.1, sys.ca.step(qa, m.label));
            trans.insert((s, m.label, t, m.who));
            if seen.insert(t) {
                states.push(t);
                queue.push_back(t);
            }
        }
    }
    Brute {
        states,
        trans: trans.into_iter().collect(),
    }
}

/// `∃A ∈ menu, A' ⊆ G^c` with `lit(A)` and `A ∪ A'` viable for `duties`
/// and free of mutex pairs.
fn offers(sys: &RawSystem, menu: &BTreeSet<u64>, duties: (u64, u64), lit: impl Fn(u64) -> bool) -> bool {
    let local = ((1u64 << sys.n) - 1) & !sys.sync;
    menu.iter().any(|&a| {
        lit(a)
            && subsets(local)
                .into_iter()
                .any(|x| viable(duties, a | x) && admits(&sys.mutex, a | x))
    })
}

/// Every violation, evaluated straight from the definitions.
pub fn violations(sys: &RawSystem) -> BTreeSet<Blame> {
    let r = regulated(sys);
    let mut out = BTreeSet::new();
    for &s @ (q1, q2, qa) in &r.states {
        let locals = [q1, q2];
        for (p, &local) in locals.iter().enumerate() {
            let other = 1 - p;
            let menu = sys.acts(p, local);
            for &c in &sys.ca.clauses[qa] {
                if c.obligation || c.party != other || sys.sync & (1 << c.action) == 0 {
                    continue;
                }
                let bit = 1u64 << c.action;
                let holder = sys.ca.duties(qa, other);
                if !offers(sys, &menu, holder, |a| (a & bit != 0) == c.positive) {
                    out.insert(Blame::Permission(p, s, c));
                }
            }
            let theirs = sys.ca.duties(qa, other);
            if theirs != (0, 0) && !offers(sys, &menu, theirs, |_| true) {
                out.insert(Blame::Offer(p, s));
            }
        }
    }
    for &(s, label, t, who) in &r.trans {
        for p in 0..2 {
            let other_solo = who as usize == 1 - p;
            if !other_solo && !viable(sys.ca.duties(s.2, p), label) {
                out.insert(Blame::Transition(p, s, label, t, who));
            }
        }
    }
    out
}

pub fn breach_incapable(sys: &RawSystem, p: usize) -> bool {
    violations(sys).iter().all(|b| match b {
        Blame::Permission(x, ..) | Blame::Offer(x, ..) | Blame::Transition(x, ..) => *x != p,
    })
}

fn index(name: &str) -> usize {
    name[1..].parse().unwrap()
}

pub fn clause_of(c: RawClause) -> Clause {
    let party = if c.party == 0 { Party::One } else { Party::Two };
    let lit = ActionLiteral {
        action: ActionId::new(c.action),
        positive: c.positive,
    };
    if c.obligation {
        Clause::obligation(party, lit)
    } else {
        Clause::permission(party, lit)
    }
}

pub fn raw_clause(c: Clause) -> RawClause {
    RawClause {
        obligation: c.is_obligation(),
        party: c.party.index(),
        action: c.action().index(),
        positive: c.literal.positive,
    }
}

pub fn build_party(al: &Alphabet, p: &RawParty) -> MultiActionAutomaton {
    let mut b = MultiActionAutomaton::builder(al.clone());
    let ids: Vec<_> = (0..p.states).map(|i| b.state(&format!("s{i}")).unwrap()).collect();
    b.initial(ids[0]);
    for &(s, l, t) in &p.trans {
        b.transition(ids[s], ActionSet::from_bits(l), ids[t]);
    }
    b.build().unwrap()
}

pub fn build_ca(al: &Alphabet, ca: &RawCa) -> ContractAutomaton {
    let mut b = ContractAutomaton::builder(al.clone());
    let ids: Vec<_> = ca
        .clauses
        .iter()
        .enumerate()
        .map(|(i, cs)| b.state(&format!("c{i}"), cs.iter().map(|&c| clause_of(c))).unwrap())
        .collect();
    b.initial(ids[0]);
    for (q, arms) in ca.arms.iter().enumerate() {
        for arm in arms {
            let mut g = Guard::Const(true);
            for i in 0..al.len() {
                if arm.require >> i & 1 == 1 {
                    g = g.and(Guard::contains(ActionId::new(i)));
                }
                if arm.exclude >> i & 1 == 1 {
                    g = g.and(Guard::contains(ActionId::new(i)).not());
                }
            }
            b.arm(ids[q], g, ids[arm.target]);
        }
        if let Some(t) = ca.fallback[q] {
            b.else_arm(ids[q], ids[t]);
        }
    }
    b.build().unwrap()
}

pub fn mutex_of(pairs: &[(usize, usize)]) -> MutexRelation {
    MutexRelation::from_pairs(pairs.iter().map(|&(a, b)| (ActionId::new(a), ActionId::new(b)))).unwrap()
}

pub fn build(sys: &RawSystem) -> Result<RegulatedSystem, cva_core::ModelError> {
    let al = alphabet(sys.n);
    let mutex = mutex_of(&sys.mutex);
    let sync = SyncSet::new(&al, ActionSet::from_bits(sys.sync), &mutex)?;
    build_regulated_system(
        build_party(&al, &sys.parties[0]),
        build_party(&al, &sys.parties[1]),
        sync,
        mutex,
        build_ca(&al, &sys.ca),
    )
}

fn who_of(p: Participation) -> Who {
    match p {
        Participation::Party1 => 0,
        Participation::Party2 => 1,
        Participation::Both => 2,
    }
}

/// Library violations translated into reference terms.
pub fn library_violations(sys: &RegulatedSystem, reports: &[ViolationReport]) -> BTreeSet<Blame> {
    let b = sys.behaviour();
    let joint = |i: usize| -> Joint {
        let st = b.state(i);
        let ca = st.contract.expect("regulated state");
        (
            index(sys.party(Party::One).state_name(st.parties[0])),
            index(sys.party(Party::Two).state_name(st.parties[1])),
            index(sys.contract().state_name(ca)),
        )
    };
    reports
        .iter()
        .map(|r| {
            let p = r.party.index();
            match (r.location, &r.kind) {
                (Location::State(i), ViolationKind::Permission(c)) => Blame::Permission(p, joint(i), raw_clause(*c)),
                (Location::State(i), _) => Blame::Offer(p, joint(i)),
                (Location::Transition(t), _) => {
                    let tr: &ComposedTransition = &b.transitions()[t];
                    Blame::Transition(
                        p,
                        joint(tr.source),
                        tr.label.bits(),
                        joint(tr.target),
                        who_of(tr.participation),
                    )
                }
            }
        })
        .collect()
}

/// Library joint states translated into reference terms.
pub fn library_states(sys: &RegulatedSystem) -> BTreeSet<Joint> {
    let b = sys.behaviour();
    (0..b.state_count())
        .map(|i| {
            let st = b.state(i);
            (
                index(sys.party(Party::One).state_name(st.parties[0])),
                index(sys.party(Party::Two).state_name(st.parties[1])),
                index(sys.contract().state_name(st.contract.unwrap())),
            )
        })
        .collect()
}

pub struct Gen {
    pub max_sigma: usize,
    pub max_states: usize,
    pub max_clauses: usize,
}

fn random_label<R: Rng>(rng: &mut R, n: usize, mutex: &[(usize, usize)]) -> u64 {
    loop {
        let l = rng.gen_range(0..1u64 << n);
        if admits(mutex, l) {
            return l;
        }
    }
}

fn random_party<R: Rng>(rng: &mut R, n: usize, states: usize, mutex: &[(usize, usize)]) -> RawParty {
    let mut trans = BTreeSet::new();
    for s in 0..states {
        if rng.gen_bool(0.5) {
            trans.insert((s, 0, s));
        }
        for _ in 0..rng.gen_range(0..=3) {
            trans.insert((s, random_label(rng, n, mutex), rng.gen_range(0..states)));
        }
    }
    RawParty {
        states,
        trans: trans.into_iter().collect(),
    }
}

pub fn random_clause<R: Rng>(rng: &mut R, n: usize) -> RawClause {
    RawClause {
        obligation: rng.gen_bool(0.5),
        party: rng.gen_range(0..2),
        action: rng.gen_range(0..n),
        positive: rng.gen_bool(0.5),
    }
}

pub fn random_ca<R: Rng>(rng: &mut R, n: usize, states: usize, max_clauses: usize) -> RawCa {
    let mut clauses = vec![];
    let mut arms = vec![];
    let mut fallback = vec![];
    for _ in 0..states {
        let cs: BTreeSet<RawClause> = (0..rng.gen_range(0..=max_clauses))
            .map(|_| random_clause(rng, n))
            .collect();
        clauses.push(cs.into_iter().collect());
        let a: Vec<RawArm> = (0..rng.gen_range(0..=2))
            .map(|_| {
                let require = rng.gen_range(0..1u64 << n);
                RawArm {
                    require,
                    exclude: rng.gen_range(0..1u64 << n) & !require,
                    target: rng.gen_range(0..states),
                }
            })
            .collect();
        arms.push(a);
        fallback.push(rng.gen_bool(0.3).then(|| rng.gen_range(0..states)));
    }
    RawCa {
        clauses,
        arms,
        fallback,
    }
}

impl Gen {
    pub fn system<R: Rng>(&self, rng: &mut R) -> RawSystem {
        let n = rng.gen_range(1..=self.max_sigma);
        let sync = rng.gen_range(0..1u64 << n);
        let outside: Vec<usize> = (0..n).filter(|a| sync >> a & 1 == 0).collect();
        let mutex = if outside.len() >= 2 && rng.gen_bool(0.4) {
            vec![(outside[0], outside[1])]
        } else {
            vec![]
        };
        let parties = [0, 1].map(|_| {
            let k = rng.gen_range(1..=self.max_states);
            random_party(rng, n, k, &mutex)
        });
        let k = rng.gen_range(1..=self.max_states);
        let ca = random_ca(rng, n, k, self.max_clauses);
        RawSystem {
            n,
            sync,
            mutex,
            parties,
            ca,
        }
    }

    pub fn well_formed<R: Rng>(&self, rng: &mut R) -> RawSystem {
        loop {
            let s = self.system(rng);
            if s.well_formed() {
                return s;
            }
        }
    }
}

/// Groups violations per party for readable assertion output.
pub fn by_party(v: &BTreeSet<Blame>) -> BTreeMap<usize, usize> {
    let mut m = BTreeMap::new();
    for b in v {
        let p = match b {
            Blame::Permission(p, ..) | Blame::Offer(p, ..) | Blame::Transition(p, ..) => *p,
        };
        *m.entry(p).or_insert(0) += 1;
    }
    m
}
