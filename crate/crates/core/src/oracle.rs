// SPDX-License-Identifier: Apache-2.0

//! Bounded exhaustive comparison of clause sets.
//!
//! A configuration is a pair of party menus (the action sets each party
//! offers at its current state) together with a clause set in force. One
//! party is *fine* in a configuration when it is not blamed at the state nor
//! on any transition leaving it. Realizing both menus as one-state parties
//! with self-loops turns "fine" into breach-incapability, which is how
//! counterexamples are re-checked.
//!
//! Evaluation goes through two compressions. A party's behaviour in a menu
//! pair is summarised by a [`Profile`]: bitsets over every possible pair of
//! obliged/forbidden sets. A clause set is summarised, per party, by the
//! duty indices and the permissions it imposes. Both sides are deduplicated
//! before the cross product is scanned.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use serde::Serialize;

use crate::automata::{ActionLiteral, ActionSet, Alphabet, MultiActionAutomaton, MutexRelation};
use crate::composition::{build_regulated_system, Participation, RegulatedSystem, SyncSet};
use crate::contract::{Clause, ContractAutomaton, Duties, Party};
use crate::error::{ModelError, OracleError};
use crate::par::{self, Parallelism};
use crate::satisfaction;

/// Largest alphabet the bitset encoding supports.
pub const HARD_SIGMA_LIMIT: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Bounds {
    pub max_sigma: usize,
    pub max_menu: usize,
    pub max_context: usize,
    /// Admit mutually exclusive actions in the synchronisation set.
    pub allow_mutex_in_sync: bool,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_sigma: 3,
            max_menu: 4,
            max_context: 3,
            allow_mutex_in_sync: false,
        }
    }
}

pub type ClauseSet = BTreeSet<Clause>;

type Bits = [u64; 4];

const ALL: Bits = [u64::MAX; 4];
const NONE: Bits = [0; 4];

fn bit(b: &Bits, i: usize) -> bool {
    b[i >> 6] >> (i & 63) & 1 == 1
}

fn set_bit(b: &mut Bits, i: usize) {
    b[i >> 6] |= 1 << (i & 63);
}

fn or(a: Bits, b: Bits) -> Bits {
    [a[0] | b[0], a[1] | b[1], a[2] | b[2], a[3] | b[3]]
}

fn and(a: Bits, b: Bits) -> Bits {
    [a[0] & b[0], a[1] & b[1], a[2] & b[2], a[3] & b[3]]
}

fn literal_index(l: ActionLiteral) -> usize {
    2 * l.action.index() + usize::from(!l.positive)
}

/// What a menu pair offers one party, over every duty index
/// `O | F << n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Profile {
    /// Own duties met by every transition the party takes part in.
    trans: Bits,
    /// Other party's duties met by some extended offer.
    offer: Bits,
    /// Like `offer`, restricted to offers satisfying each literal.
    perm: Vec<Bits>,
}

/// A clause set seen from one party.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Sig {
    own: u16,
    other: u16,
    /// Literals the other party is permitted on synchronised actions.
    perms: u16,
}

impl Profile {
    fn fine(&self, s: Sig) -> bool {
        if !bit(&self.trans, s.own as usize) {
            return false;
        }
        if s.other != 0 && !bit(&self.offer, s.other as usize) {
            return false;
        }
        let mut perms = s.perms;
        while perms != 0 {
            let l = perms.trailing_zeros() as usize;
            if !bit(&self.perm[l], s.other as usize) {
                return false;
            }
            perms &= perms - 1;
        }
        true
    }
}

/// A configuration where one party is fine under `stricter` but not under
/// `weaker`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub party: Party,
    pub menus: [Vec<ActionSet>; 2],
    pub weaker: ClauseSet,
    pub stricter: ClauseSet,
}

impl Counterexample {
    /// Re-checks the counterexample through full system construction and
    /// [`satisfaction::breach_incapable`].
    pub fn verify(&self, oracle: &Oracle) -> Result<bool, ModelError> {
        let under_stricter = oracle.realize(&self.menus, &self.stricter)?;
        let under_weaker = oracle.realize(&self.menus, &self.weaker)?;
        Ok(satisfaction::breach_incapable(&under_stricter, self.party).is_none()
            && satisfaction::breach_incapable(&under_weaker, self.party).is_some())
    }

    /// The menus with parties renamed so that `p` is the blamed one.
    pub fn menus_for(&self, p: Party) -> (&[ActionSet], &[ActionSet]) {
        (&self.menus[p.index()], &self.menus[p.other().index()])
    }
}

/// Exhaustive evaluator over one alphabet, synchronisation set and mutex
/// relation.
pub struct Oracle {
    alphabet: Alphabet,
    sync: ActionSet,
    mutex: MutexRelation,
    bounds: Bounds,
    menus: Vec<Vec<ActionSet>>,
    /// Per party: distinct profiles with the first menu pair producing them.
    profiles: [Vec<(Profile, usize)>; 2],
    /// Per party and menu pair: index into `profiles`, or `NO_PROFILE` for
    /// deadlocked pairs.
    pair_profile: [Vec<u32>; 2],
}

const NO_PROFILE: u32 = u32::MAX;

impl Oracle {
    pub fn new(
        alphabet: &Alphabet,
        sync: ActionSet,
        mutex: &MutexRelation,
        bounds: Bounds,
    ) -> Result<Self, OracleError> {
        if bounds.max_sigma > HARD_SIGMA_LIMIT {
            return Err(OracleError::UnsupportedBound(bounds.max_sigma));
        }
        if alphabet.len() > bounds.max_sigma {
            return Err(OracleError::SigmaBound {
                size: alphabet.len(),
                bound: bounds.max_sigma,
            });
        }
        if bounds.allow_mutex_in_sync {
            SyncSet::unchecked(alphabet, sync)?;
        } else {
            SyncSet::new(alphabet, sync, mutex)?;
        }
        let n = alphabet.len();
        let local = alphabet.full_set().difference(sync);
        let labels: Vec<ActionSet> = alphabet
            .full_set()
            .subsets()
            .filter(|&l| mutex.admits(l))
            .sorted_by_key(|l| (l.len(), *l))
            .collect();
        let menus: Vec<Vec<ActionSet>> = (1..=bounds.max_menu.min(labels.len()))
            .flat_map(|k| labels.iter().copied().combinations(k))
            .collect();

        let width = 1usize << n;
        let viable_mask: Vec<Bits> = (0..width as u64)
            .map(|a| {
                let a = ActionSet::from_bits(a);
                let mut b = NONE;
                for idx in 0..width * width {
                    let o = ActionSet::from_bits((idx % width) as u64);
                    let f = ActionSet::from_bits((idx / width) as u64);
                    if (Duties {
                        obliged: o,
                        forbidden: f,
                    })
                    .viable(a)
                    {
                        set_bit(&mut b, idx);
                    }
                }
                b
            })
            .collect();
        let ext_mask: Vec<Bits> = (0..width as u64)
            .map(|a| {
                let a = ActionSet::from_bits(a);
                local
                    .subsets()
                    .map(|extra| a.union(extra))
                    .filter(|&u| mutex.admits(u))
                    .fold(NONE, |acc, u| or(acc, viable_mask[u.bits() as usize]))
            })
            .collect();

        let m = menus.len();
        let profile = |pair: usize, p: Party| -> Option<Profile> {
            let pm = [&menus[pair / m], &menus[pair % m]];
            let moves = joint_moves(pm, sync, mutex);
            if moves.is_empty() {
                return None;
            }
            let trans = moves
                .iter()
                .filter(|(_, part)| !part.is_solo(p.other()))
                .fold(ALL, |acc, (l, _)| and(acc, viable_mask[l.bits() as usize]));
            let own = pm[p.index()];
            let offer = own.iter().fold(NONE, |acc, a| or(acc, ext_mask[a.bits() as usize]));
            let perm = (0..2 * n)
                .map(|li| {
                    let lit = ActionLiteral {
                        action: crate::automata::ActionId::new(li / 2),
                        positive: li % 2 == 0,
                    };
                    own.iter()
                        .filter(|&&a| lit.holds_in(a))
                        .fold(NONE, |acc, a| or(acc, ext_mask[a.bits() as usize]))
                })
                .collect();
            Some(Profile { trans, offer, perm })
        };
        let mut pair_profile = [vec![NO_PROFILE; m * m], vec![NO_PROFILE; m * m]];
        let profiles = Party::BOTH.map(|p| {
            let mut index: HashMap<Profile, u32> = HashMap::new();
            let mut distinct = vec![];
            for (pair, slot) in pair_profile[p.index()].iter_mut().enumerate() {
                if let Some(pr) = profile(pair, p) {
                    let k = *index.entry(pr.clone()).or_insert_with(|| {
                        distinct.push((pr, pair));
                        distinct.len() as u32 - 1
                    });
                    *slot = k;
                }
            }
            distinct
        });

        Ok(Oracle {
            alphabet: alphabet.clone(),
            sync,
            mutex: mutex.clone(),
            bounds,
            menus,
            profiles,
            pair_profile,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn sync(&self) -> ActionSet {
        self.sync
    }

    pub fn mutex(&self) -> &MutexRelation {
        &self.mutex
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Number of candidate menus per party.
    pub fn menu_count(&self) -> usize {
        self.menus.len()
    }

    pub fn distinct_profiles(&self, p: Party) -> usize {
        self.profiles[p.index()].len()
    }

    fn sig(&self, clauses: &ClauseSet, p: Party) -> Sig {
        let n = self.alphabet.len();
        let idx = |d: Duties| (d.obliged.bits() | d.forbidden.bits() << n) as u16;
        let perms = clauses
            .iter()
            .filter(|c| c.is_permission() && c.party == p.other() && self.sync.contains(c.action()))
            .fold(0u16, |acc, c| acc | 1 << literal_index(c.literal));
        Sig {
            own: idx(Duties::of(clauses, p)),
            other: idx(Duties::of(clauses, p.other())),
            perms,
        }
    }

    fn check_clauses(&self, clauses: &ClauseSet) -> Result<(), OracleError> {
        if clauses.iter().any(|c| c.action().index() >= self.alphabet.len()) {
            return Err(ModelError::LabelOutsideAlphabet.into());
        }
        Ok(())
    }

    /// First configuration, over menu pairs then `pairs` order, where `p`
    /// is fine under the second set of a pair but not under the first.
    pub fn implication(
        &self,
        pairs: &[(ClauseSet, ClauseSet)],
        p: Party,
        mode: Parallelism,
    ) -> Result<Option<Counterexample>, OracleError> {
        for (w, s) in pairs {
            self.check_clauses(w)?;
            self.check_clauses(s)?;
        }
        let mut seen = HashMap::new();
        let sigs: Vec<(Sig, Sig, usize)> = pairs
            .iter()
            .enumerate()
            .filter_map(|(i, (w, s))| {
                let key = (self.sig(w, p), self.sig(s, p));
                (key.0 != key.1 && seen.insert(key, i).is_none()).then_some((key.0, key.1, i))
            })
            .collect();
        let profiles = &self.profiles[p.index()];
        let hit = par::find_first(mode, profiles.len(), |k| {
            let (prof, pair) = &profiles[k];
            sigs.iter()
                .find(|(w, s, _)| prof.fine(*s) && !prof.fine(*w))
                .map(|&(_, _, ctx)| (*pair, ctx))
        });
        Ok(hit.map(|(_, (pair, ctx))| {
            let m = self.menus.len();
            Counterexample {
                party: p,
                menus: [self.menus[pair / m].clone(), self.menus[pair % m].clone()],
                weaker: pairs[ctx].0.clone(),
                stricter: pairs[ctx].1.clone(),
            }
        }))
    }

    /// Whether `weaker ⊑ stricter` holds for each party, in both directions.
    pub fn compare(&self, weaker: Clause, stricter: Clause, mode: Parallelism) -> Result<Comparison, OracleError> {
        let fwd = contexts(self.alphabet.len(), weaker, stricter, self.bounds.max_context);
        let bwd = contexts(self.alphabet.len(), stricter, weaker, self.bounds.max_context);
        let mut forward = [None, None];
        let mut backward = [None, None];
        for p in Party::BOTH {
            forward[p.index()] = self.implication(&fwd, p, mode)?;
            backward[p.index()] = self.implication(&bwd, p, mode)?;
        }
        Ok(Comparison { forward, backward })
    }

    /// First menu pair, in enumeration order, under which both parties are
    /// fine with `clauses` in force.
    pub fn find_satisfying(&self, clauses: &ClauseSet) -> Result<Option<[Vec<ActionSet>; 2]>, OracleError> {
        self.check_clauses(clauses)?;
        let m = self.menus.len();
        let ok: [Vec<bool>; 2] = Party::BOTH.map(|p| {
            let sig = self.sig(clauses, p);
            self.profiles[p.index()].iter().map(|(pr, _)| pr.fine(sig)).collect()
        });
        let hit = (0..m * m).find(|&pair| {
            Party::BOTH.iter().all(|p| {
                let k = self.pair_profile[p.index()][pair];
                k != NO_PROFILE && ok[p.index()][k as usize]
            })
        });
        Ok(hit.map(|pair| [self.menus[pair / m].clone(), self.menus[pair % m].clone()]))
    }

    /// One-state parties looping on their menus, regulated by a one-state
    /// contract carrying `clauses`.
    pub fn realize(&self, menus: &[Vec<ActionSet>; 2], clauses: &ClauseSet) -> Result<RegulatedSystem, ModelError> {
        let party = |menu: &[ActionSet]| {
            let mut b = MultiActionAutomaton::builder(self.alphabet.clone());
            let q = b.state("q")?;
            for &l in menu {
                b.transition(q, l, q);
            }
            b.build()
        };
        let mut ca = ContractAutomaton::builder(self.alphabet.clone());
        ca.state("c", clauses.iter().copied())?;
        let sync = if self.bounds.allow_mutex_in_sync {
            SyncSet::unchecked(&self.alphabet, self.sync)?
        } else {
            SyncSet::new(&self.alphabet, self.sync, &self.mutex)?
        };
        build_regulated_system(
            party(&menus[0])?,
            party(&menus[1])?,
            sync,
            self.mutex.clone(),
            ca.build()?,
        )
    }
}

/// Outcome of comparing two clauses in both directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    /// Per party: a counterexample to `weaker ⊑ stricter`, if any.
    pub forward: [Option<Counterexample>; 2],
    /// Per party: a counterexample to `stricter ⊑ weaker`, if any.
    pub backward: [Option<Counterexample>; 2],
}

impl Comparison {
    pub fn holds(&self, p: Party) -> bool {
        self.forward[p.index()].is_none()
    }

    pub fn holds_globally(&self) -> bool {
        self.forward.iter().all(Option::is_none)
    }

    pub fn converse_holds(&self, p: Party) -> bool {
        self.backward[p.index()].is_none()
    }
}

/// Transitions of two one-state parties with the given menus.
fn joint_moves(menus: [&Vec<ActionSet>; 2], sync: ActionSet, mutex: &MutexRelation) -> Vec<(ActionSet, Participation)> {
    let mut out = vec![];
    for (p, menu) in menus.iter().enumerate() {
        for &a in menu.iter() {
            if a.is_disjoint(sync) {
                out.push((a, Participation::solo(Party::BOTH[p])));
            }
        }
    }
    for &a in menus[0].iter() {
        let shared = a.intersection(sync);
        if shared.is_empty() {
            continue;
        }
        for &b in menus[1].iter() {
            if b.intersection(sync) == shared && mutex.admits(a.union(b)) {
                out.push((a.union(b), Participation::Both));
            }
        }
    }
    out
}

/// Clause-set pairs `(K ∪ {c}, K ∪ {c'})` and `(K ∪ {c, c'}, K ∪ {c'})`
/// for every context `K` of at most `max_context` other clauses.
pub fn contexts(n: usize, c: Clause, c2: Clause, max_context: usize) -> Vec<(ClauseSet, ClauseSet)> {
    let pool: Vec<Clause> = Clause::universe(n).into_iter().filter(|&x| x != c && x != c2).collect();
    let mut out = vec![];
    for k in 0..=max_context.min(pool.len()) {
        for ctx in pool.iter().copied().combinations(k) {
            let base: ClauseSet = ctx.into_iter().collect();
            let mut w = base.clone();
            w.insert(c);
            let mut s = base.clone();
            s.insert(c2);
            let mut both = w.clone();
            both.insert(c2);
            out.push((w, s.clone()));
            out.push((both, s));
        }
    }
    out
}
