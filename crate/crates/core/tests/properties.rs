// SPDX-License-Identifier: Apache-2.0

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cva_core::conflicts::{conflict_closure, StrictnessSource};
use cva_core::oracle::{Bounds, Oracle};
use cva_core::satisfaction::{breach_incapable, find_violations, trace_of};
use cva_core::{sync_compose, ActionSet, Clause, Parallelism, Party, SyncSet};

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const SMALL: Gen = Gen {
    max_sigma: 3,
    max_states: 3,
    max_clauses: 3,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn action_set_laws(x in any::<u64>(), y in any::<u64>(), z in 0u64..1 << 10) {
        let (a, b) = (ActionSet::from_bits(x), ActionSet::from_bits(y));
        prop_assert_eq!(a.union(b), b.union(a));
        prop_assert_eq!(a.intersection(b), b.intersection(a));
        prop_assert_eq!(a.is_subset(b), a.union(b) == b);
        prop_assert!(a.difference(b).is_disjoint(b));
        prop_assert_eq!(a.difference(b).union(a.intersection(b)), a);
        prop_assert_eq!(a.iter().count(), a.len());
        prop_assert_eq!(a.is_empty(), a.iter().next().is_none());

        let c = ActionSet::from_bits(z);
        let subs: BTreeSet<ActionSet> = c.subsets().collect();
        prop_assert_eq!(subs.len(), 1usize << c.len());
        prop_assert!(subs.iter().all(|s| s.is_subset(c)));
    }

    #[test]
    fn clause_negation_and_rendering(n in 1usize..=4, k in any::<prop::sample::Index>()) {
        let al = alphabet(n);
        let universe = Clause::universe(n);
        let c = universe[k.index(universe.len())];
        prop_assert_eq!(c.negate().negate(), c);
        prop_assert_ne!(c.negate(), c);
        prop_assert_eq!(Clause::parse(&c.render(&al), &al, None).unwrap(), c);
        let names = ["alice".to_string(), "bob".to_string()];
        prop_assert_eq!(Clause::parse(&c.render_with(&al, Some(&names)), &al, Some(&names)).unwrap(), c);
    }

    #[test]
    fn composition_matches_reference(seed in any::<u64>()) {
        let raw = SMALL.system(&mut rng(seed));
        let al = alphabet(raw.n);
        let mutex = mutex_of(&raw.mutex);
        let sync = SyncSet::new(&al, ActionSet::from_bits(raw.sync), &mutex).unwrap();
        let p1 = build_party(&al, &raw.parties[0]);
        let p2 = build_party(&al, &raw.parties[1]);
        let composed = sync_compose(&p1, &p2, sync, &mutex).unwrap();

        let index = |name: &str| name[1..].parse::<usize>().unwrap();
        let state = |i: usize| {
            let s = composed.state(i);
            (index(p1.state_name(s.parties[0])), index(p2.state_name(s.parties[1])))
        };
        let (order, dead) = raw.party_product();
        let ours: Vec<_> = (0..composed.state_count()).map(state).collect();
        prop_assert_eq!(ours[0], (0, 0));
        prop_assert_eq!(ours.iter().collect::<BTreeSet<_>>(), order.iter().collect::<BTreeSet<_>>());
        prop_assert_eq!(ours.len(), order.len());
        let ours_dead: BTreeSet<_> = composed.deadlocks().into_iter().map(state).collect();
        prop_assert_eq!(ours_dead, dead.into_iter().collect::<BTreeSet<_>>());

        // Parent links give shortest traces.
        let mut depth = std::collections::BTreeMap::from([((0, 0), 0usize)]);
        for &(q1, q2) in &order {
            let d = depth[&(q1, q2)];
            for m in raw.party_moves(q1, q2) {
                depth.entry(m.targets).or_insert(d + 1);
            }
        }
        for (i, q) in ours.iter().enumerate() {
            prop_assert_eq!(composed.trace_to(i).len(), depth[q]);
        }

        for (i, &(q1, q2)) in ours.iter().enumerate() {
            let expected: BTreeSet<(u64, (usize, usize))> =
                raw.party_moves(q1, q2).into_iter().map(|m| (m.label, m.targets)).collect();
            let got: BTreeSet<(u64, (usize, usize))> =
                composed.outgoing(i).map(|t| (t.label.bits(), state(t.target))).collect();
            prop_assert_eq!(got, expected);
        }
        for t in composed.transitions() {
            prop_assert!(mutex.admits(t.label));
        }
    }

    #[test]
    fn conjoin_steps_componentwise(seed in any::<u64>(), labels in prop::collection::vec(any::<u64>(), 0..8)) {
        let mut r = rng(seed);
        let n = 3;
        let al = alphabet(n);
        let left = build_ca(&al, &random_ca(&mut r, n, 3, 2));
        let right = build_ca(&al, &random_ca(&mut r, n, 3, 2));
        let both = left.conjoin(&right).unwrap();

        let (mut q, mut s, mut c) = (left.initial(), right.initial(), both.initial());
        for bits in labels {
            let l = ActionSet::from_bits(bits & 0b111);
            q = left.step(q, l);
            s = right.step(s, l);
            c = both.step(c, l);
            let name = format!("({},{})", left.state_name(q), right.state_name(s));
            prop_assert_eq!(both.state_name(c), name.as_str());
            let union: BTreeSet<Clause> = left.clauses(q).union(right.clauses(s)).copied().collect();
            prop_assert_eq!(both.clauses(c), &union);
        }
    }

    #[test]
    fn parallel_and_sequential_agree(seed in any::<u64>()) {
        let raw = SMALL.well_formed(&mut rng(seed));
        let sys = build(&raw).unwrap();
        let par: BTreeSet<_> = library_violations(&sys, &find_violations(&sys, Parallelism::Parallel));
        let seq: BTreeSet<_> = library_violations(&sys, &find_violations(&sys, Parallelism::Sequential));
        prop_assert_eq!(par, seq);
    }

    #[test]
    fn breach_witness_is_a_shortest_violation(seed in any::<u64>()) {
        let raw = SMALL.well_formed(&mut rng(seed));
        let sys = build(&raw).unwrap();
        let all = find_violations(&sys, Parallelism::Sequential);
        for p in Party::BOTH {
            let mine: Vec<_> = all.iter().filter(|v| v.party == p).collect();
            match breach_incapable(&sys, p) {
                None => prop_assert!(mine.is_empty()),
                Some(w) => {
                    prop_assert!(mine.iter().any(|v| v.location == w.location));
                    prop_assert_eq!(&w.trace, &trace_of(&sys, w.location));
                    let shortest = mine.iter().map(|v| trace_of(&sys, v.location).len()).min().unwrap();
                    prop_assert_eq!(w.trace.len(), shortest);
                }
            }
            prop_assert_eq!(breach_incapable(&sys, p).is_none(), common::breach_incapable(&raw, p.index()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conflicts_are_symmetric_and_replayable(n in 1usize..=3, sync in 0u64..8, with_mutex in any::<bool>()) {
        let al = alphabet(n);
        let pairs = if with_mutex && n >= 2 { vec![(0, 1)] } else { vec![] };
        let mutex = mutex_of(&pairs);
        let sync = ActionSet::from_bits(sync & ((1 << n) - 1) & !mutex.actions().bits());
        let rel = conflict_closure(&al, sync, &mutex, StrictnessSource::Syntactic).unwrap();
        prop_assert!(!rel.is_empty());
        for (c1, c2) in rel.pairs() {
            prop_assert!(rel.conflicts(c2, c1).is_some());
            let d = rel.conflicts(c1, c2).unwrap();
            prop_assert_eq!(rel.replay(d), Some((c1, c2)));
        }
        for c in Clause::universe(n) {
            if c.is_permission() {
                prop_assert!(rel.conflicts(c, c.negate()).is_some());
            }
        }
    }

    #[test]
    fn oracle_counterexamples_verify(
        n in 1usize..=2,
        sync in 0u64..4,
        i in any::<prop::sample::Index>(),
        j in any::<prop::sample::Index>(),
    ) {
        let al = alphabet(n);
        let mutex = mutex_of(&[]);
        let sync = ActionSet::from_bits(sync & ((1 << n) - 1));
        let bounds = Bounds { max_context: 1, ..Bounds::default() };
        let oracle = Oracle::new(&al, sync, &mutex, bounds).unwrap();
        let universe = Clause::universe(n);
        let (c, d) = (universe[i.index(universe.len())], universe[j.index(universe.len())]);
        let cmp = oracle.compare(c, d, Parallelism::Parallel).unwrap();
        for cx in cmp.forward.iter().chain(cmp.backward.iter()).flatten() {
            prop_assert!(cx.verify(&oracle).unwrap(), "{:?}", cx);
        }
        if c == d {
            prop_assert!(cmp.holds_globally());
        }
        let seq = oracle.compare(c, d, Parallelism::Sequential).unwrap();
        prop_assert_eq!(seq, cmp);
    }
}
