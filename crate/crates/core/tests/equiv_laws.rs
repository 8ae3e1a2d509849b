mod common;

use common::{random_system, random_table, random_word};
use dts_core::envs::{make_random, random_cover, random_partition, SplitMix64};
use dts_core::equiv::{
    generated_closure, is_sufficient, kernel, msr, msr_bruteforce, partition_from_labels, pointed_classes, pullback,
    pushforward, quotient, sufficient_refinements,
};
use dts_core::system::{are_isomorphic, is_homomorphism};
use dts_core::{Partition, StateMap, TransitionSystem};
use proptest::prelude::*;

/// A random cover of a random base, with its projection.
fn epimorphism(n: usize, m: usize, seed: u64) -> (TransitionSystem, TransitionSystem, StateMap, SplitMix64) {
    let base = random_system(n, m, seed);
    let mut rng = SplitMix64::new(seed ^ 0xc0de);
    let (cover, h) = random_cover(&base, 3, &mut rng).unwrap();
    (cover, base, h, rng)
}

fn join(n: usize, parts: &[&Partition]) -> Partition {
    Partition::join(n, parts).unwrap()
}

fn refines(fine: &Partition, coarse: &Partition) -> bool {
    fine.refines(coarse).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn msr_matches_the_exhaustive_oracle(n in 1usize..7, m in 1usize..4, seed in any::<u64>()) {
        let sys = random_table(n, m, seed);
        let mut rng = SplitMix64::new(!seed);
        let e = random_partition(n, &mut rng);
        let fast = msr(&sys, &e).unwrap();
        prop_assert_eq!(&fast, &msr_bruteforce(&sys, &e).unwrap());
        prop_assert!(is_sufficient(&sys, &fast).unwrap());
        prop_assert!(refines(&fast, &e));
        for r in sufficient_refinements(&sys, &e).unwrap() {
            prop_assert!(refines(&r, &fast));
        }
    }

    #[test]
    fn msr_is_idempotent_and_monotone(n in 1usize..9, m in 1usize..4, seed in any::<u64>()) {
        let sys = random_table(n, m, seed);
        let mut rng = SplitMix64::new(seed.wrapping_mul(3));
        let e = random_partition(n, &mut rng);
        let f = e.meet(&random_partition(n, &mut rng)).unwrap();
        let me = msr(&sys, &e).unwrap();
        prop_assert_eq!(msr(&sys, &me).unwrap(), me.clone());
        prop_assert!(refines(&msr(&sys, &f).unwrap(), &me));
    }

    #[test]
    fn sufficiency_propagates_along_words(n in 1usize..9, m in 1usize..4, seed in any::<u64>()) {
        let sys = random_table(n, m, seed);
        let mut rng = SplitMix64::new(seed ^ 5);
        let e = msr(&sys, &random_partition(n, &mut rng)).unwrap();
        let word = random_word(rng.below(10), m, &mut rng);
        for s in 0..n {
            for t in 0..n {
                if e.same_block(s, t) {
                    prop_assert!(e.same_block(sys.star(s, &word).unwrap(), sys.star(t, &word).unwrap()));
                }
            }
        }
    }

    #[test]
    fn closure_of_sufficient_relations_is_sufficient(n in 1usize..9, m in 1usize..4, seed in any::<u64>()) {
        let sys = random_table(n, m, seed);
        let mut rng = SplitMix64::new(seed ^ 9);
        let e1 = msr(&sys, &random_partition(n, &mut rng)).unwrap();
        let e2 = msr(&sys, &random_partition(n, &mut rng)).unwrap();
        let mut pairs = Vec::new();
        for s in 0..n {
            for t in 0..n {
                if e1.same_block(s, t) || e2.same_block(s, t) {
                    pairs.push((s, t));
                }
            }
        }
        let closure = generated_closure(n, &pairs).unwrap();
        prop_assert_eq!(&closure, &join(n, &[&e1, &e2]));
        prop_assert!(is_sufficient(&sys, &closure).unwrap());
    }

    #[test]
    fn commute_and_epimorph_pull(n in 1usize..7, m in 1usize..4, seed in any::<u64>()) {
        let (src, dst, h, mut rng) = epimorphism(n, m, seed);
        prop_assert!(is_homomorphism(&h, &src, &dst).unwrap());
        let e1 = random_partition(dst.n_states(), &mut rng);
        let lhs = msr(&src, &pullback(&h, &e1).unwrap()).unwrap();
        let rhs_dst = msr(&dst, &e1).unwrap();
        prop_assert_eq!(&lhs, &pullback(&h, &rhs_dst).unwrap());
        let (q_src, _) = quotient(&src.clone().without_labels(), &lhs).unwrap();
        let (q_dst, _) = quotient(&dst.clone().without_labels(), &rhs_dst).unwrap();
        prop_assert!(are_isomorphic(&q_src, &q_dst, true).unwrap().is_some());
    }

    #[test]
    fn pointed_min_dist_systems_are_chiral(n in 1usize..9, m in 1usize..4, seed in any::<u64>()) {
        let sys = make_random(n, m, seed, true, true).unwrap();
        prop_assert!(sys.is_minimally_distinguishing());
        prop_assert!(msr(&sys, &partition_from_labels(&sys).unwrap()).unwrap().is_identity());
        // any partition with a singleton block works too
        let mut rng = SplitMix64::new(seed);
        let lone = rng.below(n);
        let keys: Vec<usize> = (0..n).map(|s| if s == lone { usize::MAX } else { rng.below(3) }).collect();
        let e = Partition::from_keys(&keys);
        prop_assert!(!pointed_classes(&e).is_empty());
        prop_assert!(msr(&sys, &e).unwrap().is_identity());
    }

    #[test]
    fn quotient_map_is_an_epimorphism(n in 1usize..9, m in 1usize..4, seed in any::<u64>()) {
        let sys = random_table(n, m, seed);
        let e = msr(&sys, &partition_from_labels(&sys).unwrap()).unwrap();
        let (q, map) = quotient(&sys, &e).unwrap();
        prop_assert_eq!(q.n_states(), e.n_blocks());
        prop_assert!(map.is_surjective());
        prop_assert!(is_homomorphism(&map, &sys, &q).unwrap());
        prop_assert_eq!(&kernel(&map), &e);
        for s in 0..n {
            prop_assert_eq!(q.label_name(map.apply(s)), sys.label_name(s));
        }
        prop_assert_eq!(q.initial(), Some(map.apply(0)));
    }
}

// Refinement, closure and image facts for an epimorphism h: src -> dst.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn union_lemma(n in 1usize..6, m in 1usize..4, seed in any::<u64>(), k in 1usize..4) {
        let (src, dst, h, mut rng) = epimorphism(n, m, seed);
        let n0 = src.n_states();
        let kh = kernel(&h);
        let es: Vec<Partition> = (0..k).map(|_| random_partition(n0, &mut rng)).collect();
        let refs: Vec<&Partition> = es.iter().collect();
        let closure = join(n0, &refs);

        // (1) every member refines the closure
        for e in &es {
            prop_assert!(refines(e, &closure));
        }
        // (2) closure of sufficient relations is sufficient
        let suff: Vec<Partition> = es.iter().map(|e| msr(&src, e).unwrap()).collect();
        prop_assert!(is_sufficient(&src, &join(n0, &suff.iter().collect::<Vec<_>>())).unwrap());
        // (3) members refining E give a closure refining E
        let big = random_partition(n0, &mut rng);
        let below: Vec<Partition> = es.iter().map(|e| e.meet(&big).unwrap()).collect();
        prop_assert!(refines(&join(n0, &below.iter().collect::<Vec<_>>()), &big));
        // (4) E refining every member refines the closure
        let mut small = random_partition(n0, &mut rng);
        for e in &es {
            small = small.meet(e).unwrap();
        }
        prop_assert!(refines(&small, &closure));
        // (5) h-closed members give an h-closed closure
        let closed: Vec<Partition> = es.iter().map(|e| join(n0, &[e, &kh])).collect();
        prop_assert!(refines(&kh, &join(n0, &closed.iter().collect::<Vec<_>>())));
        // (6) the kernel of h refines every pullback
        let e1 = random_partition(dst.n_states(), &mut rng);
        let pulled = pullback(&h, &e1).unwrap();
        prop_assert!(refines(&kh, &pulled));
        // (7) images of h-closed relations are equivalence relations, and
        // relate exactly the images of related pairs
        let e = &closed[0];
        let image = pushforward(&h, e).unwrap();
        for s in 0..n0 {
            for t in 0..n0 {
                prop_assert_eq!(image.same_block(h.apply(s), h.apply(t)), e.same_block(s, t));
            }
        }
        // (8) an h-closed E inside the pullback of E1 maps into E1
        let inside = join(n0, &[&kh, &big.meet(&pulled).unwrap()]);
        prop_assert!(refines(&inside, &pulled));
        prop_assert!(refines(&pushforward(&h, &inside).unwrap(), &e1));
        // (9) h-closed sufficient relations push forward to sufficient ones
        let closed_suff = join(n0, &[&kh, &suff[0]]);
        prop_assert!(is_sufficient(&src, &closed_suff).unwrap());
        prop_assert!(is_sufficient(&dst, &pushforward(&h, &closed_suff).unwrap()).unwrap());
        // (10) sufficient relations pull back to sufficient ones
        let e1_suff = msr(&dst, &e1).unwrap();
        prop_assert!(is_sufficient(&src, &pullback(&h, &e1_suff).unwrap()).unwrap());
        // (11) the kernel of a homomorphism is sufficient
        prop_assert!(is_sufficient(&src, &kh).unwrap());
    }

    #[test]
    fn pushforward_rejects_relations_that_are_not_closed(n in 2usize..6, seed in any::<u64>()) {
        let (_, _, h, mut rng) = epimorphism(n, 1, seed);
        let e = random_partition(h.source_size(), &mut rng);
        let closed = refines(&kernel(&h), &e);
        prop_assert_eq!(pushforward(&h, &e).is_ok(), closed);
    }
}
