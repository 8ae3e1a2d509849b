#![allow(dead_code)]

use dts_core::envs::{make_random, SplitMix64};
use dts_core::{State, TransitionSystem};

/// Random strongly connected labeled system, initial state 0.
pub fn random_system(n: usize, m: usize, seed: u64) -> TransitionSystem {
    make_random(n, m, seed, false, false).unwrap()
}

/// Random table without any connectivity requirement, labeled `a`/`b`.
pub fn random_table(n: usize, m: usize, seed: u64) -> TransitionSystem {
    let mut rng = SplitMix64::new(seed);
    let delta: Vec<State> = (0..n * m).map(|_| rng.below(n)).collect();
    let labels: Vec<&str> = (0..n).map(|_| if rng.coin() { "b" } else { "a" }).collect();
    let names: Vec<String> = (0..m).map(|a| format!("a{a}")).collect();
    TransitionSystem::new(n, names, delta).unwrap().with_labels(&labels).unwrap().with_initial(0).unwrap()
}

pub fn random_permutation(n: usize, rng: &mut SplitMix64) -> Vec<State> {
    let mut perm: Vec<State> = (0..n).collect();
    rng.shuffle(&mut perm);
    perm
}

/// The same system with state `s` renamed to `perm[s]`.
pub fn permuted(sys: &TransitionSystem, perm: &[State]) -> TransitionSystem {
    let n = sys.n_states();
    let mut inv = vec![0; n];
    for (s, &p) in perm.iter().enumerate() {
        inv[p] = s;
    }
    let mut out = TransitionSystem::from_fn(n, sys.action_names().iter().cloned(), |p, a| perm[sys.step(inv[p], a)]).unwrap();
    if let Some(names) = sys.label_name_list() {
        let labels: Vec<&str> = (0..n).map(|p| names[inv[p]].as_str()).collect();
        out = out.with_labels(&labels).unwrap();
    }
    if let Some(x0) = sys.initial() {
        out = out.with_initial(perm[x0]).unwrap();
    }
    out
}

pub fn random_word(len: usize, m: usize, rng: &mut SplitMix64) -> Vec<usize> {
    (0..len).map(|_| rng.below(m)).collect()
}
