//! Coupling of an environment with an exploratory internal system, surprise
//! detection, the induced internal labeling and bisimulation.
//!
//! Internal systems here are exploratory: their transitions read the action
//! only, never the sensor value. The coupled dynamics are therefore
//! `g(x, i, u) = (f(x, u), φ(i, u))`, restricted to the pairs reachable from
//! the initial pair.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::equiv::{msr, partition_from_labels};
use crate::{Action, Error, Label, Result, State, TransitionSystem};

/// The reachable part of `env ⋆ internal`, in BFS order from `(x0, i0)`.
#[derive(Debug, Clone)]
pub struct ProductSystem<'a> {
    env: &'a TransitionSystem,
    internal: &'a TransitionSystem,
    pairs: Vec<(State, State)>,
    pair_delta: Vec<usize>,
    parent: Vec<Option<(usize, Action)>>,
}

impl<'a> ProductSystem<'a> {
    pub fn env(&self) -> &'a TransitionSystem {
        self.env
    }

    pub fn internal(&self) -> &'a TransitionSystem {
        self.internal
    }

    /// Reachable `(x, i)` pairs; index 0 is the initial pair.
    pub fn pairs(&self) -> &[(State, State)] {
        &self.pairs
    }

    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    #[inline]
    pub fn step(&self, pair: usize, a: Action) -> usize {
        self.pair_delta[pair * self.env.n_actions() + a]
    }

    /// The shortlex-smallest action sequence reaching `pair`.
    pub fn access_sequence(&self, mut pair: usize) -> Vec<Action> {
        let mut seq = Vec::new();
        while let Some((p, a)) = self.parent[pair] {
            seq.push(a);
            pair = p;
        }
        seq.reverse();
        seq
    }

    /// The coupled system as a plain transition system on pair indices,
    /// labeled by the environment's sensor.
    pub fn to_system(&self) -> Result<TransitionSystem> {
        let names: Vec<&str> = self.pairs.iter().map(|&(x, _)| self.env.label_name(x).unwrap_or_default()).collect();
        TransitionSystem::new(self.pairs.len(), self.env.action_names().iter().cloned(), self.pair_delta.clone())?
            .with_labels(&names)?
            .with_initial(0)
    }
}

/// Builds the reachable coupled system from `(x0, i0)`.
pub fn couple<'a>(
    env: &'a TransitionSystem,
    internal: &'a TransitionSystem,
    x0: State,
    i0: State,
) -> Result<ProductSystem<'a>> {
    if !env.same_alphabet(internal) {
        return Err(Error::AlphabetMismatch);
    }
    if !env.is_labeled() {
        return Err(Error::Unlabeled);
    }
    env.check_state(x0)?;
    internal.check_state(i0)?;
    let m = env.n_actions();
    let n_i = internal.n_states();
    let mut index = vec![usize::MAX; env.n_states() * n_i];
    let mut pairs = vec![(x0, i0)];
    let mut parent = vec![None];
    let mut pair_delta = Vec::new();
    index[x0 * n_i + i0] = 0;
    let mut head = 0;
    while head < pairs.len() {
        let (x, i) = pairs[head];
        for a in 0..m {
            let next = (env.step(x, a), internal.step(i, a));
            let slot = &mut index[next.0 * n_i + next.1];
            if *slot == usize::MAX {
                *slot = pairs.len();
                pairs.push(next);
                parent.push(Some((head, a)));
            }
            pair_delta.push(*slot);
        }
        head += 1;
    }
    Ok(ProductSystem { env, internal, pairs, pair_delta, parent })
}

/// `(x0 * seq, i0 ⋄ seq)`, walked through the coupled system.
pub fn diamond(prod: &ProductSystem<'_>, seq: &[Action]) -> Result<(State, State)> {
    let mut p = 0;
    for &a in seq {
        prod.env.check_action(a)?;
        p = prod.step(p, a);
    }
    Ok(prod.pairs[p])
}

/// The internal system with transitions `ψ(i, u) = i ⋄ u` taken from the
/// coupling. For exploratory internal systems this is the internal system
/// itself; states the coupling never visits keep their own transitions.
pub fn restrict(env: &TransitionSystem, internal: &TransitionSystem, x0: State, i0: State) -> Result<TransitionSystem> {
    let prod = couple(env, internal, x0, i0)?;
    let m = internal.n_actions();
    let mut delta = internal.table().to_vec();
    for (p, &(_, i)) in prod.pairs.iter().enumerate() {
        for a in 0..m {
            delta[i * m + a] = prod.pairs[prod.step(p, a)].1;
        }
    }
    debug_assert_eq!(delta, internal.table());
    let mut sys = TransitionSystem::new(internal.n_states(), internal.action_names().iter().cloned(), delta)?;
    if let Some(names) = internal.label_name_list() {
        sys = sys.with_labels(&names)?;
    }
    if let Some(s) = internal.initial() {
        sys = sys.with_initial(s)?;
    }
    Ok(sys)
}

/// Two action sequences that reach the same internal state while the
/// environment shows different labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Surprise {
    pub first: Vec<Action>,
    pub second: Vec<Action>,
}

/// The first surprise in BFS order, if any: `second` is the shortlex-smallest
/// access sequence whose label disagrees with an earlier visit of the same
/// internal state, and `first` is the access sequence of that earlier visit.
pub fn surprise_witness(prod: &ProductSystem<'_>) -> Option<Surprise> {
    let mut first_seen = vec![usize::MAX; prod.internal.n_states()];
    for (p, &(x, i)) in prod.pairs.iter().enumerate() {
        let q = first_seen[i];
        if q == usize::MAX {
            first_seen[i] = p;
        } else if prod.env.label(prod.pairs[q].0) != prod.env.label(x) {
            return Some(Surprise { first: prod.access_sequence(q), second: prod.access_sequence(p) });
        }
    }
    None
}

pub fn is_surpriseless(prod: &ProductSystem<'_>) -> bool {
    surprise_witness(prod).is_none()
}

/// `ĥ`: for every internal state the environment label (id) seen with it.
/// `None` marks internal states the coupling never reaches.
pub fn induced_label(prod: &ProductSystem<'_>) -> Result<Vec<Option<Label>>> {
    let mut out: Vec<Option<Label>> = vec![None; prod.internal.n_states()];
    for &(x, i) in &prod.pairs {
        let y = prod.env.label(x);
        match out[i] {
            None => out[i] = y,
            Some(prev) if Some(prev) != y => return Err(Error::Surprised),
            Some(_) => {}
        }
    }
    Ok(out)
}

/// A label name not used by `sys`, for internal states `ĥ` leaves undefined.
fn fresh_label(env: &TransitionSystem) -> String {
    let used = env.label_names().unwrap_or_default();
    let mut name = String::from("unreached");
    while used.contains(&name) {
        name.push('\'');
    }
    name
}

/// The internal system labeled by `ĥ` (unreached internal states get a
/// label name the environment never uses).
pub fn with_induced_labels(prod: &ProductSystem<'_>) -> Result<TransitionSystem> {
    let induced = induced_label(prod)?;
    relabel_internal(prod, &induced)
}

/// Labels the internal system with the environment label of the first pair
/// each internal state occurs in. Equals `ĥ` when the coupling is
/// surpriseless; otherwise it is one candidate labeling among many.
pub fn first_seen_labels(prod: &ProductSystem<'_>) -> Result<TransitionSystem> {
    let mut labels: Vec<Option<Label>> = vec![None; prod.internal.n_states()];
    for &(x, i) in &prod.pairs {
        if labels[i].is_none() {
            labels[i] = prod.env.label(x);
        }
    }
    relabel_internal(prod, &labels)
}

fn relabel_internal(prod: &ProductSystem<'_>, labels: &[Option<Label>]) -> Result<TransitionSystem> {
    let env_names = prod.env.label_names().ok_or(Error::Unlabeled)?;
    let fresh = fresh_label(prod.env);
    let names: Vec<&str> = labels.iter().map(|l| l.map_or(fresh.as_str(), |y| env_names[y].as_str())).collect();
    prod.internal.clone().with_labels(&names)
}

/// A relation between the states of two systems, as a dense bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    n_left: usize,
    n_right: usize,
    bits: Vec<bool>,
}

impl Relation {
    pub fn empty(n_left: usize, n_right: usize) -> Self {
        Relation { n_left, n_right, bits: vec![false; n_left * n_right] }
    }

    pub fn contains(&self, x: State, i: State) -> bool {
        self.bits[x * self.n_right + i]
    }

    pub fn insert(&mut self, x: State, i: State) {
        self.bits[x * self.n_right + i] = true;
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> impl Iterator<Item = (State, State)> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(move |(k, _)| (k / self.n_right, k % self.n_right))
    }

    pub fn to_set(&self) -> BTreeSet<(State, State)> {
        self.pairs().collect()
    }

    pub fn n_left(&self) -> usize {
        self.n_left
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }
}

/// True iff every pair of `rel` agrees on labels and every action leads to
/// a pair of `rel` again.
pub fn is_bisimulation(env: &TransitionSystem, internal: &TransitionSystem, rel: &Relation) -> Result<bool> {
    let agree = label_agreement(env, internal)?;
    Ok(rel.pairs().all(|(x, i)| {
        agree(x, i) && (0..env.n_actions()).all(|a| rel.contains(env.step(x, a), internal.step(i, a)))
    }))
}

fn label_agreement<'s>(
    env: &'s TransitionSystem,
    internal: &'s TransitionSystem,
) -> Result<impl Fn(State, State) -> bool + 's> {
    if !env.same_alphabet(internal) {
        return Err(Error::AlphabetMismatch);
    }
    if !env.is_labeled() || !internal.is_labeled() {
        return Err(Error::Unlabeled);
    }
    Ok(move |x: State, i: State| env.label_name(x) == internal.label_name(i))
}

/// The largest relation satisfying the transfer and label conditions:
/// start from all label-agreeing pairs and delete pairs with an action
/// leaving the relation until nothing changes.
pub fn greatest_bisimulation(env: &TransitionSystem, internal: &TransitionSystem) -> Result<Relation> {
    let agree = label_agreement(env, internal)?;
    let mut rel = Relation::empty(env.n_states(), internal.n_states());
    for x in 0..env.n_states() {
        for i in 0..internal.n_states() {
            if agree(x, i) {
                rel.insert(x, i);
            }
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for x in 0..env.n_states() {
            for i in 0..internal.n_states() {
                if rel.contains(x, i)
                    && (0..env.n_actions()).any(|a| !rel.contains(env.step(x, a), internal.step(i, a)))
                {
                    rel.bits[x * rel.n_right + i] = false;
                    changed = true;
                }
            }
        }
    }
    Ok(rel)
}

/// Is `x0` bisimulation equivalent to `i0`?
pub fn are_bisimilar(env: &TransitionSystem, internal: &TransitionSystem, x0: State, i0: State) -> Result<bool> {
    env.check_state(x0)?;
    internal.check_state(i0)?;
    Ok(greatest_bisimulation(env, internal)?.contains(x0, i0))
}

/// Does the greatest autobisimulation of `env` relate two distinct states?
pub fn autobisimulation_is_nontrivial(env: &TransitionSystem) -> Result<bool> {
    let rel = greatest_bisimulation(env, env)?;
    let nontrivial = rel.pairs().any(|(x, y)| x != y);
    Ok(nontrivial)
}

/// Decides whether `env` has a non-trivial autobisimulation, once through
/// the greatest autobisimulation and once as `msr(E_h) ≠ id`. The two
/// answers must agree.
pub fn has_nontrivial_autobisimulation(env: &TransitionSystem) -> Result<bool> {
    let by_bisim = autobisimulation_is_nontrivial(env)?;
    let by_msr = !msr(env, &partition_from_labels(env)?)?.is_identity();
    if by_bisim != by_msr {
        return Err(Error::TheoremViolation("autobisimulation and coarsest sufficient refinement disagree"));
    }
    Ok(by_bisim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{make_cycle, make_line, uniform_labels};

    fn single(actions: &[&str], label: Option<&str>) -> TransitionSystem {
        let sys = TransitionSystem::new(1, actions.iter().copied(), vec![0; actions.len()]).unwrap().with_initial(0).unwrap();
        match label {
            Some(l) => sys.with_labels(&[l]).unwrap(),
            None => sys,
        }
    }

    fn white_cycle() -> TransitionSystem {
        uniform_labels(make_cycle(4).unwrap(), "white").unwrap()
    }

    #[test]
    fn coupling_sizes() {
        let line = make_line(4).unwrap();
        let prod = couple(&line, &line, 0, 0).unwrap();
        assert_eq!(prod.n_pairs(), 4);
        assert!(prod.pairs().iter().all(|&(x, i)| x == i));

        let one = single(&["L", "R"], None);
        let prod = couple(&line, &one, 0, 0).unwrap();
        assert_eq!(prod.n_pairs(), 4);

        let cyc = make_cycle(4).unwrap();
        assert!(matches!(couple(&line, &cyc, 0, 0), Err(Error::AlphabetMismatch)));
        assert!(matches!(couple(&line.clone().without_labels(), &line, 0, 0), Err(Error::Unlabeled)));
    }

    #[test]
    fn diamond_walks() {
        let line = make_line(4).unwrap();
        let one = single(&["L", "R"], None);
        let prod = couple(&line, &one, 0, 0).unwrap();
        assert_eq!(diamond(&prod, &[]).unwrap(), (0, 0));
        assert_eq!(diamond(&prod, &[1]).unwrap(), (1, 0));
        assert!(diamond(&prod, &[5]).is_err());
    }

    #[test]
    fn restriction_of_exploratory_systems() {
        let line = make_line(4).unwrap();
        let one = single(&["L", "R"], Some("white"));
        assert_eq!(restrict(&line, &one, 0, 0).unwrap(), one);
        let two = TransitionSystem::new(2, ["L", "R"], vec![0, 1, 0, 1]).unwrap();
        assert_eq!(restrict(&line, &two, 2, 1).unwrap(), two);
    }

    #[test]
    fn surprise_examples() {
        let line = make_line(4).unwrap();
        let prod = couple(&line, &line, 0, 0).unwrap();
        assert!(is_surpriseless(&prod));
        let one = single(&["L", "R"], None);
        let prod = couple(&line, &one, 0, 0).unwrap();
        assert_eq!(surprise_witness(&prod), Some(Surprise { first: vec![], second: vec![1] }));
        assert_eq!(induced_label(&prod), Err(Error::Surprised));

        let wc = white_cycle();
        let one = single(&["CW", "CCW"], None);
        let prod = couple(&wc, &one, 0, 0).unwrap();
        assert!(is_surpriseless(&prod));
        let labeled = with_induced_labels(&prod).unwrap();
        assert_eq!(labeled.label_name(0), Some("white"));
    }

    #[test]
    fn induced_labels_match_environment() {
        let line = make_line(4).unwrap();
        let prod = couple(&line, &line, 0, 0).unwrap();
        let h = induced_label(&prod).unwrap();
        assert_eq!(h, line.labels().unwrap().iter().map(|&l| Some(l)).collect::<Vec<_>>());

        // internal state 2 is never visited: fresh label
        let internal = TransitionSystem::new(3, ["L", "R"], vec![0, 1, 0, 1, 2, 2]).unwrap();
        let prod = couple(&line, &internal, 0, 0).unwrap();
        assert!(!is_surpriseless(&prod));
        let prod = couple(&white_cycle(), &internal, 0, 0).unwrap_err();
        assert_eq!(prod, Error::AlphabetMismatch);
    }

    #[test]
    fn bisimulation_examples() {
        let line = make_line(4).unwrap();
        let rel = greatest_bisimulation(&line, &line).unwrap();
        assert_eq!(rel.to_set(), (0..4).map(|s| (s, s)).collect());
        assert!(are_bisimilar(&line, &line, 0, 0).unwrap());

        let white = single(&["L", "R"], Some("white"));
        let rel = greatest_bisimulation(&line, &white).unwrap();
        assert!(!rel.contains(0, 0));
        assert!(!are_bisimilar(&line, &white, 0, 0).unwrap());

        let wc = white_cycle();
        let white = single(&["CW", "CCW"], Some("white"));
        assert!(are_bisimilar(&wc, &white, 0, 0).unwrap());

        assert_eq!(greatest_bisimulation(&line, &line.clone().without_labels()), Err(Error::Unlabeled));
    }

    #[test]
    fn autobisimulations() {
        assert!(has_nontrivial_autobisimulation(&white_cycle()).unwrap());
        assert!(!has_nontrivial_autobisimulation(&make_line(4).unwrap()).unwrap());
        let abab = TransitionSystem::from_fn(4, ["CW", "CCW"], |s, a| if a == 0 { (s + 1) % 4 } else { (s + 3) % 4 })
            .unwrap()
            .with_labels(&["A", "B", "A", "B"])
            .unwrap();
        assert!(has_nontrivial_autobisimulation(&abab).unwrap());
        assert!(has_nontrivial_autobisimulation(&make_cycle(4).unwrap().without_labels()).is_err());
    }
}
