//! Deterministic transition systems, state maps and the structural
//! predicates (connectivity, minimal distinguishability, isomorphism).

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::{Action, Error, Label, Result, State};

/// Per-state sensor labels, interned in order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Labels {
    of_state: Vec<Label>,
    names: Vec<String>,
}

impl Labels {
    fn intern<S: AsRef<str>>(per_state: &[S]) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut of_state = Vec::with_capacity(per_state.len());
        for name in per_state {
            let name = name.as_ref();
            check_token(name, "label")?;
            let id = match names.iter().position(|n| n == name) {
                Some(id) => id,
                None => {
                    names.push(name.to_string());
                    names.len() - 1
                }
            };
            of_state.push(id);
        }
        Ok(Labels { of_state, names })
    }

    fn name(&self, s: State) -> &str {
        &self.names[self.of_state[s]]
    }
}

fn check_token(tok: &str, what: &str) -> Result<()> {
    if tok.is_empty() || tok.chars().any(|c| c.is_whitespace() || c == '#') {
        return Err(Error::InvalidSystem(format!("{what} name {tok:?} is not a token")));
    }
    Ok(())
}

/// A finite deterministic (semi)automaton with a total transition table,
/// optional sensor labels and an optional initial state.
///
/// States, actions and labels are dense indices. Label ids are always
/// interned in order of first appearance over the states, so two systems
/// with the same per-state label names compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransitionSystem {
    n_states: usize,
    action_names: Vec<String>,
    delta: Vec<State>,
    labels: Option<Labels>,
    initial: Option<State>,
}

impl TransitionSystem {
    /// Builds a system from a row-major table: `delta[s * n_actions + a]`.
    pub fn new<S: Into<String>>(
        n_states: usize,
        action_names: impl IntoIterator<Item = S>,
        delta: Vec<State>,
    ) -> Result<Self> {
        let action_names: Vec<String> = action_names.into_iter().map(Into::into).collect();
        if n_states == 0 {
            return Err(Error::InvalidSystem("a system needs at least one state".into()));
        }
        if action_names.is_empty() {
            return Err(Error::InvalidSystem("a system needs at least one action".into()));
        }
        for (i, name) in action_names.iter().enumerate() {
            check_token(name, "action")?;
            if action_names[..i].contains(name) {
                return Err(Error::InvalidSystem(format!("duplicate action name {name:?}")));
            }
        }
        if delta.len() != n_states * action_names.len() {
            return Err(Error::InvalidSystem(format!(
                "transition table has {} entries, expected {}",
                delta.len(),
                n_states * action_names.len()
            )));
        }
        if let Some(&bad) = delta.iter().find(|&&t| t >= n_states) {
            return Err(Error::StateOutOfRange { state: bad, n_states });
        }
        Ok(TransitionSystem { n_states, action_names, delta, labels: None, initial: None })
    }

    pub fn from_fn<S: Into<String>>(
        n_states: usize,
        action_names: impl IntoIterator<Item = S>,
        f: impl Fn(State, Action) -> State,
    ) -> Result<Self> {
        let action_names: Vec<String> = action_names.into_iter().map(Into::into).collect();
        let m = action_names.len();
        let delta = (0..n_states * m).map(|i| f(i / m, i % m)).collect();
        Self::new(n_states, action_names, delta)
    }

    /// Attaches one sensor label name per state.
    pub fn with_labels<S: AsRef<str>>(mut self, per_state: &[S]) -> Result<Self> {
        if per_state.len() != self.n_states {
            return Err(Error::SizeMismatch { expected: self.n_states, found: per_state.len() });
        }
        self.labels = Some(Labels::intern(per_state)?);
        Ok(self)
    }

    pub fn with_initial(mut self, s: State) -> Result<Self> {
        self.check_state(s)?;
        self.initial = Some(s);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn without_initial(mut self) -> Self {
        self.initial = None;
        self
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn action_index(&self, name: &str) -> Option<Action> {
        self.action_names.iter().position(|n| n == name)
    }

    pub fn initial(&self) -> Option<State> {
        self.initial
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    /// Label id of `s`, if the system is labeled.
    pub fn label(&self, s: State) -> Option<Label> {
        self.labels.as_ref().map(|l| l.of_state[s])
    }

    pub fn label_name(&self, s: State) -> Option<&str> {
        self.labels.as_ref().map(|l| l.name(s))
    }

    /// Interned label names, indexed by label id.
    pub fn label_names(&self) -> Option<&[String]> {
        self.labels.as_ref().map(|l| l.names.as_slice())
    }

    /// Label ids of all states.
    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_ref().map(|l| l.of_state.as_slice())
    }

    /// Per-state label names (owned), convenient for relabeling.
    pub fn label_name_list(&self) -> Option<Vec<String>> {
        self.labels
            .as_ref()
            .map(|l| (0..self.n_states).map(|s| l.name(s).to_string()).collect())
    }

    /// One transition. Panics on out-of-range indices; see [`Self::star`]
    /// for the checked variant.
    #[inline]
    pub fn step(&self, s: State, a: Action) -> State {
        self.delta[s * self.action_names.len() + a]
    }

    /// Successors of `s`, one per action.
    #[inline]
    pub fn row(&self, s: State) -> &[State] {
        let m = self.action_names.len();
        &self.delta[s * m..(s + 1) * m]
    }

    /// The raw row-major transition table.
    pub fn table(&self) -> &[State] {
        &self.delta
    }

    pub(crate) fn check_state(&self, s: State) -> Result<()> {
        if s >= self.n_states {
            return Err(Error::StateOutOfRange { state: s, n_states: self.n_states });
        }
        Ok(())
    }

    pub(crate) fn check_action(&self, a: Action) -> Result<()> {
        if a >= self.n_actions() {
            return Err(Error::ActionOutOfRange { action: a, n_actions: self.n_actions() });
        }
        Ok(())
    }

    /// `s * seq`: the state reached from `s` by applying `seq` left to right.
    pub fn star(&self, s: State, seq: &[Action]) -> Result<State> {
        self.check_state(s)?;
        seq.iter().try_fold(s, |cur, &a| {
            self.check_action(a)?;
            Ok(self.step(cur, a))
        })
    }

    pub fn same_alphabet(&self, other: &TransitionSystem) -> bool {
        self.action_names == other.action_names
    }

    /// States reachable from `from` (including itself).
    pub fn reachable_from(&self, from: State) -> Vec<bool> {
        let mut seen = vec![false; self.n_states];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(s) = queue.pop_front() {
            for &t in self.row(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// A pair `(from, to)` with no path from `from` to `to`, if any.
    pub fn connectivity_gap(&self) -> Option<(State, State)> {
        let forward = self.reachable_from(0);
        if let Some(t) = forward.iter().position(|&r| !r) {
            return Some((0, t));
        }
        let mut preds: Vec<Vec<State>> = vec![Vec::new(); self.n_states];
        for s in 0..self.n_states {
            for &t in self.row(s) {
                preds[t].push(s);
            }
        }
        let mut seen = vec![false; self.n_states];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(t) = queue.pop_front() {
            for &s in &preds[t] {
                if !seen[s] {
                    seen[s] = true;
                    queue.push_back(s);
                }
            }
        }
        seen.iter().position(|&r| !r).map(|s| (s, 0))
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.connectivity_gap().is_none()
    }

    /// Smallest `(target, first, second, action)` with
    /// `step(first, a) = step(second, a) = target` and the three states
    /// pairwise distinct, if one exists.
    pub fn minimal_distinguishing_violation(&self) -> Option<MinDistViolation> {
        let mut best: Option<MinDistViolation> = None;
        for a in 0..self.n_actions() {
            // the two smallest predecessors of each state, other than itself
            let mut preds: Vec<[Option<State>; 2]> = vec![[None, None]; self.n_states];
            for s in 0..self.n_states {
                let t = self.step(s, a);
                if t == s {
                    continue;
                }
                let slot = &mut preds[t];
                if slot[0].is_none() {
                    slot[0] = Some(s);
                } else if slot[1].is_none() {
                    slot[1] = Some(s);
                }
            }
            let found = preds.iter().enumerate().find_map(|(t, p)| match p {
                [Some(first), Some(second)] => Some(MinDistViolation {
                    target: t,
                    first: *first,
                    second: *second,
                    action: a,
                }),
                _ => None,
            });
            if let Some(v) = found {
                if best.as_ref().is_none_or(|b| v.key() < b.key()) {
                    best = Some(v);
                }
            }
        }
        best
    }

    pub fn is_minimally_distinguishing(&self) -> bool {
        self.minimal_distinguishing_violation().is_none()
    }

    /// Relabels states in BFS order from `anchor`, exploring actions in index
    /// order. The result has `anchor` as state 0 and initial state, and is
    /// identical for isomorphic anchored systems. Also returns the map from
    /// old to new state indices.
    pub fn canonical_form(&self, anchor: State) -> Result<(TransitionSystem, StateMap)> {
        self.check_state(anchor)?;
        let n = self.n_states;
        let mut new_of = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        new_of[anchor] = 0;
        order.push(anchor);
        let mut head = 0;
        while head < order.len() {
            let s = order[head];
            head += 1;
            for &t in self.row(s) {
                if new_of[t] == usize::MAX {
                    new_of[t] = order.len();
                    order.push(t);
                }
            }
        }
        if let Some(unreachable) = new_of.iter().position(|&x| x == usize::MAX) {
            return Err(Error::NotConnected { from: anchor, unreachable });
        }
        let delta = order
            .iter()
            .flat_map(|&s| self.row(s).iter().map(|&t| new_of[t]))
            .collect();
        let mut sys = TransitionSystem {
            n_states: n,
            action_names: self.action_names.clone(),
            delta,
            labels: None,
            initial: Some(0),
        };
        if let Some(l) = &self.labels {
            let names: Vec<&str> = order.iter().map(|&s| l.name(s)).collect();
            sys.labels = Some(Labels::intern(&names)?);
        }
        Ok((sys, StateMap { target_size: n, map: new_of }))
    }
}

/// A violation of minimal distinguishability: two distinct states that are
/// both different from `target` are sent to `target` by `action`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinDistViolation {
    pub target: State,
    pub first: State,
    pub second: State,
    pub action: Action,
}

impl MinDistViolation {
    fn key(&self) -> (State, State, State, Action) {
        (self.target, self.first, self.second, self.action)
    }
}

fn same_shape(a: &TransitionSystem, b: &TransitionSystem, compare_labels: bool) -> bool {
    a.delta == b.delta && (!compare_labels || a.labels == b.labels)
}

/// Decides isomorphism of `a` and `b`.
///
/// Anchored: the isomorphism must send `a`'s initial state to `b`'s, and
/// every state must be reachable from the initial state. Unanchored: both
/// systems must be strongly connected; every state of `b` is tried as the
/// image of state 0 of `a`. Labels are compared (by name) only when both
/// systems are labeled. Returns the isomorphism `a -> b` on success.
pub fn are_isomorphic(
    a: &TransitionSystem,
    b: &TransitionSystem,
    anchored: bool,
) -> Result<Option<StateMap>> {
    if !a.same_alphabet(b) {
        return Err(Error::AlphabetMismatch);
    }
    let compare_labels = a.is_labeled() && b.is_labeled();
    let witness = |map_a: &StateMap, map_b: &StateMap| {
        let mut inv_b = vec![0; b.n_states];
        for (s, &c) in map_b.map.iter().enumerate() {
            inv_b[c] = s;
        }
        StateMap { target_size: b.n_states, map: map_a.map.iter().map(|&c| inv_b[c]).collect() }
    };
    if anchored {
        let a0 = a.initial.ok_or(Error::MissingInitial)?;
        let b0 = b.initial.ok_or(Error::MissingInitial)?;
        let (ca, ma) = a.canonical_form(a0)?;
        let (cb, mb) = b.canonical_form(b0)?;
        if a.n_states != b.n_states || !same_shape(&ca, &cb, compare_labels) {
            return Ok(None);
        }
        return Ok(Some(witness(&ma, &mb)));
    }
    for sys in [a, b] {
        if let Some((from, unreachable)) = sys.connectivity_gap() {
            return Err(Error::NotConnected { from, unreachable });
        }
    }
    if a.n_states != b.n_states {
        return Ok(None);
    }
    let (ca, ma) = a.canonical_form(0)?;
    for anchor in 0..b.n_states {
        let (cb, mb) = b.canonical_form(anchor)?;
        if same_shape(&ca, &cb, compare_labels) {
            return Ok(Some(witness(&ma, &mb)));
        }
    }
    Ok(None)
}

/// True iff `step_dst(m(s), a) = m(step_src(s, a))` for all `s`, `a`.
pub fn is_homomorphism(m: &StateMap, src: &TransitionSystem, dst: &TransitionSystem) -> Result<bool> {
    if !src.same_alphabet(dst) {
        return Err(Error::AlphabetMismatch);
    }
    if m.source_size() != src.n_states {
        return Err(Error::SizeMismatch { expected: src.n_states, found: m.source_size() });
    }
    if m.target_size != dst.n_states {
        return Err(Error::SizeMismatch { expected: dst.n_states, found: m.target_size });
    }
    Ok((0..src.n_states).all(|s| {
        (0..src.n_actions()).all(|a| dst.step(m.apply(s), a) == m.apply(src.step(s, a)))
    }))
}

/// A total function between two state sets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateMap {
    target_size: usize,
    map: Vec<State>,
}

impl StateMap {
    pub fn new(map: Vec<State>, target_size: usize) -> Result<Self> {
        if let Some(&bad) = map.iter().find(|&&t| t >= target_size) {
            return Err(Error::StateOutOfRange { state: bad, n_states: target_size });
        }
        Ok(StateMap { target_size, map })
    }

    pub fn identity(n: usize) -> Self {
        StateMap { target_size: n, map: (0..n).collect() }
    }

    pub fn source_size(&self) -> usize {
        self.map.len()
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    #[inline]
    pub fn apply(&self, s: State) -> State {
        self.map[s]
    }

    pub fn as_slice(&self) -> &[State] {
        &self.map
    }

    /// The smallest target state without a preimage.
    pub fn first_missing(&self) -> Option<State> {
        let mut hit = vec![false; self.target_size];
        for &t in &self.map {
            hit[t] = true;
        }
        hit.iter().position(|&h| !h)
    }

    pub fn is_surjective(&self) -> bool {
        self.first_missing().is_none()
    }

    pub fn is_injective(&self) -> bool {
        let mut hit = vec![false; self.target_size];
        self.map.iter().all(|&t| !core::mem::replace(&mut hit[t], true))
    }

    pub fn is_bijective(&self) -> bool {
        self.source_size() == self.target_size && self.is_injective()
    }

    /// `then ∘ self`.
    pub fn compose(&self, then: &StateMap) -> Result<StateMap> {
        if then.source_size() != self.target_size {
            return Err(Error::SizeMismatch { expected: self.target_size, found: then.source_size() });
        }
        Ok(StateMap { target_size: then.target_size, map: self.map.iter().map(|&t| then.map[t]).collect() })
    }

    pub fn inverse(&self) -> Option<StateMap> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0; self.target_size];
        for (s, &t) in self.map.iter().enumerate() {
            inv[t] = s;
        }
        Some(StateMap { target_size: self.source_size(), map: inv })
    }
}
