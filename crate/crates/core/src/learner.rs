//! Learning an environment from action/observation histories.
//!
//! The learner talks to the environment only through a [`StepOracle`]:
//! reset to the start state, apply an action, read the sensor. Histories
//! (action sequences) are identified when no continuation of bounded
//! length tells them apart; the quotient of the history space by that
//! relation is the learned model.
//!
//! Two routes compute the same quotient:
//!
//! - [`explore`] + [`bounded_indistinguishability`] + [`build_model`] work on
//!   the complete history trie of a fixed depth. Exact, but the trie has
//!   `m^(D+1)` nodes.
//! - [`build_model_by_queries`] expands only one representative history
//!   per class (plus the members it needs for the consistency check) and
//!   queries their bounded continuation trees directly. [`learn`] uses it.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::coupling::{are_bisimilar, couple, first_seen_labels, is_surpriseless, with_induced_labels};
use crate::system::are_isomorphic;
use crate::{Action, Error, Partition, Result, State, TransitionSystem};

/// Opaque sensor symbol returned by an oracle.
pub type Symbol = u32;

/// Black-box access to an environment.
pub trait StepOracle {
    fn action_names(&self) -> &[String];
    /// Return to the start state.
    fn reset(&mut self);
    fn step(&mut self, a: Action);
    /// The sensor reading at the current state.
    fn observe(&self) -> Symbol;
    fn symbol_name(&self, symbol: Symbol) -> &str;
}

/// Oracle backed by a labeled transition system, started at `x0`.
#[derive(Debug, Clone)]
pub struct EnvOracle<'a> {
    env: &'a TransitionSystem,
    labels: &'a [usize],
    names: &'a [String],
    x0: State,
    current: State,
}

impl<'a> EnvOracle<'a> {
    pub fn new(env: &'a TransitionSystem, x0: State) -> Result<Self> {
        env.check_state(x0)?;
        let labels = env.labels().ok_or(Error::Unlabeled)?;
        let names = env.label_names().ok_or(Error::Unlabeled)?;
        Ok(EnvOracle { env, labels, names, x0, current: x0 })
    }
}

impl StepOracle for EnvOracle<'_> {
    fn action_names(&self) -> &[String] {
        self.env.action_names()
    }

    fn reset(&mut self) {
        self.current = self.x0;
    }

    #[inline]
    fn step(&mut self, a: Action) {
        self.current = self.env.step(self.current, a);
    }

    #[inline]
    fn observe(&self) -> Symbol {
        self.labels[self.current] as Symbol
    }

    fn symbol_name(&self, symbol: Symbol) -> &str {
        &self.names[symbol as usize]
    }
}

/// Oracle call counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OracleStats {
    /// Number of resets, i.e. independent walks from the start state.
    pub queries: u64,
    pub steps: u64,
    pub observations: u64,
}

struct Session<'o, O: StepOracle> {
    oracle: &'o mut O,
    stats: OracleStats,
}

impl<'o, O: StepOracle> Session<'o, O> {
    fn new(oracle: &'o mut O) -> Self {
        Session { oracle, stats: OracleStats::default() }
    }

    fn reset_and_walk(&mut self, seq: &[Action]) {
        self.oracle.reset();
        self.stats.queries += 1;
        for &a in seq {
            self.oracle.step(a);
        }
        self.stats.steps += seq.len() as u64;
    }

    #[inline]
    fn step(&mut self, a: Action) {
        self.oracle.step(a);
        self.stats.steps += 1;
    }

    #[inline]
    fn observe(&mut self) -> Symbol {
        self.stats.observations += 1;
        self.oracle.observe()
    }
}

/// Largest trie [`explore`] will materialize.
pub const MAX_TRIE_NODES: usize = 1 << 22;

/// Number of action sequences of length `< len`, i.e. the index of the first
/// node of depth `len` in level order.
pub fn level_offset(m: usize, len: usize) -> Option<usize> {
    if m == 1 {
        return Some(len);
    }
    let mut total: usize = 0;
    let mut width: usize = 1;
    for _ in 0..len {
        total = total.checked_add(width)?;
        width = width.checked_mul(m)?;
    }
    Some(total)
}

/// Complete trie of all action sequences of length `<= depth`, nodes in
/// level order (children in action order), with the sensor value observed
/// after each sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryTrie {
    action_names: Vec<String>,
    depth: usize,
    observation: Vec<usize>,
    symbol_names: Vec<String>,
    stats: OracleStats,
}

impl HistoryTrie {
    pub fn n_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_nodes(&self) -> usize {
        self.observation.len()
    }

    /// Number of nodes of depth `<= d`.
    pub fn nodes_up_to(&self, d: usize) -> usize {
        level_offset(self.n_actions(), d + 1).expect("bounded by the trie size")
    }

    /// Child of `node` under `a`, if `node` is not a leaf.
    pub fn child(&self, node: usize, a: Action) -> Option<usize> {
        let c = node * self.n_actions() + a + 1;
        (a < self.n_actions() && c < self.n_nodes()).then_some(c)
    }

    pub fn parent(&self, node: usize) -> Option<(usize, Action)> {
        let m = self.n_actions();
        (node > 0).then(|| ((node - 1) / m, (node - 1) % m))
    }

    pub fn node_depth(&self, node: usize) -> usize {
        self.access(node).len()
    }

    pub fn access(&self, mut node: usize) -> Vec<Action> {
        let mut seq = Vec::new();
        while let Some((p, a)) = self.parent(node) {
            seq.push(a);
            node = p;
        }
        seq.reverse();
        seq
    }

    /// Node reached by `seq`, if `seq` is not longer than the trie depth.
    pub fn node(&self, seq: &[Action]) -> Option<usize> {
        seq.iter().try_fold(0, |n, &a| self.child(n, a))
    }

    /// Interned observation id of `node` (first-seen order).
    pub fn observation(&self, node: usize) -> usize {
        self.observation[node]
    }

    pub fn observation_name(&self, node: usize) -> &str {
        &self.symbol_names[self.observation[node]]
    }

    pub fn symbol_names(&self) -> &[String] {
        &self.symbol_names
    }

    pub fn stats(&self) -> OracleStats {
        self.stats
    }

    /// The trie as a labeled transition system on node indices. Leaves
    /// loop to themselves, so the result agrees with the free system only
    /// below the last level. The root is the initial state.
    pub fn to_system(&self) -> Result<TransitionSystem> {
        let n = self.n_nodes();
        let labels: Vec<&str> = (0..n).map(|v| self.observation_name(v)).collect();
        TransitionSystem::from_fn(n, self.action_names.iter().cloned(), |v, a| self.child(v, a).unwrap_or(v))?
            .with_labels(&labels)?
            .with_initial(0)
    }
}

/// Records the observation after every action sequence of length `<= depth`.
/// One oracle query (reset, walk, observe) per node.
pub fn explore<O: StepOracle>(oracle: &mut O, depth: usize) -> Result<HistoryTrie> {
    let action_names = oracle.action_names().to_vec();
    let m = action_names.len();
    if m == 0 {
        return Err(Error::InvalidArgument("oracle has no actions".into()));
    }
    let n_nodes = level_offset(m, depth + 1)
        .filter(|&n| n <= MAX_TRIE_NODES)
        .ok_or(Error::TooLarge { what: "history trie", size: usize::MAX, limit: MAX_TRIE_NODES })?;

    let mut session = Session::new(oracle);
    let mut symbols: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut symbol_names = Vec::new();
    let mut observation = Vec::with_capacity(n_nodes);
    let mut seq: Vec<Action> = Vec::with_capacity(depth);
    for node in 0..n_nodes {
        // level-order node -> action sequence
        seq.clear();
        let mut x = node;
        while x > 0 {
            seq.push((x - 1) % m);
            x = (x - 1) / m;
        }
        seq.reverse();
        session.reset_and_walk(&seq);
        let sym = session.observe();
        let id = *symbols.entry(sym).or_insert_with(|| {
            symbol_names.push(session.oracle.symbol_name(sym).to_string());
            symbol_names.len() - 1
        });
        observation.push(id);
    }
    let stats = session.stats;
    Ok(HistoryTrie { action_names, depth, observation, symbol_names, stats })
}

/// Partition of the nodes of depth `<= depth - horizon`: two histories are
/// equivalent iff every continuation of length `<= horizon` yields the
/// same observation from both.
///
/// Computed by iterated splitting: round 0 groups by own observation, round
/// `j` additionally by the round-`j-1` classes of the children.
pub fn bounded_indistinguishability(trie: &HistoryTrie, horizon: usize) -> Result<Partition> {
    if horizon > trie.depth {
        return Err(Error::HorizonTooLarge { horizon, depth: trie.depth });
    }
    let m = trie.n_actions();
    let mut classes = Partition::from_keys(&trie.observation);
    let mut key: Vec<usize> = Vec::with_capacity(m + 1);
    for round in 1..=horizon {
        let count = trie.nodes_up_to(trie.depth - round);
        let keys: Vec<Vec<usize>> = (0..count)
            .map(|node| {
                key.clear();
                key.push(classes.block_of(node));
                key.extend((0..m).map(|a| classes.block_of(node * m + a + 1)));
                key.clone()
            })
            .collect();
        classes = Partition::from_keys(&keys);
    }
    Ok(classes)
}

/// Why a bounded quotient is not a transition system yet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelDefect {
    /// The class of this history has no member shallow enough for its
    /// successors to be classified.
    Unclosed { access: Vec<Action> },
    /// Two members of one class disagree on the class of their `action` child.
    Inconsistent { first: Vec<Action>, second: Vec<Action>, action: Action },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildOutcome {
    Model(TransitionSystem),
    Defect(ModelDefect),
}

impl BuildOutcome {
    pub fn model(&self) -> Option<&TransitionSystem> {
        match self {
            BuildOutcome::Model(m) => Some(m),
            BuildOutcome::Defect(_) => None,
        }
    }
}

fn check_horizon(depth: usize, horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("model horizon must be at least 1".into()));
    }
    if horizon >= depth {
        return Err(Error::HorizonTooLarge { horizon, depth });
    }
    Ok(())
}

/// Quotient of the trie by [`bounded_indistinguishability`].
///
/// States are the classes containing a history of depth
/// `<= depth - horizon - 1`; such histories have all children classified.
/// Every one of them is checked: the class of its `a`-child must not depend
/// on the member, and must itself contain a shallow history. The root's
/// class is state 0 and the initial state.
pub fn build_model(trie: &HistoryTrie, horizon: usize) -> Result<BuildOutcome> {
    check_horizon(trie.depth, horizon)?;
    let classes = bounded_indistinguishability(trie, horizon)?;
    let m = trie.n_actions();
    let inner = trie.nodes_up_to(trie.depth - horizon - 1);

    let mut state_of_class = vec![usize::MAX; classes.n_blocks()];
    let mut rep_of_state: Vec<usize> = Vec::new();
    for node in 0..inner {
        let c = classes.block_of(node);
        if state_of_class[c] == usize::MAX {
            state_of_class[c] = rep_of_state.len();
            rep_of_state.push(node);
        }
    }
    let n = rep_of_state.len();
    let mut delta = vec![usize::MAX; n * m];
    for node in 0..inner {
        let s = state_of_class[classes.block_of(node)];
        for a in 0..m {
            let child = node * m + a + 1;
            let t = state_of_class[classes.block_of(child)];
            if t == usize::MAX {
                return Ok(BuildOutcome::Defect(ModelDefect::Unclosed { access: trie.access(child) }));
            }
            let slot = &mut delta[s * m + a];
            if *slot == usize::MAX {
                *slot = t;
            } else if *slot != t {
                return Ok(BuildOutcome::Defect(ModelDefect::Inconsistent {
                    first: trie.access(rep_of_state[s]),
                    second: trie.access(node),
                    action: a,
                }));
            }
        }
    }
    let labels: Vec<&str> = rep_of_state.iter().map(|&r| trie.observation_name(r)).collect();
    let model = TransitionSystem::new(n, trie.action_names.iter().cloned(), delta)?
        .with_labels(&labels)?
        .with_initial(0)?;
    Ok(BuildOutcome::Model(model))
}

/// Observations of all continuations of length `<= height` of one history,
/// in level order.
struct ContinuationTree {
    obs: Vec<Symbol>,
}

fn query_continuations<O: StepOracle>(
    session: &mut Session<'_, O>,
    access: &[Action],
    height: usize,
    m: usize,
) -> ContinuationTree {
    let size = level_offset(m, height + 1).expect("checked by caller");
    let mut obs = vec![0; size];
    let leaves = if m == 1 { 1 } else { m.pow(height as u32) };
    let mut digits = vec![0usize; height];
    for _ in 0..leaves {
        session.reset_and_walk(access);
        obs[0] = session.observe();
        let mut value = 0;
        for (j, &d) in digits.iter().enumerate() {
            session.step(d);
            value = value * m + d;
            obs[level_offset(m, j + 1).unwrap() + value] = session.observe();
        }
        // next leaf in base m, last digit fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    ContinuationTree { obs }
}

impl ContinuationTree {
    /// Signature of the history itself, truncated to `horizon`.
    fn own_signature(&self, m: usize, horizon: usize) -> Vec<Symbol> {
        self.obs[..level_offset(m, horizon + 1).unwrap()].to_vec()
    }

    /// Signature of the `a`-child, truncated to `horizon`.
    fn child_signature(&self, m: usize, a: Action, horizon: usize) -> Vec<Symbol> {
        let mut sig = Vec::with_capacity(level_offset(m, horizon + 1).unwrap());
        let mut width = 1;
        for j in 0..=horizon {
            let start = level_offset(m, j + 1).unwrap() + a * width;
            sig.extend_from_slice(&self.obs[start..start + width]);
            width *= m;
        }
        sig
    }
}

/// Same quotient as `build_model(explore(oracle, depth), horizon)`, computed
/// by expanding one representative history per class in BFS order.
///
/// Every history explored at depth `<= depth - horizon - 1` has its
/// continuation tree of height `horizon + 1` queried, which classifies it
/// and all its children. Representatives are expanded further; the other
/// members are only checked for consistency against the representative.
pub fn build_model_by_queries<O: StepOracle>(oracle: &mut O, depth: usize, horizon: usize) -> Result<(BuildOutcome, OracleStats)> {
    let mut session = Session::new(oracle);
    let outcome = build_model_in(&mut session, depth, horizon)?;
    Ok((outcome, session.stats))
}

fn build_model_in<O: StepOracle>(session: &mut Session<'_, O>, depth: usize, horizon: usize) -> Result<BuildOutcome> {
    check_horizon(depth, horizon)?;
    let m = session.oracle.action_names().len();
    let tree_size = level_offset(m, horizon + 2).filter(|&n| n <= MAX_TRIE_NODES);
    if tree_size.is_none() {
        return Err(Error::TooLarge { what: "continuation tree", size: usize::MAX, limit: MAX_TRIE_NODES });
    }
    let inner_depth = depth - horizon - 1;

    struct Class {
        rep: Vec<Action>,
        label: Symbol,
    }
    let mut classes: Vec<Class> = Vec::new();
    let mut by_signature: BTreeMap<Vec<Symbol>, usize> = BTreeMap::new();
    let mut delta: Vec<usize> = Vec::new();
    // (history, its class, expand children?)
    let mut queue: VecDeque<(Vec<Action>, usize, bool)> = VecDeque::new();

    let root_tree = query_continuations(session, &[], horizon + 1, m);
    let root_sig = root_tree.own_signature(m, horizon);
    classes.push(Class { rep: Vec::new(), label: root_sig[0] });
    by_signature.insert(root_sig, 0);
    delta.extend(core::iter::repeat_n(usize::MAX, m));
    let mut pending = Some(root_tree);
    queue.push_back((Vec::new(), 0, true));

    while let Some((history, class, is_rep)) = queue.pop_front() {
        let tree = match pending.take() {
            Some(t) => t,
            None => query_continuations(session, &history, horizon + 1, m),
        };
        for a in 0..m {
            let sig = tree.child_signature(m, a, horizon);
            let mut child = history.clone();
            child.push(a);
            let target = match by_signature.get(&sig) {
                Some(&c) => {
                    if is_rep && child.len() <= inner_depth {
                        queue.push_back((child, c, false));
                    }
                    c
                }
                None => {
                    if !is_rep {
                        return Ok(BuildOutcome::Defect(ModelDefect::Inconsistent {
                            first: classes[class].rep.clone(),
                            second: history,
                            action: a,
                        }));
                    }
                    if child.len() > inner_depth {
                        return Ok(BuildOutcome::Defect(ModelDefect::Unclosed { access: child }));
                    }
                    let c = classes.len();
                    classes.push(Class { rep: child.clone(), label: sig[0] });
                    by_signature.insert(sig, c);
                    delta.extend(core::iter::repeat_n(usize::MAX, m));
                    queue.push_back((child, c, true));
                    c
                }
            };
            let slot = &mut delta[class * m + a];
            if *slot == usize::MAX {
                *slot = target;
            } else if *slot != target {
                return Ok(BuildOutcome::Defect(ModelDefect::Inconsistent {
                    first: classes[class].rep.clone(),
                    second: history,
                    action: a,
                }));
            }
        }
    }

    let names: Vec<String> = classes.iter().map(|c| session.oracle.symbol_name(c.label).to_string()).collect();
    let model = TransitionSystem::new(classes.len(), session.oracle.action_names().iter().cloned(), delta)?
        .with_labels(&names)?
        .with_initial(0)?;
    Ok(BuildOutcome::Model(model))
}

/// One depth of the learning schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub depth: usize,
    pub horizon: usize,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundOutcome {
    Model { states: usize },
    Defect(ModelDefect),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convergence {
    /// The model built at `first_depth` was rebuilt unchanged at `confirmed_depth`.
    Stable { first_depth: usize, confirmed_depth: usize },
    /// The depth budget ran out first.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnReport {
    pub convergence: Convergence,
    /// The stable model, or the last model built when exhausted.
    pub model: Option<TransitionSystem>,
    pub rounds: Vec<Round>,
    pub stats: OracleStats,
}

impl LearnReport {
    pub fn converged(&self) -> bool {
        matches!(self.convergence, Convergence::Stable { .. })
    }
}

/// Learns a model of the oracle's environment.
///
/// For `D = 2, 4, ..., max_depth` with horizon `D / 2`, builds the bounded
/// quotient and stops once two successive depths give the same model
/// (compared by canonical form from the root). The model is correct once
/// `D >= 2 |X|`; stability at smaller depth is a stopping heuristic that
/// can settle on a too-coarse model. See [`learn_from_depth`].
pub fn learn<O: StepOracle>(oracle: &mut O, max_depth: usize) -> Result<LearnReport> {
    learn_from_depth(oracle, 2, max_depth)
}

/// Like [`learn`], but the schedule starts at the even depth `>= min_depth`.
/// With `min_depth >= 2 |X|` the result is exact.
pub fn learn_from_depth<O: StepOracle>(oracle: &mut O, min_depth: usize, max_depth: usize) -> Result<LearnReport> {
    let start = min_depth.max(2).next_multiple_of(2);
    if max_depth < start {
        return Err(Error::InvalidArgument(format!("max depth must be at least {start}")));
    }
    let mut session = Session::new(oracle);
    let mut rounds = Vec::new();
    let mut previous: Option<(usize, TransitionSystem)> = None;
    let mut last_model = None;
    for depth in (start..=max_depth).step_by(2) {
        let horizon = depth / 2;
        match build_model_in(&mut session, depth, horizon)? {
            BuildOutcome::Model(model) => {
                rounds.push(Round { depth, horizon, outcome: RoundOutcome::Model { states: model.n_states() } });
                let (canonical, _) = model.canonical_form(0)?;
                if let Some((first_depth, prev)) = &previous {
                    if *prev == canonical {
                        return Ok(LearnReport {
                            convergence: Convergence::Stable { first_depth: *first_depth, confirmed_depth: depth },
                            model: Some(model),
                            rounds,
                            stats: session.stats,
                        });
                    }
                }
                previous = Some((depth, canonical));
                last_model = Some(model);
            }
            BuildOutcome::Defect(defect) => {
                rounds.push(Round { depth, horizon, outcome: RoundOutcome::Defect(defect) });
                previous = None;
            }
        }
    }
    Ok(LearnReport { convergence: Convergence::Exhausted, model: last_model, rounds, stats: session.stats })
}

/// Runs [`learn`] against a labeled environment started at `x0`.
pub fn learn_env(env: &TransitionSystem, x0: State, max_depth: usize) -> Result<LearnReport> {
    let mut oracle = EnvOracle::new(env, x0)?;
    learn(&mut oracle, max_depth)
}

/// How a learned model relates to its environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyReport {
    pub isomorphic: bool,
    pub bisimilar: bool,
    pub surpriseless: bool,
}

/// Compares `model` (rooted at its initial state) with `env` rooted at `x0`:
/// anchored isomorphism, bisimilarity under the model's own labels, and
/// surpriselessness of the coupling.
///
/// Cross-checks: bisimilar implies surpriseless; a surpriseless coupling
/// must be bisimilar once the model carries the induced labels, and a
/// surprised one must not be bisimilar under its first-seen labels.
pub fn verify_learned(env: &TransitionSystem, x0: State, model: &TransitionSystem) -> Result<VerifyReport> {
    let i0 = model.initial().ok_or(Error::MissingInitial)?;
    if !model.is_labeled() {
        return Err(Error::Unlabeled);
    }
    let rooted = env.clone().with_initial(x0)?;
    let isomorphic = match are_isomorphic(&rooted, model, true) {
        Ok(found) => found.is_some(),
        Err(Error::NotConnected { .. }) => false,
        Err(e) => return Err(e),
    };
    let bisimilar = are_bisimilar(env, model, x0, i0)?;
    let prod = couple(env, model, x0, i0)?;
    let surpriseless = is_surpriseless(&prod);
    if bisimilar && !surpriseless {
        return Err(Error::TheoremViolation("bisimilar coupling is surprised"));
    }
    if surpriseless {
        if !are_bisimilar(env, &with_induced_labels(&prod)?, x0, i0)? {
            return Err(Error::TheoremViolation("surpriseless coupling is not bisimilar under induced labels"));
        }
    } else if are_bisimilar(env, &first_seen_labels(&prod)?, x0, i0)? {
        return Err(Error::TheoremViolation("surprised coupling is bisimilar"));
    }
    Ok(VerifyReport { isomorphic, bisimilar, surpriseless })
}
