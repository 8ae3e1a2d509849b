//! Environment generators: the line and cycle worlds, a discrete robot arm
//! on a torus with obstacles, and seeded random systems.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Partition, Result, State, StateMap, TransitionSystem};

/// Generators refuse to build systems with more states than this.
pub const MAX_GENERATED_STATES: usize = 100_000;

/// Rejection budget for [`make_random`].
pub const MAX_REJECTIONS: usize = 1_000_000;

/// `n` cells in a row, actions `L` and `R` that stop at the walls. Only
/// the left-most cell is `green`.
pub fn make_line(n: usize) -> Result<TransitionSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("line needs at least 2 cells, got {n}")));
    }
    let labels: Vec<&str> = (0..n).map(|s| if s == 0 { "green" } else { "white" }).collect();
    TransitionSystem::from_fn(n, ["L", "R"], |s, a| if a == 0 { s.saturating_sub(1) } else { (s + 1).min(n - 1) })?
        .with_labels(&labels)?
        .with_initial(0)
}

/// `n` cells on a ring, actions `CW` and `CCW`. Cell 0 gives a `click`.
pub fn make_cycle(n: usize) -> Result<TransitionSystem> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cycle needs at least 2 cells, got {n}")));
    }
    let labels: Vec<&str> = (0..n).map(|s| if s == 0 { "click" } else { "blank" }).collect();
    TransitionSystem::from_fn(n, ["CW", "CCW"], |s, a| if a == 0 { (s + 1) % n } else { (s + n - 1) % n })?
        .with_labels(&labels)?
        .with_initial(0)
}

/// A discrete arm with `joints` revolute joints, each with `resolution`
/// positions. Configurations in `obstacles` are forbidden; the sensor
/// clicks only at `click`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArmSpec {
    pub joints: usize,
    pub resolution: usize,
    pub obstacles: BTreeSet<Vec<usize>>,
    pub click: Vec<usize>,
}

impl ArmSpec {
    /// No obstacles, click at the all-zero configuration.
    pub fn free(joints: usize, resolution: usize) -> Self {
        ArmSpec { joints, resolution, obstacles: BTreeSet::new(), click: vec![0; joints] }
    }

    fn check_config(&self, c: &[usize]) -> Result<()> {
        if c.len() != self.joints || c.iter().any(|&p| p >= self.resolution) {
            return Err(Error::InvalidArgument(format!(
                "configuration {c:?} is not in (Z/{})^{}",
                self.resolution, self.joints
            )));
        }
        Ok(())
    }
}

/// Action names of an arm: `j0+`, `j0-`, `j1+`, ...
pub fn arm_action_names(joints: usize) -> Vec<String> {
    (0..joints).flat_map(|j| [format!("j{j}+"), format!("j{j}-")]).collect()
}

/// Builds the arm environment. States are the obstacle-free configurations
/// in lexicographic order (joint 0 most significant). A move into an
/// obstacle leaves the configuration unchanged. The initial state is the
/// click configuration.
pub fn make_arm(spec: &ArmSpec) -> Result<TransitionSystem> {
    if spec.joints == 0 {
        return Err(Error::InvalidArgument("arm needs at least one joint".into()));
    }
    if spec.resolution < 3 {
        return Err(Error::InvalidArgument(format!("resolution must be at least 3, got {}", spec.resolution)));
    }
    let total = spec
        .resolution
        .checked_pow(spec.joints as u32)
        .filter(|&t| t <= MAX_GENERATED_STATES)
        .ok_or(Error::TooLarge { what: "arm configuration space", size: usize::MAX, limit: MAX_GENERATED_STATES })?;
    spec.check_config(&spec.click)?;
    for o in &spec.obstacles {
        spec.check_config(o)?;
    }
    if spec.obstacles.contains(&spec.click) {
        return Err(Error::InvalidArgument(format!("click configuration {:?} is an obstacle", spec.click)));
    }

    let (r, n) = (spec.resolution, spec.joints);
    let encode = |c: &[usize]| c.iter().fold(0, |acc, &p| acc * r + p);
    let decode = |mut code: usize| {
        let mut c = vec![0; n];
        for j in (0..n).rev() {
            c[j] = code % r;
            code /= r;
        }
        c
    };
    let blocked: BTreeSet<usize> = spec.obstacles.iter().map(|o| encode(o)).collect();
    let mut state_of = vec![usize::MAX; total];
    let mut configs = Vec::new();
    for (code, slot) in state_of.iter_mut().enumerate() {
        if !blocked.contains(&code) {
            *slot = configs.len();
            configs.push(code);
        }
    }

    let m = 2 * n;
    let mut delta = Vec::with_capacity(configs.len() * m);
    for &code in &configs {
        let c = decode(code);
        for a in 0..m {
            let (j, up) = (a / 2, a % 2 == 0);
            let mut moved = c.clone();
            moved[j] = if up { (c[j] + 1) % r } else { (c[j] + r - 1) % r };
            let target = state_of[encode(&moved)];
            delta.push(if target == usize::MAX { state_of[code] } else { target });
        }
    }

    let click = state_of[encode(&spec.click)];
    let labels: Vec<&str> = (0..configs.len()).map(|s| if s == click { "click" } else { "blank" }).collect();
    let sys = TransitionSystem::new(configs.len(), arm_action_names(n), delta)?
        .with_labels(&labels)?
        .with_initial(click)?;

    // moves are reversible, so reachability from the click decides connectivity
    let seen = sys.reachable_from(click);
    if let Some(s) = seen.iter().position(|&r| !r) {
        return Err(Error::DisconnectedFreeSpace { reached: spec.click.clone(), unreached: decode(configs[s]) });
    }
    Ok(sys)
}

/// Configuration of an arm state, inverse of the state numbering in [`make_arm`].
pub fn arm_configuration(spec: &ArmSpec, state: State) -> Option<Vec<usize>> {
    let r = spec.resolution;
    let total = r.checked_pow(spec.joints as u32)?;
    let mut remaining = state;
    for code in 0..total {
        let mut c = vec![0; spec.joints];
        let mut x = code;
        for j in (0..spec.joints).rev() {
            c[j] = x % r;
            x /= r;
        }
        if spec.obstacles.contains(&c) {
            continue;
        }
        if remaining == 0 {
            return Some(c);
        }
        remaining -= 1;
    }
    None
}

/// The splitmix64 generator: a 64-bit counter passed through a mixing
/// function. Small, portable and reproducible across implementations.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Value in `0..bound` (by modulo reduction). `bound` must be positive.
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            items.swap(i, self.below(i + 1));
        }
    }
}

/// One random minimally distinguishing self-map of `0..n`: a random
/// permutation in which a random subset of states is redirected to itself.
/// Every minimally distinguishing map arises this way.
fn min_dist_column(n: usize, rng: &mut SplitMix64) -> Vec<State> {
    let mut perm: Vec<State> = (0..n).collect();
    rng.shuffle(&mut perm);
    (0..n).map(|s| if rng.coin() { s } else { perm[s] }).collect()
}

/// Seeded random system with `n` states and `m` actions.
///
/// Tables are redrawn until strongly connected. With `require_min_dist`
/// each action is drawn from the minimally distinguishing maps directly.
/// Labels: `pointed` gives state 0 the unique label `p` and all others `o`;
/// otherwise each state gets `a` or `b` uniformly. The initial state is 0.
pub fn make_random(n: usize, m: usize, seed: u64, require_min_dist: bool, pointed: bool) -> Result<TransitionSystem> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("random systems need n >= 1 and m >= 1".into()));
    }
    if n > MAX_GENERATED_STATES {
        return Err(Error::TooLarge { what: "state count", size: n, limit: MAX_GENERATED_STATES });
    }
    let names: Vec<String> = (0..m).map(|a| format!("a{a}")).collect();
    let mut rng = SplitMix64::new(seed);
    for _ in 0..MAX_REJECTIONS {
        let columns: Vec<Vec<State>> = (0..m)
            .map(|_| if require_min_dist { min_dist_column(n, &mut rng) } else { (0..n).map(|_| rng.below(n)).collect() })
            .collect();
        let sys = TransitionSystem::from_fn(n, names.iter().cloned(), |s, a| columns[a][s])?;
        if !sys.is_strongly_connected() {
            continue;
        }
        debug_assert!(!require_min_dist || sys.is_minimally_distinguishing());
        let labels: Vec<&str> = if pointed {
            (0..n).map(|s| if s == 0 { "p" } else { "o" }).collect()
        } else {
            (0..n).map(|_| if rng.coin() { "b" } else { "a" }).collect()
        };
        return sys.with_labels(&labels)?.with_initial(0);
    }
    Err(Error::GenerationFailed(MAX_REJECTIONS))
}

/// Random partition of `0..n` into at most `1 + rng.below(n)` blocks.
pub fn random_partition(n: usize, rng: &mut SplitMix64) -> Partition {
    let k = 1 + rng.below(n.max(1));
    let keys: Vec<usize> = (0..n).map(|_| rng.below(k)).collect();
    Partition::from_keys(&keys)
}

/// Random cover of `base` by state splitting: every base state gets between
/// 1 and `max_copies` copies, and each transition of a copy goes to a random
/// copy of the base successor. Copies inherit labels; the initial state is the
/// first copy of the base initial state. Returns the cover and the projection,
/// which is a surjective homomorphism onto `base`.
pub fn random_cover(base: &TransitionSystem, max_copies: usize, rng: &mut SplitMix64) -> Result<(TransitionSystem, StateMap)> {
    if max_copies == 0 {
        return Err(Error::InvalidArgument("a cover needs at least one copy per state".into()));
    }
    let copies: Vec<usize> = (0..base.n_states()).map(|_| 1 + rng.below(max_copies)).collect();
    let mut first = Vec::with_capacity(base.n_states());
    let mut proj = Vec::new();
    for (t, &c) in copies.iter().enumerate() {
        first.push(proj.len());
        proj.extend(core::iter::repeat_n(t, c));
    }
    if proj.len() > MAX_GENERATED_STATES {
        return Err(Error::TooLarge { what: "state count", size: proj.len(), limit: MAX_GENERATED_STATES });
    }
    let m = base.n_actions();
    let mut delta = Vec::with_capacity(proj.len() * m);
    for &t in &proj {
        for a in 0..m {
            let u = base.step(t, a);
            delta.push(first[u] + rng.below(copies[u]));
        }
    }
    let mut cover = TransitionSystem::new(proj.len(), base.action_names().iter().cloned(), delta)?;
    if let Some(names) = base.label_name_list() {
        let labels: Vec<&str> = proj.iter().map(|&t| names[t].as_str()).collect();
        cover = cover.with_labels(&labels)?;
    }
    if let Some(x0) = base.initial() {
        cover = cover.with_initial(first[x0])?;
    }
    let map = StateMap::new(proj, base.n_states())?;
    Ok((cover, map))
}

/// Relabels every state of `sys` with the same label name.
pub fn uniform_labels(sys: TransitionSystem, name: &str) -> Result<TransitionSystem> {
    let labels = vec![name; sys.n_states()];
    sys.with_labels(&labels)
}

/// Breadth-first distances from `from`; `usize::MAX` marks unreachable states.
pub fn distances_from(sys: &TransitionSystem, from: State) -> Vec<usize> {
    let mut dist = vec![usize::MAX; sys.n_states()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(s) = queue.pop_front() {
        for &t in sys.row(s) {
            if dist[t] == usize::MAX {
                dist[t] = dist[s] + 1;
                queue.push_back(t);
            }
        }
    }
    dist
}
