//! Equivalence relations on state sets and the algebra around them:
//! generated closures, pullbacks and pushforwards along state maps,
//! sufficiency (congruence), the coarsest sufficient refinement and
//! quotient systems.
//!
//! All partitions are kept in canonical numbering (blocks ordered by their
//! smallest member), so two partitions describe the same relation iff they
//! compare equal.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Action, Error, Result, State, StateMap, TransitionSystem};

/// An equivalence relation on `0..n_states`, stored as a block id per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    block_of: Vec<usize>,
    n_blocks: usize,
}

impl Partition {
    /// Builds a partition from arbitrary per-state block keys; states with
    /// equal keys share a block.
    pub fn from_keys<K: Ord + Clone>(keys: &[K]) -> Self {
        let mut ids: BTreeMap<K, usize> = BTreeMap::new();
        let block_of = keys
            .iter()
            .map(|k| {
                let next = ids.len();
                *ids.entry(k.clone()).or_insert(next)
            })
            .collect();
        Partition { block_of, n_blocks: ids.len() }
    }

    /// Builds a partition from explicit blocks. Every state in `0..n` must
    /// occur in exactly one block; block order does not matter.
    pub fn from_blocks(n: usize, blocks: &[Vec<State>]) -> Result<Self> {
        let mut keys = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidArgument("empty block".into()));
            }
            for &s in block {
                if s >= n {
                    return Err(Error::StateOutOfRange { state: s, n_states: n });
                }
                if keys[s] != usize::MAX {
                    return Err(Error::InvalidArgument(alloc::format!("state {s} occurs in two blocks")));
                }
                keys[s] = b;
            }
        }
        if let Some(s) = keys.iter().position(|&k| k == usize::MAX) {
            return Err(Error::InvalidArgument(alloc::format!("state {s} is in no block")));
        }
        Ok(Self::from_keys(&keys))
    }

    /// Wraps block ids that are already canonical (restricted growth
    /// string). Debug-asserts the invariant.
    fn from_canonical(block_of: Vec<usize>) -> Self {
        let n_blocks = block_of.iter().max().map_or(0, |&m| m + 1);
        let p = Partition { block_of, n_blocks };
        debug_assert!(p.is_canonical());
        p
    }

    fn is_canonical(&self) -> bool {
        let mut next = 0;
        self.block_of.iter().all(|&b| {
            if b == next {
                next += 1;
                true
            } else {
                b < next
            }
        }) && next == self.n_blocks
    }

    pub fn identity(n: usize) -> Self {
        Partition { block_of: (0..n).collect(), n_blocks: n }
    }

    pub fn single_block(n: usize) -> Self {
        Partition { block_of: vec![0; n], n_blocks: usize::from(n > 0) }
    }

    pub fn n_states(&self) -> usize {
        self.block_of.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    #[inline]
    pub fn block_of(&self, s: State) -> usize {
        self.block_of[s]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.block_of
    }

    #[inline]
    pub fn same_block(&self, s: State, t: State) -> bool {
        self.block_of[s] == self.block_of[t]
    }

    /// Members of every block, each sorted ascending, blocks in canonical order.
    pub fn blocks(&self) -> Vec<Vec<State>> {
        let mut blocks = vec![Vec::new(); self.n_blocks];
        for (s, &b) in self.block_of.iter().enumerate() {
            blocks[b].push(s);
        }
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_blocks];
        for &b in &self.block_of {
            sizes[b] += 1;
        }
        sizes
    }

    pub fn is_identity(&self) -> bool {
        self.n_blocks == self.block_of.len()
    }

    /// True iff every block of `self` lies inside one block of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> Result<bool> {
        check_same_size(self, coarse)?;
        let mut image = vec![usize::MAX; self.n_blocks];
        for (s, &b) in self.block_of.iter().enumerate() {
            let c = coarse.block_of[s];
            if image[b] == usize::MAX {
                image[b] = c;
            } else if image[b] != c {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Intersection of two relations: the coarsest common refinement.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        check_same_size(self, other)?;
        let keys: Vec<(usize, usize)> = self.block_of.iter().copied().zip(other.block_of.iter().copied()).collect();
        Ok(Partition::from_keys(&keys))
    }

    /// The equivalence relation generated by the union of `parts`.
    pub fn join(n: usize, parts: &[&Partition]) -> Result<Partition> {
        let mut uf = UnionFind::new(n);
        for p in parts {
            if p.n_states() != n {
                return Err(Error::SizeMismatch { expected: n, found: p.n_states() });
            }
            let mut first = vec![usize::MAX; p.n_blocks];
            for (s, &b) in p.block_of.iter().enumerate() {
                if first[b] == usize::MAX {
                    first[b] = s;
                } else {
                    uf.union(first[b], s);
                }
            }
        }
        Ok(uf.into_partition())
    }

    /// Does the relation contain the pair `(s, t)`?
    pub fn contains(&self, s: State, t: State) -> bool {
        self.same_block(s, t)
    }
}

fn check_same_size(a: &Partition, b: &Partition) -> Result<()> {
    if a.n_states() != b.n_states() {
        return Err(Error::SizeMismatch { expected: a.n_states(), found: b.n_states() });
    }
    Ok(())
}

fn check_partition_for(sys: &TransitionSystem, e: &Partition) -> Result<()> {
    if e.n_states() != sys.n_states() {
        return Err(Error::SizeMismatch { expected: sys.n_states(), found: e.n_states() });
    }
    Ok(())
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    fn into_partition(mut self) -> Partition {
        let roots: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        Partition::from_keys(&roots)
    }
}

/// `E_h` for the sensor labels: states are equivalent iff they carry the same label.
pub fn partition_from_labels(sys: &TransitionSystem) -> Result<Partition> {
    let labels = sys.labels().ok_or(Error::Unlabeled)?;
    Ok(Partition::from_keys(labels))
}

/// Indices of the singleton blocks. The relation is pointed iff this is non-empty.
pub fn pointed_classes(part: &Partition) -> Vec<usize> {
    part.block_sizes().iter().enumerate().filter(|(_, &n)| n == 1).map(|(b, _)| b).collect()
}

/// The finest equivalence relation on `0..n` containing all `pairs`.
pub fn generated_closure(n: usize, pairs: &[(State, State)]) -> Result<Partition> {
    let mut uf = UnionFind::new(n);
    for &(s, t) in pairs {
        for x in [s, t] {
            if x >= n {
                return Err(Error::StateOutOfRange { state: x, n_states: n });
            }
        }
        uf.union(s, t);
    }
    Ok(uf.into_partition())
}

/// `m⁻¹(e1)`: `s ~ s'` iff `m(s)` and `m(s')` are `e1`-equivalent.
pub fn pullback(m: &StateMap, e1: &Partition) -> Result<Partition> {
    if e1.n_states() != m.target_size() {
        return Err(Error::SizeMismatch { expected: m.target_size(), found: e1.n_states() });
    }
    let keys: Vec<usize> = m.as_slice().iter().map(|&t| e1.block_of(t)).collect();
    Ok(Partition::from_keys(&keys))
}

/// The kernel `E_m` of a map: states with the same image.
pub fn kernel(m: &StateMap) -> Partition {
    Partition::from_keys(m.as_slice())
}

/// `m(e)`, the image relation on the target. Requires `m` surjective and
/// `e` closed under `m` (the kernel of `m` refines `e`); both are checked.
pub fn pushforward(m: &StateMap, e: &Partition) -> Result<Partition> {
    if e.n_states() != m.source_size() {
        return Err(Error::SizeMismatch { expected: m.source_size(), found: e.n_states() });
    }
    if let Some(missing) = m.first_missing() {
        return Err(Error::NotSurjective { missing });
    }
    let mut witness = vec![usize::MAX; m.target_size()];
    for s in 0..m.source_size() {
        let t = m.apply(s);
        let w = witness[t];
        if w == usize::MAX {
            witness[t] = s;
        } else if !e.same_block(w, s) {
            return Err(Error::NotMapClosed { first: w, second: s });
        }
    }
    let keys: Vec<usize> = witness.iter().map(|&s| e.block_of(s)).collect();
    Ok(Partition::from_keys(&keys))
}

pub fn is_refinement(fine: &Partition, coarse: &Partition) -> Result<bool> {
    fine.refines(coarse)
}

/// A pair of equivalent states split by one action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SufficiencyViolation {
    pub first: State,
    pub second: State,
    pub action: Action,
}

/// The lexicographically smallest `(s, s', a)` with `s < s'` equivalent but
/// `step(s, a)`, `step(s', a)` in different blocks.
pub fn sufficiency_violation(sys: &TransitionSystem, e: &Partition) -> Result<Option<SufficiencyViolation>> {
    check_partition_for(sys, e)?;
    // The smallest violating pair always starts at its block minimum: if
    // (s, s') is split and r < s is the block minimum, r is split from s or s'.
    let mut rep = vec![usize::MAX; e.n_blocks()];
    let mut best: Option<SufficiencyViolation> = None;
    for s in 0..sys.n_states() {
        let b = e.block_of(s);
        if rep[b] == usize::MAX {
            rep[b] = s;
            continue;
        }
        let r = rep[b];
        if best.is_some_and(|v| v.first <= r) {
            continue;
        }
        if let Some(a) = (0..sys.n_actions()).find(|&a| !e.same_block(sys.step(r, a), sys.step(s, a))) {
            best = Some(SufficiencyViolation { first: r, second: s, action: a });
        }
    }
    Ok(best)
}

pub fn is_sufficient(sys: &TransitionSystem, e: &Partition) -> Result<bool> {
    Ok(sufficiency_violation(sys, e)?.is_none())
}

/// The coarsest sufficient refinement of `e`.
///
/// Moore-style refinement: each pass splits every block by the vector of
/// successor blocks; the fixpoint is reached when a pass splits nothing.
pub fn msr(sys: &TransitionSystem, e: &Partition) -> Result<Partition> {
    check_partition_for(sys, e)?;
    let m = sys.n_actions();
    let mut current = e.clone();
    let mut key = Vec::with_capacity(m + 1);
    loop {
        let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut block_of = Vec::with_capacity(sys.n_states());
        for s in 0..sys.n_states() {
            key.clear();
            key.push(current.block_of(s));
            key.extend(sys.row(s).iter().map(|&t| current.block_of(t)));
            let next = ids.len();
            let id = match ids.get(&key) {
                Some(&id) => id,
                None => {
                    ids.insert(key.clone(), next);
                    next
                }
            };
            block_of.push(id);
        }
        let refined = Partition::from_canonical(block_of);
        if refined.n_blocks() == current.n_blocks() {
            return Ok(refined);
        }
        current = refined;
    }
}

/// Largest state count accepted by the exhaustive routines (Bell(8) = 4140).
pub const BRUTEFORCE_LIMIT: usize = 8;

/// Calls `visit` on every partition of `0..n`, in restricted-growth order.
pub fn for_each_partition(n: usize, mut visit: impl FnMut(&Partition)) {
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, visit: &mut dyn FnMut(&Partition)) {
        if i == rgs.len() {
            visit(&Partition::from_canonical(rgs.clone()));
            return;
        }
        for b in 0..=max {
            rgs[i] = b;
            rec(i + 1, if b == max { max + 1 } else { max }, rgs, visit);
        }
    }
    if n == 0 {
        visit(&Partition::identity(0));
        return;
    }
    let mut rgs = vec![0; n];
    rec(1, 1, &mut rgs, &mut visit);
}

/// Every sufficient refinement of `e`, by exhaustive enumeration.
pub fn sufficient_refinements(sys: &TransitionSystem, e: &Partition) -> Result<Vec<Partition>> {
    check_partition_for(sys, e)?;
    if sys.n_states() > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge { what: "state count", size: sys.n_states(), limit: BRUTEFORCE_LIMIT });
    }
    let mut found = Vec::new();
    for_each_partition(sys.n_states(), |p| {
        if p.refines(e).unwrap_or(false) && is_sufficient(sys, p).unwrap_or(false) {
            found.push(p.clone());
        }
    });
    Ok(found)
}

/// Exhaustive oracle for [`msr`]: the sufficient refinement of `e` with the
/// fewest blocks, after checking that every other sufficient refinement
/// refines it (so it is the unique greatest one).
pub fn msr_bruteforce(sys: &TransitionSystem, e: &Partition) -> Result<Partition> {
    let candidates = sufficient_refinements(sys, e)?;
    let best = candidates
        .iter()
        .min_by_key(|p| p.n_blocks())
        .cloned()
        .ok_or(Error::TheoremViolation("no sufficient refinement found; the identity always is one"))?;
    for c in &candidates {
        if !c.refines(&best)? {
            return Err(Error::TheoremViolation("coarsest sufficient refinement is not unique"));
        }
    }
    Ok(best)
}

/// The quotient system `sys / e` and the quotient map.
///
/// `e` must be sufficient. If `sys` is labeled, `e` must not join states
/// with different labels, so the quotient label is well-defined.
pub fn quotient(sys: &TransitionSystem, e: &Partition) -> Result<(TransitionSystem, StateMap)> {
    if let Some(v) = sufficiency_violation(sys, e)? {
        return Err(Error::NotSufficient { first: v.first, second: v.second, action: v.action });
    }
    let reps: Vec<State> = e.blocks().iter().map(|b| b[0]).collect();
    let mut q = TransitionSystem::from_fn(e.n_blocks(), sys.action_names().iter().cloned(), |b, a| {
        e.block_of(sys.step(reps[b], a))
    })?;
    if let Some(labels) = sys.labels() {
        for s in 0..sys.n_states() {
            let r = reps[e.block_of(s)];
            if labels[r] != labels[s] {
                return Err(Error::LabelsNotRespected { first: r, second: s });
            }
        }
        let names: Vec<&str> = reps.iter().map(|&r| sys.label_name(r).unwrap_or_default()).collect();
        q = q.with_labels(&names)?;
    }
    if let Some(x0) = sys.initial() {
        q = q.with_initial(e.block_of(x0))?;
    }
    let map = StateMap::new(e.as_slice().to_vec(), e.n_blocks())?;
    Ok((q, map))
}
