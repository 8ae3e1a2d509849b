//! The acceptance suite: ten end-to-end checks, each with a time budget.
//!
//! Every criterion derives its random instances from the suite seed, so a
//! run is reproducible. Output order is fixed; timings are reported
//! separately from the verdict text.

use std::time::{Duration, Instant};

use dts_core::coupling::{
    are_bisimilar, couple, first_seen_labels, has_nontrivial_autobisimulation, is_surpriseless, with_induced_labels,
};
use dts_core::envs::{make_arm, make_cycle, make_line, make_random, random_cover, random_partition, uniform_labels, ArmSpec, SplitMix64};
use dts_core::equiv::{
    is_sufficient, kernel, msr, msr_bruteforce, partition_from_labels, pointed_classes, pullback, pushforward, quotient,
    sufficient_refinements,
};
use dts_core::learner::{learn_env, verify_learned, Convergence, LearnReport};
use dts_core::system::are_isomorphic;
use dts_core::{Partition, Result, TransitionSystem};

/// The verdict of one criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub limit: Duration,
}

impl Outcome {
    /// `PASS  3  robot arm  (detail)`, without timing.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{verdict} {:>2}  {:<32} {}", self.id, self.name, self.detail)
    }
}

/// Total budget for the whole suite.
pub const SUITE_LIMIT: Duration = Duration::from_secs(180);

type Check = fn(u64) -> Result<(bool, String)>;

const CRITERIA: [(&str, u64, Check); 10] = [
    ("line world end-to-end", 1, line_world),
    ("ring world end-to-end", 1, ring_world),
    ("robot arm", 60, robot_arm),
    ("msr against exhaustive oracle", 30, msr_oracle),
    ("msr commutes with epimorphisms", 30, commute),
    ("pointed systems are chiral", 30, pointed),
    ("surpriseless iff bisimilar", 30, surpriseless_iff_bisimilar),
    ("symmetry two ways", 30, symmetry),
    ("symmetric ring negative control", 1, negative_control),
    ("refinement lemma suite", 30, union_suite),
];

pub fn n_criteria() -> usize {
    CRITERIA.len()
}

/// Runs criterion `id` (1-based). A criterion passes only if its check
/// holds and it finishes within its budget.
pub fn run_criterion(id: usize, seed: u64) -> Outcome {
    let (name, secs, check) = CRITERIA[id - 1];
    let limit = Duration::from_secs(secs);
    let start = Instant::now();
    let result = check(seed.wrapping_add(id as u64));
    let elapsed = start.elapsed();
    let (ok, detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let detail = if ok && elapsed > limit { format!("{detail}; over the {secs} s budget") } else { detail };
    Outcome { id, name, passed: ok && elapsed <= limit, detail, elapsed, limit }
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    (1..=CRITERIA.len()).map(|id| run_criterion(id, seed)).collect()
}

fn first_depth(report: &LearnReport) -> Option<usize> {
    match report.convergence {
        Convergence::Stable { first_depth, .. } => Some(first_depth),
        Convergence::Exhausted => None,
    }
}

/// Learns `env` from its initial state and checks the three verdicts.
fn learn_and_verify(env: &TransitionSystem, max_depth: usize, want_iso: bool, want_states: usize) -> Result<(bool, String)> {
    let x0 = env.initial().unwrap_or(0);
    let report = learn_env(env, x0, max_depth)?;
    let Some(model) = report.model.as_ref() else {
        return Ok((false, "no model built".into()));
    };
    let v = verify_learned(env, x0, model)?;
    let depth = first_depth(&report);
    let ok = report.converged()
        && model.n_states() == want_states
        && v.isomorphic == want_iso
        && v.bisimilar
        && v.surpriseless;
    let detail = format!(
        "{:?}, {} states, iso={} bisim={} surpriseless={}, {} queries",
        report.convergence,
        model.n_states(),
        v.isomorphic,
        v.bisimilar,
        v.surpriseless,
        report.stats.queries
    );
    Ok((ok && depth.is_some(), detail))
}

fn line_world(_seed: u64) -> Result<(bool, String)> {
    let (ok, detail) = learn_and_verify(&make_line(4)?, 16, true, 4)?;
    let report = learn_env(&make_line(4)?, 0, 16)?;
    Ok((ok && first_depth(&report).is_some_and(|d| d <= 8), detail))
}

fn ring_world(_seed: u64) -> Result<(bool, String)> {
    let (ok, detail) = learn_and_verify(&make_cycle(4)?, 16, true, 4)?;
    let report = learn_env(&make_cycle(4)?, 0, 16)?;
    Ok((ok && first_depth(&report).is_some_and(|d| d <= 8), detail))
}

/// Two joints at resolution 6 with obstacles at (1,1) and (4,4).
pub fn reference_arm() -> ArmSpec {
    let mut spec = ArmSpec::free(2, 6);
    spec.obstacles.insert(vec![1, 1]);
    spec.obstacles.insert(vec![4, 4]);
    spec
}

fn robot_arm(_seed: u64) -> Result<(bool, String)> {
    let arm = make_arm(&reference_arm())?;
    let sensor = partition_from_labels(&arm)?;
    let click = arm.initial().unwrap_or(0);
    let pointed = pointed_classes(&sensor).contains(&sensor.block_of(click));
    let shape = arm.n_states() == 34 && arm.is_strongly_connected() && arm.is_minimally_distinguishing() && pointed;
    let (ok, detail) = learn_and_verify(&arm, 2 * 34, true, 34)?;
    Ok((shape && ok, detail))
}

fn msr_oracle(seed: u64) -> Result<(bool, String)> {
    let mut rng = SplitMix64::new(seed);
    let mut refinements = 0;
    for _ in 0..200 {
        let n = 1 + rng.below(6);
        let m = 1 + rng.below(3);
        let sys = make_random(n, m, rng.next_u64(), false, false)?;
        let e = random_partition(n, &mut rng);
        let fast = msr(&sys, &e)?;
        if fast != msr_bruteforce(&sys, &e)? {
            return Ok((false, format!("mismatch on n={n} m={m} e={:?}", e.as_slice())));
        }
        for r in sufficient_refinements(&sys, &e)? {
            refinements += 1;
            if !r.refines(&fast)? {
                return Ok((false, format!("sufficient refinement {:?} escapes msr", r.as_slice())));
            }
        }
    }
    Ok((true, format!("200 systems, {refinements} sufficient refinements checked")))
}

fn commute(seed: u64) -> Result<(bool, String)> {
    let mut rng = SplitMix64::new(seed);
    let mut cover_states = 0;
    for _ in 0..100 {
        let n = 1 + rng.below(6);
        let m = 1 + rng.below(3);
        let base = make_random(n, m, rng.next_u64(), false, false)?;
        let (cover, h) = random_cover(&base, 3, &mut rng)?;
        cover_states += cover.n_states();
        let e1 = random_partition(n, &mut rng);
        let lhs = msr(&cover, &pullback(&h, &e1)?)?;
        let dst = msr(&base, &e1)?;
        if lhs != pullback(&h, &dst)? {
            return Ok((false, format!("msr does not commute on base n={n} m={m}")));
        }
        let (q_src, _) = quotient(&cover.without_labels(), &lhs)?;
        let (q_dst, _) = quotient(&base.without_labels(), &dst)?;
        if are_isomorphic(&q_src, &q_dst, true)?.is_none() {
            return Ok((false, format!("quotients differ on base n={n} m={m}")));
        }
    }
    Ok((true, format!("100 covers, {cover_states} cover states in total")))
}

fn pointed(seed: u64) -> Result<(bool, String)> {
    let mut rng = SplitMix64::new(seed);
    for _ in 0..100 {
        let n = 1 + rng.below(8);
        let m = 1 + rng.below(3);
        let sys = make_random(n, m, rng.next_u64(), true, true)?;
        if !sys.is_strongly_connected() || !sys.is_minimally_distinguishing() {
            return Ok((false, "generator broke its contract".into()));
        }
        let lone = rng.below(n);
        let keys: Vec<usize> = (0..n).map(|s| if s == lone { usize::MAX } else { rng.below(3) }).collect();
        for e in [partition_from_labels(&sys)?, Partition::from_keys(&keys)] {
            if !msr(&sys, &e)?.is_identity() {
                return Ok((false, format!("msr of a pointed relation is not the identity (n={n} m={m})")));
            }
        }
    }
    Ok((true, "100 systems, sensor and random pointed relations".into()))
}

fn surpriseless_iff_bisimilar(seed: u64) -> Result<(bool, String)> {
    let mut rng = SplitMix64::new(seed);
    let (mut calm, mut surprised) = (0, 0);
    for i in 0..100 {
        let n = 1 + rng.below(6);
        let m = 1 + rng.below(3);
        let env = make_random(n, m, rng.next_u64(), false, false)?;
        let x0 = rng.below(n);
        let (internal, i0) = match i % 3 {
            0 => (TransitionSystem::new(1, env.action_names().iter().cloned(), vec![0; m])?, 0),
            1 => {
                let Some(model) = learn_env(&env, x0, 2 * n + 2)?.model else {
                    return Ok((false, format!("no model learned on instance {i}")));
                };
                let i0 = model.initial().unwrap_or(0);
                (model.without_labels(), i0)
            }
            _ => {
                let e = msr(&env, &random_partition(n, &mut rng))?;
                let (q, _) = quotient(&env.clone().without_labels(), &e)?;
                let i0 = rng.below(q.n_states());
                (q, i0)
            }
        };
        let prod = couple(&env, &internal, x0, i0)?;
        let calm_here = is_surpriseless(&prod);
        let labeled = if calm_here { with_induced_labels(&prod)? } else { first_seen_labels(&prod)? };
        if calm_here != are_bisimilar(&env, &labeled, x0, i0)? {
            return Ok((false, format!("disagreement on instance {i}")));
        }
        if calm_here {
            calm += 1;
        } else {
            surprised += 1;
        }
    }
    Ok((true, format!("100 pairs: {calm} surpriseless and bisimilar, {surprised} surprised and not")))
}

fn symmetry(seed: u64) -> Result<(bool, String)> {
    let mut rng = SplitMix64::new(seed);
    let (mut symmetric, mut chiral) = (0, 0);
    for i in 0..100 {
        let n = 1 + rng.below(6);
        let m = 1 + rng.below(3);
        // every other system is a cover, which tends to have symmetry
        let sys = if i % 2 == 0 {
            make_random(n, m, rng.next_u64(), false, false)?
        } else {
            random_cover(&make_random(n, m, rng.next_u64(), false, false)?, 2, &mut rng)?.0
        };
        // errors if the two routes disagree
        if has_nontrivial_autobisimulation(&sys)? {
            symmetric += 1;
        } else {
            chiral += 1;
        }
    }
    let both = symmetric > 0 && chiral > 0;
    Ok((both, format!("100 systems: {symmetric} symmetric, {chiral} chiral, both routes agree")))
}

fn negative_control(_seed: u64) -> Result<(bool, String)> {
    let ring = uniform_labels(make_cycle(4)?, "white")?;
    learn_and_verify(&ring, 16, false, 1)
}

/// Checks refinement lemma item `item` (1 to 11) on one random instance.
pub fn union_item(item: usize, seed: u64) -> Result<bool> {
    let mut rng = SplitMix64::new(seed);
    let n = 1 + rng.below(5);
    let m = 1 + rng.below(3);
    let base = make_random(n, m, rng.next_u64(), false, false)?;
    let (src, h) = random_cover(&base, 3, &mut rng)?;
    let n0 = src.n_states();
    let kh = kernel(&h);
    let k = 1 + rng.below(3);
    let es: Vec<Partition> = (0..k).map(|_| random_partition(n0, &mut rng)).collect();
    let join = |parts: &[Partition]| Partition::join(n0, &parts.iter().collect::<Vec<_>>());
    let closure = join(&es)?;
    let e1 = random_partition(n, &mut rng);
    let pulled = pullback(&h, &e1)?;
    let big = random_partition(n0, &mut rng);
    Ok(match item {
        1 => es.iter().map(|e| e.refines(&closure)).collect::<Result<Vec<_>>>()?.into_iter().all(|b| b),
        2 => {
            let suff = es.iter().map(|e| msr(&src, e)).collect::<Result<Vec<_>>>()?;
            is_sufficient(&src, &join(&suff)?)?
        }
        3 => {
            let below = es.iter().map(|e| e.meet(&big)).collect::<Result<Vec<_>>>()?;
            join(&below)?.refines(&big)?
        }
        4 => {
            let mut small = big;
            for e in &es {
                small = small.meet(e)?;
            }
            small.refines(&closure)?
        }
        5 => {
            let closed = es.iter().map(|e| Partition::join(n0, &[e, &kh])).collect::<Result<Vec<_>>>()?;
            kh.refines(&join(&closed)?)?
        }
        6 => kh.refines(&pulled)?,
        7 => {
            let e = Partition::join(n0, &[&es[0], &kh])?;
            let image = pushforward(&h, &e)?;
            (0..n0).all(|s| (0..n0).all(|t| image.same_block(h.apply(s), h.apply(t)) == e.same_block(s, t)))
        }
        8 => {
            let inside = Partition::join(n0, &[&kh, &big.meet(&pulled)?])?;
            pushforward(&h, &inside)?.refines(&e1)?
        }
        9 => {
            let closed = Partition::join(n0, &[&kh, &msr(&src, &es[0])?])?;
            is_sufficient(&base, &pushforward(&h, &closed)?)?
        }
        10 => is_sufficient(&src, &pullback(&h, &msr(&base, &e1)?)?)?,
        11 => is_sufficient(&src, &kh)?,
        _ => return Err(dts_core::Error::InvalidArgument(format!("no lemma item {item}"))),
    })
}

fn union_suite(seed: u64) -> Result<(bool, String)> {
    let mut rng = SplitMix64::new(seed);
    let mut failed = Vec::new();
    for item in 1..=11 {
        for _ in 0..100 {
            if !union_item(item, rng.next_u64())? {
                failed.push(item);
                break;
            }
        }
    }
    if failed.is_empty() {
        Ok((true, "11 items x 100 instances".into()))
    } else {
        Ok((false, format!("items failing: {failed:?}")))
    }
}
