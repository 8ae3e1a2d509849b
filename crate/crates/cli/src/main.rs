//! `dts`: command-line front end. Exit status 0 means success (or the
//! property holds), 1 means the property is false, 2 means an error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use dts_cli::{dot, format, suite};
use dts_core::coupling::{are_bisimilar, couple, surprise_witness};
use dts_core::envs::{self, ArmSpec};
use dts_core::equiv::{msr, msr_bruteforce, partition_from_labels, pointed_classes, quotient, BRUTEFORCE_LIMIT};
use dts_core::learner::{learn_from_depth, Convergence, EnvOracle, RoundOutcome};
use dts_core::system::are_isomorphic;
use dts_core::{Partition, TransitionSystem};

#[derive(Parser)]
#[command(name = "dts", version, about = "Deterministic transition systems: refinement, coupling and learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvKind {
    Line,
    Cycle,
    Arm,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Prop {
    StronglyConnected,
    MinDist,
    Pointed,
    Chiral,
}

#[derive(Clone, Copy, ValueEnum)]
enum Relation {
    Labels,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an environment.
    Gen {
        #[arg(long, value_enum)]
        env: EnvKind,
        /// Number of states (line, cycle, random).
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        joints: usize,
        #[arg(long, default_value_t = 6)]
        resolution: usize,
        /// Obstacle file: one configuration per line.
        #[arg(long)]
        obstacles: Option<PathBuf>,
        /// Click configuration, comma separated (default all zeros).
        #[arg(long, value_delimiter = ',')]
        click: Option<Vec<usize>>,
        /// Number of actions (random).
        #[arg(long, default_value_t = 2)]
        actions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        min_dist: bool,
        #[arg(long)]
        pointed: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide a property of a system.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        prop: Prop,
    },
    /// Coarsest sufficient refinement of the sensor partition or a given one.
    Msr {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, conflicts_with = "partition")]
        relation: Option<Relation>,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cross-check against exhaustive search (small systems only).
        #[arg(long)]
        oracle: bool,
    },
    /// Quotient of a system by a sufficient partition.
    Quotient {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide isomorphism of two systems.
    Iso {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Require the initial states to correspond.
        #[arg(long)]
        anchored: bool,
    },
    /// Decide bisimilarity of the initial states of an environment and an internal system.
    Bisim {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        internal: PathBuf,
    },
    /// Couple an internal system to an environment and look for a surprise.
    Surprise {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        internal: PathBuf,
    },
    /// Learn a model of an environment from its sensor readings.
    Learn {
        #[arg(long)]
        env: PathBuf,
        /// Start state (default: the file's initial state, else 0).
        #[arg(long)]
        x0: Option<usize>,
        #[arg(long)]
        max_depth: usize,
        /// Only accept stability from this depth on; exact once it is at least twice the state count.
        #[arg(long, default_value_t = 2)]
        min_depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a system as a Graphviz graph.
    Dot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn read_system(path: &Path) -> anyhow::Result<TransitionSystem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    format::parse_dts(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_partition(path: &Path, n_states: usize) -> anyhow::Result<Partition> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let e = format::parse_partition(&text).with_context(|| format!("parsing {}", path.display()))?;
    if e.n_states() != n_states {
        bail!("{} covers {} states, the system has {n_states}", path.display(), e.n_states());
    }
    Ok(e)
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn show_word(sys: &TransitionSystem, word: &[usize]) -> String {
    if word.is_empty() {
        "[]".into()
    } else {
        word.iter().map(|&a| sys.action_names()[a].as_str()).collect::<Vec<_>>().join(" ")
    }
}

/// Runs one command; `Ok(false)` means the property asked about is false.
fn run(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Gen { env, n, joints, resolution, obstacles, click, actions, seed, min_dist, pointed, out } => {
            let sys = match env {
                EnvKind::Line => envs::make_line(n)?,
                EnvKind::Cycle => envs::make_cycle(n)?,
                EnvKind::Random => envs::make_random(n, actions, seed, min_dist, pointed)?,
                EnvKind::Arm => {
                    let mut spec = ArmSpec::free(joints, resolution);
                    if let Some(path) = obstacles {
                        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                        spec.obstacles = format::parse_obstacles(&text, joints)?;
                    }
                    if let Some(c) = click {
                        spec.click = c;
                    }
                    envs::make_arm(&spec)?
                }
            };
            emit(out.as_deref(), &format::write_dts(&sys))?;
            Ok(true)
        }
        Command::Check { input, prop } => {
            let sys = read_system(&input)?;
            let holds = match prop {
                Prop::StronglyConnected => match sys.connectivity_gap() {
                    Some((from, to)) => {
                        println!("false: state {to} is unreachable from state {from}");
                        false
                    }
                    None => true,
                },
                Prop::MinDist => match sys.minimal_distinguishing_violation() {
                    Some(v) => {
                        let a = &sys.action_names()[v.action];
                        println!("false: states {} and {} both go to {} under {a}", v.first, v.second, v.target);
                        false
                    }
                    None => true,
                },
                Prop::Pointed => !pointed_classes(&partition_from_labels(&sys)?).is_empty(),
                Prop::Chiral => msr(&sys, &partition_from_labels(&sys)?)?.is_identity(),
            };
            if holds {
                println!("true");
            } else if matches!(prop, Prop::Pointed | Prop::Chiral) {
                println!("false");
            }
            Ok(holds)
        }
        Command::Msr { input, relation, partition, out, oracle } => {
            let sys = read_system(&input)?;
            let e = match (relation, partition) {
                (_, Some(path)) => read_partition(&path, sys.n_states())?,
                (Some(Relation::Labels) | None, None) => partition_from_labels(&sys)?,
            };
            let result = msr(&sys, &e)?;
            if oracle {
                if sys.n_states() > BRUTEFORCE_LIMIT {
                    bail!("--oracle supports at most {BRUTEFORCE_LIMIT} states");
                }
                if msr_bruteforce(&sys, &e)? != result {
                    bail!("refinement and exhaustive search disagree");
                }
                eprintln!("oracle agrees");
            }
            emit(out.as_deref(), &format::write_partition(&result))?;
            Ok(true)
        }
        Command::Quotient { input, partition, out } => {
            let sys = read_system(&input)?;
            let e = read_partition(&partition, sys.n_states())?;
            let (q, _) = quotient(&sys, &e)?;
            emit(out.as_deref(), &format::write_dts(&q))?;
            Ok(true)
        }
        Command::Iso { a, b, anchored } => {
            let (a, b) = (read_system(&a)?, read_system(&b)?);
            match are_isomorphic(&a, &b, anchored)? {
                Some(map) => {
                    let pairs: Vec<String> = map.as_slice().iter().enumerate().map(|(s, t)| format!("{s}->{t}")).collect();
                    println!("isomorphic: {}", pairs.join(" "));
                    Ok(true)
                }
                None => {
                    println!("not isomorphic");
                    Ok(false)
                }
            }
        }
        Command::Bisim { env, internal } => {
            let (env, internal) = (read_system(&env)?, read_system(&internal)?);
            let x0 = env.initial().unwrap_or(0);
            let i0 = internal.initial().unwrap_or(0);
            let holds = are_bisimilar(&env, &internal, x0, i0)?;
            println!("{holds}");
            Ok(holds)
        }
        Command::Surprise { env, internal } => {
            let (env, internal) = (read_system(&env)?, read_system(&internal)?);
            let x0 = env.initial().unwrap_or(0);
            let i0 = internal.initial().unwrap_or(0);
            let prod = couple(&env, &internal, x0, i0)?;
            match surprise_witness(&prod) {
                None => {
                    println!("surpriseless ({} coupled states)", prod.n_pairs());
                    Ok(true)
                }
                Some(w) => {
                    println!("surprise: {} / {}", show_word(&env, &w.first), show_word(&env, &w.second));
                    Ok(false)
                }
            }
        }
        Command::Learn { env, x0, max_depth, min_depth, out } => {
            let sys = read_system(&env)?;
            let x0 = x0.or(sys.initial()).unwrap_or(0);
            let start = Instant::now();
            let report = learn_from_depth(&mut EnvOracle::new(&sys, x0)?, min_depth, max_depth)?;
            for round in &report.rounds {
                match &round.outcome {
                    RoundOutcome::Model { states } => println!("depth {:>3} horizon {:>3}: {states} states", round.depth, round.horizon),
                    RoundOutcome::Defect(d) => println!("depth {:>3} horizon {:>3}: no model ({d:?})", round.depth, round.horizon),
                }
            }
            match report.convergence {
                Convergence::Stable { first_depth, confirmed_depth } => {
                    println!("converged: model first built at depth {first_depth}, confirmed at depth {confirmed_depth}")
                }
                Convergence::Exhausted => println!("not converged by depth {max_depth}"),
            }
            let s = report.stats;
            println!("oracle: {} queries, {} steps, {} observations", s.queries, s.steps, s.observations);
            eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
            if let Some(model) = &report.model {
                println!("model: {} states", model.n_states());
                if let Some(path) = out {
                    emit(Some(&path), &format::write_dts(model))?;
                }
            }
            Ok(report.converged())
        }
        Command::Dot { input, partition, out } => {
            let sys = read_system(&input)?;
            let e = partition.map(|p| read_partition(&p, sys.n_states())).transpose()?;
            emit(out.as_deref(), &dot::to_dot(&sys, e.as_ref()))?;
            Ok(true)
        }
        Command::Verify { seed } => {
            let start = Instant::now();
            let mut all = true;
            for id in 1..=suite::n_criteria() {
                let outcome = suite::run_criterion(id, seed);
                println!("{}", outcome.line());
                eprintln!("   criterion {id}: {:.3} s (budget {} s)", outcome.elapsed.as_secs_f64(), outcome.limit.as_secs());
                all &= outcome.passed;
            }
            let total = start.elapsed();
            eprintln!("total: {:.3} s (budget {} s)", total.as_secs_f64(), suite::SUITE_LIMIT.as_secs());
            Ok(all && total <= suite::SUITE_LIMIT)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
