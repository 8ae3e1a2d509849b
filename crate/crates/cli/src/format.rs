//! Plain-text file formats: transition systems, partitions and arm
//! obstacle sets.
//!
//! A system file looks like this:
//!
//! ```text
//! dts
//! states 2
//! actions go
//! labels on off
//! init 0
//! trans 0 go 1
//! trans 1 go 0
//! ```
//!
//! `labels` and `init` are optional, `#` starts a comment, blank lines are
//! ignored, and every `(state, action)` pair needs exactly one `trans` line.

use std::collections::BTreeSet;
use std::fmt::Write;

use dts_core::{Partition, State, TransitionSystem};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing transition `trans {state} {action} _`")]
    MissingTransition { state: State, action: String },
    #[error(transparent)]
    Invalid(#[from] dts_core::Error),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_index(line: usize, token: &str, what: &str) -> Result<usize, FormatError> {
    token.parse().map_err(|_| syntax(line, format!("expected {what}, found `{token}`")))
}

fn parse_state(line: usize, token: &str, n: usize) -> Result<State, FormatError> {
    let s = parse_index(line, token, "a state index")?;
    if s >= n {
        return Err(syntax(line, format!("state {s} out of range (states {n})")));
    }
    Ok(s)
}

/// Parses a transition system file.
pub fn parse_dts(text: &str) -> Result<TransitionSystem, FormatError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, t)) if t == ["dts"] => {}
        Some((line, _)) => return Err(syntax(line, "expected the header `dts`")),
        None => return Err(syntax(1, "empty file")),
    }
    let mut n_states: Option<usize> = None;
    let mut actions: Option<Vec<String>> = None;
    let mut labels: Option<Vec<String>> = None;
    let mut initial: Option<State> = None;
    let mut delta: Vec<Option<State>> = Vec::new();

    for (line, tokens) in lines {
        let (keyword, args) = (tokens[0], &tokens[1..]);
        let once = |seen: bool| if seen { Err(syntax(line, format!("duplicate `{keyword}` line"))) } else { Ok(()) };
        match keyword {
            "states" => {
                once(n_states.is_some())?;
                let [count] = args else { return Err(syntax(line, "expected `states N`")) };
                let n = parse_index(line, count, "a state count")?;
                if n == 0 {
                    return Err(syntax(line, "a system needs at least one state"));
                }
                n_states = Some(n);
            }
            "actions" => {
                once(actions.is_some())?;
                if args.is_empty() {
                    return Err(syntax(line, "expected at least one action"));
                }
                actions = Some(args.iter().map(|s| s.to_string()).collect());
            }
            "labels" => {
                once(labels.is_some())?;
                labels = Some(args.iter().map(|s| s.to_string()).collect());
            }
            "init" => {
                once(initial.is_some())?;
                let n = n_states.ok_or_else(|| syntax(line, "`init` before `states`"))?;
                let [s] = args else { return Err(syntax(line, "expected `init K`")) };
                initial = Some(parse_state(line, s, n)?);
            }
            "trans" => {
                let (Some(n), Some(names)) = (n_states, actions.as_ref()) else {
                    return Err(syntax(line, "`trans` before `states` and `actions`"));
                };
                let [s, a, t] = args else { return Err(syntax(line, "expected `trans S ACT T`")) };
                let s = parse_state(line, s, n)?;
                let a = names
                    .iter()
                    .position(|name| name == a)
                    .ok_or_else(|| syntax(line, format!("unknown action `{a}`")))?;
                let t = parse_state(line, t, n)?;
                let m = names.len();
                if delta.is_empty() {
                    delta = vec![None; n * m];
                }
                let slot = &mut delta[s * m + a];
                if slot.is_some() {
                    return Err(syntax(line, format!("duplicate transition for state {s} action {}", names[a])));
                }
                *slot = Some(t);
            }
            other => return Err(syntax(line, format!("unknown keyword `{other}`"))),
        }
    }

    let n = n_states.ok_or_else(|| syntax(0, "missing `states` line"))?;
    let names = actions.ok_or_else(|| syntax(0, "missing `actions` line"))?;
    let m = names.len();
    if delta.is_empty() {
        delta = vec![None; n * m];
    }
    let mut table = Vec::with_capacity(n * m);
    for (i, t) in delta.iter().enumerate() {
        match t {
            Some(t) => table.push(*t),
            None => return Err(FormatError::MissingTransition { state: i / m, action: names[i % m].clone() }),
        }
    }
    let mut sys = TransitionSystem::new(n, names, table)?;
    if let Some(labels) = labels {
        sys = sys.with_labels(&labels)?;
    }
    if let Some(s) = initial {
        sys = sys.with_initial(s)?;
    }
    Ok(sys)
}

/// Canonical text of a system: states ascending, actions in header order.
pub fn write_dts(sys: &TransitionSystem) -> String {
    let mut out = String::from("dts\n");
    let names = sys.action_names();
    writeln!(out, "states {}", sys.n_states()).unwrap();
    writeln!(out, "actions {}", names.join(" ")).unwrap();
    if let Some(labels) = sys.label_name_list() {
        writeln!(out, "labels {}", labels.join(" ")).unwrap();
    }
    if let Some(s) = sys.initial() {
        writeln!(out, "init {s}").unwrap();
    }
    for s in 0..sys.n_states() {
        for (a, name) in names.iter().enumerate() {
            writeln!(out, "trans {s} {name} {}", sys.step(s, a)).unwrap();
        }
    }
    out
}

/// Parses a partition file: one block per line. The state count is the
/// number of indices listed; every state must appear exactly once.
pub fn parse_partition(text: &str) -> Result<Partition, FormatError> {
    let mut blocks = Vec::new();
    for (line, tokens) in content_lines(text) {
        let block = tokens.iter().map(|t| parse_index(line, t, "a state index")).collect::<Result<Vec<_>, _>>()?;
        blocks.push(block);
    }
    let n = blocks.iter().map(Vec::len).sum();
    Ok(Partition::from_blocks(n, &blocks)?)
}

/// One line per block, blocks in canonical order.
pub fn write_partition(e: &Partition) -> String {
    let mut out = String::new();
    for block in e.blocks() {
        let items: Vec<String> = block.iter().map(|s| s.to_string()).collect();
        writeln!(out, "{}", items.join(" ")).unwrap();
    }
    out
}

/// Parses an obstacle file: one configuration per line, `joints` positions each.
pub fn parse_obstacles(text: &str, joints: usize) -> Result<BTreeSet<Vec<usize>>, FormatError> {
    let mut out = BTreeSet::new();
    for (line, tokens) in content_lines(text) {
        if tokens.len() != joints {
            return Err(syntax(line, format!("expected {joints} joint positions, found {}", tokens.len())));
        }
        let config = tokens.iter().map(|t| parse_index(line, t, "a joint position")).collect::<Result<Vec<_>, _>>()?;
        out.insert(config);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dts_core::envs::make_line;

    const FIG1: &str = "\
dts
# four cells, green on the left
states 4
actions L R
labels green white white white
init 0
trans 0 L 0
trans 0 R 1
trans 1 L 0
trans 1 R 2
trans 2 L 1
trans 2 R 3
trans 3 L 2
trans 3 R 3
";

    #[test]
    fn line_file() {
        let sys = parse_dts(FIG1).unwrap();
        assert_eq!(sys, make_line(4).unwrap());
        assert_eq!(write_dts(&sys), FIG1.replace("# four cells, green on the left\n", ""));
    }

    #[test]
    fn minimal_file() {
        let sys = parse_dts("dts\nstates 1\nactions a\ntrans 0 a 0\n").unwrap();
        assert_eq!(sys.n_states(), 1);
        assert!(!sys.is_labeled());
        assert_eq!(sys.initial(), None);
    }

    #[test]
    fn missing_pair_is_named() {
        let err = parse_dts(&FIG1.replace("trans 3 R 3\n", "")).unwrap_err();
        assert_eq!(err.to_string(), "missing transition `trans 3 R _`");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            (FIG1.replace("trans 1 R 2", "trans 1 R 9"), "line 10: state 9 out of range (states 4)"),
            (FIG1.replace("trans 1 R 2", "trans 1 X 2"), "line 10: unknown action `X`"),
            (FIG1.replace("trans 1 R 2", "trans 1 L 2"), "line 10: duplicate transition for state 1 action L"),
            (FIG1.replace("init 0", "start 0"), "line 6: unknown keyword `start`"),
            (FIG1.replace("dts\n", "dtx\n"), "line 1: expected the header `dts`"),
            (FIG1.replace("states 4", "states four"), "line 3: expected a state count, found `four`"),
        ];
        for (text, message) in cases {
            assert_eq!(parse_dts(&text).unwrap_err().to_string(), message);
        }
        assert!(matches!(
            parse_dts(&FIG1.replace("labels green white white white", "labels green white")),
            Err(FormatError::Invalid(_))
        ));
    }

    #[test]
    fn partitions() {
        let e = parse_partition("0 2\n# comment\n1\n\n3 4\n").unwrap();
        assert_eq!(e.as_slice(), [0, 1, 0, 2, 2]);
        assert_eq!(write_partition(&e), "0 2\n1\n3 4\n");
        assert!(parse_partition("0 1\n1 2\n").is_err());
        assert!(parse_partition("0 x\n").is_err());
    }

    #[test]
    fn obstacles() {
        let set = parse_obstacles("1 1\n4 4 # far corner\n", 2).unwrap();
        assert_eq!(set.into_iter().collect::<Vec<_>>(), [vec![1, 1], vec![4, 4]]);
        assert!(parse_obstacles("1 1 1\n", 2).is_err());
    }
}
