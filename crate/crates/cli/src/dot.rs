//! Graphviz DOT rendering of systems and history tries.

use std::fmt::Write;

use dts_core::learner::HistoryTrie;
use dts_core::{Partition, TransitionSystem};

fn quote(text: &str) -> String {
    let escaped = text.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n");
    format!("\"{escaped}\"")
}

/// Node lines, wrapped in one cluster per block when `blocks` is given.
/// `blocks` may cover only a prefix of the nodes.
fn write_nodes(out: &mut String, n: usize, blocks: Option<&Partition>, node: impl Fn(usize) -> String) {
    match blocks {
        Some(e) => {
            for (b, members) in e.blocks().iter().enumerate() {
                writeln!(out, "  subgraph cluster_{b} {{").unwrap();
                writeln!(out, "    label={};", quote(&format!("block {b}"))).unwrap();
                for &s in members {
                    writeln!(out, "    {}", node(s)).unwrap();
                }
                writeln!(out, "  }}").unwrap();
            }
            for s in e.n_states()..n {
                writeln!(out, "  {}", node(s)).unwrap();
            }
        }
        None => {
            for s in 0..n {
                writeln!(out, "  {}", node(s)).unwrap();
            }
        }
    }
}

/// One node per state (index and sensor label), one edge per
/// `(state, action)`; the initial state gets a double border. With a
/// partition, each block becomes a cluster.
pub fn to_dot(sys: &TransitionSystem, blocks: Option<&Partition>) -> String {
    let mut out = String::from("digraph dts {\n  rankdir=LR;\n  node [shape=circle];\n");
    write_nodes(&mut out, sys.n_states(), blocks, |s| {
        let text = match sys.label_name(s) {
            Some(y) => format!("{s}\n{y}"),
            None => s.to_string(),
        };
        let border = if sys.initial() == Some(s) { ", peripheries=2" } else { "" };
        format!("s{s} [label={}{border}];", quote(&text))
    });
    for s in 0..sys.n_states() {
        for (a, name) in sys.action_names().iter().enumerate() {
            writeln!(out, "  s{s} -> s{} [label={}];", sys.step(s, a), quote(name)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// The trie as a tree, each node showing its history and observation.
/// With a partition over the shallow nodes, each class becomes a cluster.
pub fn trie_to_dot(trie: &HistoryTrie, blocks: Option<&Partition>) -> String {
    let names = trie.action_names();
    let mut out = String::from("digraph trie {\n  rankdir=TB;\n  node [shape=box];\n");
    write_nodes(&mut out, trie.n_nodes(), blocks, |v| {
        let history: Vec<&str> = trie.access(v).iter().map(|&a| names[a].as_str()).collect();
        let history = if history.is_empty() { "ε".to_string() } else { history.join(" ") };
        format!("n{v} [label={}];", quote(&format!("{history}\n{}", trie.observation_name(v))))
    });
    for v in 0..trie.n_nodes() {
        for (a, name) in names.iter().enumerate() {
            if let Some(c) = trie.child(v, a) {
                writeln!(out, "  n{v} -> n{c} [label={}];", quote(name)).unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}
