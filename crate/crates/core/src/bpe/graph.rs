use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use super::{Merge, MergeTable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphNode {
    /// Creation rank, also used as the node id.
    pub id: u32,
    pub token: String,
    /// How many times the token is an operand anywhere in the full merge list.
    pub reuse_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphEdge {
    pub from: u32,
    pub to: u32,
    /// 1-based merge step.
    pub step: u32,
}

/// Merge history as a DAG: every merge `a + b -> c` adds edges `a -> c` and
/// `b -> c`. Edges always point to a strictly longer token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeGraph {
    pub language: String,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// Graph of the alphabet and the first `top_n` merges.
pub fn merge_graph(table: &MergeTable, top_n: usize) -> MergeGraph {
    let mut reuse: HashMap<&str, u32> = HashMap::new();
    for m in table.merges() {
        *reuse.entry(m.left.as_str()).or_insert(0) += 1;
        *reuse.entry(m.right.as_str()).or_insert(0) += 1;
    }
    let rank = |t: &str| {
        table
            .creation_rank(t)
            .expect("merge tokens are in the table")
    };

    let mut included: HashSet<u32> = table.alphabet().iter().map(|t| rank(t)).collect();
    let mut edges = Vec::new();
    for (step, m) in table.merges().iter().take(top_n).enumerate() {
        let to = rank(&m.product());
        included.insert(to);
        for operand in [&m.left, &m.right] {
            edges.push(GraphEdge {
                from: rank(operand),
                to,
                step: step as u32 + 1,
            });
        }
    }
    let mut ids: Vec<u32> = included.into_iter().collect();
    ids.sort_unstable();
    let nodes = ids
        .into_iter()
        .map(|id| {
            let token = table.token(id - 1).to_string();
            GraphNode {
                id,
                reuse_count: reuse.get(token.as_str()).copied().unwrap_or(0),
                token,
            }
        })
        .collect();
    MergeGraph {
        language: table.language_code.clone(),
        nodes,
        edges,
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

impl MergeGraph {
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let name = if self.language.is_empty() {
            "merges"
        } else {
            &self.language
        };
        let _ = writeln!(out, "digraph \"{}\" {{", dot_escape(name));
        out.push_str("  rankdir=LR;\n");
        for n in &self.nodes {
            let _ = writeln!(
                out,
                "  n{} [label=\"{} ({})\"];",
                n.id,
                dot_escape(&n.token),
                n.reuse_count
            );
        }
        for e in &self.edges {
            let _ = writeln!(out, "  n{} -> n{};", e.from, e.to);
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MergeDiff {
    /// Merges present in both tables, in the order of the first table.
    pub shared: Vec<Merge>,
    pub unique_to_a: Vec<Merge>,
    pub unique_to_b: Vec<Merge>,
    /// Number of leading positions where both merge sequences agree.
    pub common_prefix: usize,
}

/// Compares two tables as sets of (left, right) merges and position by position.
pub fn diff_merge_tables(a: &MergeTable, b: &MergeTable) -> MergeDiff {
    let set_a: HashSet<&Merge> = a.merges().iter().collect();
    let set_b: HashSet<&Merge> = b.merges().iter().collect();
    let mut seen = HashSet::new();
    let mut diff = MergeDiff::default();
    for m in a.merges() {
        if !seen.insert(m) {
            continue;
        }
        if set_b.contains(m) {
            diff.shared.push(m.clone());
        } else {
            diff.unique_to_a.push(m.clone());
        }
    }
    seen.clear();
    for m in b.merges() {
        if seen.insert(m) && !set_a.contains(m) {
            diff.unique_to_b.push(m.clone());
        }
    }
    diff.common_prefix = a
        .merges()
        .iter()
        .zip(b.merges())
        .take_while(|(x, y)| x == y)
        .count();
    diff
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bpe::{Mode, Weighting};

    fn table(alphabet: &[&str], merges: &[(&str, &str)]) -> MergeTable {
        MergeTable::new(
            "xx",
            Mode::Ultimate,
            Weighting::Tf,
            alphabet.iter().map(|s| s.to_string()).collect(),
            merges.iter().map(|&(l, r)| Merge::new(l, r)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn abab_graph() {
        let t = table(&["a", "b"], &[("a", "b"), ("ab", "ab")]);
        let g = merge_graph(&t, 10);
        let summary: Vec<_> = g
            .nodes
            .iter()
            .map(|n| (n.token.as_str(), n.reuse_count))
            .collect();
        assert_eq!(summary, [("a", 1), ("b", 1), ("ab", 2), ("abab", 0)]);
        assert_eq!(g.edges.len(), 4);
        assert_eq!(
            g.to_dot(),
            "digraph \"xx\" {\n  rankdir=LR;\n  n1 [label=\"a (1)\"];\n  n2 [label=\"b (1)\"];\n  \
             n3 [label=\"ab (2)\"];\n  n4 [label=\"abab (0)\"];\n  n1 -> n3;\n  n2 -> n3;\n  \
             n3 -> n4;\n  n3 -> n4;\n}\n"
        );
    }

    #[test]
    fn top_n_keeps_full_reuse_counts() {
        let t = table(&["a", "b"], &[("a", "b"), ("ab", "ab")]);
        let g = merge_graph(&t, 1);
        let summary: Vec<_> = g
            .nodes
            .iter()
            .map(|n| (n.token.as_str(), n.reuse_count))
            .collect();
        assert_eq!(summary, [("a", 1), ("b", 1), ("ab", 2)]);
        assert_eq!(g.edges.len(), 2);
    }

    #[test]
    fn empty_merge_list_graph() {
        let t = table(&["x", "y"], &[]);
        let g = merge_graph(&t, 5);
        assert_eq!(g.nodes.len(), 2);
        assert!(g.edges.is_empty());
        let json: serde_json::Value = serde_json::from_str(&g.to_json()).unwrap();
        assert_eq!(json["nodes"][1]["token"], "y");
    }

    #[test]
    fn diff_examples() {
        let t = table(&["a", "b"], &[("a", "b"), ("ab", "ab")]);
        let d = diff_merge_tables(&t, &t);
        assert_eq!(d.shared.len(), 2);
        assert!(d.unique_to_a.is_empty() && d.unique_to_b.is_empty());
        assert_eq!(d.common_prefix, 2);

        let x = table(&["a", "b", "c", "d"], &[("a", "b"), ("c", "d")]);
        let y = table(&["a", "b", "e", "f"], &[("a", "b"), ("e", "f")]);
        let d = diff_merge_tables(&x, &y);
        assert_eq!(d.shared, [Merge::new("a", "b")]);
        assert_eq!(d.unique_to_a, [Merge::new("c", "d")]);
        assert_eq!(d.unique_to_b, [Merge::new("e", "f")]);
        assert_eq!(d.common_prefix, 1);

        let p = table(&["a", "b"], &[("a", "b")]);
        let q = table(&["c", "d"], &[("c", "d")]);
        let d = diff_merge_tables(&p, &q);
        assert!(d.shared.is_empty());
        assert_eq!(d.common_prefix, 0);
    }
}
