//! Column-order projection of an alignment.
//!
//! The merged structure is a DAG: one node per column plus one per
//! unmatched symbol instance, with an edge between each row's consecutive
//! nodes. A deterministic topological sort yields the flat sequence used as
//! the driver of each pairwise search stage and by the renderers.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

use super::{check_alignment_legal, Alignment};

/// Where a flat item came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatSource {
    /// Index into `alignment.columns`.
    Column(usize),
    /// An unmatched symbol instance.
    Instance { row: usize, position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatItem {
    pub name: String,
    pub source: FlatSource,
}

/// Projects a legal alignment onto a single symbol sequence: one entry per
/// column, with unmatched symbols interleaved consistently with every row's
/// internal order.
pub fn flatten_alignment(a: &Alignment) -> Result<Vec<String>> {
    let violations = check_alignment_legal(a);
    if !violations.is_empty() {
        return Err(Error::IllegalAlignment(violations));
    }
    Ok(flatten_items(a)
        .into_iter()
        .map(|item| item.name)
        .collect())
}

/// Topological merge. Ready nodes are emitted smallest-(row, position)
/// first, so between columns each row's unmatched run appears in row order,
/// row 0 leading.
pub(crate) fn flatten_items(a: &Alignment) -> Vec<FlatItem> {
    let n_cols = a.columns.len();
    // node ids: 0..n_cols are columns, then one per unmatched instance
    let matched = a.matched_instances();
    let mut instance_nodes: Vec<(usize, usize)> = Vec::new();
    let mut node_of_instance =
        vec![Vec::new(); a.rows.len()]; // row -> positions -> node id
    for (r, row) in a.rows.iter().enumerate() {
        node_of_instance[r] = vec![usize::MAX; row.symbols.len()];
    }
    for (ci, col) in a.columns.iter().enumerate() {
        for e in &col.entries {
            node_of_instance[e.row][e.position] = ci;
        }
    }
    for (r, row) in a.rows.iter().enumerate() {
        for p in 0..row.symbols.len() {
            if !matched.contains(&(r, p)) {
                let id = n_cols + instance_nodes.len();
                instance_nodes.push((r, p));
                node_of_instance[r][p] = id;
            }
        }
    }
    let n_nodes = n_cols + instance_nodes.len();

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    let mut indegree = vec![0usize; n_nodes];
    for nodes in &node_of_instance {
        for w in nodes.windows(2) {
            let (from, to) = (w[0], w[1]);
            if from != to {
                adj[from].push(to);
                indegree[to] += 1;
            }
        }
    }

    // priority key: minimal (row, position) over the node's instances
    let key = |node: usize| -> (usize, usize) {
        if node < n_cols {
            a.columns[node]
                .entries
                .iter()
                .map(|e| (e.row, e.position))
                .min()
                .unwrap_or((usize::MAX, usize::MAX))
        } else {
            instance_nodes[node - n_cols]
        }
    };

    let mut heap: BinaryHeap<Reverse<((usize, usize), usize)>> = BinaryHeap::new();
    for node in 0..n_nodes {
        if indegree[node] == 0 {
            heap.push(Reverse((key(node), node)));
        }
    }
    let mut out = Vec::with_capacity(n_nodes);
    while let Some(Reverse((_, node))) = heap.pop() {
        let (name, source) = if node < n_cols {
            (
                a.columns[node].symbol_name.clone(),
                FlatSource::Column(node),
            )
        } else {
            let (r, p) = instance_nodes[node - n_cols];
            (
                a.rows[r].symbols[p].name.clone(),
                FlatSource::Instance { row: r, position: p },
            )
        };
        out.push(FlatItem { name, source });
        for &next in &adj[node] {
            indegree[next] -= 1;
            if indegree[next] == 0 {
                heap.push(Reverse((key(next), next)));
            }
        }
    }
    debug_assert_eq!(out.len(), n_nodes, "flatten called on a cyclic alignment");
    out
}
