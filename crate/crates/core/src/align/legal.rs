//! The legality predicate for alignments.

use std::collections::BTreeSet;

use crate::error::Violation;

use super::{Alignment, RowKind};

/// Checks every alignment invariant, returning all violations. An empty
/// result means the alignment is legal.
pub fn check_alignment_legal(a: &Alignment) -> Vec<Violation> {
    let mut v = Vec::new();

    if a.rows.is_empty() {
        v.push(Violation::new("row-structure", "alignment has no rows"));
        return v;
    }
    if !matches!(a.rows[0].kind, RowKind::New { .. }) {
        v.push(Violation::new("row-structure", "row 0 must hold New material"));
    }
    for (r, row) in a.rows.iter().enumerate().skip(1) {
        if !matches!(row.kind, RowKind::Old { .. }) {
            v.push(Violation::new(
                "row-structure",
                format!("row {r} must hold exactly one Old pattern"),
            ));
        }
    }

    let mut seen_instances: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (ci, col) in a.columns.iter().enumerate() {
        if col.entries.len() < 2 {
            v.push(Violation::new(
                "column-size",
                format!("column {ci} (`{}`) has fewer than 2 entries", col.symbol_name),
            ));
        }
        let mut rows_in_col = BTreeSet::new();
        let mut entry_set = BTreeSet::new();
        for e in &col.entries {
            if !entry_set.insert((e.row, e.position)) {
                v.push(Violation::new(
                    "self-match",
                    format!(
                        "column {ci} contains the same instance (row {}, pos {}) twice",
                        e.row, e.position
                    ),
                ));
            }
            if !rows_in_col.insert(e.row) {
                v.push(Violation::new(
                    "one-per-row",
                    format!("column {ci} has two entries in row {}", e.row),
                ));
            }
            match a.rows.get(e.row) {
                None => v.push(Violation::new(
                    "entry-range",
                    format!("column {ci} references missing row {}", e.row),
                )),
                Some(row) => match row.symbols.get(e.position) {
                    None => v.push(Violation::new(
                        "entry-range",
                        format!(
                            "column {ci} references position {} beyond row {} (len {})",
                            e.position,
                            e.row,
                            row.symbols.len()
                        ),
                    )),
                    Some(sym) => {
                        if sym.name != col.symbol_name {
                            v.push(Violation::new(
                                "column-identity",
                                format!(
                                    "column {ci} is `{}` but row {} pos {} holds `{}`",
                                    col.symbol_name, e.row, e.position, sym.name
                                ),
                            ));
                        }
                    }
                },
            }
            if !seen_instances.insert((e.row, e.position)) {
                v.push(Violation::new(
                    "instance-reuse",
                    format!(
                        "instance (row {}, pos {}) appears in more than one column",
                        e.row, e.position
                    ),
                ));
            }
        }
    }

    if !a.columns.iter().any(|c| c.touches_new()) {
        v.push(Violation::new(
            "no-new-contact",
            "no column contains a row-0 entry",
        ));
    }

    for (r, _) in a.rows.iter().enumerate().skip(1) {
        let participates = a
            .columns
            .iter()
            .any(|c| c.entries.iter().any(|e| e.row == r));
        if !participates {
            v.push(Violation::new(
                "idle-row",
                format!("row {r} has no entry in any column"),
            ));
        }
    }

    if let Some(cv) = crossing_violation(a) {
        v.push(cv);
    }

    v
}

/// The no-crossing invariant: there must be a linear order of columns under
/// which every row's entries appear at strictly increasing positions.
/// Equivalently, the precedence graph induced by per-row position order must
/// be acyclic.
fn crossing_violation(a: &Alignment) -> Option<Violation> {
    let n = a.columns.len();
    if n < 2 {
        return None;
    }
    // per row, entries as (position, column)
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for r in 0..a.rows.len() {
        let mut in_row: Vec<(usize, usize)> = Vec::new();
        for (ci, col) in a.columns.iter().enumerate() {
            if let Some(e) = col.entry_for_row(r) {
                in_row.push((e.position, ci));
            }
        }
        in_row.sort();
        for w in in_row.windows(2) {
            if w[0].0 == w[1].0 {
                continue; // duplicate position is flagged elsewhere
            }
            edges.insert((w[0].1, w[1].1));
        }
    }
    // immediate inversion
    for &(x, y) in &edges {
        if x == y {
            return Some(Violation::new(
                "no-crossing",
                format!("column {x} must precede itself"),
            ));
        }
        if edges.contains(&(y, x)) {
            return Some(Violation::new(
                "no-crossing",
                format!("columns {x} and {y} are ordered both ways by different rows"),
            ));
        }
    }
    // cycle check via Kahn
    let mut indegree = vec![0usize; n];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(x, y) in &edges {
        adj[x].push(y);
        indegree[y] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut emitted = 0;
    while let Some(node) = queue.pop() {
        emitted += 1;
        for &next in &adj[node] {
            indegree[next] -= 1;
            if indegree[next] == 0 {
                queue.push(next);
            }
        }
    }
    if emitted < n {
        return Some(Violation::new(
            "no-crossing",
            "column precedence constraints form a cycle",
        ));
    }
    None
}
