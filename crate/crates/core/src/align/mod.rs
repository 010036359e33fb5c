//! Multiple-alignment structure and the staged beam search that builds it.

pub(crate) mod flatten;
mod legal;
mod oracle;
mod pairwise;
mod search;
#[cfg(test)]
mod tests;

pub use flatten::{flatten_alignment, FlatItem, FlatSource};
pub use legal::check_alignment_legal;
pub use oracle::{enumerate_alignments_bruteforce, OracleLimits};
pub use pairwise::{pairwise_align, PairwiseCandidate};
pub use search::build_multiple_alignment;

use std::collections::BTreeSet;

use crate::model::SPSymbol;
use crate::score::EncodingResult;

/// One symbol occurrence inside an alignment: row index (0 = New) and
/// position within that row's symbol sequence. Instance identity is what
/// makes "a symbol cannot be aligned with itself" checkable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolInstance {
    pub row: usize,
    pub position: usize,
}

impl SymbolInstance {
    pub fn new(row: usize, position: usize) -> Self {
        SymbolInstance { row, position }
    }
}

/// A column of two or more identically named symbol instances, at most one
/// per row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchColumn {
    pub symbol_name: String,
    /// Entries sorted by row index.
    pub entries: Vec<SymbolInstance>,
}

impl MatchColumn {
    pub fn new(symbol_name: impl Into<String>, mut entries: Vec<SymbolInstance>) -> Self {
        entries.sort();
        MatchColumn {
            symbol_name: symbol_name.into(),
            entries,
        }
    }

    pub fn entry_for_row(&self, row: usize) -> Option<SymbolInstance> {
        self.entries.iter().copied().find(|e| e.row == row)
    }

    pub fn touches_new(&self) -> bool {
        self.entries.iter().any(|e| e.row == 0)
    }
}

/// What a row holds: row 0 carries the New patterns in their recorded
/// order, every other row exactly one Old-pattern instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowKind {
    New { pattern_ids: Vec<String> },
    Old { pattern_id: String, instance: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub kind: RowKind,
    pub symbols: Vec<SPSymbol>,
}

impl Row {
    pub fn pattern_id(&self) -> Option<&str> {
        match &self.kind {
            RowKind::Old { pattern_id, .. } => Some(pattern_id),
            RowKind::New { .. } => None,
        }
    }
}

/// An SP-multiple-alignment: one New row plus one Old pattern instance per
/// further row, joined by non-crossing columns of identically named symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub rows: Vec<Row>,
    /// Columns in creation order; linear order is derived on demand.
    pub columns: Vec<MatchColumn>,
    pub score: Option<EncodingResult>,
}

impl Alignment {
    pub fn cd(&self) -> f64 {
        self.score.as_ref().map(|s| s.cd).unwrap_or(f64::NEG_INFINITY)
    }

    /// Every (row, position) that sits in some column.
    pub fn matched_instances(&self) -> BTreeSet<(usize, usize)> {
        self.columns
            .iter()
            .flat_map(|c| c.entries.iter().map(|e| (e.row, e.position)))
            .collect()
    }

    /// Instances matched in a column that also contains a row-0 entry.
    pub fn matched_to_new(&self) -> BTreeSet<(usize, usize)> {
        self.columns
            .iter()
            .filter(|c| c.touches_new())
            .flat_map(|c| c.entries.iter().map(|e| (e.row, e.position)))
            .collect()
    }

    /// How many rows hold an instance of `pattern_id`.
    pub fn instance_count(&self, pattern_id: &str) -> usize {
        self.rows
            .iter()
            .filter(|r| r.pattern_id() == Some(pattern_id))
            .count()
    }

    /// Number of columns shared between `row` and row 0.
    pub fn shared_with_new(&self, row: usize) -> usize {
        self.columns
            .iter()
            .filter(|c| c.touches_new() && c.entry_for_row(row).is_some())
            .count()
    }

    /// History-independent serialization: isomorphic alignments (same rows
    /// and columns up to row relabeling) serialize identically. Used for
    /// beam dedup and as the deterministic tie-break key.
    pub fn canonical_string(&self) -> String {
        canonical_string(self)
    }
}

/// Knobs for the staged beam search.
#[derive(Debug, Clone)]
pub struct SearchParams {
    /// Partial structures retained after each stage.
    pub beam_width: usize,
    /// Alignments returned.
    pub max_alignments: usize,
    /// Cap on reuse of one Old pattern within a single alignment.
    pub max_instances_per_pattern: usize,
    /// Alignments below this compression difference are not returned.
    pub min_cd: f64,
    /// Hard cap on search stages.
    pub max_stages: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            beam_width: 200,
            max_alignments: 2,
            max_instances_per_pattern: 10,
            min_cd: 0.0,
            max_stages: 20,
        }
    }
}

/// Iterative refinement of row keys (pattern ids seeded, then repeatedly
/// folded with the keys of column co-members) until row order is forced by
/// structure alone. Symmetric twins may sort either way; by symmetry both
/// orders print the same string.
fn canonical_string(a: &Alignment) -> String {
    let n = a.rows.len();
    let mut keys: Vec<String> = a
        .rows
        .iter()
        .map(|r| match &r.kind {
            RowKind::New { pattern_ids } => format!("NEW[{}]", pattern_ids.join(",")),
            RowKind::Old { pattern_id, .. } => format!("OLD[{pattern_id}]"),
        })
        .collect();

    // membership: row -> [(pos, column idx)]
    let mut membership: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ci, col) in a.columns.iter().enumerate() {
        for e in &col.entries {
            membership[e.row].push((e.position, ci));
        }
    }
    for m in &mut membership {
        m.sort();
    }

    for _ in 0..n.min(4) {
        let mut next = Vec::with_capacity(n);
        for (r, base) in keys.iter().enumerate() {
            let mut parts = vec![base.clone()];
            for &(pos, ci) in &membership[r] {
                let col = &a.columns[ci];
                let mut co: Vec<String> = col
                    .entries
                    .iter()
                    .filter(|e| e.row != r)
                    .map(|e| format!("{}@{}", keys[e.row], e.position))
                    .collect();
                co.sort();
                parts.push(format!("{}:{}<{}>", pos, col.symbol_name, co.join("|")));
            }
            next.push(parts.join(";"));
        }
        keys = next;
    }

    // order rows: New first, then Old rows by refined key
    let mut order: Vec<usize> = (1..n).collect();
    order.sort_by(|&x, &y| keys[x].cmp(&keys[y]));
    let mut relabel = vec![0usize; n];
    for (new_idx, &old_idx) in order.iter().enumerate() {
        relabel[old_idx] = new_idx + 1;
    }

    let mut out = String::new();
    out.push_str("rows:");
    out.push_str(&keys[0]);
    for &r in &order {
        out.push('~');
        match &a.rows[r].kind {
            RowKind::Old { pattern_id, .. } => out.push_str(pattern_id),
            RowKind::New { .. } => out.push_str("NEW"),
        }
    }
    let mut cols: Vec<String> = a
        .columns
        .iter()
        .map(|c| {
            let mut entries: Vec<(usize, usize)> = c
                .entries
                .iter()
                .map(|e| (relabel[e.row], e.position))
                .collect();
            entries.sort();
            let body: Vec<String> = entries
                .iter()
                .map(|(r, p)| format!("{r}.{p}"))
                .collect();
            format!("{}({})", c.symbol_name, body.join(","))
        })
        .collect();
    cols.sort();
    out.push_str("|cols:");
    out.push_str(&cols.join(";"));
    out
}
