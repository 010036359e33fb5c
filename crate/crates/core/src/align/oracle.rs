//! Exhaustive alignment enumeration for small instances — the independent
//! test oracle the beam search is checked against. Deliberately simple:
//! every subset of column assignments is explored and validated through the
//! same legality predicate the engine's outputs must satisfy.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{KnowledgeStore, NewInput};
use crate::score::{encode_alignment_unchecked, FrequencyTable};

use super::{check_alignment_legal, Alignment, MatchColumn, Row, RowKind, SymbolInstance};

/// Size caps for the oracle. Enumeration refuses instances beyond them.
#[derive(Debug, Clone)]
pub struct OracleLimits {
    pub max_old_patterns: usize,
    pub max_symbols_per_pattern: usize,
    pub max_instances_per_pattern: usize,
    pub node_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_old_patterns: 3,
            max_symbols_per_pattern: 6,
            max_instances_per_pattern: 2,
            node_budget: 20_000_000,
        }
    }
}

/// Enumerates every legal alignment (up to the instance cap on pattern
/// reuse), scored and sorted like the engine's output. Structurally
/// identical alignments are returned once.
pub fn enumerate_alignments_bruteforce(
    input: &NewInput,
    store: &KnowledgeStore,
    limits: &OracleLimits,
) -> Result<Vec<Alignment>> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    if store.len() > limits.max_old_patterns {
        return Err(Error::OracleTooLarge(format!(
            "{} old patterns exceeds cap {}",
            store.len(),
            limits.max_old_patterns
        )));
    }
    for p in store.patterns() {
        if p.len() > limits.max_symbols_per_pattern {
            return Err(Error::OracleTooLarge(format!(
                "pattern `{}` has {} symbols, cap {}",
                p.id,
                p.len(),
                limits.max_symbols_per_pattern
            )));
        }
    }
    let table = store.frequency_table()?;

    let row0 = Row {
        kind: RowKind::New {
            pattern_ids: input.patterns.iter().map(|p| p.id.clone()).collect(),
        },
        symbols: input
            .patterns
            .iter()
            .flat_map(|p| p.symbols.iter().cloned())
            .collect(),
    };

    let pattern_ids: Vec<&str> = store.patterns().map(|p| p.id.as_str()).collect();
    let mut counts = vec![0usize; pattern_ids.len()];
    let mut budget = limits.node_budget;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut out: Vec<Alignment> = Vec::new();

    enumerate_multisets(
        store,
        &pattern_ids,
        limits,
        0,
        &mut counts,
        &row0,
        &table,
        &mut budget,
        &mut seen,
        &mut out,
    )?;

    out.sort_by(|a, b| {
        b.cd()
            .total_cmp(&a.cd())
            .then_with(|| a.rows.len().cmp(&b.rows.len()))
            .then_with(|| a.canonical_string().cmp(&b.canonical_string()))
    });
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn enumerate_multisets(
    store: &KnowledgeStore,
    pattern_ids: &[&str],
    limits: &OracleLimits,
    idx: usize,
    counts: &mut Vec<usize>,
    row0: &Row,
    table: &FrequencyTable,
    budget: &mut u64,
    seen: &mut BTreeSet<String>,
    out: &mut Vec<Alignment>,
) -> Result<()> {
    if idx == pattern_ids.len() {
        if counts.iter().all(|&c| c == 0) {
            return Ok(());
        }
        let mut rows = vec![row0.clone()];
        for (pi, &count) in counts.iter().enumerate() {
            let pattern = store.get(pattern_ids[pi]).expect("known id");
            for instance in 1..=count {
                rows.push(Row {
                    kind: RowKind::Old {
                        pattern_id: pattern.id.clone(),
                        instance: instance as u32,
                    },
                    symbols: pattern.symbols.clone(),
                });
            }
        }
        return enumerate_columns(&rows, table, budget, seen, out);
    }
    for c in 0..=limits.max_instances_per_pattern {
        counts[idx] = c;
        enumerate_multisets(
            store,
            pattern_ids,
            limits,
            idx + 1,
            counts,
            row0,
            table,
            budget,
            seen,
            out,
        )?;
    }
    counts[idx] = 0;
    Ok(())
}

struct ColumnSearch<'a> {
    rows: &'a [Row],
    instances: Vec<(usize, usize)>,
    names: Vec<&'a str>,
    /// names remaining at index i..end, for pruning pointless open-column moves
    remaining: Vec<BTreeSet<&'a str>>,
}

fn enumerate_columns(
    rows: &[Row],
    table: &FrequencyTable,
    budget: &mut u64,
    seen: &mut BTreeSet<String>,
    out: &mut Vec<Alignment>,
) -> Result<()> {
    let mut instances = Vec::new();
    let mut names: Vec<&str> = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        for (p, sym) in row.symbols.iter().enumerate() {
            instances.push((r, p));
            names.push(sym.name.as_str());
        }
    }
    let mut remaining: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); instances.len() + 1];
    for i in (0..instances.len()).rev() {
        let mut set = remaining[i + 1].clone();
        set.insert(names[i]);
        remaining[i] = set;
    }
    let search = ColumnSearch {
        rows,
        instances,
        names,
        remaining,
    };
    let mut open: Vec<(String, Vec<SymbolInstance>)> = Vec::new();
    assign(&search, 0, &mut open, table, budget, seen, out)
}

fn assign(
    search: &ColumnSearch<'_>,
    idx: usize,
    open: &mut Vec<(String, Vec<SymbolInstance>)>,
    table: &FrequencyTable,
    budget: &mut u64,
    seen: &mut BTreeSet<String>,
    out: &mut Vec<Alignment>,
) -> Result<()> {
    if *budget == 0 {
        return Err(Error::OracleTooLarge("node budget exhausted".into()));
    }
    *budget -= 1;

    if idx == search.instances.len() {
        harvest(search, open, table, seen, out);
        return Ok(());
    }
    let (row, pos) = search.instances[idx];
    let name = search.names[idx];

    // leave unmatched
    assign(search, idx + 1, open, table, budget, seen, out)?;

    // join an existing column
    for ci in 0..open.len() {
        if open[ci].0 == name && open[ci].1.iter().all(|e| e.row != row) {
            open[ci].1.push(SymbolInstance::new(row, pos));
            assign(search, idx + 1, open, table, budget, seen, out)?;
            open[ci].1.pop();
        }
    }

    // open a new column, if some later instance could still join it
    if search.remaining[idx + 1].contains(name) {
        open.push((name.to_string(), vec![SymbolInstance::new(row, pos)]));
        assign(search, idx + 1, open, table, budget, seen, out)?;
        open.pop();
    }
    Ok(())
}

fn harvest(
    search: &ColumnSearch<'_>,
    open: &[(String, Vec<SymbolInstance>)],
    table: &FrequencyTable,
    seen: &mut BTreeSet<String>,
    out: &mut Vec<Alignment>,
) {
    let columns: Vec<MatchColumn> = open
        .iter()
        .filter(|(_, entries)| entries.len() >= 2)
        .map(|(name, entries)| MatchColumn::new(name.clone(), entries.clone()))
        .collect();
    if columns.is_empty() || !columns.iter().any(|c| c.touches_new()) {
        return;
    }
    // every old row must participate; smaller row multisets cover the rest
    for r in 1..search.rows.len() {
        if !columns.iter().any(|c| c.entries.iter().any(|e| e.row == r)) {
            return;
        }
    }
    let mut alignment = Alignment {
        rows: search.rows.to_vec(),
        columns,
        score: None,
    };
    if !check_alignment_legal(&alignment).is_empty() {
        return;
    }
    let canon = alignment.canonical_string();
    if !seen.insert(canon) {
        return;
    }
    alignment.score = Some(encode_alignment_unchecked(&alignment, table));
    out.push(alignment);
}
