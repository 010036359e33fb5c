//! Staged construction of multiple alignments.
//!
//! Stage 0 pairs each New pattern with each Old pattern. Every later stage
//! takes each retained partial alignment, projects it to a sequence, and
//! pairs that driver against every Old pattern (as a fresh instance) and
//! against the unconsumed New patterns (inserted contiguously into row 0).
//! After each stage the `beam_width` best structures by compression
//! difference are kept; the search stops when a stage adds no new structure
//! or the stage cap is reached.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{KnowledgeStore, NewInput, SPPattern};
use crate::score::{encode_alignment_unchecked, FrequencyTable};

use super::flatten::{flatten_items, FlatItem, FlatSource};
use super::pairwise::pairwise_align_masked;
use super::{Alignment, MatchColumn, Row, RowKind, SearchParams, SymbolInstance};

/// Candidate match sets requested per (driver, pattern) pair. Beam-level
/// diversity comes from many drivers and patterns, so this stays small.
const PAIRWISE_CANDIDATES: usize = 32;

#[derive(Clone)]
struct Partial {
    alignment: Alignment,
    /// Indices into `input.patterns` consumed into row 0.
    consumed: BTreeSet<usize>,
    /// Lengths of the row-0 patterns, in recorded order.
    row0_lens: Vec<usize>,
    canon: String,
}

/// Builds the ranked list of alignments between `input` and `store`.
///
/// Returns at most `params.max_alignments` alignments sorted by CD
/// descending (ties: fewer rows, then canonical serialization); all results
/// reach `params.min_cd`. Deterministic for fixed inputs and parameters.
pub fn build_multiple_alignment(
    input: &NewInput,
    store: &KnowledgeStore,
    params: &SearchParams,
) -> Result<Vec<Alignment>> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    if input.patterns.is_empty() {
        return Err(Error::EmptyInput);
    }
    let table = store.frequency_table()?;

    let mut beam: Vec<Partial> = Vec::new();
    let mut pool: BTreeMap<String, Partial> = BTreeMap::new();
    for (new_idx, new_pattern) in input.patterns.iter().enumerate() {
        for old in store.patterns() {
            seed_pairs(new_idx, new_pattern, old, &table, &mut pool);
        }
    }
    let mut frontier: Vec<Partial> = cut_beam(pool, params, &mut beam);

    for _stage in 1..params.max_stages {
        if frontier.is_empty() {
            break;
        }
        let mut pool: BTreeMap<String, Partial> = beam
            .iter()
            .map(|p| (p.canon.clone(), p.clone()))
            .collect();
        for partial in &frontier {
            expand(partial, input, store, params, &table, &mut pool);
        }
        frontier = cut_beam(pool, params, &mut beam);
    }

    let mut results: Vec<Alignment> = beam
        .into_iter()
        .map(|p| finalize(p, input))
        .filter(|a| a.cd() >= params.min_cd)
        .take(params.max_alignments)
        .collect();
    for a in &mut results {
        debug_assert!(super::check_alignment_legal(a).is_empty());
    }
    Ok(results)
}

/// Sorts `pool`, keeps the best `beam_width` as the new beam, and returns
/// the members that were not in the previous beam.
fn cut_beam(
    pool: BTreeMap<String, Partial>,
    params: &SearchParams,
    beam: &mut Vec<Partial>,
) -> Vec<Partial> {
    let previous: BTreeSet<String> = beam.iter().map(|p| p.canon.clone()).collect();
    let mut all: Vec<Partial> = pool.into_values().collect();
    all.sort_by(|a, b| {
        b.alignment
            .cd()
            .total_cmp(&a.alignment.cd())
            .then_with(|| a.alignment.rows.len().cmp(&b.alignment.rows.len()))
            .then_with(|| a.canon.cmp(&b.canon))
    });
    all.truncate(params.beam_width);
    *beam = all;
    beam.iter()
        .filter(|p| !previous.contains(&p.canon))
        .cloned()
        .collect()
}

fn seed_pairs(
    new_idx: usize,
    new_pattern: &SPPattern,
    old: &SPPattern,
    table: &FrequencyTable,
    pool: &mut BTreeMap<String, Partial>,
) {
    let driver: Vec<(&str, bool)> = new_pattern.names().map(|n| (n, true)).collect();
    for cand in pairwise_align_masked(&driver, old, table, PAIRWISE_CANDIDATES) {
        let rows = vec![
            Row {
                kind: RowKind::New {
                    pattern_ids: vec![new_pattern.id.clone()],
                },
                symbols: new_pattern.symbols.clone(),
            },
            Row {
                kind: RowKind::Old {
                    pattern_id: old.id.clone(),
                    instance: 1,
                },
                symbols: old.symbols.clone(),
            },
        ];
        let columns = cand
            .pairs
            .iter()
            .map(|&(di, tj)| {
                MatchColumn::new(
                    old.symbols[tj].name.clone(),
                    vec![SymbolInstance::new(0, di), SymbolInstance::new(1, tj)],
                )
            })
            .collect();
        let mut alignment = Alignment {
            rows,
            columns,
            score: None,
        };
        alignment.score = Some(encode_alignment_unchecked(&alignment, table));
        insert_partial(
            pool,
            Partial {
                canon: alignment.canonical_string(),
                alignment,
                consumed: BTreeSet::from([new_idx]),
                row0_lens: vec![new_pattern.len()],
            },
        );
    }
}

fn expand(
    partial: &Partial,
    input: &NewInput,
    store: &KnowledgeStore,
    params: &SearchParams,
    table: &FrequencyTable,
    pool: &mut BTreeMap<String, Partial>,
) {
    let flat = flatten_items(&partial.alignment);

    // against every Old pattern, as a fresh instance
    for old in store.patterns() {
        if partial.alignment.instance_count(&old.id) >= params.max_instances_per_pattern {
            continue;
        }
        let driver: Vec<(&str, bool)> = flat.iter().map(|it| (it.name.as_str(), true)).collect();
        for cand in pairwise_align_masked(&driver, old, table, PAIRWISE_CANDIDATES) {
            let extended = extend_with_old(partial, &flat, old, &cand.pairs, table);
            insert_partial(pool, extended);
        }
    }

    // against every unconsumed New pattern, inserted at each row-0 slot
    for (new_idx, new_pattern) in input.patterns.iter().enumerate() {
        if partial.consumed.contains(&new_idx) {
            continue;
        }
        for slot in 0..=partial.row0_lens.len() {
            let insert_pos: usize = partial.row0_lens[..slot].iter().sum();
            if let Some((window_start, driver)) = insertion_window(&partial.alignment, &flat, insert_pos)
            {
                for cand in pairwise_align_masked(&driver, new_pattern, table, PAIRWISE_CANDIDATES)
                {
                    let extended = extend_with_new(
                        partial,
                        &flat,
                        window_start,
                        new_idx,
                        new_pattern,
                        slot,
                        insert_pos,
                        &cand.pairs,
                        table,
                    );
                    insert_partial(pool, extended);
                }
            }
        }
    }
}

fn insert_partial(pool: &mut BTreeMap<String, Partial>, partial: Partial) {
    pool.entry(partial.canon.clone()).or_insert(partial);
}

/// Row-0 position a flat item is pinned to, if any.
fn anchored_position(a: &Alignment, item: &FlatItem) -> Option<usize> {
    match item.source {
        FlatSource::Instance { row: 0, position } => Some(position),
        FlatSource::Instance { .. } => None,
        FlatSource::Column(c) => a.columns[c].entry_for_row(0).map(|e| e.position),
    }
}

/// The flat sub-sequence available to a New pattern inserted at row-0
/// position `insert_pos`: everything strictly between the last item
/// anchored before the slot and the first item anchored at or after it.
/// Row-0 leftovers are masked out (two New symbols cannot share a column),
/// as are columns that already contain a row-0 entry.
fn insertion_window<'a>(
    a: &Alignment,
    flat: &'a [FlatItem],
    insert_pos: usize,
) -> Option<(usize, Vec<(&'a str, bool)>)> {
    let mut lo: isize = -1;
    let mut hi: usize = flat.len();
    for (i, item) in flat.iter().enumerate() {
        if let Some(pos) = anchored_position(a, item) {
            if pos < insert_pos {
                lo = i as isize;
            } else if i < hi {
                hi = i;
            }
        }
    }
    let start = (lo + 1) as usize;
    if start >= hi {
        return None;
    }
    let driver: Vec<(&str, bool)> = flat[start..hi]
        .iter()
        .map(|item| {
            let eligible = match item.source {
                FlatSource::Instance { row, .. } => row != 0,
                FlatSource::Column(c) => a.columns[c].entry_for_row(0).is_none(),
            };
            (item.name.as_str(), eligible)
        })
        .collect();
    Some((start, driver))
}

fn extend_with_old(
    partial: &Partial,
    flat: &[FlatItem],
    old: &SPPattern,
    pairs: &[(usize, usize)],
    table: &FrequencyTable,
) -> Partial {
    let mut alignment = partial.alignment.clone();
    let new_row = alignment.rows.len();
    let instance = alignment.instance_count(&old.id) as u32 + 1;
    alignment.rows.push(Row {
        kind: RowKind::Old {
            pattern_id: old.id.clone(),
            instance,
        },
        symbols: old.symbols.clone(),
    });
    for &(di, tj) in pairs {
        match flat[di].source {
            FlatSource::Column(c) => {
                let mut entries = alignment.columns[c].entries.clone();
                entries.push(SymbolInstance::new(new_row, tj));
                alignment.columns[c] = MatchColumn::new(alignment.columns[c].symbol_name.clone(), entries);
            }
            FlatSource::Instance { row, position } => {
                alignment.columns.push(MatchColumn::new(
                    old.symbols[tj].name.clone(),
                    vec![
                        SymbolInstance::new(row, position),
                        SymbolInstance::new(new_row, tj),
                    ],
                ));
            }
        }
    }
    alignment.score = Some(encode_alignment_unchecked(&alignment, table));
    debug_assert!(
        super::check_alignment_legal(&alignment).is_empty(),
        "old-extension produced an illegal alignment: {:?}",
        super::check_alignment_legal(&alignment)
    );
    Partial {
        canon: alignment.canonical_string(),
        alignment,
        consumed: partial.consumed.clone(),
        row0_lens: partial.row0_lens.clone(),
    }
}

#[allow(clippy::too_many_arguments)]
fn extend_with_new(
    partial: &Partial,
    flat: &[FlatItem],
    window_start: usize,
    new_idx: usize,
    new_pattern: &SPPattern,
    slot: usize,
    insert_pos: usize,
    pairs: &[(usize, usize)],
    table: &FrequencyTable,
) -> Partial {
    let mut alignment = partial.alignment.clone();
    let added = new_pattern.len();

    // splice the pattern into row 0 and shift later row-0 entries
    match &mut alignment.rows[0].kind {
        RowKind::New { pattern_ids } => pattern_ids.insert(slot, new_pattern.id.clone()),
        RowKind::Old { .. } => unreachable!("row 0 is always the New row"),
    }
    let tail = alignment.rows[0].symbols.split_off(insert_pos);
    alignment.rows[0]
        .symbols
        .extend(new_pattern.symbols.iter().cloned());
    alignment.rows[0].symbols.extend(tail);
    for col in &mut alignment.columns {
        for e in &mut col.entries {
            if e.row == 0 && e.position >= insert_pos {
                e.position += added;
            }
        }
    }

    for &(di, tj) in pairs {
        let row0_pos = insert_pos + tj;
        match flat[window_start + di].source {
            FlatSource::Column(c) => {
                let mut entries = alignment.columns[c].entries.clone();
                entries.push(SymbolInstance::new(0, row0_pos));
                alignment.columns[c] = MatchColumn::new(alignment.columns[c].symbol_name.clone(), entries);
            }
            FlatSource::Instance { row, position } => {
                alignment.columns.push(MatchColumn::new(
                    new_pattern.symbols[tj].name.clone(),
                    vec![
                        SymbolInstance::new(row, position),
                        SymbolInstance::new(0, row0_pos),
                    ],
                ));
            }
        }
    }

    let mut row0_lens = partial.row0_lens.clone();
    row0_lens.insert(slot, added);
    let mut consumed = partial.consumed.clone();
    consumed.insert(new_idx);

    alignment.score = Some(encode_alignment_unchecked(&alignment, table));
    debug_assert!(
        super::check_alignment_legal(&alignment).is_empty(),
        "new-insertion produced an illegal alignment: {:?}",
        super::check_alignment_legal(&alignment)
    );
    Partial {
        canon: alignment.canonical_string(),
        alignment,
        consumed,
        row0_lens,
    }
}

/// Appends the New patterns the search never matched to the end of row 0 so
/// the returned alignment records the whole input. Unmatched New symbols
/// contribute nothing to the score.
fn finalize(partial: Partial, input: &NewInput) -> Alignment {
    let mut alignment = partial.alignment;
    for (idx, p) in input.patterns.iter().enumerate() {
        if !partial.consumed.contains(&idx) {
            match &mut alignment.rows[0].kind {
                RowKind::New { pattern_ids } => pattern_ids.push(p.id.clone()),
                RowKind::Old { .. } => unreachable!(),
            }
            alignment.rows[0].symbols.extend(p.symbols.iter().cloned());
        }
    }
    alignment
}
