//! Classification and probabilistic inference over scored alignments.
//!
//! Recognising something and inferring its unseen attributes are the same
//! operation here: an Old row's contents symbols that never connect to the
//! New material are exactly what the alignment predicts about it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::align::{build_multiple_alignment, check_alignment_legal, Alignment, SearchParams};
use crate::error::{Error, Result};
use crate::model::{KnowledgeStore, NewInput};
use crate::score::AlignmentProbability;

/// One inferred attribute: a contents symbol of an Old row that the
/// alignment did not ground in the New material.
#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub symbol: String,
    pub source_pattern: String,
    pub source_row: usize,
    /// Unset until aggregated over a candidate set.
    pub probability: Option<f64>,
}

/// Every contents-role symbol instance of every Old row whose column chain
/// never reaches row 0 — unmatched symbols included, Old-to-Old matches
/// included. Ordered by row then position, deduplicated per
/// (symbol, pattern, row).
pub fn extract_inferences(a: &Alignment) -> Result<Vec<Inference>> {
    let violations = check_alignment_legal(a);
    if !violations.is_empty() {
        return Err(Error::IllegalAlignment(violations));
    }
    let grounded = a.matched_to_new();
    let mut seen: BTreeSet<(String, String, usize)> = BTreeSet::new();
    let mut out = Vec::new();
    for (row_idx, row) in a.rows.iter().enumerate().skip(1) {
        let pattern_id = row.pattern_id().expect("old rows carry a pattern id");
        for (pos, sym) in row.symbols.iter().enumerate() {
            if sym.is_id() || grounded.contains(&(row_idx, pos)) {
                continue;
            }
            let key = (sym.name.clone(), pattern_id.to_string(), row_idx);
            if seen.insert(key) {
                out.push(Inference {
                    symbol: sym.name.clone(),
                    source_pattern: pattern_id.to_string(),
                    source_row: row_idx,
                    probability: None,
                });
            }
        }
    }
    Ok(out)
}

/// Aggregates inference probabilities over a normalized candidate set:
/// an inference's probability is the summed relative probability of the
/// candidates that yield it. Keys drop the row, so the same fact from the
/// same pattern accumulates across parses.
pub fn inference_probabilities(
    candidates: &[(Alignment, AlignmentProbability)],
) -> Result<BTreeMap<(String, String), f64>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut acc: BTreeMap<(String, String), f64> = BTreeMap::new();
    for (alignment, prob) in candidates {
        let keys: BTreeSet<(String, String)> = extract_inferences(alignment)?
            .into_iter()
            .map(|inf| (inf.symbol, inf.source_pattern))
            .collect();
        for key in keys {
            *acc.entry(key).or_insert(0.0) += prob.p_rel;
        }
    }
    Ok(acc)
}

/// One recognition level: an Old row of the best alignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassificationLevel {
    pub pattern_id: String,
    pub row: usize,
    /// Names of this row's identification symbols that sit in a column.
    pub matched_id_symbols: Vec<String>,
}

/// Recognition at multiple levels of abstraction: every Old row of the best
/// alignment, most specific first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassificationReport {
    pub levels: Vec<ClassificationLevel>,
}

/// Builds alignments and reports the best one's rows as classification
/// levels. The most specific level is the row sharing the most columns with
/// row 0; from there the report follows identification-symbol links
/// outward. No alignment reaching `min_cd` yields an empty report.
pub fn classify(
    input: &NewInput,
    store: &KnowledgeStore,
    params: &SearchParams,
) -> Result<ClassificationReport> {
    let alignments = build_multiple_alignment(input, store, params)?;
    let best = match alignments.into_iter().next() {
        Some(a) => a,
        None => return Ok(ClassificationReport::default()),
    };
    Ok(classification_of(&best))
}

/// The per-row report for one alignment, most specific row first.
pub fn classification_of(a: &Alignment) -> ClassificationReport {
    let n = a.rows.len();
    if n <= 1 {
        return ClassificationReport::default();
    }
    let matched = a.matched_instances();

    // reference links: rows joined by a column in which at least one side's
    // entry is an identification symbol
    let mut link_weight: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for col in &a.columns {
        let id_bearing: Vec<usize> = col
            .entries
            .iter()
            .filter(|e| e.row > 0 && a.rows[e.row].symbols[e.position].is_id())
            .map(|e| e.row)
            .collect();
        if id_bearing.is_empty() {
            continue;
        }
        for x in &col.entries {
            for y in &col.entries {
                if x.row < y.row
                    && x.row > 0
                    && (id_bearing.contains(&x.row) || id_bearing.contains(&y.row))
                {
                    *link_weight.entry((x.row, y.row)).or_insert(0) += 1;
                }
            }
        }
    }

    let start = (1..n)
        .max_by_key(|&r| (a.shared_with_new(r), usize::MAX - r))
        .expect("at least one old row");

    let mut order = Vec::with_capacity(n - 1);
    let mut visited = vec![false; n];
    let mut queue = VecDeque::from([start]);
    visited[start] = true;
    while let Some(r) = queue.pop_front() {
        order.push(r);
        let mut neighbours: Vec<(usize, usize)> = (1..n)
            .filter(|&s| !visited[s])
            .filter_map(|s| {
                let w = link_weight
                    .get(&(r.min(s), r.max(s)))
                    .copied()
                    .unwrap_or(0);
                (w > 0).then_some((w, s))
            })
            .collect();
        neighbours.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        for (_, s) in neighbours {
            visited[s] = true;
            queue.push_back(s);
        }
    }
    let mut rest: Vec<(usize, usize)> = (1..n)
        .filter(|&r| !visited[r])
        .map(|r| (a.shared_with_new(r), r))
        .collect();
    rest.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
    order.extend(rest.into_iter().map(|(_, r)| r));

    let levels = order
        .into_iter()
        .map(|r| {
            let row = &a.rows[r];
            let matched_id_symbols = row
                .symbols
                .iter()
                .enumerate()
                .filter(|(p, s)| s.is_id() && matched.contains(&(r, *p)))
                .map(|(_, s)| s.name.clone())
                .collect();
            ClassificationLevel {
                pattern_id: row.pattern_id().expect("old row").to_string(),
                row: r,
                matched_id_symbols,
            }
        })
        .collect();
    ClassificationReport { levels }
}
