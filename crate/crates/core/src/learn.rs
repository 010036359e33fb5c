//! Unsupervised learning: assimilate New patterns into candidate Old
//! patterns from the matched and unmatched parts of partial alignments,
//! then select a grammar by MDL beam search over the candidate pool.

use std::collections::{BTreeMap, BTreeSet};

use crate::align::{build_multiple_alignment, SearchParams};
use crate::error::{Error, Result};
use crate::model::{KnowledgeStore, NewInput, SPPattern, SPSymbol};
use crate::score::{grammar_score, GrammarScore};

/// A collection of Old patterns with a note on where each came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    pub store: KnowledgeStore,
    pub provenance: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct LearnParams {
    /// Matches below this CD are treated as noise: the pattern is stored whole.
    pub assimilation_min_cd: f64,
    /// Grammars retained per selection stage.
    pub grammar_beam: usize,
    /// Cap on selection stages.
    pub max_rounds: usize,
    /// Reserved prefix for fresh identification symbols.
    pub id_prefix: String,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            assimilation_min_cd: 0.5,
            grammar_beam: 20,
            max_rounds: 10,
            id_prefix: "%".to_string(),
        }
    }
}

/// Allocator for fresh identification symbols (`%1`, `%2`, ...) and learned
/// pattern ids (`g0001`, ...), seeded past anything already in the store.
struct FreshIds {
    next_symbol: u32,
    next_pattern: u32,
    prefix: String,
}

impl FreshIds {
    fn scan(store: &KnowledgeStore, prefix: &str) -> Self {
        let mut max_sym = 0u32;
        let mut max_pat = 0u32;
        for p in store.patterns() {
            if let Some(rest) = p.id.strip_prefix('g') {
                if let Ok(n) = rest.parse::<u32>() {
                    max_pat = max_pat.max(n);
                }
            }
            for s in &p.symbols {
                let body = s
                    .name
                    .strip_prefix(prefix)
                    .map(|r| r.strip_prefix('#').unwrap_or(r));
                if let Some(Ok(n)) = body.map(|r| r.parse::<u32>()) {
                    max_sym = max_sym.max(n);
                }
            }
        }
        FreshIds {
            next_symbol: max_sym + 1,
            next_pattern: max_pat + 1,
            prefix: prefix.to_string(),
        }
    }

    /// A fresh `(open, close)` bracket pair, `%k` / `%#k`.
    fn bracket_pair(&mut self) -> (String, String) {
        let k = self.next_symbol;
        self.next_symbol += 1;
        (format!("{}{k}", self.prefix), format!("{}#{k}", self.prefix))
    }

    fn symbol(&mut self) -> String {
        let k = self.next_symbol;
        self.next_symbol += 1;
        format!("{}{k}", self.prefix)
    }

    fn pattern_id(&mut self) -> String {
        let id = format!("g{:04}", self.next_pattern);
        self.next_pattern += 1;
        id
    }
}

fn contents_names(p: &SPPattern) -> Vec<String> {
    p.symbols
        .iter()
        .filter(|s| !s.is_id())
        .map(|s| s.name.clone())
        .collect()
}

/// Existing learned bracket-pair chunks, keyed by their contents sequence,
/// so re-derived chunks reuse brackets instead of minting colliding twins.
fn chunk_index(store: &KnowledgeStore) -> BTreeMap<Vec<String>, (String, String)> {
    let mut index = BTreeMap::new();
    for p in store.patterns() {
        let n = p.symbols.len();
        if n >= 3
            && p.symbols[0].is_id()
            && p.symbols[n - 1].is_id()
            && p.symbols[1..n - 1].iter().all(|s| !s.is_id())
        {
            index
                .entry(contents_names(p))
                .or_insert((p.symbols[0].name.clone(), p.symbols[n - 1].name.clone()));
        }
    }
    index
}

fn make_chunk(
    ids: &mut FreshIds,
    index: &mut BTreeMap<Vec<String>, (String, String)>,
    names: &[String],
    brackets: Option<(String, String)>,
    note: &str,
    out: &mut Vec<(SPPattern, String)>,
) -> (String, String) {
    if let Some(existing) = index.get(names) {
        return existing.clone();
    }
    let (open, close) = brackets.unwrap_or_else(|| ids.bracket_pair());
    let mut symbols = Vec::with_capacity(names.len() + 2);
    symbols.push(SPSymbol::id(open.clone()));
    symbols.extend(names.iter().map(SPSymbol::contents));
    symbols.push(SPSymbol::id(close.clone()));
    out.push((
        SPPattern::learned(ids.pattern_id(), symbols, 1),
        note.to_string(),
    ));
    index.insert(names.to_vec(), (open.clone(), close.clone()));
    (open, close)
}

/// Derives candidate Old patterns from one New pattern.
///
/// With no usable match, the pattern is stored whole behind a fresh
/// identification symbol. Otherwise the best partial alignment is split
/// into maximal matched and unmatched runs: each run becomes a
/// bracket-pair chunk (the two sides of a gap share one bracket pair,
/// making them alternatives for the same slot), and one abstraction
/// pattern sequences references to the runs.
pub fn assimilate(
    p: &SPPattern,
    store: &KnowledgeStore,
    params: &LearnParams,
    sparams: &SearchParams,
) -> Result<Vec<(SPPattern, String)>> {
    let input = NewInput::new(vec![p.clone()])?;
    let mut ids = FreshIds::scan(store, &params.id_prefix);
    let mut index = chunk_index(store);
    let mut out: Vec<(SPPattern, String)> = Vec::new();

    let best = if store.is_empty() {
        None
    } else {
        let mut search = sparams.clone();
        search.min_cd = f64::NEG_INFINITY;
        search.max_alignments = 1;
        build_multiple_alignment(&input, store, &search)?
            .into_iter()
            .next()
            .filter(|a| a.cd() >= params.assimilation_min_cd)
    };

    let alignment = match best {
        None => {
            // store whole, with one fresh identification symbol
            let mut symbols = vec![SPSymbol::id(ids.symbol())];
            symbols.extend(p.symbols.iter().map(|s| SPSymbol::contents(&s.name)));
            out.push((
                SPPattern::learned(ids.pattern_id(), symbols, 1),
                format!("stored whole from `{}`", p.id),
            ));
            return Ok(out);
        }
        Some(a) => a,
    };

    // the matched Old pattern: the row sharing the most columns with row 0
    let old_row = (1..alignment.rows.len())
        .max_by_key(|&r| (alignment.shared_with_new(r), usize::MAX - r))
        .expect("alignment has an old row");
    let old = &alignment.rows[old_row];
    let old_id = old.pattern_id().expect("old row").to_string();

    let mut pairs: Vec<(usize, usize)> = alignment
        .columns
        .iter()
        .filter_map(|c| {
            let new_e = c.entry_for_row(0)?;
            let old_e = c.entry_for_row(old_row)?;
            Some((new_e.position, old_e.position))
        })
        .collect();
    pairs.sort();

    // maximal runs: consecutive pairs stepping +1 on both sides
    let mut runs: Vec<Vec<(usize, usize)>> = Vec::new();
    for pair in pairs {
        match runs.last_mut() {
            Some(run) if run.last().map(|&(a, b)| (a + 1, b + 1)) == Some(pair) => {
                run.push(pair);
            }
            _ => runs.push(vec![pair]),
        }
    }

    let p_names: Vec<String> = p.symbols.iter().map(|s| s.name.clone()).collect();
    let old_contents: Vec<(usize, String)> = old
        .symbols
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_id())
        .map(|(i, s)| (i, s.name.clone()))
        .collect();

    // walk gap, run, gap, run, ..., gap and collect abstraction references
    let mut refs: Vec<(String, String)> = Vec::new();
    let mut p_cursor = 0usize;
    let mut old_cursor = 0usize; // index into old_contents
    for run_idx in 0..=runs.len() {
        let (p_end, old_end_pos) = if run_idx < runs.len() {
            (runs[run_idx][0].0, runs[run_idx][0].1)
        } else {
            (p_names.len(), usize::MAX)
        };
        let p_gap: Vec<String> = p_names[p_cursor..p_end].to_vec();
        let mut old_gap: Vec<String> = Vec::new();
        while old_cursor < old_contents.len() && old_contents[old_cursor].0 < old_end_pos {
            old_gap.push(old_contents[old_cursor].1.clone());
            old_cursor += 1;
        }
        if !p_gap.is_empty() || !old_gap.is_empty() {
            let mut brackets: Option<(String, String)> = None;
            if !p_gap.is_empty() {
                let b = make_chunk(
                    &mut ids,
                    &mut index,
                    &p_gap,
                    None,
                    &format!("unmatched run of `{}`", p.id),
                    &mut out,
                );
                brackets = Some(b);
            }
            if !old_gap.is_empty() {
                let b = make_chunk(
                    &mut ids,
                    &mut index,
                    &old_gap,
                    brackets.clone(),
                    &format!("unmatched run of `{old_id}`"),
                    &mut out,
                );
                if brackets.is_none() {
                    brackets = Some(b);
                }
            }
            refs.push(brackets.expect("gap produced a slot"));
        }
        if run_idx < runs.len() {
            let run = &runs[run_idx];
            let names: Vec<String> = run.iter().map(|&(pi, _)| p_names[pi].clone()).collect();
            let b = make_chunk(
                &mut ids,
                &mut index,
                &names,
                None,
                &format!("matched run of `{}` and `{old_id}`", p.id),
                &mut out,
            );
            refs.push(b);
            p_cursor = run.last().unwrap().0 + 1;
            while old_cursor < old_contents.len()
                && old_contents[old_cursor].0 <= run.last().unwrap().1
            {
                old_cursor += 1;
            }
        }
    }

    if refs.len() > 1 {
        let mut symbols = vec![SPSymbol::id(ids.symbol())];
        for (open, close) in &refs {
            symbols.push(SPSymbol::contents(open));
            symbols.push(SPSymbol::contents(close));
        }
        out.push((
            SPPattern::learned(ids.pattern_id(), symbols, 1),
            format!("abstraction of `{}` against `{old_id}`", p.id),
        ));
    }
    Ok(out)
}

/// Learns a grammar from a corpus: phase 1 folds [`assimilate`] over the
/// corpus in order (against the growing pool), phase 2 grows grammars from
/// empty, each stage adding the candidate that most decreases `G + E` and
/// keeping the `grammar_beam` best. Deterministic for a fixed corpus.
pub fn induce_grammar(
    corpus: &[SPPattern],
    params: &LearnParams,
    sparams: &SearchParams,
) -> Result<(Grammar, GrammarScore)> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput);
    }

    // phase 1: candidate pool
    let mut pool = KnowledgeStore::new();
    let mut provenance: BTreeMap<String, String> = BTreeMap::new();
    for item in corpus {
        for (candidate, note) in assimilate(item, &pool, params, sparams)? {
            provenance.insert(candidate.id.clone(), note);
            pool = pool.with_pattern(candidate)?;
        }
    }

    // candidate frequency: corpus items whose best alignment against the
    // pool uses the pattern
    let mut usage: BTreeMap<String, u32> = BTreeMap::new();
    for item in corpus {
        let input = NewInput::new(vec![item.clone()])?;
        let mut search = sparams.clone();
        search.min_cd = f64::NEG_INFINITY;
        search.max_alignments = 1;
        if let Some(best) = build_multiple_alignment(&input, &pool, &search)?.into_iter().next() {
            let used: BTreeSet<&str> =
                best.rows.iter().filter_map(|r| r.pattern_id()).collect();
            for id in used {
                *usage.entry(id.to_string()).or_insert(0) += 1;
            }
        }
    }
    let candidates: Vec<SPPattern> = pool
        .patterns()
        .map(|p| {
            let mut p = p.clone();
            p.frequency = usage.get(&p.id).copied().unwrap_or(0).max(1);
            p
        })
        .collect();

    let corpus_inputs: Vec<NewInput> = corpus
        .iter()
        .map(|item| NewInput::new(vec![item.clone()]))
        .collect::<Result<_>>()?;

    // phase 2: additive beam search over candidate subsets
    let empty = KnowledgeStore::new();
    let empty_score = grammar_score(&empty, &corpus_inputs, sparams);
    let mut beam: Vec<(BTreeSet<String>, f64)> = vec![(BTreeSet::new(), empty_score.total)];

    for _round in 0..params.max_rounds {
        let mut pool_next: BTreeMap<Vec<String>, (BTreeSet<String>, f64)> = BTreeMap::new();
        for (set, total) in &beam {
            pool_next.insert(set.iter().cloned().collect(), (set.clone(), *total));
        }
        let mut grew = false;
        for (set, _) in beam.clone() {
            for candidate in &candidates {
                if set.contains(&candidate.id) {
                    continue;
                }
                let mut next = set.clone();
                next.insert(candidate.id.clone());
                let key: Vec<String> = next.iter().cloned().collect();
                if pool_next.contains_key(&key) {
                    continue;
                }
                let store = subset_store(&candidates, &next);
                let score = grammar_score(&store, &corpus_inputs, sparams);
                pool_next.insert(key, (next, score.total));
                grew = true;
            }
        }
        let mut ranked: Vec<(BTreeSet<String>, f64)> = pool_next.into_values().collect();
        ranked.sort_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then_with(|| a.0.len().cmp(&b.0.len()))
                .then_with(|| a.0.cmp(&b.0))
        });
        ranked.truncate(params.grammar_beam);
        let stalled = ranked
            .first()
            .map(|(set, total)| beam.first().map(|(s, t)| s == set && t == total).unwrap_or(false))
            .unwrap_or(true);
        beam = ranked;
        if !grew || stalled {
            break;
        }
    }

    let (best_set, _) = beam.into_iter().next().expect("beam never empties");
    let store = subset_store(&candidates, &best_set);
    let score = grammar_score(&store, &corpus_inputs, sparams);
    let provenance = provenance
        .into_iter()
        .filter(|(id, _)| best_set.contains(id))
        .collect();
    Ok((Grammar { store, provenance }, score))
}

fn subset_store(candidates: &[SPPattern], ids: &BTreeSet<String>) -> KnowledgeStore {
    KnowledgeStore::from_patterns(
        candidates
            .iter()
            .filter(|p| ids.contains(&p.id))
            .cloned(),
    )
    .expect("pool patterns are valid and unique")
}
