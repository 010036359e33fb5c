//! Bit costs, alignment encodings (BN / BE / CD), probabilities, and
//! two-part grammar scores. Pure functions over immutable inputs.

use std::collections::BTreeMap;

use crate::align::{build_multiple_alignment, check_alignment_legal, Alignment, SearchParams};
use crate::error::{Error, Result};
use crate::model::{KnowledgeStore, NewInput};

/// Per-symbol-name frequencies with a floor for unseen names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: BTreeMap<String, u64>,
    total: u64,
    floor: u64,
}

impl FrequencyTable {
    pub fn new(counts: BTreeMap<String, u64>) -> Self {
        let total = counts.values().sum();
        FrequencyTable {
            counts,
            total,
            floor: 1,
        }
    }

    pub fn count(&self, name: &str) -> u64 {
        self.counts.get(name).copied().unwrap_or(self.floor)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn floor(&self) -> u64 {
        self.floor
    }

    /// `-log2(f/F)`; strictly decreasing in `f`, zero when a single name
    /// owns the whole table.
    pub fn cost(&self, name: &str) -> f64 {
        symbol_cost(self, name)
    }

    /// Cost of transmitting a sequence raw, with no grammar support beyond
    /// this table. Unseen names extend the denominator by the floor mass of
    /// each distinct new name, so raw storage is never free — in particular
    /// an empty table still prices a sequence by its alphabet.
    pub fn raw_sequence_cost<S: AsRef<str>>(&self, names: &[S]) -> f64 {
        let mut unseen: Vec<&str> = names
            .iter()
            .map(|n| n.as_ref())
            .filter(|n| !self.counts.contains_key(*n))
            .collect();
        unseen.sort_unstable();
        unseen.dedup();
        let total_eff = (self.total + unseen.len() as u64 * self.floor).max(1);
        names
            .iter()
            .map(|n| {
                let f = self.count(n.as_ref());
                ((total_eff as f64) / (f as f64)).log2()
            })
            .sum()
    }
}

/// `-log2(f(name)/F)` with `f = counts[name]` if present, else the floor.
pub fn symbol_cost(table: &FrequencyTable, name: &str) -> f64 {
    let f = table.count(name);
    ((table.total.max(1) as f64) / (f as f64)).log2()
}

/// The encoding economy of one alignment: `BN` bits of matched New symbols,
/// `BE` bits of code, and their difference `CD`, which ranks alignments.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingResult {
    pub bn: f64,
    pub be: f64,
    pub cd: f64,
    /// Unmatched identification symbols of the participating Old instances,
    /// in row-then-position order.
    pub code: Vec<String>,
}

/// Prices an alignment against `table`.
///
/// `BN` sums the cost of every New symbol instance that sits in a column;
/// the code collects each Old row's identification symbols that sit in no
/// column (not predicted by context), and `BE` is its summed cost.
pub fn encode_alignment(a: &Alignment, table: &FrequencyTable) -> Result<EncodingResult> {
    let violations = check_alignment_legal(a);
    if !violations.is_empty() {
        return Err(Error::IllegalAlignment(violations));
    }
    Ok(encode_alignment_unchecked(a, table))
}

/// Same as [`encode_alignment`] but assumes legality. Used by the search
/// inner loop where candidates are legal by construction.
pub(crate) fn encode_alignment_unchecked(a: &Alignment, table: &FrequencyTable) -> EncodingResult {
    let matched = a.matched_instances();
    let mut bn = 0.0;
    for (pos, sym) in a.rows[0].symbols.iter().enumerate() {
        if matched.contains(&(0, pos)) {
            bn += symbol_cost(table, &sym.name);
        }
    }
    let mut code = Vec::new();
    let mut be = 0.0;
    for (row_idx, row) in a.rows.iter().enumerate().skip(1) {
        for (pos, sym) in row.symbols.iter().enumerate() {
            if sym.is_id() && !matched.contains(&(row_idx, pos)) {
                be += symbol_cost(table, &sym.name);
                code.push(sym.name.clone());
            }
        }
    }
    EncodingResult {
        bn,
        be,
        cd: bn - be,
        code,
    }
}

/// Absolute and candidate-set-relative probability of one alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentProbability {
    pub p_abs: f64,
    pub p_rel: f64,
}

/// `p_abs = 2^(-BE)`, normalized over the candidate set. Order preserved.
pub fn alignment_probabilities(
    candidates: &[(Alignment, EncodingResult)],
) -> Result<Vec<AlignmentProbability>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let abs: Vec<f64> = candidates.iter().map(|(_, e)| (-e.be).exp2()).collect();
    let sum: f64 = abs.iter().sum();
    Ok(abs
        .into_iter()
        .map(|p_abs| AlignmentProbability {
            p_abs,
            p_rel: p_abs / sum,
        })
        .collect())
}

/// Two-part description length of a grammar: `G` bits for the grammar
/// itself plus `E` bits to encode a corpus with it.
#[derive(Debug, Clone, PartialEq)]
pub struct GrammarScore {
    pub g: f64,
    pub e: f64,
    pub total: f64,
}

/// Scores `grammar` (viewed as a store) against `corpus`.
///
/// `G` prices every grammar symbol with the grammar's own table. Each corpus
/// item contributes the `BE` of its best alignment, falling back to the raw
/// sequence cost when no alignment reaches `params.min_cd`.
pub fn grammar_score(
    grammar: &KnowledgeStore,
    corpus: &[NewInput],
    params: &SearchParams,
) -> GrammarScore {
    let table = match grammar.frequency_table() {
        Ok(t) => t,
        Err(_) => FrequencyTable::new(BTreeMap::new()),
    };
    let mut g = 0.0;
    for p in grammar.patterns() {
        for sym in &p.symbols {
            g += symbol_cost(&table, &sym.name);
        }
    }
    let mut e = 0.0;
    for item in corpus {
        let best_be = if grammar.is_empty() {
            None
        } else {
            build_multiple_alignment(item, grammar, params)
                .ok()
                .and_then(|alignments| {
                    alignments
                        .into_iter()
                        .next()
                        .map(|a| a.score.as_ref().map(|s| s.be).unwrap_or(0.0))
                })
        };
        match best_be {
            Some(be) => e += be,
            None => {
                let names: Vec<&str> = item
                    .patterns
                    .iter()
                    .flat_map(|p| p.names())
                    .collect();
                e += table.raw_sequence_cost(&names);
            }
        }
    }
    GrammarScore {
        g,
        e,
        total: g + e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SPPattern, SPSymbol};

    fn table_of(pairs: &[(&str, u64)]) -> FrequencyTable {
        FrequencyTable::new(
            pairs
                .iter()
                .map(|(n, c)| (n.to_string(), *c))
                .collect(),
        )
    }

    #[test]
    fn uniform_table_symmetric_cost() {
        let names: Vec<(String, u64)> = (0..8).map(|i| (format!("s{i}"), 1)).collect();
        let table = FrequencyTable::new(names.into_iter().collect());
        for i in 0..8 {
            assert!((symbol_cost(&table, &format!("s{i}")) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_name_costs_nothing() {
        let table = table_of(&[("only", 5)]);
        assert_eq!(symbol_cost(&table, "only"), 0.0);
    }

    #[test]
    fn unseen_name_priced_at_floor() {
        let table = table_of(&[("a", 3), ("b", 1)]);
        assert!((symbol_cost(&table, "zz") - (4f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn cost_decreases_with_frequency() {
        let table = table_of(&[("rare", 1), ("mid", 4), ("common", 16)]);
        let r = symbol_cost(&table, "rare");
        let m = symbol_cost(&table, "mid");
        let c = symbol_cost(&table, "common");
        assert!(r > m && m > c);
    }

    #[test]
    fn raw_cost_of_unseen_alphabet_is_positive() {
        let empty = FrequencyTable::new(BTreeMap::new());
        let cost = empty.raw_sequence_cost(&["a", "b", "c"]);
        assert!((cost - 3.0 * (3f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn grammar_score_empty_corpus_is_grammar_only() {
        let store = KnowledgeStore::new()
            .with_pattern(SPPattern::new(
                "x",
                vec![
                    SPSymbol::id("X"),
                    SPSymbol::contents("a"),
                    SPSymbol::contents("b"),
                    SPSymbol::contents("c"),
                ],
                1,
            ))
            .unwrap();
        let score = grammar_score(&store, &[], &SearchParams::default());
        assert_eq!(score.e, 0.0);
        assert!((score.total - score.g).abs() < 1e-12);
        // four symbols, each f=1 of F=4
        assert!((score.g - 4.0 * 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_empty_grammar_encodes_cheaper_than_empty() {
        let item = NewInput::from_names("n", &["a", "b", "c"]).unwrap();
        let with = KnowledgeStore::new()
            .with_pattern(SPPattern::new(
                "x",
                vec![
                    SPSymbol::id("X"),
                    SPSymbol::contents("a"),
                    SPSymbol::contents("b"),
                    SPSymbol::contents("c"),
                ],
                1,
            ))
            .unwrap();
        let without = KnowledgeStore::new();
        let params = SearchParams::default();
        let s_with = grammar_score(&with, std::slice::from_ref(&item), &params);
        let s_without = grammar_score(&without, std::slice::from_ref(&item), &params);
        assert!(
            s_with.e < s_without.e,
            "expected E with grammar ({}) < E without ({})",
            s_with.e,
            s_without.e
        );
    }
}
