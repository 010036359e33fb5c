//! Domain types for symbols, patterns and the knowledge store.
//!
//! Everything here is immutable after construction; store updates return new
//! store values rather than mutating in place, so all types can be shared
//! read-only across threads.

use std::collections::BTreeMap;

use crate::error::{Error, Result, Violation};
use crate::score::FrequencyTable;

/// Role of a symbol within its pattern.
///
/// Identification symbols name or bracket a pattern; the unmatched ones form
/// the code an alignment is priced by. Contents symbols carry the pattern's
/// substance and, when unmatched against incoming data, become inferences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolRole {
    Identification,
    Contents,
}

/// An atomic symbol: a name plus a role flag. Symbols match only by exact
/// name equality; the role never gates matching.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SPSymbol {
    pub name: String,
    pub role: SymbolRole,
}

impl SPSymbol {
    pub fn new(name: impl Into<String>, role: SymbolRole) -> Self {
        SPSymbol {
            name: name.into(),
            role,
        }
    }

    pub fn id(name: impl Into<String>) -> Self {
        Self::new(name, SymbolRole::Identification)
    }

    pub fn contents(name: impl Into<String>) -> Self {
        Self::new(name, SymbolRole::Contents)
    }

    pub fn is_id(&self) -> bool {
        self.role == SymbolRole::Identification
    }
}

/// Where a pattern came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternOrigin {
    User,
    Learned,
}

/// A one-dimensional sequence of symbols with an occurrence frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SPPattern {
    pub id: String,
    pub symbols: Vec<SPSymbol>,
    pub frequency: u32,
    pub origin: PatternOrigin,
}

impl SPPattern {
    pub fn new(id: impl Into<String>, symbols: Vec<SPSymbol>, frequency: u32) -> Self {
        SPPattern {
            id: id.into(),
            symbols,
            frequency,
            origin: PatternOrigin::User,
        }
    }

    pub fn learned(id: impl Into<String>, symbols: Vec<SPSymbol>, frequency: u32) -> Self {
        SPPattern {
            origin: PatternOrigin::Learned,
            ..Self::new(id, symbols, frequency)
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(|s| s.name.as_str())
    }

    /// Positions of contents-role symbols.
    pub fn contents_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_id())
            .map(|(i, _)| i)
    }
}

/// Checks every `SPPattern` invariant, returning all violations rather than
/// stopping at the first. Violations are data, not failures.
pub fn validate_pattern(p: &SPPattern) -> Vec<Violation> {
    let mut violations = Vec::new();
    if p.symbols.is_empty() {
        violations.push(Violation::new("empty pattern", format!("pattern `{}`", p.id)));
    }
    if p.frequency < 1 {
        violations.push(Violation::new(
            "frequency < 1",
            format!("pattern `{}` has frequency {}", p.id, p.frequency),
        ));
    }
    if p.id.is_empty() || p.id.chars().any(char::is_whitespace) {
        violations.push(Violation::new(
            "bad id",
            format!("pattern id `{}` is empty or contains whitespace", p.id),
        ));
    }
    for (i, sym) in p.symbols.iter().enumerate() {
        if sym.name.is_empty() {
            violations.push(Violation::new(
                "empty symbol name",
                format!("pattern `{}` position {i}", p.id),
            ));
        } else if sym.name.chars().any(char::is_whitespace) || sym.name.contains('|') {
            violations.push(Violation::new(
                "bad symbol name",
                format!("pattern `{}` position {i}: `{}`", p.id, sym.name),
            ));
        }
    }
    violations
}

/// The store of Old patterns, keyed by pattern id.
///
/// Backed by a `BTreeMap` so iteration order (and everything derived from
/// it) is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeStore {
    patterns: BTreeMap<String, SPPattern>,
}

impl KnowledgeStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_patterns(patterns: impl IntoIterator<Item = SPPattern>) -> Result<Self> {
        let mut store = Self::new();
        for p in patterns {
            store = store.with_pattern(p)?;
        }
        Ok(store)
    }

    /// Returns a new store containing `p` in addition to everything already
    /// present. Rejects invalid patterns and duplicate ids.
    pub fn with_pattern(&self, p: SPPattern) -> Result<Self> {
        let violations = validate_pattern(&p);
        if !violations.is_empty() {
            return Err(Error::InvalidPattern {
                id: p.id,
                violations,
            });
        }
        if self.patterns.contains_key(&p.id) {
            return Err(Error::DuplicateId(p.id));
        }
        let mut next = self.clone();
        next.patterns.insert(p.id.clone(), p);
        Ok(next)
    }

    pub fn get(&self, id: &str) -> Option<&SPPattern> {
        self.patterns.get(id)
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Patterns in id order.
    pub fn patterns(&self) -> impl Iterator<Item = &SPPattern> {
        self.patterns.values()
    }

    /// Per-symbol-name frequencies and totals for the whole store.
    ///
    /// `f(s)` sums `frequency(p) * count of s in p` over every pattern; the
    /// table keeps a floor of 1 so unseen names stay priceable.
    pub fn frequency_table(&self) -> Result<FrequencyTable> {
        if self.patterns.is_empty() {
            return Err(Error::EmptyStore);
        }
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for p in self.patterns.values() {
            for sym in &p.symbols {
                *counts.entry(sym.name.clone()).or_insert(0) += u64::from(p.frequency);
            }
        }
        Ok(FrequencyTable::new(counts))
    }
}

/// Incoming information: an ordered sequence of patterns to be encoded in
/// terms of the store. Frequencies are forced to 1 and every symbol is
/// treated as contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewInput {
    pub patterns: Vec<SPPattern>,
}

impl NewInput {
    pub fn new(patterns: Vec<SPPattern>) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut normalized = Vec::with_capacity(patterns.len());
        for mut p in patterns {
            p.frequency = 1;
            for sym in &mut p.symbols {
                sym.role = SymbolRole::Contents;
            }
            let violations = validate_pattern(&p);
            if !violations.is_empty() {
                return Err(Error::InvalidPattern {
                    id: p.id,
                    violations,
                });
            }
            normalized.push(p);
        }
        Ok(NewInput {
            patterns: normalized,
        })
    }

    /// Convenience constructor for a single sequence of symbol names.
    pub fn from_names<S: AsRef<str>>(id: &str, names: &[S]) -> Result<Self> {
        let symbols = names
            .iter()
            .map(|n| SPSymbol::contents(n.as_ref()))
            .collect();
        Self::new(vec![SPPattern::new(id, symbols, 1)])
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(name: &str) -> SPSymbol {
        SPSymbol::contents(name)
    }

    #[test]
    fn minimal_legal_pattern_validates() {
        let p = SPPattern::new("p", vec![sym("fruit")], 1);
        assert!(validate_pattern(&p).is_empty());
    }

    #[test]
    fn empty_symbol_sequence_is_violation() {
        let p = SPPattern::new("p", vec![], 1);
        let v = validate_pattern(&p);
        assert!(v.iter().any(|v| v.invariant == "empty pattern"));
    }

    #[test]
    fn zero_frequency_is_violation() {
        let p = SPPattern::new("p", vec![sym("a")], 0);
        let v = validate_pattern(&p);
        assert!(v.iter().any(|v| v.invariant == "frequency < 1"));
    }

    #[test]
    fn add_pattern_grows_store() {
        // the fruit-flies row-1 pattern, ids marked
        let p = SPPattern::new(
            "fr1",
            vec![
                SPSymbol::id("A"),
                SPSymbol::id("12"),
                SPSymbol::contents("fruit"),
                SPSymbol::id("#A"),
            ],
            12,
        );
        let store = KnowledgeStore::new().with_pattern(p).unwrap();
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn duplicate_id_rejected() {
        let store = KnowledgeStore::new()
            .with_pattern(SPPattern::new("p1", vec![sym("a")], 1))
            .unwrap();
        let err = store
            .with_pattern(SPPattern::new("p1", vec![sym("b")], 1))
            .unwrap_err();
        match err {
            Error::DuplicateId(id) => assert_eq!(id, "p1"),
            other => panic!("expected duplicate-id error, got {other}"),
        }
    }

    #[test]
    fn add_preserves_existing_patterns() {
        let p1 = SPPattern::new("p1", vec![sym("a")], 1);
        let p2 = SPPattern::new("p2", vec![sym("b")], 2);
        let store = KnowledgeStore::new().with_pattern(p1.clone()).unwrap();
        let store2 = store
            .with_pattern(p2)
            .unwrap()
            .with_pattern(SPPattern::new("p3", vec![sym("c")], 1))
            .unwrap();
        assert_eq!(store2.len(), 3);
        assert_eq!(store2.get("p1"), Some(&p1));
    }

    #[test]
    fn frequency_table_counts_directly() {
        let store = KnowledgeStore::new()
            .with_pattern(SPPattern::new(
                "x",
                vec![SPSymbol::id("X"), sym("a"), sym("b")],
                1,
            ))
            .unwrap();
        let table = store.frequency_table().unwrap();
        assert_eq!(table.count("X"), 1);
        assert_eq!(table.count("a"), 1);
        assert_eq!(table.count("b"), 1);
        assert_eq!(table.total(), 3);
    }

    #[test]
    fn frequency_table_weights_by_pattern_frequency() {
        let store = KnowledgeStore::new()
            .with_pattern(SPPattern::new(
                "x",
                vec![SPSymbol::id("X"), sym("a"), sym("a")],
                2,
            ))
            .unwrap();
        let table = store.frequency_table().unwrap();
        assert_eq!(table.count("X"), 2);
        assert_eq!(table.count("a"), 4);
        assert_eq!(table.total(), 6);
    }

    #[test]
    fn empty_store_has_no_table() {
        assert!(matches!(
            KnowledgeStore::new().frequency_table(),
            Err(Error::EmptyStore)
        ));
    }

    #[test]
    fn new_input_forces_frequency_and_roles() {
        let p = SPPattern::new("n1", vec![SPSymbol::id("x")], 7);
        let input = NewInput::new(vec![p]).unwrap();
        assert_eq!(input.patterns[0].frequency, 1);
        assert_eq!(input.patterns[0].symbols[0].role, SymbolRole::Contents);
    }
}
