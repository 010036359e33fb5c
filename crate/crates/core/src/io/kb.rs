//! Line-oriented knowledge-base format.
//!
//! ```text
//! # comment lines start with `#`
//! O <id> <freq> | <sym> <sym> ...
//! N | <sym> <sym> ...
//! ```
//!
//! A `!` prefix marks an identification-role symbol. Because `#` is an
//! ordinary character inside symbol names (`#NP`, `!#A`), comments are
//! recognised only at the start of a line. The `%` prefix is reserved for
//! learned symbols and rejected on input unless explicitly allowed.

use crate::error::{Error, Result};
use crate::model::{validate_pattern, KnowledgeStore, NewInput, SPPattern, SPSymbol, SymbolRole};

/// A parsed knowledge base: the Old store plus any New records, in file
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct KBDocument {
    pub store: KnowledgeStore,
    pub news: Vec<SPPattern>,
}

impl KBDocument {
    /// The New records as a search input. Errors when the file had none.
    pub fn input(&self) -> Result<NewInput> {
        NewInput::new(self.news.clone())
    }
}

/// Parses the text format. `allow_learned` admits `%`-prefixed symbol
/// names (used when reading back learned grammars).
pub fn parse_kb(text: &str, allow_learned: bool) -> Result<KBDocument> {
    let mut store = KnowledgeStore::new();
    let mut news: Vec<SPPattern> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "O" => {
                if tokens.len() < 5 || tokens[3] != "|" {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "expected `O <id> <freq> | <sym> ...`".into(),
                    });
                }
                let id = tokens[1];
                let freq: u32 = tokens[2].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad frequency `{}`", tokens[2]),
                })?;
                let symbols = parse_symbols(&tokens[4..], line_no, allow_learned)?;
                let pattern = SPPattern::new(id, symbols, freq);
                let violations = validate_pattern(&pattern);
                if !violations.is_empty() {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: violations
                            .iter()
                            .map(|v| v.to_string())
                            .collect::<Vec<_>>()
                            .join("; "),
                    });
                }
                store = store.with_pattern(pattern).map_err(|e| match e {
                    Error::DuplicateId(id) => Error::Parse {
                        line: line_no,
                        msg: format!("duplicate id `{id}`"),
                    },
                    other => other,
                })?;
            }
            "N" => {
                if tokens.len() < 3 || tokens[1] != "|" {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: "expected `N | <sym> ...`".into(),
                    });
                }
                // role flags are ignored on New records
                let symbols = parse_symbols(&tokens[2..], line_no, allow_learned)?
                    .into_iter()
                    .map(|mut s| {
                        s.role = SymbolRole::Contents;
                        s
                    })
                    .collect();
                let id = format!("n{}", news.len() + 1);
                news.push(SPPattern::new(id, symbols, 1));
            }
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("unknown record type `{other}`"),
                });
            }
        }
    }
    Ok(KBDocument { store, news })
}

fn parse_symbols(tokens: &[&str], line_no: usize, allow_learned: bool) -> Result<Vec<SPSymbol>> {
    tokens
        .iter()
        .map(|token| {
            let (role, name) = match token.strip_prefix('!') {
                Some(rest) => (SymbolRole::Identification, rest),
                None => (SymbolRole::Contents, *token),
            };
            if name.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("empty symbol name in `{token}`"),
                });
            }
            if name.starts_with('%') && !allow_learned {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("reserved prefix `%` in `{token}`"),
                });
            }
            Ok(SPSymbol::new(name, role))
        })
        .collect()
}

/// Canonical serialization: Old records one per line in id order, then New
/// records in input order, single spaces throughout.
/// `parse_kb(serialize_kb(x))` reproduces `x`.
pub fn serialize_kb(store: &KnowledgeStore, news: &[SPPattern]) -> String {
    let mut out = String::new();
    for p in store.patterns() {
        out.push_str(&format!("O {} {} |", p.id, p.frequency));
        for sym in &p.symbols {
            out.push(' ');
            if sym.is_id() {
                out.push('!');
            }
            out.push_str(&sym.name);
        }
        out.push('\n');
    }
    for p in news {
        out.push_str("N |");
        for sym in &p.symbols {
            out.push(' ');
            out.push_str(&sym.name);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_old_record_with_roles() {
        let doc = parse_kb("O fr1 12 | !A !12 fruit !#A\n", false).unwrap();
        let p = doc.store.get("fr1").unwrap();
        assert_eq!(p.frequency, 12);
        let roles: Vec<(&str, bool)> = p
            .symbols
            .iter()
            .map(|s| (s.name.as_str(), s.is_id()))
            .collect();
        assert_eq!(
            roles,
            vec![("A", true), ("12", true), ("fruit", false), ("#A", true)]
        );
    }

    #[test]
    fn parses_new_record() {
        let doc = parse_kb("N | fruit flies like a banana\n", false).unwrap();
        assert_eq!(doc.news.len(), 1);
        assert_eq!(doc.news[0].symbols.len(), 5);
    }

    #[test]
    fn zero_frequency_reports_line() {
        let err = parse_kb("O p1 0 | a\n", false).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 1);
                assert!(msg.contains("frequency < 1"), "{msg}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn duplicate_id_reports_line() {
        let err = parse_kb("O p 1 | a\nO p 1 | b\n", false).unwrap_err();
        match err {
            Error::Parse { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("duplicate"), "{msg}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn reserved_prefix_rejected_without_flag() {
        let err = parse_kb("O p 1 | %1 a\n", false).unwrap_err();
        assert!(err.to_string().contains("reserved prefix"));
        assert!(parse_kb("O p 1 | %1 a\n", true).is_ok());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let doc = parse_kb("# heading\n\nO p 1 | a b\n  # indented comment\n", false).unwrap();
        assert_eq!(doc.store.len(), 1);
    }

    #[test]
    fn round_trip_is_identity() {
        let text = "O a 2 | !X one two\nO b 1 | !Y three\nN | one three\n";
        let doc = parse_kb(text, false).unwrap();
        let out = serialize_kb(&doc.store, &doc.news);
        let doc2 = parse_kb(&out, false).unwrap();
        assert_eq!(doc, doc2);
        // serialization is canonical
        assert_eq!(out, serialize_kb(&doc2.store, &doc2.news));
    }

    #[test]
    fn learned_symbols_round_trip_with_flag() {
        let text = "O g0001 1 | !%1 a b c\n";
        let doc = parse_kb(text, true).unwrap();
        let out = serialize_kb(&doc.store, &doc.news);
        let doc2 = parse_kb(&out, true).unwrap();
        assert_eq!(doc, doc2);
    }

    #[test]
    fn empty_store_serializes_empty() {
        assert_eq!(serialize_kb(&KnowledgeStore::new(), &[]), "");
    }
}
