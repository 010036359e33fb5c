use super::*;
use crate::error::Error;
use crate::model::{KnowledgeStore, NewInput, SPPattern, SPSymbol};
use crate::score::encode_alignment;

fn store(patterns: &[(&str, u32, &[(&str, bool)])]) -> KnowledgeStore {
    KnowledgeStore::from_patterns(patterns.iter().map(|(id, freq, syms)| {
        SPPattern::new(
            *id,
            syms.iter()
                .map(|(n, is_id)| {
                    if *is_id {
                        SPSymbol::id(*n)
                    } else {
                        SPSymbol::contents(*n)
                    }
                })
                .collect(),
            *freq,
        )
    }))
    .unwrap()
}

fn input(names: &[&str]) -> NewInput {
    NewInput::from_names("n1", names).unwrap()
}

fn xab_store() -> KnowledgeStore {
    store(&[("x", 1, &[("X", true), ("a", false), ("b", false)])])
}

fn build_top(input: &NewInput, s: &KnowledgeStore) -> Alignment {
    let params = SearchParams {
        min_cd: f64::NEG_INFINITY,
        ..SearchParams::default()
    };
    build_multiple_alignment(input, s, &params)
        .unwrap()
        .into_iter()
        .next()
        .expect("an alignment")
}

#[test]
fn encode_two_symbol_example() {
    // New `a b` against store {`!X a b` freq 1}: f(X)=f(a)=f(b)=1, F=3,
    // each cost log2(3); BN two symbols, code [X].
    let s = xab_store();
    let table = s.frequency_table().unwrap();
    let a = build_top(&input(&["a", "b"]), &s);
    let enc = encode_alignment(&a, &table).unwrap();
    let unit = 3f64.log2();
    assert!((enc.bn - 2.0 * unit).abs() < 1e-9, "bn = {}", enc.bn);
    assert!((enc.be - unit).abs() < 1e-9, "be = {}", enc.be);
    assert!((enc.cd - unit).abs() < 1e-9, "cd = {}", enc.cd);
    assert_eq!(enc.code, vec!["X".to_string()]);
    assert_eq!(enc.cd, enc.bn - enc.be);
}

#[test]
fn all_unmatched_id_symbols_form_the_code() {
    // store pattern with 3 ID symbols, only contents matched
    let s = store(&[(
        "p",
        1,
        &[("P", true), ("q", true), ("a", false), ("#P", true)],
    )]);
    let a = build_top(&input(&["a"]), &s);
    let enc = a.score.as_ref().unwrap();
    assert_eq!(enc.code.len(), 3);
}

#[test]
fn flatten_projects_in_merge_order() {
    let s = xab_store();
    let a = build_top(&input(&["a", "b"]), &s);
    assert_eq!(flatten_alignment(&a).unwrap(), vec!["X", "a", "b"]);
}

#[test]
fn flatten_is_stable() {
    let s = xab_store();
    let a = build_top(&input(&["a", "b"]), &s);
    assert_eq!(flatten_alignment(&a).unwrap(), flatten_alignment(&a).unwrap());
}

#[test]
fn flatten_rejects_illegal_alignment() {
    let s = xab_store();
    let mut a = build_top(&input(&["a", "b"]), &s);
    a.columns.clear();
    assert!(matches!(
        flatten_alignment(&a),
        Err(Error::IllegalAlignment(_))
    ));
}

fn hand_alignment(columns: Vec<MatchColumn>) -> Alignment {
    // row 0: `t o`; row 1: `X o t` — lets tests build crossing columns
    Alignment {
        rows: vec![
            Row {
                kind: RowKind::New {
                    pattern_ids: vec!["n1".into()],
                },
                symbols: vec![SPSymbol::contents("t"), SPSymbol::contents("o")],
            },
            Row {
                kind: RowKind::Old {
                    pattern_id: "p".into(),
                    instance: 1,
                },
                symbols: vec![
                    SPSymbol::id("X"),
                    SPSymbol::contents("o"),
                    SPSymbol::contents("t"),
                ],
            },
        ],
        columns,
        score: None,
    }
}

#[test]
fn crossing_columns_violate() {
    let a = hand_alignment(vec![
        MatchColumn::new(
            "t",
            vec![SymbolInstance::new(0, 0), SymbolInstance::new(1, 2)],
        ),
        MatchColumn::new(
            "o",
            vec![SymbolInstance::new(0, 1), SymbolInstance::new(1, 1)],
        ),
    ]);
    let violations = check_alignment_legal(&a);
    assert!(
        violations.iter().any(|v| v.invariant == "no-crossing"),
        "{violations:?}"
    );
}

#[test]
fn self_match_violates() {
    let a = hand_alignment(vec![MatchColumn::new(
        "t",
        vec![SymbolInstance::new(0, 0), SymbolInstance::new(0, 0)],
    )]);
    let violations = check_alignment_legal(&a);
    assert!(
        violations.iter().any(|v| v.invariant == "self-match"),
        "{violations:?}"
    );
}

#[test]
fn single_entry_column_violates() {
    let a = hand_alignment(vec![
        MatchColumn::new(
            "t",
            vec![SymbolInstance::new(0, 0), SymbolInstance::new(1, 2)],
        ),
        MatchColumn::new("o", vec![SymbolInstance::new(0, 1)]),
    ]);
    let violations = check_alignment_legal(&a);
    assert!(
        violations.iter().any(|v| v.invariant == "column-size"),
        "{violations:?}"
    );
}

#[test]
fn name_mismatch_violates() {
    let a = hand_alignment(vec![MatchColumn::new(
        "t",
        vec![SymbolInstance::new(0, 0), SymbolInstance::new(1, 1)],
    )]);
    let violations = check_alignment_legal(&a);
    assert!(
        violations.iter().any(|v| v.invariant == "column-identity"),
        "{violations:?}"
    );
}

#[test]
fn builder_output_is_legal() {
    let s = xab_store();
    let a = build_top(&input(&["a", "b"]), &s);
    assert!(check_alignment_legal(&a).is_empty());
}

#[test]
fn oracle_single_match() {
    let s = store(&[("x", 1, &[("X", true), ("a", false)])]);
    let all =
        enumerate_alignments_bruteforce(&input(&["a"]), &s, &OracleLimits::default()).unwrap();
    assert_eq!(all.len(), 1);
}

#[test]
fn oracle_enumerates_three_structures() {
    // New `a b` + {`!X a`, `!Y b`}: {X}, {Y}, {X,Y}; the two-row alignment
    // has the highest CD
    let s = store(&[
        ("x", 1, &[("X", true), ("a", false)]),
        ("y", 1, &[("Y", true), ("b", false)]),
    ]);
    let limits = OracleLimits {
        max_instances_per_pattern: 1,
        ..OracleLimits::default()
    };
    let all = enumerate_alignments_bruteforce(&input(&["a", "b"]), &s, &limits).unwrap();
    assert_eq!(all.len(), 3);
    assert_eq!(all[0].rows.len(), 3, "two-row alignment ranks first");
    for a in &all {
        assert!(check_alignment_legal(&a).is_empty());
    }
}

#[test]
fn oracle_rejects_oversize() {
    let s = store(&[(
        "big",
        1,
        &[
            ("a", false),
            ("b", false),
            ("c", false),
            ("d", false),
            ("e", false),
            ("f", false),
            ("g", false),
        ],
    )]);
    assert!(matches!(
        enumerate_alignments_bruteforce(&input(&["a"]), &s, &OracleLimits::default()),
        Err(Error::OracleTooLarge(_))
    ));
}

#[test]
fn builder_matches_oracle_on_tiny_instance() {
    let s = store(&[
        ("x", 1, &[("X", true), ("a", false), ("c", false)]),
        ("y", 2, &[("Y", true), ("b", false)]),
        ("z", 1, &[("Z", true), ("c", false), ("b", false)]),
    ]);
    let inp = input(&["a", "b", "c"]);
    let limits = OracleLimits::default();
    let oracle = enumerate_alignments_bruteforce(&inp, &s, &limits).unwrap();
    let params = SearchParams {
        beam_width: oracle.len().max(4),
        max_alignments: 1,
        max_instances_per_pattern: limits.max_instances_per_pattern,
        min_cd: f64::NEG_INFINITY,
        max_stages: 20,
    };
    let best = build_multiple_alignment(&inp, &s, &params).unwrap();
    assert!(!oracle.is_empty() && !best.is_empty());
    assert!(
        (best[0].cd() - oracle[0].cd()).abs() < 1e-9,
        "beam {} vs oracle {}",
        best[0].cd(),
        oracle[0].cd()
    );
}

#[test]
fn builder_is_deterministic() {
    let s = store(&[
        ("x", 1, &[("X", true), ("a", false), ("c", false)]),
        ("y", 2, &[("Y", true), ("b", false)]),
    ]);
    let inp = input(&["a", "b", "c"]);
    let params = SearchParams::default();
    let run1: Vec<String> = build_multiple_alignment(&inp, &s, &params)
        .unwrap()
        .iter()
        .map(|a| a.canonical_string())
        .collect();
    let run2: Vec<String> = build_multiple_alignment(&inp, &s, &params)
        .unwrap()
        .iter()
        .map(|a| a.canonical_string())
        .collect();
    assert_eq!(run1, run2);
}

#[test]
fn empty_store_is_error() {
    assert!(matches!(
        build_multiple_alignment(&input(&["a"]), &KnowledgeStore::new(), &SearchParams::default()),
        Err(Error::EmptyStore)
    ));
}

#[test]
fn unreachable_min_cd_gives_empty_list() {
    let s = xab_store();
    let params = SearchParams {
        min_cd: 1e6,
        ..SearchParams::default()
    };
    let res = build_multiple_alignment(&input(&["a", "b"]), &s, &params).unwrap();
    assert!(res.is_empty());
}

#[test]
fn no_shared_names_gives_empty_list() {
    let s = xab_store();
    let res =
        build_multiple_alignment(&input(&["zz"]), &s, &SearchParams::default()).unwrap();
    assert!(res.is_empty());
}

#[test]
fn instance_cap_limits_reuse() {
    // `s` can nest into itself without limit: `!L a L` matches its own
    // trailing contents symbol
    let s = store(&[("l", 1, &[("L", true), ("a", false), ("L", false)])]);
    let params = SearchParams {
        max_instances_per_pattern: 3,
        min_cd: f64::NEG_INFINITY,
        max_alignments: 50,
        ..SearchParams::default()
    };
    let res = build_multiple_alignment(&input(&["a"]), &s, &params).unwrap();
    for a in &res {
        assert!(a.instance_count("l") <= 3);
    }
}

#[test]
fn canonical_string_ignores_insertion_history() {
    // the same two-row structure described with rows created in either
    // order must canonicalize identically
    let s = store(&[
        ("x", 1, &[("X", true), ("a", false)]),
        ("y", 1, &[("Y", true), ("b", false)]),
    ]);
    let a1 = Alignment {
        rows: vec![
            Row {
                kind: RowKind::New {
                    pattern_ids: vec!["n1".into()],
                },
                symbols: vec![SPSymbol::contents("a"), SPSymbol::contents("b")],
            },
            Row {
                kind: RowKind::Old {
                    pattern_id: "x".into(),
                    instance: 1,
                },
                symbols: s.get("x").unwrap().symbols.clone(),
            },
            Row {
                kind: RowKind::Old {
                    pattern_id: "y".into(),
                    instance: 1,
                },
                symbols: s.get("y").unwrap().symbols.clone(),
            },
        ],
        columns: vec![
            MatchColumn::new(
                "a",
                vec![SymbolInstance::new(0, 0), SymbolInstance::new(1, 1)],
            ),
            MatchColumn::new(
                "b",
                vec![SymbolInstance::new(0, 1), SymbolInstance::new(2, 1)],
            ),
        ],
        score: None,
    };
    let a2 = Alignment {
        rows: vec![
            a1.rows[0].clone(),
            a1.rows[2].clone(),
            a1.rows[1].clone(),
        ],
        columns: vec![
            MatchColumn::new(
                "b",
                vec![SymbolInstance::new(0, 1), SymbolInstance::new(1, 1)],
            ),
            MatchColumn::new(
                "a",
                vec![SymbolInstance::new(0, 0), SymbolInstance::new(2, 1)],
            ),
        ],
        score: None,
    };
    assert_eq!(a1.canonical_string(), a2.canonical_string());
}
