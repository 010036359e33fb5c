//! Stable JSON emitter for alignment results.
//!
//! The schema and key order are fixed and all numbers carry six decimal
//! places, so equal results serialize byte-identically:
//!
//! ```text
//! {"alignments":[{"rows":[...],"columns":[{"symbol":...,"entries":[{"row":..,"pos":..}]}],
//!   "bn":..,"be":..,"cd":..,"p_abs":..,"p_rel":..,
//!   "inferences":[{"symbol":..,"source_pattern":..,"probability":..}]}]}
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::align::flatten::{flatten_items, FlatSource};
use crate::align::{Alignment, RowKind};
use crate::error::Result;
use crate::infer::{extract_inferences, inference_probabilities};
use crate::score::{alignment_probabilities, AlignmentProbability, EncodingResult};

#[derive(Debug, Clone)]
pub struct AnalyzedAlignment {
    pub alignment: Alignment,
    pub encoding: EncodingResult,
    pub probability: AlignmentProbability,
    /// `(symbol, source pattern, aggregated probability)` in first-occurrence
    /// order, one entry per (symbol, pattern).
    pub inferences: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct Analysis {
    pub items: Vec<AnalyzedAlignment>,
}

/// Attaches probabilities and aggregated inferences to a ranked candidate
/// set. Alignments must carry their encodings (as the builder leaves them).
pub fn analyze(alignments: &[Alignment]) -> Result<Analysis> {
    if alignments.is_empty() {
        return Ok(Analysis::default());
    }
    let scored: Vec<(Alignment, EncodingResult)> = alignments
        .iter()
        .map(|a| {
            let enc = a.score.clone().expect("analyze requires scored alignments");
            (a.clone(), enc)
        })
        .collect();
    let probs = alignment_probabilities(&scored)?;
    let with_probs: Vec<(Alignment, AlignmentProbability)> = scored
        .iter()
        .map(|(a, _)| a.clone())
        .zip(probs.iter().cloned())
        .collect();
    let aggregated = inference_probabilities(&with_probs)?;

    let mut items = Vec::with_capacity(alignments.len());
    for ((alignment, encoding), probability) in scored.into_iter().zip(probs) {
        let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
        let mut inferences = Vec::new();
        for inf in extract_inferences(&alignment)? {
            let key = (inf.symbol.clone(), inf.source_pattern.clone());
            if seen.insert(key.clone()) {
                let p = aggregated.get(&key).copied().unwrap_or(0.0);
                inferences.push((inf.symbol, inf.source_pattern, p));
            }
        }
        items.push(AnalyzedAlignment {
            alignment,
            encoding,
            probability,
            inferences,
        });
    }
    Ok(Analysis { items })
}

/// Serializes an analysis with the fixed schema. Deterministic: identical
/// analyses produce identical bytes.
pub fn emit_json(analysis: &Analysis) -> String {
    let mut out = String::from("{\"alignments\":[");
    for (i, item) in analysis.items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        emit_alignment(&mut out, item);
    }
    out.push_str("]}");
    out
}

fn emit_alignment(out: &mut String, item: &AnalyzedAlignment) {
    let a = &item.alignment;
    out.push_str("{\"rows\":[");
    for (r, row) in a.rows.iter().enumerate() {
        if r > 0 {
            out.push(',');
        }
        match &row.kind {
            RowKind::New { pattern_ids } => {
                let ids: Vec<String> = pattern_ids.iter().map(|id| quote(id)).collect();
                let _ = write!(
                    out,
                    "{{\"row\":{r},\"kind\":\"new\",\"patterns\":[{}]}}",
                    ids.join(",")
                );
            }
            RowKind::Old {
                pattern_id,
                instance,
            } => {
                let _ = write!(
                    out,
                    "{{\"row\":{r},\"kind\":\"old\",\"pattern\":{},\"instance\":{instance}}}",
                    quote(pattern_id)
                );
            }
        }
    }
    out.push_str("],\"columns\":[");
    let mut first = true;
    for flat in flatten_items(a) {
        if let FlatSource::Column(c) = flat.source {
            if !first {
                out.push(',');
            }
            first = false;
            let col = &a.columns[c];
            let _ = write!(out, "{{\"symbol\":{},\"entries\":[", quote(&col.symbol_name));
            for (j, e) in col.entries.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{{\"row\":{},\"pos\":{}}}", e.row, e.position);
            }
            out.push_str("]}");
        }
    }
    let _ = write!(
        out,
        "],\"bn\":{},\"be\":{},\"cd\":{},\"p_abs\":{},\"p_rel\":{},\"inferences\":[",
        num(item.encoding.bn),
        num(item.encoding.be),
        num(item.encoding.cd),
        num(item.probability.p_abs),
        num(item.probability.p_rel),
    );
    for (j, (symbol, pattern, p)) in item.inferences.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "{{\"symbol\":{},\"source_pattern\":{},\"probability\":{}}}",
            quote(symbol),
            quote(pattern),
            num(*p)
        );
    }
    out.push_str("]}");
}

fn num(v: f64) -> String {
    // normalize negative zero so equal values print identically
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.6}")
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
