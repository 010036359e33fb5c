//! Batch CLI for the symbolic pattern alignment engine.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use spalign::io::{analyze, emit_json, parse_kb, render_alignment, serialize_kb, Orientation};
use spalign::{
    build_multiple_alignment, classify, enumerate_alignments_bruteforce, induce_grammar,
    Alignment, LearnParams, NewInput, OracleLimits, SPPattern, SPSymbol, SearchParams,
};

#[derive(Parser)]
#[command(
    name = "spalign",
    about = "Symbolic pattern alignment: parse, classify, infer and learn over pattern knowledge bases",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct KbArgs {
    /// Knowledge-base file (O records, optionally N records)
    #[arg(long)]
    kb: PathBuf,
    /// New pattern as whitespace-separated symbols; repeatable
    #[arg(long = "new")]
    new: Vec<String>,
    /// File of N records replacing the KB's own New records
    #[arg(long = "new-file")]
    new_file: Option<PathBuf>,
    /// Accept learned (`%`-prefixed) symbols in inputs
    #[arg(long)]
    allow_learned: bool,
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Beam width: partial structures retained per stage
    #[arg(long, default_value_t = 200)]
    beam: usize,
    /// Alignments to return
    #[arg(long, default_value_t = 2)]
    max_alignments: usize,
    /// Minimum compression difference for returned alignments
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    min_cd: f64,
    /// Cap on instances of one pattern within an alignment
    #[arg(long, default_value_t = 10)]
    max_reuse: usize,
    /// Cap on search stages
    #[arg(long, default_value_t = 20)]
    max_stages: usize,
}

impl SearchArgs {
    fn params(&self) -> SearchParams {
        SearchParams {
            beam_width: self.beam,
            max_alignments: self.max_alignments,
            max_instances_per_pattern: self.max_reuse,
            min_cd: self.min_cd,
            max_stages: self.max_stages,
        }
    }
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit the JSON results schema
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the best alignments of New against the store
    Align {
        #[command(flatten)]
        kb: KbArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Alignments plus aggregated inference probabilities
    Infer {
        #[command(flatten)]
        kb: KbArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Recognition report: the best alignment's rows as levels
    Classify {
        #[command(flatten)]
        kb: KbArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Induce a grammar from a corpus of N records
    Learn {
        /// Corpus file of N records
        #[arg(long = "new-file")]
        new_file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Matches below this CD are stored whole during assimilation
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        assim_min_cd: f64,
        /// Grammars retained per selection stage
        #[arg(long, default_value_t = 20)]
        grammar_beam: usize,
        /// Cap on selection stages
        #[arg(long, default_value_t = 10)]
        max_rounds: usize,
        /// Write the learned grammar here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render the best alignment as monospaced text
    Render {
        #[command(flatten)]
        kb: KbArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// h (rows as lines) or v (patterns as columns)
        #[arg(long, default_value = "h")]
        orient: String,
        /// Output width in characters
        #[arg(long, default_value_t = 120)]
        width: usize,
        /// Write output here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively enumerate all legal alignments (small instances only)
    Oracle {
        #[command(flatten)]
        kb: KbArgs,
        /// Cap on instances of one pattern within an alignment
        #[arg(long, default_value_t = 2)]
        max_reuse: usize,
        /// Enumeration node budget
        #[arg(long, default_value_t = 20_000_000)]
        node_budget: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(kb: &KbArgs) -> anyhow::Result<(spalign::KnowledgeStore, NewInput)> {
    let text = fs::read_to_string(&kb.kb)
        .with_context(|| format!("reading {}", kb.kb.display()))?;
    let doc = parse_kb(&text, kb.allow_learned)?;
    let mut news: Vec<SPPattern> = doc.news.clone();
    if let Some(path) = &kb.new_file {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        news = parse_kb(&text, kb.allow_learned)?.news;
    }
    if !kb.new.is_empty() {
        news = kb
            .new
            .iter()
            .enumerate()
            .map(|(i, line)| {
                let symbols: Vec<SPSymbol> =
                    line.split_whitespace().map(SPSymbol::contents).collect();
                SPPattern::new(format!("n{}", i + 1), symbols, 1)
            })
            .collect();
    }
    if news.is_empty() {
        return Err(anyhow!("no New patterns: supply N records, --new or --new-file"));
    }
    let input = NewInput::new(news)?;
    Ok((doc.store, input))
}

fn write_out(out: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn alignment_summary(alignments: &[Alignment]) -> String {
    let mut out = String::new();
    for (i, a) in alignments.iter().enumerate() {
        let s = a.score.as_ref().expect("scored");
        out.push_str(&format!(
            "alignment {}: rows {}, BN {:.3}, BE {:.3}, CD {:.3}\n",
            i + 1,
            a.rows.len() - 1,
            s.bn,
            s.be,
            s.cd
        ));
        for row in a.rows.iter().skip(1) {
            if let spalign::RowKind::Old {
                pattern_id,
                instance,
            } = &row.kind
            {
                out.push_str(&format!("  row: {pattern_id} (instance {instance})\n"));
            }
        }
    }
    out
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Align { kb, search, out } => {
            let (store, input) = load(&kb)?;
            let alignments = build_multiple_alignment(&input, &store, &search.params())?;
            if out.json {
                let analysis = analyze(&alignments)?;
                write_out(&out.out, &emit_json(&analysis))?;
            } else {
                write_out(&out.out, &alignment_summary(&alignments))?;
            }
        }
        Command::Infer { kb, search, out } => {
            let (store, input) = load(&kb)?;
            let alignments = build_multiple_alignment(&input, &store, &search.params())?;
            let analysis = analyze(&alignments)?;
            if out.json {
                write_out(&out.out, &emit_json(&analysis))?;
            } else {
                let mut text = alignment_summary(&alignments);
                let mut seen = std::collections::BTreeSet::new();
                text.push_str("inferences:\n");
                for item in &analysis.items {
                    for (symbol, pattern, p) in &item.inferences {
                        if seen.insert((symbol.clone(), pattern.clone())) {
                            text.push_str(&format!("  {symbol} (from {pattern}): {p:.6}\n"));
                        }
                    }
                }
                write_out(&out.out, &text)?;
            }
        }
        Command::Classify { kb, search, out } => {
            let (store, input) = load(&kb)?;
            let report = classify(&input, &store, &search.params())?;
            if out.json {
                // classification rides on the standard schema: emit the
                // alignments, levels are recoverable from rows
                let alignments = build_multiple_alignment(&input, &store, &search.params())?;
                let analysis = analyze(&alignments)?;
                write_out(&out.out, &emit_json(&analysis))?;
            } else {
                let mut text = String::new();
                if report.levels.is_empty() {
                    text.push_str("no classification\n");
                }
                for (i, level) in report.levels.iter().enumerate() {
                    text.push_str(&format!(
                        "level {}: {} [{}]\n",
                        i + 1,
                        level.pattern_id,
                        level.matched_id_symbols.join(" ")
                    ));
                }
                write_out(&out.out, &text)?;
            }
        }
        Command::Learn {
            new_file,
            search,
            assim_min_cd,
            grammar_beam,
            max_rounds,
            out,
        } => {
            let text = fs::read_to_string(&new_file)
                .with_context(|| format!("reading {}", new_file.display()))?;
            let corpus = parse_kb(&text, false)?.news;
            if corpus.is_empty() {
                return Err(anyhow!("corpus file has no N records"));
            }
            let lparams = LearnParams {
                assimilation_min_cd: assim_min_cd,
                grammar_beam,
                max_rounds,
                ..LearnParams::default()
            };
            let (grammar, score) = induce_grammar(&corpus, &lparams, &search.params())?;
            let kb_text = serialize_kb(&grammar.store, &[]);
            println!(
                "grammar: {} patterns, G {:.3}, E {:.3}, total {:.3}",
                grammar.store.len(),
                score.g,
                score.e,
                score.total
            );
            match &out {
                Some(path) => fs::write(path, &kb_text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{kb_text}"),
            }
        }
        Command::Render {
            kb,
            search,
            orient,
            width,
            out,
        } => {
            let orientation = match orient.as_str() {
                "h" => Orientation::Horizontal,
                "v" => Orientation::Vertical,
                other => return Err(anyhow!("unknown orientation `{other}` (use h or v)")),
            };
            let (store, input) = load(&kb)?;
            let alignments = build_multiple_alignment(&input, &store, &search.params())?;
            let mut text = String::new();
            for (i, a) in alignments.iter().enumerate() {
                if i > 0 {
                    text.push('\n');
                }
                text.push_str(&render_alignment(a, orientation, width)?);
            }
            if alignments.is_empty() {
                text.push_str("no alignment\n");
            }
            write_out(&out, &text)?;
        }
        Command::Oracle {
            kb,
            max_reuse,
            node_budget,
            out,
        } => {
            let (store, input) = load(&kb)?;
            let limits = OracleLimits {
                max_instances_per_pattern: max_reuse,
                node_budget,
                ..OracleLimits::default()
            };
            let alignments = enumerate_alignments_bruteforce(&input, &store, &limits)?;
            if out.json {
                let analysis = analyze(&alignments)?;
                write_out(&out.out, &emit_json(&analysis))?;
            } else {
                let mut text = format!("{} legal alignments\n", alignments.len());
                text.push_str(&alignment_summary(&alignments));
                write_out(&out.out, &text)?;
            }
        }
    }
    Ok(())
}
