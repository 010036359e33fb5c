use thiserror::Error;

/// A single violated invariant, carrying enough context to locate the
/// offending row/column/symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Short invariant name, e.g. `"no-crossing"` or `"empty pattern"`.
    pub invariant: &'static str,
    /// Human-readable detail.
    pub detail: String,
}

impl Violation {
    pub fn new(invariant: &'static str, detail: impl Into<String>) -> Self {
        Violation {
            invariant,
            detail: detail.into(),
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pattern `{id}`: {}", format_violations(.violations))]
    InvalidPattern {
        id: String,
        violations: Vec<Violation>,
    },

    #[error("duplicate pattern id `{0}`")]
    DuplicateId(String),

    #[error("no patterns")]
    EmptyStore,

    #[error("empty input")]
    EmptyInput,

    #[error("empty candidate list")]
    EmptyCandidates,

    #[error("illegal alignment: {}", format_violations(.0))]
    IllegalAlignment(Vec<Violation>),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("instance too large for oracle: {0}")]
    OracleTooLarge(String),

    #[error("width {width} too small to place any column (need {needed})")]
    RenderWidth { width: usize, needed: usize },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
