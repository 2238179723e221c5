//! Dependency-annotated sentences and the readers that produce them.
//!
//! Two carrier formats are supported: CoNLL-U ([`conllu`]) and the Stanford
//! typed-dependency line format `rel(head-i, dep-j)` ([`sd`]). Both produce
//! [`DepSentence`] values which are immutable once parsed.

pub mod conllu;
pub mod sd;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{parse_conllu, parse_conllu_str, write_conllu};
pub use sd::{parse_sd_lines, parse_sd_str};

/// Placeholder used by CoNLL-U for an unspecified field.
pub const UNSPECIFIED: &str = "_";

/// Columns of a CoNLL-U token line that are carried through untouched.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpaqueColumns {
    pub xpos: String,
    pub feats: String,
    pub deps: String,
    pub misc: String,
}

impl Default for OpaqueColumns {
    fn default() -> Self {
        OpaqueColumns {
            xpos: UNSPECIFIED.to_string(),
            feats: UNSPECIFIED.to_string(),
            deps: UNSPECIFIED.to_string(),
            misc: UNSPECIFIED.to_string(),
        }
    }
}

/// A word of a parsed sentence.
///
/// `lemma` holds the raw lemma column, which may be `"_"`; use
/// [`crate::extract::lemma_of`] for the normalized lemma.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: u32,
    pub surface: String,
    pub lemma: String,
    pub upos: String,
    #[serde(default)]
    pub opaque: OpaqueColumns,
}

impl Token {
    pub fn new(index: u32, surface: &str, lemma: &str, upos: &str) -> Self {
        Token {
            index,
            surface: surface.to_string(),
            lemma: lemma.to_string(),
            upos: upos.to_string(),
            opaque: OpaqueColumns::default(),
        }
    }
}

/// A labeled, directed grammatical relation. `head == 0` marks the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DepEdge {
    pub head: u32,
    pub dependent: u32,
    pub relation: String,
}

impl DepEdge {
    pub fn new(head: u32, dependent: u32, relation: &str) -> Self {
        DepEdge {
            head,
            dependent,
            relation: normalize_relation(relation),
        }
    }

    /// The label without any `:subtype` suffix.
    pub fn base_relation(&self) -> &str {
        base_relation(&self.relation)
    }
}

/// Lowercases a relation label; subtype suffixes are kept.
pub fn normalize_relation(label: &str) -> String {
    label.trim().to_lowercase()
}

pub(crate) fn base_relation(label: &str) -> &str {
    label.split(':').next().unwrap_or(label)
}

/// One parsed sentence: ordered tokens plus typed dependency edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepSentence {
    pub id: String,
    pub tokens: Vec<Token>,
    pub edges: Vec<DepEdge>,
    /// Set when some tokens lack an incoming edge or indices have gaps.
    pub partial: bool,
    /// Comment lines (without the leading `#`), kept for re-serialization.
    #[serde(default)]
    pub comments: Vec<String>,
}

impl DepSentence {
    pub fn token(&self, index: u32) -> Option<&Token> {
        self.tokens
            .binary_search_by_key(&index, |t| t.index)
            .ok()
            .map(|i| &self.tokens[i])
    }

    /// Edges whose head is `head`, in edge order.
    pub fn dependents_of(&self, head: u32) -> impl Iterator<Item = &DepEdge> {
        self.edges.iter().filter(move |e| e.head == head)
    }

    /// Recomputes the `partial` flag from the edge set.
    pub(crate) fn detect_partial(&self) -> bool {
        let with_head: BTreeSet<u32> = self.edges.iter().map(|e| e.dependent).collect();
        let gaps = self
            .tokens
            .iter()
            .enumerate()
            .any(|(i, t)| t.index as usize != i + 1);
        gaps || self.tokens.iter().any(|t| !with_head.contains(&t.index))
    }
}

/// Whether record-level errors abort parsing or skip the offending sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParseMode {
    Strict,
    #[default]
    Lenient,
}

/// A problem with one input record, located by 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct RecordError {
    pub line: usize,
    pub message: String,
}

impl RecordError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        RecordError {
            line,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("read failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Result of a lenient parse: accepted sentences plus one error per
/// rejected sentence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Parsed {
    pub sentences: Vec<DepSentence>,
    pub errors: Vec<RecordError>,
}

impl Parsed {
    /// Either records the error (lenient) or returns it (strict).
    pub(crate) fn reject(&mut self, mode: ParseMode, err: RecordError) -> Result<(), RecordError> {
        match mode {
            ParseMode::Strict => Err(err),
            ParseMode::Lenient => {
                log::warn!("skipping sentence: {err}");
                self.errors.push(err);
                Ok(())
            }
        }
    }
}

/// A broken sentence invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroTokenIndex {
        position: usize,
    },
    DuplicateTokenIndex {
        index: u32,
    },
    EmptySurface {
        index: u32,
    },
    DependentOutOfRange {
        dependent: u32,
    },
    HeadOutOfRange {
        head: u32,
        dependent: u32,
    },
    RootMismatch {
        head: u32,
        dependent: u32,
        relation: String,
    },
    MultipleHeads {
        dependent: u32,
        count: usize,
    },
    MissingHead {
        index: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroTokenIndex { position } => {
                write!(f, "token at position {position}: index must be >= 1")
            }
            Violation::DuplicateTokenIndex { index } => {
                write!(f, "token {index}: index is not unique")
            }
            Violation::EmptySurface { index } => write!(f, "token {index}: empty surface form"),
            Violation::DependentOutOfRange { dependent } => {
                write!(f, "edge to {dependent}: index range, no such token")
            }
            Violation::HeadOutOfRange { head, dependent } => {
                write!(
                    f,
                    "edge {head}->{dependent}: index range, no such head token"
                )
            }
            Violation::RootMismatch {
                head,
                dependent,
                relation,
            } => write!(
                f,
                "edge {head}->{dependent} ({relation}): head is 0 iff relation is root"
            ),
            Violation::MultipleHeads { dependent, count } => write!(
                f,
                "token {dependent}: tree property, {count} incoming edges"
            ),
            Violation::MissingHead { index } => write!(
                f,
                "token {index}: no incoming edge in a sentence not flagged partial"
            ),
        }
    }
}

/// Checks every sentence invariant; an empty result means the sentence is well formed.
pub fn validate(sentence: &DepSentence) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (position, t) in sentence.tokens.iter().enumerate() {
        if t.index == 0 {
            out.push(Violation::ZeroTokenIndex { position });
        } else if !seen.insert(t.index) {
            out.push(Violation::DuplicateTokenIndex { index: t.index });
        }
        if t.surface.is_empty() {
            out.push(Violation::EmptySurface { index: t.index });
        }
    }

    let mut incoming: BTreeMap<u32, usize> = BTreeMap::new();
    for e in &sentence.edges {
        if e.dependent == 0 || !seen.contains(&e.dependent) {
            out.push(Violation::DependentOutOfRange {
                dependent: e.dependent,
            });
        }
        if e.head != 0 && !seen.contains(&e.head) {
            out.push(Violation::HeadOutOfRange {
                head: e.head,
                dependent: e.dependent,
            });
        }
        if (e.head == 0) != (e.relation == "root") {
            out.push(Violation::RootMismatch {
                head: e.head,
                dependent: e.dependent,
                relation: e.relation.clone(),
            });
        }
        *incoming.entry(e.dependent).or_default() += 1;
    }
    for (&dependent, &count) in &incoming {
        if count > 1 {
            out.push(Violation::MultipleHeads { dependent, count });
        }
    }
    if !sentence.partial {
        for &index in &seen {
            if !incoming.contains_key(&index) {
                out.push(Violation::MissingHead { index });
            }
        }
    }
    out
}
