//! Knowledge-base file, build pipeline, and the query/export surfaces.
//!
//! A KB is a single JSON document headed by `"magic": "affordance-kb"` and a
//! format version, holding the (filtered) modality model, the two spaces, an
//! optional trained MLN, and provenance.

mod config;
mod pipeline;
mod query;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dep::IngestError;
use crate::mln::{MlnError, Program};
use crate::model::{ModalityModel, ModelError};
use crate::space::{ModalitySpace, SpaceError};

pub use config::{InputFormat, PipelineConfig};
pub use pipeline::{
    build_kb, ingest, mln_query, train_mln, validate_files, BuildReport, FileCheck,
};
pub use query::{export, ExportFormat, PairTable, Query, DEFAULT_THRESHOLD};

pub const KB_MAGIC: &str = "affordance-kb";
pub const KB_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {source}")]
    Ingest {
        path: String,
        #[source]
        source: IngestError,
    },
    #[error("{0} sentences rejected")]
    Rejected(usize),
    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("not a KB file: {0}")]
    NotAKb(String),
    #[error(
        "KB format version {found} is newer than supported version {supported}; upgrade the tool"
    )]
    Incompatible { found: u64, supported: u32 },
    #[error("invalid KB: {0}")]
    Invalid(String),
    #[error("empty corpus: {0}")]
    EmptyCorpus(String),
    #[error("unknown entity {0:?}")]
    UnknownEntity(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Space(SpaceError),
    #[error(transparent)]
    Mln(#[from] MlnError),
}

impl From<SpaceError> for KbError {
    fn from(e: SpaceError) -> Self {
        match e {
            SpaceError::UnknownNoun(n) => KbError::UnknownEntity(n),
            other => KbError::Space(other),
        }
    }
}

impl KbError {
    /// 0 ok, 1 usage, 2 input error, 3 empty corpus, 4 unknown entity.
    pub fn exit_code(&self) -> i32 {
        match self {
            KbError::Usage(_) => 1,
            KbError::EmptyCorpus(_) => 3,
            KbError::UnknownEntity(_) => 4,
            _ => 2,
        }
    }

    /// Stable tag printed as `error[TAG]: ...`.
    pub fn tag(&self) -> &'static str {
        match self {
            KbError::Usage(_) => "usage",
            KbError::Io { .. } => "io",
            KbError::Ingest { .. } | KbError::Rejected(_) => "input",
            KbError::Config { .. } => "config",
            KbError::NotAKb(_) => "not-a-kb",
            KbError::Incompatible { .. } => "incompatible-version",
            KbError::Invalid(_) => "invalid-kb",
            KbError::EmptyCorpus(_) => "empty-corpus",
            KbError::UnknownEntity(_) => "unknown-entity",
            KbError::Model(_) => "model",
            KbError::Space(_) => "space",
            KbError::Mln(_) => "mln",
        }
    }

    /// One line, no embedded newlines.
    pub fn report_line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.tag(), msg)
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        KbError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub corpus_files: Vec<String>,
    pub config_hash: String,
    pub tool_version: String,
}

/// A trained MLN: the program carries the learned weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlnSection {
    pub program: Program,
    pub l2: f64,
    pub iterations: usize,
    pub converged: bool,
    pub pseudo_log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub model: ModalityModel,
    pub active_space: Option<ModalitySpace>,
    pub passive_space: Option<ModalitySpace>,
    pub mln: Option<MlnSection>,
    pub provenance: Provenance,
}

#[derive(Serialize)]
struct KbDocOut<'a> {
    magic: &'a str,
    version: u32,
    #[serde(flatten)]
    kb: &'a KnowledgeBase,
}

impl KnowledgeBase {
    pub fn to_json(&self) -> String {
        let doc = KbDocOut {
            magic: KB_MAGIC,
            version: KB_FORMAT_VERSION,
            kb: self,
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("KB serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| KbError::NotAKb(e.to_string()))?;
        let header = value
            .as_object()
            .filter(|o| o.get("magic").and_then(|m| m.as_str()) == Some(KB_MAGIC));
        let Some(header) = header else {
            return Err(KbError::NotAKb("missing header".into()));
        };
        let version = header
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| KbError::NotAKb("missing version".into()))?;
        if version > u64::from(KB_FORMAT_VERSION) {
            return Err(KbError::Incompatible {
                found: version,
                supported: KB_FORMAT_VERSION,
            });
        }
        if version != u64::from(KB_FORMAT_VERSION) {
            return Err(KbError::Invalid(format!("unsupported version {version}")));
        }
        let mut body = value;
        if let Some(o) = body.as_object_mut() {
            o.remove("magic");
            o.remove("version");
        }
        // component invariants are checked by the components' own loaders
        let kb: KnowledgeBase =
            serde_json::from_value(body).map_err(|e| KbError::Invalid(e.to_string()))?;
        if kb.provenance.corpus_files.is_empty() {
            return Err(KbError::Invalid("provenance lists no corpus files".into()));
        }
        if let Some(m) = &kb.mln {
            m.program
                .check()
                .map_err(|e| KbError::Invalid(format!("mln program: {e}")))?;
        }
        Ok(kb)
    }

    /// Whether `lemma` was seen as a subject or an object.
    pub fn knows_noun(&self, lemma: &str) -> bool {
        use crate::model::Role;
        self.model.vocab(Role::Subject).contains(lemma)
            || self.model.vocab(Role::Object).contains(lemma)
    }

    pub fn space(&self, role: crate::space::SpaceRole) -> Option<&ModalitySpace> {
        match role {
            crate::space::SpaceRole::Active => self.active_space.as_ref(),
            crate::space::SpaceRole::Passive => self.passive_space.as_ref(),
        }
    }
}

pub fn save_kb(kb: &KnowledgeBase, path: &Path) -> Result<(), KbError> {
    fs::write(path, kb.to_json()).map_err(|e| KbError::io(path, e))
}

pub fn load_kb(path: &Path) -> Result<KnowledgeBase, KbError> {
    let bytes = fs::read(path).map_err(|e| KbError::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| KbError::NotAKb("not UTF-8".into()))?;
    KnowledgeBase::from_json(&text)
}
