//! Mining ability-modality ("X can Y") knowledge from dependency-parsed text.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`dep`]: read CoNLL-U or Stanford typed-dependency lines into sentences.
//! - [`extract`]: pull subject–verb–object triples out of each sentence.
//! - [`model`]: count triples into joint, active `(s, v)` and passive `(v, o)`
//!   distributions; answer "can X do Y" and "is X Y-able" queries.
//! - [`space`]: build noun-by-verb vector spaces for similarity, neighbor
//!   retrieval and additive composition, optionally densified by truncated SVD.
//! - [`mln`]: a small Markov logic network over the grounded grammar predicates.
//! - [`kb`]: pipeline configuration, the knowledge-base file, and the query
//!   and export surfaces used by the `affordance-kb` binary.

pub mod dep;
pub mod extract;
pub mod kb;
pub mod mln;
pub mod model;
pub mod space;
pub mod svd;

pub use dep::{DepEdge, DepSentence, ParseMode, Token};
pub use extract::{extract_triples, lemma_of, ExtractConfig, SvoTriple, PASSIVE_SUBJECT};
pub use model::{FilterConfig, ModalityModel, Role, Verdict, Vocab};
pub use space::{Composition, ModalitySpace, SpaceRole, Weighting};
