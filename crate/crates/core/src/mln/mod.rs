//! A small Markov logic network over binary grammar predicates.
//!
//! Formulas are weighted clauses (disjunctions of possibly negated atoms).
//! Grounding instantiates each clause over the constants of its variables'
//! domains; a world assigns a truth value to every ground atom and has
//! probability proportional to `exp(Σ_j w_j n_j(x))`, where `n_j(x)` is the
//! number of satisfied groundings of formula `j`.

mod formula;
mod ground;
mod infer;
mod learn;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModalityModel, Role};

pub use formula::{format_program, parse_evidence, parse_program};
pub use ground::{
    count_true_groundings, true_grounding_counts, GroundAtom, GroundClause, GroundModel, World,
};
pub use infer::{
    infer_marginal, log_partition, world_log_prob, Evidence, SamplerConfig, EXACT_ATOM_LIMIT,
};
pub use learn::{learn_weights_pll, pll_gradient, pseudo_log_likelihood, LearnReport, StepConfig};

pub const SUBJECT_DOMAIN: &str = "subject";
pub const VERB_DOMAIN: &str = "verb";
pub const OBJECT_DOMAIN: &str = "object";

#[derive(Debug, Error, PartialEq)]
pub enum MlnError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown predicate {0:?}")]
    UnknownPredicate(String),
    #[error("predicate {0:?} declared twice")]
    DuplicatePredicate(String),
    #[error("variable {var:?} used with domains {first:?} and {second:?}")]
    DomainConflict {
        var: String,
        first: String,
        second: String,
    },
    #[error("unknown domain {0:?}")]
    UnknownDomain(String),
    #[error("formula has no literals")]
    EmptyClause,
    #[error("unknown atom {0}")]
    UnknownAtom(String),
    #[error("{atoms} atoms exceeds the exact-enumeration limit of {limit}; use Gibbs inference")]
    TooManyAtoms { atoms: usize, limit: usize },
    #[error("grounding would produce {0} clauses, above the limit of {1}")]
    GroundingTooLarge(u128, u128),
    #[error("query atom {0} is fixed by evidence")]
    QueryInEvidence(String),
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("world has {got} atoms, model has {expected}")]
    WorldSize { expected: usize, got: usize },
    #[error("weights diverged (|w| = {0:e}); increase l2 regularization")]
    Diverged(f64),
    #[error("invalid setting: {0}")]
    InvalidSetting(String),
}

/// A binary predicate and the domains of its two arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSchema {
    pub name: String,
    pub domains: [String; 2],
}

impl PredicateSchema {
    pub fn new(name: &str, first: &str, second: &str) -> Self {
        PredicateSchema {
            name: name.to_string(),
            domains: [first.to_string(), second.to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub negated: bool,
    pub predicate: String,
    pub args: [String; 2],
}

impl Literal {
    pub fn pos(predicate: &str, a: &str, b: &str) -> Self {
        Literal {
            negated: false,
            predicate: predicate.to_string(),
            args: [a.to_string(), b.to_string()],
        }
    }

    pub fn neg(predicate: &str, a: &str, b: &str) -> Self {
        Literal {
            negated: true,
            ..Literal::pos(predicate, a, b)
        }
    }
}

/// A weighted clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Formula {
    pub id: String,
    pub weight: f64,
    pub literals: Vec<Literal>,
}

/// Predicate schemas plus weighted formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub schemas: Vec<PredicateSchema>,
    pub formulas: Vec<Formula>,
}

impl Program {
    pub fn new(schemas: Vec<PredicateSchema>, formulas: Vec<Formula>) -> Result<Self, MlnError> {
        let p = Program { schemas, formulas };
        p.check()?;
        Ok(p)
    }

    pub fn schema(&self, name: &str) -> Option<(usize, &PredicateSchema)> {
        self.schemas
            .iter()
            .enumerate()
            .find(|(_, s)| s.name == name)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.formulas.iter().map(|f| f.weight).collect()
    }

    pub fn with_weights(&self, weights: &[f64]) -> Result<Program, MlnError> {
        if weights.len() != self.formulas.len() {
            return Err(MlnError::WeightCount {
                expected: self.formulas.len(),
                got: weights.len(),
            });
        }
        let mut p = self.clone();
        for (f, &w) in p.formulas.iter_mut().zip(weights) {
            f.weight = w;
        }
        Ok(p)
    }

    /// Variables of a formula in order of first appearance, with their domains.
    pub fn variables(&self, formula: &Formula) -> Result<Vec<(String, String)>, MlnError> {
        let mut vars: Vec<(String, String)> = Vec::new();
        for lit in &formula.literals {
            let (_, schema) = self
                .schema(&lit.predicate)
                .ok_or_else(|| MlnError::UnknownPredicate(lit.predicate.clone()))?;
            for (var, dom) in lit.args.iter().zip(&schema.domains) {
                match vars.iter().find(|(v, _)| v == var) {
                    Some((_, d)) if d != dom => {
                        return Err(MlnError::DomainConflict {
                            var: var.clone(),
                            first: d.clone(),
                            second: dom.clone(),
                        })
                    }
                    Some(_) => {}
                    None => vars.push((var.clone(), dom.clone())),
                }
            }
        }
        Ok(vars)
    }

    pub fn check(&self) -> Result<(), MlnError> {
        for (i, s) in self.schemas.iter().enumerate() {
            if self.schemas[..i].iter().any(|o| o.name == s.name) {
                return Err(MlnError::DuplicatePredicate(s.name.clone()));
            }
        }
        for f in &self.formulas {
            if f.literals.is_empty() {
                return Err(MlnError::EmptyClause);
            }
            if !f.weight.is_finite() {
                return Err(MlnError::InvalidSetting(format!(
                    "formula {} has non-finite weight",
                    f.id
                )));
            }
            self.variables(f)?;
        }
        Ok(())
    }
}

/// Evidence predicates SubjOf/ObjOf, query predicates CanDo/Affords, and
/// three soft implications:
///
/// ```text
/// F1: SubjOf(s,v) => CanDo(s,v)
/// F2: ObjOf(v,o) => Affords(o,v)
/// F3: SubjOf(s,v) ^ ObjOf(v,o) => CanDo(s,v)
/// ```
pub fn default_program() -> Program {
    let schemas = vec![
        PredicateSchema::new("SubjOf", SUBJECT_DOMAIN, VERB_DOMAIN),
        PredicateSchema::new("ObjOf", VERB_DOMAIN, OBJECT_DOMAIN),
        PredicateSchema::new("CanDo", SUBJECT_DOMAIN, VERB_DOMAIN),
        PredicateSchema::new("Affords", OBJECT_DOMAIN, VERB_DOMAIN),
    ];
    let formulas = vec![
        Formula {
            id: "F1".into(),
            weight: 1.0,
            literals: vec![
                Literal::neg("SubjOf", "s", "v"),
                Literal::pos("CanDo", "s", "v"),
            ],
        },
        Formula {
            id: "F2".into(),
            weight: 1.0,
            literals: vec![
                Literal::neg("ObjOf", "v", "o"),
                Literal::pos("Affords", "o", "v"),
            ],
        },
        Formula {
            id: "F3".into(),
            weight: 1.0,
            literals: vec![
                Literal::neg("SubjOf", "s", "v"),
                Literal::neg("ObjOf", "v", "o"),
                Literal::pos("CanDo", "s", "v"),
            ],
        },
    ];
    Program { schemas, formulas }
}

pub type Constants = BTreeMap<String, Vec<String>>;

/// The default program together with the model's role vocabularies as
/// domain constants.
pub fn default_schema(model: &ModalityModel) -> (Program, Constants) {
    let mut constants = Constants::new();
    for (name, role) in [
        (SUBJECT_DOMAIN, Role::Subject),
        (VERB_DOMAIN, Role::Verb),
        (OBJECT_DOMAIN, Role::Object),
    ] {
        constants.insert(name.to_string(), model.vocab(role).entries().to_vec());
    }
    (default_program(), constants)
}

/// Closed-world training data from corpus counts: SubjOf/CanDo hold for
/// observed active pairs, ObjOf/Affords for observed passive pairs, and
/// every other atom is false.
pub fn evidence_from_model(gm: &GroundModel, model: &ModalityModel) -> World {
    let mut world = World::all_false(gm.atom_count());
    let mut set = |pred: &str, a: &str, b: &str| {
        if let Some(i) = gm.atom_index(pred, a, b) {
            world.set(i, true);
        }
    };
    for (s, v, _) in model.active_entries() {
        set("SubjOf", s, v);
        set("CanDo", s, v);
    }
    for (v, o, _) in model.passive_entries() {
        set("ObjOf", v, o);
        set("Affords", o, v);
    }
    world
}
