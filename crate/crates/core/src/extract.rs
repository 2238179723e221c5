//! Subject–verb–object triple extraction.
//!
//! A clause "the robot builds a desk" yields the triple `(robot, build, desk)`,
//! read as both "a robot can build" and "a desk is buildable". Passive clauses
//! ("desks are built") only support the second reading, so they are emitted
//! with the [`PASSIVE_SUBJECT`] placeholder in the subject slot.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dep::{base_relation, DepSentence, Token, UNSPECIFIED};

/// Reserved subject for object-only evidence from passive clauses.
pub const PASSIVE_SUBJECT: &str = "⊥";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvoTriple {
    pub subject: String,
    pub verb: String,
    pub object: String,
    pub source: String,
    pub weight: f64,
}

impl SvoTriple {
    pub fn new(subject: &str, verb: &str, object: &str) -> Self {
        SvoTriple {
            subject: subject.to_string(),
            verb: verb.to_string(),
            object: object.to_string(),
            source: String::new(),
            weight: 1.0,
        }
    }

    /// Object-only evidence from a passive clause.
    pub fn passive(verb: &str, object: &str) -> Self {
        SvoTriple::new(PASSIVE_SUBJECT, verb, object)
    }

    pub fn is_passive_only(&self) -> bool {
        self.subject == PASSIVE_SUBJECT
    }

    /// The same evidence with subject and object swapped.
    pub fn reversed(&self) -> Self {
        SvoTriple {
            subject: self.object.clone(),
            object: self.subject.clone(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractConfig {
    pub subject_labels: Vec<String>,
    pub object_labels: Vec<String>,
    pub passive_labels: Vec<String>,
    pub verb_stoplist: Vec<String>,
    /// Lemmas never admitted into a subject or object slot (e.g. pronouns).
    pub noun_stoplist: Vec<String>,
    /// Verbs with a dependent carrying one of these labels are skipped. Empty disables.
    pub negation_labels: Vec<String>,
    pub conj_expansion: bool,
    pub strict_pos: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        let strings = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
        ExtractConfig {
            subject_labels: strings(&["nsubj"]),
            object_labels: strings(&["dobj", "obj"]),
            passive_labels: strings(&["nsubjpass", "nsubj:pass"]),
            verb_stoplist: strings(&["be", "have", "do"]),
            noun_stoplist: Vec::new(),
            negation_labels: Vec::new(),
            conj_expansion: true,
            strict_pos: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Subject,
    Object,
    Passive,
}

impl ExtractConfig {
    /// Exact labels win; otherwise the label's base (before `:`) is tried,
    /// so `nsubj:pass` stays passive while `nsubj:outer` counts as a subject.
    fn role_of(&self, relation: &str) -> Option<Role> {
        let lookup = |label: &str| {
            let has = |xs: &[String]| xs.iter().any(|x| x == label);
            if has(&self.passive_labels) {
                Some(Role::Passive)
            } else if has(&self.subject_labels) {
                Some(Role::Subject)
            } else if has(&self.object_labels) {
                Some(Role::Object)
            } else {
                None
            }
        };
        lookup(relation).or_else(|| {
            let base = base_relation(relation);
            if base != relation {
                lookup(base)
            } else {
                None
            }
        })
    }
}

/// Normalized lemma: the lemma column lowercased, or the lowercased surface
/// form when the lemma is missing.
pub fn lemma_of(token: &Token) -> String {
    if token.lemma.is_empty() || token.lemma == UNSPECIFIED {
        token.surface.to_lowercase()
    } else {
        token.lemma.to_lowercase()
    }
}

/// Extracts ability-modality triples from one sentence.
pub fn extract_triples(sentence: &DepSentence, config: &ExtractConfig) -> Vec<SvoTriple> {
    let mut out = Vec::new();
    for verb in &sentence.tokens {
        let verb_lemma = lemma_of(verb);
        if verb_lemma.is_empty() || config.verb_stoplist.contains(&verb_lemma) {
            continue;
        }
        let negated = sentence
            .dependents_of(verb.index)
            .any(|e| config.negation_labels.contains(&e.relation));
        if negated {
            continue;
        }

        let mut subjects = BTreeSet::new();
        let mut objects = BTreeSet::new();
        let mut passives = BTreeSet::new();
        for e in sentence.dependents_of(verb.index) {
            match config.role_of(&e.relation) {
                Some(Role::Subject) => subjects.insert(e.dependent),
                Some(Role::Object) => objects.insert(e.dependent),
                Some(Role::Passive) => passives.insert(e.dependent),
                None => false,
            };
        }
        if config.conj_expansion {
            for set in [&mut subjects, &mut objects, &mut passives] {
                expand_conjuncts(sentence, set);
            }
        }

        let subjects = nouns(sentence, &subjects, config);
        let objects = nouns(sentence, &objects, config);
        for s in &subjects {
            for o in &objects {
                out.push(triple(s, &verb_lemma, o, &sentence.id));
            }
        }
        for p in nouns(sentence, &passives, config) {
            out.push(triple(PASSIVE_SUBJECT, &verb_lemma, &p, &sentence.id));
        }
    }
    out
}

fn triple(s: &str, v: &str, o: &str, source: &str) -> SvoTriple {
    SvoTriple {
        source: source.to_string(),
        ..SvoTriple::new(s, v, o)
    }
}

/// Adds every token reachable through `conj` edges, transitively.
fn expand_conjuncts(sentence: &DepSentence, set: &mut BTreeSet<u32>) {
    let mut frontier: Vec<u32> = set.iter().copied().collect();
    while let Some(head) = frontier.pop() {
        for e in sentence.dependents_of(head) {
            if e.base_relation() == "conj" && set.insert(e.dependent) {
                frontier.push(e.dependent);
            }
        }
    }
}

fn nouns(sentence: &DepSentence, indices: &BTreeSet<u32>, config: &ExtractConfig) -> Vec<String> {
    indices
        .iter()
        .filter_map(|&i| sentence.token(i))
        .filter(|t| !config.strict_pos || t.upos == "NOUN" || t.upos == "PROPN")
        .map(lemma_of)
        .filter(|l| !l.is_empty() && l != PASSIVE_SUBJECT && !config.noun_stoplist.contains(l))
        .collect()
}
