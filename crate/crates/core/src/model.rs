//! Count tables over SVO triples and the probability distributions derived
//! from them.
//!
//! The joint table counts `(subject, verb, object)` occurrences. The active
//! table `(subject, verb)` is its marginal over objects; the passive table
//! `(verb, object)` is its marginal over subjects plus passive-only evidence
//! (triples whose subject is [`PASSIVE_SUBJECT`]).
//!
//! With `smoothing_k == 0` probabilities are relative frequencies over the
//! observed tuples. With `k > 0` add-k smoothing spreads mass over the full
//! cross product of the role vocabularies; lemmas outside the vocabularies
//! are outside that event space and get probability 0.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::{SvoTriple, PASSIVE_SUBJECT};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("smoothing_k must be a finite value >= 0, got {0}")]
    InvalidSmoothing(f64),
    #[error("threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("min_count must be a finite value >= 0, got {0}")]
    InvalidMinCount(f64),
    #[error("min_pmi must be finite, got {0}")]
    InvalidMinPmi(f64),
    #[error("triple ({0}, {1}, {2}) has non-positive or non-finite weight {3}")]
    InvalidTriple(String, String, String, f64),
    #[error("unsupported model format version {0}")]
    Version(u32),
    #[error("inconsistent model document: {0}")]
    Inconsistent(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Subject,
    Verb,
    Object,
}

/// An ordered set of lemmas with an inverse lookup.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "VocabDoc", into = "VocabDoc")]
pub struct Vocab {
    role: Role,
    entries: Vec<String>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabDoc {
    role: Role,
    entries: Vec<String>,
}

impl From<VocabDoc> for Vocab {
    fn from(doc: VocabDoc) -> Self {
        Vocab::new(doc.role, doc.entries)
    }
}

impl From<Vocab> for VocabDoc {
    fn from(v: Vocab) -> Self {
        VocabDoc {
            role: v.role,
            entries: v.entries,
        }
    }
}

impl PartialEq for Vocab {
    fn eq(&self, other: &Self) -> bool {
        self.role == other.role && self.entries == other.entries
    }
}

impl Vocab {
    /// Builds a vocabulary in sorted order; duplicates collapse.
    pub fn new<I, S>(role: Role, lemmas: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = lemmas.into_iter().map(Into::into).collect();
        let entries: Vec<String> = set.into_iter().collect();
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Vocab {
            role,
            entries,
            index,
        }
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, lemma: &str) -> Option<usize> {
        self.index.get(lemma).copied()
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.index.contains_key(lemma)
    }
}

/// Outlier filter thresholds. `min_pmi: None` disables the PMI filter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterConfig {
    pub min_count: f64,
    pub min_pmi: Option<f64>,
}

impl FilterConfig {
    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.min_count.is_finite() && self.min_count >= 0.0) {
            return Err(ModelError::InvalidMinCount(self.min_count));
        }
        match self.min_pmi {
            Some(p) if !p.is_finite() => Err(ModelError::InvalidMinPmi(p)),
            _ => Ok(()),
        }
    }
}

/// A thresholded yes/no answer with its supporting conditional probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    pub confidence: f64,
}

type Key2 = (String, String);
type Key3 = (String, String, String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDoc", into = "ModelDoc")]
pub struct ModalityModel {
    vocab_subject: Vocab,
    vocab_verb: Vocab,
    vocab_object: Vocab,
    joint: BTreeMap<Key3, f64>,
    /// keyed (subject, verb)
    active: BTreeMap<Key2, f64>,
    /// keyed (verb, object)
    passive: BTreeMap<Key2, f64>,
    /// keyed (verb, object); evidence with no real subject
    passive_only: BTreeMap<Key2, f64>,
    total_joint: f64,
    total_active: f64,
    total_passive: f64,
    smoothing_k: f64,
    filter: FilterConfig,
    subject_mass: BTreeMap<String, f64>,
    object_mass: BTreeMap<String, f64>,
}

impl ModalityModel {
    pub fn build(
        triples: &[SvoTriple],
        smoothing_k: f64,
        filter: FilterConfig,
    ) -> Result<Self, ModelError> {
        check_smoothing(smoothing_k)?;
        filter.check()?;
        let mut joint = BTreeMap::new();
        let mut passive_only = BTreeMap::new();
        for t in triples {
            if !(t.weight.is_finite() && t.weight > 0.0) {
                return Err(ModelError::InvalidTriple(
                    t.subject.clone(),
                    t.verb.clone(),
                    t.object.clone(),
                    t.weight,
                ));
            }
            if t.is_passive_only() {
                *passive_only
                    .entry((t.verb.clone(), t.object.clone()))
                    .or_insert(0.0) += t.weight;
            } else {
                *joint
                    .entry((t.subject.clone(), t.verb.clone(), t.object.clone()))
                    .or_insert(0.0) += t.weight;
            }
        }
        Ok(Self::from_tables(joint, passive_only, smoothing_k, filter))
    }

    pub fn empty(smoothing_k: f64) -> Result<Self, ModelError> {
        Self::build(&[], smoothing_k, FilterConfig::default())
    }

    fn from_tables(
        joint: BTreeMap<Key3, f64>,
        passive_only: BTreeMap<Key2, f64>,
        smoothing_k: f64,
        filter: FilterConfig,
    ) -> Self {
        let mut active: BTreeMap<Key2, f64> = BTreeMap::new();
        let mut passive: BTreeMap<Key2, f64> = BTreeMap::new();
        for ((s, v, o), &c) in &joint {
            *active.entry((s.clone(), v.clone())).or_insert(0.0) += c;
            *passive.entry((v.clone(), o.clone())).or_insert(0.0) += c;
        }
        for (k, &c) in &passive_only {
            *passive.entry(k.clone()).or_insert(0.0) += c;
        }

        let mut subject_mass = BTreeMap::new();
        for ((s, _), &c) in &active {
            *subject_mass.entry(s.clone()).or_insert(0.0) += c;
        }
        let mut object_mass = BTreeMap::new();
        for ((_, o), &c) in &passive {
            *object_mass.entry(o.clone()).or_insert(0.0) += c;
        }

        let vocab_subject = Vocab::new(Role::Subject, joint.keys().map(|k| k.0.clone()));
        let vocab_verb = Vocab::new(Role::Verb, passive.keys().map(|k| k.0.clone()));
        let vocab_object = Vocab::new(Role::Object, passive.keys().map(|k| k.1.clone()));

        ModalityModel {
            total_joint: joint.values().sum(),
            total_active: active.values().sum(),
            total_passive: passive.values().sum(),
            vocab_subject,
            vocab_verb,
            vocab_object,
            joint,
            active,
            passive,
            passive_only,
            smoothing_k,
            filter,
            subject_mass,
            object_mass,
        }
    }

    /// Combines two partial models; equals the model of the concatenated
    /// triple lists. Smoothing and filter settings are taken from `self`.
    pub fn merge(&self, other: &ModalityModel) -> ModalityModel {
        let mut joint = self.joint.clone();
        for (k, c) in &other.joint {
            *joint.entry(k.clone()).or_insert(0.0) += c;
        }
        let mut passive_only = self.passive_only.clone();
        for (k, c) in &other.passive_only {
            *passive_only.entry(k.clone()).or_insert(0.0) += c;
        }
        Self::from_tables(joint, passive_only, self.smoothing_k, self.filter)
    }

    pub fn with_smoothing(&self, k: f64) -> Result<ModalityModel, ModelError> {
        check_smoothing(k)?;
        Ok(ModalityModel {
            smoothing_k: k,
            ..self.clone()
        })
    }

    pub fn vocab(&self, role: Role) -> &Vocab {
        match role {
            Role::Subject => &self.vocab_subject,
            Role::Verb => &self.vocab_verb,
            Role::Object => &self.vocab_object,
        }
    }

    pub fn smoothing_k(&self) -> f64 {
        self.smoothing_k
    }

    pub fn filter_config(&self) -> FilterConfig {
        self.filter
    }

    pub fn total_joint(&self) -> f64 {
        self.total_joint
    }

    pub fn total_active(&self) -> f64 {
        self.total_active
    }

    pub fn total_passive(&self) -> f64 {
        self.total_passive
    }

    pub fn is_empty(&self) -> bool {
        self.joint.is_empty() && self.passive_only.is_empty()
    }

    /// Joint entries in lexicographic `(s, v, o)` order.
    pub fn joint_entries(&self) -> impl Iterator<Item = (&str, &str, &str, f64)> {
        self.joint
            .iter()
            .map(|((s, v, o), &c)| (s.as_str(), v.as_str(), o.as_str(), c))
    }

    /// Active entries as `(subject, verb, count)`.
    pub fn active_entries(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.active
            .iter()
            .map(|((s, v), &c)| (s.as_str(), v.as_str(), c))
    }

    /// Passive entries as `(verb, object, count)`.
    pub fn passive_entries(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.passive
            .iter()
            .map(|((v, o), &c)| (v.as_str(), o.as_str(), c))
    }

    pub fn passive_only_entries(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.passive_only
            .iter()
            .map(|((v, o), &c)| (v.as_str(), o.as_str(), c))
    }

    pub fn joint_count(&self, s: &str, v: &str, o: &str) -> f64 {
        self.joint
            .get(&(s.to_string(), v.to_string(), o.to_string()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn active_count(&self, s: &str, v: &str) -> f64 {
        self.active
            .get(&(s.to_string(), v.to_string()))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn passive_count(&self, v: &str, o: &str) -> f64 {
        self.passive
            .get(&(v.to_string(), o.to_string()))
            .copied()
            .unwrap_or(0.0)
    }

    fn smoothed(&self, count: f64, total: f64, in_space: bool, space: usize) -> f64 {
        let k = self.smoothing_k;
        if k == 0.0 {
            if total == 0.0 {
                0.0
            } else {
                count / total
            }
        } else if !in_space {
            0.0
        } else {
            (count + k) / (total + k * space as f64)
        }
    }

    /// P(s, v, o) over the joint table.
    pub fn joint_prob(&self, s: &str, v: &str, o: &str) -> f64 {
        let in_space = self.vocab_subject.contains(s)
            && self.vocab_verb.contains(v)
            && self.vocab_object.contains(o);
        let space = self.vocab_subject.len() * self.vocab_verb.len() * self.vocab_object.len();
        self.smoothed(self.joint_count(s, v, o), self.total_joint, in_space, space)
    }

    /// P(s, v) over the active table.
    pub fn active_prob(&self, s: &str, v: &str) -> f64 {
        let in_space = self.vocab_subject.contains(s) && self.vocab_verb.contains(v);
        let space = self.vocab_subject.len() * self.vocab_verb.len();
        self.smoothed(self.active_count(s, v), self.total_active, in_space, space)
    }

    /// P(v, o) over the passive table.
    pub fn passive_prob(&self, v: &str, o: &str) -> f64 {
        let in_space = self.vocab_verb.contains(v) && self.vocab_object.contains(o);
        let space = self.vocab_verb.len() * self.vocab_object.len();
        self.smoothed(
            self.passive_count(v, o),
            self.total_passive,
            in_space,
            space,
        )
    }

    /// Whether `s` can perform `v`, judged by P(v | s) over active counts.
    /// Conditioning on the entity keeps frequent entities from dominating.
    pub fn can_do(&self, s: &str, v: &str, threshold: f64) -> Result<Verdict, ModelError> {
        check_threshold(threshold)?;
        let mass = self.subject_mass.get(s).copied().unwrap_or(0.0);
        Ok(verdict(self.active_count(s, v), mass, threshold))
    }

    /// Whether `v` can be done to `o`, judged by P(v | o) over passive counts.
    pub fn affords(&self, o: &str, v: &str, threshold: f64) -> Result<Verdict, ModelError> {
        check_threshold(threshold)?;
        let mass = self.object_mass.get(o).copied().unwrap_or(0.0);
        Ok(verdict(self.passive_count(v, o), mass, threshold))
    }

    /// Drops joint entries (and passive-only evidence) below `min_count`,
    /// then repeatedly drops active and passive pairs whose PMI falls below
    /// `min_pmi` until no pair is removed. The fixpoint makes the filter
    /// idempotent.
    pub fn filter_outliers(&self, filter: FilterConfig) -> Result<ModalityModel, ModelError> {
        filter.check()?;
        let mut joint: BTreeMap<Key3, f64> = self
            .joint
            .iter()
            .filter(|(_, &c)| c >= filter.min_count)
            .map(|(k, &c)| (k.clone(), c))
            .collect();
        let mut passive_only: BTreeMap<Key2, f64> = self
            .passive_only
            .iter()
            .filter(|(_, &c)| c >= filter.min_count)
            .map(|(k, &c)| (k.clone(), c))
            .collect();

        if let Some(min_pmi) = filter.min_pmi {
            loop {
                let current = Self::from_tables(joint.clone(), passive_only.clone(), 0.0, filter);
                let bad_active = low_pmi_pairs(&current.active, min_pmi);
                let bad_passive = low_pmi_pairs(&current.passive, min_pmi);
                if bad_active.is_empty() && bad_passive.is_empty() {
                    break;
                }
                joint.retain(|(s, v, o), _| {
                    !bad_active.contains(&(s.clone(), v.clone()))
                        && !bad_passive.contains(&(v.clone(), o.clone()))
                });
                passive_only.retain(|k, _| !bad_passive.contains(k));
            }
        }
        Ok(Self::from_tables(
            joint,
            passive_only,
            self.smoothing_k,
            filter,
        ))
    }

    /// Applies the filter thresholds the model was built with.
    pub fn filtered(&self) -> Result<ModalityModel, ModelError> {
        self.filter_outliers(self.filter)
    }

    /// Number of stored joint plus passive-only entries.
    pub fn entry_count(&self) -> usize {
        self.joint.len() + self.passive_only.len()
    }
}

fn check_smoothing(k: f64) -> Result<(), ModelError> {
    if k.is_finite() && k >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidSmoothing(k))
    }
}

fn check_threshold(t: f64) -> Result<(), ModelError> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(ModelError::InvalidThreshold(t))
    }
}

fn verdict(count: f64, mass: f64, threshold: f64) -> Verdict {
    let confidence = if mass > 0.0 { count / mass } else { 0.0 };
    Verdict {
        holds: mass > 0.0 && confidence >= threshold,
        confidence,
    }
}

/// Pointwise mutual information ln[P(a,b) / (P(a) P(b))] of every pair in a
/// count table, with all probabilities taken from that table.
pub(crate) fn pmi_table(table: &BTreeMap<Key2, f64>) -> BTreeMap<Key2, f64> {
    let total: f64 = table.values().sum();
    let mut left: BTreeMap<&str, f64> = BTreeMap::new();
    let mut right: BTreeMap<&str, f64> = BTreeMap::new();
    for ((a, b), &c) in table {
        *left.entry(a).or_insert(0.0) += c;
        *right.entry(b).or_insert(0.0) += c;
    }
    table
        .iter()
        .map(|(k, &c)| {
            let pmi = (c * total / (left[k.0.as_str()] * right[k.1.as_str()])).ln();
            (k.clone(), pmi)
        })
        .collect()
}

fn low_pmi_pairs(table: &BTreeMap<Key2, f64>, min_pmi: f64) -> BTreeSet<Key2> {
    pmi_table(table)
        .into_iter()
        .filter(|(_, pmi)| *pmi < min_pmi)
        .map(|(k, _)| k)
        .collect()
}

/// Versioned on-disk form of a [`ModalityModel`].
#[derive(Serialize, Deserialize)]
struct ModelDoc {
    version: u32,
    vocabularies: [Vocab; 3],
    joint: Vec<(String, String, String, f64)>,
    active: Vec<(String, String, f64)>,
    passive: Vec<(String, String, f64)>,
    passive_only: Vec<(String, String, f64)>,
    totals: [f64; 3],
    smoothing_k: f64,
    filter: FilterConfig,
}

impl From<ModalityModel> for ModelDoc {
    fn from(m: ModalityModel) -> Self {
        let pairs = |t: &BTreeMap<Key2, f64>| {
            t.iter()
                .map(|((a, b), &c)| (a.clone(), b.clone(), c))
                .collect()
        };
        ModelDoc {
            version: MODEL_FORMAT_VERSION,
            joint: m
                .joint
                .iter()
                .map(|((s, v, o), &c)| (s.clone(), v.clone(), o.clone(), c))
                .collect(),
            active: pairs(&m.active),
            passive: pairs(&m.passive),
            passive_only: pairs(&m.passive_only),
            totals: [m.total_joint, m.total_active, m.total_passive],
            smoothing_k: m.smoothing_k,
            filter: m.filter,
            vocabularies: [m.vocab_subject, m.vocab_verb, m.vocab_object],
        }
    }
}

impl TryFrom<ModelDoc> for ModalityModel {
    type Error = ModelError;

    fn try_from(doc: ModelDoc) -> Result<Self, Self::Error> {
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(ModelError::Version(doc.version));
        }
        check_smoothing(doc.smoothing_k)?;
        doc.filter.check()?;
        let mut joint = BTreeMap::new();
        for (s, v, o, c) in doc.joint {
            if !(c.is_finite() && c >= 0.0) || s == PASSIVE_SUBJECT {
                return Err(ModelError::Inconsistent("invalid joint entry"));
            }
            joint.insert((s, v, o), c);
        }
        let mut passive_only = BTreeMap::new();
        for (v, o, c) in doc.passive_only {
            if !(c.is_finite() && c >= 0.0) {
                return Err(ModelError::Inconsistent("invalid passive-only entry"));
            }
            passive_only.insert((v, o), c);
        }
        let model = Self::from_tables(joint, passive_only, doc.smoothing_k, doc.filter);

        let pairs = |t: &BTreeMap<Key2, f64>| -> Vec<(String, String, f64)> {
            t.iter()
                .map(|((a, b), &c)| (a.clone(), b.clone(), c))
                .collect()
        };
        if pairs(&model.active) != doc.active || pairs(&model.passive) != doc.passive {
            return Err(ModelError::Inconsistent(
                "marginal tables disagree with joint table",
            ));
        }
        if [model.total_joint, model.total_active, model.total_passive] != doc.totals {
            return Err(ModelError::Inconsistent(
                "totals disagree with count tables",
            ));
        }
        let [s, v, o] = doc.vocabularies;
        if s != model.vocab_subject || v != model.vocab_verb || o != model.vocab_object {
            return Err(ModelError::Inconsistent(
                "vocabularies disagree with count tables",
            ));
        }
        Ok(model)
    }
}
