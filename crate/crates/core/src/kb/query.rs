use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::str::FromStr;

use serde_json::json;

use super::{KbError, KnowledgeBase};
use crate::model::Verdict;
use crate::space::SpaceRole;

pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// How many nearest rows `compose` prints.
const COMPOSE_NEAREST: usize = 5;

const QUERY_USAGE: &str = "expected one of: can SUBJ VERB | affords OBJ VERB | p SUBJ VERB OBJ | \
neighbors (active|passive) NOUN K | compose (active|passive) NOUN+";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Can {
        subject: String,
        verb: String,
    },
    Affords {
        object: String,
        verb: String,
    },
    Prob {
        subject: String,
        verb: String,
        object: String,
    },
    Neighbors {
        role: SpaceRole,
        noun: String,
        k: usize,
    },
    Compose {
        role: SpaceRole,
        nouns: Vec<String>,
    },
}

impl Query {
    pub fn from_words<S: AsRef<str>>(words: &[S]) -> Result<Query, KbError> {
        let w: Vec<&str> = words.iter().map(|s| s.as_ref()).collect();
        let usage = || KbError::Usage(QUERY_USAGE.to_string());
        let role = |s: &str| s.parse::<SpaceRole>().map_err(KbError::Usage);
        let own = |s: &str| s.to_string();
        Ok(match w.as_slice() {
            ["can", s, v] => Query::Can {
                subject: own(s),
                verb: own(v),
            },
            ["affords", o, v] => Query::Affords {
                object: own(o),
                verb: own(v),
            },
            ["p", s, v, o] => Query::Prob {
                subject: own(s),
                verb: own(v),
                object: own(o),
            },
            ["neighbors", r, n, k] => Query::Neighbors {
                role: role(r)?,
                noun: own(n),
                k: k.parse()
                    .map_err(|_| KbError::Usage(format!("K must be a count, got {k:?}")))?,
            },
            ["compose", r, nouns @ ..] if !nouns.is_empty() => Query::Compose {
                role: role(r)?,
                nouns: nouns.iter().map(|n| own(n)).collect(),
            },
            _ => return Err(usage()),
        })
    }
}

impl FromStr for Query {
    type Err = KbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Query::from_words(&s.split_whitespace().collect::<Vec<_>>())
    }
}

fn verdict_line(v: Verdict) -> String {
    format!("{} {:.4}", v.holds, v.confidence)
}

impl KnowledgeBase {
    fn require_noun(&self, noun: &str) -> Result<(), KbError> {
        if self.knows_noun(noun) {
            Ok(())
        } else {
            Err(KbError::UnknownEntity(noun.to_string()))
        }
    }

    /// Answer lines for one query. Nouns must be known to the KB; verbs
    /// need not be, an unseen verb simply scores 0.
    pub fn answer(&self, query: &Query, threshold: f64) -> Result<Vec<String>, KbError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(KbError::Usage(format!(
                "threshold must lie in [0, 1], got {threshold}"
            )));
        }
        match query {
            Query::Can { subject, verb } => {
                self.require_noun(subject)?;
                Ok(vec![verdict_line(
                    self.model.can_do(subject, verb, threshold)?,
                )])
            }
            Query::Affords { object, verb } => {
                self.require_noun(object)?;
                Ok(vec![verdict_line(
                    self.model.affords(object, verb, threshold)?,
                )])
            }
            Query::Prob {
                subject,
                verb,
                object,
            } => {
                self.require_noun(subject)?;
                self.require_noun(object)?;
                Ok(vec![format!(
                    "{:.4}",
                    self.model.joint_prob(subject, verb, object)
                )])
            }
            Query::Neighbors { role, noun, k } => {
                let space = self
                    .space(*role)
                    .ok_or_else(|| KbError::UnknownEntity(noun.clone()))?;
                Ok(space
                    .neighbors(noun, *k)?
                    .into_iter()
                    .map(|(n, s)| format!("{n} {s:.4}"))
                    .collect())
            }
            Query::Compose { role, nouns } => {
                let space = self
                    .space(*role)
                    .ok_or_else(|| KbError::UnknownEntity(nouns[0].clone()))?;
                let refs: Vec<&str> = nouns.iter().map(String::as_str).collect();
                let c = space.compose(&refs, COMPOSE_NEAREST)?;
                let mut vector = String::from("vector");
                for (axis, x) in space.axes().iter().zip(&c.vector) {
                    write!(vector, " {axis}={x:.4}").unwrap();
                }
                let mut lines = vec![vector];
                lines.extend(c.nearest.into_iter().map(|(n, s)| format!("{n} {s:.4}")));
                Ok(lines)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// One JSON object per joint `(s, v, o)` entry.
    Jsonl,
    /// `active|passive <TAB> noun <TAB> verb <TAB> confidence` lines.
    Pairs,
}

impl FromStr for ExportFormat {
    type Err = KbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(ExportFormat::Jsonl),
            "pairs" => Ok(ExportFormat::Pairs),
            other => Err(KbError::Usage(format!(
                "unknown export format {other:?}; expected jsonl or pairs"
            ))),
        }
    }
}

/// Dumps the KB in lexicographic order.
pub fn export(kb: &KnowledgeBase, format: ExportFormat) -> String {
    let m = &kb.model;
    let mut out = String::new();
    match format {
        ExportFormat::Jsonl => {
            for (s, v, o, count) in m.joint_entries() {
                let record = json!({
                    "subject": s,
                    "verb": v,
                    "object": o,
                    "count": count,
                    "joint_prob": m.joint_prob(s, v, o),
                    "can_do": m.can_do(s, v, 0.0).unwrap().confidence,
                    "affords": m.affords(o, v, 0.0).unwrap().confidence,
                });
                out.push_str(&record.to_string());
                out.push('\n');
            }
        }
        ExportFormat::Pairs => {
            for (s, v, _) in m.active_entries() {
                let c = m.can_do(s, v, 0.0).unwrap().confidence;
                writeln!(out, "active\t{s}\t{v}\t{c:?}").unwrap();
            }
            let mut passive: Vec<(&str, &str)> =
                m.passive_entries().map(|(v, o, _)| (o, v)).collect();
            passive.sort_unstable();
            for (o, v) in passive {
                let c = m.affords(o, v, 0.0).unwrap().confidence;
                writeln!(out, "passive\t{o}\t{v}\t{c:?}").unwrap();
            }
        }
    }
    out
}

/// Re-imported pair export, answering the same can/affords queries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairTable {
    active: BTreeMap<(String, String), f64>,
    passive: BTreeMap<(String, String), f64>,
    subjects: BTreeSet<String>,
    objects: BTreeSet<String>,
}

impl PairTable {
    pub fn parse(text: &str) -> Result<PairTable, KbError> {
        let mut t = PairTable::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || KbError::Invalid(format!("pairs line {}: {line:?}", i + 1));
            let fields: Vec<&str> = line.split('\t').collect();
            let [kind, noun, verb, conf] = fields.as_slice() else {
                return Err(bad());
            };
            let conf: f64 = conf.parse().map_err(|_| bad())?;
            let key = (noun.to_string(), verb.to_string());
            match *kind {
                "active" => {
                    t.subjects.insert(noun.to_string());
                    t.active.insert(key, conf);
                }
                "passive" => {
                    t.objects.insert(noun.to_string());
                    t.passive.insert(key, conf);
                }
                _ => return Err(bad()),
            }
        }
        Ok(t)
    }

    fn verdict(
        table: &BTreeMap<(String, String), f64>,
        seen: &BTreeSet<String>,
        noun: &str,
        verb: &str,
        threshold: f64,
    ) -> Verdict {
        let confidence = table
            .get(&(noun.to_string(), verb.to_string()))
            .copied()
            .unwrap_or(0.0);
        Verdict {
            holds: seen.contains(noun) && confidence >= threshold,
            confidence,
        }
    }

    pub fn can_do(&self, subject: &str, verb: &str, threshold: f64) -> Verdict {
        Self::verdict(&self.active, &self.subjects, subject, verb, threshold)
    }

    pub fn affords(&self, object: &str, verb: &str, threshold: f64) -> Verdict {
        Self::verdict(&self.passive, &self.objects, object, verb, threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_grammar() {
        assert_eq!(
            "can robot build".parse::<Query>().unwrap(),
            Query::Can {
                subject: "robot".into(),
                verb: "build".into()
            }
        );
        assert_eq!(
            "neighbors passive door 1".parse::<Query>().unwrap(),
            Query::Neighbors {
                role: SpaceRole::Passive,
                noun: "door".into(),
                k: 1
            }
        );
        assert!(matches!(
            "compose active a b".parse::<Query>().unwrap(),
            Query::Compose { nouns, .. } if nouns.len() == 2
        ));
        for bad in [
            "",
            "can robot",
            "compose active",
            "neighbors sideways door 1",
            "neighbors active door x",
            "fly robot",
        ] {
            let err = bad.parse::<Query>().unwrap_err();
            assert_eq!(err.exit_code(), 1, "{bad}");
        }
    }

    #[test]
    fn export_format_names() {
        assert_eq!(
            "jsonl".parse::<ExportFormat>().unwrap(),
            ExportFormat::Jsonl
        );
        assert_eq!("xml".parse::<ExportFormat>().unwrap_err().exit_code(), 1);
    }

    #[test]
    fn pair_lines_parse() {
        let t =
            PairTable::parse("active\tarm\tpull\t0.6666666666666666\npassive\tdoor\tpull\t1.0\n")
                .unwrap();
        assert_eq!(t.can_do("arm", "pull", 0.5).confidence, 2.0 / 3.0);
        assert!(t.affords("door", "pull", 1.0).holds);
        assert!(!t.can_do("door", "pull", 0.0).holds);
        assert!(PairTable::parse("active\tarm\tpull").is_err());
    }
}
