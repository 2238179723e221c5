mod common;

use affordance_kb::dep::{parse_conllu_str, validate, write_conllu, OpaqueColumns};
use affordance_kb::{
    extract_triples, DepEdge, DepSentence, ExtractConfig, FilterConfig, ModalityModel, ParseMode,
    SvoTriple, Token,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RELATIONS: &[&str] = &[
    "nsubj",
    "dobj",
    "obj",
    "det",
    "amod",
    "nsubj:pass",
    "conj",
    "obl:tmod",
];
const WORDS: &[&str] = &[
    "robot", "Desk", "builds", "ñandú", "the", "a", "x-ray", "O'Neil", "日本",
];

fn field(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => "_".to_string(),
        1 => "Number=Sing|Person=3".to_string(),
        2 => "SpaceAfter=No".to_string(),
        _ => WORDS.choose(rng).unwrap().to_string(),
    }
}

/// A well-formed tree: token 1..=n, one root, every other token attached
/// to a random earlier-numbered or later-numbered head.
fn random_sentence(rng: &mut ChaCha8Rng, k: usize) -> DepSentence {
    let n = rng.gen_range(1..=9u32);
    let root = rng.gen_range(1..=n);
    let tokens = (1..=n)
        .map(|i| Token {
            index: i,
            surface: WORDS.choose(rng).unwrap().to_string(),
            lemma: if rng.gen_bool(0.2) {
                "_".into()
            } else {
                WORDS.choose(rng).unwrap().to_lowercase()
            },
            upos: ["NOUN", "VERB", "DET", "_"]
                .choose(rng)
                .unwrap()
                .to_string(),
            opaque: OpaqueColumns {
                xpos: field(rng),
                feats: field(rng),
                deps: field(rng),
                misc: field(rng),
            },
        })
        .collect();
    let edges = (1..=n)
        .map(|i| {
            if i == root {
                DepEdge::new(0, i, "root")
            } else {
                let mut h = rng.gen_range(1..=n);
                while h == i {
                    h = rng.gen_range(1..=n);
                }
                DepEdge::new(h, i, RELATIONS.choose(rng).unwrap())
            }
        })
        .collect();
    DepSentence {
        id: format!("s{k}"),
        tokens,
        edges,
        partial: false,
        comments: vec![format!(" sent_id = s{k}"), " text = generated".to_string()],
    }
}

fn random_document(seed: u64) -> Vec<DepSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rng.gen_range(1..6))
        .map(|k| random_sentence(&mut rng, k))
        .collect()
}

proptest! {
    #[test]
    fn conllu_write_then_parse_is_identity(seed in any::<u64>()) {
        let doc = random_document(seed);
        let text = write_conllu(&doc);
        let parsed = parse_conllu_str(&text, ParseMode::Strict).unwrap();
        prop_assert!(parsed.errors.is_empty());
        // equal field-wise and in input order
        prop_assert_eq!(&parsed.sentences, &doc);
        prop_assert_eq!(write_conllu(&parsed.sentences), text);
    }

    #[test]
    fn accepted_sentences_always_validate(seed in any::<u64>(), line in 0usize..60, cut in 0usize..12) {
        let text = write_conllu(&random_document(seed));
        // damage one line by dropping a column range
        let damaged: Vec<String> = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                if i == line % text.lines().count().max(1) {
                    let cols: Vec<&str> = l.split('\t').collect();
                    let keep = cut.min(cols.len());
                    cols[..keep].join("\t")
                } else {
                    l.to_string()
                }
            })
            .collect();
        let parsed = parse_conllu_str(&damaged.join("\n"), ParseMode::Lenient).unwrap();
        for s in &parsed.sentences {
            prop_assert!(validate(s).is_empty(), "{:?}", validate(s));
        }
    }

    #[test]
    fn extraction_is_deterministic_and_additive(split in 0usize..100) {
        let text = common::read_fixture("corpus100.conllu");
        let sentences = parse_conllu_str(&text, ParseMode::Strict).unwrap().sentences;
        let cfg = ExtractConfig::default();
        let run = |xs: &[DepSentence]| -> Vec<SvoTriple> {
            xs.iter().flat_map(|s| extract_triples(s, &cfg)).collect()
        };
        let all = run(&sentences);
        prop_assert_eq!(&all, &run(&sentences));
        let (a, b) = sentences.split_at(split.min(sentences.len()));
        let mut joined = run(a);
        joined.extend(run(b));
        prop_assert_eq!(all, joined);
    }

    #[test]
    fn passive_only_triples_never_reach_active_counts(
        real in prop::collection::vec((0..4u8, 0..4u8, 0..4u8), 1..20),
        passive in prop::collection::vec((0..4u8, 0..4u8), 0..10),
    ) {
        let base: Vec<SvoTriple> = real
            .iter()
            .map(|(s, v, o)| SvoTriple::new(&format!("s{s}"), &format!("v{v}"), &format!("o{o}")))
            .collect();
        let mut with = base.clone();
        with.extend(passive.iter().map(|(v, o)| SvoTriple::passive(&format!("v{v}"), &format!("o{o}"))));
        let a = ModalityModel::build(&base, 0.0, FilterConfig::default()).unwrap();
        let b = ModalityModel::build(&with, 0.0, FilterConfig::default()).unwrap();
        prop_assert_eq!(a.active_entries().collect::<Vec<_>>(), b.active_entries().collect::<Vec<_>>());
        prop_assert_eq!(a.total_active(), b.total_active());
        prop_assert_eq!(b.total_passive(), a.total_passive() + passive.len() as f64);
    }
}

#[test]
fn extracted_verbs_have_subject_and_object_edges() {
    let text = common::read_fixture("corpus100.conllu");
    let cfg = ExtractConfig::default();
    for s in parse_conllu_str(&text, ParseMode::Strict)
        .unwrap()
        .sentences
    {
        for t in extract_triples(&s, &cfg) {
            let verb = s
                .tokens
                .iter()
                .find(|tok| affordance_kb::lemma_of(tok) == t.verb)
                .expect("verb token present");
            let rels: Vec<&str> = s
                .dependents_of(verb.index)
                .map(|e| e.relation.as_str())
                .collect();
            let has_subject = rels.iter().any(|r| r.starts_with("nsubj"));
            let has_object = rels
                .iter()
                .any(|r| *r == "obj" || *r == "dobj" || r.starts_with("nsubj:pass"));
            assert!(has_subject && has_object, "{} {:?}: {rels:?}", s.id, t);
        }
    }
}
