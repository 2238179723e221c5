//! Reader for Stanford typed-dependency lines: `nsubj(builds-3, robot-2)`.

use std::collections::BTreeMap;
use std::io::BufRead;

use super::{
    validate, DepEdge, DepSentence, IngestError, ParseMode, Parsed, RecordError, Token, UNSPECIFIED,
};

/// Parses blank-line separated blocks of dependency lines. Tokens are
/// reconstructed from the `word-index` pairs with the lowercased word as
/// lemma; sentences with index gaps come back flagged partial.
pub fn parse_sd_lines<R: BufRead>(
    reader: R,
    source: &str,
    mode: ParseMode,
) -> Result<Parsed, IngestError> {
    let mut parsed = Parsed::default();
    let mut block: Vec<(usize, String)> = Vec::new();
    let mut ordinal = 0usize;

    let mut flush = |block: &mut Vec<(usize, String)>, parsed: &mut Parsed| {
        if block.is_empty() {
            return Ok(());
        }
        ordinal += 1;
        let result = parse_block(block, format!("{source}:{ordinal}"));
        block.clear();
        match result {
            Ok(s) => parsed.sentences.push(s),
            Err(e) => parsed.reject(mode, e)?,
        }
        Ok::<(), RecordError>(())
    };

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            flush(&mut block, &mut parsed)?;
        } else {
            block.push((i + 1, line.to_string()));
        }
    }
    flush(&mut block, &mut parsed)?;
    Ok(parsed)
}

pub fn parse_sd_str(text: &str, mode: ParseMode) -> Result<Parsed, IngestError> {
    parse_sd_lines(text.as_bytes(), "input", mode)
}

struct SdLine<'a> {
    relation: &'a str,
    head: (&'a str, u32),
    dependent: (&'a str, u32),
}

fn parse_line(line: &str) -> Option<SdLine<'_>> {
    let open = line.find('(')?;
    let relation = line[..open].trim();
    if relation.is_empty() || relation.contains(char::is_whitespace) {
        return None;
    }
    let inner = line[open + 1..].strip_suffix(')')?;
    // words may themselves contain ", " so try every split point
    inner.match_indices(", ").find_map(|(at, _)| {
        let head = word_index(&inner[..at])?;
        let dependent = word_index(&inner[at + 2..])?;
        Some(SdLine {
            relation,
            head,
            dependent,
        })
    })
}

fn word_index(s: &str) -> Option<(&str, u32)> {
    let (word, index) = s.trim().rsplit_once('-')?;
    // copy nodes carry trailing primes, e.g. `builds-3'`
    let index = index.trim_end_matches('\'').parse().ok()?;
    if word.is_empty() {
        return None;
    }
    Some((word, index))
}

fn parse_block(block: &[(usize, String)], id: String) -> Result<DepSentence, RecordError> {
    let mut words: BTreeMap<u32, String> = BTreeMap::new();
    let mut heads: BTreeMap<u32, (u32, String, usize)> = BTreeMap::new();
    let mut edges = Vec::new();

    for (lineno, line) in block {
        let parsed = parse_line(line).ok_or_else(|| {
            RecordError::new(*lineno, format!("unparseable dependency line {line:?}"))
        })?;
        let mut note = |(word, index): (&str, u32)| -> Result<(), RecordError> {
            if index == 0 {
                return Ok(());
            }
            match words.get(&index) {
                Some(prev) if prev != word => Err(RecordError::new(
                    *lineno,
                    format!("index {index} names both {prev:?} and {word:?}"),
                )),
                _ => {
                    words.insert(index, word.to_string());
                    Ok(())
                }
            }
        };
        note(parsed.head)?;
        note(parsed.dependent)?;

        let edge = DepEdge::new(parsed.head.1, parsed.dependent.1, parsed.relation);
        match heads.get(&edge.dependent) {
            Some((head, rel, _)) if *head == edge.head && *rel == edge.relation => continue,
            Some((head, _, first)) => {
                return Err(RecordError::new(
                    *lineno,
                    format!(
                        "dependent {} already attached to {} on line {}",
                        edge.dependent, head, first
                    ),
                ))
            }
            None => {
                heads.insert(edge.dependent, (edge.head, edge.relation.clone(), *lineno));
            }
        }
        edges.push(edge);
    }

    let tokens = words
        .iter()
        .map(|(&index, word)| Token::new(index, word, &word.to_lowercase(), UNSPECIFIED))
        .collect();
    let mut sentence = DepSentence {
        id,
        tokens,
        edges,
        partial: false,
        comments: Vec::new(),
    };
    sentence.partial = sentence.detect_partial();
    let violations = validate(&sentence);
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(RecordError::new(block[0].0, msg.join("; ")));
    }
    Ok(sentence)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subject_and_object_lines() {
        let p = parse_sd_str(
            "nsubj(builds-3, robot-2)\ndobj(builds-3, desk-5)\n",
            ParseMode::Strict,
        )
        .unwrap();
        assert_eq!(p.sentences.len(), 1);
        let s = &p.sentences[0];
        let idx: Vec<u32> = s.tokens.iter().map(|t| t.index).collect();
        assert_eq!(idx, vec![2, 3, 5]);
        assert_eq!(s.tokens[1].lemma, "builds");
        assert_eq!(s.edges.len(), 2);
        assert!(s.partial);
    }

    #[test]
    fn full_robot_desk_is_not_partial() {
        let text = "det(robot-2, The-1)\nnsubj(builds-3, robot-2)\nroot(ROOT-0, builds-3)\n\
                    det(desk-5, a-4)\ndobj(builds-3, desk-5)\n";
        let p = parse_sd_str(text, ParseMode::Strict).unwrap();
        let s = &p.sentences[0];
        assert!(!s.partial);
        assert_eq!(s.tokens[0].lemma, "the");
        assert_eq!(s.tokens.len(), 5);
    }

    #[test]
    fn empty_stream() {
        assert!(parse_sd_str("", ParseMode::Strict)
            .unwrap()
            .sentences
            .is_empty());
    }

    #[test]
    fn truncated_line_names_line_one() {
        let p = parse_sd_str("nsubj(builds-3", ParseMode::Lenient).unwrap();
        assert!(p.sentences.is_empty());
        assert_eq!(p.errors.len(), 1);
        assert_eq!(p.errors[0].line, 1);
    }

    #[test]
    fn conflicting_heads_reject_sentence() {
        let text = "nsubj(builds-3, robot-2)\nnsubj(eats-4, robot-2)\n\ndobj(eats-2, cake-3)\n";
        let p = parse_sd_str(text, ParseMode::Lenient).unwrap();
        assert_eq!(p.sentences.len(), 1);
        assert_eq!(p.sentences[0].id, "input:2");
        assert_eq!(p.errors[0].line, 2);
    }

    #[test]
    fn duplicate_identical_line_is_ignored() {
        let p = parse_sd_str(
            "nsubj(builds-3, robot-2)\nnsubj(builds-3, robot-2)\n",
            ParseMode::Strict,
        )
        .unwrap();
        assert_eq!(p.sentences[0].edges.len(), 1);
    }

    #[test]
    fn punctuation_words_and_copy_primes() {
        let line = parse_line("punct(builds-3, ,-4)").unwrap();
        assert_eq!(line.dependent, (",", 4));
        let line = parse_line("conj(builds-3', runs-7)").unwrap();
        assert_eq!(line.head, ("builds", 3));
        assert_eq!(line.relation, "conj");
    }
}
