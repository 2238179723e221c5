//! CoNLL-U reader and writer.
//!
//! Only basic dependencies are read (HEAD/DEPREL); the DEPS column and the
//! other opaque columns are carried through so that a parsed sentence can
//! be written back out unchanged.

use std::io::BufRead;

use super::{
    validate, DepEdge, DepSentence, IngestError, OpaqueColumns, ParseMode, Parsed, RecordError,
    Token, UNSPECIFIED,
};

const COLUMNS: usize = 10;

/// Parses a CoNLL-U stream. Sentence ids come from `# sent_id =` comments,
/// falling back to `source:N` with N the 1-based block ordinal.
pub fn parse_conllu<R: BufRead>(
    reader: R,
    source: &str,
    mode: ParseMode,
) -> Result<Parsed, IngestError> {
    let mut parsed = Parsed::default();
    let mut block: Vec<(usize, String)> = Vec::new();
    let mut ordinal = 0usize;

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !block.is_empty() {
                ordinal += 1;
                finish_block(&mut parsed, &block, source, ordinal, mode)?;
                block.clear();
            }
        } else {
            block.push((i + 1, line.to_string()));
        }
    }
    if !block.is_empty() {
        ordinal += 1;
        finish_block(&mut parsed, &block, source, ordinal, mode)?;
    }
    Ok(parsed)
}

/// Convenience wrapper over [`parse_conllu`] for in-memory text.
pub fn parse_conllu_str(text: &str, mode: ParseMode) -> Result<Parsed, IngestError> {
    parse_conllu(text.as_bytes(), "input", mode)
}

fn finish_block(
    parsed: &mut Parsed,
    block: &[(usize, String)],
    source: &str,
    ordinal: usize,
    mode: ParseMode,
) -> Result<(), IngestError> {
    match parse_block(block, source, ordinal) {
        Ok(Some(sentence)) => parsed.sentences.push(sentence),
        Ok(None) => {}
        Err(err) => parsed.reject(mode, err)?,
    }
    Ok(())
}

fn parse_block(
    block: &[(usize, String)],
    source: &str,
    ordinal: usize,
) -> Result<Option<DepSentence>, RecordError> {
    let mut comments = Vec::new();
    let mut tokens = Vec::new();
    let mut edges = Vec::new();
    let mut sent_id = None;

    for (lineno, line) in block {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(rest) = comment.trim().strip_prefix("sent_id") {
                if let Some(id) = rest.trim_start().strip_prefix('=') {
                    sent_id = Some(id.trim().to_string());
                }
            }
            comments.push(comment.to_string());
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != COLUMNS {
            return Err(RecordError::new(
                *lineno,
                format!(
                    "expected {COLUMNS} tab-separated columns, found {}",
                    cols.len()
                ),
            ));
        }
        let id = cols[0];
        // multiword token ranges and empty nodes
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let index: u32 = id
            .parse()
            .map_err(|_| RecordError::new(*lineno, format!("non-numeric ID {id:?}")))?;
        if cols[1].is_empty() {
            return Err(RecordError::new(*lineno, "empty FORM"));
        }
        tokens.push(Token {
            index,
            surface: cols[1].to_string(),
            lemma: cols[2].to_string(),
            upos: cols[3].to_string(),
            opaque: OpaqueColumns {
                xpos: cols[4].to_string(),
                feats: cols[5].to_string(),
                deps: cols[8].to_string(),
                misc: cols[9].to_string(),
            },
        });
        let head = cols[6];
        if head != UNSPECIFIED {
            let head: u32 = head
                .parse()
                .map_err(|_| RecordError::new(*lineno, format!("non-numeric HEAD {head:?}")))?;
            edges.push(DepEdge::new(head, index, cols[7]));
        }
    }

    if tokens.is_empty() {
        if comments.is_empty() {
            return Ok(None);
        }
        return Err(RecordError::new(block[0].0, "sentence has no tokens"));
    }

    let mut sentence = DepSentence {
        id: sent_id.unwrap_or_else(|| format!("{source}:{ordinal}")),
        tokens,
        edges,
        partial: false,
        comments,
    };
    sentence.partial = sentence.detect_partial();
    let violations = validate(&sentence);
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(RecordError::new(block[0].0, msg.join("; ")));
    }
    Ok(Some(sentence))
}

/// Serializes sentences to CoNLL-U, one block per sentence.
pub fn write_conllu(sentences: &[DepSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        for c in &s.comments {
            out.push('#');
            out.push_str(c);
            out.push('\n');
        }
        for t in &s.tokens {
            let edge = s.edges.iter().find(|e| e.dependent == t.index);
            let (head, rel) = match edge {
                Some(e) => (e.head.to_string(), e.relation.as_str()),
                None => (UNSPECIFIED.to_string(), UNSPECIFIED),
            };
            let cols = [
                t.index.to_string().as_str(),
                &t.surface,
                &t.lemma,
                &t.upos,
                &t.opaque.xpos,
                &t.opaque.feats,
                &head,
                rel,
                &t.opaque.deps,
                &t.opaque.misc,
            ]
            .join("\t");
            out.push_str(&cols);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const ROBOT_DESK: &str = "# sent_id = robot_desk\n\
# text = The robot builds a desk.\n\
1\tThe\tthe\tDET\tDT\t_\t2\tdet\t_\t_\n\
2\trobot\trobot\tNOUN\tNN\t_\t3\tnsubj\t_\t_\n\
3\tbuilds\tbuild\tVERB\tVBZ\t_\t0\troot\t_\t_\n\
4\ta\ta\tDET\tDT\t_\t5\tdet\t_\t_\n\
5\tdesk\tdesk\tNOUN\tNN\t_\t3\tdobj\t_\tSpaceAfter=No\n\n";

    #[test]
    fn robot_desk_block() {
        let p = parse_conllu_str(ROBOT_DESK, ParseMode::Strict).unwrap();
        assert_eq!(p.sentences.len(), 1);
        let s = &p.sentences[0];
        assert_eq!(s.id, "robot_desk");
        assert_eq!(s.tokens.len(), 5);
        assert_eq!(s.edges.len(), 5);
        assert!(!s.partial);
        assert!(s.edges.contains(&DepEdge::new(3, 5, "dobj")));
    }

    #[test]
    fn empty_stream() {
        let p = parse_conllu_str("", ParseMode::Strict).unwrap();
        assert!(p.sentences.is_empty());
        assert!(p.errors.is_empty());
    }

    #[test]
    fn bad_head_lenient_records_line() {
        let text = ROBOT_DESK.replace("\t3\tnsubj", "\tx\tnsubj");
        let p = parse_conllu_str(&text, ParseMode::Lenient).unwrap();
        assert!(p.sentences.is_empty());
        assert_eq!(p.errors.len(), 1);
        assert_eq!(p.errors[0].line, 4);
        assert!(p.errors[0].message.contains("HEAD"));
    }

    #[test]
    fn bad_head_strict_aborts() {
        let text = ROBOT_DESK.replace("\t3\tnsubj", "\tx\tnsubj");
        let err = parse_conllu_str(&text, ParseMode::Strict).unwrap_err();
        assert!(err.to_string().starts_with("line 4"));
    }

    #[test]
    fn wrong_column_count() {
        let text = "1\tThe\tthe\tDET\n";
        let p = parse_conllu_str(text, ParseMode::Lenient).unwrap();
        assert_eq!(p.errors[0].line, 1);
        assert!(p.errors[0].message.contains("columns"));
    }

    #[test]
    fn multiword_and_empty_nodes_skipped() {
        let text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n\
2\tn't\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\n\
3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n\
3.1\tgo\tgo\tVERB\t_\t_\t_\t_\t3:conj\t_\n";
        let p = parse_conllu_str(text, ParseMode::Strict).unwrap();
        assert_eq!(p.sentences[0].tokens.len(), 3);
        assert_eq!(p.sentences[0].id, "input:1");
    }

    #[test]
    fn missing_head_marks_partial() {
        let text = ROBOT_DESK.replace("\t5\tdet", "\t_\t_");
        let p = parse_conllu_str(&text, ParseMode::Strict).unwrap();
        assert!(p.sentences[0].partial);
        assert_eq!(p.sentences[0].edges.len(), 4);
    }

    #[test]
    fn invalid_tree_rejected() {
        let text = ROBOT_DESK.replace("\t2\tdet", "\t9\tdet");
        let p = parse_conllu_str(&text, ParseMode::Lenient).unwrap();
        assert!(p.sentences.is_empty());
        assert!(p.errors[0].message.contains("index range"));
    }

    #[test]
    fn write_is_bit_exact() {
        let p = parse_conllu_str(ROBOT_DESK, ParseMode::Strict).unwrap();
        assert_eq!(write_conllu(&p.sentences), ROBOT_DESK);
    }

    #[test]
    fn uppercase_relation_normalized() {
        let text = ROBOT_DESK.replace("nsubj", "NSUBJ");
        let p = parse_conllu_str(&text, ParseMode::Strict).unwrap();
        assert_eq!(p.sentences[0].edges[1].relation, "nsubj");
    }
}
