// Read a CoNLL-U file, print each sentence's dependency edges, and write the
// sentences back out.
//
// ```text
// cargo run --example parse_conllu -- tests/fixtures/robot_desk.conllu
// ```

use std::error::Error;
use std::path::Path;

use affordance_kb::dep::{parse_conllu_str, write_conllu};
use affordance_kb::ParseMode;

pub fn run_example() -> Result<String, Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/robot_desk.conllu");
    let text = std::fs::read_to_string(path)?;
    let parsed = parse_conllu_str(&text, ParseMode::Strict)?;
    let mut out = String::new();
    for s in &parsed.sentences {
        out.push_str(&format!("{} ({} tokens)\n", s.id, s.tokens.len()));
        for e in &s.edges {
            let word = |i: u32| s.token(i).map_or("ROOT", |t| t.surface.as_str());
            out.push_str(&format!(
                "  {}({}, {})\n",
                e.relation,
                word(e.head),
                word(e.dependent)
            ));
        }
    }
    assert_eq!(write_conllu(&parsed.sentences), text);
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    print!("{}", run_example()?);
    Ok(())
}
