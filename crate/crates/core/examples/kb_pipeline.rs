// The whole pipeline as the binary runs it: build a KB file from a corpus,
// load it back, query it, and export it.

use std::error::Error;
use std::path::Path;

use affordance_kb::kb::{build_kb, export, load_kb, save_kb, ExportFormat, PipelineConfig, Query};

pub fn run_example() -> Result<Vec<String>, Box<dyn Error>> {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/kitchen.conllu");
    let config = PipelineConfig::from_toml("svd_rank = 2\nmln_train = true\n")?;
    let (kb, report) = build_kb(&[corpus], &config)?;
    print!("{report}");

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("kitchen.kb.json");
    save_kb(&kb, &path)?;
    let kb = load_kb(&path)?;

    let mut answers = Vec::new();
    for q in [
        "can arm pull",
        "affords door pull",
        "p arm pour bottle",
        "neighbors active arm 2",
    ] {
        let lines = kb.answer(&q.parse::<Query>()?, 0.05)?;
        println!("{q}: {}", lines.join(" | "));
        answers.extend(lines);
    }
    print!("{}", export(&kb, ExportFormat::Jsonl));
    Ok(answers)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()?;
    Ok(())
}
