// Pull subject-verb-object triples out of parsed sentences, from both the
// CoNLL-U and the Stanford `rel(head-i, dep-j)` inputs.

use std::error::Error;
use std::path::Path;

use affordance_kb::dep::{parse_conllu_str, parse_sd_str};
use affordance_kb::{extract_triples, ExtractConfig, ParseMode, SvoTriple};

fn fixture(name: &str) -> Result<String, std::io::Error> {
    std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures")
            .join(name),
    )
}

pub fn run_example() -> Result<Vec<SvoTriple>, Box<dyn Error>> {
    let config = ExtractConfig::default();
    let mut triples = Vec::new();

    let kitchen = parse_conllu_str(&fixture("kitchen.conllu")?, ParseMode::Strict)?;
    for s in &kitchen.sentences {
        triples.extend(extract_triples(s, &config));
    }

    // SD input has no lemma column, so verbs keep their inflection
    let robot_desk = parse_sd_str(&fixture("robot_desk.sd")?, ParseMode::Strict)?;
    let sd = extract_triples(&robot_desk.sentences[0], &config);
    assert_eq!(
        (sd[0].subject.as_str(), sd[0].verb.as_str()),
        ("robot", "builds")
    );
    triples.extend(sd);

    let passive = parse_conllu_str(
        "1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n\
         2\tdoor\tdoor\tNOUN\t_\t_\t4\tnsubj:pass\t_\t_\n\
         3\twas\tbe\tAUX\t_\t_\t4\taux:pass\t_\t_\n\
         4\topened\topen\tVERB\t_\t_\t0\troot\t_\t_\n",
        ParseMode::Strict,
    )?;
    triples.extend(extract_triples(&passive.sentences[0], &config));
    Ok(triples)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    for t in run_example()? {
        println!("{}\t{}\t{}", t.subject, t.verb, t.object);
    }
    Ok(())
}
