// The kitchen scene as two vector spaces: nouns as rows, verbs as axes.

use std::error::Error;

use affordance_kb::{FilterConfig, ModalityModel, ModalitySpace, SpaceRole, SvoTriple, Weighting};

pub fn run_example() -> Result<(ModalitySpace, ModalitySpace), Box<dyn Error>> {
    let triples = [
        SvoTriple::new("arm", "pull", "door"),
        SvoTriple::new("arm", "pull", "drawer"),
        SvoTriple::new("arm", "pour", "bottle"),
        SvoTriple::new("drawer", "contain", "bottle"),
        SvoTriple::new("bottle", "contain", "water"),
    ];
    let model = ModalityModel::build(&triples, 0.0, FilterConfig::default())?;
    let active = ModalitySpace::build(&model, SpaceRole::Active, Weighting::Ppmi)?;
    let passive = ModalitySpace::build(&model, SpaceRole::Passive, Weighting::Ppmi)?;

    print!("{}", passive.neighbors_report(&["door", "bottle"], 2)?);
    let c = passive.compose(&["door", "drawer"], 3)?;
    for (axis, x) in passive.axes().iter().zip(&c.vector) {
        println!("{axis}: {x:.4}");
    }

    let dense = passive.truncated_svd(2, 100, 7)?;
    println!(
        "rank-2 reconstruction error {:.4}, door~drawer {:.4}",
        dense.reconstruction_error(),
        dense.similarity("door", "drawer")?
    );
    Ok((active, passive))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()?;
    Ok(())
}
