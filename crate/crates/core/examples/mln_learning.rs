// Ground the CanDo/Affords program over a tiny model, learn its weights by
// pseudo-likelihood, and query a marginal.

use std::error::Error;

use affordance_kb::mln::{
    default_schema, evidence_from_model, format_program, infer_marginal, learn_weights_pll,
    parse_evidence, GroundModel, SamplerConfig, StepConfig,
};
use affordance_kb::{FilterConfig, ModalityModel, SvoTriple};

pub fn run_example() -> Result<f64, Box<dyn Error>> {
    let model = ModalityModel::build(
        &[
            SvoTriple::new("arm", "pull", "door"),
            SvoTriple::new("robot", "build", "desk"),
        ],
        0.0,
        FilterConfig::default(),
    )?;
    let (program, constants) = default_schema(&model);
    let gm = GroundModel::ground(&program, &constants)?;
    println!(
        "{} ground atoms, {} ground clauses",
        gm.atom_count(),
        gm.clauses().len()
    );

    let world = evidence_from_model(&gm, &model);
    let report = learn_weights_pll(&gm, &world, 0.1, &StepConfig::default())?;
    let learned = program.with_weights(&report.weights)?;
    print!("{}", format_program(&learned));

    let evidence = parse_evidence("SubjOf(arm,pull)\n", &gm)?;
    let query = gm.parse_atom("CanDo(arm,pull)")?;
    let p = infer_marginal(
        &gm,
        &report.weights,
        query,
        &evidence,
        &SamplerConfig::default(),
    )?;
    println!("P(CanDo(arm,pull) | SubjOf(arm,pull)) = {p:.4}");
    Ok(p)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()?;
    Ok(())
}
