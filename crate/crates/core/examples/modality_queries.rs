// Count triples into a modality model and ask "can X do Y" / "is X Y-able".

use std::error::Error;

use affordance_kb::{FilterConfig, ModalityModel, SvoTriple};

pub fn run_example() -> Result<ModalityModel, Box<dyn Error>> {
    let triples = [
        SvoTriple::new("arm", "pull", "door"),
        SvoTriple::new("arm", "pull", "door"),
        SvoTriple::new("arm", "pull", "drawer"),
        SvoTriple::passive("pour", "bottle"),
        SvoTriple::new("desk", "eat", "cloud"),
    ];
    let model = ModalityModel::build(&triples, 0.0, FilterConfig::default())?;

    let arm = model.can_do("arm", "pull", 0.5)?;
    println!("can arm pull: {} {:.4}", arm.holds, arm.confidence);
    println!(
        "affords bottle pour: {:?}",
        model.affords("bottle", "pour", 0.5)?
    );
    println!(
        "P(arm, pull, door) = {:.4}",
        model.joint_prob("arm", "pull", "door")
    );
    println!(
        "P(pour, bottle) = {:.4}",
        model.passive_prob("pour", "bottle")
    );

    // the one-off figurative triple falls below the count threshold
    let filtered = model.filter_outliers(FilterConfig {
        min_count: 2.0,
        min_pmi: None,
    })?;
    assert!(!filtered.can_do("desk", "eat", 0.0)?.holds);
    println!(
        "entries before/after filtering: {}/{}",
        model.entry_count(),
        filtered.entry_count()
    );

    let smoothed = model.with_smoothing(1.0)?;
    println!(
        "smoothed P(arm, pull) = {:.4}",
        smoothed.active_prob("arm", "pull")
    );
    Ok(model)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()?;
    Ok(())
}
