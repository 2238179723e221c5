//! World probabilities and marginal inference.
//!
//! Exact answers enumerate all `2^n` assignments of the free atoms, so they
//! are limited to small groundings. Larger queries fall back to Gibbs
//! sampling, averaging the query atom's conditional probability at each
//! sweep rather than its sampled value.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GroundClause, GroundModel, MlnError, World};

/// Largest number of free atoms handled by exact enumeration.
pub const EXACT_ATOM_LIMIT: usize = 20;
const HARD_ENUMERATION_CAP: usize = 30;

/// Partial truth assignment: atom index → value.
pub type Evidence = BTreeMap<usize, bool>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub burn_in: usize,
    pub samples: usize,
    pub seed: u64,
    pub chains: usize,
    /// Queries with at most this many free atoms are answered exactly.
    pub exact_limit: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            burn_in: 1_000,
            samples: 20_000,
            seed: 0,
            chains: 1,
            exact_limit: EXACT_ATOM_LIMIT,
        }
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Σ_j w_j n_j(x).
pub(crate) fn world_score(gm: &GroundModel, weights: &[f64], world: &World) -> f64 {
    gm.clauses()
        .iter()
        .filter(|c| c.satisfied(world))
        .map(|c| weights[c.formula])
        .sum()
}

/// A clause restricted to the free atoms, as bit masks over free positions.
struct Reduced {
    weight: f64,
    pos: u32,
    neg: u32,
}

/// Splits the score into a constant part (clauses settled by fixed atoms)
/// and clauses over free atoms.
fn reduce(
    gm: &GroundModel,
    weights: &[f64],
    fixed: &Evidence,
    free_bit: &[Option<u32>],
) -> (f64, Vec<Reduced>) {
    let mut constant = 0.0;
    let mut reduced = Vec::new();
    for c in gm.clauses() {
        let w = weights[c.formula];
        let settled = c
            .literals
            .iter()
            .any(|&(a, neg)| fixed.get(&a).is_some_and(|&v| v != neg));
        if settled {
            constant += w;
            continue;
        }
        let (mut pos, mut neg) = (0u32, 0u32);
        for &(a, negated) in &c.literals {
            if let Some(bit) = free_bit[a] {
                if negated {
                    neg |= 1 << bit;
                } else {
                    pos |= 1 << bit;
                }
            }
        }
        if pos | neg != 0 {
            reduced.push(Reduced {
                weight: w,
                pos,
                neg,
            });
        }
    }
    (constant, reduced)
}

fn reduced_score(constant: f64, reduced: &[Reduced], mask: u32) -> f64 {
    constant
        + reduced
            .iter()
            .filter(|r| mask & r.pos != 0 || !mask & r.neg != 0)
            .map(|r| r.weight)
            .sum::<f64>()
}

/// log Z by enumerating every world.
pub fn log_partition(gm: &GroundModel, weights: &[f64]) -> Result<f64, MlnError> {
    gm.check_weights(weights)?;
    let n = gm.atom_count();
    if n > EXACT_ATOM_LIMIT {
        return Err(MlnError::TooManyAtoms {
            atoms: n,
            limit: EXACT_ATOM_LIMIT,
        });
    }
    let free_bit: Vec<Option<u32>> = (0..n as u32).map(Some).collect();
    let (constant, reduced) = reduce(gm, weights, &Evidence::new(), &free_bit);
    Ok(log_sum_exp(
        (0..1u32 << n).map(|mask| reduced_score(constant, &reduced, mask)),
    ))
}

/// log P(X = x) = Σ_j w_j n_j(x) − log Z.
pub fn world_log_prob(gm: &GroundModel, weights: &[f64], world: &World) -> Result<f64, MlnError> {
    gm.check_world(world)?;
    let log_z = log_partition(gm, weights)?;
    Ok(world_score(gm, weights, world) - log_z)
}

/// P(query = true | evidence).
pub fn infer_marginal(
    gm: &GroundModel,
    weights: &[f64],
    query: usize,
    evidence: &Evidence,
    config: &SamplerConfig,
) -> Result<f64, MlnError> {
    gm.check_weights(weights)?;
    let n = gm.atom_count();
    if query >= n {
        return Err(MlnError::UnknownAtom(format!("#{query}")));
    }
    if let Some(&bad) = evidence.keys().find(|&&a| a >= n) {
        return Err(MlnError::UnknownAtom(format!("#{bad}")));
    }
    if evidence.contains_key(&query) {
        return Err(MlnError::QueryInEvidence(gm.atom_name(query)));
    }
    if config.exact_limit > HARD_ENUMERATION_CAP {
        return Err(MlnError::InvalidSetting(format!(
            "exact_limit above {HARD_ENUMERATION_CAP}"
        )));
    }

    let free: Vec<usize> = (0..n).filter(|a| !evidence.contains_key(a)).collect();
    if free.len() <= config.exact_limit {
        Ok(exact_marginal(gm, weights, query, evidence, &free))
    } else {
        gibbs_marginal(gm, weights, query, evidence, &free, config)
    }
}

fn exact_marginal(
    gm: &GroundModel,
    weights: &[f64],
    query: usize,
    evidence: &Evidence,
    free: &[usize],
) -> f64 {
    let mut free_bit = vec![None; gm.atom_count()];
    for (b, &a) in free.iter().enumerate() {
        free_bit[a] = Some(b as u32);
    }
    let qbit = 1u32 << free_bit[query].unwrap();
    let (constant, reduced) = reduce(gm, weights, evidence, &free_bit);
    let scores: Vec<(bool, f64)> = (0..1u32 << free.len())
        .map(|m| (m & qbit != 0, reduced_score(constant, &reduced, m)))
        .collect();
    let all = log_sum_exp(scores.iter().map(|s| s.1));
    let on = log_sum_exp(scores.iter().filter(|s| s.0).map(|s| s.1));
    (on - all).exp()
}

fn satisfied_with(c: &GroundClause, world: &World, atom: usize, value: bool) -> bool {
    c.literals.iter().any(|&(a, neg)| {
        let v = if a == atom { value } else { world.get(a) };
        v != neg
    })
}

/// Log-odds of `atom` being true given every other atom.
pub(crate) fn flip_log_odds(gm: &GroundModel, weights: &[f64], world: &World, atom: usize) -> f64 {
    gm.clauses_with(atom)
        .iter()
        .map(|&ci| {
            let c = &gm.clauses()[ci];
            let on = satisfied_with(c, world, atom, true) as i32;
            let off = satisfied_with(c, world, atom, false) as i32;
            weights[c.formula] * f64::from(on - off)
        })
        .sum()
}

fn gibbs_marginal(
    gm: &GroundModel,
    weights: &[f64],
    query: usize,
    evidence: &Evidence,
    free: &[usize],
    config: &SamplerConfig,
) -> Result<f64, MlnError> {
    if config.samples == 0 || config.chains == 0 {
        return Err(MlnError::InvalidSetting(
            "Gibbs sampling needs samples >= 1 and chains >= 1".into(),
        ));
    }
    let mut estimate = 0.0;
    for chain in 0..config.chains {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(chain as u64));
        let mut world = World::all_false(gm.atom_count());
        for (&a, &v) in evidence {
            world.set(a, v);
        }
        for &a in free {
            world.set(a, rng.gen_bool(0.5));
        }
        let mut total = 0.0;
        for sweep in 0..config.burn_in + config.samples {
            for &a in free {
                let p = sigmoid(flip_log_odds(gm, weights, &world, a));
                world.set(a, rng.gen::<f64>() < p);
            }
            if sweep >= config.burn_in {
                total += sigmoid(flip_log_odds(gm, weights, &world, query));
            }
        }
        estimate += total / config.samples as f64;
    }
    Ok(estimate / config.chains as f64)
}
