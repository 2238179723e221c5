//! Pseudo-likelihood weight learning.
//!
//! For each ground atom `l`, flipping it changes the satisfied-grounding
//! counts by a vector `d_l`; the atom's conditional log-probability given
//! the rest of the world is `log σ(w·d_l)`. The objective
//! `Σ_l log σ(w·d_l) − l2·‖w‖²` is concave and maximized by gradient ascent
//! with a backtracking step.

use serde::{Deserialize, Serialize};

use super::infer::sigmoid;
use super::{GroundModel, MlnError, World};

const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepConfig {
    pub initial_step: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            initial_step: 0.1,
            max_iterations: 10_000,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnReport {
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub pseudo_log_likelihood: f64,
    pub converged: bool,
}

/// Per-atom count differences `n(x) − n(x with atom flipped)`, sparse.
fn flip_deltas(gm: &GroundModel, world: &World) -> Vec<Vec<(usize, f64)>> {
    (0..gm.atom_count())
        .map(|atom| {
            let mut delta: Vec<(usize, f64)> = Vec::new();
            for &ci in gm.clauses_with(atom) {
                let c = &gm.clauses()[ci];
                let now = c.satisfied(world);
                let flipped = c.literals.iter().any(|&(a, neg)| {
                    let v = if a == atom {
                        !world.get(a)
                    } else {
                        world.get(a)
                    };
                    v != neg
                });
                let d = now as i32 - flipped as i32;
                if d != 0 {
                    match delta.iter_mut().find(|(f, _)| *f == c.formula) {
                        Some((_, x)) => *x += f64::from(d),
                        None => delta.push((c.formula, f64::from(d))),
                    }
                }
            }
            // atoms no clause depends on still contribute log σ(0)
            delta
        })
        .collect()
}

fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

fn dot(delta: &[(usize, f64)], w: &[f64]) -> f64 {
    delta.iter().map(|&(j, d)| w[j] * d).sum()
}

fn objective(deltas: &[Vec<(usize, f64)>], w: &[f64], l2: f64) -> f64 {
    let pll: f64 = deltas.iter().map(|d| log_sigmoid(dot(d, w))).sum();
    pll - l2 * w.iter().map(|x| x * x).sum::<f64>()
}

fn gradient(deltas: &[Vec<(usize, f64)>], w: &[f64], l2: f64) -> Vec<f64> {
    let mut g: Vec<f64> = w.iter().map(|x| -2.0 * l2 * x).collect();
    for d in deltas {
        // n_j(x) − E_flip[n_j] = d_j · (1 − P(atom keeps its value))
        let miss = 1.0 - sigmoid(dot(d, w));
        for &(j, dj) in d {
            g[j] += dj * miss;
        }
    }
    g
}

fn check(gm: &GroundModel, world: &World, weights: &[f64], l2: f64) -> Result<(), MlnError> {
    gm.check_world(world)?;
    gm.check_weights(weights)?;
    if !(l2.is_finite() && l2 >= 0.0) {
        return Err(MlnError::InvalidSetting(format!(
            "l2 must be >= 0, got {l2}"
        )));
    }
    Ok(())
}

/// Regularized pseudo-log-likelihood of `world`.
pub fn pseudo_log_likelihood(
    gm: &GroundModel,
    world: &World,
    weights: &[f64],
    l2: f64,
) -> Result<f64, MlnError> {
    check(gm, world, weights, l2)?;
    Ok(objective(&flip_deltas(gm, world), weights, l2))
}

/// Gradient of [`pseudo_log_likelihood`] with respect to the weights.
pub fn pll_gradient(
    gm: &GroundModel,
    world: &World,
    weights: &[f64],
    l2: f64,
) -> Result<Vec<f64>, MlnError> {
    check(gm, world, weights, l2)?;
    Ok(gradient(&flip_deltas(gm, world), weights, l2))
}

/// Maximizes the regularized pseudo-log-likelihood of `evidence`, starting
/// from the program's current weights.
pub fn learn_weights_pll(
    gm: &GroundModel,
    evidence: &World,
    l2: f64,
    step: &StepConfig,
) -> Result<LearnReport, MlnError> {
    let mut w = gm.program().weights();
    check(gm, evidence, &w, l2)?;
    if !(step.initial_step > 0.0 && step.tolerance > 0.0) {
        return Err(MlnError::InvalidSetting(
            "initial_step and tolerance must be positive".into(),
        ));
    }
    let deltas = flip_deltas(gm, evidence);
    let mut value = objective(&deltas, &w, l2);
    let mut g = gradient(&deltas, &w, l2);
    let mut rate = step.initial_step;
    let mut iterations = 0;

    let norm = |g: &[f64]| g.iter().map(|x| x * x).sum::<f64>().sqrt();
    while norm(&g) >= step.tolerance && iterations < step.max_iterations {
        iterations += 1;
        let gg: f64 = g.iter().map(|x| x * x).sum();
        // Armijo backtracking
        loop {
            let trial: Vec<f64> = w.iter().zip(&g).map(|(x, d)| x + rate * d).collect();
            let trial_value = objective(&deltas, &trial, l2);
            if trial_value >= value + 1e-4 * rate * gg {
                w = trial;
                value = trial_value;
                rate *= 2.0;
                break;
            }
            rate /= 2.0;
            if rate < 1e-300 {
                // no ascent direction left at machine precision
                return Ok(LearnReport {
                    gradient_norm: norm(&g),
                    weights: w,
                    iterations,
                    pseudo_log_likelihood: value,
                    converged: false,
                });
            }
        }
        if let Some(big) = w.iter().map(|x| x.abs()).find(|x| *x > DIVERGENCE_LIMIT) {
            return Err(MlnError::Diverged(big));
        }
        g = gradient(&deltas, &w, l2);
    }
    let gradient_norm = norm(&g);
    Ok(LearnReport {
        converged: gradient_norm < step.tolerance,
        gradient_norm,
        weights: w,
        iterations,
        pseudo_log_likelihood: value,
    })
}
