//! Seeded truncated SVD of a sparse matrix by block subspace iteration.
//!
//! The column-space block `Q` (oversampled beyond the requested rank) is
//! refined by `Q ← orth(MᵀM Q)`. Each step the projected matrix `B = M Q` is
//! decomposed exactly with one-sided Jacobi rotations; iteration stops once
//! the leading singular values stop moving or the iteration budget runs out.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Extra block columns beyond the requested rank.
const OVERSAMPLE: usize = 8;
const MAX_JACOBI_SWEEPS: usize = 80;

/// Sparse row-major matrix: each row holds `(column, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    pub cols: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(c, v)| v * x[c]).sum())
            .collect()
    }

    fn tmul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in self.rows.iter().zip(y) {
            if yr != 0.0 {
                for &(c, v) in r {
                    out[c] += v * yr;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0.0; self.cols];
                for &(c, v) in r {
                    d[c] = v;
                }
                d
            })
            .collect()
    }
}

/// Rank-k factors: `u` is rows×k, `vt` is k×cols, both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub rank: usize,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub vt: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SvdParams {
    pub rank: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Modified Gram-Schmidt, applied twice. Columns that collapse are replaced
/// by fresh random directions so the result always has full column rank.
fn orthonormalize(cols: &mut [Vec<f64>], rng: &mut ChaCha8Rng) {
    for j in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let before = norm(&cols[j]);
            for _ in 0..2 {
                for i in 0..j {
                    let (done, rest) = cols.split_at_mut(j);
                    let proj = dot(&done[i], &rest[0]);
                    for (x, q) in rest[0].iter_mut().zip(&done[i]) {
                        *x -= proj * q;
                    }
                }
            }
            let after = norm(&cols[j]);
            if after > 1e-10 * before.max(1e-300) && after > 1e-280 {
                for x in cols[j].iter_mut() {
                    *x /= after;
                }
                break;
            }
            attempts += 1;
            assert!(attempts < 100, "cannot complete orthonormal basis");
            let n = cols[j].len();
            cols[j] = random_vec(rng, n);
        }
    }
}

/// One-sided Jacobi SVD of the column set `b` (each inner vec is a column).
/// Returns singular values (descending), left vectors (columns, zero where
/// the singular value is zero) and right rotations (columns).
fn jacobi_svd(mut b: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let p = b.len();
    let mut w: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            let mut e = vec![0.0; p];
            e[i] = 1.0;
            e
        })
        .collect();

    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in i + 1..p {
                let alpha = dot(&b[i], &b[i]);
                let beta = dot(&b[j], &b[j]);
                let gamma = dot(&b[i], &b[j]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut b, i, j, c, s);
                rotate(&mut w, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..p).collect();
    let sig: Vec<f64> = b.iter().map(|c| norm(c)).collect();
    order.sort_by(|&x, &y| sig[y].total_cmp(&sig[x]).then(x.cmp(&y)));
    let sigma: Vec<f64> = order.iter().map(|&i| sig[i]).collect();
    let left = order
        .iter()
        .map(|&i| {
            if sig[i] > 0.0 {
                b[i].iter().map(|x| x / sig[i]).collect()
            } else {
                vec![0.0; b[i].len()]
            }
        })
        .collect();
    let right = order.iter().map(|&i| w[i].clone()).collect();
    (sigma, left, right)
}

fn rotate(cols: &mut [Vec<f64>], i: usize, j: usize, c: f64, s: f64) {
    let (a, b) = cols.split_at_mut(j);
    for (x, y) in a[i].iter_mut().zip(b[0].iter_mut()) {
        let (xi, yj) = (*x, *y);
        *x = c * xi - s * yj;
        *y = s * xi + c * yj;
    }
}

/// Computes the leading `params.rank` singular triplets of `m`.
///
/// Panics if the rank is zero or exceeds `min(rows, cols)`; callers validate.
pub fn truncated_svd(m: &SparseRows, params: SvdParams) -> Factorization {
    let (nrows, ncols) = (m.nrows(), m.cols);
    let k = params.rank;
    assert!(k >= 1 && k <= nrows.min(ncols), "rank out of range");
    let block = ncols.min(k + OVERSAMPLE);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut q: Vec<Vec<f64>> = (0..block).map(|_| random_vec(&mut rng, ncols)).collect();
    orthonormalize(&mut q, &mut rng);

    let project = |q: &[Vec<f64>]| -> Vec<Vec<f64>> { q.iter().map(|c| m.mul_vec(c)).collect() };

    let mut prev: Option<Vec<f64>> = None;
    // a full-width block already spans the column space
    if block < ncols {
        for _ in 0..params.max_iterations.max(1) {
            let y = project(&q);
            q = y.iter().map(|c| m.tmul_vec(c)).collect();
            orthonormalize(&mut q, &mut rng);
            let (sigma, _, _) = jacobi_svd(project(&q));
            let lead = sigma[..k].to_vec();
            if let Some(p) = &prev {
                let change = lead
                    .iter()
                    .zip(p)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
                    .fold(0.0, f64::max);
                if change < params.tolerance {
                    break;
                }
            }
            prev = Some(lead);
        }
    }

    let (sigma, mut left, right) = jacobi_svd(project(&q));
    left.truncate(k);
    complete_left(&mut left, &sigma[..k], &mut rng);

    let mut u = vec![0.0; nrows * k];
    for (j, col) in left.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            u[i * k + j] = *x;
        }
    }
    let mut vt = vec![0.0; k * ncols];
    for (j, rot) in right.iter().take(k).enumerate() {
        for (b, qc) in q.iter().enumerate() {
            let r = rot[b];
            if r != 0.0 {
                for (c, x) in qc.iter().enumerate() {
                    vt[j * ncols + c] += r * x;
                }
            }
        }
    }
    Factorization {
        rank: k,
        u,
        sigma: sigma[..k].to_vec(),
        vt,
    }
}

/// Fills left vectors belonging to zero singular values with directions
/// orthogonal to the others.
fn complete_left(left: &mut [Vec<f64>], sigma: &[f64], rng: &mut ChaCha8Rng) {
    let scale = sigma.first().copied().unwrap_or(0.0);
    let degenerate: Vec<usize> = (0..left.len())
        .filter(|&i| sigma[i] <= scale * 1e-13 || sigma[i] == 0.0)
        .collect();
    if degenerate.is_empty() {
        return;
    }
    let n = left[0].len();
    for &i in &degenerate {
        left[i] = random_vec(rng, n);
    }
    // keep the good vectors first so they are not disturbed
    let mut order: Vec<usize> = (0..left.len())
        .filter(|i| !degenerate.contains(i))
        .collect();
    order.extend(&degenerate);
    let mut cols: Vec<Vec<f64>> = order.iter().map(|&i| left[i].clone()).collect();
    orthonormalize(&mut cols, rng);
    for (pos, &i) in order.iter().enumerate() {
        left[i] = std::mem::take(&mut cols[pos]);
    }
}

impl Factorization {
    /// Frobenius norm of `m − U·diag(σ)·Vt`.
    pub fn reconstruction_error(&self, m: &SparseRows) -> f64 {
        let k = self.rank;
        let mut err = 0.0;
        for (i, row) in m.to_dense().iter().enumerate() {
            for (c, &x) in row.iter().enumerate() {
                let approx: f64 = (0..k)
                    .map(|j| self.u[i * k + j] * self.sigma[j] * self.vt[j * m.cols + c])
                    .sum();
                err += (x - approx).powi(2);
            }
        }
        err.sqrt()
    }
}
