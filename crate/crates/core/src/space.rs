//! Dual noun-by-verb vector spaces.
//!
//! The active space has one row per subject, the passive space one row per
//! object; columns are verbs in both. Cells hold raw counts or PPMI weights,
//! and a space can be densified with a truncated SVD. Queries (similarity,
//! neighbors, composition) read factor rows `U·diag(σ)` when factors exist
//! and the sparse rows otherwise.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModalityModel, Role, Vocab};
use crate::svd::{self, Factorization, SparseRows, SvdParams};

pub const SPACE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("empty space: the {0} table has no entries")]
    Empty(SpaceRole),
    #[error("unknown noun {0:?}")]
    UnknownNoun(String),
    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("iterations must be >= 1")]
    NoIterations,
    #[error("composition needs at least one noun")]
    EmptyComposition,
    #[error("invalid space document: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceRole {
    Active,
    Passive,
}

impl std::fmt::Display for SpaceRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpaceRole::Active => "active",
            SpaceRole::Passive => "passive",
        })
    }
}

impl std::str::FromStr for SpaceRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "active" => Ok(SpaceRole::Active),
            "passive" => Ok(SpaceRole::Passive),
            other => Err(format!("expected active or passive, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Raw,
    #[default]
    Ppmi,
}

impl std::str::FromStr for Weighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(Weighting::Raw),
            "ppmi" => Ok(Weighting::Ppmi),
            other => Err(format!("expected raw or ppmi, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDoc", into = "SpaceDoc")]
pub struct ModalitySpace {
    role: SpaceRole,
    row_vocab: Vocab,
    col_vocab: Vocab,
    matrix: SparseRows,
    weighting: Weighting,
    factors: Option<Factorization>,
}

/// Additive composition of several rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    /// L2-normalized sum of the member rows (zero if the sum is zero).
    pub vector: Vec<f64>,
    pub nearest: Vec<(String, f64)>,
}

impl ModalitySpace {
    pub fn build(
        model: &ModalityModel,
        role: SpaceRole,
        weighting: Weighting,
    ) -> Result<Self, SpaceError> {
        // (noun, verb, count)
        let cells: Vec<(&str, &str, f64)> = match role {
            SpaceRole::Active => model.active_entries().collect(),
            SpaceRole::Passive => model.passive_entries().map(|(v, o, c)| (o, v, c)).collect(),
        };
        if cells.is_empty() {
            return Err(SpaceError::Empty(role));
        }
        let row_role = match role {
            SpaceRole::Active => Role::Subject,
            SpaceRole::Passive => Role::Object,
        };
        let row_vocab = Vocab::new(row_role, cells.iter().map(|c| c.0));
        let col_vocab = Vocab::new(Role::Verb, cells.iter().map(|c| c.1));

        let mut table: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(n, v, c) in &cells {
            let key = (row_vocab.get(n).unwrap(), col_vocab.get(v).unwrap());
            *table.entry(key).or_insert(0.0) += c;
        }
        if weighting == Weighting::Ppmi {
            table = ppmi(&table, row_vocab.len(), col_vocab.len());
        }
        let mut rows = vec![Vec::new(); row_vocab.len()];
        for ((r, c), w) in table {
            rows[r].push((c, w));
        }
        Ok(ModalitySpace {
            role,
            matrix: SparseRows {
                cols: col_vocab.len(),
                rows,
            },
            row_vocab,
            col_vocab,
            weighting,
            factors: None,
        })
    }

    pub fn role(&self) -> SpaceRole {
        self.role
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn row_vocab(&self) -> &Vocab {
        &self.row_vocab
    }

    pub fn col_vocab(&self) -> &Vocab {
        &self.col_vocab
    }

    pub fn factors(&self) -> Option<&Factorization> {
        self.factors.as_ref()
    }

    pub fn matrix(&self) -> &SparseRows {
        &self.matrix
    }

    /// Stored weight of a cell, 0 when absent or unknown.
    pub fn weight(&self, noun: &str, verb: &str) -> f64 {
        match (self.row_vocab.get(noun), self.col_vocab.get(verb)) {
            (Some(r), Some(c)) => self.matrix.rows[r]
                .iter()
                .find(|(cc, _)| *cc == c)
                .map_or(0.0, |&(_, w)| w),
            _ => 0.0,
        }
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        self.matrix.to_dense()
    }

    /// Computes rank-`rank` factors by seeded subspace iteration.
    pub fn truncated_svd(
        &self,
        rank: usize,
        iterations: usize,
        seed: u64,
    ) -> Result<ModalitySpace, SpaceError> {
        let max = self.row_vocab.len().min(self.col_vocab.len());
        if rank < 1 || rank > max {
            return Err(SpaceError::RankOutOfRange { rank, max });
        }
        if iterations < 1 {
            return Err(SpaceError::NoIterations);
        }
        let factors = svd::truncated_svd(
            &self.matrix,
            SvdParams {
                rank,
                max_iterations: iterations,
                tolerance: 1e-10,
                seed,
            },
        );
        Ok(ModalitySpace {
            factors: Some(factors),
            ..self.clone()
        })
    }

    pub fn without_factors(&self) -> ModalitySpace {
        ModalitySpace {
            factors: None,
            ..self.clone()
        }
    }

    /// Frobenius error of the factor reconstruction; 0 without factors.
    pub fn reconstruction_error(&self) -> f64 {
        self.factors
            .as_ref()
            .map_or(0.0, |f| f.reconstruction_error(&self.matrix))
    }

    /// Names of the query coordinates: verbs, or `dim0..` with factors.
    pub fn axes(&self) -> Vec<String> {
        match &self.factors {
            Some(f) => (0..f.rank).map(|i| format!("dim{i}")).collect(),
            None => self.col_vocab.entries().to_vec(),
        }
    }

    fn index(&self, noun: &str) -> Result<usize, SpaceError> {
        self.row_vocab
            .get(noun)
            .ok_or_else(|| SpaceError::UnknownNoun(noun.to_string()))
    }

    fn row_vector(&self, r: usize) -> Vec<f64> {
        match &self.factors {
            Some(f) => (0..f.rank)
                .map(|j| f.u[r * f.rank + j] * f.sigma[j])
                .collect(),
            None => {
                let mut d = vec![0.0; self.matrix.cols];
                for &(c, w) in &self.matrix.rows[r] {
                    d[c] = w;
                }
                d
            }
        }
    }

    /// The query vector of a noun.
    pub fn vector(&self, noun: &str) -> Result<Vec<f64>, SpaceError> {
        Ok(self.row_vector(self.index(noun)?))
    }

    pub fn similarity(&self, a: &str, b: &str) -> Result<f64, SpaceError> {
        let (a, b) = (self.index(a)?, self.index(b)?);
        Ok(cosine(&self.row_vector(a), &self.row_vector(b)))
    }

    /// The `k` most similar other rows, by descending similarity and then
    /// lexicographic noun.
    pub fn neighbors(&self, noun: &str, k: usize) -> Result<Vec<(String, f64)>, SpaceError> {
        let q = self.index(noun)?;
        let v = self.row_vector(q);
        Ok(self.rank_rows(&v, Some(q), k))
    }

    /// Sums the rows of `nouns`, normalizes, and retrieves the `k` nearest rows.
    pub fn compose(&self, nouns: &[&str], k: usize) -> Result<Composition, SpaceError> {
        if nouns.is_empty() {
            return Err(SpaceError::EmptyComposition);
        }
        let mut sum: Option<Vec<f64>> = None;
        for n in nouns {
            let v = self.row_vector(self.index(n)?);
            sum = Some(match sum {
                None => v,
                Some(s) => s.iter().zip(&v).map(|(a, b)| a + b).collect(),
            });
        }
        let mut vector = sum.unwrap();
        let n = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            vector.iter_mut().for_each(|x| *x /= n);
        }
        let nearest = self.rank_rows(&vector, None, k);
        Ok(Composition { vector, nearest })
    }

    fn rank_rows(&self, v: &[f64], skip: Option<usize>, k: usize) -> Vec<(String, f64)> {
        let mut scored: Vec<(String, f64)> = (0..self.row_vocab.len())
            .filter(|&r| Some(r) != skip)
            .map(|r| {
                (
                    self.row_vocab.entries()[r].clone(),
                    cosine(v, &self.row_vector(r)),
                )
            })
            .collect();
        scored.sort_by(|a, b| match b.1.partial_cmp(&a.1) {
            Some(Ordering::Equal) | None => a.0.cmp(&b.0),
            Some(o) => o,
        });
        scored.truncate(k);
        scored
    }

    /// One line per query: the query noun, then tab-separated `noun score`.
    pub fn neighbors_report(&self, queries: &[&str], k: usize) -> Result<String, SpaceError> {
        let mut out = String::new();
        for q in queries {
            out.push_str(q);
            for (n, s) in self.neighbors(q, k)? {
                write!(out, "\t{n} {s:.4}").unwrap();
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Cosine similarity; a zero vector has similarity 0 with everything.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return 0.0;
    }
    (ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0)
}

/// max(0, ln[P(a,b) / (P(a)P(b))]); zero cells are dropped.
fn ppmi(
    table: &BTreeMap<(usize, usize), f64>,
    nrows: usize,
    ncols: usize,
) -> BTreeMap<(usize, usize), f64> {
    let total: f64 = table.values().sum();
    let mut row = vec![0.0; nrows];
    let mut col = vec![0.0; ncols];
    for (&(r, c), &w) in table {
        row[r] += w;
        col[c] += w;
    }
    table
        .iter()
        .filter_map(|(&(r, c), &w)| {
            let pmi = ((w / total) / ((row[r] / total) * (col[c] / total))).ln();
            (pmi > 0.0).then_some(((r, c), pmi))
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct FactorDoc {
    rank: usize,
    u: Vec<f64>,
    sigma: Vec<f64>,
    vt: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    version: u32,
    role: SpaceRole,
    weighting: Weighting,
    rows: Vocab,
    cols: Vocab,
    cells: Vec<(usize, usize, f64)>,
    factors: Option<FactorDoc>,
}

impl From<ModalitySpace> for SpaceDoc {
    fn from(s: ModalitySpace) -> Self {
        let cells = s
            .matrix
            .rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, w)| (r, c, w)))
            .collect();
        SpaceDoc {
            version: SPACE_FORMAT_VERSION,
            role: s.role,
            weighting: s.weighting,
            rows: s.row_vocab,
            cols: s.col_vocab,
            cells,
            factors: s.factors.map(|f| FactorDoc {
                rank: f.rank,
                u: f.u,
                sigma: f.sigma,
                vt: f.vt,
            }),
        }
    }
}

impl TryFrom<SpaceDoc> for ModalitySpace {
    type Error = SpaceError;

    fn try_from(doc: SpaceDoc) -> Result<Self, Self::Error> {
        let bad = |m: &str| SpaceError::Invalid(m.to_string());
        if doc.version != SPACE_FORMAT_VERSION {
            return Err(SpaceError::Invalid(format!(
                "unsupported version {}",
                doc.version
            )));
        }
        let (nr, nc) = (doc.rows.len(), doc.cols.len());
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nr];
        for (r, c, w) in doc.cells {
            if r >= nr || c >= nc {
                return Err(bad("cell outside the matrix"));
            }
            if !w.is_finite() || (doc.weighting == Weighting::Ppmi && w < 0.0) {
                return Err(bad("invalid cell weight"));
            }
            if rows[r].last().is_some_and(|&(prev, _)| prev >= c) {
                return Err(bad("cells out of order"));
            }
            rows[r].push((c, w));
        }
        let factors = match doc.factors {
            None => None,
            Some(f) => {
                let k = f.rank;
                if k < 1 || k > nr.min(nc) {
                    return Err(bad("factor rank out of range"));
                }
                if f.u.len() != nr * k || f.sigma.len() != k || f.vt.len() != k * nc {
                    return Err(bad("factor dimensions do not match"));
                }
                if f.sigma.iter().any(|s| *s < 0.0) || f.sigma.windows(2).any(|w| w[0] < w[1]) {
                    return Err(bad("singular values must be nonnegative and descending"));
                }
                Some(Factorization {
                    rank: k,
                    u: f.u,
                    sigma: f.sigma,
                    vt: f.vt,
                })
            }
        };
        Ok(ModalitySpace {
            role: doc.role,
            row_vocab: doc.rows,
            col_vocab: doc.cols,
            matrix: SparseRows { cols: nc, rows },
            weighting: doc.weighting,
            factors,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::SvoTriple;
    use crate::model::FilterConfig;

    fn kitchen() -> ModalityModel {
        let ts: Vec<SvoTriple> = [
            ("arm", "pull", "door"),
            ("arm", "pull", "drawer"),
            ("arm", "pour", "bottle"),
            ("drawer", "contain", "bottle"),
            ("bottle", "contain", "water"),
        ]
        .iter()
        .map(|(s, v, o)| SvoTriple::new(s, v, o))
        .collect();
        ModalityModel::build(&ts, 0.0, FilterConfig::default()).unwrap()
    }

    #[test]
    fn kitchen_active_dimensions() {
        let s = ModalitySpace::build(&kitchen(), SpaceRole::Active, Weighting::Raw).unwrap();
        assert_eq!(s.row_vocab().entries(), ["arm", "bottle", "drawer"]);
        assert_eq!(s.col_vocab().entries(), ["contain", "pour", "pull"]);
        assert_eq!(s.weight("arm", "pull"), 2.0);
    }

    #[test]
    fn single_cell() {
        let m = ModalityModel::build(
            &[SvoTriple::new("robot", "build", "desk")],
            0.0,
            FilterConfig::default(),
        )
        .unwrap();
        let s = ModalitySpace::build(&m, SpaceRole::Active, Weighting::Raw).unwrap();
        assert_eq!(s.dense(), vec![vec![1.0]]);
        assert!(s.neighbors("robot", 3).unwrap().is_empty());
    }

    #[test]
    fn empty_table_is_error() {
        let m = ModalityModel::empty(0.0).unwrap();
        assert_eq!(
            ModalitySpace::build(&m, SpaceRole::Passive, Weighting::Raw).unwrap_err(),
            SpaceError::Empty(SpaceRole::Passive)
        );
    }

    #[test]
    fn passive_similarities() {
        let s = ModalitySpace::build(&kitchen(), SpaceRole::Passive, Weighting::Raw).unwrap();
        assert!((s.similarity("door", "drawer").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.similarity("door", "bottle").unwrap(), 0.0);
        assert!((s.similarity("bottle", "bottle").unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(
            s.similarity("door", "cloud").unwrap_err(),
            SpaceError::UnknownNoun("cloud".into())
        );
    }

    #[test]
    fn neighbors_ranked_with_ties() {
        let s = ModalitySpace::build(&kitchen(), SpaceRole::Passive, Weighting::Raw).unwrap();
        let n = s.neighbors("door", 1).unwrap();
        assert_eq!(n, vec![("drawer".to_string(), 1.0)]);
        let all = s.neighbors("door", 10).unwrap();
        let names: Vec<&str> = all.iter().map(|(n, _)| n.as_str()).collect();
        // bottle and water tie at 0, lexicographic order decides
        assert_eq!(names, ["drawer", "bottle", "water"]);
    }

    #[test]
    fn composition() {
        let s = ModalitySpace::build(&kitchen(), SpaceRole::Passive, Weighting::Raw).unwrap();
        let c = s.compose(&["door"], 1).unwrap();
        assert_eq!(c.nearest[0].0, "door");
        assert_eq!(c.vector, s.vector("door").unwrap());

        let c = s.compose(&["door", "drawer"], 2).unwrap();
        let pull = s.col_vocab().get("pull").unwrap();
        for (i, x) in c.vector.iter().enumerate() {
            assert_eq!(*x, if i == pull { 1.0 } else { 0.0 });
        }

        let c = s.compose(&["bottle", "drawer"], 4).unwrap();
        for verb in ["contain", "pour", "pull"] {
            assert!(c.vector[s.col_vocab().get(verb).unwrap()] > 0.0);
        }
        assert!(s.compose(&[], 1).is_err());
    }

    #[test]
    fn rank_range_checked() {
        let s = ModalitySpace::build(&kitchen(), SpaceRole::Active, Weighting::Ppmi).unwrap();
        assert!(matches!(
            s.truncated_svd(4, 10, 1),
            Err(SpaceError::RankOutOfRange { rank: 4, max: 3 })
        ));
        assert!(s.truncated_svd(0, 10, 1).is_err());
        assert!(s.truncated_svd(2, 0, 1).is_err());
    }

    #[test]
    fn factor_queries() {
        let s = ModalitySpace::build(&kitchen(), SpaceRole::Passive, Weighting::Raw).unwrap();
        let f = s.truncated_svd(3, 100, 3).unwrap();
        assert!(f.reconstruction_error() < 1e-9);
        // full rank keeps the row geometry
        assert!((f.similarity("door", "drawer").unwrap() - 1.0).abs() < 1e-9);
        assert!(f.similarity("door", "bottle").unwrap().abs() < 1e-9);
        assert_eq!(f.axes(), ["dim0", "dim1", "dim2"]);
    }

    #[test]
    fn report_format() {
        let s = ModalitySpace::build(&kitchen(), SpaceRole::Passive, Weighting::Raw).unwrap();
        assert_eq!(
            s.neighbors_report(&["door"], 2).unwrap(),
            "door\tdrawer 1.0000\tbottle 0.0000\n"
        );
    }

    #[test]
    fn json_round_trip_with_factors() {
        let s = ModalitySpace::build(&kitchen(), SpaceRole::Active, Weighting::Ppmi)
            .unwrap()
            .truncated_svd(2, 50, 9)
            .unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: ModalitySpace = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
