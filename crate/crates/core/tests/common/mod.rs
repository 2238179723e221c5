// Independent oracles and seeded generators shared by the integration tests.
// Nothing here calls into the code paths it is used to check.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use affordance_kb::mln::{Constants, GroundModel, Program, World};
use affordance_kb::SvoTriple;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub fn kitchen_triples() -> Vec<SvoTriple> {
    vec![
        SvoTriple::new("arm", "pull", "door"),
        SvoTriple::new("arm", "pull", "drawer"),
        SvoTriple::new("arm", "pour", "bottle"),
        SvoTriple::new("drawer", "contain", "bottle"),
        SvoTriple::new("bottle", "contain", "water"),
    ]
}

/// A seeded random corpus: at most 50 triples over at most 8 lemmas per
/// role; with `passive_only` some triples have no real subject.
pub fn random_corpus(rng: &mut ChaCha8Rng, passive_only: bool) -> Vec<SvoTriple> {
    let ns = rng.gen_range(1..=8);
    let nv = rng.gen_range(1..=8);
    let no = rng.gen_range(1..=8);
    let n = rng.gen_range(1..=50);
    (0..n)
        .map(|_| {
            let v = format!("v{}", rng.gen_range(0..nv));
            let o = format!("o{}", rng.gen_range(0..no));
            if passive_only && rng.gen_bool(0.2) {
                SvoTriple::passive(&v, &o)
            } else {
                let s = format!("s{}", rng.gen_range(0..ns));
                let mut t = SvoTriple::new(&s, &v, &o);
                t.weight = f64::from(rng.gen_range(1..=3));
                t
            }
        })
        .collect()
}

pub fn random_corpora(seed: u64, count: usize, passive_only: bool) -> Vec<Vec<SvoTriple>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_corpus(&mut rng, passive_only))
        .collect()
}

/// Dense PPMI straight from the definition, over a (row, col) -> count table.
pub fn brute_force_ppmi(
    cells: &BTreeMap<(String, String), f64>,
) -> BTreeMap<(String, String), f64> {
    let total: f64 = cells.values().sum();
    let mut out = BTreeMap::new();
    for ((a, b), &c) in cells {
        let pa: f64 = cells
            .iter()
            .filter(|((x, _), _)| x == a)
            .map(|(_, v)| v)
            .sum::<f64>()
            / total;
        let pb: f64 = cells
            .iter()
            .filter(|((_, y), _)| y == b)
            .map(|(_, v)| v)
            .sum::<f64>()
            / total;
        let pab = c / total;
        out.insert((a.clone(), b.clone()), (pab / (pa * pb)).ln().max(0.0));
    }
    out
}

/// PMI of every pair, unclipped.
pub fn brute_force_pmi(cells: &BTreeMap<(String, String), f64>) -> BTreeMap<(String, String), f64> {
    let total: f64 = cells.values().sum();
    cells
        .iter()
        .map(|((a, b), &c)| {
            let pa: f64 = cells
                .iter()
                .filter(|((x, _), _)| x == a)
                .map(|(_, v)| v)
                .sum();
            let pb: f64 = cells
                .iter()
                .filter(|((_, y), _)| y == b)
                .map(|(_, v)| v)
                .sum();
            (
                (a.clone(), b.clone()),
                ((c / total) / ((pa / total) * (pb / total))).ln(),
            )
        })
        .collect()
}

/// Singular values as square roots of the eigenvalues of MᵀM, descending.
pub fn eigen_singular_values(m: &[Vec<f64>]) -> Vec<f64> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let dm = DMatrix::from_fn(rows, cols, |i, j| m[i][j]);
    let gram = dm.transpose() * &dm;
    let mut values: Vec<f64> = gram
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .collect();
    values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    values
}

pub fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Truth of `Pred(a,b)` in a world, looked up by constant names.
pub type NamedWorld = BTreeMap<(String, String, String), bool>;

pub fn named_world(gm: &GroundModel, world: &World) -> NamedWorld {
    let mut out = NamedWorld::new();
    for schema in &gm.program().schemas {
        for a in &gm.constants()[&schema.domains[0]] {
            for b in &gm.constants()[&schema.domains[1]] {
                let i = gm.atom_index(&schema.name, a, b).unwrap();
                out.insert((schema.name.clone(), a.clone(), b.clone()), world.get(i));
            }
        }
    }
    out
}

/// n_j(x) by enumerating every variable assignment and evaluating the
/// clause literal by literal.
pub fn brute_force_count(
    program: &Program,
    constants: &Constants,
    formula: usize,
    truth: &NamedWorld,
) -> usize {
    let f = &program.formulas[formula];
    let mut vars: Vec<(String, String)> = Vec::new();
    for lit in &f.literals {
        let schema = program
            .schemas
            .iter()
            .find(|s| s.name == lit.predicate)
            .unwrap();
        for (v, d) in lit.args.iter().zip(&schema.domains) {
            if !vars.iter().any(|(n, _)| n == v) {
                vars.push((v.clone(), d.clone()));
            }
        }
    }
    fn walk(
        depth: usize,
        vars: &[(String, String)],
        constants: &Constants,
        binding: &mut BTreeMap<String, String>,
        check: &dyn Fn(&BTreeMap<String, String>) -> bool,
    ) -> usize {
        if depth == vars.len() {
            return usize::from(check(binding));
        }
        let mut n = 0;
        for c in &constants[&vars[depth].1] {
            binding.insert(vars[depth].0.clone(), c.clone());
            n += walk(depth + 1, vars, constants, binding, check);
        }
        n
    }
    let check = |b: &BTreeMap<String, String>| {
        f.literals.iter().any(|l| {
            let key = (
                l.predicate.clone(),
                b[&l.args[0]].clone(),
                b[&l.args[1]].clone(),
            );
            truth[&key] != l.negated
        })
    };
    walk(0, &vars, constants, &mut BTreeMap::new(), &check)
}

pub fn brute_force_score(gm: &GroundModel, weights: &[f64], world: &World) -> f64 {
    let truth = named_world(gm, world);
    (0..weights.len())
        .map(|j| weights[j] * brute_force_count(gm.program(), gm.constants(), j, &truth) as f64)
        .sum()
}

/// log Z over all 2^n worlds.
pub fn brute_force_log_z(gm: &GroundModel, weights: &[f64]) -> f64 {
    let n = gm.atom_count();
    let scores: Vec<f64> = (0..1u64 << n)
        .map(|m| brute_force_score(gm, weights, &World::from_bits(n, m)))
        .collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

/// P(query | evidence) by summing over every consistent world.
pub fn brute_force_marginal(
    gm: &GroundModel,
    weights: &[f64],
    query: usize,
    evidence: &BTreeMap<usize, bool>,
) -> f64 {
    let n = gm.atom_count();
    let (mut on, mut all) = (0.0, 0.0);
    for m in 0..1u64 << n {
        let w = World::from_bits(n, m);
        if evidence.iter().any(|(&a, &v)| w.get(a) != v) {
            continue;
        }
        let p = brute_force_score(gm, weights, &w).exp();
        all += p;
        if w.get(query) {
            on += p;
        }
    }
    on / all
}

/// Σ_a log P(x_a | rest) − l2‖w‖², each conditional from two full scores.
pub fn brute_force_pll(gm: &GroundModel, weights: &[f64], world: &World, l2: f64) -> f64 {
    let base = brute_force_score(gm, weights, world);
    let mut pll = 0.0;
    for a in 0..gm.atom_count() {
        let mut flipped = world.clone();
        flipped.set(a, !world.get(a));
        let other = brute_force_score(gm, weights, &flipped);
        let max = base.max(other);
        pll += base - (max + ((base - max).exp() + (other - max).exp()).ln());
    }
    pll - l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// A random program over two small domains with at most `max_atoms` ground
/// atoms. Variables are named per domain, so formulas are always well typed.
pub fn random_mln(rng: &mut ChaCha8Rng, max_atoms: usize) -> (Program, Constants) {
    use affordance_kb::mln::parse_program;
    loop {
        let na = rng.gen_range(1..=3usize);
        let nb = rng.gen_range(1..=2usize);
        let preds = [
            ("P", "a", "b"),
            ("Q", "b", "a"),
            ("R", "a", "a"),
            ("S", "b", "b"),
        ];
        let used = rng.gen_range(1..=preds.len());
        let size = |d: &str| if d == "a" { na } else { nb };
        let atoms: usize = preds[..used].iter().map(|p| size(p.1) * size(p.2)).sum();
        if atoms > max_atoms {
            continue;
        }
        let mut text = String::new();
        for p in &preds[..used] {
            text.push_str(&format!("@pred {}({},{})\n", p.0, p.1, p.2));
        }
        let var = |rng: &mut ChaCha8Rng, d: &str| {
            let pool: [&str; 2] = if d == "a" { ["x", "y"] } else { ["z", "w"] };
            pool[rng.gen_range(0..2)].to_string()
        };
        for _ in 0..rng.gen_range(1..=3) {
            let w: f64 = rng.gen_range(-2.0..2.0);
            let lits: Vec<String> = (0..rng.gen_range(1..=3))
                .map(|_| {
                    let p = preds[rng.gen_range(0..used)];
                    let neg = if rng.gen_bool(0.5) { "!" } else { "" };
                    format!("{neg}{}({},{})", p.0, var(rng, p.1), var(rng, p.2))
                })
                .collect();
            text.push_str(&format!("{w:?} :: {}\n", lits.join(" v ")));
        }
        let program = parse_program(&text).unwrap();
        let mut constants = Constants::new();
        constants.insert("a".into(), (0..na).map(|i| format!("a{i}")).collect());
        constants.insert("b".into(), (0..nb).map(|i| format!("b{i}")).collect());
        return (program, constants);
    }
}

pub fn random_world(rng: &mut ChaCha8Rng, n: usize) -> World {
    World::from_values((0..n).map(|_| rng.gen_bool(0.5)).collect())
}
