use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{Constants, MlnError, Program};

/// Refuse groundings larger than this many clauses.
const GROUNDING_LIMIT: u128 = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundAtom {
    pub predicate: usize,
    /// Indices into the constants of the predicate's two domains.
    pub args: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundClause {
    pub formula: usize,
    /// `(atom, negated)` pairs.
    pub literals: Vec<(usize, bool)>,
}

impl GroundClause {
    pub fn satisfied(&self, world: &World) -> bool {
        self.literals.iter().any(|&(a, neg)| world.get(a) != neg)
    }
}

/// A total truth assignment over ground atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct World(Vec<bool>);

impl World {
    pub fn all_false(n: usize) -> Self {
        World(vec![false; n])
    }

    pub fn from_values(values: Vec<bool>) -> Self {
        World(values)
    }

    /// Atom `i` is true iff bit `i` of `mask` is set.
    pub fn from_bits(n: usize, mask: u64) -> Self {
        World((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn get(&self, atom: usize) -> bool {
        self.0[atom]
    }

    pub fn set(&mut self, atom: usize, value: bool) {
        self.0[atom] = value;
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[bool] {
        &self.0
    }
}

/// All ground atoms and ground clauses of a program over given constants.
#[derive(Debug, Clone)]
pub struct GroundModel {
    program: Program,
    constants: Constants,
    atoms: Vec<GroundAtom>,
    /// first atom of each predicate; atoms are laid out predicate-major
    offsets: Vec<usize>,
    clauses: Vec<GroundClause>,
    formula_clauses: Vec<Range<usize>>,
    atom_clauses: Vec<Vec<usize>>,
}

impl GroundModel {
    pub fn ground(program: &Program, constants: &Constants) -> Result<Self, MlnError> {
        let domain = |name: &str| {
            constants
                .get(name)
                .ok_or_else(|| MlnError::UnknownDomain(name.to_string()))
        };

        let mut atoms = Vec::new();
        let mut offsets = Vec::new();
        for (p, schema) in program.schemas.iter().enumerate() {
            offsets.push(atoms.len());
            let (d0, d1) = (domain(&schema.domains[0])?, domain(&schema.domains[1])?);
            for a in 0..d0.len() {
                for b in 0..d1.len() {
                    atoms.push(GroundAtom {
                        predicate: p,
                        args: [a, b],
                    });
                }
            }
        }

        let mut plan = Vec::new();
        let mut total: u128 = 0;
        for f in &program.formulas {
            let vars = program.variables(f)?;
            let sizes = vars
                .iter()
                .map(|(_, d)| domain(d).map(|c| c.len()))
                .collect::<Result<Vec<_>, _>>()?;
            total += sizes.iter().map(|&s| s as u128).product::<u128>();
            if total > GROUNDING_LIMIT {
                return Err(MlnError::GroundingTooLarge(total, GROUNDING_LIMIT));
            }
            plan.push((vars, sizes));
        }

        let mut clauses = Vec::new();
        let mut formula_clauses = Vec::new();
        for (fi, (f, (vars, sizes))) in program.formulas.iter().zip(&plan).enumerate() {
            let start = clauses.len();
            // literal -> (atom offset, second domain size, var positions, negated)
            let lits: Vec<(usize, usize, [usize; 2], bool)> = f
                .literals
                .iter()
                .map(|l| {
                    let (p, schema) = program.schema(&l.predicate).unwrap();
                    let pos = |v: &String| vars.iter().position(|(n, _)| n == v).unwrap();
                    let width = constants[&schema.domains[1]].len();
                    (
                        offsets[p],
                        width,
                        [pos(&l.args[0]), pos(&l.args[1])],
                        l.negated,
                    )
                })
                .collect();
            if sizes.iter().all(|&s| s > 0) {
                let mut assignment = vec![0usize; vars.len()];
                'odometer: loop {
                    let literals = lits
                        .iter()
                        .map(|&(off, width, [x, y], neg)| {
                            (off + assignment[x] * width + assignment[y], neg)
                        })
                        .collect();
                    clauses.push(GroundClause {
                        formula: fi,
                        literals,
                    });
                    // last variable turns fastest
                    let mut k = vars.len();
                    loop {
                        if k == 0 {
                            break 'odometer;
                        }
                        k -= 1;
                        assignment[k] += 1;
                        if assignment[k] < sizes[k] {
                            continue 'odometer;
                        }
                        assignment[k] = 0;
                    }
                }
            }
            formula_clauses.push(start..clauses.len());
        }

        let mut atom_clauses = vec![Vec::new(); atoms.len()];
        for (ci, c) in clauses.iter().enumerate() {
            for &(a, _) in &c.literals {
                if atom_clauses[a].last() != Some(&ci) {
                    atom_clauses[a].push(ci);
                }
            }
        }

        Ok(GroundModel {
            program: program.clone(),
            constants: constants.clone(),
            atoms,
            offsets,
            clauses,
            formula_clauses,
            atom_clauses,
        })
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[GroundAtom] {
        &self.atoms
    }

    pub fn clauses(&self) -> &[GroundClause] {
        &self.clauses
    }

    pub fn formula_count(&self) -> usize {
        self.formula_clauses.len()
    }

    /// Ground clauses of formula `j`.
    pub fn clauses_of(&self, formula: usize) -> &[GroundClause] {
        &self.clauses[self.formula_clauses[formula].clone()]
    }

    pub fn grounding_count(&self, formula: usize) -> usize {
        self.formula_clauses[formula].len()
    }

    /// Indices of the clauses mentioning an atom.
    pub fn clauses_with(&self, atom: usize) -> &[usize] {
        &self.atom_clauses[atom]
    }

    pub fn atom_index(&self, predicate: &str, a: &str, b: &str) -> Option<usize> {
        let (p, schema) = self.program.schema(predicate)?;
        let d0 = &self.constants[&schema.domains[0]];
        let d1 = &self.constants[&schema.domains[1]];
        let i = d0.iter().position(|c| c == a)?;
        let j = d1.iter().position(|c| c == b)?;
        Some(self.offsets[p] + i * d1.len() + j)
    }

    /// Parses `Pred(a,b)` into an atom index.
    pub fn parse_atom(&self, text: &str) -> Result<usize, MlnError> {
        let unknown = || MlnError::UnknownAtom(text.trim().to_string());
        let text = text.trim();
        let (name, rest) = text.split_once('(').ok_or_else(unknown)?;
        let args = rest.strip_suffix(')').ok_or_else(unknown)?;
        let (a, b) = args.split_once(',').ok_or_else(unknown)?;
        self.atom_index(name.trim(), a.trim(), b.trim())
            .ok_or_else(unknown)
    }

    pub fn atom_name(&self, atom: usize) -> String {
        let g = self.atoms[atom];
        let schema = &self.program.schemas[g.predicate];
        format!(
            "{}({},{})",
            schema.name,
            self.constants[&schema.domains[0]][g.args[0]],
            self.constants[&schema.domains[1]][g.args[1]]
        )
    }

    pub(crate) fn check_world(&self, world: &World) -> Result<(), MlnError> {
        if world.len() != self.atom_count() {
            return Err(MlnError::WorldSize {
                expected: self.atom_count(),
                got: world.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_weights(&self, weights: &[f64]) -> Result<(), MlnError> {
        if weights.len() != self.formula_count() {
            return Err(MlnError::WeightCount {
                expected: self.formula_count(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(MlnError::InvalidSetting("weights must be finite".into()));
        }
        Ok(())
    }
}

/// n_j(x): satisfied groundings of formula `j` in `world`.
pub fn count_true_groundings(gm: &GroundModel, formula: usize, world: &World) -> usize {
    gm.clauses_of(formula)
        .iter()
        .filter(|c| c.satisfied(world))
        .count()
}

/// n_j(x) for every formula.
pub fn true_grounding_counts(gm: &GroundModel, world: &World) -> Vec<usize> {
    (0..gm.formula_count())
        .map(|j| count_true_groundings(gm, j, world))
        .collect()
}
