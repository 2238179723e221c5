//! Text formats for formulas and evidence.
//!
//! Formula file: one clause per line, `weight :: literal [v literal]*`, with
//! literals written `[!]Pred(var,var)`. Optional `@pred Name(domain,domain)`
//! lines declare predicates; a file without declarations uses the default
//! SubjOf/ObjOf/CanDo/Affords schema. `#` starts a comment line.
//!
//! Evidence file: one ground literal per line, e.g. `SubjOf(arm,pull)` or
//! `!CanDo(door,fly)`.

use super::{
    default_program, Evidence, Formula, GroundModel, Literal, MlnError, PredicateSchema, Program,
};

fn parse_err(line: usize, message: impl Into<String>) -> MlnError {
    MlnError::Parse {
        line,
        message: message.into(),
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_')
}

/// Splits `[!]Name(a,b)` at the start of `input`, returning the rest.
fn take_literal(input: &str) -> Option<(bool, &str, &str, &str, &str)> {
    let input = input.trim_start();
    let (negated, input) = match input.strip_prefix('!') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, input),
    };
    let open = input.find('(')?;
    let close = open + input[open..].find(')')?;
    let name = input[..open].trim();
    let (a, b) = input[open + 1..close].split_once(',')?;
    let (a, b) = (a.trim(), b.trim());
    if name.is_empty() || a.is_empty() || b.is_empty() || b.contains(',') {
        return None;
    }
    Some((negated, name, a, b, &input[close + 1..]))
}

pub fn parse_program(text: &str) -> Result<Program, MlnError> {
    let mut schemas = Vec::new();
    let mut formulas = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(decl) = line.strip_prefix("@pred") {
            let (neg, name, a, b, rest) = take_literal(decl)
                .ok_or_else(|| parse_err(lineno, "malformed @pred declaration"))?;
            if neg || !rest.trim().is_empty() || !is_ident(name) {
                return Err(parse_err(lineno, "malformed @pred declaration"));
            }
            schemas.push(PredicateSchema::new(name, a, b));
            continue;
        }
        let (weight, clause) = line
            .split_once("::")
            .ok_or_else(|| parse_err(lineno, "expected `weight :: clause`"))?;
        let weight: f64 = weight
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad weight {:?}", weight.trim())))?;

        let mut literals = Vec::new();
        let mut rest = clause;
        loop {
            let (negated, name, a, b, tail) =
                take_literal(rest).ok_or_else(|| parse_err(lineno, "malformed literal"))?;
            if !is_ident(name) || !is_ident(a) || !is_ident(b) {
                return Err(parse_err(lineno, "malformed literal"));
            }
            literals.push(Literal {
                negated,
                predicate: name.to_string(),
                args: [a.to_string(), b.to_string()],
            });
            let tail = tail.trim_start();
            if tail.is_empty() {
                break;
            }
            rest = tail
                .strip_prefix('v')
                .filter(|t| t.starts_with(char::is_whitespace) || t.starts_with('!'))
                .ok_or_else(|| parse_err(lineno, "expected ` v ` between literals"))?;
        }
        formulas.push(Formula {
            id: format!("F{}", formulas.len() + 1),
            weight,
            literals,
        });
    }
    if schemas.is_empty() {
        schemas = default_program().schemas;
    }
    Program::new(schemas, formulas)
}

/// Writes a program in the formula file format; parses back to an equal program.
pub fn format_program(program: &Program) -> String {
    let mut out = String::new();
    for s in &program.schemas {
        out.push_str(&format!(
            "@pred {}({},{})\n",
            s.name, s.domains[0], s.domains[1]
        ));
    }
    for f in &program.formulas {
        let lits: Vec<String> = f
            .literals
            .iter()
            .map(|l| {
                format!(
                    "{}{}({},{})",
                    if l.negated { "!" } else { "" },
                    l.predicate,
                    l.args[0],
                    l.args[1]
                )
            })
            .collect();
        out.push_str(&format!("{:?} :: {}\n", f.weight, lits.join(" v ")));
    }
    out
}

/// Reads ground literals against a grounded model's atoms.
pub fn parse_evidence(text: &str, gm: &GroundModel) -> Result<Evidence, MlnError> {
    let mut evidence = Evidence::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (negated, name, a, b, rest) =
            take_literal(line).ok_or_else(|| parse_err(i + 1, "malformed ground literal"))?;
        if !rest.trim().is_empty() {
            return Err(parse_err(i + 1, "trailing text after literal"));
        }
        let atom = gm
            .atom_index(name, a, b)
            .ok_or_else(|| MlnError::UnknownAtom(format!("{name}({a},{b})")))?;
        evidence.insert(atom, !negated);
    }
    Ok(evidence)
}
