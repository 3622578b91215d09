//! Text formats for models, distributions, tables, binomials, and
//! conditional-independence specs.
//!
//! Model files declare variables then structure, one declaration per
//! line; `#` starts a comment anywhere:
//!
//! ```text
//! var X1 2
//! var X2 2
//! edge X1 X2        # graph mode; or `gen X1 X2` for log-linear mode
//! ```
//!
//! Distribution files hold one `<digit-string> <numerator>/<denominator>`
//! line per state with nonzero probability; table files hold
//! `<digit-string> <count>` lines with non-negative integer counts.
//! Binomials read and write as `+ p0011 p0101 - p0001 p0111`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use factoric_core::fiber::Table;
use factoric_core::ideal::Binomial;
use factoric_core::indep::{CpdSpec, IndependenceStatement};
use factoric_core::model::{
    graph_matrix, loglinear_matrix, GeneratorSet, ModelMatrix, StateSpace, UndirectedGraph,
};

/// A diagnostic with the 1-based source line when one applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

impl ParseError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        ParseError {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ParseError {}

/// The structure part of a model file.
#[derive(Debug, Clone)]
pub enum ModelStructure {
    /// `edge` declarations; a file with no structure lines is an
    /// edgeless graph, whose cliques are the single variables.
    Graph(UndirectedGraph),
    /// `gen` declarations.
    Generators(GeneratorSet),
}

/// A parsed model file.
#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub space: StateSpace,
    pub structure: ModelStructure,
}

impl ParsedModel {
    /// The model matrix of the declared structure.
    pub fn matrix(&self) -> ModelMatrix {
        match &self.structure {
            ModelStructure::Graph(g) => {
                graph_matrix(&self.space, g).expect("graph was built over this space")
            }
            ModelStructure::Generators(g) => {
                loglinear_matrix(&self.space, g).expect("generators were built over this space")
            }
        }
    }

    pub fn graph(&self) -> Option<&UndirectedGraph> {
        match &self.structure {
            ModelStructure::Graph(g) => Some(g),
            ModelStructure::Generators(_) => None,
        }
    }
}

fn content_of(raw: &str) -> &str {
    match raw.find('#') {
        Some(pos) => &raw[..pos],
        None => raw,
    }
}

pub fn parse_model(text: &str) -> Result<ParsedModel, ParseError> {
    let mut vars: Vec<(String, usize)> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut gens: Vec<Vec<usize>> = Vec::new();
    let mut mode: Option<&'static str> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = content_of(raw).split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let resolve = |name: &str| -> Result<usize, ParseError> {
            vars.iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| ParseError::at(line, format!("unknown variable '{name}'")))
        };
        match tokens[0] {
            "var" => {
                if mode.is_some() {
                    return Err(ParseError::at(
                        line,
                        "variables must be declared before edges or generators",
                    ));
                }
                let &[_, name, card] = tokens.as_slice() else {
                    return Err(ParseError::at(line, "expected `var <name> <cardinality>`"));
                };
                if vars.iter().any(|(n, _)| n == name) {
                    return Err(ParseError::at(line, format!("variable '{name}' declared twice")));
                }
                let card: usize = card.parse().map_err(|_| {
                    ParseError::at(line, format!("bad cardinality '{card}'"))
                })?;
                if !(2..=10).contains(&card) {
                    return Err(ParseError::at(
                        line,
                        "cardinality must be between 2 and 10 so states have digit labels",
                    ));
                }
                vars.push((name.to_string(), card));
            }
            "edge" => {
                match mode {
                    None => mode = Some("edge"),
                    Some("edge") => {}
                    Some(_) => {
                        return Err(ParseError::at(line, "cannot mix edge and gen declarations"))
                    }
                }
                let &[_, a, b] = tokens.as_slice() else {
                    return Err(ParseError::at(line, "expected `edge <name> <name>`"));
                };
                let a = resolve(a)?;
                let b = resolve(b)?;
                if a == b {
                    return Err(ParseError::at(line, "an edge needs two distinct variables"));
                }
                let e = (a.min(b), a.max(b));
                if edges.contains(&e) {
                    return Err(ParseError::at(line, "edge declared twice"));
                }
                edges.push(e);
            }
            "gen" => {
                match mode {
                    None => mode = Some("gen"),
                    Some("gen") => {}
                    Some(_) => {
                        return Err(ParseError::at(line, "cannot mix edge and gen declarations"))
                    }
                }
                if tokens.len() < 2 {
                    return Err(ParseError::at(line, "expected `gen <name> [<name> ...]`"));
                }
                let mut g = Vec::with_capacity(tokens.len() - 1);
                for name in &tokens[1..] {
                    let v = resolve(name)?;
                    if g.contains(&v) {
                        return Err(ParseError::at(
                            line,
                            format!("variable '{name}' repeats within the generator"),
                        ));
                    }
                    g.push(v);
                }
                gens.push(g);
            }
            other => {
                return Err(ParseError::at(line, format!("unknown directive '{other}'")));
            }
        }
    }

    if vars.is_empty() {
        return Err(ParseError::general("a model needs at least one var declaration"));
    }
    let refs: Vec<(&str, usize)> = vars.iter().map(|(n, c)| (n.as_str(), *c)).collect();
    let space = StateSpace::new(&refs)
        .map_err(|e| ParseError::general(format!("bad variable declarations: {e}")))?;
    let structure = if mode == Some("gen") {
        let gens = GeneratorSet::new(&space, &gens)
            .map_err(|e| ParseError::general(format!("bad generators: {e}")))?;
        ModelStructure::Generators(gens)
    } else {
        let graph = UndirectedGraph::new(space.num_vars(), &edges)
            .expect("edges were validated per line");
        ModelStructure::Graph(graph)
    };
    Ok(ParsedModel { space, structure })
}

fn parse_rational(token: &str) -> Result<BigRational, String> {
    let (num, den) = match token.split_once('/') {
        Some((n, d)) => (n, d),
        None => (token, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| format!("bad number '{token}'"))?;
    let den = BigInt::from_str(den).map_err(|_| format!("bad number '{token}'"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in '{token}'"));
    }
    Ok(BigRational::new(num, den))
}

/// Reads a distribution file into one value per state; omitted states
/// are zero.  The values are as written, not yet normalized.
pub fn parse_distribution(
    text: &str,
    space: &StateSpace,
) -> Result<Vec<BigRational>, ParseError> {
    let mut values = vec![BigRational::zero(); space.num_states()];
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = content_of(raw).split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let &[label, value] = tokens.as_slice() else {
            return Err(ParseError::at(line, "expected `<state> <numerator>/<denominator>`"));
        };
        let index = space
            .index_of_label(label)
            .map_err(|e| ParseError::at(line, format!("bad state '{label}': {e}")))?;
        if !seen.insert(index) {
            return Err(ParseError::at(line, format!("state '{label}' given twice")));
        }
        let value = parse_rational(value).map_err(|m| ParseError::at(line, m))?;
        if value.is_negative() {
            return Err(ParseError::at(line, "probabilities cannot be negative"));
        }
        values[index] = value;
    }
    Ok(values)
}

/// Reads a table file of non-negative integer counts; omitted states are
/// zero.
pub fn parse_table(text: &str, space: &StateSpace) -> Result<Table, ParseError> {
    let mut counts = vec![BigUint::zero(); space.num_states()];
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let tokens: Vec<&str> = content_of(raw).split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let &[label, value] = tokens.as_slice() else {
            return Err(ParseError::at(line, "expected `<state> <count>`"));
        };
        let index = space
            .index_of_label(label)
            .map_err(|e| ParseError::at(line, format!("bad state '{label}': {e}")))?;
        if !seen.insert(index) {
            return Err(ParseError::at(line, format!("state '{label}' given twice")));
        }
        let value = BigUint::from_str(value)
            .map_err(|_| ParseError::at(line, "counts are non-negative integers"))?;
        counts[index] = value;
    }
    Ok(Table::new(space, counts).expect("one count per state"))
}

/// Parses a binomial in the rendered format, `+ p0011 p0101 - p0001
/// p0111`; the leading `+` is optional and repeated factors raise
/// exponents.
pub fn parse_binomial(text: &str, space: &StateSpace) -> Result<Binomial, ParseError> {
    let mut tokens = text.split_whitespace().peekable();
    if tokens.peek() == Some(&"+") {
        tokens.next();
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut side = &mut plus;
    let mut seen_minus = false;
    for token in tokens {
        if token == "-" {
            if seen_minus {
                return Err(ParseError::general("a binomial has exactly one '-'"));
            }
            seen_minus = true;
            side = &mut minus;
            continue;
        }
        let label = token
            .strip_prefix('p')
            .ok_or_else(|| ParseError::general(format!("factor '{token}' does not start with p")))?;
        let index = space
            .index_of_label(label)
            .map_err(|e| ParseError::general(format!("bad state '{label}': {e}")))?;
        side.push(index);
    }
    if !seen_minus {
        return Err(ParseError::general("a binomial has exactly one '-'"));
    }
    if plus.is_empty() || minus.is_empty() {
        return Err(ParseError::general("each term needs at least one factor"));
    }
    Binomial::from_states(space.num_states(), &plus, &minus)
        .map_err(|e| ParseError::general(format!("not a valid binomial: {e}")))
}

/// Parses a conditional-independence spec of the form
/// `X=<vars>:<s>|<s'>;Y=<vars>:<s>|<s'>;Z=<vars>:<s>`, where `<vars>` is
/// a comma-separated variable list and each state is a digit string over
/// those variables in the order listed.  Omit the `Z=` clause for an
/// empty conditioning set.
pub fn parse_cpr_spec(
    text: &str,
    space: &StateSpace,
) -> Result<(IndependenceStatement, CpdSpec), ParseError> {
    struct Clause {
        vars: Vec<usize>,
        states: Vec<Vec<usize>>,
    }
    let mut x_clause: Option<Clause> = None;
    let mut y_clause: Option<Clause> = None;
    let mut z_clause: Option<Clause> = None;
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, rest) = part
            .split_once('=')
            .ok_or_else(|| ParseError::general(format!("clause '{part}' is missing '='")))?;
        let (var_list, state_list) = rest
            .split_once(':')
            .ok_or_else(|| ParseError::general(format!("clause '{part}' is missing ':'")))?;
        let mut vars = Vec::new();
        for name in var_list.split(',') {
            let name = name.trim();
            let v = space
                .var_index(name)
                .map_err(|_| ParseError::general(format!("unknown variable '{name}'")))?;
            vars.push(v);
        }
        let expected_states = if key == "Z" { 1 } else { 2 };
        let raw_states: Vec<&str> = state_list.split('|').collect();
        if raw_states.len() != expected_states {
            return Err(ParseError::general(format!(
                "clause '{key}' needs {expected_states} state(s) separated by '|'"
            )));
        }
        let mut states = Vec::new();
        for s in raw_states {
            let s = s.trim();
            if s.chars().count() != vars.len() {
                return Err(ParseError::general(format!(
                    "state '{s}' does not match the {} variable(s) of clause '{key}'",
                    vars.len()
                )));
            }
            let digits: Result<Vec<usize>, ParseError> = s
                .chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as usize)
                        .ok_or_else(|| ParseError::general(format!("bad digit '{c}' in state '{s}'")))
                })
                .collect();
            states.push(digits?);
        }
        let slot = match key {
            "X" => &mut x_clause,
            "Y" => &mut y_clause,
            "Z" => &mut z_clause,
            other => {
                return Err(ParseError::general(format!(
                    "unknown clause '{other}'; expected X, Y, or Z"
                )))
            }
        };
        if slot.is_some() {
            return Err(ParseError::general(format!("clause '{key}' given twice")));
        }
        *slot = Some(Clause { vars, states });
    }
    let x = x_clause.ok_or_else(|| ParseError::general("missing X clause"))?;
    let y = y_clause.ok_or_else(|| ParseError::general("missing Y clause"))?;
    let z = z_clause.unwrap_or(Clause {
        vars: Vec::new(),
        states: vec![Vec::new()],
    });

    let statement = IndependenceStatement::new(space, &x.vars, &y.vars, &z.vars)
        .map_err(|e| ParseError::general(format!("bad statement: {e}")))?;

    // The statement keeps its variables sorted; reorder each listed state
    // to match.
    let reorder = |sorted: &[usize], listed: &[usize], state: &[usize]| -> Vec<usize> {
        sorted
            .iter()
            .map(|v| {
                let pos = listed
                    .iter()
                    .position(|u| u == v)
                    .expect("statement variables come from the clause");
                state[pos]
            })
            .collect()
    };
    let xs = reorder(statement.x(), &x.vars, &x.states[0]);
    let xa = reorder(statement.x(), &x.vars, &x.states[1]);
    let ys = reorder(statement.y(), &y.vars, &y.states[0]);
    let ya = reorder(statement.y(), &y.vars, &y.states[1]);
    let zs = reorder(statement.z(), &z.vars, &z.states[0]);
    let spec = CpdSpec::new(space, &statement, &xs, &xa, &ys, &ya, &zs)
        .map_err(|e| ParseError::general(format!("bad spec: {e}")))?;
    Ok((statement, spec))
}
