//! Discrete state spaces, interaction structures, and their 0/1 model
//! matrices.
//!
//! A [`StateSpace`] is an ordered list of named finite variables. Joint
//! states are indexed in mixed radix with the last variable moving
//! fastest, so for three binary variables the column order is
//! `000, 001, 010, 011, 100, 101, 110, 111`. This order is fixed; every
//! matrix, distribution, and table in the crate uses it.
//!
//! A [`GeneratorSet`] lists the interaction sets of a log-linear model,
//! and [`loglinear_matrix`] turns it into the model matrix whose rows are
//! indexed by (generator, local state) pairs and whose columns are joint
//! states: the entry is 1 exactly when the joint state restricts to the
//! local state. [`graph_matrix`] does the same for an undirected graph by
//! taking its maximal cliques as generators.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

/// Errors from state space, graph, and matrix construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// A state space needs at least one variable.
    EmptyVariableList,
    /// Every variable needs at least two states.
    CardinalityTooSmall { variable: String, cardinality: usize },
    /// Variable names must be distinct.
    DuplicateVariable { variable: String },
    /// A joint state must assign a value to every variable.
    StateLengthMismatch { expected: usize, got: usize },
    /// A state coordinate exceeded its variable's cardinality.
    StateValueOutOfRange {
        variable: String,
        value: usize,
        cardinality: usize,
    },
    /// A joint state index exceeded the number of states.
    IndexOutOfRange { index: usize, num_states: usize },
    /// The product of cardinalities overflowed the machine word.
    StateSpaceTooLarge,
    /// Digit-string labels need every cardinality at most ten.
    LabelCardinalityTooLarge { variable: String, cardinality: usize },
    /// A label character was not a digit or named a value out of range.
    BadLabelDigit { position: usize, found: char },
    /// A digit-string label must have one digit per variable.
    LabelLengthMismatch { expected: usize, got: usize },
    /// A generator set needs at least one generator.
    EmptyGeneratorSet,
    /// Generators are non-empty subsets of the variables.
    EmptyGenerator { position: usize },
    /// A generator referenced a variable outside the state space.
    GeneratorVariableOutOfRange { position: usize, index: usize },
    /// A generator listed the same variable twice.
    RepeatedGeneratorVariable { position: usize, index: usize },
    /// Two generators contained exactly the same variables.
    DuplicateGenerator { position: usize },
    /// A generator named a variable absent from the state space.
    UnknownVariable { name: String },
    /// Graph edges join two distinct vertices.
    SelfLoop { vertex: usize },
    /// An edge endpoint exceeded the vertex count.
    EdgeOutOfRange { a: usize, b: usize, vertices: usize },
    /// The same edge was given twice.
    DuplicateEdge { a: usize, b: usize },
    /// The graph and the state space must agree on the variable count.
    VertexCountMismatch { graph: usize, space: usize },
    /// Model matrices may not contain an all-zero column.
    ZeroColumn { column: usize },
    /// All matrix rows must have the same length.
    RaggedMatrix,
    /// Row and column label counts must match the matrix shape.
    LabelCountMismatch,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::EmptyVariableList => write!(f, "state space has no variables"),
            ModelError::CardinalityTooSmall {
                variable,
                cardinality,
            } => write!(
                f,
                "variable {variable} has cardinality {cardinality}, need at least 2"
            ),
            ModelError::DuplicateVariable { variable } => {
                write!(f, "variable {variable} declared twice")
            }
            ModelError::StateLengthMismatch { expected, got } => {
                write!(f, "joint state has {got} coordinates, expected {expected}")
            }
            ModelError::StateValueOutOfRange {
                variable,
                value,
                cardinality,
            } => write!(
                f,
                "value {value} out of range for variable {variable} (cardinality {cardinality})"
            ),
            ModelError::IndexOutOfRange { index, num_states } => {
                write!(f, "state index {index} out of range ({num_states} states)")
            }
            ModelError::StateSpaceTooLarge => write!(f, "state space too large to index"),
            ModelError::LabelCardinalityTooLarge {
                variable,
                cardinality,
            } => write!(
                f,
                "digit-string labels need cardinality <= 10, variable {variable} has {cardinality}"
            ),
            ModelError::BadLabelDigit { position, found } => {
                write!(f, "bad digit {found:?} at label position {position}")
            }
            ModelError::LabelLengthMismatch { expected, got } => {
                write!(f, "label has {got} digits, expected {expected}")
            }
            ModelError::EmptyGeneratorSet => write!(f, "generator set is empty"),
            ModelError::EmptyGenerator { position } => {
                write!(f, "generator {position} is empty")
            }
            ModelError::GeneratorVariableOutOfRange { position, index } => {
                write!(f, "generator {position} references variable index {index}")
            }
            ModelError::RepeatedGeneratorVariable { position, index } => write!(
                f,
                "generator {position} lists variable index {index} twice"
            ),
            ModelError::DuplicateGenerator { position } => {
                write!(f, "generator {position} duplicates an earlier generator")
            }
            ModelError::UnknownVariable { name } => write!(f, "unknown variable {name}"),
            ModelError::SelfLoop { vertex } => write!(f, "self-loop at vertex {vertex}"),
            ModelError::EdgeOutOfRange { a, b, vertices } => {
                write!(f, "edge ({a}, {b}) out of range for {vertices} vertices")
            }
            ModelError::DuplicateEdge { a, b } => write!(f, "edge ({a}, {b}) given twice"),
            ModelError::VertexCountMismatch { graph, space } => write!(
                f,
                "graph has {graph} vertices but the state space has {space} variables"
            ),
            ModelError::ZeroColumn { column } => {
                write!(f, "column {column} of the model matrix is all zero")
            }
            ModelError::RaggedMatrix => write!(f, "matrix rows have differing lengths"),
            ModelError::LabelCountMismatch => {
                write!(f, "label counts do not match the matrix shape")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// An ordered list of named finite variables.
///
/// Joint states are tuples with one value per variable; they are indexed
/// in mixed radix with the last variable fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    names: Vec<String>,
    cards: Vec<usize>,
    num_states: usize,
}

impl StateSpace {
    /// Builds a state space from `(name, cardinality)` pairs.
    pub fn new(vars: &[(&str, usize)]) -> Result<Self, ModelError> {
        if vars.is_empty() {
            return Err(ModelError::EmptyVariableList);
        }
        let mut seen = BTreeSet::new();
        let mut names = Vec::with_capacity(vars.len());
        let mut cards = Vec::with_capacity(vars.len());
        let mut num_states = 1usize;
        for &(name, card) in vars {
            if card < 2 {
                return Err(ModelError::CardinalityTooSmall {
                    variable: String::from(name),
                    cardinality: card,
                });
            }
            if !seen.insert(name) {
                return Err(ModelError::DuplicateVariable {
                    variable: String::from(name),
                });
            }
            num_states = num_states
                .checked_mul(card)
                .ok_or(ModelError::StateSpaceTooLarge)?;
            names.push(String::from(name));
            cards.push(card);
        }
        Ok(StateSpace {
            names,
            cards,
            num_states,
        })
    }

    /// Builds a state space of binary variables.
    pub fn binary(names: &[&str]) -> Result<Self, ModelError> {
        let vars: Vec<(&str, usize)> = names.iter().map(|&n| (n, 2)).collect();
        StateSpace::new(&vars)
    }

    /// Number of variables.
    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    /// Number of joint states (the product of the cardinalities).
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Name of variable `i`.
    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Cardinality of variable `i`.
    pub fn cardinality(&self, i: usize) -> usize {
        self.cards[i]
    }

    /// Position of a variable by name.
    pub fn var_index(&self, name: &str) -> Result<usize, ModelError> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ModelError::UnknownVariable {
                name: String::from(name),
            })
    }

    /// Mixed-radix index of a joint state, last variable fastest.
    pub fn index_of_state(&self, state: &[usize]) -> Result<usize, ModelError> {
        if state.len() != self.cards.len() {
            return Err(ModelError::StateLengthMismatch {
                expected: self.cards.len(),
                got: state.len(),
            });
        }
        let mut index = 0usize;
        for (i, (&value, &card)) in state.iter().zip(&self.cards).enumerate() {
            if value >= card {
                return Err(ModelError::StateValueOutOfRange {
                    variable: self.names[i].clone(),
                    value,
                    cardinality: card,
                });
            }
            index = index * card + value;
        }
        Ok(index)
    }

    /// Joint state of a mixed-radix index; inverse of [`index_of_state`].
    ///
    /// [`index_of_state`]: StateSpace::index_of_state
    pub fn state_of_index(&self, index: usize) -> Result<Vec<usize>, ModelError> {
        if index >= self.num_states {
            return Err(ModelError::IndexOutOfRange {
                index,
                num_states: self.num_states,
            });
        }
        let mut state = vec![0usize; self.cards.len()];
        let mut rest = index;
        for i in (0..self.cards.len()).rev() {
            state[i] = rest % self.cards[i];
            rest /= self.cards[i];
        }
        Ok(state)
    }

    /// Digit-string label of a joint state, one digit per variable.
    ///
    /// Requires every cardinality to be at most ten so that the label is
    /// unambiguous.
    pub fn state_label(&self, index: usize) -> Result<String, ModelError> {
        self.check_digit_labels()?;
        let state = self.state_of_index(index)?;
        let mut label = String::with_capacity(state.len());
        for value in state {
            label.push(char::from(b'0' + value as u8));
        }
        Ok(label)
    }

    /// Joint state index of a digit-string label.
    pub fn index_of_label(&self, label: &str) -> Result<usize, ModelError> {
        self.check_digit_labels()?;
        let digits: Vec<char> = label.chars().collect();
        if digits.len() != self.cards.len() {
            return Err(ModelError::LabelLengthMismatch {
                expected: self.cards.len(),
                got: digits.len(),
            });
        }
        let mut state = Vec::with_capacity(digits.len());
        for (position, ch) in digits.iter().enumerate() {
            let value = ch
                .to_digit(10)
                .ok_or(ModelError::BadLabelDigit {
                    position,
                    found: *ch,
                })? as usize;
            state.push(value);
        }
        self.index_of_state(&state)
    }

    fn check_digit_labels(&self) -> Result<(), ModelError> {
        for (i, &card) in self.cards.iter().enumerate() {
            if card > 10 {
                return Err(ModelError::LabelCardinalityTooLarge {
                    variable: self.names[i].clone(),
                    cardinality: card,
                });
            }
        }
        Ok(())
    }
}

/// The interaction sets of a log-linear model.
///
/// Generators keep their listed order; the rows of the model matrix are
/// grouped by generator in that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    generators: Vec<Vec<usize>>,
}

impl GeneratorSet {
    /// Builds a generator set over `space` from lists of variable indices.
    ///
    /// Each generator is sorted internally; the list order is preserved.
    pub fn new(space: &StateSpace, generators: &[Vec<usize>]) -> Result<Self, ModelError> {
        if generators.is_empty() {
            return Err(ModelError::EmptyGeneratorSet);
        }
        let mut sorted: Vec<Vec<usize>> = Vec::with_capacity(generators.len());
        for (position, gen) in generators.iter().enumerate() {
            if gen.is_empty() {
                return Err(ModelError::EmptyGenerator { position });
            }
            let mut g = gen.clone();
            g.sort_unstable();
            for window in g.windows(2) {
                if window[0] == window[1] {
                    return Err(ModelError::RepeatedGeneratorVariable {
                        position,
                        index: window[0],
                    });
                }
            }
            if let Some(&max) = g.last() {
                if max >= space.num_vars() {
                    return Err(ModelError::GeneratorVariableOutOfRange {
                        position,
                        index: max,
                    });
                }
            }
            if sorted.contains(&g) {
                return Err(ModelError::DuplicateGenerator { position });
            }
            sorted.push(g);
        }
        Ok(GeneratorSet { generators: sorted })
    }

    /// Builds a generator set from variable names.
    pub fn from_names(space: &StateSpace, generators: &[&[&str]]) -> Result<Self, ModelError> {
        let mut by_index = Vec::with_capacity(generators.len());
        for gen in generators {
            let mut indices = Vec::with_capacity(gen.len());
            for name in *gen {
                indices.push(space.var_index(name)?);
            }
            by_index.push(indices);
        }
        GeneratorSet::new(space, &by_index)
    }

    /// The generators, each a sorted list of variable indices.
    pub fn generators(&self) -> &[Vec<usize>] {
        &self.generators
    }

    /// Number of generators.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    /// True when the set has no generators; unreachable via `new`.
    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// A simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    vertices: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl UndirectedGraph {
    /// Builds a graph; edges are unordered pairs of distinct vertices.
    pub fn new(vertices: usize, edges: &[(usize, usize)]) -> Result<Self, ModelError> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(ModelError::SelfLoop { vertex: a });
            }
            if a >= vertices || b >= vertices {
                return Err(ModelError::EdgeOutOfRange { a, b, vertices });
            }
            let edge = (a.min(b), a.max(b));
            if !set.insert(edge) {
                return Err(ModelError::DuplicateEdge {
                    a: edge.0,
                    b: edge.1,
                });
            }
        }
        Ok(UndirectedGraph {
            vertices,
            edges: set,
        })
    }

    /// Number of vertices.
    pub fn num_vertices(&self) -> usize {
        self.vertices
    }

    /// The edges in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// True when `a` and `b` are adjacent.
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// The neighbors of `v` in increasing order.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.vertices).filter(|&u| self.has_edge(u, v)).collect()
    }

    /// All maximal cliques, each sorted, in lexicographic order.
    ///
    /// Isolated vertices count as maximal cliques of size one. Plain
    /// branch and bound with pivoting; fine at the intended vertex counts.
    pub fn maximal_cliques(&self) -> Vec<Vec<usize>> {
        let mut cliques = Vec::new();
        let all: Vec<usize> = (0..self.vertices).collect();
        self.bron_kerbosch(&mut Vec::new(), all, Vec::new(), &mut cliques);
        cliques.sort();
        cliques
    }

    fn bron_kerbosch(
        &self,
        current: &mut Vec<usize>,
        mut candidates: Vec<usize>,
        mut excluded: Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if candidates.is_empty() && excluded.is_empty() {
            let mut clique = current.clone();
            clique.sort_unstable();
            out.push(clique);
            return;
        }
        // Pivot on the candidate or excluded vertex with most candidate
        // neighbors; only non-neighbors of the pivot branch.
        let pivot = candidates
            .iter()
            .chain(excluded.iter())
            .copied()
            .max_by_key(|&u| candidates.iter().filter(|&&v| self.has_edge(u, v)).count())
            .expect("either set is non-empty");
        let branch: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|&v| !self.has_edge(pivot, v))
            .collect();
        for v in branch {
            current.push(v);
            let next_candidates: Vec<usize> = candidates
                .iter()
                .copied()
                .filter(|&u| self.has_edge(u, v))
                .collect();
            let next_excluded: Vec<usize> = excluded
                .iter()
                .copied()
                .filter(|&u| self.has_edge(u, v))
                .collect();
            self.bron_kerbosch(current, next_candidates, next_excluded, out);
            current.pop();
            candidates.retain(|&u| u != v);
            excluded.push(v);
        }
    }
}

/// A non-negative integer matrix with labeled rows and columns.
///
/// Columns may not be all zero; every joint state must touch at least one
/// row so that supports and parameter recovery are well defined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelMatrix {
    entries: Vec<Vec<u64>>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
}

impl ModelMatrix {
    /// Builds a matrix, validating shape, labels, and the no-zero-column
    /// rule.
    pub fn new(
        entries: Vec<Vec<u64>>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
    ) -> Result<Self, ModelError> {
        let ncols = entries.first().map_or(0, Vec::len);
        if entries.iter().any(|row| row.len() != ncols) {
            return Err(ModelError::RaggedMatrix);
        }
        if row_labels.len() != entries.len() || col_labels.len() != ncols {
            return Err(ModelError::LabelCountMismatch);
        }
        for j in 0..ncols {
            if entries.iter().all(|row| row[j] == 0) {
                return Err(ModelError::ZeroColumn { column: j });
            }
        }
        Ok(ModelMatrix {
            entries,
            row_labels,
            col_labels,
        })
    }

    /// Number of rows.
    pub fn nrows(&self) -> usize {
        self.entries.len()
    }

    /// Number of columns.
    pub fn ncols(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// Entry at `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> u64 {
        self.entries[row][col]
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[u64] {
        &self.entries[i]
    }

    /// Row labels.
    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    /// Column labels.
    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Row indices with a nonzero entry in column `j`.
    pub fn column_support(&self, j: usize) -> Vec<usize> {
        (0..self.nrows())
            .filter(|&i| self.entries[i][j] != 0)
            .collect()
    }
}

/// The 0/1 model matrix of a log-linear model.
///
/// Rows are (generator, local state) pairs, grouped by generator in
/// listed order, local states in mixed radix with the last variable of
/// the generator fastest. The entry is 1 exactly when the column's joint
/// state restricts to the row's local state.
pub fn loglinear_matrix(
    space: &StateSpace,
    generators: &GeneratorSet,
) -> Result<ModelMatrix, ModelError> {
    let m = space.num_states();
    let mut entries = Vec::new();
    let mut row_labels = Vec::new();
    for gen in generators.generators() {
        let local_cards: Vec<usize> = gen.iter().map(|&v| space.cardinality(v)).collect();
        let block: usize = local_cards.iter().product();
        for local_index in 0..block {
            // Unpack the local state, last generator variable fastest.
            let mut local = vec![0usize; gen.len()];
            let mut rest = local_index;
            for k in (0..gen.len()).rev() {
                local[k] = rest % local_cards[k];
                rest /= local_cards[k];
            }
            let mut row = vec![0u64; m];
            for (col, cell) in row.iter_mut().enumerate() {
                let state = space.state_of_index(col)?;
                if gen.iter().zip(&local).all(|(&v, &value)| state[v] == value) {
                    *cell = 1;
                }
            }
            let names: Vec<&str> = gen.iter().map(|&v| space.name(v)).collect();
            let digits: String = local
                .iter()
                .map(|&v| char::from_digit(v as u32 % 36, 36).unwrap_or('?'))
                .collect();
            row_labels.push(format!("{}:{}", names.join(","), digits));
            entries.push(row);
        }
    }
    let col_labels = (0..m)
        .map(|j| space.state_label(j).unwrap_or_else(|_| format!("s{j}")))
        .collect();
    ModelMatrix::new(entries, row_labels, col_labels)
}

/// The model matrix of an undirected graph: its maximal cliques taken as
/// generators.
pub fn graph_matrix(
    space: &StateSpace,
    graph: &UndirectedGraph,
) -> Result<ModelMatrix, ModelError> {
    if graph.num_vertices() != space.num_vars() {
        return Err(ModelError::VertexCountMismatch {
            graph: graph.num_vertices(),
            space: space.num_vars(),
        });
    }
    let cliques = graph.maximal_cliques();
    let generators = GeneratorSet::new(space, &cliques)?;
    loglinear_matrix(space, &generators)
}
