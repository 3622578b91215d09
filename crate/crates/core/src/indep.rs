//! Conditional-independence statements and their algebra: cross-product
//! differences and ratios, the translation of saturated statements into
//! quadratic binomials, pairwise and global ideals of a graph, and graph
//! separation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::dist::Distribution;
use crate::ideal::{Binomial, IdealBasis, MonomialOrder};
use crate::model::{StateSpace, UndirectedGraph};

/// Errors from independence statements and their evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndepError {
    /// The X and Y sides of a statement are non-empty.
    EmptySide { side: char },
    /// The three sides of a statement are pairwise disjoint.
    OverlappingSides { variable: usize },
    /// A side listed the same variable twice.
    RepeatedVariable { variable: usize },
    /// A side referenced a variable outside the state space.
    VariableOutOfRange { index: usize, num_vars: usize },
    /// The statement and the state space disagree on the variable count.
    ArityMismatch { statement: usize, space: usize },
    /// The statement leaves this variable unassigned; only saturated
    /// statements translate into binomials or single-product evaluations.
    NotSaturated { variable: usize },
    /// A side's joint state needs one value per listed variable.
    StateLengthMismatch {
        side: char,
        expected: usize,
        got: usize,
    },
    /// A state value exceeded its variable's cardinality.
    StateValueOutOfRange {
        side: char,
        position: usize,
        value: usize,
        cardinality: usize,
    },
    /// The primed and unprimed states of a side must differ.
    EqualStates { side: char },
    /// The distribution has the wrong number of states for this spec.
    StateCountMismatch { expected: usize, got: usize },
    /// A cross-product ratio with a vanishing denominator is undefined.
    ZeroDenominator,
    /// The graph and the state space disagree on the variable count.
    VertexCountMismatch { graph: usize, space: usize },
    /// Statement enumeration is quartic-exponential in the vertex count.
    VertexBoundExceeded { vertices: usize, bound: usize },
}

impl fmt::Display for IndepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndepError::EmptySide { side } => {
                write!(f, "side {side} of the independence statement is empty")
            }
            IndepError::OverlappingSides { variable } => {
                write!(f, "variable {variable} appears on two sides")
            }
            IndepError::RepeatedVariable { variable } => {
                write!(f, "variable {variable} listed twice on one side")
            }
            IndepError::VariableOutOfRange { index, num_vars } => {
                write!(f, "variable index {index} out of range ({num_vars} variables)")
            }
            IndepError::ArityMismatch { statement, space } => write!(
                f,
                "statement is over {statement} variables but the space has {space}"
            ),
            IndepError::NotSaturated { variable } => write!(
                f,
                "statement leaves variable {variable} unassigned; marginalize explicitly for non-saturated statements"
            ),
            IndepError::StateLengthMismatch {
                side,
                expected,
                got,
            } => write!(
                f,
                "side {side} state has {got} values, expected {expected}"
            ),
            IndepError::StateValueOutOfRange {
                side,
                position,
                value,
                cardinality,
            } => write!(
                f,
                "side {side} value {value} at position {position} exceeds cardinality {cardinality}"
            ),
            IndepError::EqualStates { side } => {
                write!(f, "side {side} needs two distinct states")
            }
            IndepError::StateCountMismatch { expected, got } => {
                write!(f, "distribution has {got} states, expected {expected}")
            }
            IndepError::ZeroDenominator => {
                write!(f, "cross-product ratio denominator is zero")
            }
            IndepError::VertexCountMismatch { graph, space } => write!(
                f,
                "graph has {graph} vertices but the state space has {space} variables"
            ),
            IndepError::VertexBoundExceeded { vertices, bound } => write!(
                f,
                "graph has {vertices} vertices, statement enumeration is bounded at {bound}"
            ),
        }
    }
}

impl core::error::Error for IndepError {}

/// The statement that the variables in `x` are independent of those in `y`
/// given those in `z`.  Sides are stored sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IndependenceStatement {
    x: Vec<usize>,
    y: Vec<usize>,
    z: Vec<usize>,
    num_vars: usize,
}

fn checked_side(side: char, vars: &[usize], num_vars: usize) -> Result<Vec<usize>, IndepError> {
    let mut sorted = vars.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            return Err(IndepError::RepeatedVariable { variable: pair[0] });
        }
    }
    if let Some(&index) = sorted.iter().find(|&&v| v >= num_vars) {
        return Err(IndepError::VariableOutOfRange { index, num_vars });
    }
    if side != 'Z' && sorted.is_empty() {
        return Err(IndepError::EmptySide { side });
    }
    Ok(sorted)
}

impl IndependenceStatement {
    /// Validates disjoint sides with non-empty `x` and `y`.
    pub fn new(
        space: &StateSpace,
        x: &[usize],
        y: &[usize],
        z: &[usize],
    ) -> Result<Self, IndepError> {
        Self::with_num_vars(space.num_vars(), x, y, z)
    }

    fn with_num_vars(
        num_vars: usize,
        x: &[usize],
        y: &[usize],
        z: &[usize],
    ) -> Result<Self, IndepError> {
        let x = checked_side('X', x, num_vars)?;
        let y = checked_side('Y', y, num_vars)?;
        let z = checked_side('Z', z, num_vars)?;
        let mut seen = vec![false; num_vars];
        for &v in x.iter().chain(&y).chain(&z) {
            if seen[v] {
                return Err(IndepError::OverlappingSides { variable: v });
            }
            seen[v] = true;
        }
        Ok(IndependenceStatement { x, y, z, num_vars })
    }

    pub fn x(&self) -> &[usize] {
        &self.x
    }

    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn z(&self) -> &[usize] {
        &self.z
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// True when the three sides together cover every variable.
    pub fn is_saturated(&self) -> bool {
        self.x.len() + self.y.len() + self.z.len() == self.num_vars
    }

    fn check_space(&self, space: &StateSpace) -> Result<(), IndepError> {
        if self.num_vars != space.num_vars() {
            return Err(IndepError::ArityMismatch {
                statement: self.num_vars,
                space: space.num_vars(),
            });
        }
        Ok(())
    }

    fn check_saturated(&self) -> Result<(), IndepError> {
        if !self.is_saturated() {
            let mut seen = vec![false; self.num_vars];
            for &v in self.x.iter().chain(&self.y).chain(&self.z) {
                seen[v] = true;
            }
            let variable = seen.iter().position(|&s| !s).unwrap_or(0);
            return Err(IndepError::NotSaturated { variable });
        }
        Ok(())
    }
}

/// Enumerates the joint states of `vars` in mixed-radix order with the
/// last listed variable fastest, matching the global state indexing.
fn subset_states(space: &StateSpace, vars: &[usize]) -> Vec<Vec<usize>> {
    let mut states = vec![Vec::new()];
    for &v in vars {
        let card = space.cardinality(v);
        let mut next = Vec::with_capacity(states.len() * card);
        for prefix in &states {
            for value in 0..card {
                let mut s = prefix.clone();
                s.push(value);
                next.push(s);
            }
        }
        states = next;
    }
    states
}

fn checked_values(
    side: char,
    space: &StateSpace,
    vars: &[usize],
    values: &[usize],
) -> Result<Vec<usize>, IndepError> {
    if values.len() != vars.len() {
        return Err(IndepError::StateLengthMismatch {
            side,
            expected: vars.len(),
            got: values.len(),
        });
    }
    for (position, (&v, &value)) in vars.iter().zip(values).enumerate() {
        let cardinality = space.cardinality(v);
        if value >= cardinality {
            return Err(IndepError::StateValueOutOfRange {
                side,
                position,
                value,
                cardinality,
            });
        }
    }
    Ok(values.to_vec())
}

/// One cross-product difference: two states per side of a saturated
/// statement, one conditioning state.  Values are listed per side in the
/// statement's ascending variable order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpdSpec {
    statement: IndependenceStatement,
    x: Vec<usize>,
    x_alt: Vec<usize>,
    y: Vec<usize>,
    y_alt: Vec<usize>,
    z: Vec<usize>,
    num_states: usize,
    // Joint state indices of the four corners.
    idx_x_y: usize,
    idx_xa_ya: usize,
    idx_xa_y: usize,
    idx_x_ya: usize,
}

impl CpdSpec {
    /// Validates the states and precomputes the four corner indices.
    /// The statement must be saturated; otherwise the four corners are not
    /// single states and the difference is not a binomial.
    pub fn new(
        space: &StateSpace,
        statement: &IndependenceStatement,
        x: &[usize],
        x_alt: &[usize],
        y: &[usize],
        y_alt: &[usize],
        z: &[usize],
    ) -> Result<Self, IndepError> {
        statement.check_space(space)?;
        statement.check_saturated()?;
        let x = checked_values('X', space, statement.x(), x)?;
        let x_alt = checked_values('X', space, statement.x(), x_alt)?;
        let y = checked_values('Y', space, statement.y(), y)?;
        let y_alt = checked_values('Y', space, statement.y(), y_alt)?;
        let z = checked_values('Z', space, statement.z(), z)?;
        if x == x_alt {
            return Err(IndepError::EqualStates { side: 'X' });
        }
        if y == y_alt {
            return Err(IndepError::EqualStates { side: 'Y' });
        }
        let corner = |xv: &[usize], yv: &[usize]| -> usize {
            let mut state = vec![0usize; space.num_vars()];
            for (&v, &value) in statement.x().iter().zip(xv) {
                state[v] = value;
            }
            for (&v, &value) in statement.y().iter().zip(yv) {
                state[v] = value;
            }
            for (&v, &value) in statement.z().iter().zip(&z) {
                state[v] = value;
            }
            space
                .index_of_state(&state)
                .expect("validated state is in range")
        };
        let idx_x_y = corner(&x, &y);
        let idx_xa_ya = corner(&x_alt, &y_alt);
        let idx_xa_y = corner(&x_alt, &y);
        let idx_x_ya = corner(&x, &y_alt);
        Ok(CpdSpec {
            statement: statement.clone(),
            x,
            x_alt,
            y,
            y_alt,
            z,
            num_states: space.num_states(),
            idx_x_y,
            idx_xa_ya,
            idx_xa_y,
            idx_x_ya,
        })
    }

    pub fn statement(&self) -> &IndependenceStatement {
        &self.statement
    }

    /// The binomial whose vanishing this difference expresses.
    pub fn binomial(&self) -> Binomial {
        Binomial::from_states(
            self.num_states,
            &[self.idx_x_y, self.idx_xa_ya],
            &[self.idx_xa_y, self.idx_x_ya],
        )
        .expect("corners are four distinct states")
    }

    fn check_distribution(&self, p: &Distribution) -> Result<(), IndepError> {
        if p.probs().len() != self.num_states {
            return Err(IndepError::StateCountMismatch {
                expected: self.num_states,
                got: p.probs().len(),
            });
        }
        Ok(())
    }
}

/// The exact cross-product difference
/// `P(x,y,z) P(x',y',z) - P(x',y,z) P(x,y',z)`.
pub fn cpd(p: &Distribution, spec: &CpdSpec) -> Result<BigRational, IndepError> {
    spec.check_distribution(p)?;
    let probs = p.probs();
    Ok(&probs[spec.idx_x_y] * &probs[spec.idx_xa_ya]
        - &probs[spec.idx_xa_y] * &probs[spec.idx_x_ya])
}

/// The exact cross-product ratio
/// `P(x,y,z) P(x',y',z) / P(x',y,z) P(x,y',z)`.
///
/// Undefined when the denominator vanishes; no convention is adopted.
pub fn cpr(p: &Distribution, spec: &CpdSpec) -> Result<BigRational, IndepError> {
    spec.check_distribution(p)?;
    let probs = p.probs();
    let den = &probs[spec.idx_xa_y] * &probs[spec.idx_x_ya];
    if den.is_zero() {
        return Err(IndepError::ZeroDenominator);
    }
    Ok(&probs[spec.idx_x_y] * &probs[spec.idx_xa_ya] / den)
}

/// All quadratic binomials of a saturated statement: one per unordered
/// pair of X states, unordered pair of Y states, and conditioning state.
pub fn statement_binomials(
    statement: &IndependenceStatement,
    space: &StateSpace,
) -> Result<IdealBasis, IndepError> {
    statement.check_space(space)?;
    statement.check_saturated()?;
    let x_states = subset_states(space, statement.x());
    let y_states = subset_states(space, statement.y());
    let z_states = subset_states(space, statement.z());
    let n = space.num_states();
    let corner = |xv: &[usize], yv: &[usize], zv: &[usize]| -> usize {
        let mut state = vec![0usize; space.num_vars()];
        for (&v, &value) in statement.x().iter().zip(xv) {
            state[v] = value;
        }
        for (&v, &value) in statement.y().iter().zip(yv) {
            state[v] = value;
        }
        for (&v, &value) in statement.z().iter().zip(zv) {
            state[v] = value;
        }
        space
            .index_of_state(&state)
            .expect("enumerated state is in range")
    };
    let mut binomials = Vec::new();
    for (xi, xv) in x_states.iter().enumerate() {
        for xav in &x_states[xi + 1..] {
            for (yi, yv) in y_states.iter().enumerate() {
                for yav in &y_states[yi + 1..] {
                    for zv in &z_states {
                        let b = Binomial::from_states(
                            n,
                            &[corner(xv, yv, zv), corner(xav, yav, zv)],
                            &[corner(xav, yv, zv), corner(xv, yav, zv)],
                        )
                        .expect("corners are four distinct states");
                        binomials.push(b);
                    }
                }
            }
        }
    }
    Ok(IdealBasis::new(binomials, MonomialOrder::grevlex(n))
        .expect("every binomial was built with dimension n"))
}

/// The pairwise ideal of a graph: the statement binomials of
/// `Xi independent of Xj given everything else` over all non-edges,
/// deduplicated and sorted.
pub fn pairwise_ideal(
    graph: &UndirectedGraph,
    space: &StateSpace,
) -> Result<IdealBasis, IndepError> {
    if graph.num_vertices() != space.num_vars() {
        return Err(IndepError::VertexCountMismatch {
            graph: graph.num_vertices(),
            space: space.num_vars(),
        });
    }
    let n_vars = space.num_vars();
    let mut binomials = Vec::new();
    for i in 0..n_vars {
        for j in (i + 1)..n_vars {
            if graph.has_edge(i, j) {
                continue;
            }
            let z: Vec<usize> = (0..n_vars).filter(|&v| v != i && v != j).collect();
            let statement = IndependenceStatement::new(space, &[i], &[j], &z)?;
            let basis = statement_binomials(&statement, space)?;
            binomials.extend(basis.binomials().iter().cloned());
        }
    }
    Ok(
        IdealBasis::new(binomials, MonomialOrder::grevlex(space.num_states()))
            .expect("every binomial was built over the full state count"),
    )
}

/// True when every path from `x` to `y` meets `z`: deleting `z` leaves no
/// connection.
pub fn separates(
    graph: &UndirectedGraph,
    x: &[usize],
    y: &[usize],
    z: &[usize],
) -> Result<bool, IndepError> {
    let n = graph.num_vertices();
    let x = checked_side('X', x, n)?;
    let y = checked_side('Y', y, n)?;
    let z = checked_side('Z', z, n)?;
    let mut seen = vec![false; n];
    for &v in x.iter().chain(&y).chain(&z) {
        if seen[v] {
            return Err(IndepError::OverlappingSides { variable: v });
        }
        seen[v] = true;
    }
    let mut blocked = vec![false; n];
    for &v in &z {
        blocked[v] = true;
    }
    let mut reached = vec![false; n];
    let mut queue: Vec<usize> = x.to_vec();
    for &v in &x {
        reached[v] = true;
    }
    while let Some(v) = queue.pop() {
        for w in graph.neighbors(v) {
            if !blocked[w] && !reached[w] {
                reached[w] = true;
                queue.push(w);
            }
        }
    }
    Ok(y.iter().all(|&v| !reached[v]))
}

/// Default vertex bound for [`global_statements`].
pub const GLOBAL_STATEMENT_VERTEX_BOUND: usize = 8;

/// Every statement `X independent of Y given Z` that graph separation
/// grants, enumerated deterministically.  The symmetric duplicate with X
/// and Y swapped is dropped by requiring the smallest mentioned vertex on
/// the X side.
pub fn global_statements_bounded(
    graph: &UndirectedGraph,
    bound: usize,
) -> Result<Vec<IndependenceStatement>, IndepError> {
    let n = graph.num_vertices();
    if n > bound {
        return Err(IndepError::VertexBoundExceeded {
            vertices: n,
            bound,
        });
    }
    let mut out = Vec::new();
    // Each vertex takes one of four roles; the counter digit at position v
    // is 0 for unused, 1 for X, 2 for Y, 3 for Z.
    for code in 0u128..(1u128 << (2 * n)) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut z = Vec::new();
        for v in 0..n {
            match (code >> (2 * v)) & 3 {
                1 => x.push(v),
                2 => y.push(v),
                3 => z.push(v),
                _ => {}
            }
        }
        if x.is_empty() || y.is_empty() || y[0] < x[0] {
            continue;
        }
        if separates(graph, &x, &y, &z)? {
            out.push(
                IndependenceStatement::with_num_vars(n, &x, &y, &z)
                    .expect("roles are disjoint by construction"),
            );
        }
    }
    Ok(out)
}

/// [`global_statements_bounded`] at the default bound.
pub fn global_statements(
    graph: &UndirectedGraph,
) -> Result<Vec<IndependenceStatement>, IndepError> {
    global_statements_bounded(graph, GLOBAL_STATEMENT_VERTEX_BOUND)
}

/// Exact numeric truth of a statement at a distribution, marginalizing
/// over any unassigned variables.  Every cross-product difference of the
/// marginal must vanish.
pub fn statement_holds(
    p: &Distribution,
    statement: &IndependenceStatement,
) -> Result<bool, IndepError> {
    let space = p.space();
    statement.check_space(space)?;
    let x_states = subset_states(space, statement.x());
    let y_states = subset_states(space, statement.y());
    let z_states = subset_states(space, statement.z());
    let (nx, ny, nz) = (x_states.len(), y_states.len(), z_states.len());

    // Project every full state onto the three sides and accumulate.
    let project = |vars: &[usize], state: &[usize]| -> usize {
        let mut index = 0;
        for &v in vars {
            index = index * space.cardinality(v) + state[v];
        }
        index
    };
    let mut marginal = vec![BigRational::zero(); nx * ny * nz];
    for (s, prob) in p.probs().iter().enumerate() {
        let state = space.state_of_index(s).expect("index in range");
        let key = (project(statement.x(), &state) * ny + project(statement.y(), &state)) * nz
            + project(statement.z(), &state);
        marginal[key] += prob;
    }

    let at = |xi: usize, yi: usize, zi: usize| &marginal[(xi * ny + yi) * nz + zi];
    for zi in 0..nz {
        for xi in 0..nx {
            for xai in (xi + 1)..nx {
                for yi in 0..ny {
                    for yai in (yi + 1)..ny {
                        let lhs = at(xi, yi, zi) * at(xai, yai, zi);
                        let rhs = at(xai, yi, zi) * at(xi, yai, zi);
                        if lhs != rhs {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}
