//! A family of binary graphical models with unboundedly deep relations:
//! the model on 2n variables whose only non-edges pair variable i with
//! variable i + n carries a minimal generator of degree 2^n.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ideal::Binomial;
use crate::model::{graph_matrix, ModelMatrix, StateSpace, UndirectedGraph};

/// Largest state space `pairs_model` will build.
pub const PAIRS_MODEL_MAX_STATES: usize = 4096;

/// Errors from the non-interacting-pairs constructions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstructionsError {
    /// The family starts at one pair.
    ZeroPairs,
    /// The requested model has more joint states than the bound allows.
    TooManyStates { states: usize, bound: usize },
    /// A binomial and a matrix disagree on the number of states.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for ConstructionsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionsError::ZeroPairs => write!(f, "the model needs at least one pair"),
            ConstructionsError::TooManyStates { states, bound } => {
                write!(f, "model has {states} states, the bound is {bound}")
            }
            ConstructionsError::DimensionMismatch { expected, got } => {
                write!(f, "binomial is over {got} states, the matrix has {expected} columns")
            }
        }
    }
}

impl core::error::Error for ConstructionsError {}

/// The model on binary variables X1..X2n where every pair interacts
/// except {Xi, Xi+n}.
#[derive(Debug, Clone)]
pub struct PairsModel {
    n: usize,
    space: StateSpace,
    graph: UndirectedGraph,
    matrix: ModelMatrix,
}

impl PairsModel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn graph(&self) -> &UndirectedGraph {
        &self.graph
    }

    pub fn matrix(&self) -> &ModelMatrix {
        &self.matrix
    }
}

/// Builds the n-pairs model.  One pair gives two independent variables,
/// two pairs give the binary four-cycle, three pairs give the edge graph
/// of the octahedron.
pub fn pairs_model(n: usize) -> Result<PairsModel, ConstructionsError> {
    if n == 0 {
        return Err(ConstructionsError::ZeroPairs);
    }
    let vars = 2 * n;
    if vars >= usize::BITS as usize || (1usize << vars) > PAIRS_MODEL_MAX_STATES {
        return Err(ConstructionsError::TooManyStates {
            states: 1usize.checked_shl(vars as u32).unwrap_or(usize::MAX),
            bound: PAIRS_MODEL_MAX_STATES,
        });
    }
    let names: Vec<String> = (1..=vars).map(|k| format!("X{k}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let space = StateSpace::binary(&refs).expect("names are distinct");
    let mut edges = Vec::new();
    for u in 0..vars {
        for v in (u + 1)..vars {
            if v != u + n {
                edges.push((u, v));
            }
        }
    }
    let graph = UndirectedGraph::new(vars, &edges).expect("edges are in range");
    let matrix = graph_matrix(&space, &graph).expect("graph and space share the vertex count");
    Ok(PairsModel {
        n,
        space,
        graph,
        matrix,
    })
}

/// The degree-2^n kernel element of the n-pairs model: the product of
/// states whose odd-position coordinates agree and match the parity of
/// the even-position sum, minus the product of states whose odd-position
/// coordinates agree but miss that parity.
pub fn prop10_binomial(n: usize) -> Result<Binomial, ConstructionsError> {
    if n == 0 {
        return Err(ConstructionsError::ZeroPairs);
    }
    let vars = 2 * n;
    if vars >= usize::BITS as usize || (1usize << vars) > PAIRS_MODEL_MAX_STATES {
        return Err(ConstructionsError::TooManyStates {
            states: 1usize.checked_shl(vars as u32).unwrap_or(usize::MAX),
            bound: PAIRS_MODEL_MAX_STATES,
        });
    }
    let dim = 1usize << vars;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for s in 0..dim {
        // State indices order coordinates with the last variable fastest,
        // so variable k (0-based) sits at bit vars - 1 - k.
        let coord = |k: usize| (s >> (vars - 1 - k)) & 1;
        let first = coord(0);
        if (1..n).any(|t| coord(2 * t) != first) {
            continue;
        }
        let even_sum: usize = (0..n).map(|t| coord(2 * t + 1)).sum();
        if even_sum % 2 == first {
            plus.push(s);
        } else {
            minus.push(s);
        }
    }
    Ok(Binomial::from_states(dim, &plus, &minus)
        .expect("the parity classes are disjoint and non-empty"))
}

/// Exact check that the move `b` preserves the statistics of `a`, that
/// is, `A * plus == A * minus`.
pub fn verify_kernel_membership(b: &Binomial, a: &ModelMatrix) -> Result<bool, ConstructionsError> {
    if b.dimension() != a.ncols() {
        return Err(ConstructionsError::DimensionMismatch {
            expected: a.ncols(),
            got: b.dimension(),
        });
    }
    for i in 0..a.nrows() {
        let row = a.row(i);
        let dot = |exps: &[u32]| -> u128 {
            exps.iter()
                .zip(row)
                .map(|(&e, &m)| u128::from(e) * u128::from(m))
                .sum()
        };
        if dot(b.plus()) != dot(b.minus()) {
            return Ok(false);
        }
    }
    Ok(true)
}
