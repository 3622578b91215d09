//! Exact decision procedures for factorization of discrete probability
//! distributions over undirected graphical and log-linear models.
//!
//! The crate computes Markov bases (generating sets of toric ideals) of
//! model matrices with arbitrary-precision integer arithmetic, classifies
//! distributions as factorizing, factorizing only in the limit, or lying
//! outside the model closure, and provides supporting machinery: integer
//! kernels, a binomial Buchberger engine with saturation, conditional
//! independence binomials, and lattice walks over fibers of contingency
//! tables.
//!
//! All decisions are made in exact rational arithmetic; floating point
//! appears only in the best-effort parameter recovery routine, whose
//! result is re-verified exactly.
//!
//! ```
//! use factoric_core::model::{StateSpace, UndirectedGraph, graph_matrix};
//! use factoric_core::ideal::toric_markov_basis;
//!
//! let space = StateSpace::binary(&["X1", "X2", "X3", "X4"]).unwrap();
//! let cycle = UndirectedGraph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
//! let matrix = graph_matrix(&space, &cycle).unwrap();
//! let basis = toric_markov_basis(&matrix);
//! assert_eq!(basis.len(), 16);
//! ```

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod constructions;
pub mod dist;
pub mod fiber;
pub mod ideal;
pub mod indep;
pub mod lattice;
pub mod model;

pub use constructions::{pairs_model, prop10_binomial, verify_kernel_membership, PairsModel};
pub use dist::{Distribution, FactorizationStatus, FactorizationVerdict, ParameterVector};
pub use fiber::{
    apply_move, connectivity_check, enumerate_fiber, random_walk, sufficient_statistics,
    MoveDirection, Table, WalkConfig,
};
pub use ideal::{Binomial, IdealBasis, MonomialOrder};
pub use model::{ModelMatrix, StateSpace, UndirectedGraph};
