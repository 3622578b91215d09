//! Markov-basis moves on contingency tables: random walks over the fiber
//! of tables sharing sufficient statistics, exhaustive fiber enumeration,
//! and connectivity of the move graph.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{CheckedSub, One, Zero};
use rand_core::{RngCore, SeedableRng};

use crate::ideal::{Binomial, IdealBasis};
use crate::model::{ModelMatrix, StateSpace};

/// Errors from table handling and fiber computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FiberError {
    /// A table needs one count per joint state.
    CountMismatch { expected: usize, got: usize },
    /// A binomial move and a table live on different state counts.
    DimensionMismatch { expected: usize, got: usize },
    /// Walks take at least one step.
    ZeroSteps,
    /// The fiber has more tables than the enumeration cap allows.
    FiberTooLarge { cap: usize },
    /// The starting table does not belong to the enumerated fiber.
    TableNotInFiber,
}

impl fmt::Display for FiberError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberError::CountMismatch { expected, got } => {
                write!(f, "table has {got} counts, expected {expected}")
            }
            FiberError::DimensionMismatch { expected, got } => {
                write!(f, "move is over {got} states, expected {expected}")
            }
            FiberError::ZeroSteps => write!(f, "walk needs at least one step"),
            FiberError::FiberTooLarge { cap } => {
                write!(f, "fiber enumeration exceeded the cap of {cap} tables")
            }
            FiberError::TableNotInFiber => {
                write!(f, "starting table missing from its own fiber")
            }
        }
    }
}

impl core::error::Error for FiberError {}

/// A table of non-negative counts over the joint states of a
/// [`StateSpace`], indexed like model matrix columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    space: StateSpace,
    counts: Vec<BigUint>,
}

impl Table {
    pub fn new(space: &StateSpace, counts: Vec<BigUint>) -> Result<Self, FiberError> {
        if counts.len() != space.num_states() {
            return Err(FiberError::CountMismatch {
                expected: space.num_states(),
                got: counts.len(),
            });
        }
        Ok(Table {
            space: space.clone(),
            counts,
        })
    }

    pub fn from_u64(space: &StateSpace, counts: &[u64]) -> Result<Self, FiberError> {
        Table::new(space, counts.iter().map(|&c| BigUint::from(c)).collect())
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    /// Total number of observations.
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }
}

/// Which way to apply a binomial move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveDirection {
    /// Add the plus exponents and subtract the minus exponents.
    Forward,
    /// Subtract the plus exponents and add the minus exponents.
    Backward,
}

/// Walk length and pseudorandom seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkConfig {
    steps: u64,
    seed: u64,
}

impl WalkConfig {
    pub fn new(steps: u64, seed: u64) -> Result<Self, FiberError> {
        if steps == 0 {
            return Err(FiberError::ZeroSteps);
        }
        Ok(WalkConfig { steps, seed })
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Applies one move, returning `None` when a count would go negative.
/// For a move in the kernel of the model matrix the sufficient statistics
/// of an accepted result equal those of the input exactly.
pub fn apply_move(
    table: &Table,
    b: &Binomial,
    dir: MoveDirection,
) -> Result<Option<Table>, FiberError> {
    if b.dimension() != table.counts.len() {
        return Err(FiberError::DimensionMismatch {
            expected: table.counts.len(),
            got: b.dimension(),
        });
    }
    let (add, sub) = match dir {
        MoveDirection::Forward => (b.plus(), b.minus()),
        MoveDirection::Backward => (b.minus(), b.plus()),
    };
    let mut counts = Vec::with_capacity(table.counts.len());
    for (j, c) in table.counts.iter().enumerate() {
        let raised = c + BigUint::from(add[j]);
        match raised.checked_sub(&BigUint::from(sub[j])) {
            Some(next) => counts.push(next),
            None => return Ok(None),
        }
    }
    Ok(Some(Table {
        space: table.space.clone(),
        counts,
    }))
}

/// The sufficient statistics `A * n` of a table.
pub fn sufficient_statistics(a: &ModelMatrix, table: &Table) -> Result<Vec<BigUint>, FiberError> {
    if a.ncols() != table.counts.len() {
        return Err(FiberError::CountMismatch {
            expected: a.ncols(),
            got: table.counts.len(),
        });
    }
    let mut stats = vec![BigUint::zero(); a.nrows()];
    for (j, c) in table.counts.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for i in a.column_support(j) {
            stats[i] += BigUint::from(a.entry(i, j)) * c;
        }
    }
    Ok(stats)
}

fn walk_impl(
    n0: &Table,
    basis: &IdealBasis,
    cfg: &WalkConfig,
    mut observer: impl FnMut(&Table),
) -> Result<Table, FiberError> {
    if basis.order().num_vars() != n0.counts.len() {
        return Err(FiberError::DimensionMismatch {
            expected: n0.counts.len(),
            got: basis.order().num_vars(),
        });
    }
    let mut current = n0.clone();
    if basis.is_empty() {
        for _ in 0..cfg.steps {
            observer(&current);
        }
        return Ok(current);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let len = basis.len() as u64;
    for _ in 0..cfg.steps {
        let index = (rng.next_u64() % len) as usize;
        let dir = if rng.next_u64() & 1 == 0 {
            MoveDirection::Forward
        } else {
            MoveDirection::Backward
        };
        if let Some(next) = apply_move(&current, &basis.binomials()[index], dir)? {
            current = next;
        }
        observer(&current);
    }
    Ok(current)
}

/// The lazy uniform-proposal walk: each step draws a basis element and a
/// direction from a `ChaCha8` stream seeded with `cfg.seed`, applies the
/// move when all counts stay non-negative, and otherwise stays put.
/// Deterministic given the inputs and the basis order.
pub fn random_walk(
    n0: &Table,
    basis: &IdealBasis,
    cfg: &WalkConfig,
) -> Result<Table, FiberError> {
    walk_impl(n0, basis, cfg, |_| {})
}

/// All non-negative tables with the same sufficient statistics as `n0`,
/// in ascending lexicographic count order.  Fails once more than `cap`
/// tables are found.
pub fn enumerate_fiber(
    n0: &Table,
    a: &ModelMatrix,
    cap: usize,
) -> Result<Vec<Table>, FiberError> {
    let target = sufficient_statistics(a, n0)?;
    let m = a.ncols();
    let mut out: Vec<Table> = Vec::new();
    let mut partial = vec![BigUint::zero(); a.nrows()];
    let mut counts = vec![BigUint::zero(); m];

    // Depth-first over cells; a cell's count is bounded through any row
    // that reads it, since rows only accumulate.
    fn descend(
        j: usize,
        m: usize,
        a: &ModelMatrix,
        target: &[BigUint],
        partial: &mut Vec<BigUint>,
        counts: &mut Vec<BigUint>,
        out: &mut Vec<Table>,
        space: &StateSpace,
        cap: usize,
    ) -> Result<(), FiberError> {
        if j == m {
            if partial == target {
                if out.len() == cap {
                    return Err(FiberError::FiberTooLarge { cap });
                }
                out.push(Table {
                    space: space.clone(),
                    counts: counts.clone(),
                });
            }
            return Ok(());
        }
        let support = a.column_support(j);
        let mut bound: Option<BigUint> = None;
        for &i in &support {
            let room = &target[i] - &partial[i];
            let limit = room / BigUint::from(a.entry(i, j));
            bound = Some(match bound {
                Some(b) if b <= limit => b,
                _ => limit,
            });
        }
        let bound = bound.expect("columns are nonzero");
        let mut c = BigUint::zero();
        loop {
            for &i in &support {
                partial[i] += BigUint::from(a.entry(i, j)) * &c;
            }
            counts[j] = c.clone();
            let feasible = partial.iter().zip(target).all(|(p, t)| p <= t);
            let result = if feasible {
                descend(j + 1, m, a, target, partial, counts, out, space, cap)
            } else {
                Ok(())
            };
            for &i in &support {
                partial[i] -= BigUint::from(a.entry(i, j)) * &c;
            }
            counts[j] = BigUint::zero();
            result?;
            if c >= bound {
                break;
            }
            c += BigUint::one();
        }
        Ok(())
    }

    descend(
        0,
        m,
        a,
        &target,
        &mut partial,
        &mut counts,
        &mut out,
        &n0.space,
        cap,
    )?;
    Ok(out)
}

/// True when the moves of `basis` connect every table of the fiber of
/// `n0` to every other.
pub fn connectivity_check(
    n0: &Table,
    basis: &IdealBasis,
    a: &ModelMatrix,
    cap: usize,
) -> Result<bool, FiberError> {
    let fiber = enumerate_fiber(n0, a, cap)?;
    let index: BTreeMap<&[BigUint], usize> = fiber
        .iter()
        .enumerate()
        .map(|(k, t)| (t.counts(), k))
        .collect();
    let start = *index
        .get(n0.counts())
        .ok_or(FiberError::TableNotInFiber)?;
    let mut reached = vec![false; fiber.len()];
    reached[start] = true;
    let mut queue = vec![start];
    while let Some(k) = queue.pop() {
        for b in basis.binomials() {
            for dir in [MoveDirection::Forward, MoveDirection::Backward] {
                if let Some(next) = apply_move(&fiber[k], b, dir)? {
                    // A move outside the kernel would leave the fiber; such
                    // a neighbor simply has no index.
                    if let Some(&k2) = index.get(next.counts()) {
                        if !reached[k2] {
                            reached[k2] = true;
                            queue.push(k2);
                        }
                    }
                }
            }
        }
    }
    Ok(reached.iter().all(|&r| r))
}
