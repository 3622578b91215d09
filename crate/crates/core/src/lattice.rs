//! Exact integer linear algebra: ranks and integer kernels of model
//! matrices.
//!
//! Elimination is fraction free in the Bareiss style, entirely over
//! arbitrary-precision integers; back substitution runs over rationals
//! and the resulting kernel vectors are rescaled to primitive integer
//! vectors. The pivot rule is fixed (leftmost nonzero column, smallest
//! absolute value, earliest row on ties) so results are deterministic.

use alloc::vec::Vec;
use alloc::vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::model::ModelMatrix;

/// A basis of the integer kernel `{ v : A v = 0 }` of a model matrix.
///
/// Every basis vector is primitive (coordinate gcd one) with its first
/// nonzero coordinate positive; there is one vector per free column of
/// the echelon form, in increasing column order, so the basis size plus
/// the rank equals the column count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelLattice {
    ambient: usize,
    basis: Vec<Vec<BigInt>>,
}

impl KernelLattice {
    /// Dimension of the ambient space (the matrix column count).
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// The basis vectors.
    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// Number of basis vectors (the kernel rank).
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    /// True when the kernel is trivial.
    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }
}

struct Echelon {
    rows: Vec<Vec<BigInt>>,
    /// `(row, column)` of each pivot, in elimination order.
    pivots: Vec<(usize, usize)>,
}

/// Fraction-free row echelon form. Pivot rule: leftmost nonzero column,
/// smallest absolute value among eligible rows, earliest row on ties.
fn echelon(matrix: &ModelMatrix) -> Echelon {
    let nrows = matrix.nrows();
    let ncols = matrix.ncols();
    let mut rows: Vec<Vec<BigInt>> = (0..nrows)
        .map(|i| (0..ncols).map(|j| BigInt::from(matrix.entry(i, j))).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut prev_pivot = BigInt::one();
    let mut next_row = 0usize;
    for col in 0..ncols {
        if next_row == nrows {
            break;
        }
        let candidate = (next_row..nrows)
            .filter(|&r| !rows[r][col].is_zero())
            .min_by_key(|&r| (rows[r][col].abs(), r));
        let Some(pivot_row) = candidate else {
            continue;
        };
        rows.swap(next_row, pivot_row);
        let pivot = rows[next_row][col].clone();
        for r in next_row + 1..nrows {
            if rows[r][col].is_zero() {
                // Bareiss update of a zero-multiplier row still rescales.
                for j in col + 1..ncols {
                    let value = &rows[r][j] * &pivot;
                    debug_assert!((&value % &prev_pivot).is_zero());
                    rows[r][j] = value / &prev_pivot;
                }
            } else {
                let factor = rows[r][col].clone();
                for j in col + 1..ncols {
                    let value = &rows[r][j] * &pivot - &factor * &rows[next_row][j];
                    debug_assert!((&value % &prev_pivot).is_zero());
                    rows[r][j] = value / &prev_pivot;
                }
            }
            rows[r][col] = BigInt::zero();
        }
        pivots.push((next_row, col));
        prev_pivot = pivot;
        next_row += 1;
    }
    Echelon { rows, pivots }
}

/// Exact rank of a model matrix.
pub fn rank(matrix: &ModelMatrix) -> usize {
    echelon(matrix).pivots.len()
}

/// A primitive basis of the integer kernel of a model matrix.
pub fn integer_kernel(matrix: &ModelMatrix) -> KernelLattice {
    let ncols = matrix.ncols();
    let ech = echelon(matrix);
    let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
    let mut basis = Vec::with_capacity(ncols - pivot_cols.len());
    for free in (0..ncols).filter(|c| !pivot_cols.contains(c)) {
        let mut x: Vec<BigRational> = vec![BigRational::zero(); ncols];
        x[free] = BigRational::one();
        for &(row, col) in ech.pivots.iter().rev() {
            let mut acc = BigRational::zero();
            for j in col + 1..ncols {
                if !ech.rows[row][j].is_zero() {
                    acc += BigRational::from(ech.rows[row][j].clone()) * &x[j];
                }
            }
            x[col] = -acc / BigRational::from(ech.rows[row][col].clone());
        }
        basis.push(primitive(&x));
    }
    KernelLattice {
        ambient: ncols,
        basis,
    }
}

/// Clears denominators and divides by the gcd; first nonzero positive.
fn primitive(x: &[BigRational]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for value in x {
        lcm = lcm.lcm(value.denom());
    }
    let mut v: Vec<BigInt> = x
        .iter()
        .map(|value| value.numer() * (&lcm / value.denom()))
        .collect();
    let mut gcd = BigInt::zero();
    for entry in &v {
        gcd = gcd.gcd(entry);
    }
    if !gcd.is_zero() && !gcd.is_one() {
        for entry in &mut v {
            *entry /= &gcd;
        }
    }
    if let Some(first) = v.iter().find(|e| !e.is_zero()) {
        if first.is_negative() {
            for entry in &mut v {
                *entry = -entry.clone();
            }
        }
    }
    v
}

/// `A v` for an integer vector `v`; zero exactly on kernel members.
pub fn matrix_times(matrix: &ModelMatrix, v: &[BigInt]) -> Vec<BigInt> {
    (0..matrix.nrows())
        .map(|i| {
            (0..matrix.ncols())
                .map(|j| BigInt::from(matrix.entry(i, j)) * &v[j])
                .sum()
        })
        .collect()
}
