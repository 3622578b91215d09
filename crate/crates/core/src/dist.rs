//! Probability distributions over a joint state space and the decision
//! procedure for whether a distribution factors according to a log-linear
//! model.
//!
//! A distribution factors when it is the normalized image of the monomial
//! parameterization [`phi`] for some non-negative parameter vector.  The
//! decision reduces to two exact tests: every binomial in a generating set
//! of the model's toric ideal must vanish at the distribution, and the
//! support must be nice in the sense of [`is_nice`].  When the binomials
//! vanish but the support is not nice, the distribution is a limit of
//! factoring distributions without factoring itself.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::ideal::{Binomial, IdealBasis};
use crate::model::{ModelMatrix, StateSpace};

/// Errors from distribution and parameter handling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DistError {
    /// A distribution needs one probability per joint state.
    StateCountMismatch { expected: usize, got: usize },
    /// Probabilities are non-negative.
    NegativeProbability { index: usize },
    /// Probabilities sum to exactly one.
    SumNotOne { sum: BigRational },
    /// A parameter vector needs one entry per matrix row.
    ParameterCountMismatch { expected: usize, got: usize },
    /// Parameters are non-negative.
    NegativeParameter { index: usize },
    /// An all-zero vector has no normalization.
    ZeroVector,
    /// A support index exceeded the number of states.
    SupportIndexOutOfRange { index: usize, num_states: usize },
    /// The ideal basis and the distribution live on different state counts.
    VariableCountMismatch { basis: usize, states: usize },
    /// Recovery tolerances are positive finite numbers.
    ToleranceNotPositive,
}

impl fmt::Display for DistError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistError::StateCountMismatch { expected, got } => {
                write!(f, "distribution has {got} entries, expected {expected}")
            }
            DistError::NegativeProbability { index } => {
                write!(f, "negative probability at state index {index}")
            }
            DistError::SumNotOne { sum } => {
                write!(f, "probabilities sum to {sum}, need exactly 1")
            }
            DistError::ParameterCountMismatch { expected, got } => {
                write!(f, "parameter vector has {got} entries, expected {expected}")
            }
            DistError::NegativeParameter { index } => {
                write!(f, "negative parameter at index {index}")
            }
            DistError::ZeroVector => write!(f, "cannot normalize an all-zero vector"),
            DistError::SupportIndexOutOfRange { index, num_states } => {
                write!(f, "support index {index} out of range ({num_states} states)")
            }
            DistError::VariableCountMismatch { basis, states } => write!(
                f,
                "ideal basis is over {basis} unknowns but the distribution has {states} states"
            ),
            DistError::ToleranceNotPositive => {
                write!(f, "tolerance must be positive and finite")
            }
        }
    }
}

impl core::error::Error for DistError {}

/// An exact probability distribution over the joint states of a
/// [`StateSpace`], indexed like the columns of a model matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distribution {
    space: StateSpace,
    probs: Vec<BigRational>,
}

impl Distribution {
    /// Validates non-negativity and an exact sum of one.
    pub fn new(space: &StateSpace, probs: Vec<BigRational>) -> Result<Self, DistError> {
        if probs.len() != space.num_states() {
            return Err(DistError::StateCountMismatch {
                expected: space.num_states(),
                got: probs.len(),
            });
        }
        for (index, p) in probs.iter().enumerate() {
            if p.is_negative() {
                return Err(DistError::NegativeProbability { index });
            }
        }
        let sum: BigRational = probs.iter().sum();
        if !sum.is_one() {
            return Err(DistError::SumNotOne { sum });
        }
        Ok(Distribution {
            space: space.clone(),
            probs,
        })
    }

    /// The uniform distribution.
    pub fn uniform(space: &StateSpace) -> Self {
        let n = space.num_states();
        let p = BigRational::new(BigInt::one(), BigInt::from(n));
        Distribution {
            space: space.clone(),
            probs: vec![p; n],
        }
    }

    /// All mass on a single joint state.
    pub fn point_mass(space: &StateSpace, state: usize) -> Result<Self, DistError> {
        let n = space.num_states();
        if state >= n {
            return Err(DistError::SupportIndexOutOfRange {
                index: state,
                num_states: n,
            });
        }
        let mut probs = vec![BigRational::zero(); n];
        probs[state] = BigRational::one();
        Ok(Distribution {
            space: space.clone(),
            probs,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn probs(&self) -> &[BigRational] {
        &self.probs
    }

    /// Indices of the states with strictly positive probability, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_positive())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Non-negative model parameters, one per matrix row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterVector {
    values: Vec<BigRational>,
}

impl ParameterVector {
    pub fn new(values: Vec<BigRational>) -> Result<Self, DistError> {
        for (index, t) in values.iter().enumerate() {
            if t.is_negative() {
                return Err(DistError::NegativeParameter { index });
            }
        }
        Ok(ParameterVector { values })
    }

    /// The identity parameters: every entry one.
    pub fn ones(len: usize) -> Self {
        ParameterVector {
            values: vec![BigRational::one(); len],
        }
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The monomial parameterization: component `j` is the product of
/// `t_i ^ a[i][j]` over the rows `i`, with `0^0 = 1` so that a zero
/// parameter only kills the columns whose exponent on it is positive.
pub fn phi(a: &ModelMatrix, t: &ParameterVector) -> Result<Vec<BigRational>, DistError> {
    if t.len() != a.nrows() {
        return Err(DistError::ParameterCountMismatch {
            expected: a.nrows(),
            got: t.len(),
        });
    }
    let mut out = Vec::with_capacity(a.ncols());
    for j in 0..a.ncols() {
        let mut value = BigRational::one();
        for i in a.column_support(j) {
            let e = a.entry(i, j);
            let t_i = &t.values()[i];
            if t_i.is_zero() {
                value = BigRational::zero();
                break;
            }
            value *= num_traits::pow(t_i.clone(), e as usize);
        }
        out.push(value);
    }
    Ok(out)
}

/// Divides a non-negative vector by its exact sum.
pub fn normalize(space: &StateSpace, values: &[BigRational]) -> Result<Distribution, DistError> {
    if values.len() != space.num_states() {
        return Err(DistError::StateCountMismatch {
            expected: space.num_states(),
            got: values.len(),
        });
    }
    for (index, v) in values.iter().enumerate() {
        if v.is_negative() {
            return Err(DistError::NegativeProbability { index });
        }
    }
    let sum: BigRational = values.iter().sum();
    if sum.is_zero() {
        return Err(DistError::ZeroVector);
    }
    let probs = values.iter().map(|v| v / &sum).collect();
    Ok(Distribution {
        space: space.clone(),
        probs,
    })
}

/// Whether the support set `f` can arise as the exact support of an image
/// of [`phi`]: no column outside `f` may have its row support contained in
/// the union of the row supports of the columns in `f`.  A contained
/// outside column would be forced positive by any parameter vector that
/// keeps `f` positive.
pub fn is_nice(f: &[usize], a: &ModelMatrix) -> Result<bool, DistError> {
    let m = a.ncols();
    let mut in_f = vec![false; m];
    for &j in f {
        if j >= m {
            return Err(DistError::SupportIndexOutOfRange {
                index: j,
                num_states: m,
            });
        }
        in_f[j] = true;
    }
    if f.is_empty() {
        // An empty support is achievable only when every column already has
        // empty row support, which the no-zero-column invariant rules out
        // unless the matrix has no columns at all.
        return Ok((0..m).all(|j| a.column_support(j).is_empty()));
    }
    let mut union: BTreeSet<usize> = BTreeSet::new();
    for (j, &inside) in in_f.iter().enumerate() {
        if inside {
            union.extend(a.column_support(j));
        }
    }
    for (j, &inside) in in_f.iter().enumerate() {
        if !inside && a.column_support(j).iter().all(|i| union.contains(i)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The value of the monomial with exponent vector `exps` at `probs`.
pub(crate) fn eval_monomial(probs: &[BigRational], exps: &[u32]) -> BigRational {
    let mut value = BigRational::one();
    for (p, &e) in probs.iter().zip(exps) {
        if e == 0 {
            continue;
        }
        if p.is_zero() {
            return BigRational::zero();
        }
        value *= num_traits::pow(p.clone(), e as usize);
    }
    value
}

/// Returns the first binomial in `basis` whose two monomials take different
/// values at `p`, or `None` when every binomial vanishes.
pub fn vanishes(p: &Distribution, basis: &IdealBasis) -> Result<Option<Binomial>, DistError> {
    if basis.order().num_vars() != p.probs().len() {
        return Err(DistError::VariableCountMismatch {
            basis: basis.order().num_vars(),
            states: p.probs().len(),
        });
    }
    for b in basis.binomials() {
        if eval_monomial(p.probs(), b.plus()) != eval_monomial(p.probs(), b.minus()) {
            return Ok(Some(b.clone()));
        }
    }
    Ok(None)
}

/// The three possible answers of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorizationStatus {
    /// The distribution is the normalized image of some non-negative
    /// parameter vector.
    Factors,
    /// The distribution is a limit of factoring distributions but does not
    /// factor itself.
    LimitOnly,
    /// The distribution is not even a limit of factoring distributions.
    Outside,
}

impl fmt::Display for FactorizationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorizationStatus::Factors => write!(f, "FACTORS"),
            FactorizationStatus::LimitOnly => write!(f, "LIMIT_ONLY"),
            FactorizationStatus::Outside => write!(f, "OUTSIDE"),
        }
    }
}

/// The outcome of [`classify`], with the evidence that decided it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationVerdict {
    status: FactorizationStatus,
    support: Vec<usize>,
    nice: bool,
    failing_binomial: Option<Binomial>,
}

impl FactorizationVerdict {
    pub fn status(&self) -> FactorizationStatus {
        self.status
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn is_nice(&self) -> bool {
        self.nice
    }

    /// A binomial that fails at the distribution; present exactly when the
    /// status is [`FactorizationStatus::Outside`].
    pub fn failing_binomial(&self) -> Option<&Binomial> {
        self.failing_binomial.as_ref()
    }
}

/// Decides whether `p` factors according to the model with matrix `a`.
///
/// `basis` must generate the full toric ideal of `a`; a raw kernel lattice
/// basis is generally too small.  The verdict is exact: `Outside` when some
/// basis binomial takes different values on its two monomials, otherwise
/// `Factors` when the support is nice and `LimitOnly` when it is not.
pub fn classify(
    p: &Distribution,
    a: &ModelMatrix,
    basis: &IdealBasis,
) -> Result<FactorizationVerdict, DistError> {
    if a.ncols() != p.probs().len() {
        return Err(DistError::StateCountMismatch {
            expected: a.ncols(),
            got: p.probs().len(),
        });
    }
    let support = p.support();
    let nice = is_nice(&support, a)?;
    let failing = vanishes(p, basis)?;
    let status = match (&failing, nice) {
        (Some(_), _) => FactorizationStatus::Outside,
        (None, true) => FactorizationStatus::Factors,
        (None, false) => FactorizationStatus::LimitOnly,
    };
    Ok(FactorizationVerdict {
        status,
        support,
        nice,
        failing_binomial: failing,
    })
}

/// Why [`recover_parameters`] declined to return a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub enum RecoveryFailure {
    /// The floating point solve produced a value with no finite logarithm
    /// or exponential.
    NonFinite,
    /// The recovered candidate reproduced the distribution only up to this
    /// relative error, which missed the requested tolerance.
    Tolerance { max_relative_error: f64 },
}

impl fmt::Display for RecoveryFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecoveryFailure::NonFinite => {
                write!(f, "floating point solve produced a non-finite value")
            }
            RecoveryFailure::Tolerance { max_relative_error } => write!(
                f,
                "verification missed tolerance: max relative error {max_relative_error:e}"
            ),
        }
    }
}

/// The result of best-effort parameter recovery: either a verified
/// parameter vector or an explicit failure.  Failure is an ordinary value
/// because whether the distribution factors has already been decided
/// exactly; only the search for a concrete preimage is approximate.
#[derive(Debug, Clone, PartialEq)]
pub enum RecoveryOutcome {
    Recovered(ParameterVector),
    Failed(RecoveryFailure),
}

/// Attempts to find parameters `t` with `normalize(phi(a, t))` equal to `p`
/// within the per-coordinate relative tolerance `tol`.
///
/// The caller should already have checked that `p` factors.  Rows that no
/// positive state touches get the parameter zero, which forces the zero
/// pattern of the candidate to match the support exactly.  The positive
/// rows are solved in floating point by least squares on the log-linear
/// system, then converted back to rationals and verified exactly.
pub fn recover_parameters(
    p: &Distribution,
    a: &ModelMatrix,
    tol: f64,
) -> Result<RecoveryOutcome, DistError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(DistError::ToleranceNotPositive);
    }
    if a.ncols() != p.probs().len() {
        return Err(DistError::StateCountMismatch {
            expected: a.ncols(),
            got: p.probs().len(),
        });
    }
    let support = p.support();
    let mut touched: BTreeSet<usize> = BTreeSet::new();
    for &j in &support {
        touched.extend(a.column_support(j));
    }
    let rows: Vec<usize> = touched.into_iter().collect();

    // Least squares on log p_j = sum_i a[i][j] x_i over the support columns.
    let n = rows.len();
    let mut coeffs = Vec::with_capacity(support.len());
    let mut logs = Vec::with_capacity(support.len());
    for &j in &support {
        let row: Vec<f64> = rows.iter().map(|&i| a.entry(i, j) as f64).collect();
        let pj = match p.probs()[j].to_f64() {
            Some(v) if v > 0.0 => v,
            _ => return Ok(RecoveryOutcome::Failed(RecoveryFailure::NonFinite)),
        };
        coeffs.push(row);
        // Explicit trait call: the inherent std method is absent here.
        logs.push(Float::ln(pj));
    }
    let x = match solve_normal_equations(&coeffs, &logs, n) {
        Some(x) => x,
        None => return Ok(RecoveryOutcome::Failed(RecoveryFailure::NonFinite)),
    };

    let mut values = vec![BigRational::zero(); a.nrows()];
    for (u, &i) in rows.iter().enumerate() {
        let t_i = Float::exp(x[u]);
        match BigRational::from_float(t_i) {
            Some(r) if !r.is_negative() => values[i] = r,
            _ => return Ok(RecoveryOutcome::Failed(RecoveryFailure::NonFinite)),
        }
    }
    let candidate = ParameterVector { values };

    // Exact verification against the requested tolerance.
    let image = phi(a, &candidate)?;
    let sum: BigRational = image.iter().sum();
    if sum.is_zero() {
        return Ok(RecoveryOutcome::Failed(RecoveryFailure::Tolerance {
            max_relative_error: f64::INFINITY,
        }));
    }
    let tol_exact = BigRational::from_float(tol).expect("tolerance is finite");
    let mut max_rel = BigRational::zero();
    for (j, pj) in p.probs().iter().enumerate() {
        let qj = &image[j] / &sum;
        if pj.is_zero() {
            if !qj.is_zero() {
                return Ok(RecoveryOutcome::Failed(RecoveryFailure::Tolerance {
                    max_relative_error: f64::INFINITY,
                }));
            }
            continue;
        }
        let rel = (&qj - pj).abs() / pj.clone();
        if rel > max_rel {
            max_rel = rel;
        }
    }
    if max_rel <= tol_exact {
        Ok(RecoveryOutcome::Recovered(candidate))
    } else {
        Ok(RecoveryOutcome::Failed(RecoveryFailure::Tolerance {
            max_relative_error: max_rel.to_f64().unwrap_or(f64::INFINITY),
        }))
    }
}

/// Solves the least squares problem `min |C x - b|` via the normal
/// equations, returning zeros for free variables when the system is rank
/// deficient.  Returns `None` when the data contain non-finite values.
fn solve_normal_equations(coeffs: &[Vec<f64>], b: &[f64], n: usize) -> Option<Vec<f64>> {
    if b.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut m = vec![vec![0.0f64; n]; n];
    let mut rhs = vec![0.0f64; n];
    for (row, &be) in coeffs.iter().zip(b) {
        for u in 0..n {
            rhs[u] += row[u] * be;
            for v in 0..n {
                m[u][v] += row[u] * row[v];
            }
        }
    }
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(1.0f64, |acc, &v| acc.max(v.abs()));
    let threshold = 1e-12 * scale;

    // Gaussian elimination with partial pivoting; columns whose best pivot
    // is negligible stay free and get the value zero.
    let mut pivot_row_of_col = vec![None; n];
    let mut r = 0;
    for c in 0..n {
        let mut best = r;
        for i in r..n {
            if m[i][c].abs() > m[best][c].abs() {
                best = i;
            }
        }
        if r >= n || m[best][c].abs() <= threshold {
            continue;
        }
        m.swap(r, best);
        rhs.swap(r, best);
        for i in (r + 1)..n {
            let f = m[i][c] / m[r][c];
            if f != 0.0 {
                for c2 in c..n {
                    m[i][c2] -= f * m[r][c2];
                }
                rhs[i] -= f * rhs[r];
            }
        }
        pivot_row_of_col[c] = Some(r);
        r += 1;
    }
    let mut x = vec![0.0f64; n];
    for c in (0..n).rev() {
        if let Some(pr) = pivot_row_of_col[c] {
            let mut s = rhs[pr];
            for (c2, &xc) in x.iter().enumerate().skip(c + 1) {
                s -= m[pr][c2] * xc;
            }
            x[c] = s / m[pr][c];
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::toric_markov_basis;
    use crate::model::{graph_matrix, loglinear_matrix, GeneratorSet, UndirectedGraph};
    use alloc::format;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn three_binary() -> StateSpace {
        StateSpace::binary(&["X1", "X2", "X3"]).unwrap()
    }

    fn all_pairs_matrix() -> (StateSpace, ModelMatrix) {
        let space = three_binary();
        let gens = GeneratorSet::new(&space, &[vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap();
        let a = loglinear_matrix(&space, &gens).unwrap();
        (space, a)
    }

    fn chain_matrix() -> (StateSpace, ModelMatrix) {
        let space = three_binary();
        let gens = GeneratorSet::new(&space, &[vec![0, 1], vec![1, 2]]).unwrap();
        let a = loglinear_matrix(&space, &gens).unwrap();
        (space, a)
    }

    fn four_cycle_matrix() -> (StateSpace, ModelMatrix) {
        let space = StateSpace::binary(&["X1", "X2", "X3", "X4"]).unwrap();
        let graph = UndirectedGraph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let a = graph_matrix(&space, &graph).unwrap();
        (space, a)
    }

    #[test]
    fn distribution_validation() {
        let space = three_binary();
        let uniform = Distribution::uniform(&space);
        assert_eq!(uniform.probs().len(), 8);
        assert_eq!(uniform.support(), (0..8).collect::<Vec<_>>());

        let short = vec![BigRational::one(); 3];
        assert_eq!(
            Distribution::new(&space, short),
            Err(DistError::StateCountMismatch {
                expected: 8,
                got: 3
            })
        );

        let mut negative = vec![BigRational::zero(); 8];
        negative[0] = rat(3, 2);
        negative[1] = rat(-1, 2);
        assert_eq!(
            Distribution::new(&space, negative),
            Err(DistError::NegativeProbability { index: 1 })
        );

        let bad_sum = vec![rat(1, 4); 8];
        assert_eq!(
            Distribution::new(&space, bad_sum),
            Err(DistError::SumNotOne { sum: rat(2, 1) })
        );

        let point = Distribution::point_mass(&space, 5).unwrap();
        assert_eq!(point.support(), vec![5]);
        assert!(Distribution::point_mass(&space, 8).is_err());
    }

    #[test]
    fn phi_identity_parameters_give_all_ones() {
        let (_, a) = all_pairs_matrix();
        let t = ParameterVector::ones(a.nrows());
        let image = phi(&a, &t).unwrap();
        assert_eq!(image, vec![BigRational::one(); 8]);
    }

    #[test]
    fn phi_reads_one_row_per_generator() {
        // Parameters 1..12; column 000 multiplies the first row of each of
        // the three generator blocks, so its value is 1 * 5 * 9.
        let (_, a) = all_pairs_matrix();
        let t = ParameterVector::new(
            (1..=12).map(|k| BigRational::from_integer(BigInt::from(k))).collect(),
        )
        .unwrap();
        let image = phi(&a, &t).unwrap();
        assert_eq!(image[0], rat(45, 1));
        assert_eq!(image[2], rat(110, 1)); // state 010: rows 2, 5, 11
        assert_eq!(image[7], rat(384, 1)); // state 111: rows 4, 8, 12
    }

    #[test]
    fn phi_zero_parameter_kills_exactly_its_columns() {
        let (_, a) = chain_matrix();
        let mut values = vec![BigRational::one(); 8];
        values[4] = BigRational::zero();
        let t = ParameterVector::new(values).unwrap();
        let image = phi(&a, &t).unwrap();
        for (j, v) in image.iter().enumerate() {
            // Row 4 is the block of the second generator at state 00, which
            // the columns 000 and 100 read.
            if j == 0 || j == 4 {
                assert!(v.is_zero());
            } else {
                assert!(v.is_one());
            }
        }
    }

    #[test]
    fn phi_rejects_wrong_parameter_count() {
        let (_, a) = chain_matrix();
        let t = ParameterVector::ones(5);
        assert_eq!(
            phi(&a, &t),
            Err(DistError::ParameterCountMismatch {
                expected: 8,
                got: 5
            })
        );
    }

    #[test]
    fn normalize_divides_by_the_exact_sum() {
        let space = StateSpace::binary(&["A", "B"]).unwrap();
        let d = normalize(&space, &[rat(1, 1), rat(1, 1), rat(1, 1), rat(1, 1)]).unwrap();
        assert_eq!(d.probs(), &[rat(1, 4), rat(1, 4), rat(1, 4), rat(1, 4)]);

        let d = normalize(
            &space,
            &[rat(1, 1), rat(0, 1), rat(3, 1), rat(0, 1)],
        )
        .unwrap();
        assert_eq!(d.probs(), &[rat(1, 4), rat(0, 1), rat(3, 4), rat(0, 1)]);
        assert_eq!(d.support(), vec![0, 2]);

        assert_eq!(
            normalize(&space, &vec![BigRational::zero(); 4]),
            Err(DistError::ZeroVector)
        );
    }

    #[test]
    fn normalized_images_sum_to_one() {
        let (space, a) = chain_matrix();
        let mut seed = 0x2545f4914f6cdd1du64;
        for _ in 0..25 {
            let mut values = Vec::new();
            for _ in 0..a.nrows() {
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let num = 1 + (seed >> 33) % 20;
                seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let den = 1 + (seed >> 33) % 20;
                values.push(rat(num as i64, den as i64));
            }
            let t = ParameterVector::new(values).unwrap();
            let d = normalize(&space, &phi(&a, &t).unwrap()).unwrap();
            let sum: BigRational = d.probs().iter().sum();
            assert!(sum.is_one());
        }
    }

    /// Independent containment oracle working on row bitmasks.
    fn nice_oracle(f_mask: u32, a: &ModelMatrix) -> bool {
        let col_mask = |j: usize| -> u32 {
            let mut mask = 0u32;
            for i in 0..a.nrows() {
                if a.entry(i, j) != 0 {
                    mask |= 1 << i;
                }
            }
            mask
        };
        if f_mask == 0 {
            return (0..a.ncols()).all(|j| col_mask(j) == 0);
        }
        let mut union = 0u32;
        for j in 0..a.ncols() {
            if f_mask & (1 << j) != 0 {
                union |= col_mask(j);
            }
        }
        (0..a.ncols()).all(|j| {
            f_mask & (1 << j) != 0 || col_mask(j) & !union != 0
        })
    }

    #[test]
    fn niceness_agrees_with_containment_oracle() {
        let (_, a) = four_cycle_matrix();
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut masks: Vec<u32> = (0..16).map(|j| 1u32 << j).collect();
        masks.push(0xffff);
        masks.push(0b1000_0000_0000_1001); // {0000, 0011, 1100, 1111}
        for _ in 0..2048 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            masks.push((seed >> 40) as u32 & 0xffff);
        }
        for mask in masks {
            let f: Vec<usize> = (0..16).filter(|j| mask & (1 << j) != 0).collect();
            assert_eq!(is_nice(&f, &a).unwrap(), nice_oracle(mask, &a), "mask {mask:#06x}");
        }
    }

    #[test]
    fn niceness_of_hand_checked_supports() {
        let (_, a) = four_cycle_matrix();
        // Diagonal states 0000, 0011, 1100, 1111: the union of their rows
        // pins both x1 = x2 and x3 = x4, and every state satisfying both
        // already belongs to the set.
        assert!(is_nice(&[0, 3, 12, 15], &a).unwrap());
        // The eight states whose run of ones is a prefix or suffix touch
        // every matrix row, so each of the other eight columns is contained.
        let arc = [0b0000, 0b0001, 0b0011, 0b0111, 0b1000, 0b1100, 0b1110, 0b1111];
        assert!(!is_nice(&arc, &a).unwrap());
        assert!(is_nice(&(0..16).collect::<Vec<_>>(), &a).unwrap());
        assert_eq!(
            is_nice(&[16], &a),
            Err(DistError::SupportIndexOutOfRange {
                index: 16,
                num_states: 16
            })
        );
    }

    #[test]
    fn images_vanish_and_perturbations_fail() {
        let (space, a) = four_cycle_matrix();
        let basis = toric_markov_basis(&a);
        let uniform = Distribution::uniform(&space);
        assert_eq!(vanishes(&uniform, &basis).unwrap(), None);

        let mut probs = vec![rat(1, 16); 16];
        probs[0] = rat(1, 16) - rat(1, 100);
        probs[15] = rat(1, 16) + rat(1, 100);
        let perturbed = Distribution::new(&space, probs).unwrap();
        let witness = vanishes(&perturbed, &basis).unwrap().expect("must fail");
        let plus = eval_monomial(perturbed.probs(), witness.plus());
        let minus = eval_monomial(perturbed.probs(), witness.minus());
        assert_ne!(plus, minus);
        assert!(basis.binomials().contains(&witness));
    }

    #[test]
    fn classify_trichotomy_on_the_four_cycle() {
        let (space, a) = four_cycle_matrix();
        let basis = toric_markov_basis(&a);

        let uniform = Distribution::uniform(&space);
        let verdict = classify(&uniform, &a, &basis).unwrap();
        assert_eq!(verdict.status(), FactorizationStatus::Factors);
        assert!(verdict.is_nice());
        assert_eq!(verdict.failing_binomial(), None);
        assert_eq!(verdict.support().len(), 16);

        // A point mass concentrates every generator block on one row, and
        // only the state itself reads all four of those rows.
        let point = Distribution::point_mass(&space, 0).unwrap();
        let verdict = classify(&point, &a, &basis).unwrap();
        assert_eq!(verdict.status(), FactorizationStatus::Factors);

        let arc = [0b0000, 0b0001, 0b0011, 0b0111, 0b1000, 0b1100, 0b1110, 0b1111];
        let mut probs = vec![BigRational::zero(); 16];
        for &j in &arc {
            probs[j] = rat(1, 8);
        }
        let on_arc = Distribution::new(&space, probs).unwrap();
        let verdict = classify(&on_arc, &a, &basis).unwrap();
        assert_eq!(verdict.status(), FactorizationStatus::LimitOnly);
        assert!(!verdict.is_nice());
        assert_eq!(verdict.failing_binomial(), None);

        let mut probs = vec![rat(1, 16); 16];
        probs[0] = rat(1, 16) - rat(1, 100);
        probs[15] = rat(1, 16) + rat(1, 100);
        let perturbed = Distribution::new(&space, probs).unwrap();
        let verdict = classify(&perturbed, &a, &basis).unwrap();
        assert_eq!(verdict.status(), FactorizationStatus::Outside);
        assert!(verdict.failing_binomial().is_some());
    }

    #[test]
    fn grid_images_never_classify_outside() {
        let (space, a) = chain_matrix();
        let basis = toric_markov_basis(&a);
        for bits in 0u32..256 {
            let values: Vec<BigRational> = (0..8)
                .map(|i| {
                    if bits & (1 << i) != 0 {
                        rat(2, 1)
                    } else {
                        rat(1, 3)
                    }
                })
                .collect();
            let t = ParameterVector::new(values).unwrap();
            let d = normalize(&space, &phi(&a, &t).unwrap()).unwrap();
            let verdict = classify(&d, &a, &basis).unwrap();
            assert_eq!(verdict.status(), FactorizationStatus::Factors);
            assert!(verdict.is_nice());
        }
    }

    #[test]
    fn recover_round_trips_identity_parameters() {
        let (space, a) = four_cycle_matrix();
        let t = ParameterVector::ones(a.nrows());
        let p = normalize(&space, &phi(&a, &t).unwrap()).unwrap();
        match recover_parameters(&p, &a, 1e-9).unwrap() {
            RecoveryOutcome::Recovered(t_hat) => {
                assert_eq!(t_hat.len(), a.nrows());
                let q = normalize(&space, &phi(&a, &t_hat).unwrap()).unwrap();
                for (pj, qj) in p.probs().iter().zip(q.probs()) {
                    let rel = (qj - pj).abs() / pj.clone();
                    assert!(rel <= BigRational::from_float(1e-9).unwrap());
                }
            }
            RecoveryOutcome::Failed(why) => panic!("recovery failed: {why}"),
        }
    }

    #[test]
    fn recover_round_trips_rational_parameters() {
        let (space, a) = chain_matrix();
        let values = vec![
            rat(2, 1),
            rat(3, 1),
            rat(5, 1),
            rat(7, 1),
            rat(1, 2),
            rat(1, 3),
            rat(1, 5),
            rat(1, 7),
        ];
        let t = ParameterVector::new(values).unwrap();
        let p = normalize(&space, &phi(&a, &t).unwrap()).unwrap();
        assert!(matches!(
            recover_parameters(&p, &a, 1e-9).unwrap(),
            RecoveryOutcome::Recovered(_)
        ));
    }

    #[test]
    fn recover_reproduces_the_zero_pattern() {
        let (space, a) = chain_matrix();
        let values = vec![
            rat(2, 1),
            rat(3, 1),
            rat(5, 1),
            rat(7, 1),
            rat(0, 1),
            rat(1, 3),
            rat(1, 5),
            rat(1, 7),
        ];
        let t = ParameterVector::new(values).unwrap();
        let p = normalize(&space, &phi(&a, &t).unwrap()).unwrap();
        assert_eq!(p.support().len(), 6);
        match recover_parameters(&p, &a, 1e-9).unwrap() {
            RecoveryOutcome::Recovered(t_hat) => {
                // Row 4 is touched by no positive state, so its parameter
                // must come back exactly zero.
                assert!(t_hat.values()[4].is_zero());
                let q = normalize(&space, &phi(&a, &t_hat).unwrap()).unwrap();
                assert_eq!(q.support(), p.support());
            }
            RecoveryOutcome::Failed(why) => panic!("recovery failed: {why}"),
        }
    }

    #[test]
    fn recover_rejects_bad_tolerances() {
        let (space, a) = chain_matrix();
        let p = Distribution::uniform(&space);
        for tol in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert_eq!(
                recover_parameters(&p, &a, tol),
                Err(DistError::ToleranceNotPositive)
            );
        }
    }

    #[test]
    fn recovery_failure_displays_diagnostics() {
        let msg = format!(
            "{}",
            RecoveryFailure::Tolerance {
                max_relative_error: 0.125
            }
        );
        assert!(msg.contains("1.25e-1"));
        assert_eq!(
            format!("{}", RecoveryFailure::NonFinite),
            "floating point solve produced a non-finite value"
        );
    }
}
