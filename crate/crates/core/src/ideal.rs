//! Binomial ideals: monomial orders, a Buchberger engine specialized to
//! pure differences of monomials, saturation, and toric Markov bases.
//!
//! Every polynomial handled here is a difference of two monomials in the
//! cell variables `p0, ..., p(m-1)`. S-polynomials and reduction steps of
//! such differences are again differences, so the engine works purely on
//! pairs of exponent vectors; a reduction that would produce a non-unit
//! coefficient is structurally impossible and the only degenerate case,
//! both monomials becoming equal, is the zero polynomial.
//!
//! The toric pipeline follows the lattice-ideal route: an integer kernel
//! basis gives a sub-ideal of the toric ideal, saturation by each cell
//! variable in turn (a graded reverse lexicographic basis with that
//! variable cheapest, then dividing out the shared power) grows it to the
//! full toric ideal, and degree-by-degree pruning of the final basis
//! yields a minimal generating set, the Markov basis.
//!
//! Saturation by the cheapest-variable trick is complete for ideals that
//! are homogeneous in total degree; matrices built by this crate always
//! have constant column sums, which guarantees that.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::cmp::Ordering;
use core::fmt;

use num_traits::{Signed, ToPrimitive};

use crate::lattice::KernelLattice;
use crate::model::{ModelMatrix, StateSpace};

/// Errors from binomial and basis construction and from contract
/// violations of the ideal operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdealError {
    /// Plus and minus exponent vectors must have the same length.
    LengthMismatch { plus: usize, minus: usize },
    /// A binomial's exponent vectors must match the basis dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// Equal monomials form the zero polynomial, not a binomial.
    EqualMonomials,
    /// Lowest-terms binomials may not share a variable between terms.
    OverlappingSupports { variable: usize },
    /// The operation needs a Groebner basis.
    NotGroebner,
    /// The operation needs a saturated basis.
    NotSaturated,
    /// A permutation must mention each variable exactly once.
    BadPermutation,
    /// State index out of range for the given dimension.
    StateOutOfRange { state: usize, dimension: usize },
    /// The computation hit a configured resource limit.
    Truncated(Truncation),
}

/// How a budgeted computation was cut short.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// A critical pair exceeded the configured degree limit.
    DegreeExceeded { limit: u32 },
    /// The caller-supplied stop callback fired.
    Stopped,
}

impl fmt::Display for IdealError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdealError::LengthMismatch { plus, minus } => {
                write!(f, "exponent vectors differ in length ({plus} vs {minus})")
            }
            IdealError::DimensionMismatch { expected, got } => {
                write!(f, "binomial over {got} variables, basis expects {expected}")
            }
            IdealError::EqualMonomials => write!(f, "plus and minus monomials are equal"),
            IdealError::OverlappingSupports { variable } => {
                write!(f, "both terms contain variable {variable}; not in lowest terms")
            }
            IdealError::NotGroebner => write!(f, "basis is not a Groebner basis"),
            IdealError::NotSaturated => write!(f, "basis is not saturated"),
            IdealError::BadPermutation => write!(f, "not a permutation of the variables"),
            IdealError::StateOutOfRange { state, dimension } => {
                write!(f, "state index {state} out of range for dimension {dimension}")
            }
            IdealError::Truncated(t) => match t {
                Truncation::DegreeExceeded { limit } => {
                    write!(f, "computation truncated: degree limit {limit} exceeded")
                }
                Truncation::Stopped => write!(f, "computation truncated: budget exhausted"),
            },
        }
    }
}

impl core::error::Error for IdealError {}

/// Resource limits for the Groebner pipeline.
///
/// `max_degree` truncates once every remaining critical pair exceeds the
/// limit; `stop` is polled periodically so a caller with a clock can
/// impose a wall-time budget without this crate needing one.
#[derive(Default)]
pub struct Budget {
    max_degree: Option<u32>,
    stop: Option<Box<dyn Fn() -> bool>>,
}

impl Budget {
    /// No limits.
    pub fn unlimited() -> Self {
        Budget::default()
    }

    /// Truncate when a critical pair's lcm degree exceeds `limit`.
    pub fn with_max_degree(mut self, limit: u32) -> Self {
        self.max_degree = Some(limit);
        self
    }

    /// Truncate when `stop` returns true; polled between pair reductions.
    pub fn with_stop(mut self, stop: Box<dyn Fn() -> bool>) -> Self {
        self.stop = Some(stop);
        self
    }

    fn check_degree(&self, degree: u64) -> Result<(), Truncation> {
        match self.max_degree {
            Some(limit) if degree > u64::from(limit) => {
                Err(Truncation::DegreeExceeded { limit })
            }
            _ => Ok(()),
        }
    }

    fn check_stop(&self) -> Result<(), Truncation> {
        match &self.stop {
            Some(stop) if stop() => Err(Truncation::Stopped),
            _ => Ok(()),
        }
    }
}

impl fmt::Debug for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Budget")
            .field("max_degree", &self.max_degree)
            .field("has_stop", &self.stop.is_some())
            .finish()
    }
}

/// A graded reverse lexicographic monomial order with a variable
/// permutation.
///
/// `perm[0]` is the most expensive variable, `perm[m-1]` the cheapest.
/// Monomials compare first by total degree; ties go to the monomial with
/// the smaller exponent at the cheapest position where they differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialOrder {
    perm: Vec<usize>,
}

impl MonomialOrder {
    /// The default order: variables in column order, last cheapest.
    pub fn grevlex(num_vars: usize) -> Self {
        MonomialOrder {
            perm: (0..num_vars).collect(),
        }
    }

    /// Column order with `variable` moved to the cheapest position.
    pub fn grevlex_cheapest(num_vars: usize, variable: usize) -> Self {
        let mut perm: Vec<usize> = (0..num_vars).filter(|&v| v != variable).collect();
        perm.push(variable);
        MonomialOrder { perm }
    }

    /// An explicit permutation, most expensive variable first.
    pub fn from_permutation(perm: Vec<usize>) -> Result<Self, IdealError> {
        let mut seen = vec![false; perm.len()];
        for &v in &perm {
            if v >= perm.len() || seen[v] {
                return Err(IdealError::BadPermutation);
            }
            seen[v] = true;
        }
        Ok(MonomialOrder { perm })
    }

    /// Number of variables the order ranges over.
    pub fn num_vars(&self) -> usize {
        self.perm.len()
    }

    /// Compares exponent vectors; `Greater` means the first leads.
    pub fn cmp_exponents(&self, a: &[u32], b: &[u32]) -> Ordering {
        let da: u64 = a.iter().map(|&e| u64::from(e)).sum();
        let db: u64 = b.iter().map(|&e| u64::from(e)).sum();
        match da.cmp(&db) {
            Ordering::Equal => {}
            unequal => return unequal,
        }
        for &v in self.perm.iter().rev() {
            match a[v].cmp(&b[v]) {
                Ordering::Equal => {}
                // Smaller exponent at the cheapest differing variable wins.
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
            }
        }
        Ordering::Equal
    }
}

/// A difference of two monomials, `p^plus - p^minus`.
///
/// The public constructors enforce lowest terms (disjoint supports) and
/// orient the pair; bases produced by the engine keep the orientation of
/// their own monomial order, and intermediate Groebner bases of
/// unsaturated ideals may legitimately share support between the terms.
/// Saturated bases and Markov bases are always in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Binomial {
    plus: Vec<u32>,
    minus: Vec<u32>,
}

impl Binomial {
    /// Builds a lowest-terms binomial; the lexicographically larger
    /// exponent vector becomes the plus term.
    pub fn new(plus: Vec<u32>, minus: Vec<u32>) -> Result<Self, IdealError> {
        if plus.len() != minus.len() {
            return Err(IdealError::LengthMismatch {
                plus: plus.len(),
                minus: minus.len(),
            });
        }
        if plus == minus {
            return Err(IdealError::EqualMonomials);
        }
        if let Some(variable) = (0..plus.len()).find(|&i| plus[i] > 0 && minus[i] > 0) {
            return Err(IdealError::OverlappingSupports { variable });
        }
        Ok(if plus >= minus {
            Binomial { plus, minus }
        } else {
            Binomial {
                plus: minus,
                minus: plus,
            }
        })
    }

    /// Builds a binomial from state index lists; repeats raise exponents.
    pub fn from_states(
        dimension: usize,
        plus_states: &[usize],
        minus_states: &[usize],
    ) -> Result<Self, IdealError> {
        let mut plus = vec![0u32; dimension];
        let mut minus = vec![0u32; dimension];
        for &s in plus_states {
            if s >= dimension {
                return Err(IdealError::StateOutOfRange {
                    state: s,
                    dimension,
                });
            }
            plus[s] += 1;
        }
        for &s in minus_states {
            if s >= dimension {
                return Err(IdealError::StateOutOfRange {
                    state: s,
                    dimension,
                });
            }
            minus[s] += 1;
        }
        Binomial::new(plus, minus)
    }

    pub(crate) fn raw(plus: Vec<u32>, minus: Vec<u32>) -> Self {
        debug_assert_eq!(plus.len(), minus.len());
        debug_assert_ne!(plus, minus);
        Binomial { plus, minus }
    }

    /// Exponents of the plus term.
    pub fn plus(&self) -> &[u32] {
        &self.plus
    }

    /// Exponents of the minus term.
    pub fn minus(&self) -> &[u32] {
        &self.minus
    }

    /// Number of variables.
    pub fn dimension(&self) -> usize {
        self.plus.len()
    }

    /// Total degree of the plus term.
    pub fn degree(&self) -> u32 {
        self.plus.iter().sum()
    }

    /// True when no variable occurs in both terms.
    pub fn has_disjoint_supports(&self) -> bool {
        self.plus
            .iter()
            .zip(&self.minus)
            .all(|(&a, &b)| a == 0 || b == 0)
    }

    /// The same binomial with plus and minus swapped.
    fn flipped(&self) -> Self {
        Binomial {
            plus: self.minus.clone(),
            minus: self.plus.clone(),
        }
    }

    /// Orients so the plus term leads under `order`.
    fn oriented(&self, order: &MonomialOrder) -> Self {
        match order.cmp_exponents(&self.plus, &self.minus) {
            Ordering::Less => self.flipped(),
            _ => self.clone(),
        }
    }
}

/// A list of binomials with the order they are oriented under and flags
/// recording what has been established about the list.
///
/// The list is sorted by (degree, plus exponents, minus exponents) and
/// free of duplicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealBasis {
    binomials: Vec<Binomial>,
    order: MonomialOrder,
    groebner: bool,
    saturated: bool,
    minimalized: bool,
}

impl IdealBasis {
    /// Builds a plain generating set; all flags start false.
    pub fn new(binomials: Vec<Binomial>, order: MonomialOrder) -> Result<Self, IdealError> {
        for b in &binomials {
            if b.dimension() != order.num_vars() {
                return Err(IdealError::DimensionMismatch {
                    expected: order.num_vars(),
                    got: b.dimension(),
                });
            }
        }
        Ok(IdealBasis::assemble(binomials, order, false, false, false))
    }

    fn assemble(
        binomials: Vec<Binomial>,
        order: MonomialOrder,
        groebner: bool,
        saturated: bool,
        minimalized: bool,
    ) -> Self {
        let mut oriented: Vec<Binomial> =
            binomials.iter().map(|b| b.oriented(&order)).collect();
        oriented.sort_by(|a, b| {
            (a.degree(), &a.plus, &a.minus).cmp(&(b.degree(), &b.plus, &b.minus))
        });
        oriented.dedup();
        IdealBasis {
            binomials: oriented,
            order,
            groebner,
            saturated,
            minimalized,
        }
    }

    /// The binomials in sorted order.
    pub fn binomials(&self) -> &[Binomial] {
        &self.binomials
    }

    /// Number of binomials.
    pub fn len(&self) -> usize {
        self.binomials.len()
    }

    /// True when the basis is empty (the zero ideal).
    pub fn is_empty(&self) -> bool {
        self.binomials.is_empty()
    }

    /// The monomial order the basis is oriented under.
    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    /// True when the list is known to be a Groebner basis.
    pub fn is_groebner(&self) -> bool {
        self.groebner
    }

    /// True when the list generates a saturated (toric) ideal.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    /// True when the list is a minimal generating set.
    pub fn is_minimalized(&self) -> bool {
        self.minimalized
    }

    /// Count of binomials per total degree of the plus term.
    pub fn degree_histogram(&self) -> BTreeMap<u32, usize> {
        let mut histogram = BTreeMap::new();
        for b in &self.binomials {
            *histogram.entry(b.degree()).or_insert(0) += 1;
        }
        histogram
    }

    /// Fully reduces a binomial modulo this basis.
    ///
    /// Returns `None` when the binomial reduces to zero. Requires the
    /// basis to be a Groebner basis; the remainder is then unique. The
    /// remainder need not be in lowest terms.
    pub fn normal_form(&self, b: &Binomial) -> Result<Option<Binomial>, IdealError> {
        if !self.groebner {
            return Err(IdealError::NotGroebner);
        }
        if b.dimension() != self.order.num_vars() {
            return Err(IdealError::DimensionMismatch {
                expected: self.order.num_vars(),
                got: b.dimension(),
            });
        }
        let engine = Engine::from_basis(self);
        Ok(engine
            .reduce(Element::from_binomial(b, &self.order))
            .map(|e| e.into_binomial()))
    }
}

/// One engine element: a difference of monomials with the leading term
/// first under the engine's order, degrees and support cached.
#[derive(Debug, Clone)]
struct Element {
    plus: Vec<u32>,
    minus: Vec<u32>,
    degree: u64,
    tail_degree: u64,
    /// Support bits of the leading term, for cheap divisor rejection.
    mask: u64,
    /// First variable in the support of the leading term; used as a
    /// constant-time reject in divisor scans.
    first_var: usize,
}

fn total_degree(a: &[u32]) -> u64 {
    a.iter().map(|&e| u64::from(e)).sum()
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x <= y)
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x == 0 || y == 0)
}

fn lcm_exponents(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(&x, &y)| x.max(y)).collect()
}

fn lcm_degree_of(a: &[u32], b: &[u32]) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| u64::from(x.max(y))).sum()
}

/// Support bits of the first 64 variables; a sound may-divide prefilter
/// for any variable count, since dividing requires support containment.
fn support_mask(a: &[u32]) -> u64 {
    let mut mask = 0u64;
    for (i, &e) in a.iter().take(64).enumerate() {
        if e > 0 {
            mask |= 1u64 << i;
        }
    }
    mask
}

impl Element {
    fn new(plus: Vec<u32>, minus: Vec<u32>, order: &MonomialOrder) -> Option<Self> {
        if plus == minus {
            return None;
        }
        let (plus, minus) = match order.cmp_exponents(&plus, &minus) {
            Ordering::Less => (minus, plus),
            _ => (plus, minus),
        };
        let degree = total_degree(&plus);
        let tail_degree = total_degree(&minus);
        let mask = support_mask(&plus);
        let first_var = plus.iter().position(|&e| e > 0).unwrap_or(0);
        Some(Element {
            plus,
            minus,
            degree,
            tail_degree,
            mask,
            first_var,
        })
    }

    fn from_binomial(b: &Binomial, order: &MonomialOrder) -> Self {
        Element::new(b.plus.clone(), b.minus.clone(), order)
            .expect("binomials have distinct monomials")
    }

    fn into_binomial(self) -> Binomial {
        Binomial::raw(self.plus, self.minus)
    }
}

/// Index of the (i, j) pair, i < j, in a flat triangular bit table.
fn pair_slot(i: u32, j: u32) -> usize {
    debug_assert!(i < j);
    let (i, j) = (i as usize, j as usize);
    j * (j - 1) / 2 + i
}

/// The Buchberger engine. Normal selection strategy: pending critical
/// pairs are processed in increasing lcm degree, first-in-first-out
/// within a degree. The product criterion is applied at insertion, the
/// chain criterion at removal. An element whose leading term a newer
/// element divides is retired: it stops reducing and pairing, while its
/// already queued pairs keep the chain bookkeeping sound.
struct Engine {
    order: MonomialOrder,
    basis: Vec<Element>,
    alive: Vec<bool>,
    queue: BTreeMap<u64, VecDeque<(u32, u32)>>,
    /// Triangular bitset over pairs, indexed by `pair_slot`.
    done: Vec<u64>,
    polls: u32,
}

impl Engine {
    fn new(order: MonomialOrder) -> Self {
        Engine {
            order,
            basis: Vec::new(),
            alive: Vec::new(),
            queue: BTreeMap::new(),
            done: Vec::new(),
            polls: 0,
        }
    }

    fn from_basis(basis: &IdealBasis) -> Self {
        let mut engine = Engine::new(basis.order.clone());
        engine.basis = basis
            .binomials
            .iter()
            .map(|b| Element::from_binomial(b, &basis.order))
            .collect();
        engine.alive = vec![true; engine.basis.len()];
        engine
    }

    fn pair_done(&self, a: u32, b: u32) -> bool {
        let slot = pair_slot(a.min(b), a.max(b));
        self.done
            .get(slot / 64)
            .is_some_and(|w| w >> (slot % 64) & 1 == 1)
    }

    fn mark_done(&mut self, a: u32, b: u32) {
        let slot = pair_slot(a.min(b), a.max(b));
        let word = slot / 64;
        if word >= self.done.len() {
            self.done.resize(word + 1, 0);
        }
        self.done[word] |= 1 << (slot % 64);
    }

    /// Finds the lowest-index live basis element whose leading term
    /// divides `target`, or `None`.
    fn find_reducer(&self, target: &[u32], target_mask: u64, target_degree: u64) -> Option<usize> {
        (0..self.basis.len()).find(|&k| {
            if !self.alive[k] {
                return false;
            }
            let e = &self.basis[k];
            e.mask & !target_mask == 0
                && e.degree <= target_degree
                && target[e.first_var] >= e.plus[e.first_var]
                && divides(&e.plus, target)
        })
    }

    /// Fully reduces an element: leading term first, then the tail, until
    /// both monomials are irreducible. `None` means it reduced to zero.
    fn reduce(&self, element: Element) -> Option<Element> {
        let mut plus = element.plus;
        let mut minus = element.minus;
        let mut degree = element.degree;
        loop {
            let Some(k) = self.find_reducer(&plus, support_mask(&plus), degree) else {
                break;
            };
            let reducer = &self.basis[k];
            for i in 0..plus.len() {
                plus[i] = plus[i] - reducer.plus[i] + reducer.minus[i];
            }
            degree = degree - reducer.degree + reducer.tail_degree;
            if plus == minus {
                return None;
            }
            // The rewrite shrank the leading monomial; it may have fallen
            // below the other term.
            if self.order.cmp_exponents(&plus, &minus) == Ordering::Less {
                core::mem::swap(&mut plus, &mut minus);
                degree = total_degree(&plus);
            }
        }
        let mut degree = total_degree(&minus);
        loop {
            let Some(k) = self.find_reducer(&minus, support_mask(&minus), degree) else {
                break;
            };
            let reducer = &self.basis[k];
            for i in 0..minus.len() {
                minus[i] = minus[i] - reducer.plus[i] + reducer.minus[i];
            }
            degree = degree - reducer.degree + reducer.tail_degree;
            if plus == minus {
                return None;
            }
            // Tail rewrites strictly decrease, so plus keeps leading.
        }
        Element::new(plus, minus, &self.order)
    }

    /// Adds a reduced element, queues its critical pairs against the live
    /// basis, and retires elements whose leading terms it divides.
    fn add(&mut self, element: Element) {
        let j = self.basis.len() as u32;
        for i in 0..self.basis.len() {
            if !self.alive[i] {
                continue;
            }
            let other = &self.basis[i];
            let i = i as u32;
            if coprime(&other.plus, &element.plus) {
                // Product criterion: the S-polynomial of coprime leading
                // terms reduces to zero; mark handled.
                self.mark_done(i, j);
                continue;
            }
            let lcm_degree = lcm_degree_of(&other.plus, &element.plus);
            self.queue.entry(lcm_degree).or_default().push_back((i, j));
        }
        for k in 0..self.basis.len() {
            let old = &self.basis[k];
            if self.alive[k]
                && element.mask & !old.mask == 0
                && element.degree <= old.degree
                && divides(&element.plus, &old.plus)
            {
                self.alive[k] = false;
            }
        }
        self.basis.push(element);
        self.alive.push(true);
    }

    /// S-polynomial of basis elements `i` and `j`; `None` when zero.
    fn s_polynomial(&self, i: usize, j: usize) -> Option<Element> {
        let f = &self.basis[i];
        let g = &self.basis[j];
        let lcm = lcm_exponents(&f.plus, &g.plus);
        let a: Vec<u32> = (0..lcm.len())
            .map(|k| g.minus[k] + lcm[k] - g.plus[k])
            .collect();
        let b: Vec<u32> = (0..lcm.len())
            .map(|k| f.minus[k] + lcm[k] - f.plus[k])
            .collect();
        Element::new(a, b, &self.order)
    }

    /// Chain criterion: pair (i, j) is redundant when some other leading
    /// term divides their lcm and both sub-pairs were already handled, or
    /// when both sub-pair lcms are strictly smaller. Strictly smaller
    /// sub-lcms run at lower degree, hence earlier under this selection.
    fn chain_redundant(&self, i: u32, j: u32, lcm: &[u32], lcm_mask: u64, lcm_degree: u64) -> bool {
        let fi = &self.basis[i as usize].plus;
        let fj = &self.basis[j as usize].plus;
        (0..self.basis.len() as u32).any(|k| {
            if k == i || k == j {
                return false;
            }
            let e = &self.basis[k as usize];
            if e.mask & !lcm_mask != 0
                || e.degree > lcm_degree
                || lcm[e.first_var] < e.plus[e.first_var]
                || !divides(&e.plus, lcm)
            {
                return false;
            }
            if self.pair_done(i, k) && self.pair_done(j, k) {
                return true;
            }
            // Both sub-lcms divide lcm(i, j), so degree comparison is
            // equality comparison.
            lcm_degree_of(&e.plus, fi) < lcm_degree && lcm_degree_of(&e.plus, fj) < lcm_degree
        })
    }

    /// Processes pending pairs with lcm degree at most `limit`.
    fn process_up_to(&mut self, limit: u64, budget: &Budget) -> Result<(), Truncation> {
        budget.check_stop()?;
        while let Some((&degree, _)) = self.queue.first_key_value() {
            if degree > limit {
                return Ok(());
            }
            budget.check_degree(degree)?;
            self.polls += 1;
            if self.polls % 256 == 0 {
                budget.check_stop()?;
            }
            let bucket = self.queue.get_mut(&degree).expect("bucket exists");
            let (i, j) = bucket.pop_front().expect("bucket not empty");
            if bucket.is_empty() {
                self.queue.remove(&degree);
            }
            self.mark_done(i, j);
            let lcm = lcm_exponents(
                &self.basis[i as usize].plus,
                &self.basis[j as usize].plus,
            );
            let lcm_mask = support_mask(&lcm);
            if self.chain_redundant(i, j, &lcm, lcm_mask, degree) {
                continue;
            }
            if let Some(spoly) = self.s_polynomial(i as usize, j as usize) {
                if let Some(remainder) = self.reduce(spoly) {
                    self.add(remainder);
                }
            }
        }
        Ok(())
    }

    fn process_all(&mut self, budget: &Budget) -> Result<(), Truncation> {
        self.process_up_to(u64::MAX, budget)
    }

    /// Minimal then reduced basis: drop elements whose leading term is
    /// divisible by another's, then put every tail in normal form.
    fn interreduce(mut self) -> Vec<Element> {
        let mut order_of: Vec<usize> = (0..self.basis.len()).collect();
        order_of.sort_by(|&a, &b| {
            match self
                .order
                .cmp_exponents(&self.basis[a].plus, &self.basis[b].plus)
            {
                Ordering::Equal => a.cmp(&b),
                unequal => unequal,
            }
        });
        let mut kept: Vec<Element> = Vec::new();
        for idx in order_of {
            let candidate = &self.basis[idx];
            let redundant = kept.iter().any(|e| {
                e.mask & !candidate.mask == 0
                    && e.degree <= candidate.degree
                    && candidate.plus[e.first_var] >= e.plus[e.first_var]
                    && divides(&e.plus, &candidate.plus)
            });
            if !redundant {
                kept.push(candidate.clone());
            }
        }
        self.basis = kept;
        let reducers = Engine {
            order: self.order.clone(),
            basis: self.basis.clone(),
            alive: vec![true; self.basis.len()],
            queue: BTreeMap::new(),
            done: Vec::new(),
            polls: 0,
        };
        let mut reduced = Vec::with_capacity(self.basis.len());
        for element in &self.basis {
            let mut minus = element.minus.clone();
            loop {
                let degree = total_degree(&minus);
                // The element's own leading term cannot divide its tail.
                let Some(k) = reducers.find_reducer(&minus, support_mask(&minus), degree) else {
                    break;
                };
                let reducer = &reducers.basis[k];
                for i in 0..minus.len() {
                    minus[i] = minus[i] - reducer.plus[i] + reducer.minus[i];
                }
            }
            debug_assert_ne!(element.plus, minus);
            reduced.push(
                Element::new(element.plus.clone(), minus, &self.order)
                    .expect("tail reduction keeps monomials distinct"),
            );
        }
        reduced
    }
}

fn elements_to_basis(
    elements: Vec<Element>,
    order: MonomialOrder,
    groebner: bool,
    saturated: bool,
    minimalized: bool,
) -> IdealBasis {
    let binomials = elements.into_iter().map(Element::into_binomial).collect();
    IdealBasis::assemble(binomials, order, groebner, saturated, minimalized)
}

/// The sub-ideal generators coming from a kernel lattice basis: each
/// kernel vector splits into its positive and negative parts.
pub fn lattice_to_binomials(kernel: &KernelLattice) -> IdealBasis {
    let m = kernel.ambient_dim();
    let binomials: Vec<Binomial> = kernel
        .basis()
        .iter()
        .map(|v| {
            let mut plus = vec![0u32; m];
            let mut minus = vec![0u32; m];
            for (i, entry) in v.iter().enumerate() {
                let magnitude = entry
                    .abs()
                    .to_u32()
                    .expect("kernel entry exceeds supported exponent range");
                if entry.is_positive() {
                    plus[i] = magnitude;
                } else if entry.is_negative() {
                    minus[i] = magnitude;
                }
            }
            Binomial::raw(plus, minus)
        })
        .collect();
    IdealBasis::assemble(binomials, MonomialOrder::grevlex(m), false, false, false)
}

/// The reduced Groebner basis of the ideal generated by `basis`, under
/// `order`, within `budget`.
pub fn buchberger_budgeted(
    basis: &IdealBasis,
    order: MonomialOrder,
    budget: &Budget,
) -> Result<IdealBasis, IdealError> {
    let mut engine = Engine::new(order.clone());
    for b in basis.binomials() {
        let element = Element::from_binomial(b, &order);
        if let Some(reduced) = engine.reduce(element) {
            engine.add(reduced);
            engine.process_all(budget).map_err(IdealError::Truncated)?;
        }
    }
    let elements = engine.interreduce();
    Ok(elements_to_basis(
        elements,
        order,
        true,
        basis.is_saturated(),
        false,
    ))
}

/// The reduced Groebner basis of the ideal generated by `basis`.
pub fn buchberger(basis: &IdealBasis, order: MonomialOrder) -> IdealBasis {
    buchberger_budgeted(basis, order, &Budget::unlimited())
        .expect("unlimited budget cannot truncate")
}

/// Saturates the ideal by the product of all cell variables, within
/// `budget`.
///
/// For each variable in column order a Groebner basis is computed under
/// the graded reverse lexicographic order with that variable cheapest,
/// and every monomial factor shared by both terms is divided out of
/// every element. The result is returned as a reduced Groebner basis
/// under the default order, flagged saturated.
pub fn saturate_budgeted(basis: &IdealBasis, budget: &Budget) -> Result<IdealBasis, IdealError> {
    let m = basis.order().num_vars();
    let mut current = basis.clone();
    for variable in 0..m {
        let order = MonomialOrder::grevlex_cheapest(m, variable);
        let groebner = buchberger_budgeted(&current, order, budget)?;
        let divided: Vec<Binomial> = groebner
            .binomials()
            .iter()
            .map(|b| {
                let mut plus = b.plus.clone();
                let mut minus = b.minus.clone();
                // Clearing every shared power, not only this pass's
                // variable, keeps each element inside the saturated ideal
                // while the generated ideal still covers this variable's
                // quotient, so the sweep ends at the same place with
                // smaller intermediate elements.
                for v in 0..m {
                    let shared = plus[v].min(minus[v]);
                    plus[v] -= shared;
                    minus[v] -= shared;
                }
                Binomial::raw(plus, minus)
            })
            .collect();
        // Dividing both terms by a common monomial preserves orientation
        // under any monomial order, though not Groebner-ness.
        current = IdealBasis::assemble(divided, groebner.order().clone(), false, false, false);
    }
    let reduced = buchberger_budgeted(&current, MonomialOrder::grevlex(m), budget)?;
    Ok(IdealBasis {
        saturated: true,
        ..reduced
    })
}

/// Saturates the ideal by the product of all cell variables.
pub fn saturate(basis: &IdealBasis) -> IdealBasis {
    saturate_budgeted(basis, &Budget::unlimited()).expect("unlimited budget cannot truncate")
}

/// Prunes a saturated Groebner basis to a minimal generating set, within
/// `budget`.
///
/// Elements are taken in increasing degree; one is dropped exactly when
/// it lies in the ideal generated by all smaller-degree elements plus the
/// retained elements of its own degree. Membership at degree d is decided
/// by a Groebner basis truncated at degree d, which is valid because the
/// ideals here are homogeneous.
pub fn minimalize_budgeted(basis: &IdealBasis, budget: &Budget) -> Result<IdealBasis, IdealError> {
    if !basis.is_groebner() {
        return Err(IdealError::NotGroebner);
    }
    if !basis.is_saturated() {
        return Err(IdealError::NotSaturated);
    }
    let order = basis.order().clone();
    let mut engine = Engine::new(order.clone());
    let mut retained: Vec<Binomial> = Vec::new();
    let mut dropped = false;
    for b in basis.binomials() {
        let element = Element::from_binomial(b, &order);
        engine
            .process_up_to(element.degree, budget)
            .map_err(IdealError::Truncated)?;
        match engine.reduce(element) {
            None => dropped = true,
            Some(_) => {
                engine.add(Element::from_binomial(b, &order));
                retained.push(b.clone());
            }
        }
    }
    Ok(IdealBasis::assemble(
        retained,
        order,
        basis.is_groebner() && !dropped,
        basis.is_saturated(),
        true,
    ))
}

/// Prunes a saturated Groebner basis to a minimal generating set.
pub fn minimalize(basis: &IdealBasis) -> Result<IdealBasis, IdealError> {
    minimalize_budgeted(basis, &Budget::unlimited())
}

/// The Markov basis (minimal toric ideal generators) of a model matrix,
/// within `budget`.
///
/// Pipeline: integer kernel, lattice binomials, Groebner basis,
/// saturation by every cell variable, degree-by-degree minimalization.
pub fn toric_markov_basis_budgeted(
    matrix: &ModelMatrix,
    budget: &Budget,
) -> Result<IdealBasis, IdealError> {
    let kernel = crate::lattice::integer_kernel(matrix);
    let generators = lattice_to_binomials(&kernel);
    let order = MonomialOrder::grevlex(matrix.ncols());
    let groebner = buchberger_budgeted(&generators, order, budget)?;
    let saturated = saturate_budgeted(&groebner, budget)?;
    minimalize_budgeted(&saturated, budget)
}

/// The Markov basis (minimal toric ideal generators) of a model matrix.
pub fn toric_markov_basis(matrix: &ModelMatrix) -> IdealBasis {
    toric_markov_basis_budgeted(matrix, &Budget::unlimited())
        .expect("unlimited budget cannot truncate")
}

/// Renders a binomial as `+ p0100 p0111 - p0101 p0110`, factors in state
/// order, exponents above one shown as repeated factors.
pub fn render_binomial(
    space: &StateSpace,
    binomial: &Binomial,
) -> Result<String, crate::model::ModelError> {
    if binomial.dimension() != space.num_states() {
        return Err(crate::model::ModelError::StateLengthMismatch {
            expected: space.num_states(),
            got: binomial.dimension(),
        });
    }
    let mut out = String::from("+");
    for (index, &exponent) in binomial.plus().iter().enumerate() {
        for _ in 0..exponent {
            out.push_str(" p");
            out.push_str(&space.state_label(index)?);
        }
    }
    out.push_str(" -");
    for (index, &exponent) in binomial.minus().iter().enumerate() {
        for _ in 0..exponent {
            out.push_str(" p");
            out.push_str(&space.state_label(index)?);
        }
    }
    Ok(out)
}

/// Formats a degree histogram as `deg2=8 deg4=8`.
pub fn render_histogram(histogram: &BTreeMap<u32, usize>) -> String {
    let parts: Vec<String> = histogram
        .iter()
        .map(|(degree, count)| format!("deg{degree}={count}"))
        .collect();
    parts.join(" ")
}
