//! Acceptance sweep. One test per headline guarantee of the library,
//! each ending in a single PASS line (visible with `--nocapture`); a
//! panic before that line is the corresponding FAIL.
//!
//! Cross-checks deliberately avoid the code paths they certify: expected
//! bases are typed out state by state, matrix rank is recomputed with a
//! test-side rational elimination, and ideal membership of monomial
//! multiples is decided by a test-side rewriting loop.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use factoric_core::dist::{classify, normalize, phi, vanishes};
use factoric_core::fiber::{connectivity_check, sufficient_statistics, Table};
use factoric_core::ideal::{
    buchberger, toric_markov_basis, toric_markov_basis_budgeted, Budget, IdealError,
};
use factoric_core::indep::{cpr, statement_binomials, pairwise_ideal, CpdSpec, IndependenceStatement};
use factoric_core::lattice::{integer_kernel, matrix_times};
use factoric_core::model::{graph_matrix, loglinear_matrix, GeneratorSet};
use factoric_core::{
    pairs_model, prop10_binomial, verify_kernel_membership, Binomial, Distribution,
    FactorizationStatus, IdealBasis, ModelMatrix, MonomialOrder, ParameterVector, StateSpace,
    UndirectedGraph,
};

fn four_cycle() -> (StateSpace, UndirectedGraph, ModelMatrix) {
    let space = StateSpace::binary(&["X1", "X2", "X3", "X4"]).expect("binary space");
    let graph = UndirectedGraph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).expect("cycle");
    let matrix = graph_matrix(&space, &graph).expect("matrix");
    (space, graph, matrix)
}

fn binom(space: &StateSpace, plus: &[&str], minus: &[&str]) -> Binomial {
    let index = |labels: &[&str]| -> Vec<usize> {
        labels
            .iter()
            .map(|l| space.index_of_label(l).expect("known label"))
            .collect()
    };
    Binomial::from_states(space.num_states(), &index(plus), &index(minus)).expect("valid binomial")
}

/// The eight quadratic moves of the binary four-cycle.
fn known_quadrics(space: &StateSpace) -> Vec<Binomial> {
    [
        (["1011", "1110"], ["1010", "1111"]),
        (["0111", "1101"], ["0101", "1111"]),
        (["1001", "1100"], ["1000", "1101"]),
        (["0110", "1100"], ["0100", "1110"]),
        (["0011", "1001"], ["0001", "1011"]),
        (["0011", "0110"], ["0010", "0111"]),
        (["0001", "0100"], ["0000", "0101"]),
        (["0010", "1000"], ["0000", "1010"]),
    ]
    .iter()
    .map(|(p, m)| binom(space, p, m))
    .collect()
}

/// The eight quartic moves of the binary four-cycle.
fn known_quartics(space: &StateSpace) -> Vec<Binomial> {
    [
        (["0100", "0111", "1001", "1010"], ["0101", "0110", "1000", "1011"]),
        (["0010", "0101", "1011", "1100"], ["0011", "0100", "1010", "1101"]),
        (["0001", "0110", "1010", "1101"], ["0010", "0101", "1001", "1110"]),
        (["0001", "0111", "1010", "1100"], ["0011", "0101", "1000", "1110"]),
        (["0000", "0011", "1101", "1110"], ["0001", "0010", "1100", "1111"]),
        (["0000", "0111", "1001", "1110"], ["0001", "0110", "1000", "1111"]),
        (["0000", "0111", "1011", "1100"], ["0011", "0100", "1000", "1111"]),
        (["0000", "0110", "1011", "1101"], ["0010", "0100", "1001", "1111"]),
    ]
    .iter()
    .map(|(p, m)| binom(space, p, m))
    .collect()
}

fn random_parameters(rng: &mut ChaCha8Rng, len: usize) -> ParameterVector {
    let values = (0..len)
        .map(|_| {
            let num = 1 + rng.next_u64() % 16;
            let den = 1 + rng.next_u64() % 16;
            BigRational::new(BigInt::from(num), BigInt::from(den))
        })
        .collect();
    ParameterVector::new(values).expect("positive parameters")
}

fn image_point(space: &StateSpace, matrix: &ModelMatrix, rng: &mut ChaCha8Rng) -> Distribution {
    let t = random_parameters(rng, matrix.nrows());
    let values = phi(matrix, &t).expect("dimensions agree");
    normalize(space, &values).expect("image points are positive")
}

/// Matrix rank over the rationals by plain Gaussian elimination; kept
/// independent of the library's integer kernel code.
fn rational_rank(matrix: &ModelMatrix) -> usize {
    let mut rows: Vec<Vec<BigRational>> = (0..matrix.nrows())
        .map(|i| {
            matrix
                .row(i)
                .iter()
                .map(|&e| BigRational::from_integer(BigInt::from(e)))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..matrix.ncols() {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let scale = rows[rank][col].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][col].is_zero() {
                let factor = &rows[r][col] / &scale;
                for c in col..matrix.ncols() {
                    let delta = &rows[rank][c] * &factor;
                    rows[r][c] = &rows[r][c] - delta;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn exp_divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x <= y)
}

/// Normal form of a monomial under a Groebner basis, by test-side
/// rewriting. Binomial rewrites keep monomials monomial, so a binomial
/// lies in the ideal exactly when its two monomial normal forms agree.
fn monomial_normal_form(gb: &IdealBasis, mut m: Vec<u32>) -> Vec<u32> {
    loop {
        let Some(g) = gb.binomials().iter().find(|g| exp_divides(g.plus(), &m)) else {
            return m;
        };
        for i in 0..m.len() {
            m[i] = m[i] - g.plus()[i] + g.minus()[i];
        }
    }
}

/// All exponent vectors over `num_vars` variables of total degree `d`.
fn monomials_of_degree(num_vars: usize, d: u32) -> Vec<Vec<u32>> {
    fn descend(pos: usize, left: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == current.len() {
            current[pos] = left;
            out.push(current.clone());
            current[pos] = 0;
            return;
        }
        for c in 0..=left {
            current[pos] = c;
            descend(pos + 1, left - c, current, out);
        }
        current[pos] = 0;
    }
    let mut out = Vec::new();
    descend(0, d, &mut vec![0u32; num_vars], &mut out);
    out
}

#[test]
fn binary_four_cycle_basis_is_the_known_sixteen() {
    let (space, _, matrix) = four_cycle();
    let computed = toric_markov_basis(&matrix);
    assert_eq!(computed.len(), 16, "expected 16 minimal generators");
    let histogram = computed.degree_histogram();
    assert_eq!(histogram.get(&2), Some(&8));
    assert_eq!(histogram.get(&4), Some(&8));

    let mut expected = known_quadrics(&space);
    expected.extend(known_quartics(&space));

    let order = MonomialOrder::grevlex(space.num_states());
    let computed_gb = buchberger(&computed, order.clone());
    for b in &expected {
        assert_eq!(
            computed_gb.normal_form(b).expect("same dimension"),
            None,
            "known generator missing from the computed ideal"
        );
    }
    let expected_gb = buchberger(
        &IdealBasis::new(expected, order.clone()).expect("valid basis"),
        order,
    );
    for b in computed.binomials() {
        assert_eq!(
            expected_gb.normal_form(b).expect("same dimension"),
            None,
            "computed generator outside the known ideal"
        );
    }
    println!("PASS - binary four-cycle: 16 generators, histogram deg2=8 deg4=8, both inclusions");
}

#[test]
fn mixed_cardinality_four_cycle_histogram() {
    let space =
        StateSpace::new(&[("X1", 2), ("X2", 2), ("X3", 3), ("X4", 3)]).expect("mixed space");
    let graph = UndirectedGraph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).expect("cycle");
    let matrix = graph_matrix(&space, &graph).expect("matrix");

    let deadline = Instant::now() + Duration::from_secs(3600);
    let budget = Budget::unlimited().with_stop(Box::new(move || Instant::now() >= deadline));
    let basis = match toric_markov_basis_budgeted(&matrix, &budget) {
        Ok(basis) => basis,
        Err(IdealError::Truncated(t)) => panic!("TRUNCATED within the one-hour budget: {t:?}"),
        Err(e) => panic!("unexpected failure: {e:?}"),
    };
    assert_eq!(basis.len(), 300, "expected 300 minimal generators");
    let histogram = basis.degree_histogram();
    assert_eq!(histogram.get(&2), Some(&36));
    assert_eq!(histogram.get(&4), Some(&252));
    assert_eq!(histogram.get(&6), Some(&12));
    assert_eq!(histogram.len(), 3);
    println!("PASS - 2x2x3x3 four-cycle: histogram deg2=36 deg4=252 deg6=12 within budget");
}

#[test]
fn no_three_way_interaction_has_one_quartic_generator() {
    let space = StateSpace::binary(&["X1", "X2", "X3"]).expect("binary space");
    let gens =
        GeneratorSet::new(&space, &[vec![0, 1], vec![0, 2], vec![1, 2]]).expect("pair generators");
    let matrix = loglinear_matrix(&space, &gens).expect("matrix");

    let rank = rational_rank(&matrix);
    assert_eq!(matrix.ncols() - rank, 1, "kernel should be one-dimensional");
    assert_eq!(integer_kernel(&matrix).len(), 1);

    let expected = binom(
        &space,
        &["000", "011", "101", "110"],
        &["001", "010", "100", "111"],
    );
    let u: Vec<BigInt> = expected
        .plus()
        .iter()
        .zip(expected.minus())
        .map(|(&p, &m)| BigInt::from(p) - BigInt::from(m))
        .collect();
    assert!(
        matrix_times(&matrix, &u).iter().all(Zero::is_zero),
        "the quartic must lie in the kernel"
    );

    let markov = toric_markov_basis(&matrix);
    assert_eq!(markov.binomials(), std::slice::from_ref(&expected));
    println!("PASS - no-three-way interaction: kernel dimension 1, basis is the single quartic");
}

#[test]
fn image_points_factor_and_perturbations_do_not() {
    let chain_space = StateSpace::binary(&["X1", "X2", "X3"]).expect("binary space");
    let chain_graph = UndirectedGraph::new(3, &[(0, 1), (1, 2)]).expect("chain");
    let chain_matrix = graph_matrix(&chain_space, &chain_graph).expect("matrix");
    let chain_basis = toric_markov_basis(&chain_matrix);

    let (space, _, matrix) = four_cycle();
    let basis = toric_markov_basis(&matrix);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let p = image_point(&chain_space, &chain_matrix, &mut rng);
        let verdict = classify(&p, &chain_matrix, &chain_basis).expect("classify");
        assert_eq!(verdict.status(), FactorizationStatus::Factors);
    }
    for _ in 0..100 {
        let p = image_point(&space, &matrix, &mut rng);
        let verdict = classify(&p, &matrix, &basis).expect("classify");
        assert_eq!(verdict.status(), FactorizationStatus::Factors);
    }

    // A point of the variety whose support is not nice: uniform on an
    // eight-state arc of the cycle's state graph.
    let arc = ["0000", "0001", "0011", "0111", "1000", "1100", "1110", "1111"];
    let eighth = BigRational::new(BigInt::one(), BigInt::from(8));
    let mut probs = vec![BigRational::zero(); space.num_states()];
    for label in arc {
        probs[space.index_of_label(label).expect("label")] = eighth.clone();
    }
    let limit_point = Distribution::new(&space, probs).expect("distribution");
    let verdict = classify(&limit_point, &matrix, &basis).expect("classify");
    assert_eq!(verdict.status(), FactorizationStatus::LimitOnly);
    assert!(!verdict.is_nice());

    // A perturbation of the uniform distribution leaves the variety and
    // yields a failing binomial witness.
    let mut probs = vec![BigRational::new(BigInt::one(), BigInt::from(16)); space.num_states()];
    probs[space.index_of_label("0000").expect("label")] =
        BigRational::new(BigInt::from(29), BigInt::from(400));
    probs[space.index_of_label("1111").expect("label")] =
        BigRational::new(BigInt::from(21), BigInt::from(400));
    let outside_point = Distribution::new(&space, probs).expect("distribution");
    let verdict = classify(&outside_point, &matrix, &basis).expect("classify");
    assert_eq!(verdict.status(), FactorizationStatus::Outside);
    assert!(verdict.failing_binomial().is_some());
    println!("PASS - trichotomy: 200 image points FACTORS, arc point LIMIT_ONLY, perturbed point OUTSIDE");
}

#[test]
fn pairwise_ideal_is_consistent_with_the_toric_ideal() {
    let (space, graph, matrix) = four_cycle();
    let pairwise = pairwise_ideal(&graph, &space).expect("pairwise ideal");

    let mut rng = ChaCha8Rng::seed_from_u64(57);
    for _ in 0..20 {
        let p = image_point(&space, &matrix, &mut rng);
        assert_eq!(
            vanishes(&p, &pairwise).expect("evaluate"),
            None,
            "image points must satisfy every pairwise binomial"
        );
    }

    let order = MonomialOrder::grevlex(space.num_states());
    let pairwise_gb = buchberger(&pairwise, order);
    assert!(pairwise_gb.is_groebner());
    let multipliers: Vec<Vec<Vec<u32>>> = (0..=4)
        .map(|d| monomials_of_degree(space.num_states(), d))
        .collect();
    for g in toric_markov_basis(&matrix).binomials() {
        let found = multipliers.iter().flatten().any(|w| {
            let plus: Vec<u32> = g.plus().iter().zip(w).map(|(&e, &m)| e + m).collect();
            let minus: Vec<u32> = g.minus().iter().zip(w).map(|(&e, &m)| e + m).collect();
            monomial_normal_form(&pairwise_gb, plus) == monomial_normal_form(&pairwise_gb, minus)
        });
        assert!(
            found,
            "no monomial multiple of degree <= 4 lands in the pairwise ideal"
        );
    }
    println!("PASS - pairwise consistency: image points satisfy it, every toric generator has a multiple inside");
}

#[test]
fn quartic_vanishing_matches_cross_product_ratios() {
    let (space, _, matrix) = four_cycle();
    let quartics = IdealBasis::new(
        known_quartics(&space),
        MonomialOrder::grevlex(space.num_states()),
    )
    .expect("valid basis");

    // cpr(Xa, Xb | Xc Xd = z) with both conditioning values, one ratio
    // per quartic.
    let ratio_specs: [(usize, usize, [usize; 2]); 4] =
        [(2, 3, [0, 1]), (0, 3, [1, 2]), (0, 1, [2, 3]), (1, 2, [0, 3])];
    let z_pairs: [([usize; 2], [usize; 2]); 2] = [([0, 1], [1, 0]), ([0, 0], [1, 1])];

    let mut rng = ChaCha8Rng::seed_from_u64(198);
    for _ in 0..100 {
        let p = image_point(&space, &matrix, &mut rng);
        assert_eq!(vanishes(&p, &quartics).expect("evaluate"), None);
        for &(x, y, z) in &ratio_specs {
            let statement =
                IndependenceStatement::new(&space, &[x], &[y], &z).expect("statement");
            for (za, zb) in &z_pairs {
                let spec_a = CpdSpec::new(&space, &statement, &[0], &[1], &[0], &[1], za)
                    .expect("spec");
                let spec_b = CpdSpec::new(&space, &statement, &[0], &[1], &[0], &[1], zb)
                    .expect("spec");
                let ratio = cpr(&p, &spec_a).expect("positive point")
                    / cpr(&p, &spec_b).expect("positive point");
                assert!(ratio.is_one(), "cross product ratios must agree");
            }
        }
    }
    println!("PASS - 100 image points: quartics vanish exactly, all 8 ratio expressions equal 1");
}

#[test]
fn paired_binary_construction_yields_kernel_binomials() {
    for n in 1..=4 {
        let model = pairs_model(n).expect("within state bound");
        let b = prop10_binomial(n).expect("within state bound");
        assert_eq!(u64::from(b.degree()), 1u64 << n, "degree must be 2^n");
        assert!(
            verify_kernel_membership(&b, model.matrix()).expect("same dimension"),
            "construction must lie in the kernel at n = {n}"
        );
    }

    let model = pairs_model(3).expect("within state bound");
    let space = model.space();
    let b = prop10_binomial(3).expect("within state bound");
    for label in ["000000", "000101", "010001", "010100"] {
        let idx = space.index_of_label(label).expect("label");
        assert!(b.plus()[idx] > 0, "plus term must contain p{label}");
    }

    // Each displayed half of the degree-8 relation fails on its own;
    // only the full parity binomial is a kernel element.
    let half_a = binom(
        space,
        &["000000", "000101", "010001", "010100"],
        &["101011", "101110", "111010", "111111"],
    );
    let half_b = binom(
        space,
        &["000001", "000100", "010000", "010101"],
        &["101010", "101111", "111011", "111110"],
    );
    for half in [half_a, half_b] {
        assert!(!verify_kernel_membership(&half, model.matrix()).expect("same dimension"));
    }
    println!("PASS - paired construction: degree 2^n kernel binomials for n=1..4, halves alone fail");
}

#[test]
fn full_basis_connects_small_fibers_quadrics_alone_do_not() {
    let (space, _, matrix) = four_cycle();
    let full = toric_markov_basis(&matrix);
    let quadrics = IdealBasis::new(
        known_quadrics(&space),
        MonomialOrder::grevlex(space.num_states()),
    )
    .expect("valid basis");

    fn tables_of_total(num_states: usize, total: u64) -> Vec<Vec<u64>> {
        fn descend(pos: usize, left: u64, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if pos + 1 == current.len() {
                current[pos] = left;
                out.push(current.clone());
                current[pos] = 0;
                return;
            }
            for c in 0..=left {
                current[pos] = c;
                descend(pos + 1, left - c, current, out);
            }
            current[pos] = 0;
        }
        let mut out = Vec::new();
        descend(0, total, &mut vec![0u64; num_states], &mut out);
        out
    }

    let mut seen = std::collections::BTreeSet::new();
    let mut fibers = 0usize;
    for total in 1..=4 {
        for counts in tables_of_total(space.num_states(), total) {
            let table = Table::from_u64(&space, &counts).expect("table");
            let stats = sufficient_statistics(&matrix, &table).expect("stats");
            if !seen.insert(stats) {
                continue;
            }
            fibers += 1;
            assert_eq!(
                connectivity_check(&table, &full, &matrix, 100_000).expect("small fiber"),
                true,
                "full basis must connect the fiber of {counts:?}"
            );
        }
    }
    assert!(fibers > 100, "the sweep should cover many distinct fibers");

    let disconnected = known_quartics(&space).iter().any(|q| {
        let counts: Vec<u64> = q.plus().iter().map(|&e| u64::from(e)).collect();
        let table = Table::from_u64(&space, &counts).expect("table");
        !connectivity_check(&table, &quadrics, &matrix, 100_000).expect("small fiber")
    });
    assert!(
        disconnected,
        "without the quartics some degree-4 fiber must fall apart"
    );
    println!(
        "PASS - fiber completeness: all {fibers} fibers of total <= 4 connected, quadrics alone fail"
    );
}

#[test]
fn statement_translation_counts() {
    let (space, _, _) = four_cycle();
    for (x, y, z) in [(0usize, 2usize, [1usize, 3usize]), (1, 3, [0, 2])] {
        let statement = IndependenceStatement::new(&space, &[x], &[y], &z).expect("statement");
        let basis = statement_binomials(&statement, &space).expect("saturated statement");
        assert_eq!(basis.len(), 4, "binary non-edge statements give 4 moves");
    }

    let mixed =
        StateSpace::new(&[("X1", 2), ("X2", 2), ("X3", 3), ("X4", 3)]).expect("mixed space");
    let mut total = 0;
    for (x, y, z) in [(0usize, 2usize, [1usize, 3usize]), (1, 3, [0, 2])] {
        let statement = IndependenceStatement::new(&mixed, &[x], &[y], &z).expect("statement");
        let basis = statement_binomials(&statement, &mixed).expect("saturated statement");
        assert_eq!(basis.len(), 18);
        total += basis.len();
    }
    assert_eq!(total, 36, "the mixed four-cycle has 36 degree-2 moves");
    println!("PASS - statement translation: 4 per binary statement, 18+18=36 for 2x2x3x3");
}
