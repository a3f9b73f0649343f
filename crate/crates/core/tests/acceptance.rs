//! Acceptance suite: every release criterion as one test, each printing a
//! PASS line with its measured numbers (run with `--nocapture` to see them).
//!
//! Run via `cargo test --test acceptance -- --test-threads=1 --nocapture`
//! for ordered output; the tests are independent and seed-deterministic.

use matchgate_core::dense::{
    bell_measurement_distribution, correlation_from_density, distance_d, distance_d_plus_raw,
    gibbs_density, monomial_dense, unitary_from_h, unitary_from_q, DenseUnitary,
};
use matchgate_core::experiments::{self, ExperimentKind, ExperimentSpec};
use matchgate_core::gaussian::{
    apply_conjugation, compile_to_givens, correlation_of_gibbs, haar_orthogonal,
    AntisymmetricGenerator, Gate, GATE_COUNT_CUBIC_COEFF,
};
use matchgate_core::learner::{
    hierarchy::hierarchy_query_formula, learn_gaussian, learn_hierarchy, membership_level2,
    membership_level_k, LearnConfig,
};
use matchgate_core::majorana::{monomial_mul, MajoranaMonomial, Phase};
use matchgate_core::oracle::UnitaryOracle;
use matchgate_core::rng::trial_rng;
use matchgate_core::subsets;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_generator(n: usize, rng: &mut impl Rng) -> AntisymmetricGenerator {
    let dim = 2 * n;
    let raw = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.gen_range(-0.5..0.5));
    AntisymmetricGenerator::new((&raw - raw.transpose()) * 0.5).unwrap()
}

fn swap_unitary() -> DenseUnitary {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    DenseUnitary::new(DMatrix::from_row_slice(
        4,
        4,
        &[
            one, zero, zero, zero, zero, zero, one, zero, zero, one, zero, zero, zero, zero, zero,
            one,
        ],
    ))
    .unwrap()
}

fn cz_unitary() -> DenseUnitary {
    let mut m = matchgate_core::dense::cidentity(4);
    m[(3, 3)] = Complex64::new(-1.0, 0.0);
    DenseUnitary::new(m).unwrap()
}

/// Criterion 1: symbolic monomial products match dense Pauli products for
/// all support pairs (and phase factors) at n <= 3, with zero mismatches.
#[test]
fn criterion_01_algebra_oracle_equivalence() {
    let mut checked = 0u64;
    for n in 1..=3usize {
        let total = 1u32 << (2 * n);
        for ma in 0..total {
            for mb in 0..total {
                let phase = if (ma + mb) % 2 == 0 {
                    Phase::PlusOne
                } else {
                    Phase::PlusI
                };
                let a = MajoranaMonomial::from_set(n, subsets::support_from_mask(ma))
                    .unwrap()
                    .scaled(phase);
                let b = MajoranaMonomial::from_set(n, subsets::support_from_mask(mb)).unwrap();
                let sym = monomial_mul(&a, &b).unwrap();
                let prod = monomial_dense(&a).unwrap() * monomial_dense(&b).unwrap();
                let dev = max_abs(&(prod - monomial_dense(&sym).unwrap()));
                assert!(dev < 1e-12, "n={n} a={ma:b} b={mb:b}: dev={dev}");
                checked += 1;
            }
        }
    }
    println!("ACCEPTANCE 1 PASS: {checked} symbolic/dense product pairs, zero mismatches");
}

/// Criterion 2: apply_conjugation coefficients match the dense
/// decomposition within 1e-8 for 100 Haar Q at n in {2,3}, |S| <= 3.
#[test]
fn criterion_02_conjugation_identity() {
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        for trial in 0..100usize {
            let mut rng = trial_rng(200 + n as u64, trial as u64);
            let q = haar_orthogonal(n, &mut rng);
            let m = unitary_from_q(&q).unwrap();
            let d = m.dim() as f64;
            for mask in 1..(1u32 << (2 * n)) {
                if subsets::weight(mask) > 3 {
                    continue;
                }
                let s = MajoranaMonomial::from_set(n, subsets::support_from_mask(mask)).unwrap();
                let (_, coeffs) = apply_conjugation(&q, &s).unwrap();
                let a = m.conjugate_monomial(&s).unwrap();
                for (target, det) in &coeffs {
                    let g = MajoranaMonomial::from_set(n, target.clone()).unwrap();
                    let sp = matchgate_core::dense::monomial_sparse(&g).unwrap();
                    let dense_coeff = (sp.trace_adjoint_times(&a) / Complex64::new(d, 0.0)).re;
                    worst = worst.max((dense_coeff - det).abs());
                }
            }
        }
    }
    assert!(worst < 1e-8, "worst coefficient deviation {worst}");
    println!("ACCEPTANCE 2 PASS: conjugation coefficients match dense within {worst:.2e}");
}

/// Criterion 3: Gibbs correlation closed form matches the dense
/// Gibbs-state computation within 1e-8 for 50 random h at n in {1,2,3}.
#[test]
fn criterion_03_gibbs_correlation() {
    let mut worst: f64 = 0.0;
    for n in 1..=3usize {
        for trial in 0..50usize {
            let mut rng = trial_rng(300 + n as u64, trial as u64);
            let g = random_generator(n, &mut rng);
            let rho = gibbs_density(&g).unwrap();
            let dense = correlation_from_density(n, &rho).unwrap();
            let closed = correlation_of_gibbs(&g);
            worst = worst.max((&dense - closed.matrix()).amax());
        }
    }
    assert!(worst < 1e-8, "worst deviation {worst}");
    println!("ACCEPTANCE 3 PASS: Gibbs correlation closed form within {worst:.2e} of dense");
}

/// Criterion 4: analytic step-1 distributions equal the dense Bell
/// distributions within TV 1e-8 for 50 Haar Q at n in {2,3}, both dets.
#[test]
fn criterion_04_step1_distribution() {
    let mut worst_tv: f64 = 0.0;
    for n in [2usize, 3] {
        let mut seen_det = [false, false];
        for trial in 0..50usize {
            let mut rng = trial_rng(400 + n as u64, trial as u64);
            let q = haar_orthogonal(n, &mut rng);
            seen_det[usize::from(q.det_sign() < 0)] = true;
            let mut analytic = UnitaryOracle::analytic(q.clone(), 1);
            let mut dense = UnitaryOracle::dense(unitary_from_q(&q).unwrap(), 1);
            for mu in 1..=2 * n {
                let pa = analytic.step1_distribution_full(mu).unwrap();
                let pd = dense.step1_distribution_full(mu).unwrap();
                let tv: f64 =
                    pa.iter().zip(&pd).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
                worst_tv = worst_tv.max(tv);
            }
        }
        assert!(seen_det[0] && seen_det[1], "n={n}: both det signs sampled");
    }
    assert!(worst_tv < 1e-8, "worst TV {worst_tv}");
    println!("ACCEPTANCE 4 PASS: step-1 backend TV at most {worst_tv:.2e} (dets ±1 covered)");
}

/// Criterion 5: exact-statistics learning recovers Q to 1e-9 whenever sign
/// margins clear 1e-4; margin-deficient draws must stay under 5%.
#[test]
fn criterion_05_noiseless_end_to_end() {
    let cfg = LearnConfig::exact_mode();
    let mut all_rates = Vec::new();
    let mut rate_clause_ok = true;
    for n in 2..=8usize {
        let mut deficient = 0usize;
        for trial in 0..100usize {
            let mut rng = trial_rng(500 + n as u64, trial as u64);
            let q = haar_orthogonal(n, &mut rng);
            let mut oracle = UnitaryOracle::analytic(q.clone(), trial as u64);
            let report = learn_gaussian(&mut oracle, &cfg).unwrap();
            let clean = report.diagnostics.min_margin > cfg.margin_threshold
                && report.diagnostics.unresolved.is_empty();
            if !clean {
                deficient += 1;
                continue;
            }
            let err = (report.q_hat.as_ref().unwrap() - q.matrix()).amax();
            assert!(err <= 1e-9, "n={n} trial={trial}: clean draw erred {err}");
        }
        all_rates.push((n, deficient));
        if deficient >= 5 {
            rate_clause_ok = false;
        }
    }
    println!(
        "ACCEPTANCE 5: exact recovery perfect on every margin-clean draw; \
         margin-deficient per 100 draws: {all_rates:?}"
    );
    assert!(
        rate_clause_ok,
        "margin-deficient rate exceeds 5% at fixed threshold 1e-4: {all_rates:?} \
         (recovery on clean draws had zero failures; see the analysis notes: \
         an absolute margin floor cannot hold the 5% clause as n grows)"
    );
    println!("ACCEPTANCE 5 PASS");
}

/// Criterion 6: sampled desk run at n = 4, eta = epsilon = 0.02, 50 seeds:
/// entrywise error <= 5 eta and dense D <= n^3 eta in at least 90% of
/// seeds; counters equal the printed closed forms exactly.
#[test]
fn criterion_06_sampled_desk_run() {
    let n = 4usize;
    let cfg = LearnConfig::with_eta(0.02);
    let trials = 50usize;
    let mut successes = 0usize;
    for trial in 0..trials {
        let mut rng = trial_rng(600, trial as u64);
        let q = haar_orthogonal(n, &mut rng);
        let mut oracle = UnitaryOracle::analytic(q.clone(), 6000 + trial as u64);
        let report = learn_gaussian(&mut oracle, &cfg).unwrap();
        assert_eq!(
            report.queries.queries_m, report.formula.total_m,
            "trial {trial}: M-counter mismatch"
        );
        assert_eq!(
            report.queries.queries_mdag, report.formula.total_mdag,
            "trial {trial}: M†-counter mismatch"
        );
        let entry_err = (report.q_hat.as_ref().unwrap() - q.matrix()).amax();
        let truth = unitary_from_q(&q).unwrap();
        let est = unitary_from_q(&report.q_ortho_matrix().unwrap()).unwrap();
        let d = distance_d(&truth, &est);
        if entry_err <= 5.0 * cfg.eta && d <= (n * n * n) as f64 * cfg.eta {
            successes += 1;
        }
    }
    assert!(
        successes * 10 >= trials * 9,
        "only {successes}/{trials} seeds within tolerance"
    );
    println!(
        "ACCEPTANCE 6 PASS: {successes}/{trials} seeds within 5η entrywise and n³η distance; \
         query counters exact on all seeds"
    );
}

/// Criterion 7: sign-floor Monte Carlo at n = 4, 1e5 trials: fitted CDF
/// exponents at least 0.45 (F1, F2) and 0.30 (F3); CDFs monotone.
#[test]
fn criterion_07_sign_bound_mc() {
    let mut spec = ExperimentSpec::new(ExperimentKind::SignBoundMc, 700);
    spec.n_list = vec![4];
    spec.trial_count = 100_000;
    let record = experiments::run(&spec).unwrap();
    let experiments::Payload::SignBoundMc(result) = &record.payload else {
        panic!("wrong payload");
    };
    let per_n = &result.per_n[0];
    for w in per_n.cdf.windows(2) {
        assert!(w[0].f1 <= w[1].f1 && w[0].f2 <= w[1].f2 && w[0].f3 <= w[1].f3);
    }
    let s1 = per_n.slope_f1.unwrap();
    let s2 = per_n.slope_f2.unwrap();
    let s3 = per_n.slope_f3.unwrap();
    assert!(s1 >= 0.45, "F1 slope {s1}");
    assert!(s2 >= 0.45, "F2 slope {s2}");
    assert!(s3 >= 0.30, "F3 slope {s3}");
    println!(
        "ACCEPTANCE 7 PASS: CDF slopes F1 {s1:.3}, F2 {s2:.3}, F3 {s3:.3} over 1e5 trials, monotone"
    );
}

/// Criterion 8: log-perturbation Monte Carlo: eta exponent within [0.85, 1.15]
/// at n = 3; p95 distance within 3 C2 n^3 eta across n in {2..5} with C2
/// calibrated at n = 2.
#[test]
fn criterion_08_logm_error_mc() {
    // Eta sweep at n = 3.
    let mut spec = ExperimentSpec::new(ExperimentKind::LogmErrorMc, 800);
    spec.n_list = vec![3];
    spec.trial_count = 150;
    spec.eta_grid = vec![1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2];
    let record = experiments::run(&spec).unwrap();
    let experiments::Payload::LogmErrorMc(result) = &record.payload else {
        panic!("wrong payload");
    };
    let (_, b) = result.eta_exponents[0];
    assert!((0.85..=1.15).contains(&b), "eta exponent {b}");

    // n sweep at eta = 1e-3.
    let mut spec = ExperimentSpec::new(ExperimentKind::LogmErrorMc, 801);
    spec.n_list = vec![2, 3, 4, 5];
    spec.trial_count = 150;
    spec.eta_grid = vec![1e-3];
    let record = experiments::run(&spec).unwrap();
    let experiments::Payload::LogmErrorMc(result) = &record.payload else {
        panic!("wrong payload");
    };
    let eta = 1e-3;
    let p95_n2 = result.cells.iter().find(|c| c.n == 2).unwrap().p95_d;
    let c2 = p95_n2 / (8.0 * eta);
    for cell in &result.cells {
        let bound = 3.0 * c2 * (cell.n * cell.n * cell.n) as f64 * eta;
        assert!(
            cell.p95_d <= bound,
            "n={}: p95 {} over bound {bound}",
            cell.n,
            cell.p95_d
        );
    }
    println!(
        "ACCEPTANCE 8 PASS: eta exponent {b:.3}; p95 distances within 3·C2·n³η (C2 = {c2:.3})"
    );
}

/// Criterion 9: hierarchy structure spot checks.
#[test]
fn criterion_09_hierarchy_structure() {
    let swap = swap_unitary();
    assert!(!membership_level2(&swap).unwrap(), "SWAP must fail level 2");
    assert!(membership_level_k(&swap, 3).unwrap(), "SWAP must pass level 3");
    assert!(membership_level_k(&cz_unitary(), 3).unwrap(), "CZ must pass level 3");
    for mask in 0u32..16 {
        let g = MajoranaMonomial::from_set(2, subsets::support_from_mask(mask)).unwrap();
        let u = DenseUnitary::new(monomial_dense(&g).unwrap()).unwrap();
        assert!(
            membership_level2(&u).unwrap(),
            "monomial {mask:b} must pass level 2"
        );
    }
    println!("ACCEPTANCE 9 PASS: SWAP ∉ M2, SWAP ∈ M3, CZ ∈ M3, all 16 monomials ∈ M2");
}

/// Criterion 10: hierarchy learning of SWAP at n = 2, k = 3, eta = 0.01:
/// distance <= 0.1 in at least 90% of 25 seeds; counters exact against the
/// realized accounting and within 2x of the bridge-free reference formula.
#[test]
fn criterion_10_hierarchy_desk_run() {
    let cfg = LearnConfig::with_eta(0.01);
    let swap = swap_unitary();
    let trials = 25usize;
    let mut successes = 0usize;
    let mut max_ratio: f64 = 0.0;
    let reference = hierarchy_query_formula(2, 3, &cfg);
    for trial in 0..trials {
        let mut oracle = UnitaryOracle::dense(swap.clone(), 1000 + trial as u64);
        let report = learn_hierarchy(&mut oracle, 3, &cfg).unwrap();
        assert_eq!(report.queries.queries_m, report.formula.total_m);
        assert_eq!(report.queries.queries_mdag, report.formula.total_mdag);
        let ratio = report.queries.total() as f64 / reference.total as f64;
        max_ratio = max_ratio.max(ratio);
        let estimate = DenseUnitary::new(report.u_hat.unwrap()).unwrap();
        if distance_d(&swap, &estimate) <= 0.1 {
            successes += 1;
        }
    }
    assert!(
        successes * 10 >= trials * 9,
        "only {successes}/{trials} seeds close to SWAP"
    );
    assert!(
        max_ratio <= 2.0,
        "query total exceeded 2x the reference formula: ratio {max_ratio}"
    );
    println!(
        "ACCEPTANCE 10 PASS: {successes}/{trials} seeds with D(SWAP, out) ≤ 0.1; \
         counters exact, at most {max_ratio:.3}x the reference formula"
    );
}

/// Criterion 11: conjugation distance inequalities on 100+ constructed
/// pairs at n <= 3, zero violations beyond 1e-9 slack.
#[test]
fn criterion_11_distance_bounds() {
    let mut pairs = 0usize;
    for n in 1..=3usize {
        for trial in 0..40usize {
            let mut rng = trial_rng(1100 + n as u64, trial as u64);
            let g = random_generator(n, &mut rng);
            let u1 = unitary_from_h(&g).unwrap();
            let dim = 2 * n;
            let eps = 0.02;
            let raw = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.gen_range(-eps..eps));
            let g2 =
                AntisymmetricGenerator::new(g.matrix() + (&raw - raw.transpose()) * 0.5).unwrap();
            let u2 = unitary_from_h(&g2).unwrap();

            let mut delta: f64 = 0.0;
            for mu in 1..=2 * n {
                let a1 = u1
                    .conjugate_monomial(&MajoranaMonomial::gamma(n, mu).unwrap())
                    .unwrap();
                let a2 = u2
                    .conjugate_monomial(&MajoranaMonomial::gamma(n, mu).unwrap())
                    .unwrap();
                delta = delta.max(distance_d_plus_raw(&a1, &a2));
            }
            let bound = 2.0 * n as f64 * delta + 1e-9;
            for mask in 0u32..(1 << (2 * n)) {
                let s = MajoranaMonomial::from_set(n, subsets::support_from_mask(mask)).unwrap();
                let a1 = u1.conjugate_monomial(&s).unwrap();
                let a2 = u2.conjugate_monomial(&s).unwrap();
                assert!(
                    distance_d_plus_raw(&a1, &a2) <= bound,
                    "monomial distance bound violated (n={n}, trial={trial}, mask={mask:b})"
                );
            }
            assert!(
                distance_d(&u1, &u2) <= bound,
                "operator distance bound violated (n={n}, trial={trial})"
            );
            pairs += 1;
        }
    }
    println!("ACCEPTANCE 11 PASS: distance inequalities on {pairs} pairs, zero violations");
}

/// Criterion 12: compilation round-trips 100 Haar draws per n in {2..6}
/// within 1e-8, with gate count <= c n^3 for the fixed reported c.
#[test]
fn criterion_12_compiler_round_trip() {
    let mut max_err: f64 = 0.0;
    let mut max_count = 0usize;
    for n in 2..=6usize {
        for trial in 0..100usize {
            let mut rng = trial_rng(1200 + n as u64, trial as u64);
            let q = haar_orthogonal(n, &mut rng);
            let circuit = compile_to_givens(&q);
            let err = circuit.recomposition_error(&q);
            max_err = max_err.max(err);
            assert!(err <= 1e-8, "n={n} trial={trial}: recomposition error {err}");
            let bound = GATE_COUNT_CUBIC_COEFF * (n * n * n) as f64;
            assert!(
                (circuit.gate_count() as f64) <= bound,
                "n={n}: {} gates over c·n³ = {bound}",
                circuit.gate_count()
            );
            max_count = max_count.max(circuit.gate_count());
            let has_reflection = matches!(circuit.gates.last(), Some(Gate::Reflection { .. }));
            assert_eq!(has_reflection, q.det_sign() < 0);
        }
    }
    println!(
        "ACCEPTANCE 12 PASS: 500 round trips, worst error {max_err:.2e}, \
         max gate count {max_count} (bound coefficient {GATE_COUNT_CUBIC_COEFF})"
    );
}

/// Criterion 4 companion: Bell distributions of the step-1 states sum to 1.
#[test]
fn bell_distributions_normalize() {
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        for trial in 0..20usize {
            let mut rng = trial_rng(1300 + n as u64, trial as u64);
            let q = haar_orthogonal(n, &mut rng);
            let m = unitary_from_q(&q).unwrap();
            let probs = bell_measurement_distribution(n, m.matrix()).unwrap();
            worst = worst.max((probs.iter().sum::<f64>() - 1.0).abs());
        }
    }
    assert!(worst < 1e-9);
    println!("ACCEPTANCE companion PASS: Bell distributions normalize within {worst:.2e}");
}
