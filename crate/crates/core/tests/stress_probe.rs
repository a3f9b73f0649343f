// Temporary stress probe: no panics/errors across a broad config sweep.
use matchgate_core::gaussian::haar_orthogonal;
use matchgate_core::learner::{learn_gaussian, LearnConfig};
use matchgate_core::oracle::UnitaryOracle;
use matchgate_core::parallel::run_trials;
use matchgate_core::rng::trial_rng;
use rand::Rng;

#[test]
#[ignore]
fn stress_gaussian_learner() {
    let outcomes = run_trials(1500, |t| {
        let mut rng = trial_rng(990_001, t as u64);
        let n = rng.gen_range(1..=6usize);
        let eta = 10f64.powf(rng.gen_range(-2.3..-0.3));
        let q = haar_orthogonal(n, &mut rng);
        let cfg = LearnConfig {
            eta,
            epsilon: eta,
            fail_prob: rng.gen_range(0.01..0.2),
            adaptive_reference: rng.gen_bool(0.3),
            exact: rng.gen_bool(0.2),
            ..LearnConfig::default()
        };
        let mut oracle = UnitaryOracle::analytic(q.clone(), t as u64);
        match learn_gaussian(&mut oracle, &cfg) {
            Ok(report) => {
                let ok_counters = report.queries.queries_m == report.formula.total_m
                    && report.queries.queries_mdag == report.formula.total_mdag;
                let max_entry = report
                    .q_hat
                    .as_ref()
                    .unwrap()
                    .iter()
                    .fold(0.0f64, |m, &v| m.max(v.abs()));
                (ok_counters && max_entry <= 1.0 + cfg.eta, String::new())
            }
            Err(e) => (false, format!("n={n} eta={eta:.4}: {e}")),
        }
    });
    let failures: Vec<&String> = outcomes
        .iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, msg)| msg)
        .collect();
    assert!(failures.is_empty(), "{} failures: {:?}", failures.len(), &failures[..failures.len().min(5)]);
}
