//! Backend-equivalence validation: the analytic and dense oracles must
//! produce identical outcome distributions for every measurement primitive.

use serde::{Deserialize, Serialize};

use crate::dense::unitary_from_q;
use crate::gaussian::haar_orthogonal;
use crate::oracle::{CorrelationPrep, UnitaryOracle};
use crate::parallel::run_trials;
use crate::rng::trial_rng;
use crate::{Error, Result};

use super::ExperimentSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleCheckPerN {
    pub n: usize,
    pub trials: usize,
    /// Max total-variation distance between step-1 outcome distributions.
    pub max_tv: f64,
    /// Max deviation between correlation means.
    pub max_mean_dev: f64,
    /// Step-3 point-mass outcomes that disagreed between backends.
    pub point_mass_mismatches: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleCheckResult {
    pub per_n: Vec<OracleCheckPerN>,
    pub failed: bool,
}

/// TV above this marks the experiment failed.
pub const TV_FAIL: f64 = 1e-6;

struct TrialDev {
    tv: f64,
    mean_dev: f64,
    mismatches: u64,
}

fn one_trial(n: usize, master: u64, trial: usize) -> Result<TrialDev> {
    let mut rng = trial_rng(master, trial as u64);
    let q = haar_orthogonal(n, &mut rng);
    let mut analytic = UnitaryOracle::analytic(q.clone(), 7);
    let mut dense = UnitaryOracle::dense(unitary_from_q(&q)?, 7);

    let mut tv: f64 = 0.0;
    for mu in 1..=2 * n {
        let pa = analytic.step1_distribution_full(mu)?;
        let pd = dense.step1_distribution_full(mu)?;
        let dist = pa
            .iter()
            .zip(&pd)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / 2.0;
        tv = tv.max(dist);
    }

    let mut mean_dev: f64 = 0.0;
    for k in 2..=2 * n {
        let mut preps = vec![CorrelationPrep::Vacuum];
        preps.extend((1..=n).map(CorrelationPrep::XFlip));
        for prep in preps {
            let ma = analytic.correlation_mean(prep, k)?;
            let md = dense.correlation_mean(prep, k)?;
            mean_dev = mean_dev.max((ma - md).abs());
        }
    }

    // Step-3 point masses for a few exact row-sign patterns.
    let mut mismatches = 0u64;
    for mask in [0u32, 0b1, 0b11, 0b101] {
        let mut q_bar = q.matrix().clone();
        for mu in 1..=2 * n {
            if mask & (1 << (mu - 1)) != 0 {
                for c in 0..2 * n {
                    q_bar[(mu - 1, c)] = -q_bar[(mu - 1, c)];
                }
            }
        }
        let sa = analytic.step3_measure(&q_bar)?.outcome;
        let sd = dense.step3_measure(&q_bar)?.outcome;
        if sa != sd {
            mismatches += 1;
        }
    }

    Ok(TrialDev {
        tv,
        mean_dev,
        mismatches,
    })
}

pub fn run_oracle_check(spec: &ExperimentSpec) -> Result<OracleCheckResult> {
    let limit = crate::dense::dense_limit();
    if let Some(&n) = spec.n_list.iter().find(|&&n| n > limit) {
        return Err(Error::DenseLimit { n, limit });
    }
    let mut per_n = Vec::new();
    let mut failed = false;
    for (ni, &n) in spec.n_list.iter().enumerate() {
        let master = spec.seed.wrapping_add(ni as u64).wrapping_mul(0x6c62_272e_07bb_0142);
        let devs: Vec<TrialDev> = run_trials(spec.trial_count, |t| {
            one_trial(n, master, t).expect("dense limit checked above")
        });
        let max_tv = devs.iter().map(|d| d.tv).fold(0.0, f64::max);
        let max_mean_dev = devs.iter().map(|d| d.mean_dev).fold(0.0, f64::max);
        let point_mass_mismatches = devs.iter().map(|d| d.mismatches).sum();
        failed |= max_tv > TV_FAIL || max_mean_dev > TV_FAIL || point_mass_mismatches > 0;
        per_n.push(OracleCheckPerN {
            n,
            trials: devs.len(),
            max_tv,
            max_mean_dev,
            point_mass_mismatches,
        });
    }
    Ok(OracleCheckResult { per_n, failed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::ExperimentKind;

    #[test]
    fn backends_agree_at_small_scale() {
        let mut spec = ExperimentSpec::new(ExperimentKind::OracleCheck, 31);
        spec.n_list = vec![2, 3];
        spec.trial_count = 10;
        let result = run_oracle_check(&spec).unwrap();
        assert!(!result.failed);
        for cell in &result.per_n {
            assert!(cell.max_tv <= 1e-8, "n {}: tv {}", cell.n, cell.max_tv);
            assert_eq!(cell.point_mass_mismatches, 0);
        }
    }
}
