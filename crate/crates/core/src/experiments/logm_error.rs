//! Monte-Carlo propagation of entrywise error through the matrix log:
//! perturb a Haar rotation entrywise by ±η, project back onto the
//! orthogonal group, and measure the phase-insensitive distance between
//! the corresponding Gaussian unitaries. The distance should scale
//! linearly in η and stay within the cubic-in-n envelope.

use serde::{Deserialize, Serialize};

use crate::dense::{distance_d, unitary_from_h};
use crate::gaussian::{h_from_q, haar_orthogonal, project_orthogonal};
use crate::parallel::run_trials;
use crate::rng::trial_rng;
use crate::{Error, Result};

use super::{linear_fit, quantile, ExperimentSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogmCell {
    pub n: usize,
    pub eta: f64,
    pub trials: usize,
    /// Draws rejected for det = -1 or a log-branch ambiguity.
    pub redraws: u64,
    pub median_d: f64,
    pub p95_d: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogmErrorResult {
    pub cells: Vec<LogmCell>,
    /// Fitted η exponent per n (log-log on medians).
    pub eta_exponents: Vec<(usize, f64)>,
}

/// One trial: distance between the unitaries of a Haar rotation and its
/// entrywise-perturbed, re-projected version. Returns the distance and the
/// number of redraws consumed.
fn one_trial(n: usize, eta: f64, master: u64, trial: usize) -> Result<(f64, u64)> {
    let mut rng = trial_rng(master, trial as u64);
    let mut redraws = 0u64;
    loop {
        let q = haar_orthogonal(n, &mut rng);
        let h = match h_from_q(&q) {
            Ok(h) => h,
            Err(_) => {
                redraws += 1;
                continue;
            }
        };
        let noisy = q
            .matrix()
            .map(|x| x + rng.gen_range(-eta..=eta));
        let projected = match project_orthogonal(&noisy) {
            Ok(p) => p,
            Err(_) => {
                redraws += 1;
                continue;
            }
        };
        let h2 = match h_from_q(&projected) {
            Ok(h) => h,
            Err(_) => {
                redraws += 1;
                continue;
            }
        };
        let m1 = unitary_from_h(&h)?;
        let m2 = unitary_from_h(&h2)?;
        return Ok((distance_d(&m1, &m2), redraws));
    }
}

pub fn run_logm_error_mc(spec: &ExperimentSpec) -> Result<LogmErrorResult> {
    let limit = crate::dense::dense_limit();
    if let Some(&n) = spec.n_list.iter().find(|&&n| n > limit) {
        return Err(Error::DenseLimit { n, limit });
    }
    let grid = if spec.eta_grid.is_empty() {
        ExperimentSpec::default_eta_grid()
    } else {
        spec.eta_grid.clone()
    };

    let mut cells = Vec::new();
    let mut eta_exponents = Vec::new();
    for (ni, &n) in spec.n_list.iter().enumerate() {
        for (ei, &eta) in grid.iter().enumerate() {
            let master = spec
                .seed
                .wrapping_add((ni * 1000 + ei) as u64)
                .wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let outcomes: Vec<(f64, u64)> = run_trials(spec.trial_count, |t| {
                one_trial(n, eta, master, t).expect("dense limit checked above")
            });
            let ds: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
            let redraws = outcomes.iter().map(|o| o.1).sum();
            cells.push(LogmCell {
                n,
                eta,
                trials: ds.len(),
                redraws,
                median_d: quantile(&ds, 0.5),
                p95_d: quantile(&ds, 0.95),
            });
        }
        let xs: Vec<f64> = grid.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = cells
            .iter()
            .filter(|c| c.n == n)
            .map(|c| c.median_d.max(1e-300).ln())
            .collect();
        if xs.len() >= 2 {
            eta_exponents.push((n, linear_fit(&xs, &ys).0));
        }
    }
    Ok(LogmErrorResult {
        cells,
        eta_exponents,
    })
}

use rand::Rng;
