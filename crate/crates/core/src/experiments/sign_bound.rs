//! Monte-Carlo check of the sign-decision floor bounds: for Haar-random
//! orthogonal matrices, how often do the three quantities that control the
//! sign-fixing margins fall below a floor κ?
//!
//! `F1 = |Q11 Q22|`, `F2 = |Q21 Q12|`, `F3 = |Q11 Q22 - Q21 Q12|`; the
//! bounds are `P(F1 < κ), P(F2 < κ) = O(√κ)` and `P(F3 < κ) = O(κ^{1/3})`,
//! so the fitted log-log CDF slopes must stay at or above the bound
//! exponents.

use serde::{Deserialize, Serialize};

use crate::gaussian::haar_orthogonal;
use crate::parallel::run_trials;
use crate::rng::trial_rng;
use crate::Result;

use super::{linear_fit, ExperimentSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CdfRow {
    pub kappa: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub hits_f1: u64,
    pub hits_f2: u64,
    pub hits_f3: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignBoundPerN {
    pub n: usize,
    pub trials: usize,
    pub cdf: Vec<CdfRow>,
    /// Fitted log-log CDF slopes (None when too few informative points).
    pub slope_f1: Option<f64>,
    pub slope_f2: Option<f64>,
    pub slope_f3: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignBoundResult {
    pub per_n: Vec<SignBoundPerN>,
}

/// Minimum hit count for a grid point to enter the slope fit.
const MIN_HITS: u64 = 30;

fn fit_slope(rows: &[CdfRow], pick: impl Fn(&CdfRow) -> (f64, u64)) -> Option<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in rows {
        let (cdf, hits) = pick(row);
        if hits >= MIN_HITS && cdf > 0.0 {
            xs.push(row.kappa.ln());
            ys.push(cdf.ln());
        }
    }
    if xs.len() < 2 {
        return None;
    }
    Some(linear_fit(&xs, &ys).0)
}

pub fn run_sign_bound_mc(spec: &ExperimentSpec) -> Result<SignBoundResult> {
    let grid = if spec.kappa_grid.is_empty() {
        ExperimentSpec::default_kappa_grid()
    } else {
        spec.kappa_grid.clone()
    };
    let mut per_n = Vec::new();
    for (ni, &n) in spec.n_list.iter().enumerate() {
        let master = spec.seed.wrapping_add(ni as u64);
        let samples: Vec<(f64, f64, f64)> = run_trials(spec.trial_count, |t| {
            let mut rng = trial_rng(master, t as u64);
            let q = haar_orthogonal(n, &mut rng);
            let (a, b) = (q.entry(1, 1) * q.entry(2, 2), q.entry(2, 1) * q.entry(1, 2));
            (a.abs(), b.abs(), (a - b).abs())
        });
        let trials = samples.len();
        let cdf: Vec<CdfRow> = grid
            .iter()
            .map(|&kappa| {
                let hits_f1 = samples.iter().filter(|s| s.0 < kappa).count() as u64;
                let hits_f2 = samples.iter().filter(|s| s.1 < kappa).count() as u64;
                let hits_f3 = samples.iter().filter(|s| s.2 < kappa).count() as u64;
                CdfRow {
                    kappa,
                    f1: hits_f1 as f64 / trials as f64,
                    f2: hits_f2 as f64 / trials as f64,
                    f3: hits_f3 as f64 / trials as f64,
                    hits_f1,
                    hits_f2,
                    hits_f3,
                }
            })
            .collect();
        per_n.push(SignBoundPerN {
            n,
            trials,
            slope_f1: fit_slope(&cdf, |r| (r.f1, r.hits_f1)),
            slope_f2: fit_slope(&cdf, |r| (r.f2, r.hits_f2)),
            slope_f3: fit_slope(&cdf, |r| (r.f3, r.hits_f3)),
            cdf,
        });
    }
    Ok(SignBoundResult { per_n })
}
