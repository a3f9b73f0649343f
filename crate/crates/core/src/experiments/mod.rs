//! Seeded, reproducible experiment drivers and result persistence.
//!
//! Each driver consumes an [`ExperimentSpec`], fans trials out over the
//! parallel pool with counter-split rng streams, and returns an
//! [`ExperimentRecord`] whose numeric payload is bitwise-reproducible from
//! `(spec, seed)` regardless of thread count. Records serialize as JSONL
//! (one record per line) or flattened CSV tables.

pub mod learn_bench;
pub mod logm_error;
pub mod oracle_check;
pub mod sign_bound;

use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use learn_bench::LearnBenchResult;
pub use logm_error::LogmErrorResult;
pub use oracle_check::OracleCheckResult;
pub use sign_bound::SignBoundResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SignBoundMc,
    LogmErrorMc,
    LearnBenchmark,
    OracleCheck,
    CompileCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Jsonl,
    Csv,
}

/// Declarative description of one experiment run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n_list: Vec<usize>,
    pub trial_count: usize,
    #[serde(default)]
    pub kappa_grid: Vec<f64>,
    #[serde(default)]
    pub eta_grid: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    /// Entry/correlation precision for learning benchmarks.
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_fail_prob")]
    pub fail_prob: f64,
}

fn default_eta() -> f64 {
    0.05
}

fn default_fail_prob() -> f64 {
    0.05
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, seed: u64) -> Self {
        Self {
            kind,
            n_list: vec![2],
            trial_count: 100,
            kappa_grid: Vec::new(),
            eta_grid: Vec::new(),
            seed,
            output_path: None,
            format: OutputFormat::Jsonl,
            eta: default_eta(),
            fail_prob: default_fail_prob(),
        }
    }

    /// Log-spaced default grid over `[1e-6, 1e-2]`, two points per decade.
    pub fn default_kappa_grid() -> Vec<f64> {
        let mut grid = Vec::new();
        for exp in (-6i32..=-2).rev() {
            grid.push(10f64.powi(exp));
            if exp > -6 {
                grid.push(10f64.powi(exp) / 10f64.sqrt());
            }
        }
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid
    }

    pub fn default_eta_grid() -> Vec<f64> {
        vec![1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2]
    }

    pub fn validate(&self) -> Result<()> {
        if self.trial_count == 0 {
            return Err(Error::InvalidArgument("trial_count must be >= 1".into()));
        }
        if self.n_list.is_empty() {
            return Err(Error::InvalidArgument("n_list must be nonempty".into()));
        }
        for grid in [&self.kappa_grid, &self.eta_grid] {
            if grid.iter().any(|&x| x <= 0.0) {
                return Err(Error::InvalidArgument("grids must be positive".into()));
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(
                    "grids must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Result payload, tagged by experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum Payload {
    SignBoundMc(SignBoundResult),
    LogmErrorMc(LogmErrorResult),
    LearnBenchmark(LearnBenchResult),
    OracleCheck(OracleCheckResult),
}

/// One completed experiment: the spec echo, a version stamp, wall-clock
/// time (excluded from the reproducibility contract) and the payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub spec: ExperimentSpec,
    pub version: String,
    pub wall_clock_secs: f64,
    pub payload: Payload,
}

impl ExperimentRecord {
    pub fn new(spec: ExperimentSpec, wall_clock_secs: f64, payload: Payload) -> Self {
        Self {
            spec,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_secs,
            payload,
        }
    }

    /// Did the experiment self-check fail (nonzero exit for the CLI)?
    pub fn failed(&self) -> bool {
        match &self.payload {
            Payload::OracleCheck(r) => r.failed,
            _ => false,
        }
    }

    /// Append this record as one JSONL line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, self)?;
        writeln!(w)?;
        Ok(())
    }

    /// Flatten the payload into a fixed-column CSV table.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        match &self.payload {
            Payload::SignBoundMc(r) => {
                writeln!(w, "n,kappa,cdf_f1,cdf_f2,cdf_f3")?;
                for per_n in &r.per_n {
                    for row in &per_n.cdf {
                        writeln!(
                            w,
                            "{},{:?},{:?},{:?},{:?}",
                            per_n.n, row.kappa, row.f1, row.f2, row.f3
                        )?;
                    }
                }
            }
            Payload::LogmErrorMc(r) => {
                writeln!(w, "n,eta,trials,redraws,median_d,p95_d")?;
                for cell in &r.cells {
                    writeln!(
                        w,
                        "{},{:?},{},{},{:?},{:?}",
                        cell.n, cell.eta, cell.trials, cell.redraws, cell.median_d, cell.p95_d
                    )?;
                }
            }
            Payload::LearnBenchmark(r) => {
                writeln!(
                    w,
                    "n,eta,trials,success_rate,queries_m,queries_mdag,accounting_exact"
                )?;
                for cell in &r.cells {
                    writeln!(
                        w,
                        "{},{:?},{},{:?},{},{},{}",
                        cell.n,
                        cell.eta,
                        cell.trials,
                        cell.success_rate,
                        cell.queries_m,
                        cell.queries_mdag,
                        cell.accounting_exact
                    )?;
                }
            }
            Payload::OracleCheck(r) => {
                writeln!(w, "n,max_tv,max_mean_dev,point_mass_mismatches")?;
                for cell in &r.per_n {
                    writeln!(
                        w,
                        "{},{:?},{:?},{}",
                        cell.n, cell.max_tv, cell.max_mean_dev, cell.point_mass_mismatches
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Write to the spec's output path (or stdout when none).
    pub fn write_out(&self) -> Result<()> {
        match &self.spec.output_path {
            Some(path) => {
                let file = std::fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)?;
                let mut buf = std::io::BufWriter::new(file);
                match self.spec.format {
                    OutputFormat::Jsonl => self.write_jsonl(&mut buf),
                    OutputFormat::Csv => self.write_csv(&mut buf),
                }
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                match self.spec.format {
                    OutputFormat::Jsonl => self.write_jsonl(&mut lock),
                    OutputFormat::Csv => self.write_csv(&mut lock),
                }
            }
        }
    }
}

/// Run the experiment named by the spec.
pub fn run(spec: &ExperimentSpec) -> Result<ExperimentRecord> {
    spec.validate()?;
    let start = std::time::Instant::now();
    let payload = match spec.kind {
        ExperimentKind::SignBoundMc => Payload::SignBoundMc(sign_bound::run_sign_bound_mc(spec)?),
        ExperimentKind::LogmErrorMc => Payload::LogmErrorMc(logm_error::run_logm_error_mc(spec)?),
        ExperimentKind::LearnBenchmark => {
            Payload::LearnBenchmark(learn_bench::run_learn_benchmark(spec)?)
        }
        ExperimentKind::OracleCheck => Payload::OracleCheck(oracle_check::run_oracle_check(spec)?),
        ExperimentKind::CompileCheck => {
            return Err(Error::InvalidArgument(
                "compile-check runs through the CLI compile subcommand".into(),
            ))
        }
    };
    Ok(ExperimentRecord::new(
        spec.clone(),
        start.elapsed().as_secs_f64(),
        payload,
    ))
}

/// Least-squares slope and intercept of `y` on `x`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    let slope = num / den;
    (slope, my - slope * mx)
}

/// Linear-interpolated quantile of an unsorted sample.
pub(crate) fn quantile(values: &[f64], p: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::new(ExperimentKind::SignBoundMc, 1);
        assert!(spec.validate().is_ok());
        spec.kappa_grid = vec![1e-3, 1e-4];
        assert!(spec.validate().is_err());
        spec.kappa_grid = vec![1e-4, 1e-3];
        assert!(spec.validate().is_ok());
        spec.trial_count = 0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn fit_and_quantile_helpers() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [2.1, 4.1, 6.1, 8.1];
        let (slope, intercept) = linear_fit(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 0.1).abs() < 1e-12);

        let vals = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(quantile(&vals, 0.0), 1.0);
        assert_eq!(quantile(&vals, 1.0), 4.0);
        assert_eq!(quantile(&vals, 0.5), 2.5);
    }
}
