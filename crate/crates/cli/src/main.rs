//! Command-line driver: learning runs, Monte-Carlo bound experiments,
//! backend checks and circuit compilation, all seeded and reproducible.
//!
//! Flag values override config-file values (`--config` takes simple
//! `key = value` lines mirroring the flags). Exit codes: 0 success,
//! 1 experiment failure, 2 usage/config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use matchgate_core::dense::{dense_limit, distance_d, unitary_from_q, DenseUnitary};
use matchgate_core::experiments::{self, ExperimentKind, ExperimentSpec, OutputFormat};
use matchgate_core::gaussian::{compile_to_givens, haar_orthogonal, OrthogonalMatrix};
use matchgate_core::learner::{learn_gaussian, learn_hierarchy, LearnConfig};
use matchgate_core::oracle::UnitaryOracle;
use matchgate_core::rng::master_rng;

#[derive(Parser)]
#[command(
    name = "matchgate",
    version,
    about = "Learn fermionic Gaussian and Matchgate-Hierarchy operations from black-box oracles"
)]
struct Cli {
    /// Config file with `key = value` lines mirroring the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Number of fermionic modes.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Additive entry precision target.
    #[arg(long, global = true)]
    eta: Option<f64>,

    /// Correlation precision target (defaults to eta).
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte-Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Oracle backend: analytic | dense.
    #[arg(long, global = true)]
    backend: Option<String>,

    /// Output path (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format: jsonl | csv.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Failure probability budget for the Hoeffding bounds.
    #[arg(long = "fail-prob", global = true)]
    fail_prob: Option<f64>,

    /// Multiplier in the Hoeffding shot-count formulas.
    #[arg(long = "hoeffding-constant", global = true)]
    hoeffding_constant: Option<f64>,

    /// Reference column for the sign-fixing determinants.
    #[arg(long = "reference-column", global = true)]
    reference_column: Option<usize>,

    /// Sign decisions with margins below this are flagged.
    #[arg(long = "margin-threshold", global = true)]
    margin_threshold: Option<f64>,

    /// Re-anchor sign determinants on the strongest column.
    #[arg(long = "adaptive-reference", global = true)]
    adaptive_reference: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a hidden Haar-random Gaussian operation; print the report JSON.
    LearnGaussian {
        /// Use exact (infinite-shot) statistics.
        #[arg(long)]
        exact: bool,
    },
    /// Learn a hidden Matchgate-Hierarchy operation (dense backend).
    LearnHierarchy {
        /// Hierarchy level (2..=4).
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Hidden operation: swap | cz | gaussian | swap-gaussian.
        #[arg(long, default_value = "swap")]
        truth: String,
        #[arg(long)]
        exact: bool,
    },
    /// Monte-Carlo CDFs of the sign-decision floor quantities (Haar draws).
    BoundsSign {
        /// Comma-separated kappa grid, e.g. 1e-6,1e-5,1e-4.
        #[arg(long)]
        kappa_grid: Option<String>,
    },
    /// Monte-Carlo matrix-log error propagation across an (n, eta) grid.
    BoundsError {
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        eta_grid: Option<String>,
    },
    /// Benchmark the sampled Gaussian learner and its query accounting.
    BenchQueries {
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        eta_grid: Option<String>,
    },
    /// Compare analytic and dense oracle backends distribution-exactly.
    OracleCheck {
        #[arg(long)]
        n_list: Option<String>,
    },
    /// Compile an orthogonal matrix into adjacent Givens rotations.
    Compile {
        /// Headerless CSV matrix to compile (default: a Haar draw).
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Flag values merged over config-file values.
#[derive(Default)]
struct Settings {
    n: Option<usize>,
    eta: Option<f64>,
    epsilon: Option<f64>,
    seed: Option<u64>,
    trials: Option<usize>,
    backend: Option<String>,
    out: Option<PathBuf>,
    format: Option<String>,
    fail_prob: Option<f64>,
    hoeffding_constant: Option<f64>,
    reference_column: Option<usize>,
    margin_threshold: Option<f64>,
    adaptive_reference: bool,
    n_list: Option<Vec<usize>>,
    eta_grid: Option<Vec<f64>>,
    kappa_grid: Option<Vec<f64>>,
    k: Option<usize>,
    truth: Option<String>,
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(|t| t.trim())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| format!("bad value {t:?}: {e}")))
        .collect()
}

impl Settings {
    fn from_config(path: &PathBuf) -> Result<Self, String> {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("cannot read config: {e}"))?;
        let mut s = Settings::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {} is not key=value", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let parse_err = |e: String| format!("config line {}: {e}", lineno + 1);
            match key {
                "n" => s.n = Some(value.parse().map_err(|e| parse_err(format!("{e}")))?),
                "eta" => s.eta = Some(value.parse().map_err(|e| parse_err(format!("{e}")))?),
                "epsilon" => {
                    s.epsilon = Some(value.parse().map_err(|e| parse_err(format!("{e}")))?)
                }
                "seed" => s.seed = Some(value.parse().map_err(|e| parse_err(format!("{e}")))?),
                "trials" => {
                    s.trials = Some(value.parse().map_err(|e| parse_err(format!("{e}")))?)
                }
                "backend" => s.backend = Some(value.to_string()),
                "out" => s.out = Some(PathBuf::from(value)),
                "format" => s.format = Some(value.to_string()),
                "fail_prob" => {
                    s.fail_prob = Some(value.parse().map_err(|e| parse_err(format!("{e}")))?)
                }
                "hoeffding_constant" => {
                    s.hoeffding_constant =
                        Some(value.parse().map_err(|e| parse_err(format!("{e}")))?)
                }
                "reference_column" => {
                    s.reference_column =
                        Some(value.parse().map_err(|e| parse_err(format!("{e}")))?)
                }
                "margin_threshold" => {
                    s.margin_threshold =
                        Some(value.parse().map_err(|e| parse_err(format!("{e}")))?)
                }
                "n_list" => s.n_list = Some(parse_list(value).map_err(parse_err)?),
                "eta_grid" => s.eta_grid = Some(parse_list(value).map_err(parse_err)?),
                "kappa_grid" => s.kappa_grid = Some(parse_list(value).map_err(parse_err)?),
                "k" => s.k = Some(value.parse().map_err(|e| parse_err(format!("{e}")))?),
                "adaptive_reference" => {
                    s.adaptive_reference =
                        value.parse().map_err(|e| parse_err(format!("{e}")))?
                }
                "truth" => s.truth = Some(value.to_string()),
                other => return Err(format!("config line {}: unknown key {other:?}", lineno + 1)),
            }
        }
        Ok(s)
    }

    fn overlay(mut self, cli: &Cli) -> Self {
        if cli.n.is_some() {
            self.n = cli.n;
        }
        if cli.eta.is_some() {
            self.eta = cli.eta;
        }
        if cli.epsilon.is_some() {
            self.epsilon = cli.epsilon;
        }
        if cli.seed.is_some() {
            self.seed = cli.seed;
        }
        if cli.trials.is_some() {
            self.trials = cli.trials;
        }
        if cli.backend.is_some() {
            self.backend = cli.backend.clone();
        }
        if cli.out.is_some() {
            self.out = cli.out.clone();
        }
        if cli.format.is_some() {
            self.format = cli.format.clone();
        }
        if cli.fail_prob.is_some() {
            self.fail_prob = cli.fail_prob;
        }
        if cli.hoeffding_constant.is_some() {
            self.hoeffding_constant = cli.hoeffding_constant;
        }
        if cli.reference_column.is_some() {
            self.reference_column = cli.reference_column;
        }
        if cli.margin_threshold.is_some() {
            self.margin_threshold = cli.margin_threshold;
        }
        self.adaptive_reference |= cli.adaptive_reference;
        self
    }

    fn learn_config(&self, exact: bool) -> LearnConfig {
        let eta = self.eta.unwrap_or(0.05);
        let defaults = LearnConfig::default();
        LearnConfig {
            eta,
            epsilon: self.epsilon.unwrap_or(eta),
            fail_prob: self.fail_prob.unwrap_or(defaults.fail_prob),
            hoeffding_constant: self
                .hoeffding_constant
                .unwrap_or(defaults.hoeffding_constant),
            reference_column: self.reference_column.unwrap_or(defaults.reference_column),
            margin_threshold: self.margin_threshold.unwrap_or(defaults.margin_threshold),
            adaptive_reference: self.adaptive_reference,
            exact,
        }
    }

    fn format(&self) -> Result<OutputFormat, String> {
        match self.format.as_deref() {
            None | Some("jsonl") => Ok(OutputFormat::Jsonl),
            Some("csv") => Ok(OutputFormat::Csv),
            Some(other) => Err(format!("unknown format {other:?} (expected jsonl|csv)")),
        }
    }

    fn spec(&self, kind: ExperimentKind) -> Result<ExperimentSpec, String> {
        let mut spec = ExperimentSpec::new(kind, self.seed.unwrap_or(0));
        spec.n_list = self
            .n_list
            .clone()
            .or_else(|| self.n.map(|n| vec![n]))
            .unwrap_or_else(|| vec![2]);
        spec.trial_count = self.trials.unwrap_or(1000);
        if let Some(grid) = &self.kappa_grid {
            spec.kappa_grid = grid.clone();
        }
        if let Some(grid) = &self.eta_grid {
            spec.eta_grid = grid.clone();
        }
        spec.eta = self.eta.unwrap_or(0.05);
        spec.fail_prob = self.fail_prob.unwrap_or(0.05);
        spec.output_path = self.out.clone();
        spec.format = self.format()?;
        Ok(spec)
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write output: {e}")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Build the hidden operation for hierarchy runs.
fn hierarchy_truth(name: &str, n: usize, seed: u64) -> Result<DenseUnitary, String> {
    use matchgate_core::dense::cidentity;
    use num_complex::Complex64;
    if n < 2 {
        return Err("hierarchy truths need n >= 2".into());
    }
    let dim = 1usize << n;
    let one = Complex64::new(1.0, 0.0);
    let swap_full = {
        // SWAP on qubits 1,2; identity on the rest.
        let mut m = nalgebra::DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        let tail = n - 2;
        for j in 0..dim {
            let (head, rest) = (j >> tail, j & ((1 << tail) - 1));
            let swapped = ((head & 1) << 1 | (head >> 1)) << tail | rest;
            m[(swapped, j)] = one;
        }
        DenseUnitary::new(m).map_err(|e| e.to_string())?
    };
    match name {
        "swap" => Ok(swap_full),
        "cz" => {
            let mut m = cidentity(dim);
            let tail = n - 2;
            for j in 0..dim {
                if (j >> tail) == 0b11 {
                    m[(j, j)] = -one;
                }
            }
            DenseUnitary::new(m).map_err(|e| e.to_string())
        }
        "gaussian" => {
            let mut rng = master_rng(seed.wrapping_add(0x5151));
            let q = haar_orthogonal(n, &mut rng);
            unitary_from_q(&q).map_err(|e| e.to_string())
        }
        "swap-gaussian" => {
            // Swap first, Gaussian second: this order keeps every
            // conjugated generator inside the level-2 group.
            let mut rng = master_rng(seed.wrapping_add(0x5151));
            let q = haar_orthogonal(n, &mut rng);
            let g = unitary_from_q(&q).map_err(|e| e.to_string())?;
            g.mul(&swap_full).map_err(|e| e.to_string())
        }
        other => Err(format!(
            "unknown truth {other:?} (expected swap|cz|gaussian|swap-gaussian)"
        )),
    }
}

fn run(cli: &Cli) -> Result<bool, String> {
    let settings = match &cli.config {
        Some(path) => Settings::from_config(path)?,
        None => Settings::default(),
    }
    .overlay(cli);

    match &cli.command {
        Command::LearnGaussian { exact } => {
            let n = settings.n.unwrap_or(2);
            let seed = settings.seed.unwrap_or(0);
            let cfg = settings.learn_config(*exact);
            let mut rng = master_rng(seed);
            let q = haar_orthogonal(n, &mut rng);
            let mut oracle = match settings.backend.as_deref().unwrap_or("analytic") {
                "analytic" => UnitaryOracle::analytic(q.clone(), seed.wrapping_add(1)),
                "dense" => UnitaryOracle::dense(
                    unitary_from_q(&q).map_err(|e| e.to_string())?,
                    seed.wrapping_add(1),
                ),
                other => return Err(format!("unknown backend {other:?}")),
            };
            let mut report = learn_gaussian(&mut oracle, &cfg).map_err(|e| e.to_string())?;
            if n <= dense_limit() {
                let truth = unitary_from_q(&q).map_err(|e| e.to_string())?;
                let est = unitary_from_q(&report.q_ortho_matrix().map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
                report.distance_to_truth = Some(distance_d(&truth, &est));
            }
            let json = serde_json::to_string(&report).map_err(|e| e.to_string())?;
            emit(&settings.out, &json)?;
            Ok(true)
        }
        Command::LearnHierarchy { k, truth, exact } => {
            let n = settings.n.unwrap_or(2);
            let seed = settings.seed.unwrap_or(0);
            let cfg = settings.learn_config(*exact);
            let hidden = hierarchy_truth(truth, n, seed)?;
            let mut oracle = UnitaryOracle::dense(hidden.clone(), seed.wrapping_add(1));
            let mut report = learn_hierarchy(&mut oracle, *k, &cfg).map_err(|e| e.to_string())?;
            if let Some(u) = &report.u_hat {
                let est = DenseUnitary::new(u.clone()).map_err(|e| e.to_string())?;
                report.distance_to_truth = Some(distance_d(&hidden, &est));
            }
            let json = serde_json::to_string(&report).map_err(|e| e.to_string())?;
            emit(&settings.out, &json)?;
            Ok(true)
        }
        Command::BoundsSign { kappa_grid } => {
            let mut settings = settings;
            if let Some(grid) = kappa_grid {
                settings.kappa_grid = Some(parse_list(grid)?);
            }
            let spec = settings.spec(ExperimentKind::SignBoundMc)?;
            let record = experiments::run(&spec).map_err(|e| e.to_string())?;
            record.write_out().map_err(|e| e.to_string())?;
            Ok(!record.failed())
        }
        Command::BoundsError { n_list, eta_grid } => {
            let mut settings = settings;
            if let Some(list) = n_list {
                settings.n_list = Some(parse_list(list)?);
            }
            if let Some(grid) = eta_grid {
                settings.eta_grid = Some(parse_list(grid)?);
            }
            let spec = settings.spec(ExperimentKind::LogmErrorMc)?;
            let record = experiments::run(&spec).map_err(|e| e.to_string())?;
            record.write_out().map_err(|e| e.to_string())?;
            Ok(!record.failed())
        }
        Command::BenchQueries { n_list, eta_grid } => {
            let mut settings = settings;
            if let Some(list) = n_list {
                settings.n_list = Some(parse_list(list)?);
            }
            if let Some(grid) = eta_grid {
                settings.eta_grid = Some(parse_list(grid)?);
            }
            let spec = settings.spec(ExperimentKind::LearnBenchmark)?;
            let record = experiments::run(&spec).map_err(|e| e.to_string())?;
            record.write_out().map_err(|e| e.to_string())?;
            Ok(!record.failed())
        }
        Command::OracleCheck { n_list } => {
            let mut settings = settings;
            if let Some(list) = n_list {
                settings.n_list = Some(parse_list(list)?);
            }
            let spec = settings.spec(ExperimentKind::OracleCheck)?;
            let record = experiments::run(&spec).map_err(|e| e.to_string())?;
            record.write_out().map_err(|e| e.to_string())?;
            Ok(!record.failed())
        }
        Command::Compile { input } => {
            let q = match input {
                Some(path) => {
                    let m = matchgate_core::io::read_matrix_csv_file(path)
                        .map_err(|e| e.to_string())?;
                    OrthogonalMatrix::new(m).map_err(|e| e.to_string())?
                }
                None => {
                    let n = settings.n.unwrap_or(2);
                    let mut rng = master_rng(settings.seed.unwrap_or(0));
                    haar_orthogonal(n, &mut rng)
                }
            };
            let circuit = compile_to_givens(&q);
            let err = circuit.recomposition_error(&q);
            let payload = serde_json::json!({
                "n_modes": q.n_modes(),
                "det_sign": q.det_sign(),
                "gate_count": circuit.gate_count(),
                "recomposition_error": err,
                "circuit": circuit,
            });
            emit(&settings.out, &payload.to_string())?;
            Ok(err <= 1e-8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
