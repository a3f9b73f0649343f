//! Black-box oracle access to an unknown operation `M` and its conjugate.
//!
//! The oracle hides its contents behind the three measurement primitives
//! the learning protocols are allowed to use, and counts queries per
//! direction. Two interchangeable backends exist: an analytic one for
//! Gaussian oracles (closed-form outcome distributions from the hidden
//! orthogonal matrix) and a dense one that simulates the measurements
//! exactly at desk scale.
//!
//! Query-cost convention: each state preparation through `M` costs one
//! M-query; each measurement in a basis rotated by `M†` costs one
//! M†-query. The per-operation costs are documented on each method and
//! exposed in the returned [`Shot`] values.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;
use serde::{Deserialize, Serialize};

use crate::dense::{
    bell_measurement_distribution, extract_q, monomial_sparse, unitary_from_q,
    DenseUnitary, StateVector,
};
use crate::gaussian::{
    conjugation_minor, project_orthogonal, AntisymmetricGenerator, MatchgateCircuit,
    OrthogonalMatrix,
};
use crate::majorana::{monomial_mul, MajoranaMonomial, Phase};
use crate::subsets;
use crate::{Error, Result};

/// Monotone per-direction query counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounters {
    pub queries_m: u64,
    pub queries_mdag: u64,
}

impl QueryCounters {
    pub fn total(&self) -> u64 {
        self.queries_m + self.queries_mdag
    }
}

/// Cost of one measurement shot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryCost {
    pub m: u64,
    pub mdag: u64,
}

/// One measurement outcome together with its query cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shot<T> {
    pub outcome: T,
    pub cost: QueryCost,
}

/// State preparation for the correlation measurements of the second
/// protocol step: either `M|0>` or `M X_l |0>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelationPrep {
    Vacuum,
    XFlip(usize),
}

#[derive(Debug, Clone)]
enum Backend {
    Analytic { q: OrthogonalMatrix },
    Dense { m: DenseUnitary },
}

/// Black box with per-direction query counters and a seeded random stream.
#[derive(Debug)]
pub struct UnitaryOracle {
    n_modes: usize,
    backend: Backend,
    counters: QueryCounters,
    rng: ChaCha8Rng,
    step1_cache: HashMap<usize, Vec<f64>>,
    corr_cache: HashMap<(CorrelationPrep, usize, usize), f64>,
    dense_cache: Option<DenseUnitary>,
}

/// Tolerance for accepting dense step-1 mass as singleton-supported.
const SINGLETON_MASS_TOL: f64 = 1e-6;

impl UnitaryOracle {
    pub fn analytic(q: OrthogonalMatrix, seed: u64) -> Self {
        Self {
            n_modes: q.n_modes(),
            backend: Backend::Analytic { q },
            counters: QueryCounters::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            step1_cache: HashMap::new(),
            corr_cache: HashMap::new(),
            dense_cache: None,
        }
    }

    pub fn dense(m: DenseUnitary, seed: u64) -> Self {
        Self {
            n_modes: m.n_qubits(),
            backend: Backend::Dense { m },
            counters: QueryCounters::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            step1_cache: HashMap::new(),
            corr_cache: HashMap::new(),
            dense_cache: None,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn counters(&self) -> QueryCounters {
        self.counters
    }

    pub fn is_dense_backend(&self) -> bool {
        matches!(self.backend, Backend::Dense { .. })
    }

    /// Fold a sub-oracle's counters into this oracle: each sub-query in
    /// either direction is implemented by one `M` and one `M†` call.
    pub fn charge_suboracle(&mut self, sub: QueryCounters) {
        let total = sub.total();
        self.counters.queries_m += total;
        self.counters.queries_mdag += total;
    }

    /// Dense unitary realizing the hidden operation (test/diagnostic use;
    /// also backs the generic sampled paths).
    fn dense_truth(&mut self) -> Result<DenseUnitary> {
        if let Some(u) = &self.dense_cache {
            return Ok(u.clone());
        }
        let u = match &self.backend {
            Backend::Dense { m } => m.clone(),
            Backend::Analytic { q } => unitary_from_q(q)?,
        };
        self.dense_cache = Some(u.clone());
        Ok(u)
    }

    /// The hidden conjugation matrix; errors when the dense backend isn't
    /// (extended) Gaussian.
    fn q_truth(&mut self) -> Result<OrthogonalMatrix> {
        match &self.backend {
            Backend::Analytic { q } => Ok(q.clone()),
            Backend::Dense { m } => {
                let q = extract_q(m)?;
                OrthogonalMatrix::new(q)
                    .map_err(|_| Error::NotGaussian("extract_q is not orthogonal".into()))
            }
        }
    }

    // ----- step 1: Bell sampling of a conjugated generator -----

    /// Exact distribution of the step-1 outcome `ν` for row `mu`.
    ///
    /// Analytic backend: `P(ν) = Q_{μν}²`. Dense backend: the Bell-basis
    /// distribution of `M γ_mu M†`, verified to sit on singleton sets.
    pub fn step1_distribution(&mut self, mu: usize) -> Result<Vec<f64>> {
        if let Some(p) = self.step1_cache.get(&mu) {
            return Ok(p.clone());
        }
        let two_n = 2 * self.n_modes;
        let probs = match &self.backend {
            Backend::Analytic { q } => (1..=two_n)
                .map(|nu| q.entry(mu, nu).powi(2))
                .collect::<Vec<f64>>(),
            Backend::Dense { m } => {
                let full = self.step1_distribution_full_dense(mu, m.clone())?;
                let singleton_mass: f64 = (0..two_n).map(|b| full[1usize << b]).sum();
                if 1.0 - singleton_mass > SINGLETON_MASS_TOL {
                    return Err(Error::NotGaussian(format!(
                        "step-1 distribution places {:e} mass outside singletons",
                        1.0 - singleton_mass
                    )));
                }
                (0..two_n)
                    .map(|b| full[1usize << b] / singleton_mass)
                    .collect()
            }
        };
        self.step1_cache.insert(mu, probs.clone());
        Ok(probs)
    }

    fn step1_distribution_full_dense(&self, mu: usize, m: DenseUnitary) -> Result<Vec<f64>> {
        let a = m.conjugate_monomial(&MajoranaMonomial::gamma(self.n_modes, mu)?)?;
        bell_measurement_distribution(self.n_modes, &a)
    }

    /// Exact distribution over all `4^n` outcome sets, for backend
    /// equivalence checks (no queries counted).
    pub fn step1_distribution_full(&mut self, mu: usize) -> Result<Vec<f64>> {
        match &self.backend {
            Backend::Analytic { q } => {
                let two_n = 2 * self.n_modes;
                let mut full = vec![0.0; 1usize << two_n];
                for nu in 1..=two_n {
                    full[1usize << (nu - 1)] = q.entry(mu, nu).powi(2);
                }
                Ok(full)
            }
            Backend::Dense { m } => self.step1_distribution_full_dense(mu, m.clone()),
        }
    }

    /// One step-1 shot: sample `ν` with probability `Q_{μν}²`.
    /// Costs 1 M-query (preparation) and 1 M†-query (measurement basis).
    pub fn step1_sample(&mut self, mu: usize) -> Result<Shot<usize>> {
        let probs = self.step1_distribution(mu)?;
        let outcome = sample_categorical(&mut self.rng, &probs) + 1;
        self.counters.queries_m += 1;
        self.counters.queries_mdag += 1;
        Ok(Shot {
            outcome,
            cost: QueryCost { m: 1, mdag: 1 },
        })
    }

    /// `shots` step-1 measurements for row `mu`, returned as outcome counts
    /// per `ν`. Statistically identical to repeated [`Self::step1_sample`]
    /// and costed identically (`shots` queries in each direction).
    pub fn step1_counts(&mut self, mu: usize, shots: u64) -> Result<Vec<u64>> {
        let probs = self.step1_distribution(mu)?;
        let counts = sample_multinomial(&mut self.rng, shots, &probs);
        self.counters.queries_m += shots;
        self.counters.queries_mdag += shots;
        Ok(counts)
    }

    // ----- step 2: two-point correlation measurements -----

    /// Exact mean of the observable `i γ_j γ_k` on the prepared state
    /// (`j < k`). The protocols anchor at `j = 1`; a second anchor column
    /// is used to resolve the per-pair sign products.
    pub fn correlation_mean_jk(
        &mut self,
        prep: CorrelationPrep,
        j: usize,
        k: usize,
    ) -> Result<f64> {
        if j >= k || j < 1 || k > 2 * self.n_modes {
            return Err(Error::InvalidArgument(format!(
                "correlation indices (j, k) = ({j}, {k}) need 1 <= j < k <= 2n"
            )));
        }
        if let Some(&m) = self.corr_cache.get(&(prep, j, k)) {
            return Ok(m);
        }
        let mean = match &self.backend {
            Backend::Analytic { q } => {
                // Γ^{(0)}_{jk} = -Σ_l det(Q|_{2l-1,2l},{j,k});
                // the X_l preparation flips the l-th term's sign.
                let n = self.n_modes;
                let mut total = 0.0;
                for l in 1..=n {
                    let det = conjugation_minor(q, &[2 * l - 1, 2 * l], &[j, k])?;
                    let sign = match prep {
                        CorrelationPrep::Vacuum => -1.0,
                        CorrelationPrep::XFlip(fl) => {
                            if fl == l {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                    };
                    total += sign * det;
                }
                total
            }
            Backend::Dense { m } => {
                let n = self.n_modes;
                let base = match prep {
                    CorrelationPrep::Vacuum => StateVector::vacuum(n),
                    CorrelationPrep::XFlip(l) => StateVector::x_l_vacuum(n, l),
                };
                let psi = base.applied(m);
                let obs = monomial_mul(
                    &MajoranaMonomial::gamma(n, j)?,
                    &MajoranaMonomial::gamma(n, k)?,
                )?
                .scaled(Phase::PlusI);
                let val = psi.expectation(&monomial_sparse(&obs)?);
                val.re
            }
        };
        if mean.abs() > 1.0 + 1e-9 {
            return Err(Error::Inconsistency(format!(
                "correlation mean {mean} outside [-1, 1]"
            )));
        }
        self.corr_cache.insert((prep, j, k), mean);
        Ok(mean)
    }

    /// Exact mean of `i γ_1 γ_k` (the protocol's default anchor).
    pub fn correlation_mean(&mut self, prep: CorrelationPrep, k: usize) -> Result<f64> {
        self.correlation_mean_jk(prep, 1, k)
    }

    /// One ±1 correlation shot of `i γ_j γ_k`. Costs 1 M-query.
    pub fn correlation_shot_jk(
        &mut self,
        prep: CorrelationPrep,
        j: usize,
        k: usize,
    ) -> Result<Shot<i8>> {
        let mean = self.correlation_mean_jk(prep, j, k)?;
        let p_plus = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
        let outcome = if self.rng.gen::<f64>() < p_plus { 1 } else { -1 };
        self.counters.queries_m += 1;
        Ok(Shot {
            outcome,
            cost: QueryCost { m: 1, mdag: 0 },
        })
    }

    /// One ±1 correlation shot of `i γ_1 γ_k`. Costs 1 M-query.
    pub fn correlation_shot(&mut self, prep: CorrelationPrep, k: usize) -> Result<Shot<i8>> {
        self.correlation_shot_jk(prep, 1, k)
    }

    /// Empirical mean of `shots` ±1 correlation shots, via a binomial draw.
    /// Costs `shots` M-queries.
    pub fn correlation_mean_estimate_jk(
        &mut self,
        prep: CorrelationPrep,
        j: usize,
        k: usize,
        shots: u64,
    ) -> Result<f64> {
        let mean = self.correlation_mean_jk(prep, j, k)?;
        let p_plus = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
        let plus = Binomial::new(shots, p_plus)
            .expect("valid binomial")
            .sample(&mut self.rng);
        self.counters.queries_m += shots;
        Ok((2.0 * plus as f64 - shots as f64) / shots as f64)
    }

    /// Empirical mean for the default anchor `j = 1`.
    pub fn correlation_mean_estimate(
        &mut self,
        prep: CorrelationPrep,
        k: usize,
        shots: u64,
    ) -> Result<f64> {
        self.correlation_mean_estimate_jk(prep, 1, k, shots)
    }

    // ----- step 3: single-shot row-sign measurement -----

    /// Measure the learner's estimate `q_bar` against the hidden operation:
    /// the outcome set `P` identifies the row-sign pattern. Costs 1 M-query
    /// and 1 M†-query.
    ///
    /// When `q_bar` differs from the truth by row signs only, the outcome is
    /// the deterministic point mass; otherwise the exact Bell distribution
    /// is sampled (dense scale required).
    pub fn step3_measure(&mut self, q_bar: &DMatrix<f64>) -> Result<Shot<u32>> {
        let outcome = self.step3_outcome(q_bar)?;
        self.counters.queries_m += 1;
        self.counters.queries_mdag += 1;
        Ok(Shot {
            outcome,
            cost: QueryCost { m: 1, mdag: 1 },
        })
    }

    fn step3_outcome(&mut self, q_bar: &DMatrix<f64>) -> Result<u32> {
        let two_n = 2 * self.n_modes;
        let q_true = self.q_truth()?;
        // Row-sign detection: q_bar Q^T should be a signed identity.
        let t = q_bar * q_true.matrix().transpose();
        let mut signed_identity = true;
        for r in 0..two_n {
            for c in 0..two_n {
                let v = t[(r, c)];
                let target = if r == c { 1.0 } else { 0.0 };
                if (v.abs() - target).abs() > 1e-9 {
                    signed_identity = false;
                }
            }
        }
        if signed_identity {
            // Deterministic point mass: P = R for even |R|, else complement.
            let mut r_mask = 0u32;
            for i in 0..two_n {
                if t[(i, i)] < 0.0 {
                    r_mask |= 1 << i;
                }
            }
            let p = if subsets::weight(r_mask).is_multiple_of(2) {
                r_mask
            } else {
                subsets::complement(r_mask, two_n)
            };
            return Ok(p);
        }

        // Generic path: sample from |Tr(M_Q γ_S M_Qbar†)/d|² exactly.
        let truth = self.dense_truth()?;
        let projected = project_orthogonal(q_bar)?;
        let m_bar = unitary_from_q(&projected)?;
        let a = m_bar.adjoint().mul(&truth)?;
        let probs = bell_measurement_distribution(self.n_modes, a.matrix())?;
        Ok(sample_categorical(&mut self.rng, &probs) as u32)
    }

    // ----- hierarchy: phase-pattern measurement -----

    /// Sample `S` from `P(S) = |Tr(γ_S† M† W)/d|²`. Dense backend only;
    /// costs 1 M†-query.
    pub fn hierarchy_phase_measure(&mut self, w: &DenseUnitary) -> Result<Shot<u32>> {
        let m = match &self.backend {
            Backend::Dense { m } => m.clone(),
            Backend::Analytic { .. } => {
                return Err(Error::InvalidArgument(
                    "hierarchy_phase_measure requires a dense backend".into(),
                ))
            }
        };
        let a = m.adjoint().mul(w)?;
        let probs = bell_measurement_distribution(self.n_modes, a.matrix())?;
        let outcome = sample_categorical(&mut self.rng, &probs) as u32;
        self.counters.queries_mdag += 1;
        Ok(Shot {
            outcome,
            cost: QueryCost { m: 0, mdag: 1 },
        })
    }

    // ----- hierarchy: sub-oracle construction -----

    /// Deterministic seed derivation from the oracle's own stream, for
    /// spawning sub-oracles.
    pub fn derive_seed(&mut self) -> u64 {
        self.rng.gen()
    }

    /// Black box for the conjugated generator `M_mu = M γ_mu M†`.
    ///
    /// Each query to the sub-oracle is implemented by one `M` and one `M†`
    /// call; fold the child's counters back with [`Self::charge_suboracle`].
    pub fn conjugated_suboracle(&mut self, mu: usize, seed: u64) -> Result<UnitaryOracle> {
        let truth = self.dense_truth()?;
        let a = truth.conjugate_monomial(&MajoranaMonomial::gamma(self.n_modes, mu)?)?;
        let m = DenseUnitary::new(a)?;
        Ok(UnitaryOracle::dense(m, seed))
    }
}

/// Draw one index from an unnormalized nonnegative weight vector.
fn sample_categorical(rng: &mut impl Rng, probs: &[f64]) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &p) in probs.iter().enumerate() {
        u -= p;
        if u <= 0.0 {
            return i;
        }
    }
    probs.len() - 1
}

/// Multinomial counts via sequential conditional binomials; deterministic
/// given the rng stream and independent of any parallel context.
fn sample_multinomial(rng: &mut impl Rng, shots: u64, probs: &[f64]) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining_shots = shots;
    let mut remaining_mass: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining_shots == 0 {
            break;
        }
        if i + 1 == probs.len() || remaining_mass <= 0.0 {
            counts[i] = remaining_shots;
            break;
        }
        let frac = (p / remaining_mass).clamp(0.0, 1.0);
        let c = Binomial::new(remaining_shots, frac)
            .expect("valid binomial")
            .sample(rng);
        counts[i] = c;
        remaining_shots -= c;
        remaining_mass -= p;
    }
    counts
}

/// JSON description of an oracle: backend, seed and one of `q`, `h` or
/// `circuit` for the hidden operation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSpec {
    pub backend: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<MatchgateCircuit>,
}

impl OracleSpec {
    pub fn build(&self) -> Result<UnitaryOracle> {
        let q = if let Some(rows) = &self.q {
            Some(OrthogonalMatrix::new(crate::io::rows_to_matrix(rows)?)?)
        } else if let Some(rows) = &self.h {
            let g = AntisymmetricGenerator::new(crate::io::rows_to_matrix(rows)?)?;
            Some(crate::gaussian::q_from_h(&g))
        } else if let Some(c) = &self.circuit {
            Some(OrthogonalMatrix::new(c.recompose())?)
        } else {
            None
        };
        let q = q.ok_or_else(|| {
            Error::InvalidArgument("oracle spec needs one of q, h or circuit".into())
        })?;
        match self.backend.as_str() {
            "analytic" => Ok(UnitaryOracle::analytic(q, self.seed)),
            "dense" => Ok(UnitaryOracle::dense(unitary_from_q(&q)?, self.seed)),
            other => Err(Error::Parse(format!("unknown backend {other:?}"))),
        }
    }
}
