//! Learning the generator `h` from copies of the Gibbs state `ρ_h`.
//!
//! The correlation matrix of `ρ_h` determines `h` uniquely while its
//! singular values stay below 1; each independent entry is estimated from
//! ±1 measurements of `i γ_j γ_k`.

use nalgebra::DMatrix;
use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;

use crate::dense::{correlation_from_density, gibbs_density};
use crate::gaussian::canonical::antisym_canonical;
use crate::gaussian::{AntisymmetricGenerator, CorrelationMatrix};
use crate::{Error, Result};

/// Anything that can hand the learner correlation-entry estimates.
pub trait CorrelationSource {
    fn n_modes(&self) -> usize;
    /// Estimate of `Γ_{jk}` for `j < k`.
    fn estimate(&mut self, j: usize, k: usize) -> Result<f64>;
    /// Total state copies consumed so far.
    fn samples_used(&self) -> u64;
}

/// Infinite-shot source backed by a known correlation matrix.
pub struct ExactCorrelationSource {
    gamma: CorrelationMatrix,
}

impl ExactCorrelationSource {
    pub fn new(gamma: CorrelationMatrix) -> Self {
        Self { gamma }
    }
}

impl CorrelationSource for ExactCorrelationSource {
    fn n_modes(&self) -> usize {
        self.gamma.n_modes()
    }

    fn estimate(&mut self, j: usize, k: usize) -> Result<f64> {
        Ok(self.gamma.matrix()[(j - 1, k - 1)])
    }

    fn samples_used(&self) -> u64 {
        0
    }
}

/// Desk-scale sampler: exact means from the dense Gibbs density, sampled as
/// `shots_per_entry` ±1 outcomes per entry.
pub struct GibbsSampler {
    n_modes: usize,
    means: DMatrix<f64>,
    shots_per_entry: u64,
    rng: ChaCha8Rng,
    used: u64,
}

impl GibbsSampler {
    pub fn new(g: &AntisymmetricGenerator, shots_per_entry: u64, seed: u64) -> Result<Self> {
        let rho = gibbs_density(g)?;
        let means = correlation_from_density(g.n_modes(), &rho)?;
        Ok(Self {
            n_modes: g.n_modes(),
            means,
            shots_per_entry,
            rng: ChaCha8Rng::seed_from_u64(seed),
            used: 0,
        })
    }

    /// Per-entry shot count realizing precision `epsilon` with failure
    /// budget `fail_prob` over all `n(2n-1)` entries.
    pub fn shots_for(n_modes: usize, epsilon: f64, fail_prob: f64, constant: f64) -> u64 {
        let entries = (n_modes * (2 * n_modes - 1)) as f64;
        (constant * (2.0 * entries / fail_prob).ln() / (epsilon * epsilon)).ceil() as u64
    }
}

impl CorrelationSource for GibbsSampler {
    fn n_modes(&self) -> usize {
        self.n_modes
    }

    fn estimate(&mut self, j: usize, k: usize) -> Result<f64> {
        let mean = self.means[(j - 1, k - 1)];
        let p_plus = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
        let shots = self.shots_per_entry;
        let plus = Binomial::new(shots, p_plus)
            .expect("valid binomial")
            .sample(&mut self.rng);
        self.used += shots;
        Ok((2.0 * plus as f64 - shots as f64) / shots as f64)
    }

    fn samples_used(&self) -> u64 {
        self.used
    }
}

#[derive(Debug, Clone)]
pub struct GibbsLearnOutcome {
    pub h: AntisymmetricGenerator,
    /// A correlation singular value reached 1 and was clipped.
    pub clipped: bool,
    pub samples_used: u64,
}

/// Recover `h` from correlation estimates: blockwise `v = -artanh(g)/2` on
/// the canonical planes of the estimated `Γ̂`.
pub fn learn_from_gibbs(source: &mut dyn CorrelationSource) -> Result<GibbsLearnOutcome> {
    let n = source.n_modes();
    let two_n = 2 * n;
    let mut gamma = DMatrix::<f64>::zeros(two_n, two_n);
    for j in 1..=two_n {
        for k in j + 1..=two_n {
            let v = source.estimate(j, k)?;
            gamma[(j - 1, k - 1)] = v;
            gamma[(k - 1, j - 1)] = -v;
        }
    }

    let scale = gamma.amax().max(1.0);
    let canon = antisym_canonical(&gamma, 1e-12 * scale)?;
    let mut clipped = false;
    let mut h = DMatrix::<f64>::zeros(two_n, two_n);
    const CLIP: f64 = 1.0 - 1e-12;
    for p in &canon.planes {
        let mut g = p.value;
        if g >= CLIP {
            g = CLIP;
            clipped = true;
        }
        let v = -g.atanh() / 2.0;
        h += v * (&p.e2 * p.e1.transpose() - &p.e1 * p.e2.transpose());
    }
    let h = AntisymmetricGenerator::new((&h - h.transpose()) * 0.5)
        .map_err(|e| Error::Inconsistency(format!("assembled h not antisymmetric: {e}")))?;
    Ok(GibbsLearnOutcome {
        h,
        clipped,
        samples_used: source.samples_used(),
    })
}
