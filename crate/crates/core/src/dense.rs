//! Exact 2^n-dimensional ground truth for desk-scale systems.
//!
//! Everything here is dense complex linear algebra: building unitaries from
//! generators and circuits, extracting the conjugation matrix, distances,
//! decomposition over the Hermitian monomial basis, Bell-basis outcome
//! distributions, Gibbs densities and the Choi-based reconstruction of a
//! unitary from its conjugation action. All operations respect a configurable
//! qubit limit so accidental exponential blowups fail fast.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use once_cell::sync::Lazy;

use crate::gaussian::{compile_to_givens, AntisymmetricGenerator, Gate, MatchgateCircuit, OrthogonalMatrix};
use crate::majorana::{jordan_wigner, HermitianMonomial, MajoranaMonomial, PauliLetter, PauliString};
use crate::subsets;
use crate::{Error, Result};

/// Default cap on dense computations, in qubits.
pub const DEFAULT_DENSE_LIMIT: usize = 6;

static DENSE_LIMIT: Lazy<usize> = Lazy::new(|| {
    std::env::var("MATCHGATE_DENSE_LIMIT")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(DEFAULT_DENSE_LIMIT)
});

/// Current dense limit (override with env var `MATCHGATE_DENSE_LIMIT`).
pub fn dense_limit() -> usize {
    *DENSE_LIMIT
}

pub fn check_dense_limit(n_qubits: usize) -> Result<()> {
    if n_qubits > dense_limit() {
        return Err(Error::DenseLimit {
            n: n_qubits,
            limit: dense_limit(),
        });
    }
    Ok(())
}

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn cidentity(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_diagonal_element(dim, dim, ONE)
}

/// A validated unitary on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseUnitary {
    n_qubits: usize,
    m: DMatrix<Complex64>,
}

impl DenseUnitary {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if dim != m.ncols() || dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "unitary must be 2^n x 2^n, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let dev = (m.adjoint() * &m - cidentity(dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not unitary: max |U†U - I| = {dev:e}"
            )));
        }
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            m,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            m: cidentity(1 << n_qubits),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            m: self.m.adjoint(),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::ModeMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            m: &self.m * &other.m,
        })
    }

    pub fn scaled(&self, phase: Complex64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            m: self.m.map(|z| z * phase),
        }
    }

    /// `U γ_S U†` for a phased monomial.
    pub fn conjugate_monomial(&self, a: &MajoranaMonomial) -> Result<DMatrix<Complex64>> {
        let g = monomial_dense(a)?;
        Ok(&self.m * g * self.m.adjoint())
    }
}

/// Sparse action of a phased Pauli string: `P |j> = amp[j] |j ^ flip>`.
#[derive(Debug, Clone)]
pub struct SparsePauli {
    pub flip: usize,
    pub amp: Vec<Complex64>,
}

/// Expand a Pauli string into its permutation-with-phase form.
///
/// Qubit 1 is the most significant bit of the basis index.
pub fn sparse_pauli(p: &PauliString) -> SparsePauli {
    let n = p.n_qubits;
    let dim = 1usize << n;
    let mut flip = 0usize;
    for (qi, &l) in p.letters.iter().enumerate() {
        if matches!(l, PauliLetter::X | PauliLetter::Y) {
            flip |= 1 << (n - 1 - qi);
        }
    }
    let base = p.phase.as_complex();
    let mut amp = vec![ZERO; dim];
    for (j, a) in amp.iter_mut().enumerate() {
        let mut acc = base;
        for (qi, &l) in p.letters.iter().enumerate() {
            let bit = (j >> (n - 1 - qi)) & 1;
            match l {
                PauliLetter::I | PauliLetter::X => {}
                PauliLetter::Z => {
                    if bit == 1 {
                        acc = -acc;
                    }
                }
                PauliLetter::Y => {
                    // Y|0> = i|1>, Y|1> = -i|0>
                    acc *= if bit == 0 {
                        Complex64::new(0.0, 1.0)
                    } else {
                        Complex64::new(0.0, -1.0)
                    };
                }
            }
        }
        *a = acc;
    }
    SparsePauli { flip, amp }
}

impl SparsePauli {
    /// `Tr(P† A)` in `O(dim)`.
    pub fn trace_adjoint_times(&self, a: &DMatrix<Complex64>) -> Complex64 {
        (0..self.amp.len())
            .map(|j| self.amp[j].conj() * a[(j ^ self.flip, j)])
            .sum()
    }

    /// `<psi| P |psi>` in `O(dim)`.
    pub fn expectation(&self, psi: &DVector<Complex64>) -> Complex64 {
        (0..self.amp.len())
            .map(|j| psi[j ^ self.flip].conj() * self.amp[j] * psi[j])
            .sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.amp.len();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for j in 0..dim {
            m[(j ^ self.flip, j)] = self.amp[j];
        }
        m
    }
}

/// Dense matrix of a phased Pauli string.
pub fn pauli_dense(p: &PauliString) -> DMatrix<Complex64> {
    sparse_pauli(p).to_dense()
}

/// Dense matrix of a phased Majorana monomial (via Jordan-Wigner).
pub fn monomial_dense(a: &MajoranaMonomial) -> Result<DMatrix<Complex64>> {
    check_dense_limit(a.n_modes)?;
    Ok(pauli_dense(&jordan_wigner(a)))
}

/// Sparse form of a monomial.
pub fn monomial_sparse(a: &MajoranaMonomial) -> Result<SparsePauli> {
    check_dense_limit(a.n_modes)?;
    Ok(sparse_pauli(&jordan_wigner(a)))
}

/// The dense Majorana generator `γ_mu`.
pub fn gamma_dense(n_modes: usize, mu: usize) -> Result<DenseUnitary> {
    check_dense_limit(n_modes)?;
    let g = MajoranaMonomial::gamma(n_modes, mu)?;
    Ok(DenseUnitary {
        n_qubits: n_modes,
        m: monomial_dense(&g)?,
    })
}

/// Hermitian eigendecomposition helper: `(eigenvalues, eigenvectors)`.
fn hermitian_eigen(m: DMatrix<Complex64>) -> (DVector<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m);
    (eig.eigenvalues, eig.eigenvectors)
}

/// Dense quadratic Hamiltonian `H = i Σ h_{μν} γ_μ γ_ν`.
pub fn quadratic_hamiltonian(g: &AntisymmetricGenerator) -> Result<DMatrix<Complex64>> {
    let n = g.n_modes();
    check_dense_limit(n)?;
    let dim = 1usize << n;
    let mut ham = DMatrix::from_element(dim, dim, ZERO);
    let h = g.matrix();
    for mu in 1..=2 * n {
        for nu in mu + 1..=2 * n {
            let coeff = 2.0 * h[(mu - 1, nu - 1)];
            if coeff == 0.0 {
                continue;
            }
            let prod = crate::majorana::monomial_mul(
                &MajoranaMonomial::gamma(n, mu)?,
                &MajoranaMonomial::gamma(n, nu)?,
            )?;
            let sp = monomial_sparse(&prod)?;
            let scale = Complex64::new(0.0, coeff);
            for j in 0..dim {
                ham[(j ^ sp.flip, j)] += scale * sp.amp[j];
            }
        }
    }
    Ok(ham)
}

/// `M = exp(iH)` for the quadratic Hamiltonian of `h`.
pub fn unitary_from_h(g: &AntisymmetricGenerator) -> Result<DenseUnitary> {
    let ham = quadratic_hamiltonian(g)?;
    let dim = ham.nrows();
    let (vals, vecs) = hermitian_eigen(ham);
    let phases = DMatrix::from_diagonal(&vals.map(|x| Complex64::new(0.0, x).exp()));
    let m = &vecs * phases * vecs.adjoint();
    Ok(DenseUnitary {
        n_qubits: dim.trailing_zeros() as usize,
        m,
    })
}

/// Dense unitary of one circuit gate.
fn gate_dense(n_modes: usize, g: &Gate) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << n_modes;
    match *g {
        Gate::Givens {
            modes: (mu, nu),
            angle,
        } => {
            let pair = crate::majorana::monomial_mul(
                &MajoranaMonomial::gamma(n_modes, mu)?,
                &MajoranaMonomial::gamma(n_modes, nu)?,
            )?;
            let sp = monomial_sparse(&pair)?;
            // (γ_mu γ_nu)^2 = -I, so exp((θ/2) γ_mu γ_nu) = cos(θ/2) I + sin(θ/2) γ_mu γ_nu.
            let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
            let mut m = DMatrix::from_element(dim, dim, ZERO);
            for j in 0..dim {
                m[(j, j)] += Complex64::new(c, 0.0);
                m[(j ^ sp.flip, j)] += Complex64::new(s, 0.0) * sp.amp[j];
            }
            Ok(m)
        }
        Gate::Reflection { mode } => monomial_dense(&MajoranaMonomial::gamma(n_modes, mode)?),
    }
}

/// Ordered product of the per-gate unitaries; gate `k` in the list acts
/// after gate `k-1`, so it sits on the left of the operator product.
pub fn unitary_from_circuit(c: &MatchgateCircuit) -> Result<DenseUnitary> {
    check_dense_limit(c.n_modes)?;
    let dim = 1usize << c.n_modes;
    let mut u = cidentity(dim);
    for g in &c.gates {
        u = gate_dense(c.n_modes, g)? * u;
    }
    Ok(DenseUnitary {
        n_qubits: c.n_modes,
        m: u,
    })
}

/// A dense unitary realizing the conjugation matrix `Q` (any determinant).
pub fn unitary_from_q(q: &OrthogonalMatrix) -> Result<DenseUnitary> {
    unitary_from_circuit(&compile_to_givens(q))
}

/// `Q_{μν} = Tr(γ_ν U γ_μ U†)/d`; orthogonal iff `U` is (extended) Gaussian.
pub fn extract_q(u: &DenseUnitary) -> Result<DMatrix<f64>> {
    let n = u.n_qubits;
    check_dense_limit(n)?;
    let d = u.dim() as f64;
    let sparse: Vec<SparsePauli> = (1..=2 * n)
        .map(|nu| monomial_sparse(&MajoranaMonomial::gamma(n, nu).unwrap()))
        .collect::<Result<_>>()?;
    let mut q = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for mu in 1..=2 * n {
        let a = u.conjugate_monomial(&MajoranaMonomial::gamma(n, mu)?)?;
        for nu in 1..=2 * n {
            // Both operators are Hermitian so the trace is real.
            q[(mu - 1, nu - 1)] = sparse[nu - 1].trace_adjoint_times(&a).re;
        }
    }
    Ok(q / d)
}

/// Phase-sensitive distance `D⁺ = sqrt(1 - Re Tr(U1†U2)/d)`, in `[0, √2]`.
pub fn distance_d_plus(u1: &DenseUnitary, u2: &DenseUnitary) -> f64 {
    let d = u1.dim() as f64;
    let t = (u1.m.adjoint() * &u2.m).trace() / Complex64::new(d, 0.0);
    (1.0 - t.re).max(0.0).sqrt().min(std::f64::consts::SQRT_2)
}

/// Phase-insensitive distance `D = sqrt(1 - |Tr(U1†U2)/d|²)`, in `[0, 1]`.
pub fn distance_d(u1: &DenseUnitary, u2: &DenseUnitary) -> f64 {
    let d = u1.dim() as f64;
    let t = (u1.m.adjoint() * &u2.m).trace() / Complex64::new(d, 0.0);
    (1.0 - t.norm_sqr()).max(0.0).sqrt().min(1.0)
}

/// Same distances for raw operator matrices (not necessarily unitary).
pub fn distance_d_plus_raw(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let d = a.nrows() as f64;
    let t = (a.adjoint() * b).trace() / Complex64::new(d, 0.0);
    (1.0 - t.re).max(0.0).sqrt()
}

/// Coefficients of an operator over the Hermitian monomial basis
/// `γ̄_S`, indexed by support mask.
#[derive(Debug, Clone)]
pub struct CoefficientVector {
    pub n_modes: usize,
    pub coeffs: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn coeff(&self, support: &[usize]) -> Complex64 {
        self.coeffs[subsets::mask_from_support(support) as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Mask with the largest coefficient magnitude.
    pub fn argmax_mask(&self) -> u32 {
        let mut best = 0usize;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() > self.coeffs[best].norm_sqr() {
                best = i;
            }
        }
        best as u32
    }

    /// Rebuild the dense operator `Σ c_S γ̄_S`.
    pub fn reconstruct(&self) -> Result<DMatrix<Complex64>> {
        let dim = 1usize << self.n_modes;
        let mut out = DMatrix::from_element(dim, dim, ZERO);
        for (mask, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let h = HermitianMonomial::from_set(
                self.n_modes,
                subsets::support_from_mask(mask as u32),
            )?;
            let sp = monomial_sparse(h.monomial())?;
            for j in 0..dim {
                out[(j ^ sp.flip, j)] += c * sp.amp[j];
            }
        }
        Ok(out)
    }
}

/// Expand an operator over the Hermitian monomial basis:
/// `c_S = Tr(γ̄_S† A)/d` for all `4^n` sets.
pub fn pauli_decompose_matrix(n_modes: usize, a: &DMatrix<Complex64>) -> Result<CoefficientVector> {
    check_dense_limit(n_modes)?;
    let d = a.nrows() as f64;
    let total = 1usize << (2 * n_modes);
    let mut coeffs = vec![ZERO; total];
    for (mask, dst) in coeffs.iter_mut().enumerate() {
        let h = HermitianMonomial::from_set(n_modes, subsets::support_from_mask(mask as u32))?;
        let sp = monomial_sparse(h.monomial())?;
        *dst = sp.trace_adjoint_times(a) / Complex64::new(d, 0.0);
    }
    Ok(CoefficientVector {
        n_modes,
        coeffs,
    })
}

pub fn pauli_decompose(u: &DenseUnitary) -> Result<CoefficientVector> {
    pauli_decompose_matrix(u.n_qubits, &u.m)
}

/// Rotate the global phase so the largest-magnitude basis coefficient is
/// real positive; keeps golden files stable.
pub fn canonicalize_phase(u: &DenseUnitary) -> Result<DenseUnitary> {
    let c = pauli_decompose(u)?;
    let top = c.coeffs[c.argmax_mask() as usize];
    if top.norm() == 0.0 {
        return Ok(u.clone());
    }
    let phase = top.conj() / top.norm();
    Ok(u.scaled(phase))
}

/// Bell-basis outcome distribution of an operator `A`:
/// `P(S) = |Tr(γ_S† A)/d|²`, indexed by support mask. Sums to 1 whenever
/// `A` is unitary.
pub fn bell_measurement_distribution(n_modes: usize, a: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    check_dense_limit(n_modes)?;
    let d = a.nrows() as f64;
    let total = 1usize << (2 * n_modes);
    let mut probs = vec![0.0; total];
    for (mask, p) in probs.iter_mut().enumerate() {
        let g = MajoranaMonomial::from_set(n_modes, subsets::support_from_mask(mask as u32))?;
        let sp = monomial_sparse(&g)?;
        *p = (sp.trace_adjoint_times(a) / Complex64::new(d, 0.0)).norm_sqr();
    }
    Ok(probs)
}

/// Reconstruct `W` (up to phase) from its conjugation action
/// `A_mu ≈ W γ_mu W†`.
///
/// The action extends multiplicatively to all monomials; assembling
/// `(1/d²) Σ_S A_S ⊗ conj(γ_S)` yields the Choi operator of the candidate
/// channel, which is rank-1 exactly when the action is a unitary
/// conjugation. Returns the polar-unitarized reshaped top eigenvector and
/// the residual `1 - λ_top`.
pub fn reconstruct_from_action(
    n_modes: usize,
    action: &[DMatrix<Complex64>],
) -> Result<(DenseUnitary, f64)> {
    check_dense_limit(2 * n_modes)?; // the Choi operator lives on d² dimensions
    if action.len() != 2 * n_modes {
        return Err(Error::InvalidArgument(format!(
            "need 2n = {} generator images, got {}",
            2 * n_modes,
            action.len()
        )));
    }
    let d = 1usize << n_modes;
    let total = 1usize << (2 * n_modes);

    // A_S = A_{s1} A_{s2} ... (ascending) memoized over masks.
    let mut products: Vec<DMatrix<Complex64>> = Vec::with_capacity(total);
    products.push(cidentity(d));
    for mask in 1..total {
        let low = mask.trailing_zeros() as usize; // lowest index acts leftmost
        let rest = mask & (mask - 1);
        let m = &action[low] * &products[rest];
        products.push(m);
    }

    let dd = d * d;
    let mut choi = DMatrix::from_element(dd, dd, ZERO);
    let scale = 1.0 / (d * d) as f64;
    for (mask, a_s) in products.iter().enumerate() {
        let g = MajoranaMonomial::from_set(n_modes, subsets::support_from_mask(mask as u32))?;
        let sp = monomial_sparse(&g)?;
        for col in 0..d {
            let row = col ^ sp.flip;
            let b = sp.amp[col].conj() * scale;
            if b == ZERO {
                continue;
            }
            for aa in 0..d {
                for bb in 0..d {
                    let v = a_s[(aa, bb)];
                    if v != ZERO {
                        choi[(aa * d + row, bb * d + col)] += v * b;
                    }
                }
            }
        }
    }

    let (vals, vecs) = hermitian_eigen(choi);
    // Locate top and second eigenvalues.
    let mut top = 0usize;
    for i in 1..dd {
        if vals[i] > vals[top] {
            top = i;
        }
    }
    let lambda_top = vals[top];
    let lambda_second = (0..dd)
        .filter(|&i| i != top)
        .map(|i| vals[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = lambda_top - lambda_second;
    if gap < 0.5 {
        return Err(Error::InconsistentAction { gap });
    }

    let w = vecs.column(top);
    let mut raw = DMatrix::from_element(d, d, ZERO);
    let sqrt_d = (d as f64).sqrt();
    for a in 0..d {
        for b in 0..d {
            raw[(a, b)] = w[a * d + b] * sqrt_d;
        }
    }
    let unitary = polar_unitary(&raw)?;
    Ok((unitary, 1.0 - lambda_top))
}

/// Complex polar factor `W (W†W)^{-1/2}` via Hermitian eigendecomposition.
pub fn polar_unitary(w: &DMatrix<Complex64>) -> Result<DenseUnitary> {
    let gram = w.adjoint() * w;
    let (vals, vecs) = hermitian_eigen(gram);
    if vals.iter().any(|&v| v <= 1e-12) {
        return Err(Error::RankDeficient {
            sigma_min: vals.min().max(0.0).sqrt(),
            tol: 1e-6,
        });
    }
    let inv_sqrt = DMatrix::from_diagonal(&vals.map(|v| Complex64::new(1.0 / v.sqrt(), 0.0)));
    let m = w * (&vecs * inv_sqrt * vecs.adjoint());
    DenseUnitary::new(m)
}

/// Dense Gibbs density `ρ_h = e^{-H} / Tr(e^{-H})`.
pub fn gibbs_density(g: &AntisymmetricGenerator) -> Result<DMatrix<Complex64>> {
    let ham = quadratic_hamiltonian(g)?;
    let (vals, vecs) = hermitian_eigen(ham);
    // Shift by the minimum eigenvalue for a stable exponential.
    let min = vals.min();
    let weights = DMatrix::from_diagonal(&vals.map(|x| Complex64::new((-(x - min)).exp(), 0.0)));
    let rho = &vecs * weights * vecs.adjoint();
    let tr = rho.trace().re;
    Ok(rho / Complex64::new(tr, 0.0))
}

/// Correlation matrix `(i/2) Tr([γ_j, γ_k] ρ)` of a density matrix.
pub fn correlation_from_density(n_modes: usize, rho: &DMatrix<Complex64>) -> Result<DMatrix<f64>> {
    check_dense_limit(n_modes)?;
    let two_n = 2 * n_modes;
    let mut gamma = DMatrix::<f64>::zeros(two_n, two_n);
    for j in 1..=two_n {
        for k in j + 1..=two_n {
            // For j != k: [γ_j, γ_k] = 2 γ_j γ_k, so Γ_jk = Tr(i γ_j γ_k ρ).
            let prod = crate::majorana::monomial_mul(
                &MajoranaMonomial::gamma(n_modes, j)?,
                &MajoranaMonomial::gamma(n_modes, k)?,
            )?
            .scaled(crate::majorana::Phase::PlusI);
            let sp = monomial_sparse(&prod)?;
            // Tr(P ρ) = conj(Tr(P† ρ†)) = conj over Hermitian ρ.
            let val = (0..rho.nrows())
                .map(|col| sp.amp[col] * rho[(col, col ^ sp.flip)])
                .sum::<Complex64>();
            gamma[(j - 1, k - 1)] = val.re;
            gamma[(k - 1, j - 1)] = -val.re;
        }
    }
    Ok(gamma)
}

/// A pure state on `n_qubits` qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amps: DVector<Complex64>,
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = DVector::from_element(1 << n_qubits, ZERO);
        amps[index] = ONE;
        Self { n_qubits, amps }
    }

    /// `|0...0>` with the bit of qubit `l` (1-based, MSB first) flipped.
    pub fn x_l_vacuum(n_qubits: usize, l: usize) -> Self {
        Self::basis(n_qubits, 1 << (n_qubits - l))
    }

    pub fn vacuum(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn applied(&self, u: &DenseUnitary) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amps: u.matrix() * &self.amps,
        }
    }

    pub fn expectation(&self, op: &SparsePauli) -> Complex64 {
        op.expectation(&self.amps)
    }
}
