//! Orthogonal-matrix representation of Gaussian operations.
//!
//! A Gaussian operation on `n` modes is labelled by the orthogonal matrix
//! `Q = exp(4h)` through which it conjugates the Majorana generators. This
//! module owns the real-matrix side of the story: generators `h`,
//! correlation matrices, minor-determinant conjugation coefficients, Haar
//! sampling, compilation into adjacent Givens rotations and the polar
//! projection used to repair learned estimates.

pub mod canonical;

use std::collections::BTreeMap;

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::majorana::{MajoranaMonomial, Phase};
use crate::{Error, Result};
use canonical::{antisym_canonical, orthogonal_canonical};

/// Max-entry tolerance for accepting a matrix as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Max-entry tolerance for accepting input as antisymmetric.
pub const ANTISYMMETRY_TOL: f64 = 1e-12;
/// Eigenangles closer to pi than this make the principal log ambiguous.
pub const LOG_BRANCH_TOL: f64 = 1e-6;

/// Real antisymmetric generator `h` with `Q = exp(4h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntisymmetricGenerator {
    n_modes: usize,
    #[serde(with = "crate::io::mat_serde")]
    h: DMatrix<f64>,
}

impl AntisymmetricGenerator {
    /// Accepts a matrix within [`ANTISYMMETRY_TOL`] of antisymmetric and
    /// antisymmetrizes it exactly.
    pub fn new(h: DMatrix<f64>) -> Result<Self> {
        let dim = h.nrows();
        if dim != h.ncols() || !dim.is_multiple_of(2) || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "generator must be 2n x 2n, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let asym = (&h + h.transpose()).amax();
        if asym > ANTISYMMETRY_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not antisymmetric: max |h + h^T| = {asym:e}"
            )));
        }
        let exact = (&h - h.transpose()) * 0.5;
        Ok(Self {
            n_modes: dim / 2,
            h: exact,
        })
    }

    pub fn zeros(n_modes: usize) -> Self {
        Self {
            n_modes,
            h: DMatrix::zeros(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }
}

/// `Q ∈ O(2n)`; `det(Q) = +1` labels a Gaussian operation, `det(Q) = -1`
/// an extended Gaussian operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalMatrix {
    n_modes: usize,
    #[serde(with = "crate::io::mat_serde")]
    q: DMatrix<f64>,
}

impl OrthogonalMatrix {
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        let dim = q.nrows();
        if dim != q.ncols() || !dim.is_multiple_of(2) || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "orthogonal matrix must be 2n x 2n, got {}x{}",
                q.nrows(),
                q.ncols()
            )));
        }
        let gram = &q * q.transpose() - DMatrix::<f64>::identity(dim, dim);
        let dev = gram.amax();
        if dev > ORTHOGONALITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "matrix is not orthogonal: max |QQ^T - I| = {dev:e}"
            )));
        }
        let det = q.determinant();
        if (det.abs() - 1.0).abs() > ORTHOGONALITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "determinant {det} is not ±1"
            )));
        }
        Ok(Self {
            n_modes: dim / 2,
            q,
        })
    }

    pub fn identity(n_modes: usize) -> Self {
        Self {
            n_modes,
            q: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// Sign of the determinant: `+1` or `-1`.
    pub fn det_sign(&self) -> i32 {
        if self.q.determinant() >= 0.0 {
            1
        } else {
            -1
        }
    }

    /// Entry `Q_{mu nu}` with 1-based indices.
    pub fn entry(&self, mu: usize, nu: usize) -> f64 {
        self.q[(mu - 1, nu - 1)]
    }
}

/// Antisymmetric two-point correlation matrix of a state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    n_modes: usize,
    #[serde(with = "crate::io::mat_serde")]
    gamma: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn new(gamma: DMatrix<f64>) -> Result<Self> {
        let dim = gamma.nrows();
        if dim != gamma.ncols() || !dim.is_multiple_of(2) || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "correlation matrix must be 2n x 2n, got {}x{}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        let asym = (&gamma + gamma.transpose()).amax();
        if asym > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "correlation matrix is not antisymmetric: {asym:e}"
            )));
        }
        let exact = (&gamma - gamma.transpose()) * 0.5;
        let top = exact.clone().svd(false, false).singular_values.max();
        if top > 1.0 + 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "correlation matrix has singular value {top} > 1"
            )));
        }
        Ok(Self {
            n_modes: dim / 2,
            gamma: exact,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }
}

/// One circuit element acting on Majorana indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Gate {
    /// Rotation `exp((angle/2) γ_mu γ_{mu+1})` on adjacent Majorana indices.
    Givens { modes: (usize, usize), angle: f64 },
    /// The monomial `γ_mode` (used only as a trailing reflection on mode 2n).
    Reflection { mode: usize },
}

/// An ordered matchgate circuit; gates are applied in list order.
///
/// The orthogonal matrix realized by the circuit is the product of the
/// per-gate matrices in list order (first gate leftmost).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchgateCircuit {
    pub n_modes: usize,
    pub gates: Vec<Gate>,
}

/// Gate-count bound coefficient: compilation emits at most
/// `GATE_COUNT_CUBIC_COEFF * n^3` gates for every `n >= 1` (the actual count
/// is quadratic, `<= 2n^2 + n`).
pub const GATE_COUNT_CUBIC_COEFF: f64 = 3.0;

impl MatchgateCircuit {
    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Orthogonal matrix realized by one gate.
    fn gate_matrix(&self, g: &Gate) -> DMatrix<f64> {
        let dim = 2 * self.n_modes;
        match *g {
            Gate::Givens {
                modes: (mu, _),
                angle,
            } => {
                let mut m = DMatrix::<f64>::identity(dim, dim);
                let (c, s) = (angle.cos(), angle.sin());
                let i = mu - 1;
                m[(i, i)] = c;
                m[(i, i + 1)] = -s;
                m[(i + 1, i)] = s;
                m[(i + 1, i + 1)] = c;
                m
            }
            Gate::Reflection { mode } => {
                let mut m = DMatrix::<f64>::identity(dim, dim);
                for i in 0..dim {
                    m[(i, i)] = if i + 1 == mode { 1.0 } else { -1.0 };
                }
                m
            }
        }
    }

    /// Product of the per-gate matrices in list order.
    pub fn recompose(&self) -> DMatrix<f64> {
        let dim = 2 * self.n_modes;
        let mut acc = DMatrix::<f64>::identity(dim, dim);
        for g in &self.gates {
            acc *= self.gate_matrix(g);
        }
        acc
    }

    /// Max-entry deviation between the recomposed matrix and `q`.
    pub fn recomposition_error(&self, q: &OrthogonalMatrix) -> f64 {
        (self.recompose() - q.matrix()).amax()
    }
}

/// Draw `Q` from the Haar measure on `O(2n)`.
///
/// QR factorization of an i.i.d. standard-normal matrix, with the R-diagonal
/// sign correction that removes the factorization's sign bias.
pub fn haar_orthogonal(n_modes: usize, rng: &mut impl Rng) -> OrthogonalMatrix {
    let dim = 2 * n_modes;
    loop {
        let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        if (0..dim).any(|i| r[(i, i)] == 0.0) {
            continue; // measure-zero degenerate draw
        }
        let mut q = qr.q();
        for c in 0..dim {
            if r[(c, c)] < 0.0 {
                for rr in 0..dim {
                    q[(rr, c)] = -q[(rr, c)];
                }
            }
        }
        return OrthogonalMatrix {
            n_modes,
            q,
        };
    }
}

/// `Q = exp(4h)`; always special orthogonal.
pub fn q_from_h(g: &AntisymmetricGenerator) -> OrthogonalMatrix {
    let dim = 2 * g.n_modes;
    let scale = g.h.amax().max(1.0);
    let canon = antisym_canonical(&g.h, 1e-14 * scale).expect("antisymmetric canonical form");
    let q = canon.assemble(dim, |v| ((4.0 * v).cos(), (4.0 * v).sin()), 1.0);
    OrthogonalMatrix {
        n_modes: g.n_modes,
        q,
    }
}

/// Principal branch of `h = log(Q)/4`.
///
/// Requires `det(Q) = +1` and no eigenangle within [`LOG_BRANCH_TOL`] of pi.
pub fn h_from_q(q: &OrthogonalMatrix) -> Result<AntisymmetricGenerator> {
    if q.det_sign() < 0 {
        return Err(Error::InvalidArgument(
            "det(Q) = -1: factor out a reflection before taking the log".into(),
        ));
    }
    let canon = orthogonal_canonical(q.matrix(), 1e-9)?;
    if !canon.flipped.is_empty() {
        return Err(Error::BranchAmbiguity {
            tol: LOG_BRANCH_TOL,
        });
    }
    for p in &canon.planes {
        if std::f64::consts::PI - p.value.abs() < LOG_BRANCH_TOL {
            return Err(Error::BranchAmbiguity {
                tol: LOG_BRANCH_TOL,
            });
        }
    }
    let dim = 2 * q.n_modes;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for p in &canon.planes {
        let v = p.value / 4.0;
        h += v * (&p.e2 * p.e1.transpose() - &p.e1 * p.e2.transpose());
    }
    let exact = (&h - h.transpose()) * 0.5;
    Ok(AntisymmetricGenerator {
        n_modes: q.n_modes,
        h: exact,
    })
}

/// Correlation matrix of the Gibbs state of the quadratic Hamiltonian built
/// from `h`: blockwise, a canonical angle `v` of `h` contributes
/// `-tanh(2v)` on its plane.
///
/// This is the matrix tangent of `2h` up to overall sign; on antisymmetric
/// matrices it is bounded by 1 and injective, so the Gibbs state is uniquely
/// recoverable for `‖Γ‖ < 1`.
pub fn correlation_of_gibbs(g: &AntisymmetricGenerator) -> CorrelationMatrix {
    let dim = 2 * g.n_modes;
    let scale = g.h.amax().max(1.0);
    let canon = antisym_canonical(&g.h, 1e-14 * scale).expect("antisymmetric canonical form");
    let gamma = canon.assemble(dim, |v| (0.0, -(2.0 * v).tanh()), 0.0);
    let exact = (&gamma - gamma.transpose()) * 0.5;
    CorrelationMatrix {
        n_modes: g.n_modes,
        gamma: exact,
    }
}

/// `det(Q|_{S,S'})`: the minor with rows `S` and columns `S'`, both sorted
/// increasingly.
pub fn conjugation_minor(q: &OrthogonalMatrix, rows: &[usize], cols: &[usize]) -> Result<f64> {
    if rows.len() != cols.len() {
        return Err(Error::InvalidArgument(format!(
            "minor needs |S| = |S'|, got {} vs {}",
            rows.len(),
            cols.len()
        )));
    }
    let dim = 2 * q.n_modes;
    let mut rows = rows.to_vec();
    let mut cols = cols.to_vec();
    rows.sort_unstable();
    cols.sort_unstable();
    for &i in rows.iter().chain(cols.iter()) {
        if i < 1 || i > dim {
            return Err(Error::InvalidArgument(format!(
                "index {i} outside [1, {dim}]"
            )));
        }
    }
    let k = rows.len();
    let m = q.matrix();
    Ok(match k {
        0 => 1.0,
        1 => m[(rows[0] - 1, cols[0] - 1)],
        2 => {
            let (r0, r1) = (rows[0] - 1, rows[1] - 1);
            let (c0, c1) = (cols[0] - 1, cols[1] - 1);
            m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
        }
        _ => {
            let sub = DMatrix::<f64>::from_fn(k, k, |r, c| m[(rows[r] - 1, cols[c] - 1)]);
            sub.determinant()
        }
    })
}

/// All strictly increasing `k`-subsets of `[1, limit]`.
pub fn index_sets(limit: usize, k: usize) -> Vec<Vec<usize>> {
    (1..=limit).combinations(k).collect()
}

/// Expansion of `M_Q γ_S M_Q†` over equal-weight monomials: the coefficient
/// of `γ_{S'}` is `det(Q|_{S,S'})`. The input phase rides along unchanged.
///
/// The number of terms is `C(2n, |S|)`; callers should keep `|S|` small.
pub fn apply_conjugation(
    q: &OrthogonalMatrix,
    a: &MajoranaMonomial,
) -> Result<(Phase, BTreeMap<Vec<usize>, f64>)> {
    if a.n_modes != q.n_modes {
        return Err(Error::ModeMismatch(a.n_modes, q.n_modes));
    }
    let dim = 2 * q.n_modes;
    let k = a.weight();
    let mut out = BTreeMap::new();
    for target in (1..=dim).combinations(k) {
        let coeff = conjugation_minor(q, &a.support, &target)?;
        out.insert(target, coeff);
    }
    Ok((a.phase, out))
}

/// Orthogonal matrix realized by conjugation with the monomial `γ_{2n}`:
/// it flips every Majorana except the last.
pub fn reflection_matrix(n_modes: usize) -> DMatrix<f64> {
    let dim = 2 * n_modes;
    let mut m = DMatrix::<f64>::identity(dim, dim);
    for i in 0..dim - 1 {
        m[(i, i)] = -1.0;
    }
    m
}

/// Decompose `Q` into adjacent Givens rotations, with one trailing
/// reflection gate iff `det(Q) = -1`.
///
/// Column-by-column elimination with rotations on adjacent row pairs brings
/// the matrix to upper-triangular (hence ±1 diagonal) form; leftover -1 sign
/// pairs are cleared with angle-pi rotations. At most `2n^2 + n` gates.
pub fn compile_to_givens(q: &OrthogonalMatrix) -> MatchgateCircuit {
    let dim = 2 * q.n_modes;
    let reflect = q.det_sign() < 0;
    let mut work = if reflect {
        q.matrix() * reflection_matrix(q.n_modes)
    } else {
        q.matrix().clone()
    };

    let mut gates: Vec<Gate> = Vec::new();
    let rotate = |work: &mut DMatrix<f64>, row: usize, alpha: f64, gates: &mut Vec<Gate>| {
        if alpha.abs() < 1e-14 {
            return;
        }
        let (c, s) = (alpha.cos(), alpha.sin());
        for col in 0..dim {
            let top = work[(row, col)];
            let bot = work[(row + 1, col)];
            work[(row, col)] = c * top + s * bot;
            work[(row + 1, col)] = -s * top + c * bot;
        }
        gates.push(Gate::Givens {
            modes: (row + 1, row + 2),
            angle: alpha,
        });
    };

    for col in 0..dim {
        for row in (col + 1..dim).rev() {
            let alpha = work[(row, col)].atan2(work[(row - 1, col)]);
            rotate(&mut work, row - 1, alpha, &mut gates);
        }
    }

    // The residue is diagonal ±1 with an even number of -1 entries; walk
    // each -1 rightwards with pi-rotations until it annihilates.
    for i in 0..dim - 1 {
        if work[(i, i)] < 0.0 {
            rotate(&mut work, i, std::f64::consts::PI, &mut gates);
        }
    }

    if reflect {
        gates.push(Gate::Reflection { mode: dim });
    }
    MatchgateCircuit {
        n_modes: q.n_modes,
        gates,
    }
}

/// Nearest orthogonal matrix in Frobenius norm (polar factor).
pub fn project_orthogonal(m: &DMatrix<f64>) -> Result<OrthogonalMatrix> {
    let dim = m.nrows();
    if dim != m.ncols() || !dim.is_multiple_of(2) || dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "projection needs a 2n x 2n matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let svd = m.clone().svd(true, true);
    let sigma_min = svd.singular_values.min();
    if sigma_min <= 1e-8 {
        return Err(Error::RankDeficient {
            sigma_min,
            tol: 1e-8,
        });
    }
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let q = u * v_t;
    OrthogonalMatrix::new(q)
}
