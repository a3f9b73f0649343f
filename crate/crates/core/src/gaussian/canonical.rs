//! Real canonical forms of antisymmetric and orthogonal matrices.
//!
//! Both forms decompose `R^{2n}` into invariant 2-planes plus a leftover
//! subspace. A plane `(e1, e2, v)` follows the convention
//!
//! ```text
//! k e1 =  v e2
//! k e2 = -v e1          (antisymmetric k, plane value v > 0)
//! ```
//!
//! so the block of `k` on the plane is `v (e2 e1^T - e1 e2^T)`, and
//! `exp(t k)` rotates it by angle `t v` (`e1 -> cos e1 + sin e2`). The same
//! `(e1, e2)` pair carries the corresponding orthogonal-matrix block
//! `[[cos θ, .], [sin θ, .]]` with `θ = atan2(e2ᵀQe1, e1ᵀQe1)`.
//!
//! Planes are extracted from the Hermitian eigendecomposition of `i·k`:
//! if `(i k) z = v z` with `z = x + i y`, then `k x = v y` and `k y = -v x`,
//! so `(x, y)` spans an exactly invariant plane even inside degenerate
//! eigenspaces. For orthogonal matrices the eigenspaces of equal `|sin θ|`
//! can still mix angles `θ` and `π - θ`; those are separated by a second
//! eigendecomposition of the symmetric part restricted to the cluster.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

/// An invariant 2-plane with its block value (see module docs).
#[derive(Debug, Clone)]
pub struct Plane {
    pub e1: DVector<f64>,
    pub e2: DVector<f64>,
    pub value: f64,
}

/// Canonical data of a real antisymmetric matrix.
#[derive(Debug, Clone)]
pub struct AntisymCanonical {
    pub planes: Vec<Plane>,
    pub kernel: Vec<DVector<f64>>,
}

/// Canonical data of a real orthogonal matrix.
#[derive(Debug, Clone)]
pub struct OrthogonalCanonical {
    /// Rotation planes; `value` is the angle in `(0, π)`.
    pub planes: Vec<Plane>,
    /// Eigenvalue +1 directions.
    pub fixed: Vec<DVector<f64>>,
    /// Eigenvalue -1 directions.
    pub flipped: Vec<DVector<f64>>,
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Hermitian eigendecomposition of `i·k` for real antisymmetric `k`.
fn skew_spectrum(k: &DMatrix<f64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let a = k.map(|x| Complex64::new(0.0, x));
    let eig = SymmetricEigen::new(a);
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Split a complex eigenvector into its normalized real plane.
fn plane_from_eigenvector(col: &DVector<Complex64>, value: f64) -> Plane {
    let x: DVector<f64> = col.map(|z| z.re);
    let y: DVector<f64> = col.map(|z| z.im);
    let e1 = &x / x.norm();
    let e2 = &y / y.norm();
    Plane { e1, e2, value }
}

/// Orthonormalize real candidate vectors down to `want` basis vectors.
fn real_basis(candidates: Vec<DVector<f64>>, want: usize) -> Result<Vec<DVector<f64>>> {
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(want);
    for mut v in candidates {
        if basis.len() == want {
            break;
        }
        for b in &basis {
            let c = b.dot(&v);
            v -= b * c;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
    }
    if basis.len() != want {
        return Err(Error::Inconsistency(format!(
            "kernel basis extraction found {} of {want} vectors",
            basis.len()
        )));
    }
    Ok(basis)
}

/// Canonical form of a real antisymmetric matrix.
///
/// `zero_tol` decides which block values count as zero (kernel directions).
pub fn antisym_canonical(k: &DMatrix<f64>, zero_tol: f64) -> Result<AntisymCanonical> {
    let dim = k.nrows();
    let (vals, vecs) = skew_spectrum(k);
    let mut planes = Vec::new();
    let mut kernel_candidates = Vec::new();
    let mut kernel_dim = 0usize;
    for (i, &v) in vals.iter().enumerate() {
        let col = vecs.column(i).into_owned();
        if v > zero_tol {
            planes.push(plane_from_eigenvector(&col, v));
        } else if v.abs() <= zero_tol {
            kernel_dim += 1;
            let x: DVector<f64> = col.map(|z| z.re);
            let y: DVector<f64> = col.map(|z| z.im);
            kernel_candidates.push(x);
            kernel_candidates.push(y);
        }
    }
    if 2 * planes.len() + kernel_dim != dim {
        return Err(Error::Inconsistency(format!(
            "antisymmetric spectrum split {} planes + {kernel_dim} kernel != dim {dim}",
            planes.len()
        )));
    }
    let kernel = real_basis(kernel_candidates, kernel_dim)?;
    Ok(AntisymCanonical { planes, kernel })
}

impl AntisymCanonical {
    /// Assemble `sum f(v) * block(plane)` plus `g` on each kernel direction,
    /// where the block rotates by `f` interpreted as (cos, sin) pair.
    ///
    /// Used to evaluate matrix functions that act blockwise: the function
    /// returns `(a, b)` meaning the plane contributes
    /// `a (e1 e1ᵀ + e2 e2ᵀ) + b (e2 e1ᵀ - e1 e2ᵀ)`, and each kernel
    /// direction `u` contributes `g · u uᵀ`.
    pub fn assemble(&self, dim: usize, f: impl Fn(f64) -> (f64, f64), g: f64) -> DMatrix<f64> {
        let mut out = DMatrix::<f64>::zeros(dim, dim);
        for p in &self.planes {
            let (a, b) = f(p.value);
            let e1 = &p.e1;
            let e2 = &p.e2;
            out += a * (e1 * e1.transpose() + e2 * e2.transpose());
            out += b * (e2 * e1.transpose() - e1 * e2.transpose());
        }
        for u in &self.kernel {
            out += g * (u * u.transpose());
        }
        out
    }
}

/// Canonical form of a real orthogonal matrix.
///
/// Directions whose rotation-plane sine falls below `sin_tol` are classified
/// as fixed (+1) or flipped (-1) by the symmetric part.
pub fn orthogonal_canonical(q: &DMatrix<f64>, sin_tol: f64) -> Result<OrthogonalCanonical> {
    let dim = q.nrows();
    let skew = (q - q.transpose()) * 0.5;
    let sym = (q + q.transpose()) * 0.5;
    let sym_c = to_complex(&sym);
    let (vals, vecs) = skew_spectrum(&skew);

    // Indices of strictly positive sines, sorted descending so clusters of
    // equal |sin θ| are contiguous.
    let mut pos: Vec<usize> = (0..dim).filter(|&i| vals[i] > sin_tol).collect();
    pos.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());

    let mut planes = Vec::new();
    let cluster_tol = 1e-8;
    let mut i = 0;
    while i < pos.len() {
        let mut j = i + 1;
        while j < pos.len() && (vals[pos[j - 1]] - vals[pos[j]]).abs() <= cluster_tol {
            j += 1;
        }
        let cluster: Vec<usize> = pos[i..j].to_vec();
        if cluster.len() == 1 {
            let col = vecs.column(cluster[0]).into_owned();
            planes.push(oriented_plane(q, &col));
        } else {
            // Same |sin θ| may mix angles θ and π-θ; separate by cos θ via
            // the symmetric part restricted to the cluster.
            let m = cluster.len();
            let mut z = DMatrix::<Complex64>::zeros(dim, m);
            for (c, &idx) in cluster.iter().enumerate() {
                z.set_column(c, &vecs.column(idx));
            }
            let restricted = z.adjoint() * &sym_c * &z;
            let sub = SymmetricEigen::new(restricted);
            let w = z * sub.eigenvectors;
            for c in 0..m {
                let col = w.column(c).into_owned();
                planes.push(oriented_plane(q, &col));
            }
        }
        i = j;
    }

    // Kernel of the skew part: fixed and flipped directions.
    let kernel_dim = vals.iter().filter(|v| v.abs() <= sin_tol).count();
    let mut kernel_candidates = Vec::new();
    for (idx, &v) in vals.iter().enumerate() {
        if v.abs() <= sin_tol {
            let col = vecs.column(idx);
            kernel_candidates.push(col.map(|z| z.re));
            kernel_candidates.push(col.map(|z| z.im));
        }
    }
    let mut fixed = Vec::new();
    let mut flipped = Vec::new();
    if kernel_dim > 0 {
        let kernel = real_basis(kernel_candidates, kernel_dim)?;
        let mut b = DMatrix::<f64>::zeros(dim, kernel_dim);
        for (c, v) in kernel.iter().enumerate() {
            b.set_column(c, v);
        }
        let restricted = b.transpose() * &sym * &b;
        let sub = SymmetricEigen::new(restricted);
        let rotated = b * &sub.eigenvectors;
        for c in 0..kernel_dim {
            let lam = sub.eigenvalues[c];
            let dir = rotated.column(c).into_owned();
            if (lam - 1.0).abs() < 1e-6 {
                fixed.push(dir);
            } else if (lam + 1.0).abs() < 1e-6 {
                flipped.push(dir);
            } else {
                return Err(Error::Inconsistency(format!(
                    "orthogonal canonical: skew-kernel eigenvalue {lam} not ±1"
                )));
            }
        }
    }

    Ok(OrthogonalCanonical {
        planes,
        fixed,
        flipped,
    })
}

/// Turn a complex eigenvector of the skew part into a plane whose `value`
/// is the rotation angle in `(0, π)`.
fn oriented_plane(q: &DMatrix<f64>, col: &DVector<Complex64>) -> Plane {
    let p = plane_from_eigenvector(col, 0.0);
    let cos = (q * &p.e1).dot(&p.e1);
    let sin = (q * &p.e1).dot(&p.e2);
    Plane {
        value: sin.atan2(cos),
        ..p
    }
}
