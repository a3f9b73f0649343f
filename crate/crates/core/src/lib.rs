pub mod dense;
pub mod experiments;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod learner;
pub mod majorana;
pub mod oracle;
pub mod parallel;
pub mod rng;
pub mod subsets;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[cfg(test)]
mod probe_tests {
    use nalgebra::{DMatrix, SymmetricEigen};
    use num_complex::Complex64;

    #[test]
    fn hermitian_eigen_complex() {
        // 2x2 Hermitian: [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(1.0, 0.0),
            ],
        );
        let eig = SymmetricEigen::new(m.clone());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((vals[0] - 0.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        // Reconstruct.
        let v = &eig.eigenvectors;
        let lam = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new(x, 0.0)));
        let rec = v * lam * v.adjoint();
        assert!((rec - m).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn qr_and_svd_real() {
        let m = DMatrix::<f64>::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let qr = m.clone().qr();
        let q = qr.q();
        let r = qr.r();
        assert!(((&q * &r) - &m).norm() < 1e-12);
        let svd = m.clone().svd(true, true);
        let rec = svd.recompose().unwrap();
        assert!((rec - &m).norm() < 1e-10);
        assert!((m.determinant() - 18.0).abs() < 1e-10);
    }
}
