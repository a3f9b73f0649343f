//! Golden-file checks: serialization conventions and the global-phase
//! canonicalization must stay put across refactors.

use matchgate_core::dense::{canonicalize_phase, unitary_from_q};
use matchgate_core::gaussian::{q_from_h, AntisymmetricGenerator};
use nalgebra::DMatrix;

#[test]
fn gaussian_unitary_matches_golden_file() {
    let mut h = DMatrix::<f64>::zeros(4, 4);
    h[(0, 1)] = 0.15;
    h[(1, 0)] = -0.15;
    h[(2, 3)] = -0.35;
    h[(3, 2)] = 0.35;
    h[(0, 2)] = 0.05;
    h[(2, 0)] = -0.05;
    let g = AntisymmetricGenerator::new(h).unwrap();
    let u = canonicalize_phase(&unitary_from_q(&q_from_h(&g)).unwrap()).unwrap();

    let golden: Vec<Vec<[f64; 2]>> = serde_json::from_str(include_str!(
        "golden/gaussian_unitary.json"
    ))
    .unwrap();
    let expected = matchgate_core::io::rows_to_cmatrix(&golden).unwrap();
    let dev = (u.matrix() - expected)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    assert!(dev <= 1e-7, "golden deviation {dev}");
}
