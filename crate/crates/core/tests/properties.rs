//! Property tests for the algebra invariants and serialization stability.

use matchgate_core::majorana::{
    jordan_wigner, monomial_adjoint, monomial_mul, MajoranaMonomial, Phase,
};
use matchgate_core::gaussian::{Gate, MatchgateCircuit};
use matchgate_core::subsets;
use proptest::prelude::*;

fn arb_phase() -> impl Strategy<Value = Phase> {
    prop_oneof![
        Just(Phase::PlusOne),
        Just(Phase::MinusOne),
        Just(Phase::PlusI),
        Just(Phase::MinusI),
    ]
}

fn arb_monomial(n_modes: usize) -> impl Strategy<Value = MajoranaMonomial> {
    let bits = 2 * n_modes;
    (0u32..(1 << bits), arb_phase()).prop_map(move |(mask, phase)| {
        MajoranaMonomial::from_set(n_modes, subsets::support_from_mask(mask))
            .unwrap()
            .scaled(phase)
    })
}

/// Jordan-Wigner is a homomorphism including phases; the n = 4 and n = 5
/// cases are sampled (the exhaustive small-n check lives below).
fn jw_homomorphism_case(a: &MajoranaMonomial, b: &MajoranaMonomial) {
    let lhs = jordan_wigner(&monomial_mul(a, b).unwrap());
    let rhs = jordan_wigner(a).mul(&jordan_wigner(b)).unwrap();
    assert_eq!(lhs, rhs, "a = {a}, b = {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn jw_homomorphism_n4((a, b) in (arb_monomial(4), arb_monomial(4))) {
        jw_homomorphism_case(&a, &b);
    }

    #[test]
    fn jw_homomorphism_n5((a, b) in (arb_monomial(5), arb_monomial(5))) {
        jw_homomorphism_case(&a, &b);
    }

    #[test]
    fn adjoint_is_involutive(a in arb_monomial(3)) {
        prop_assert_eq!(monomial_adjoint(&monomial_adjoint(&a)), a);
    }

    #[test]
    fn adjoint_reverses_products((a, b) in (arb_monomial(3), arb_monomial(3))) {
        // (ab)† = b† a†
        let lhs = monomial_adjoint(&monomial_mul(&a, &b).unwrap());
        let rhs = monomial_mul(&monomial_adjoint(&b), &monomial_adjoint(&a)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn monomial_json_round_trip(a in arb_monomial(4)) {
        let json = serde_json::to_string(&a).unwrap();
        let back: MajoranaMonomial = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn circuit_json_round_trip(angles in proptest::collection::vec(-3.2f64..3.2, 0..12)) {
        let n_modes = 3;
        let mut gates: Vec<Gate> = angles
            .iter()
            .enumerate()
            .map(|(i, &angle)| Gate::Givens {
                modes: (i % 5 + 1, i % 5 + 2),
                angle,
            })
            .collect();
        gates.push(Gate::Reflection { mode: 6 });
        let c = MatchgateCircuit { n_modes, gates };
        let json = serde_json::to_string(&c).unwrap();
        let back: MatchgateCircuit = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, c);
    }
}

/// Exhaustive Jordan-Wigner homomorphism over all support pairs, n <= 3.
#[test]
fn jw_homomorphism_exhaustive_small_n() {
    for n in 1..=3usize {
        let total = 1u32 << (2 * n);
        for ma in 0..total {
            for mb in 0..total {
                let a = MajoranaMonomial::from_set(n, subsets::support_from_mask(ma)).unwrap();
                let b = MajoranaMonomial::from_set(n, subsets::support_from_mask(mb)).unwrap();
                jw_homomorphism_case(&a, &b);
            }
        }
    }
}
