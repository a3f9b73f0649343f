//! Exact symbolic algebra of Majorana monomials and their Jordan-Wigner
//! Pauli representation.
//!
//! A system of `n` fermionic modes carries `2n` Majorana operators
//! `γ_1, ..., γ_2n`; they are Hermitian, square to the identity and pairwise
//! anticommute. A monomial `γ_S` is the product of the operators indexed by a
//! set `S ⊆ {1..2n}` taken in increasing order, together with a unit phase.
//! The 4^n monomials form an orthogonal operator basis, so everything the
//! dense simulator does downstream can be cross-checked against this module.

use std::fmt;

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// One of the four unit phases `{+1, -1, +i, -i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    /// `i^k` for any integer exponent.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    fn exponent(self) -> i64 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase::i_pow(self.exponent() + other.exponent())
    }

    pub fn conj(self) -> Phase {
        Phase::i_pow(-self.exponent())
    }

    pub fn negate(self) -> Phase {
        Phase::i_pow(self.exponent() + 2)
    }

    pub fn as_complex(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::PlusOne => "+1",
            Phase::MinusOne => "-1",
            Phase::PlusI => "+i",
            Phase::MinusI => "-i",
        }
    }

    pub fn from_str_token(s: &str) -> Result<Self> {
        match s {
            "+1" | "1" => Ok(Phase::PlusOne),
            "-1" => Ok(Phase::MinusOne),
            "+i" | "i" => Ok(Phase::PlusI),
            "-i" => Ok(Phase::MinusI),
            _ => Err(Error::Parse(format!("unknown phase token {s:?}"))),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase::mul(self, rhs)
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Phase::from_str_token(&s).map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A phased product of Majorana operators, `phase · γ_S`.
///
/// `support` is strictly increasing with 1-based indices in `[1, 2n]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MajoranaMonomial {
    pub phase: Phase,
    pub support: Vec<usize>,
    pub n_modes: usize,
}

impl MajoranaMonomial {
    pub fn new(n_modes: usize, support: Vec<usize>, phase: Phase) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidArgument("n_modes must be positive".into()));
        }
        for w in support.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidArgument(format!(
                    "support must be strictly increasing, got {support:?}"
                )));
            }
        }
        if let (Some(&first), Some(&last)) = (support.first(), support.last()) {
            if first < 1 || last > 2 * n_modes {
                return Err(Error::InvalidArgument(format!(
                    "support indices must lie in [1, {}], got {support:?}",
                    2 * n_modes
                )));
            }
        }
        Ok(Self {
            phase,
            support,
            n_modes,
        })
    }

    /// The empty-support, phase `+1` identity monomial.
    pub fn identity(n_modes: usize) -> Self {
        Self {
            phase: Phase::PlusOne,
            support: Vec::new(),
            n_modes,
        }
    }

    /// The single generator `γ_mu`.
    pub fn gamma(n_modes: usize, mu: usize) -> Result<Self> {
        Self::new(n_modes, vec![mu], Phase::PlusOne)
    }

    /// Plain `γ_S` (phase `+1`) on a set given in any order.
    pub fn from_set(n_modes: usize, mut set: Vec<usize>) -> Result<Self> {
        set.sort_unstable();
        Self::new(n_modes, set, Phase::PlusOne)
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn is_identity_support(&self) -> bool {
        self.support.is_empty()
    }

    /// Support encoded as a bitmask; bit `mu - 1` set iff `mu ∈ S`.
    pub fn support_mask(&self) -> u32 {
        self.support.iter().fold(0u32, |m, &mu| m | (1 << (mu - 1)))
    }

    pub fn scaled(&self, phase: Phase) -> Self {
        Self {
            phase: self.phase * phase,
            ..self.clone()
        }
    }
}

/// Multiply two monomials, tracking the anticommutation sign.
///
/// The sign is `(-1)^t` where `t` counts the transpositions needed to sort
/// the concatenation `a ++ b`; the merge walk below counts them in
/// `O(|a| + |b|)`. Squares `γ_mu^2 = I` cancel without extra sign.
pub fn monomial_mul(a: &MajoranaMonomial, b: &MajoranaMonomial) -> Result<MajoranaMonomial> {
    if a.n_modes != b.n_modes {
        return Err(Error::ModeMismatch(a.n_modes, b.n_modes));
    }
    let (sa, sb) = (&a.support, &b.support);
    let mut support = Vec::with_capacity(sa.len() + sb.len());
    let mut crossings: usize = 0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < sa.len() && j < sb.len() {
        if sa[i] < sb[j] {
            support.push(sa[i]);
            i += 1;
        } else if sa[i] > sb[j] {
            crossings += sa.len() - i;
            support.push(sb[j]);
            j += 1;
        } else {
            // Equal indices cancel; b's copy first crosses everything in a
            // strictly after position i.
            crossings += sa.len() - i - 1;
            i += 1;
            j += 1;
        }
    }
    support.extend_from_slice(&sa[i..]);
    support.extend_from_slice(&sb[j..]);

    let sign = if crossings.is_multiple_of(2) {
        Phase::PlusOne
    } else {
        Phase::MinusOne
    };
    Ok(MajoranaMonomial {
        phase: a.phase * b.phase * sign,
        support,
        n_modes: a.n_modes,
    })
}

/// Hermitian conjugate: `(phase · γ_S)† = conj(phase) · (-1)^{m(m-1)/2} γ_S`.
pub fn monomial_adjoint(a: &MajoranaMonomial) -> MajoranaMonomial {
    let m = a.weight();
    let reversal = if (m * m.saturating_sub(1) / 2).is_multiple_of(2) {
        Phase::PlusOne
    } else {
        Phase::MinusOne
    };
    MajoranaMonomial {
        phase: a.phase.conj() * reversal,
        support: a.support.clone(),
        n_modes: a.n_modes,
    }
}

/// `Tr(γ_S) = 0` for any nonempty `S`; only the identity has nonzero trace.
pub fn monomial_trace_is_zero(a: &MajoranaMonomial) -> bool {
    !a.support.is_empty()
}

/// The sign in `γ_R γ_mu γ_R† = (-1)^{|R| - [mu ∈ R]} γ_mu`.
pub fn conjugate_sign(r: &[usize], mu: usize) -> i32 {
    let in_r = usize::from(r.contains(&mu));
    if (r.len().wrapping_sub(in_r)) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Exponent `p(m) = (m(m-1)/2) mod 2`; multiplying `γ_S` by `i^{p(|S|)}`
/// makes it Hermitian.
pub fn hermitian_phase_exponent(m: usize) -> u32 {
    ((m * m.saturating_sub(1) / 2) % 2) as u32
}

/// A Majorana monomial with the phase pinned so the operator is Hermitian
/// and squares to the identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HermitianMonomial(MajoranaMonomial);

impl HermitianMonomial {
    /// `γ̄_S = i^{p(|S|)} γ_S` on the given set.
    pub fn from_set(n_modes: usize, set: Vec<usize>) -> Result<Self> {
        let base = MajoranaMonomial::from_set(n_modes, set)?;
        let p = hermitian_phase_exponent(base.weight());
        Ok(Self(base.scaled(Phase::i_pow(p as i64))))
    }

    pub fn monomial(&self) -> &MajoranaMonomial {
        &self.0
    }

    pub fn into_monomial(self) -> MajoranaMonomial {
        self.0
    }
}

/// A single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Y,
    Z,
}

impl PauliLetter {
    /// Product of two letters: `(phase, letter)` with `a · b = phase · letter`.
    fn mul(a: PauliLetter, b: PauliLetter) -> (Phase, PauliLetter) {
        use PauliLetter::*;
        match (a, b) {
            (I, p) | (p, I) => (Phase::PlusOne, p),
            (X, X) | (Y, Y) | (Z, Z) => (Phase::PlusOne, I),
            (X, Y) => (Phase::PlusI, Z),
            (Y, X) => (Phase::MinusI, Z),
            (Y, Z) => (Phase::PlusI, X),
            (Z, Y) => (Phase::MinusI, X),
            (Z, X) => (Phase::PlusI, Y),
            (X, Z) => (Phase::MinusI, Y),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLetter::I => 'I',
            PauliLetter::X => 'X',
            PauliLetter::Y => 'Y',
            PauliLetter::Z => 'Z',
        }
    }
}

/// A phased Pauli string on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub phase: Phase,
    pub letters: Vec<PauliLetter>,
    pub n_qubits: usize,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            phase: Phase::PlusOne,
            letters: vec![PauliLetter::I; n_qubits],
            n_qubits,
        }
    }

    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::ModeMismatch(self.n_qubits, other.n_qubits));
        }
        let mut phase = self.phase * other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, c) = PauliLetter::mul(a, b);
                phase = phase * p;
                c
            })
            .collect();
        Ok(PauliString {
            phase,
            letters,
            n_qubits: self.n_qubits,
        })
    }

    pub fn is_identity_letters(&self) -> bool {
        self.letters.iter().all(|&l| l == PauliLetter::I)
    }
}

/// Jordan-Wigner image of a Majorana monomial.
///
/// `γ_{2l-1} → Z_1 ... Z_{l-1} X_l` and `γ_{2l} → Z_1 ... Z_{l-1} Y_l`;
/// the factors are multiplied in support order with the phase accumulated.
pub fn jordan_wigner(a: &MajoranaMonomial) -> PauliString {
    let n = a.n_modes;
    let mut acc = PauliString::identity(n);
    acc.phase = a.phase;
    for &mu in &a.support {
        let site = mu.div_ceil(2); // the qubit carrying X or Y, 1-based
        let mut letters = vec![PauliLetter::I; n];
        for l in letters.iter_mut().take(site - 1) {
            *l = PauliLetter::Z;
        }
        letters[site - 1] = if mu % 2 == 1 {
            PauliLetter::X
        } else {
            PauliLetter::Y
        };
        let factor = PauliString {
            phase: Phase::PlusOne,
            letters,
            n_qubits: n,
        };
        acc = acc.mul(&factor).expect("same qubit count");
    }
    acc
}

fn subscript(n: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

impl fmt::Display for MajoranaMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            Phase::PlusOne => "+",
            Phase::MinusOne => "-",
            Phase::PlusI => "+i·",
            Phase::MinusI => "-i·",
        };
        if self.support.is_empty() {
            return write!(f, "{sign}I");
        }
        let idx: Vec<String> = self.support.iter().map(|s| s.to_string()).collect();
        write!(f, "{sign}γ{{{}}}", idx.join(","))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.phase {
            Phase::PlusOne => "+",
            Phase::MinusOne => "-",
            Phase::PlusI => "+i·",
            Phase::MinusI => "-i·",
        };
        if self.is_identity_letters() {
            return write!(f, "{sign}I");
        }
        write!(f, "{sign}")?;
        for (q, &l) in self.letters.iter().enumerate() {
            if l != PauliLetter::I {
                write!(f, "{}{}", l.as_char(), subscript(q + 1))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma(n: usize, mu: usize) -> MajoranaMonomial {
        MajoranaMonomial::gamma(n, mu).unwrap()
    }

    #[test]
    fn square_is_identity() {
        let g = gamma(2, 1);
        let p = monomial_mul(&g, &g).unwrap();
        assert_eq!(p, MajoranaMonomial::identity(2));
    }

    #[test]
    fn anticommutation_sign() {
        let p = monomial_mul(&gamma(2, 2), &gamma(2, 1)).unwrap();
        assert_eq!(p.support, vec![1, 2]);
        assert_eq!(p.phase, Phase::MinusOne);
    }

    #[test]
    fn overlap_product() {
        let a = MajoranaMonomial::from_set(2, vec![1, 2]).unwrap();
        let b = MajoranaMonomial::from_set(2, vec![2, 3]).unwrap();
        let p = monomial_mul(&a, &b).unwrap();
        assert_eq!(p.support, vec![1, 3]);
        assert_eq!(p.phase, Phase::PlusOne);
    }

    #[test]
    fn adjoint_examples() {
        let g1 = gamma(1, 1);
        assert_eq!(monomial_adjoint(&g1), g1);

        let g12 = MajoranaMonomial::from_set(1, vec![1, 2]).unwrap();
        assert_eq!(monomial_adjoint(&g12).phase, Phase::MinusOne);

        let ig12 = g12.scaled(Phase::PlusI);
        // (i γ_{12})† = -i · (-γ_{12}) = +i γ_{12}
        assert_eq!(monomial_adjoint(&ig12), ig12);
    }

    #[test]
    fn trace_predicate() {
        assert!(!monomial_trace_is_zero(&MajoranaMonomial::identity(2)));
        assert!(monomial_trace_is_zero(&gamma(2, 1)));
        assert!(monomial_trace_is_zero(
            &MajoranaMonomial::from_set(2, vec![1, 2, 3, 4]).unwrap()
        ));
    }

    #[test]
    fn jordan_wigner_generators() {
        let x = jordan_wigner(&gamma(1, 1));
        assert_eq!(x.letters, vec![PauliLetter::X]);
        assert_eq!(x.phase, Phase::PlusOne);

        let y = jordan_wigner(&gamma(1, 2));
        assert_eq!(y.letters, vec![PauliLetter::Y]);
        assert_eq!(y.phase, Phase::PlusOne);

        let z = jordan_wigner(&MajoranaMonomial::from_set(1, vec![1, 2]).unwrap());
        assert_eq!(z.letters, vec![PauliLetter::Z]);
        assert_eq!(z.phase, Phase::PlusI);

        let zx = jordan_wigner(&gamma(2, 3));
        assert_eq!(zx.letters, vec![PauliLetter::Z, PauliLetter::X]);
        assert_eq!(zx.phase, Phase::PlusOne);
    }

    #[test]
    fn conjugate_sign_examples() {
        assert_eq!(conjugate_sign(&[], 1), 1);
        assert_eq!(conjugate_sign(&[1], 1), 1);
        assert_eq!(conjugate_sign(&[1], 2), -1);
        assert_eq!(conjugate_sign(&[1, 2], 3), 1);
    }

    #[test]
    fn conjugate_sign_matches_symbolic_triple_product() {
        // γ_R γ_mu γ_R† for all R ⊆ [2n], mu ∈ [2n], n ≤ 3.
        for n in 1..=3usize {
            let dim = 2 * n;
            for mask in 0u32..(1 << dim) {
                let r: Vec<usize> = (1..=dim).filter(|&i| mask & (1 << (i - 1)) != 0).collect();
                let gr = MajoranaMonomial::from_set(n, r.clone()).unwrap();
                let gr_dag = monomial_adjoint(&gr);
                for mu in 1..=dim {
                    let triple =
                        monomial_mul(&monomial_mul(&gr, &gamma(n, mu)).unwrap(), &gr_dag).unwrap();
                    assert_eq!(triple.support, vec![mu]);
                    let expect = conjugate_sign(&r, mu);
                    let got = match triple.phase {
                        Phase::PlusOne => 1,
                        Phase::MinusOne => -1,
                        _ => panic!("non-real phase in conjugation"),
                    };
                    assert_eq!(got, expect, "R = {r:?}, mu = {mu}");
                }
            }
        }
    }

    #[test]
    fn anticommutation_exhaustive() {
        for n in 1..=4usize {
            for mu in 1..=2 * n {
                for nu in 1..=2 * n {
                    let ab = monomial_mul(&gamma(n, mu), &gamma(n, nu)).unwrap();
                    let ba = monomial_mul(&gamma(n, nu), &gamma(n, mu)).unwrap();
                    if mu == nu {
                        assert_eq!(ab, MajoranaMonomial::identity(n));
                    } else {
                        assert_eq!(ab.support, ba.support);
                        assert_eq!(ab.phase, ba.phase.negate());
                    }
                }
            }
        }
    }

    #[test]
    fn monomial_mul_associative_small() {
        let n = 2;
        let sets: Vec<Vec<usize>> = (0u32..16)
            .map(|m| (1..=4).filter(|&i| m & (1 << (i - 1)) != 0).collect())
            .collect();
        for a in &sets {
            for b in &sets {
                for c in &sets {
                    let ma = MajoranaMonomial::from_set(n, a.clone()).unwrap();
                    let mb = MajoranaMonomial::from_set(n, b.clone()).unwrap();
                    let mc = MajoranaMonomial::from_set(n, c.clone()).unwrap();
                    let left = monomial_mul(&monomial_mul(&ma, &mb).unwrap(), &mc).unwrap();
                    let right = monomial_mul(&ma, &monomial_mul(&mb, &mc).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn hermitian_monomial_phase() {
        // m mod 4 ∈ {2, 3} picks up a factor of i.
        for (m, expect) in [(0, 0), (1, 0), (2, 1), (3, 1), (4, 0), (5, 0), (6, 1)] {
            assert_eq!(hermitian_phase_exponent(m), expect, "m = {m}");
        }
        let h = HermitianMonomial::from_set(2, vec![1, 2]).unwrap();
        assert_eq!(h.monomial().phase, Phase::PlusI);
        let adj = monomial_adjoint(h.monomial());
        assert_eq!(&adj, h.monomial());
    }

    #[test]
    fn display_forms() {
        let m = MajoranaMonomial::new(3, vec![1, 4, 5], Phase::MinusOne).unwrap();
        assert_eq!(m.to_string(), "-γ{1,4,5}");
        let p = jordan_wigner(&MajoranaMonomial::from_set(1, vec![1, 2]).unwrap());
        assert_eq!(p.to_string(), "+i·Z₁");
    }

    #[test]
    fn json_round_trip() {
        let m = MajoranaMonomial::new(3, vec![2, 5], Phase::MinusI).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"phase\":\"-i\""));
        let back: MajoranaMonomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
