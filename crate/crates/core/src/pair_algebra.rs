//! Real pairs and the γ-parameterized bilinear multiplications on them.
//!
//! A [`GammaVector`] `(g1, g2, g3, g4; g5, g6, g7, g8)` defines
//!
//! ```text
//! a ⊙ b = (g1 a1 b1 + g2 a1 b2 + g3 a2 b1 + g4 a2 b2,
//!          g5 a1 b1 + g6 a1 b2 + g7 a2 b1 + g8 a2 b2)
//! ```
//!
//! Addition of pairs is always componentwise.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance used for every "equality" of derived quantities.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A two-component real value. Serialized as `[c1, c2]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Pair {
    c1: f64,
    c2: f64,
}

impl Pair {
    pub const ZERO: Pair = Pair { c1: 0.0, c2: 0.0 };
    pub const ONE: Pair = Pair { c1: 1.0, c2: 0.0 };
    pub const I: Pair = Pair { c1: 0.0, c2: 1.0 };

    pub fn new(c1: f64, c2: f64) -> Result<Self> {
        for v in [c1, c2] {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "pair", value: v });
            }
        }
        Ok(Pair { c1, c2 })
    }

    /// Builds a pair from arithmetic that is already known to be finite.
    pub(crate) const fn raw(c1: f64, c2: f64) -> Self {
        Pair { c1, c2 }
    }

    #[inline]
    pub fn c1(&self) -> f64 {
        self.c1
    }

    #[inline]
    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.c1, self.c2]
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.c1.abs().max(self.c2.abs())
    }

    /// Squared Euclidean norm, `c1² + c2²`.
    pub fn norm_sqr(&self) -> f64 {
        self.c1 * self.c1 + self.c2 * self.c2
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }

    /// `|self - other|∞ <= tol`.
    pub fn approx_eq(&self, other: &Pair, tol: f64) -> bool {
        (*self - *other).max_abs() <= tol
    }
}

impl TryFrom<[f64; 2]> for Pair {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Pair::new(v[0], v[1])
    }
}

impl From<Pair> for [f64; 2] {
    fn from(p: Pair) -> Self {
        p.to_array()
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.c1, self.c2)
    }
}

impl Add for Pair {
    type Output = Pair;
    fn add(self, rhs: Pair) -> Pair {
        pair_add(self, rhs)
    }
}

impl Sub for Pair {
    type Output = Pair;
    fn sub(self, rhs: Pair) -> Pair {
        Pair::raw(self.c1 - rhs.c1, self.c2 - rhs.c2)
    }
}

impl Neg for Pair {
    type Output = Pair;
    fn neg(self) -> Pair {
        Pair::raw(-self.c1, -self.c2)
    }
}

impl Mul<Pair> for f64 {
    type Output = Pair;
    fn mul(self, rhs: Pair) -> Pair {
        scalar_mul(self, rhs)
    }
}

impl std::iter::Sum for Pair {
    fn sum<I: Iterator<Item = Pair>>(iter: I) -> Pair {
        iter.fold(Pair::ZERO, pair_add)
    }
}

/// Eight real coefficients of a bilinear multiplication, in the order
/// `g1..g4` (first output component) then `g5..g8` (second).
/// Serialized as a length-8 array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GammaVector([f64; 8]);

impl GammaVector {
    pub const ZERO: GammaVector = GammaVector([0.0; 8]);

    pub fn new(g: [f64; 8]) -> Result<Self> {
        if let Some(&v) = g.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "gamma vector", value: v });
        }
        Ok(GammaVector(g))
    }

    pub fn from_slice(g: &[f64]) -> Result<Self> {
        let arr: [f64; 8] = g
            .try_into()
            .map_err(|_| Error::WrongLength { expected: 8, got: g.len() })?;
        Self::new(arr)
    }

    pub(crate) const fn raw(g: [f64; 8]) -> Self {
        GammaVector(g)
    }

    pub fn components(&self) -> [f64; 8] {
        self.0
    }

    /// One-based component access, `at(1)` is γ₁.
    ///
    /// Panics if `index` is not in `1..=8`.
    #[inline]
    pub fn at(&self, index: usize) -> f64 {
        self.0[index - 1]
    }

    /// Infinity norm.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &GammaVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Exchanges the roles of the two pair components:
    /// `(g1..g8) -> (g8, g7, g6, g5; g4, g3, g2, g1)`.
    pub fn mirrored(&self) -> GammaVector {
        let mut out = self.0;
        out.reverse();
        GammaVector(out)
    }
}

impl TryFrom<Vec<f64>> for GammaVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::from_slice(&v)
    }
}

impl From<GammaVector> for Vec<f64> {
    fn from(g: GammaVector) -> Self {
        g.0.to_vec()
    }
}

impl fmt::Display for GammaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.0;
        write!(
            f,
            "({}, {}, {}, {}; {}, {}, {}, {})",
            g[0], g[1], g[2], g[3], g[4], g[5], g[6], g[7]
        )
    }
}

/// The five canonical multiplications every associative bilinear product
/// can be regraded into (up to the inadmissible singular cases).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StandardForm {
    C1,
    C2,
    C3,
    N1,
    N2,
}

impl StandardForm {
    pub const ALL: [StandardForm; 5] = [
        StandardForm::C1,
        StandardForm::C2,
        StandardForm::C3,
        StandardForm::N1,
        StandardForm::N2,
    ];

    /// The canonical γ constant of this form.
    pub const fn gamma(self) -> GammaVector {
        match self {
            StandardForm::C1 => GammaVector::raw([1.0, 0.0, 0.0, -1.0, 0.0, 1.0, 1.0, 0.0]),
            StandardForm::C2 => GammaVector::raw([1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0]),
            StandardForm::C3 => GammaVector::raw([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            StandardForm::N1 => GammaVector::raw([1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            StandardForm::N2 => GammaVector::raw([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            StandardForm::C1 => "C1",
            StandardForm::C2 => "C2",
            StandardForm::C3 => "C3",
            StandardForm::N1 => "N1",
            StandardForm::N2 => "N2",
        }
    }

    pub const fn is_commutative(self) -> bool {
        matches!(self, StandardForm::C1 | StandardForm::C2 | StandardForm::C3)
    }

    /// Multiplies two pairs under this form.
    pub fn mul(self, a: Pair, b: Pair) -> Pair {
        bilinear_mul(&self.gamma(), a, b)
    }
}

impl fmt::Display for StandardForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for StandardForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StandardForm::ALL
            .into_iter()
            .find(|f| f.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Setup(format!("unknown standard form '{s}'")))
    }
}

/// The sum rule: componentwise addition.
#[inline]
pub fn pair_add(a: Pair, b: Pair) -> Pair {
    Pair::raw(a.c1 + b.c1, a.c2 + b.c2)
}

#[inline]
pub fn scalar_mul(r: f64, a: Pair) -> Pair {
    Pair::raw(r * a.c1, r * a.c2)
}

pub fn bilinear_mul(g: &GammaVector, a: Pair, b: Pair) -> Pair {
    let g = &g.0;
    let (a1, a2, b1, b2) = (a.c1, a.c2, b.c1, b.c2);
    Pair::raw(
        g[0] * a1 * b1 + g[1] * a1 * b2 + g[2] * a2 * b1 + g[3] * a2 * b2,
        g[4] * a1 * b1 + g[5] * a1 * b2 + g[6] * a2 * b1 + g[7] * a2 * b2,
    )
}

/// Complex multiplication, i.e. [`bilinear_mul`] with the C1 constant.
#[inline]
pub fn complex_mul(a: Pair, b: Pair) -> Pair {
    bilinear_mul(&StandardForm::C1.gamma(), a, b)
}

/// `a ⊙ b - b ⊙ a`.
pub fn commutator(g: &GammaVector, a: Pair, b: Pair) -> Pair {
    bilinear_mul(g, a, b) - bilinear_mul(g, b, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(a: f64, b: f64) -> Pair {
        Pair::new(a, b).unwrap()
    }

    #[test]
    fn add_examples() {
        assert_eq!(p(1.0, 2.0) + p(3.0, 4.0), p(4.0, 6.0));
        assert_eq!(Pair::ZERO + p(-2.5, 7.0), p(-2.5, 7.0));
        assert_eq!(p(1.0, -1.0) + p(-1.0, 1.0), Pair::ZERO);
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(scalar_mul(2.0, p(1.0, 3.0)), p(2.0, 6.0));
        assert_eq!(scalar_mul(0.0, p(5.0, -7.0)), p(0.0, 0.0));
        assert_eq!(scalar_mul(-1.0, p(1.0, 2.0)), p(-1.0, -2.0));
    }

    #[test]
    fn bilinear_examples() {
        let c1 = StandardForm::C1.gamma();
        assert_eq!(bilinear_mul(&c1, Pair::I, Pair::I), p(-1.0, 0.0));
        assert_eq!(bilinear_mul(&StandardForm::C3.gamma(), p(2.0, 3.0), p(4.0, 5.0)), p(8.0, 15.0));
        assert_eq!(bilinear_mul(&StandardForm::N2.gamma(), p(2.0, 3.0), p(4.0, 5.0)), p(8.0, 12.0));
    }

    #[test]
    fn complex_examples() {
        let x = p(0.3, -1.7);
        assert_eq!(complex_mul(Pair::ONE, x), x);
        assert_eq!(complex_mul(Pair::I, Pair::I), p(-1.0, 0.0));
        assert_eq!(complex_mul(p(3.0, 4.0), p(3.0, -4.0)), p(25.0, 0.0));
    }

    #[test]
    fn commutator_examples() {
        let c1 = StandardForm::C1.gamma();
        assert_eq!(commutator(&c1, p(1.0, 2.0), p(-3.0, 0.5)), Pair::ZERO);
        // N2: a ⊙ b = (a1 b1, a2 b1); (1,2)⊙(3,4) = (3,6), (3,4)⊙(1,2) = (3,4)
        assert_eq!(commutator(&StandardForm::N2.gamma(), p(1.0, 2.0), p(3.0, 4.0)), p(0.0, 2.0));
        let g = GammaVector::new([0.3, -1.0, 2.0, 0.5, 1.5, -0.2, 0.7, 1.1]).unwrap();
        assert_eq!(commutator(&g, p(1.5, -2.0), p(1.5, -2.0)), Pair::ZERO);
    }

    #[test]
    fn constructors_reject_non_finite() {
        assert!(Pair::new(f64::NAN, 0.0).is_err());
        assert!(Pair::new(0.0, f64::INFINITY).is_err());
        assert!(GammaVector::new([0.0, 0.0, 0.0, f64::NEG_INFINITY, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(matches!(
            GammaVector::from_slice(&[1.0, 2.0]),
            Err(Error::WrongLength { expected: 8, got: 2 })
        ));
    }

    #[test]
    fn json_shapes() {
        assert_eq!(serde_json::to_string(&p(1.5, -2.0)).unwrap(), "[1.5,-2.0]");
        let g: GammaVector = serde_json::from_str("[1,0,0,-1,0,1,1,0]").unwrap();
        assert_eq!(g, StandardForm::C1.gamma());
        assert_eq!(serde_json::to_string(&g).unwrap(), "[1.0,0.0,0.0,-1.0,0.0,1.0,1.0,0.0]");
        assert!(serde_json::from_str::<GammaVector>("[1,2,3]").is_err());
        assert_eq!(serde_json::to_string(&StandardForm::N2).unwrap(), "\"N2\"");
    }

    #[test]
    fn commutative_family_commutes() {
        // (θ-ψε, φε, φε, φ; θε, θ, θ, ψ+φε)
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let [th, ph, ps, ep]: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let g = GammaVector::new([th - ps * ep, ph * ep, ph * ep, ph, th * ep, th, th, ps + ph * ep]).unwrap();
            for _ in 0..100 {
                let a = p(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                let b = p(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
                assert!(commutator(&g, a, b).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mirrored_swaps_components() {
        let g = GammaVector::new([0.3, -1.0, 2.0, 0.5, 1.5, -0.2, 0.7, 1.1]).unwrap();
        let swap = |x: Pair| p(x.c2(), x.c1());
        let (a, b) = (p(1.25, -0.5), p(0.75, 2.0));
        let lhs = swap(bilinear_mul(&g, a, b));
        let rhs = bilinear_mul(&g.mirrored(), swap(a), swap(b));
        assert!(lhs.approx_eq(&rhs, 1e-14));
    }
}
