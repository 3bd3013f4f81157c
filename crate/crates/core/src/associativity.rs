//! Associativity constraints on bilinear products and the family case tree.
//!
//! Expanding `(a⊙b)⊙c - a⊙(b⊙c)` gives sixteen trilinear coefficients, and
//! every one of them is, up to sign, one of the twelve polynomials returned
//! by [`twelve_equations`]. Hence for any triple
//!
//! ```text
//! |assoc_residual(g, a, b, c)|∞ <= max|r_k| · ‖a‖₁ ‖b‖₁ ‖c‖₁
//! ```
//!
//! which is what [`is_associative`] uses to cross-check itself.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_tol, Error, Result};
use crate::pair_algebra::{bilinear_mul, GammaVector, Pair};

/// Triples sampled by the randomized self-check in [`is_associative`].
pub const SELF_CHECK_TRIPLES: usize = 1000;

const SELF_CHECK_SEED: u64 = 0x5eed_a550c;

/// Left-minus-right values of the twelve associativity equations.
/// Serialized as a length-12 array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TwelveResiduals([f64; 12]);

impl TwelveResiduals {
    pub fn values(&self) -> [f64; 12] {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// One-based indices of the equations whose residual exceeds `threshold`.
    pub fn violated(&self, threshold: f64) -> Vec<usize> {
        (0..12).filter(|&i| self.0[i].abs() > threshold).map(|i| i + 1).collect()
    }
}

impl TryFrom<Vec<f64>> for TwelveResiduals {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        let got = v.len();
        let arr: [f64; 12] = v
            .try_into()
            .map_err(|_| Error::WrongLength { expected: 12, got })?;
        Ok(TwelveResiduals(arr))
    }
}

impl From<TwelveResiduals> for Vec<f64> {
    fn from(r: TwelveResiduals) -> Self {
        r.0.to_vec()
    }
}

/// `(a⊙b)⊙c - a⊙(b⊙c)` under the multiplication defined by `g`.
pub fn assoc_residual(g: &GammaVector, a: Pair, b: Pair, c: Pair) -> Pair {
    let left = bilinear_mul(g, bilinear_mul(g, a, b), c);
    let right = bilinear_mul(g, a, bilinear_mul(g, b, c));
    left - right
}

pub fn twelve_equations(g: &GammaVector) -> TwelveResiduals {
    let [g1, g2, g3, g4, g5, g6, g7, g8] = g.components();
    TwelveResiduals([
        g2 * g6 - g4 * g5,
        g3 * g7 - g4 * g5,
        g4 * (g2 - g3),
        g4 * (g6 - g7),
        g5 * (g2 - g3),
        g5 * (g6 - g7),
        g2 * (g1 - g7) - g3 * (g1 - g6),
        g4 * (g1 - g7) - g3 * (g3 - g8),
        g7 * (g1 - g7) - g5 * (g3 - g8),
        g7 * (g2 - g8) - g6 * (g3 - g8),
        g5 * (g2 - g8) - g6 * (g1 - g6),
        g2 * (g2 - g8) - g4 * (g1 - g6),
    ])
}

/// Each equation is quadratic in γ, so residuals are compared against
/// `tol · max(1, ‖γ‖∞²)`.
pub fn residual_scale(g: &GammaVector) -> f64 {
    let m = g.max_abs();
    (m * m).max(1.0)
}

/// `‖a‖₁ ‖b‖₁ ‖c‖₁`, the bound factor relating twelve-equation residuals
/// to triple residuals.
pub fn triple_scale(a: Pair, b: Pair, c: Pair) -> f64 {
    let l1 = |p: Pair| p.c1().abs() + p.c2().abs();
    l1(a) * l1(b) * l1(c)
}

pub(crate) fn random_pair<R: Rng>(rng: &mut R, radius: f64) -> Pair {
    Pair::raw(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius))
}

/// Decides associativity from the twelve equations, then confirms the answer
/// on [`SELF_CHECK_TRIPLES`] random triples.
///
/// An `Err(Error::Inconsistent)` means the two routes disagree, which can
/// only be an implementation defect.
pub fn is_associative(g: &GammaVector, tol: f64) -> Result<bool> {
    check_tol(tol)?;
    let residuals = twelve_equations(g);
    let max_r = residuals.max_abs();
    if max_r > tol * residual_scale(g) {
        return Ok(false);
    }
    let rounding = 32.0 * f64::EPSILON * residual_scale(g);
    let mut rng = ChaCha8Rng::seed_from_u64(SELF_CHECK_SEED);
    for _ in 0..SELF_CHECK_TRIPLES {
        let (a, b, c) = (random_pair(&mut rng, 2.0), random_pair(&mut rng, 2.0), random_pair(&mut rng, 2.0));
        let res = assoc_residual(g, a, b, c).max_abs();
        let bound = (max_r + rounding) * triple_scale(a, b, c);
        if res > bound {
            return Err(Error::Inconsistent(format!(
                "twelve-equation residual {max_r:e} accepted γ = {g}, but triple {a}, {b}, {c} has associator {res:e} > {bound:e}"
            )));
        }
    }
    Ok(true)
}

/// Outcome of the family case analysis. Serialized with a `family` tag and a
/// `params` object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params")]
pub enum Classification {
    /// `(θ-ψε, φε, φε, φ; θε, θ, θ, ψ+φε)`.
    CommutativeA { theta: f64, phi: f64, psi: f64, epsilon: f64 },
    /// Family A with the two pair components exchanged, i.e. the template
    /// above passed through [`GammaVector::mirrored`]. This covers the
    /// associative products with `γ6 = γ7 = 0`, `γ2 = γ3 ≠ 0` that the
    /// unmirrored template cannot express (it forces `γ5 = 0` there).
    CommutativeAMirrored { theta: f64, phi: f64, psi: f64, epsilon: f64 },
    /// `(γ1, γ2, 0, 0; 0, 0, γ1, γ2)`.
    NonCommutativeB { gamma1: f64, gamma2: f64 },
    /// `(γ1, 0, γ3, 0; 0, γ1, 0, γ3)`.
    NonCommutativeC { gamma1: f64, gamma3: f64 },
    /// A solution with `γ2 = γ3 = γ6 = γ7 = 0`.
    DegenerateLimit { gamma: GammaVector },
    NotAssociative { residuals: TwelveResiduals },
}

impl Classification {
    pub fn family_name(&self) -> &'static str {
        match self {
            Classification::CommutativeA { .. } => "CommutativeA",
            Classification::CommutativeAMirrored { .. } => "CommutativeAMirrored",
            Classification::NonCommutativeB { .. } => "NonCommutativeB",
            Classification::NonCommutativeC { .. } => "NonCommutativeC",
            Classification::DegenerateLimit { .. } => "DegenerateLimit",
            Classification::NotAssociative { .. } => "NotAssociative",
        }
    }

    pub fn is_associative(&self) -> bool {
        !matches!(self, Classification::NotAssociative { .. })
    }

    /// Parameter tuple of the family, if any, in template order.
    pub fn params(&self) -> Vec<f64> {
        match *self {
            Classification::CommutativeA { theta, phi, psi, epsilon }
            | Classification::CommutativeAMirrored { theta, phi, psi, epsilon } => {
                vec![theta, phi, psi, epsilon]
            }
            Classification::NonCommutativeB { gamma1, gamma2 } => vec![gamma1, gamma2],
            Classification::NonCommutativeC { gamma1, gamma3 } => vec![gamma1, gamma3],
            Classification::DegenerateLimit { gamma } => gamma.components().to_vec(),
            Classification::NotAssociative { .. } => Vec::new(),
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Classification::CommutativeA { theta, phi, psi, epsilon } => {
                write!(f, "CommutativeA(θ={theta}, φ={phi}, ψ={psi}, ε={epsilon})")
            }
            Classification::CommutativeAMirrored { theta, phi, psi, epsilon } => {
                write!(f, "CommutativeAMirrored(θ={theta}, φ={phi}, ψ={psi}, ε={epsilon})")
            }
            Classification::NonCommutativeB { gamma1, gamma2 } => {
                write!(f, "NonCommutativeB(γ1={gamma1}, γ2={gamma2})")
            }
            Classification::NonCommutativeC { gamma1, gamma3 } => {
                write!(f, "NonCommutativeC(γ1={gamma1}, γ3={gamma3})")
            }
            Classification::DegenerateLimit { gamma } => write!(f, "DegenerateLimit({gamma})"),
            Classification::NotAssociative { residuals } => {
                write!(f, "NotAssociative(max residual {:e})", residuals.max_abs())
            }
        }
    }
}

pub(crate) fn family_a_template(theta: f64, phi: f64, psi: f64, epsilon: f64) -> GammaVector {
    GammaVector::raw([
        theta - psi * epsilon,
        phi * epsilon,
        phi * epsilon,
        phi,
        theta * epsilon,
        theta,
        theta,
        psi + phi * epsilon,
    ])
}

/// The γ a family label stands for. Rejects `NotAssociative`.
pub fn reconstruct_gamma(c: &Classification) -> Result<GammaVector> {
    let g = match *c {
        Classification::CommutativeA { theta, phi, psi, epsilon } => {
            family_a_template(theta, phi, psi, epsilon)
        }
        Classification::CommutativeAMirrored { theta, phi, psi, epsilon } => {
            family_a_template(theta, phi, psi, epsilon).mirrored()
        }
        Classification::NonCommutativeB { gamma1, gamma2 } => {
            GammaVector::raw([gamma1, gamma2, 0.0, 0.0, 0.0, 0.0, gamma1, gamma2])
        }
        Classification::NonCommutativeC { gamma1, gamma3 } => {
            GammaVector::raw([gamma1, 0.0, gamma3, 0.0, 0.0, gamma1, 0.0, gamma3])
        }
        Classification::DegenerateLimit { gamma } => gamma,
        Classification::NotAssociative { .. } => {
            return Err(Error::WrongFamily("reconstruct_gamma"))
        }
    };
    GammaVector::new(g.components())
}

/// Classification plus notes about near-threshold decisions and template
/// overlaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutcome {
    pub classification: Classification,
    pub borderline: bool,
    pub diagnostics: Vec<String>,
}

struct ZeroTests {
    tol: f64,
    borderline: Vec<String>,
}

impl ZeroTests {
    fn is_zero(&mut self, name: &str, x: f64) -> bool {
        let zero = x.abs() <= self.tol;
        if x.abs() >= 0.01 * self.tol && x.abs() <= 100.0 * self.tol {
            self.borderline.push(format!(
                "{name} = {x:e} is within two decades of tol = {:e}; decided {}",
                self.tol,
                if zero { "zero" } else { "nonzero" }
            ));
        }
        zero
    }
}

fn family_a_params(g: &GammaVector) -> (f64, f64, f64, f64) {
    // γ6 = γ7 = θ ≠ 0, γ5 = θε, γ4 = φ, γ8 = ψ + φε
    let theta = 0.5 * (g.at(6) + g.at(7));
    let epsilon = g.at(5) / theta;
    let phi = g.at(4);
    let psi = g.at(8) - phi * epsilon;
    (theta, phi, psi, epsilon)
}

/// Names of every family template that reproduces `g` within tolerance.
pub fn matching_templates(g: &GammaVector, tol: f64) -> Vec<&'static str> {
    let scale = tol * g.max_abs().max(1.0);
    let mut out = Vec::new();
    let fits = |c: Classification| {
        reconstruct_gamma(&c)
            .map(|r| r.max_abs_diff(g) <= scale)
            .unwrap_or(false)
    };
    if g.at(6).abs() > tol || g.at(7).abs() > tol {
        let (theta, phi, psi, epsilon) = family_a_params(g);
        if fits(Classification::CommutativeA { theta, phi, psi, epsilon }) {
            out.push("CommutativeA");
        }
    }
    if g.at(4).abs() > tol {
        // θ = 0 member of family A: γ4 = φ, γ2 = φε, γ8 = ψ + φε
        let phi = g.at(4);
        let epsilon = g.at(2) / phi;
        let psi = g.at(8) - phi * epsilon;
        if fits(Classification::CommutativeA { theta: 0.0, phi, psi, epsilon }) && !out.contains(&"CommutativeA") {
            out.push("CommutativeA");
        }
    }
    let m = g.mirrored();
    if m.at(6).abs() > tol || m.at(7).abs() > tol {
        let (theta, phi, psi, epsilon) = family_a_params(&m);
        if fits(Classification::CommutativeAMirrored { theta, phi, psi, epsilon }) {
            out.push("CommutativeAMirrored");
        }
    }
    if fits(Classification::NonCommutativeB {
        gamma1: 0.5 * (g.at(1) + g.at(7)),
        gamma2: 0.5 * (g.at(2) + g.at(8)),
    }) {
        out.push("NonCommutativeB");
    }
    if fits(Classification::NonCommutativeC {
        gamma1: 0.5 * (g.at(1) + g.at(6)),
        gamma3: 0.5 * (g.at(3) + g.at(8)),
    }) {
        out.push("NonCommutativeC");
    }
    if [2, 3, 6, 7].iter().all(|&i| g.at(i).abs() <= tol) {
        out.push("DegenerateLimit");
    }
    out
}

/// Runs the case tree on `(γ6, γ7)`, then on `(γ2, γ3)` when both vanish.
pub fn classify(g: &GammaVector, tol: f64) -> Result<Classification> {
    classify_detailed(g, tol).map(|o| o.classification)
}

pub fn classify_detailed(g: &GammaVector, tol: f64) -> Result<ClassifyOutcome> {
    check_tol(tol)?;
    if !is_associative(g, tol)? {
        return Ok(ClassifyOutcome {
            classification: Classification::NotAssociative { residuals: twelve_equations(g) },
            borderline: false,
            diagnostics: Vec::new(),
        });
    }
    let mut z = ZeroTests { tol, borderline: Vec::new() };
    let mut diagnostics = Vec::new();

    let classification = if z.is_zero("γ6-γ7", g.at(6) - g.at(7)) && !z.is_zero("γ6", g.at(6)) {
        let (theta, phi, psi, epsilon) = family_a_params(g);
        Classification::CommutativeA { theta, phi, psi, epsilon }
    } else if !z.is_zero("γ6-γ7", g.at(6) - g.at(7)) {
        if z.is_zero("γ6", g.at(6)) {
            Classification::NonCommutativeB {
                gamma1: 0.5 * (g.at(1) + g.at(7)),
                gamma2: 0.5 * (g.at(2) + g.at(8)),
            }
        } else if z.is_zero("γ7", g.at(7)) {
            Classification::NonCommutativeC {
                gamma1: 0.5 * (g.at(1) + g.at(6)),
                gamma3: 0.5 * (g.at(3) + g.at(8)),
            }
        } else {
            return Err(Error::Inconsistent(format!(
                "associative γ = {g} has distinct nonzero γ6, γ7"
            )));
        }
    } else if z.is_zero("γ2-γ3", g.at(2) - g.at(3)) && !z.is_zero("γ2", g.at(2)) {
        // Mirror image of the first branch. The unmirrored template still
        // applies when γ5 = 0 (its θ = 0 members).
        let direct = if g.at(4).abs() > tol {
            let phi = g.at(4);
            let epsilon = g.at(2) / phi;
            let psi = g.at(8) - phi * epsilon;
            Some(Classification::CommutativeA { theta: 0.0, phi, psi, epsilon })
        } else {
            None
        };
        match direct {
            Some(c) if reconstruct_gamma(&c)?.max_abs_diff(g) <= tol * g.max_abs().max(1.0) => c,
            _ => {
                let (theta, phi, psi, epsilon) = family_a_params(&g.mirrored());
                Classification::CommutativeAMirrored { theta, phi, psi, epsilon }
            }
        }
    } else if !z.is_zero("γ2-γ3", g.at(2) - g.at(3)) {
        if z.is_zero("γ3", g.at(3)) {
            Classification::NonCommutativeB {
                gamma1: 0.5 * (g.at(1) + g.at(7)),
                gamma2: 0.5 * (g.at(2) + g.at(8)),
            }
        } else if z.is_zero("γ2", g.at(2)) {
            Classification::NonCommutativeC {
                gamma1: 0.5 * (g.at(1) + g.at(6)),
                gamma3: 0.5 * (g.at(3) + g.at(8)),
            }
        } else {
            return Err(Error::Inconsistent(format!(
                "associative γ = {g} has distinct nonzero γ2, γ3 with γ6 = γ7 = 0"
            )));
        }
    } else {
        Classification::DegenerateLimit { gamma: *g }
    };

    let rebuilt = reconstruct_gamma(&classification)?;
    let err = rebuilt.max_abs_diff(g);
    if err > tol * g.max_abs().max(1.0) {
        z.borderline.push(format!(
            "reconstructed γ differs from input by {err:e} (tol {tol:e})"
        ));
    }
    let overlaps = matching_templates(g, tol);
    if overlaps.len() > 1 {
        diagnostics.push(format!(
            "γ fits several templates ({}); reported the first branch of the case order",
            overlaps.join(", ")
        ));
    }
    let borderline = !z.borderline.is_empty();
    diagnostics.extend(z.borderline.into_iter().map(|m| format!("borderline: {m}")));
    Ok(ClassifyOutcome { classification, borderline, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pair_algebra::{commutator, StandardForm, DEFAULT_TOL};

    fn p(a: f64, b: f64) -> Pair {
        Pair::new(a, b).unwrap()
    }

    fn gv(g: [f64; 8]) -> GammaVector {
        GammaVector::new(g).unwrap()
    }

    fn assert_params(c: &Classification, expected: &[f64]) {
        let got = c.params();
        assert_eq!(got.len(), expected.len(), "{c}");
        for (x, y) in got.iter().zip(expected) {
            assert!((x - y).abs() < 1e-12, "{c}: expected {expected:?}");
        }
    }

    #[test]
    fn assoc_residual_examples() {
        let c1 = StandardForm::C1.gamma();
        assert_eq!(assoc_residual(&c1, p(1.0, 2.0), p(3.0, -1.0), p(0.0, 5.0)), Pair::ZERO);
        // g = (1,1,0,0;0,0,0,0): a⊙b = (a1 b1 + a1 b2, 0).
        // (1,1)⊙(1,1) = (2,0); (2,0)⊙(1,1) = (4,0); (1,1)⊙(2,0) = (2,0).
        let g = gv([1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(assoc_residual(&g, p(1.0, 1.0), p(1.0, 1.0), p(1.0, 1.0)), p(2.0, 0.0));
        let any = gv([0.3, -1.0, 2.0, 0.5, 1.5, -0.2, 0.7, 1.1]);
        assert_eq!(assoc_residual(&any, Pair::ZERO, p(1.0, 2.0), p(-3.0, 4.0)), Pair::ZERO);
    }

    #[test]
    fn twelve_equation_examples() {
        assert_eq!(twelve_equations(&StandardForm::C1.gamma()).max_abs(), 0.0);
        assert_eq!(twelve_equations(&StandardForm::C3.gamma()).max_abs(), 0.0);
        // (1,1,0,0;0,0,0,0): only r7 = γ2(γ1-γ7) = 1 and r12 = γ2(γ2-γ8) = 1 survive.
        let r = twelve_equations(&gv([1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(r.violated(0.0), vec![7, 12]);
        assert_eq!(r.values()[6], 1.0);
        assert_eq!(r.values()[11], 1.0);
    }

    #[test]
    fn is_associative_examples() {
        assert!(is_associative(&StandardForm::C1.gamma(), DEFAULT_TOL).unwrap());
        assert!(!is_associative(&gv([1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]), DEFAULT_TOL).unwrap());
        assert!(is_associative(&GammaVector::ZERO, DEFAULT_TOL).unwrap());
        assert!(matches!(
            is_associative(&GammaVector::ZERO, 0.0),
            Err(Error::InvalidTolerance(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let c = classify(&StandardForm::C1.gamma(), DEFAULT_TOL).unwrap();
        assert!(matches!(c, Classification::CommutativeA { .. }));
        assert_params(&c, &[1.0, -1.0, 0.0, 0.0]);

        let c = classify(&StandardForm::N2.gamma(), DEFAULT_TOL).unwrap();
        assert!(matches!(c, Classification::NonCommutativeB { .. }));
        assert_params(&c, &[1.0, 0.0]);

        let c = classify(&StandardForm::N1.gamma(), DEFAULT_TOL).unwrap();
        assert!(matches!(c, Classification::NonCommutativeC { .. }));
        assert_params(&c, &[1.0, 0.0]);

        let g = gv([0.7, 0.0, 0.0, 0.0, -1.3, 0.0, 0.0, 0.0]);
        assert_eq!(
            classify(&g, DEFAULT_TOL).unwrap(),
            Classification::DegenerateLimit { gamma: g }
        );
        assert!(matches!(
            classify(&StandardForm::C3.gamma(), DEFAULT_TOL).unwrap(),
            Classification::DegenerateLimit { .. }
        ));

        let bad = gv([1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        match classify(&bad, DEFAULT_TOL).unwrap() {
            Classification::NotAssociative { residuals } => assert_eq!(residuals.violated(1e-9), vec![7, 12]),
            other => panic!("expected NotAssociative, got {other}"),
        }
    }

    #[test]
    fn mirrored_branch() {
        // (γ1, g, g, 0; γ5, 0, 0, g) with γ5 ≠ 0 is associative but outside
        // the unmirrored template.
        let g = gv([0.4, 1.5, 1.5, 0.0, -0.8, 0.0, 0.0, 1.5]);
        assert!(is_associative(&g, DEFAULT_TOL).unwrap());
        let c = classify(&g, DEFAULT_TOL).unwrap();
        assert!(matches!(c, Classification::CommutativeAMirrored { .. }), "{c}");
        assert!(reconstruct_gamma(&c).unwrap().max_abs_diff(&g) < 1e-12);

        // θ = 0 member of family A also lands in the γ6 = γ7 = 0 branch, and
        // keeps its unmirrored label.
        let a0 = family_a_template(0.0, 1.2, 0.5, -0.75);
        let c = classify(&a0, DEFAULT_TOL).unwrap();
        assert!(matches!(c, Classification::CommutativeA { .. }), "{c}");
        assert!(reconstruct_gamma(&c).unwrap().max_abs_diff(&a0) < 1e-12);
    }

    #[test]
    fn reconstruct_examples() {
        let g = reconstruct_gamma(&Classification::CommutativeA { theta: 1.0, phi: -1.0, psi: 0.0, epsilon: 0.0 }).unwrap();
        assert_eq!(g.components(), [1.0, 0.0, 0.0, -1.0, 0.0, 1.0, 1.0, 0.0]);
        let g = reconstruct_gamma(&Classification::NonCommutativeB { gamma1: 1.0, gamma2: 0.0 }).unwrap();
        assert_eq!(g, StandardForm::N2.gamma());
        let g = reconstruct_gamma(&Classification::NonCommutativeC { gamma1: 1.0, gamma3: 0.0 }).unwrap();
        assert_eq!(g, StandardForm::N1.gamma());
        let not = Classification::NotAssociative { residuals: twelve_equations(&GammaVector::ZERO) };
        assert!(matches!(reconstruct_gamma(&not), Err(Error::WrongFamily(_))));
    }

    #[test]
    fn zero_vector_reports_overlap() {
        let out = classify_detailed(&GammaVector::ZERO, DEFAULT_TOL).unwrap();
        assert!(matches!(out.classification, Classification::DegenerateLimit { .. }));
        assert!(out.diagnostics.iter().any(|d| d.contains("several templates")), "{:?}", out.diagnostics);
    }

    #[test]
    fn near_threshold_is_flagged() {
        // γ6 just under tol: decided zero, flagged borderline.
        let g = gv([1.0, 0.0, 0.0, 0.0, 0.0, 5e-9, 1.0, 0.0]);
        let out = classify_detailed(&g, 1e-8).unwrap();
        assert!(out.borderline);
    }

    #[test]
    fn noncommutative_families_have_witnesses() {
        for c in [
            Classification::NonCommutativeB { gamma1: 0.8, gamma2: -1.1 },
            Classification::NonCommutativeC { gamma1: -0.4, gamma3: 1.7 },
        ] {
            let g = reconstruct_gamma(&c).unwrap();
            let w = commutator(&g, p(1.0, 0.0), p(0.0, 1.0)).max_abs()
                .max(commutator(&g, p(1.0, 1.0), p(0.0, 1.0)).max_abs());
            assert!(w > 1e-3, "{c}");
        }
    }

    #[test]
    fn classification_json_shape() {
        let c = Classification::NonCommutativeB { gamma1: 1.0, gamma2: 0.0 };
        let v: serde_json::Value = serde_json::to_value(c).unwrap();
        assert_eq!(v["family"], "NonCommutativeB");
        assert_eq!(v["params"]["gamma1"], 1.0);
        let r = Classification::NotAssociative { residuals: twelve_equations(&gv([1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])) };
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        assert_eq!(v["params"]["residuals"].as_array().unwrap().len(), 12);
        let back: Classification = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }
}
