//! Invertible changes of basis on pair space and reduction to standard forms.
//!
//! Convention: a regrading `m` sends old coordinates `x` to new ones
//! `x' = m·x`, and [`transform_gamma`] returns the γ′ with
//! `m(a ⊙_γ b) = (m a) ⊙_γ′ (m b)`.
//!
//! [`gamma_transformation_matrix`] is the 8×8 coefficient map with the
//! `1/(SV−TU)` prefactor. Applied to the matrix `n` it expresses γ in the
//! coordinates `x'` defined by `x = n·x'`, so
//! `transform_gamma(m, γ) = gamma_transformation_matrix(m⁻¹)·γ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::associativity::{classify, reconstruct_gamma, Classification};
use crate::error::{check_tol, Error, Result};
use crate::pair_algebra::{GammaVector, Pair, StandardForm, DEFAULT_TOL};

/// Tolerance for checking that a computed reduction lands on its standard
/// constant.
pub const REDUCTION_CHECK_TOL: f64 = 1e-8;

/// A 2×2 real matrix `[[S, T], [U, V]]`, always invertible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Regrading {
    s: f64,
    t: f64,
    u: f64,
    v: f64,
}

fn singular(det: f64, max_entry: f64, tol: f64) -> bool {
    det.abs() <= tol * max_entry * max_entry || det == 0.0
}

impl Regrading {
    pub const IDENTITY: Regrading = Regrading { s: 1.0, t: 0.0, u: 0.0, v: 1.0 };
    pub const SWAP: Regrading = Regrading { s: 0.0, t: 1.0, u: 1.0, v: 0.0 };

    /// Validates with [`DEFAULT_TOL`].
    pub fn new(s: f64, t: f64, u: f64, v: f64) -> Result<Self> {
        Self::with_tol(s, t, u, v, DEFAULT_TOL)
    }

    /// Rejects non-finite entries and `|SV−TU| ≤ tol·‖M‖∞²`.
    pub fn with_tol(s: f64, t: f64, u: f64, v: f64, tol: f64) -> Result<Self> {
        check_tol(tol)?;
        for x in [s, t, u, v] {
            if !x.is_finite() {
                return Err(Error::NonFinite { what: "regrading", value: x });
            }
        }
        let m = Regrading { s, t, u, v };
        if singular(m.det(), m.max_abs(), tol) {
            return Err(Error::SingularRegrading { det: m.det() });
        }
        Ok(m)
    }

    pub fn entries(&self) -> [[f64; 2]; 2] {
        [[self.s, self.t], [self.u, self.v]]
    }

    pub fn det(&self) -> f64 {
        self.s * self.v - self.t * self.u
    }

    pub fn max_abs(&self) -> f64 {
        self.s.abs().max(self.t.abs()).max(self.u.abs()).max(self.v.abs())
    }

    pub fn inverse(&self) -> Regrading {
        let d = self.det();
        Regrading { s: self.v / d, t: -self.t / d, u: -self.u / d, v: self.s / d }
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn compose(&self, other: &Regrading) -> Regrading {
        Regrading {
            s: self.s * other.s + self.t * other.u,
            t: self.s * other.t + self.t * other.v,
            u: self.u * other.s + self.v * other.u,
            v: self.u * other.t + self.v * other.v,
        }
    }

    pub fn max_abs_diff(&self, other: &Regrading) -> f64 {
        (self.s - other.s)
            .abs()
            .max((self.t - other.t).abs())
            .max((self.u - other.u).abs())
            .max((self.v - other.v).abs())
    }
}

impl TryFrom<[[f64; 2]; 2]> for Regrading {
    type Error = Error;
    fn try_from(m: [[f64; 2]; 2]) -> Result<Self> {
        Regrading::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<Regrading> for [[f64; 2]; 2] {
    fn from(m: Regrading) -> Self {
        m.entries()
    }
}

impl fmt::Display for Regrading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.s, self.t, self.u, self.v)
    }
}

pub fn apply_to_pair(m: &Regrading, a: Pair) -> Pair {
    Pair::raw(m.s * a.c1() + m.t * a.c2(), m.u * a.c1() + m.v * a.c2())
}

/// The 8×8 coefficient transformation for `n = [[S, T], [U, V]]`, including
/// the `1/(SV−TU)` prefactor. Row `i` gives γ′_{i+1}.
pub fn gamma_transformation_matrix(n: &Regrading) -> [[f64; 8]; 8] {
    let (s, t, u, v) = (n.s, n.t, n.u, n.v);
    let k = 1.0 / n.det();
    let rows = [
        // γ1': S²V  SUV  SUV  U²V | −S²T  −STU  −STU  −TU²
        [s * s * v, s * u * v, s * u * v, u * u * v, -s * s * t, -s * t * u, -s * t * u, -t * u * u],
        // γ2': STV  SV²  TUV  UV² | −ST²  −STV  −T²U  −TUV
        [s * t * v, s * v * v, t * u * v, u * v * v, -s * t * t, -s * t * v, -t * t * u, -t * u * v],
        // γ3': STV  TUV  SV²  UV² | −ST²  −T²U  −STV  −TUV
        [s * t * v, t * u * v, s * v * v, u * v * v, -s * t * t, -t * t * u, -s * t * v, -t * u * v],
        // γ4': T²V  TV²  TV²  V³ | −T³  −T²V  −T²V  −TV²
        [t * t * v, t * v * v, t * v * v, v * v * v, -t * t * t, -t * t * v, -t * t * v, -t * v * v],
        // γ5': −S²U  −SU²  −SU²  −U³ | S³  S²U  S²U  SU²
        [-s * s * u, -s * u * u, -s * u * u, -u * u * u, s * s * s, s * s * u, s * s * u, s * u * u],
        // γ6': −STU  −SUV  −TU²  −U²V | S²T  S²V  STU  SUV
        [-s * t * u, -s * u * v, -t * u * u, -u * u * v, s * s * t, s * s * v, s * t * u, s * u * v],
        // γ7': −STU  −TU²  −SUV  −U²V | S²T  STU  S²V  SUV
        [-s * t * u, -t * u * u, -s * u * v, -u * u * v, s * s * t, s * t * u, s * s * v, s * u * v],
        // γ8': −T²U  −TUV  −TUV  −UV² | ST²  STV  STV  SV²
        [-t * t * u, -t * u * v, -t * u * v, -u * v * v, s * t * t, s * t * v, s * t * v, s * v * v],
    ];
    rows.map(|row| row.map(|x| k * x))
}

/// `gamma_transformation_matrix(n)·γ`: γ rewritten in coordinates `x'` with
/// `x = n·x'`.
pub fn pull_back_gamma(n: &Regrading, g: &GammaVector) -> GammaVector {
    let mat = gamma_transformation_matrix(n);
    let gc = g.components();
    let mut out = [0.0; 8];
    for (o, row) in out.iter_mut().zip(mat.iter()) {
        *o = row.iter().zip(gc.iter()).map(|(m, x)| m * x).sum();
    }
    GammaVector::raw(out)
}

/// γ′ such that `m(a ⊙_γ b) = (m a) ⊙_γ′ (m b)` for all pairs.
pub fn transform_gamma(m: &Regrading, g: &GammaVector) -> GammaVector {
    pull_back_gamma(&m.inverse(), g)
}

/// Outcome of [`reduce_to_standard`]. Serialized either as
/// `{"form", "mu", "map"}` or as `{"inadmissible": reason}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReductionResult {
    Reduced {
        form: StandardForm,
        mu: Option<i8>,
        map: Regrading,
    },
    Inadmissible {
        inadmissible: String,
    },
}

impl ReductionResult {
    pub fn form(&self) -> Option<StandardForm> {
        match self {
            ReductionResult::Reduced { form, .. } => Some(*form),
            ReductionResult::Inadmissible { .. } => None,
        }
    }
}

fn sign(x: f64, tol: f64) -> i8 {
    if x.abs() <= tol {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

fn family_a_discriminant(theta: f64, phi: f64, psi: f64) -> f64 {
    4.0 * theta * phi + psi * psi
}

/// `sgn(4θφ+ψ²)` for the commutative family (mirrored or not).
pub fn mu_of(c: &Classification) -> Result<i8> {
    mu_with_tol(c, DEFAULT_TOL)
}

pub fn mu_with_tol(c: &Classification, tol: f64) -> Result<i8> {
    match *c {
        Classification::CommutativeA { theta, phi, psi, .. }
        | Classification::CommutativeAMirrored { theta, phi, psi, .. } => {
            let scale = theta.abs().max(phi.abs()).max(psi.abs()).max(1.0);
            Ok(sign(family_a_discriminant(theta, phi, psi), tol * scale * scale))
        }
        _ => Err(Error::WrongFamily("mu_of")),
    }
}

/// `(1,0,0,1;0,1,1,0)`, the μ = +1 commutative normal form.
pub const SPLIT_COMMUTATIVE: GammaVector = GammaVector::raw([1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]);

/// Takes [`SPLIT_COMMUTATIVE`] to the componentwise product C3.
pub const SPLIT_TO_C3: Regrading = Regrading { s: 1.0, t: -1.0, u: 1.0, v: 1.0 };

fn family_a_recovery(theta: f64, phi: f64, psi: f64, epsilon: f64, mu: i8) -> [f64; 4] {
    let delta = if mu == 0 {
        1.0
    } else {
        family_a_discriminant(theta, phi, psi).abs().sqrt()
    };
    [
        0.5 * (2.0 * theta - psi * epsilon),
        0.5 * (2.0 * phi * epsilon + psi),
        0.5 * epsilon * delta,
        0.5 * delta,
    ]
}

fn build(entries: [f64; 4], tol: f64) -> Option<Regrading> {
    let [s, t, u, v] = entries;
    Regrading::with_tol(s, t, u, v, tol).ok()
}

fn inadmissible(reason: impl Into<String>) -> ReductionResult {
    ReductionResult::Inadmissible { inadmissible: reason.into() }
}

/// Finds a regrading taking the classified γ to one of the five standard
/// constants.
///
/// The recovery matrices below satisfy
/// `gamma_transformation_matrix(M)·standard = γ_family`, so under the
/// `x' = m·x` convention `M` itself is the reduction map. The μ = +1 branch
/// is composed with [`SPLIT_TO_C3`]. An input that already equals its
/// target constant gets the identity map.
pub fn reduce_to_standard(c: &Classification) -> Result<ReductionResult> {
    reduce_with_tol(c, DEFAULT_TOL)
}

pub fn reduce_with_tol(c: &Classification, tol: f64) -> Result<ReductionResult> {
    check_tol(tol)?;
    let input = reconstruct_gamma(c)?;
    let (form, mu, map) = match *c {
        Classification::CommutativeA { theta, phi, psi, epsilon }
        | Classification::CommutativeAMirrored { theta, phi, psi, epsilon } => {
            let mu = mu_with_tol(c, tol)?;
            let Some(mut map) = build(family_a_recovery(theta, phi, psi, epsilon, mu), tol) else {
                return Ok(inadmissible(format!(
                    "singular: θ = (ψ+φε)ε with θ = {theta}, ψ+φε = {}, ε = {epsilon}",
                    psi + phi * epsilon
                )));
            };
            if matches!(c, Classification::CommutativeAMirrored { .. }) {
                map = map.compose(&Regrading::SWAP);
            }
            let form = match mu {
                -1 => StandardForm::C1,
                0 => StandardForm::C2,
                _ => {
                    map = SPLIT_TO_C3.compose(&map);
                    StandardForm::C3
                }
            };
            (form, Some(mu), map)
        }
        Classification::NonCommutativeB { gamma1, gamma2 } => {
            let Some(map) = build([gamma1, gamma2, -gamma2, gamma1], tol) else {
                return Ok(inadmissible("zero-parameters: γ1 = γ2 = 0"));
            };
            (StandardForm::N2, None, map)
        }
        Classification::NonCommutativeC { gamma1, gamma3 } => {
            let Some(map) = build([gamma1, gamma3, -gamma3, gamma1], tol) else {
                return Ok(inadmissible("zero-parameters: γ1 = γ3 = 0"));
            };
            (StandardForm::N1, None, map)
        }
        Classification::DegenerateLimit { gamma } => {
            let (g1, g8) = (gamma.at(1), gamma.at(8));
            let rest = [gamma.at(4), gamma.at(5)];
            if g1.abs() > tol && g8.abs() > tol && rest.iter().all(|x| x.abs() <= tol) {
                let Some(map) = build([g1, 0.0, 0.0, g8], tol) else {
                    return Ok(inadmissible("singular diagonal"));
                };
                (StandardForm::C3, None, map)
            } else {
                return Ok(inadmissible(
                    "degenerate: every product lies on a single line, so the pair carries one effective component",
                ));
            }
        }
        Classification::NotAssociative { .. } => return Err(Error::WrongFamily("reduce_to_standard")),
    };

    let target = form.gamma();
    let map = if input.max_abs_diff(&target) <= tol { Regrading::IDENTITY } else { map };
    let landed = transform_gamma(&map, &input);
    let err = landed.max_abs_diff(&target);
    if err > REDUCTION_CHECK_TOL {
        return Err(Error::Inconsistent(format!(
            "reduction map {map} sends {input} to {landed}, {err:e} away from {form}"
        )));
    }
    Ok(ReductionResult::Reduced { form, mu, map })
}

/// Classifies γ and reduces it, in one call.
pub fn classify_and_reduce(g: &GammaVector, tol: f64) -> Result<(Classification, Option<ReductionResult>)> {
    let c = classify(g, tol)?;
    if !c.is_associative() {
        return Ok((c, None));
    }
    let r = reduce_with_tol(&c, tol)?;
    Ok((c, Some(r)))
}
