//! Closed-form solutions of `h(a⊙b) = h(a)·h(b)` for each standard form,
//! and the admissibility filter.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pair_algebra::{Pair, StandardForm};

/// A member of one of the five solution families.
///
/// `beta` is only carried for C2 and C3; it is `None` (JSON `null`) for the
/// other forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HFunction {
    pub form: StandardForm,
    pub alpha: f64,
    pub beta: Option<f64>,
}

impl HFunction {
    /// Builds an h for `form`, dropping `beta` where the family has none and
    /// defaulting it to 0 where the family needs one.
    pub fn new(form: StandardForm, alpha: f64, beta: f64) -> Self {
        let beta = if solution_family_for(form).beta_free { Some(beta) } else { None };
        HFunction { form, alpha, beta }
    }

    pub fn born() -> Self {
        HFunction { form: StandardForm::C1, alpha: 2.0, beta: None }
    }

    pub fn beta_or_zero(&self) -> f64 {
        self.beta.unwrap_or(0.0)
    }
}

fn domain(form: StandardForm, reason: impl Into<String>) -> Error {
    Error::Domain { form: form.label(), reason: reason.into() }
}

fn power(form: StandardForm, x: f64, exp: f64) -> Result<f64> {
    if x == 0.0 && exp < 0.0 {
        return Err(domain(form, format!("zero component raised to negative power {exp}")));
    }
    Ok(x.abs().powf(exp))
}

pub fn h_eval(h: &HFunction, a: Pair) -> Result<f64> {
    let (x1, x2) = (a.c1(), a.c2());
    let v = match h.form {
        StandardForm::C1 => {
            let r2 = a.norm_sqr();
            if r2 == 0.0 && h.alpha < 0.0 {
                return Err(domain(h.form, "origin with negative exponent"));
            }
            r2.powf(h.alpha / 2.0)
        }
        StandardForm::C2 => {
            if x1 == 0.0 {
                return Err(domain(h.form, "first component is zero"));
            }
            x1.abs().powf(h.alpha) * (h.beta_or_zero() * x2 / x1).exp()
        }
        StandardForm::C3 => power(h.form, x1, h.alpha)? * power(h.form, x2, h.beta_or_zero())?,
        StandardForm::N1 | StandardForm::N2 => power(h.form, x1, h.alpha)?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(h.form, format!("value overflows at {a}")))
    }
}

/// `|h(a⊙b) − h(a)·h(b)|` under the multiplication of `h.form`.
pub fn multiplicativity_residual(h: &HFunction, a: Pair, b: Pair) -> Result<f64> {
    let ab = h.form.mul(a, b);
    Ok((h_eval(h, ab)? - h_eval(h, a)? * h_eval(h, b)?).abs())
}

/// Whether h depends on both pair components.
pub fn admissible(h: &HFunction) -> bool {
    match h.form {
        StandardForm::C1 => h.alpha != 0.0,
        StandardForm::C2 => h.beta_or_zero() != 0.0,
        StandardForm::C3 => h.alpha != 0.0 && h.beta_or_zero() != 0.0,
        StandardForm::N1 | StandardForm::N2 => false,
    }
}

/// Perturbation test: h must change when each component is moved alone.
/// Points are taken at `base` (which must be in the domain).
pub fn admissible_by_perturbation(h: &HFunction, base: Pair, step: f64) -> Result<bool> {
    let h0 = h_eval(h, base)?;
    let moved = |p: Pair| -> Result<bool> {
        let hp = h_eval(h, p)?;
        Ok((hp - h0).abs() > 1e-12 * (1.0 + h0.abs()))
    };
    let d1 = moved(Pair::new(base.c1() + step, base.c2())?)?;
    let d2 = moved(Pair::new(base.c1(), base.c2() + step)?)?;
    Ok(d1 && d2)
}

/// Parameter schema and formula identifier of a solution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SolutionFamily {
    pub form: StandardForm,
    pub alpha_free: bool,
    pub beta_free: bool,
    pub formula_id: &'static str,
    pub formula: &'static str,
}

pub fn solution_family_for(form: StandardForm) -> SolutionFamily {
    let (beta_free, formula_id, formula) = match form {
        StandardForm::C1 => (false, "radial-power", "(x1^2 + x2^2)^(alpha/2)"),
        StandardForm::C2 => (true, "power-exponential-ratio", "|x1|^alpha * exp(beta * x2 / x1)"),
        StandardForm::C3 => (true, "separable-power", "|x1|^alpha * |x2|^beta"),
        StandardForm::N1 | StandardForm::N2 => (false, "first-component-power", "|x1|^alpha"),
    };
    SolutionFamily { form, alpha_free: true, beta_free, formula_id, formula }
}

/// Result of checking multiplicativity on random in-domain pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleCheck {
    pub checked: usize,
    /// Draws outside the domain of `h`.
    pub skipped: usize,
    /// max |h(a⊙b) − h(a)h(b)| / (1 + |h(a)h(b)|).
    pub max_relative: f64,
}

/// Draws `samples` pairs `(a, b)` uniformly from `[−2, 2]²` each.
pub fn sampled_multiplicativity(h: &HFunction, samples: usize, rng: &mut impl Rng) -> SampleCheck {
    let mut out = SampleCheck { checked: 0, skipped: 0, max_relative: 0.0 };
    for _ in 0..samples {
        let a = Pair::raw(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let b = Pair::raw(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let (Ok(ha), Ok(hb), Ok(hab)) = (h_eval(h, a), h_eval(h, b), h_eval(h, h.form.mul(a, b))) else {
            out.skipped += 1;
            continue;
        };
        out.checked += 1;
        let prod = ha * hb;
        out.max_relative = out.max_relative.max((hab - prod).abs() / (1.0 + prod.abs()));
    }
    out
}
