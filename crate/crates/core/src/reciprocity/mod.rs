//! Linear reciprocity operators (anti-automorphisms of a standard form) and
//! the repeated-measurement elimination built on them.

mod elimination;

pub use elimination::{
    eliminate, exponent_grid, run_full_elimination, Certificate, DerivationReport, EliminationCell,
    EliminationConfig, ExponentAnalysis, Exponents, FamilySweep, FeynmanRules, FormEntry, Survivor,
    Verdict,
};

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pair_algebra::{Pair, StandardForm, DEFAULT_TOL};
use crate::polysys::{self, Component, Quadratic};

/// The matrix `[[R1, R2], [R3, R4]]` acting on pairs, with its flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReciprocityOp {
    matrix: [[f64; 2]; 2],
    pub invertible: bool,
    /// `R∘R = I`: reversing a reversed sequence returns the original pair.
    pub involution: bool,
    pub name: Option<&'static str>,
}

const NAMED: [(&str, [f64; 4]); 4] = [
    ("identity", [1.0, 0.0, 0.0, 1.0]),
    ("conjugation", [1.0, 0.0, 0.0, -1.0]),
    ("swap", [0.0, 1.0, 1.0, 0.0]),
    ("projection", [1.0, 0.0, 0.0, 0.0]),
];

fn l_inf(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

impl ReciprocityOp {
    pub fn new(r1: f64, r2: f64, r3: f64, r4: f64) -> Result<Self> {
        for x in [r1, r2, r3, r4] {
            if !x.is_finite() {
                return Err(Error::NonFinite { what: "reciprocity operator", value: x });
            }
        }
        let r = [r1, r2, r3, r4];
        let det = r1 * r4 - r2 * r3;
        let scale = r.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        let square = [r1 * r1 + r2 * r3, r1 * r2 + r2 * r4, r3 * r1 + r4 * r3, r3 * r2 + r4 * r4];
        Ok(ReciprocityOp {
            matrix: [[r1, r2], [r3, r4]],
            invertible: det.abs() > DEFAULT_TOL * scale * scale,
            involution: l_inf(square, [1.0, 0.0, 0.0, 1.0]) <= DEFAULT_TOL * scale * scale,
            name: NAMED.iter().find(|(_, m)| l_inf(*m, r) <= DEFAULT_TOL).map(|(n, _)| *n),
        })
    }

    pub fn from_array(r: [f64; 4]) -> Result<Self> {
        Self::new(r[0], r[1], r[2], r[3])
    }

    pub fn named(name: &str) -> Option<Self> {
        NAMED.iter().find(|(n, _)| *n == name).map(|(_, r)| Self::from_array(*r).expect("finite"))
    }

    pub fn identity() -> Self {
        Self::named("identity").expect("named")
    }

    pub fn conjugation() -> Self {
        Self::named("conjugation").expect("named")
    }

    pub fn swap() -> Self {
        Self::named("swap").expect("named")
    }

    pub fn projection() -> Self {
        Self::named("projection").expect("named")
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.matrix
    }

    pub fn entries(&self) -> [f64; 4] {
        let [[a, b], [c, d]] = self.matrix;
        [a, b, c, d]
    }

    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.matrix;
        a * d - b * c
    }

    pub fn is_zero(&self) -> bool {
        self.entries().iter().all(|x| *x == 0.0)
    }

    pub fn label(&self) -> String {
        match self.name {
            Some(n) => n.to_string(),
            None => self.to_string(),
        }
    }
}

impl fmt::Display for ReciprocityOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.matrix;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

pub fn rev_pair(r: &ReciprocityOp, a: Pair) -> Pair {
    let [[r1, r2], [r3, r4]] = r.matrix;
    Pair::raw(r1 * a.c1() + r2 * a.c2(), r3 * a.c1() + r4 * a.c2())
}

/// `R(a⊙b) − R(b)⊙R(a)` under the multiplication of `form`.
pub fn antihom_residual(r: &ReciprocityOp, form: StandardForm, a: Pair, b: Pair) -> Pair {
    rev_pair(r, form.mul(a, b)) - form.mul(rev_pair(r, b), rev_pair(r, a))
}

/// `(a⊙R(a)) ⊕ (b⊙R(b))`.
pub fn repeated_measurement_pair(a: Pair, b: Pair, r: &ReciprocityOp, form: StandardForm) -> Pair {
    form.mul(a, rev_pair(r, a)) + form.mul(b, rev_pair(r, b))
}

/// Coefficient equations of the anti-homomorphism condition in the unknowns
/// `x = (R1, R2, R3, R4)`, one per output component and monomial `a_i b_j`.
///
/// With `γ_k(i, j)` the coefficient of `a_i b_j` in component `k`:
/// `Σ_l R_kl γ_l(i, j) − Σ_{p,q} γ_k(p, q) R_pj R_qi = 0`.
fn coefficient_equations(form: StandardForm) -> Vec<Quadratic> {
    let g = form.gamma().components();
    let gamma = |k: usize, i: usize, j: usize| g[4 * k + 2 * i + j];
    let var = |row: usize, col: usize| 2 * row + col;
    let mut eqs = Vec::with_capacity(8);
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut q = Quadratic::zero(4);
                for l in 0..2 {
                    q.add_lin(var(k, l), gamma(l, i, j));
                }
                for p in 0..2 {
                    for qq in 0..2 {
                        q.add_quad(var(p, j), var(qq, i), -gamma(k, p, qq));
                    }
                }
                eqs.push(q);
            }
        }
    }
    eqs
}

/// A positive-dimensional set of solutions `base + Σ tᵢ·directions[i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorFamily {
    pub base: [[f64; 2]; 2],
    pub directions: Vec<[[f64; 2]; 2]>,
    pub description: String,
    /// Named operators lying on the family.
    pub named_members: Vec<&'static str>,
    pub invertible_members: bool,
}

fn to_matrix(v: &[f64]) -> [[f64; 2]; 2] {
    [[v[0], v[1]], [v[2], v[3]]]
}

fn flat(m: &[[f64; 2]; 2]) -> [f64; 4] {
    [m[0][0], m[0][1], m[1][0], m[1][1]]
}

fn describe_family(base: &[f64], dirs: &[Vec<f64>]) -> String {
    let names = ["t", "u", "v", "w"];
    let entry = |k: usize| -> String {
        let mut s = String::new();
        if base[k] != 0.0 || dirs.iter().all(|d| d[k] == 0.0) {
            s.push_str(&format!("{}", base[k]));
        }
        for (d, n) in dirs.iter().zip(names) {
            let c = d[k];
            if c == 0.0 {
                continue;
            }
            let term = if c == 1.0 {
                n.to_string()
            } else if c == -1.0 {
                format!("-{n}")
            } else {
                format!("{c}{n}")
            };
            if s.is_empty() || term.starts_with('-') {
                s.push_str(&term);
            } else {
                s.push_str(&format!("+{term}"));
            }
        }
        s
    };
    format!("[[{}, {}], [{}, {}]]", entry(0), entry(1), entry(2), entry(3))
}

impl OperatorFamily {
    fn from_component(base: Vec<f64>, dirs: Vec<Vec<f64>>) -> Self {
        let named_members = NAMED
            .iter()
            .filter(|(_, m)| polysys::distance_to(m, &base, &dirs) < 1e-9)
            .map(|(n, _)| *n)
            .collect();
        let mid: Vec<f64> = base
            .iter()
            .enumerate()
            .map(|(k, b)| b + dirs.iter().map(|d| 0.731 * d[k]).sum::<f64>())
            .collect();
        let invertible_members = ReciprocityOp::from_array(flat(&to_matrix(&mid)))
            .map(|o| o.invertible)
            .unwrap_or(false);
        OperatorFamily {
            description: describe_family(&base, &dirs),
            base: to_matrix(&base),
            directions: dirs.iter().map(|d| to_matrix(d)).collect(),
            named_members,
            invertible_members,
        }
    }

    pub fn dimension(&self) -> usize {
        self.directions.len()
    }

    /// Member at parameters `t` (missing parameters are zero).
    pub fn member(&self, t: &[f64]) -> Result<ReciprocityOp> {
        let mut r = flat(&self.base);
        for (d, tv) in self.directions.iter().zip(t) {
            let d = flat(d);
            for k in 0..4 {
                r[k] += tv * d[k];
            }
        }
        ReciprocityOp::from_array(r)
    }

    pub fn distance(&self, r: [f64; 4]) -> f64 {
        let dirs: Vec<Vec<f64>> = self.directions.iter().map(|d| flat(d).to_vec()).collect();
        polysys::distance_to(&r, &flat(&self.base), &dirs)
    }
}

/// Every nonzero solution of the anti-homomorphism condition for a form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReciprocitySolutions {
    pub form: StandardForm,
    pub isolated: Vec<ReciprocityOp>,
    pub families: Vec<OperatorFamily>,
    /// Branches the case analysis could not reduce (none for the standard
    /// forms).
    pub unresolved: Vec<String>,
}

impl ReciprocitySolutions {
    /// Distance from `r` to the nearest solution, the zero map included.
    pub fn distance(&self, r: [f64; 4]) -> f64 {
        let mut d = l2(r, [0.0; 4]);
        for op in &self.isolated {
            d = d.min(l2(r, op.entries()));
        }
        for f in &self.families {
            d = d.min(f.distance(r));
        }
        d
    }

    pub fn invertible_isolated(&self) -> Vec<&ReciprocityOp> {
        self.isolated.iter().filter(|o| o.invertible).collect()
    }

    pub fn names(&self) -> Vec<String> {
        self.isolated.iter().map(ReciprocityOp::label).collect()
    }
}

fn l2(a: [f64; 4], b: [f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn op_order(o: &ReciprocityOp) -> (usize, [i64; 4]) {
    let rank = NAMED.iter().position(|(n, _)| Some(*n) == o.name).unwrap_or(NAMED.len());
    (rank, o.entries().map(|x| -(x * 1e6).round() as i64))
}

/// Solves the eight coefficient equations by case analysis and discards the
/// zero map.
pub fn solve_reciprocity(form: StandardForm) -> ReciprocitySolutions {
    let mut isolated = Vec::new();
    let mut families = Vec::new();
    let mut unresolved = Vec::new();
    for c in polysys::solve(&coefficient_equations(form)) {
        match c {
            Component::Point(p) => {
                let op = ReciprocityOp::from_array(flat(&to_matrix(&p))).expect("finite solution");
                if !op.is_zero() {
                    isolated.push(op);
                }
            }
            Component::Affine { base, dirs } => families.push(OperatorFamily::from_component(base, dirs)),
            Component::Unresolved { base, dirs } => {
                unresolved.push(format!("{} with {} free directions", describe_family(&base, &dirs), dirs.len()))
            }
        }
    }
    isolated.sort_by_key(op_order);
    families.sort_by(|a, b| a.description.cmp(&b.description));
    ReciprocitySolutions { form, isolated, families, unresolved }
}

/// Grid points `R ∈ {lo, lo+step, …, hi}⁴` whose anti-homomorphism residual
/// stays below `threshold` on `pairs` random `(a, b)`.
pub fn brute_force_grid<R: Rng>(
    form: StandardForm,
    lo: f64,
    hi: f64,
    step: f64,
    pairs: usize,
    threshold: f64,
    rng: &mut R,
) -> Vec<[f64; 4]> {
    let samples: Vec<(Pair, Pair)> = (0..pairs)
        .map(|_| {
            let mut p = || Pair::raw(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            (p(), p())
        })
        .collect();
    let n = ((hi - lo) / step).round() as usize + 1;
    let axis: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let mut hits = Vec::new();
    for &r1 in &axis {
        for &r2 in &axis {
            for &r3 in &axis {
                for &r4 in &axis {
                    let op = ReciprocityOp { matrix: [[r1, r2], [r3, r4]], invertible: false, involution: false, name: None };
                    if samples
                        .iter()
                        .all(|&(a, b)| antihom_residual(&op, form, a, b).max_abs() < threshold)
                    {
                        hits.push([r1, r2, r3, r4]);
                    }
                }
            }
        }
    }
    hits
}

/// Agreement between the solver and a grid brute force.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub grid: String,
    pub hits: usize,
    /// Grid solutions the solver does not account for.
    pub unexplained: Vec<[f64; 4]>,
    /// Isolated solver solutions on the grid that the brute force missed.
    pub missed: Vec<String>,
    pub agrees: bool,
}

/// Brute force over `{−2, −1.5, …, 2}⁴` with 16 random pairs per operator.
pub fn cross_check(sol: &ReciprocitySolutions, seed: u64) -> CrossCheck {
    let mut rng = crate::rng::stream(seed, &[0x6e1d, sol.form as u64]);
    let hits = brute_force_grid(sol.form, -2.0, 2.0, 0.5, 16, 1e-9, &mut rng);
    let unexplained: Vec<[f64; 4]> = hits.iter().copied().filter(|&r| sol.distance(r) > 1e-9).collect();
    let on_grid = |x: f64| (x * 2.0).fract() == 0.0 && x.abs() <= 2.0;
    let missed: Vec<String> = sol
        .isolated
        .iter()
        .filter(|op| op.entries().iter().all(|&x| on_grid(x)))
        .filter(|op| !hits.contains(&op.entries()))
        .map(ReciprocityOp::label)
        .collect();
    CrossCheck {
        grid: "[-2, 2] step 0.5".into(),
        hits: hits.len(),
        agrees: unexplained.is_empty() && missed.is_empty(),
        unexplained,
        missed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> Pair {
        Pair::new(a, b).unwrap()
    }

    #[test]
    fn rev_pair_examples() {
        assert_eq!(rev_pair(&ReciprocityOp::identity(), p(3.0, 4.0)), p(3.0, 4.0));
        assert_eq!(rev_pair(&ReciprocityOp::conjugation(), p(3.0, 4.0)), p(3.0, -4.0));
        assert_eq!(rev_pair(&ReciprocityOp::swap(), p(3.0, 4.0)), p(4.0, 3.0));
    }

    #[test]
    fn antihom_examples() {
        let a = p(0.3, -1.7);
        let b = p(1.1, 0.4);
        for op in [ReciprocityOp::conjugation(), ReciprocityOp::identity()] {
            assert!(antihom_residual(&op, StandardForm::C1, a, b).max_abs() < 1e-15);
        }
        let r = antihom_residual(&ReciprocityOp::swap(), StandardForm::C1, Pair::ONE, Pair::I);
        assert_eq!(r, p(1.0, -1.0));
    }

    #[test]
    fn repeated_measurement_examples() {
        let (a, b) = (p(0.3, -1.7), p(1.1, 0.4));
        let c = repeated_measurement_pair(a, b, &ReciprocityOp::conjugation(), StandardForm::C1);
        assert!(c.approx_eq(&p(0.09 + 2.89 + 1.21 + 0.16, 0.0), 1e-12));
        let s = 0.8;
        let c = repeated_measurement_pair(p(s, 0.0), p(0.0, -s), &ReciprocityOp::identity(), StandardForm::C1);
        assert_eq!(c, Pair::ZERO);
        let c = repeated_measurement_pair(a, b, &ReciprocityOp::swap(), StandardForm::C3);
        let v = a.c1() * a.c2() + b.c1() * b.c2();
        assert!(c.approx_eq(&p(v, v), 1e-15));
    }

    #[test]
    fn flags_and_names() {
        let id = ReciprocityOp::identity();
        assert!(id.invertible && id.involution);
        let pr = ReciprocityOp::projection();
        assert!(!pr.invertible && !pr.involution);
        assert_eq!(ReciprocityOp::new(0.0, 1.0, 1.0, 0.0).unwrap().name, Some("swap"));
        assert_eq!(ReciprocityOp::new(2.0, 0.0, 0.0, 2.0).unwrap().name, None);
        let v = serde_json::to_value(ReciprocityOp::conjugation()).unwrap();
        assert_eq!(v["matrix"], serde_json::json!([[1.0, 0.0], [0.0, -1.0]]));
        assert_eq!(v["invertible"], true);
    }

    #[test]
    fn c1_solutions() {
        let s = solve_reciprocity(StandardForm::C1);
        assert_eq!(s.names(), vec!["identity", "conjugation"]);
        assert!(s.families.is_empty() && s.unresolved.is_empty());
    }

    #[test]
    fn c2_solutions_form_a_line() {
        let s = solve_reciprocity(StandardForm::C2);
        assert!(s.isolated.is_empty(), "{:?}", s.isolated);
        assert_eq!(s.families.len(), 1);
        let f = &s.families[0];
        assert_eq!(f.description, "[[1, 0], [0, t]]");
        assert_eq!(f.named_members, vec!["identity", "conjugation", "projection"]);
        for t in [-1.5, 0.0, 0.25, 2.0] {
            let op = f.member(&[t]).unwrap();
            for (a, b) in [(p(0.3, -1.7), p(1.1, 0.4)), (p(-2.0, 0.5), p(0.7, 0.9))] {
                assert!(antihom_residual(&op, StandardForm::C2, a, b).max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn c3_solutions() {
        let s = solve_reciprocity(StandardForm::C3);
        assert!(s.families.is_empty());
        assert_eq!(s.isolated.len(), 8, "{:?}", s.names());
        let inv: Vec<String> = s.invertible_isolated().iter().map(|o| o.label()).collect();
        assert_eq!(inv, vec!["identity", "swap"]);
        for op in &s.isolated {
            assert!(antihom_residual(op, StandardForm::C3, p(0.3, -1.7), p(1.1, 0.4)).max_abs() < 1e-14);
        }
    }
}
