//! Real solution sets of small systems of quadratic polynomial equations.
//!
//! A quadratic `P(x)` in `n` variables is stored as the symmetric
//! `(n+1)×(n+1)` matrix `H` with `P(x) = Xᵀ H X`, `X = (x, 1)`. The solver
//! keeps an affine parametrization `X = T·Y` of the current branch and
//! splits cases by
//!
//! * eliminating a variable with any linear consequence of the system
//!   (including combinations whose quadratic parts cancel),
//! * replacing a semidefinite equation `Σ λᵢ (uᵢ·Y)² = 0` by `uᵢ·Y = 0`,
//! * branching on the two linear factors of a rank-2 indefinite equation.
//!
//! Affine substitution keeps every equation quadratic, so the recursion
//! closes. Equations of rank ≥ 3 that never become reducible are reported
//! as unresolved components instead of being guessed at.

use nalgebra::{DMatrix, SymmetricEigen};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Component {
    Point(Vec<f64>),
    /// `base + Σ tᵢ·dirs[i]`, with orthonormal `dirs` and `base` orthogonal
    /// to them.
    Affine { base: Vec<f64>, dirs: Vec<Vec<f64>> },
    Unresolved { base: Vec<f64>, dirs: Vec<Vec<f64>> },
}

/// Quadratic `Σ quad[u][v] x_u x_v + Σ lin[v] x_v + c` as its homogenized
/// symmetric matrix.
#[derive(Debug, Clone)]
pub(crate) struct Quadratic(DMatrix<f64>);

impl Quadratic {
    pub(crate) fn zero(n: usize) -> Self {
        Quadratic(DMatrix::zeros(n + 1, n + 1))
    }

    fn n(&self) -> usize {
        self.0.nrows() - 1
    }

    pub(crate) fn add_quad(&mut self, u: usize, v: usize, c: f64) {
        if u == v {
            self.0[(u, u)] += c;
        } else {
            self.0[(u, v)] += 0.5 * c;
            self.0[(v, u)] += 0.5 * c;
        }
    }

    pub(crate) fn add_lin(&mut self, v: usize, c: f64) {
        let n = self.n();
        self.0[(v, n)] += 0.5 * c;
        self.0[(n, v)] += 0.5 * c;
    }

    #[cfg(test)]
    pub(crate) fn add_const(&mut self, c: f64) {
        let n = self.n();
        self.0[(n, n)] += c;
    }

    #[cfg(test)]
    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        let xx = nalgebra::DVector::from_column_slice(x).push(1.0);
        xx.dot(&(&self.0 * &xx))
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

fn clean(mut m: DMatrix<f64>) -> DMatrix<f64> {
    m.iter_mut().for_each(|x| {
        if x.abs() < EPS {
            *x = 0.0
        }
    });
    m
}

enum Outcome {
    Dead,
    Substitute(Vec<DMatrix<f64>>),
    Branch(Vec<DMatrix<f64>>),
    Stuck,
}

/// `S` with `Y = S·Z` eliminating the variable with the largest coefficient
/// in the linear form `l` (length `m+1`, constant last). `None` means `l`
/// has no variable part.
fn eliminate(l: &[f64]) -> Option<DMatrix<f64>> {
    let m = l.len() - 1;
    let (j, lj) = l[..m]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(j, v)| (j, *v))?;
    if lj.abs() < EPS {
        return None;
    }
    let mut s = DMatrix::zeros(m + 1, m);
    let mut col = 0;
    for k in 0..=m {
        if k == j {
            continue;
        }
        s[(k, col)] = 1.0;
        s[(j, col)] = -l[k] / lj;
        col += 1;
    }
    Some(s)
}

/// Linear consequences: row-reduce on the quadratic coefficients and keep
/// rows whose quadratic part vanishes.
fn linear_consequences(eqs: &[DMatrix<f64>], m: usize) -> Vec<Vec<f64>> {
    let quad_idx: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let mut rows: Vec<(Vec<f64>, Vec<f64>)> = eqs
        .iter()
        .map(|h| {
            let q = quad_idx.iter().map(|&(i, j)| h[(i, j)]).collect();
            let l = (0..m).map(|v| 2.0 * h[(v, m)]).chain(std::iter::once(h[(m, m)])).collect();
            (q, l)
        })
        .collect();
    let mut r = 0;
    for c in 0..quad_idx.len() {
        let Some(p) = (r..rows.len()).max_by(|&a, &b| rows[a].0[c].abs().total_cmp(&rows[b].0[c].abs())) else {
            break;
        };
        if rows[p].0[c].abs() < EPS {
            continue;
        }
        rows.swap(r, p);
        let (pq, pl) = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row.0[c] / pq[c];
            if f != 0.0 {
                row.0.iter_mut().zip(&pq).for_each(|(x, y)| *x -= f * y);
                row.1.iter_mut().zip(&pl).for_each(|(x, y)| *x -= f * y);
            }
        }
        r += 1;
    }
    rows.into_iter()
        .skip(r)
        .map(|(_, l)| l)
        .filter(|l| l.iter().any(|x| x.abs() >= EPS))
        .collect()
}

/// Decomposes one equation into linear pieces when possible.
fn factor(h: &DMatrix<f64>) -> Option<Outcome> {
    let m = h.nrows() - 1;
    let eig = SymmetricEigen::new(h.clone());
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let nz: Vec<usize> = (0..=m).filter(|&i| eig.eigenvalues[i].abs() > EPS * scale.max(1.0)).collect();
    if nz.is_empty() {
        return None;
    }
    let form = |i: usize, w: f64| -> Vec<f64> {
        // u·Y with Y = (y, 1): coefficients of y_k are u_k, constant u_m.
        eig.eigenvectors.column(i).iter().map(|x| w * x).collect()
    };
    let pos = nz.iter().filter(|&&i| eig.eigenvalues[i] > 0.0).count();
    if pos == 0 || pos == nz.len() {
        let lin = form(nz[0], 1.0);
        return Some(match eliminate(&lin) {
            Some(s) => Outcome::Substitute(vec![s]),
            None => Outcome::Dead,
        });
    }
    if nz.len() == 2 {
        let (i, j) = if eig.eigenvalues[nz[0]] > 0.0 { (nz[0], nz[1]) } else { (nz[1], nz[0]) };
        let a = form(i, eig.eigenvalues[i].sqrt());
        let b = form(j, (-eig.eigenvalues[j]).sqrt());
        let mut branches = Vec::new();
        for sign in [1.0, -1.0] {
            let l: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + sign * y).collect();
            if let Some(s) = eliminate(&l) {
                branches.push(s);
            }
        }
        return Some(Outcome::Branch(branches));
    }
    None
}

fn step(eqs: &[DMatrix<f64>], m: usize) -> Outcome {
    if let Some(l) = linear_consequences(eqs, m).first() {
        return match eliminate(l) {
            Some(s) => Outcome::Substitute(vec![s]),
            None => Outcome::Dead,
        };
    }
    let mut branch = None;
    for h in eqs {
        match factor(h) {
            Some(o @ (Outcome::Substitute(_) | Outcome::Dead)) => return o,
            Some(o @ Outcome::Branch(_)) if branch.is_none() => branch = Some(o),
            _ => {}
        }
    }
    branch.unwrap_or(Outcome::Stuck)
}

fn recurse(eqs: &[DMatrix<f64>], t: DMatrix<f64>, out: &mut Vec<Component>, depth: usize) {
    let m = t.ncols() - 1;
    let reduced: Vec<DMatrix<f64>> = eqs
        .iter()
        .map(|h| clean(t.transpose() * h * &t))
        .filter(|h| max_abs(h) > 0.0)
        .collect();
    if reduced.iter().any(|h| {
        let mut v = h.clone();
        v[(m, m)] = 0.0;
        max_abs(&v) == 0.0
    }) {
        return; // nonzero constant equation
    }
    if reduced.is_empty() {
        out.push(component(&t, false));
        return;
    }
    if depth > 64 {
        out.push(component(&t, true));
        return;
    }
    match step(&reduced, m) {
        Outcome::Dead => {}
        Outcome::Substitute(s) | Outcome::Branch(s) => {
            for s in s {
                recurse(eqs, &t * s, out, depth + 1);
            }
        }
        Outcome::Stuck => out.push(component(&t, true)),
    }
}

fn component(t: &DMatrix<f64>, unresolved: bool) -> Component {
    let n = t.nrows() - 1;
    let m = t.ncols() - 1;
    let mut base: Vec<f64> = (0..n).map(|i| t[(i, m)]).collect();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for j in 0..m {
        let mut d: Vec<f64> = (0..n).map(|i| t[(i, j)]).collect();
        for e in &dirs {
            let dot: f64 = d.iter().zip(e).map(|(x, y)| x * y).sum();
            d.iter_mut().zip(e).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > EPS {
            dirs.push(d.iter().map(|x| x / norm).collect());
        }
    }
    for e in &dirs {
        let dot: f64 = base.iter().zip(e).map(|(x, y)| x * y).sum();
        base.iter_mut().zip(e).for_each(|(x, y)| *x -= dot * y);
    }
    for d in &mut dirs {
        let lead = d.iter().copied().find(|x| x.abs() > EPS).unwrap_or(1.0);
        if lead < 0.0 {
            d.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let snap = |v: &mut Vec<f64>| {
        v.iter_mut().for_each(|x| {
            let r = (*x * 1024.0).round() / 1024.0;
            if (r - *x).abs() < 1e-9 {
                *x = if r == 0.0 { 0.0 } else { r };
            }
        })
    };
    snap(&mut base);
    dirs.iter_mut().for_each(snap);
    match (unresolved, dirs.is_empty()) {
        (true, _) => Component::Unresolved { base, dirs },
        (false, true) => Component::Point(base),
        (false, false) => Component::Affine { base, dirs },
    }
}

/// Distance from `x` to the affine set `base + span(dirs)` (`dirs`
/// orthonormal).
pub(crate) fn distance_to(x: &[f64], base: &[f64], dirs: &[Vec<f64>]) -> f64 {
    let mut r: Vec<f64> = x.iter().zip(base).map(|(a, b)| a - b).collect();
    for d in dirs {
        let dot: f64 = r.iter().zip(d).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(d).for_each(|(a, b)| *a -= dot * b);
    }
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// All real solutions of `eqs = 0`, deduplicated; points lying on a
/// returned affine family are absorbed into it.
pub(crate) fn solve(eqs: &[Quadratic]) -> Vec<Component> {
    let Some(n) = eqs.first().map(Quadratic::n) else {
        return Vec::new();
    };
    let mats: Vec<DMatrix<f64>> = eqs.iter().map(|q| q.0.clone()).collect();
    let mut raw = Vec::new();
    recurse(&mats, DMatrix::identity(n + 1, n + 1), &mut raw, 0);

    let mut out: Vec<Component> = Vec::new();
    // families first so that points can be absorbed
    raw.sort_by_key(|c| match c {
        Component::Affine { dirs, .. } => std::cmp::Reverse(dirs.len() + 1),
        Component::Unresolved { .. } => std::cmp::Reverse(0),
        Component::Point(_) => std::cmp::Reverse(1),
    });
    for c in raw {
        let covered = out.iter().any(|o| match (o, &c) {
            (Component::Affine { base, dirs }, Component::Point(p)) => distance_to(p, base, dirs) < 1e-8,
            (Component::Affine { base, dirs }, Component::Affine { base: b2, dirs: d2 }) => {
                d2.len() <= dirs.len()
                    && distance_to(b2, base, dirs) < 1e-8
                    && d2.iter().all(|d| {
                        let tip: Vec<f64> = b2.iter().zip(d).map(|(x, y)| x + y).collect();
                        distance_to(&tip, base, dirs) < 1e-8
                    })
            }
            (Component::Point(a), Component::Point(b)) => distance_to(a, b, &[]) < 1e-8,
            _ => o == &c,
        });
        if !covered {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_meets_line() {
        // x² + y² − 1 = 0, x − y = 0
        let mut c = Quadratic::zero(2);
        c.add_quad(0, 0, 1.0);
        c.add_quad(1, 1, 1.0);
        c.add_const(-1.0);
        let mut l = Quadratic::zero(2);
        l.add_lin(0, 1.0);
        l.add_lin(1, -1.0);
        let sols = solve(&[c.clone(), l]);
        assert_eq!(sols.len(), 2, "{sols:?}");
        for s in sols {
            let Component::Point(p) = s else { panic!() };
            assert!(c.eval(&p).abs() < 1e-12);
        }
    }

    #[test]
    fn product_gives_two_lines() {
        // x·y = 0 in two variables: the two axes
        let mut q = Quadratic::zero(2);
        q.add_quad(0, 1, 1.0);
        let sols = solve(&[q]);
        assert_eq!(sols.len(), 2, "{sols:?}");
        assert!(sols.iter().all(|s| matches!(s, Component::Affine { dirs, .. } if dirs.len() == 1)));
    }

    #[test]
    fn sum_of_squares_is_a_point_and_negative_is_empty() {
        let mut q = Quadratic::zero(2);
        q.add_quad(0, 0, 1.0);
        q.add_quad(1, 1, 1.0);
        q.add_lin(0, -2.0);
        q.add_const(1.0); // (x-1)² + y²
        assert_eq!(solve(&[q]), vec![Component::Point(vec![1.0, 0.0])]);

        let mut e = Quadratic::zero(1);
        e.add_quad(0, 0, 1.0);
        e.add_const(1.0);
        assert!(solve(&[e]).is_empty());
    }
}
