//! Homogeneous polynomial symbols and the real-principal-type check.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{order, MultiIndex, Polynomial};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialSpec {
    pub alpha: Vec<u32>,
    pub coeff: f64,
}

/// On-disk symbol format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub n: usize,
    pub k: usize,
    pub monomials: Vec<MonomialSpec>,
}

/// Degree-`k` homogeneous polynomial `p` on `ℝⁿ`.
#[derive(Debug, Clone)]
pub struct HomogeneousSymbol {
    n: usize,
    k: usize,
    name: Option<String>,
    poly: Polynomial<f64>,
    grad: Vec<Polynomial<f64>>,
    hess: Vec<Vec<Polynomial<f64>>>,
}

impl HomogeneousSymbol {
    pub fn new(n: usize, k: usize, monomials: Vec<(MultiIndex, f64)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSymbol(format!("dimension must be at least 2, got {n}")));
        }
        if k == 0 {
            return Err(Error::DegreeError);
        }
        for (alpha, c) in &monomials {
            if alpha.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: alpha.len(),
                });
            }
            if order(alpha) != k {
                return Err(Error::InvalidSymbol(format!(
                    "monomial {alpha:?} has degree {} but k = {k}",
                    order(alpha)
                )));
            }
            if !c.is_finite() {
                return Err(Error::InvalidSymbol(format!("non-finite coefficient {c}")));
            }
        }
        let poly = Polynomial::from_terms(n, monomials);
        if poly.is_zero() {
            return Err(Error::InvalidSymbol("all coefficients vanish".into()));
        }
        Ok(Self::from_polynomial_unchecked(n, k, poly))
    }

    fn from_polynomial_unchecked(n: usize, k: usize, poly: Polynomial<f64>) -> Self {
        let grad: Vec<_> = (0..n).map(|j| poly.partial(j)).collect();
        let hess = grad
            .iter()
            .map(|g| (0..n).map(|l| g.partial(l)).collect())
            .collect();
        Self {
            n,
            k,
            name: None,
            poly,
            grad,
            hess,
        }
    }

    pub fn from_file(file: &SymbolFile) -> Result<Self> {
        let sym = Self::new(
            file.n,
            file.k,
            file.monomials.iter().map(|m| (m.alpha.clone(), m.coeff)).collect(),
        )?;
        Ok(sym.with_name(file.name.clone()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SymbolFile =
            serde_json::from_str(text).map_err(|e| Error::InvalidSymbol(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> SymbolFile {
        SymbolFile {
            name: self.name.clone(),
            n: self.n,
            k: self.k,
            monomials: self
                .poly
                .terms()
                .map(|(a, &c)| MonomialSpec {
                    alpha: a.clone(),
                    coeff: c,
                })
                .collect(),
        }
    }

    pub fn with_name(mut self, name: Option<String>) -> Self {
        self.name = name;
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn polynomial(&self) -> &Polynomial<f64> {
        &self.poly
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.poly.eval(xi)
    }

    pub fn gradient(&self, xi: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval(xi)).collect()
    }

    pub fn hessian(&self, xi: &[f64]) -> Vec<Vec<f64>> {
        self.hess
            .iter()
            .map(|row| row.iter().map(|h| h.eval(xi)).collect())
            .collect()
    }

    /// `∇p(θ) − ⟨∇p(θ), θ⟩θ` for a unit vector θ.
    pub fn tangential_gradient(&self, theta: &[f64]) -> Vec<f64> {
        let g = self.gradient(theta);
        let radial: f64 = g.iter().zip(theta).map(|(a, b)| a * b).sum();
        g.iter().zip(theta).map(|(a, t)| a - radial * t).collect()
    }

    pub fn tangential_gradient_norm(&self, theta: &[f64]) -> f64 {
        norm(&self.tangential_gradient(theta))
    }

    /// The symbol `ξ ↦ p(Mξ)`.
    pub fn composed(&self, m: &[Vec<f64>]) -> Self {
        Self::from_polynomial_unchecked(self.n, self.k, self.poly.compose_linear(m))
            .with_name(self.name.clone())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_polynomial_unchecked(self.n, self.k, self.poly.scale(c))
            .with_name(self.name.clone())
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let r = norm(v);
    v.iter_mut().for_each(|x| *x /= r);
}

/// Thresholds relative to `‖p‖∞` on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationTolerances {
    pub zero_rel: f64,
    pub gradient_rel: f64,
    /// Replaces the derived smooth window when set.
    pub epsilon_override: Option<f64>,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        Self {
            zero_rel: 1e-9,
            gradient_rel: 1e-6,
            epsilon_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolValidation {
    pub passes_h: bool,
    /// `None` when the characteristic set is empty.
    pub min_tangential_gradient_norm: Option<f64>,
    pub characteristic_samples: Vec<Vec<f64>>,
    pub empty_characteristic_set: bool,
    /// Radius of the certified window `K_ε` used downstream.
    pub epsilon_window: f64,
    /// Largest level on which the tangential gradient stays above half its minimum.
    pub epsilon_max: f64,
    pub sup_norm: f64,
    /// Largest tangential gradient seen on the grid; sizes quadrature levels.
    pub max_tangential_gradient_norm: f64,
    pub zero_tolerance: f64,
    pub gradient_tolerance: f64,
    pub grid_points: usize,
    pub seed: u64,
}

struct SphereGrid {
    dim: usize,
    shape: Vec<usize>,
    points: Vec<Vec<f64>>,
}

impl SphereGrid {
    /// Midpoint hyperspherical grid with about `budget` points, rotated by `rot`.
    fn new(n: usize, budget: usize, rot: &DMatrix<f64>) -> Self {
        let m = ((budget as f64 / 2.0).powf(1.0 / (n - 1) as f64).ceil() as usize).max(4);
        let mut shape = vec![m; n - 2];
        shape.push(2 * m);
        let total: usize = shape.iter().product();
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let idx = unflatten(flat, &shape);
            let mut x = Vec::with_capacity(n);
            let mut s = 1.0;
            for &i in &idx[..n - 2] {
                let phi = PI * (i as f64 + 0.5) / m as f64;
                x.push(s * phi.cos());
                s *= phi.sin();
            }
            let az = PI * (idx[n - 2] as f64 + 0.5) / m as f64;
            x.push(s * az.cos());
            x.push(s * az.sin());
            let v = rot * DVector::from_vec(x);
            points.push(v.iter().copied().collect());
        }
        Self {
            dim: n,
            shape,
            points,
        }
    }

    /// Index pairs of neighbouring points (azimuth wraps around).
    fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let last = self.dim - 2;
        for flat in 0..self.points.len() {
            let idx = unflatten(flat, &self.shape);
            for d in 0..self.shape.len() {
                let mut nb = idx.clone();
                if d == last {
                    nb[d] = (nb[d] + 1) % self.shape[d];
                } else if nb[d] + 1 < self.shape[d] {
                    nb[d] += 1;
                } else {
                    continue;
                }
                out.push((flat, flatten(&nb, &self.shape)));
            }
        }
        out
    }
}

fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for d in (0..shape.len()).rev() {
        idx[d] = flat % shape[d];
        flat /= shape[d];
    }
    idx
}

fn flatten(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &s)| acc * s + i)
}

fn seeded_rotation(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Root of `f` on the great-circle arc from `a` to `b`, assuming a sign change.
fn bisect_arc<F: Fn(&[f64]) -> f64>(f: &F, a: &[f64], b: &[f64]) -> Vec<f64> {
    let point = |t: f64| {
        let mut x: Vec<f64> = a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect();
        normalize(&mut x);
        x
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let flo = f(a);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let fm = f(&point(mid));
        if fm == 0.0 {
            return point(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    point(0.5 * (lo + hi))
}

/// Orthonormal basis of the tangent space at θ, as columns.
fn tangent_basis(theta: &[f64]) -> DMatrix<f64> {
    let n = theta.len();
    let t = DVector::from_column_slice(theta);
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| theta[i].abs().total_cmp(&theta[j].abs()));
    for &e in &order {
        if cols.len() == n - 1 {
            break;
        }
        let mut v = DVector::<f64>::zeros(n);
        v[e] = 1.0;
        v -= &t * t.dot(&v);
        for c in &cols {
            v -= c * c.dot(&v);
        }
        let nv = v.norm();
        if nv > 1e-8 {
            cols.push(v / nv);
        }
    }
    DMatrix::from_columns(&cols)
}

/// Levenberg–Marquardt descent of `|∇p(θ)|²` on the sphere.
fn minimize_gradient_norm(sym: &HomogeneousSymbol, start: &[f64]) -> (Vec<f64>, f64) {
    let n = sym.dim();
    let mut theta = start.to_vec();
    let mut g = DVector::from_vec(sym.gradient(&theta));
    let mut mu = 1e-3;
    for _ in 0..200 {
        let h = sym.hessian(&theta);
        let hm = DMatrix::from_fn(n, n, |i, j| h[i][j]);
        let tb = tangent_basis(&theta);
        let j = &hm * &tb;
        let jtj = j.transpose() * &j;
        let rhs = -(j.transpose() * &g);
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += mu * (1.0 + jtj[(d, d)]);
            }
            let Some(delta) = a.lu().solve(&rhs) else {
                mu *= 10.0;
                continue;
            };
            let step = &tb * delta;
            let mut cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            normalize(&mut cand);
            let gc = DVector::from_vec(sym.gradient(&cand));
            if gc.norm() < g.norm() {
                let done = (g.norm() - gc.norm()) <= 1e-15 * (1.0 + g.norm());
                theta = cand;
                g = gc;
                mu = (mu * 0.3).max(1e-12);
                improved = !done;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let gn = g.norm();
    (theta, gn)
}

/// Samples the characteristic set and checks that the gradient of `p` does not
/// vanish on it.
pub fn validate_h(
    sym: &HomogeneousSymbol,
    sample_budget: usize,
    tol: &ValidationTolerances,
    seed: u64,
) -> Result<SymbolValidation> {
    if sample_budget < 1000 {
        return Err(Error::Config(format!(
            "sample budget must be at least 1000, got {sample_budget}"
        )));
    }
    let n = sym.dim();
    let rot = seeded_rotation(n, seed);
    let grid = SphereGrid::new(n, sample_budget, &rot);
    let values: Vec<f64> = grid.points.iter().map(|x| sym.eval(x)).collect();
    let gnorms: Vec<f64> = grid
        .points
        .iter()
        .map(|x| sym.tangential_gradient_norm(x))
        .collect();
    let sup_norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero_tolerance = tol.zero_rel * sup_norm;
    let gradient_tolerance = tol.gradient_rel * sym.degree() as f64 * sup_norm;
    let edges = grid.edges();

    let p = |x: &[f64]| sym.eval(x);
    let mut roots: Vec<Vec<f64>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        if v.abs() <= zero_tolerance {
            roots.push(grid.points[i].clone());
        }
    }
    for &(a, b) in &edges {
        let (va, vb) = (values[a], values[b]);
        if va.abs() > zero_tolerance && vb.abs() > zero_tolerance && (va > 0.0) != (vb > 0.0) {
            roots.push(bisect_arc(&p, &grid.points[a], &grid.points[b]));
        }
    }

    // Global descent of |∇p|: any zero of ∇p on the sphere lies on the
    // characteristic set by the Euler identity.
    let mut seeds: Vec<usize> = (0..grid.points.len()).collect();
    seeds.sort_by(|&i, &j| gnorms[i].total_cmp(&gnorms[j]).then(i.cmp(&j)));
    let mut degenerate: Vec<Vec<f64>> = Vec::new();
    let mut min_global = f64::INFINITY;
    for &i in seeds.iter().take(24) {
        let (theta, gn) = minimize_gradient_norm(sym, &grid.points[i]);
        min_global = min_global.min(gn);
        if gn <= gradient_tolerance
            && !degenerate.iter().any(|d| dist(d, &theta) < 1e-6)
        {
            degenerate.push(theta);
        }
    }
    let empty = roots.is_empty() && degenerate.is_empty();
    let root_min = roots
        .iter()
        .map(|r| sym.tangential_gradient_norm(r))
        .fold(f64::INFINITY, f64::min);
    if !degenerate.is_empty() || root_min <= gradient_tolerance {
        for r in &roots {
            if sym.tangential_gradient_norm(r) <= gradient_tolerance
                && !degenerate.iter().any(|d| dist(d, r) < 1e-6)
            {
                degenerate.push(r.clone());
            }
        }
        degenerate.sort_by(|a, b| cmp_vec(a, b));
        return Err(Error::DegenerateSymbol {
            min_norm: min_global.min(root_min),
            tolerance: gradient_tolerance,
            directions: degenerate,
        });
    }

    let mut samples = dedup_points(roots);
    samples.sort_by(|a, b| cmp_vec(a, b));

    let (epsilon_max, min_norm) = if empty {
        let min_abs = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        (min_abs, None)
    } else {
        let half = 0.5 * root_min;
        let below = |x: &[f64]| sym.tangential_gradient_norm(x) - half;
        let mut eps = sup_norm;
        for (i, g) in gnorms.iter().enumerate() {
            if *g < half {
                eps = eps.min(values[i].abs());
            }
        }
        for &(a, b) in &edges {
            let (ga, gb) = (gnorms[a] - half, gnorms[b] - half);
            if (ga > 0.0) != (gb > 0.0) {
                let x = bisect_arc(&below, &grid.points[a], &grid.points[b]);
                eps = eps.min(sym.eval(&x).abs());
            }
        }
        (eps, Some(root_min))
    };
    let epsilon_window = tol.epsilon_override.unwrap_or(0.5 * epsilon_max);
    if !(epsilon_window > 0.0) {
        return Err(Error::Config(format!("invalid smooth window {epsilon_window}")));
    }
    Ok(SymbolValidation {
        passes_h: true,
        min_tangential_gradient_norm: min_norm,
        characteristic_samples: samples,
        empty_characteristic_set: empty,
        epsilon_window,
        epsilon_max,
        sup_norm,
        max_tangential_gradient_norm: gnorms.iter().copied().fold(0.0, f64::max),
        zero_tolerance,
        gradient_tolerance,
        grid_points: grid.points.len(),
        seed,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn cmp_vec(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let c = x.total_cmp(y);
        if c.is_ne() {
            return c;
        }
    }
    std::cmp::Ordering::Equal
}

fn dedup_points(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| cmp_vec(a, b));
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for p in pts {
        if !out.iter().rev().take(8).any(|q| dist(q, &p) < 1e-9) {
            out.push(p);
        }
    }
    out
}

/// `ξ₁² + ξ₂² − ξ₃²`.
pub fn wave_symbol() -> HomogeneousSymbol {
    HomogeneousSymbol::new(
        3,
        2,
        vec![(vec![2, 0, 0], 1.0), (vec![0, 2, 0], 1.0), (vec![0, 0, 2], -1.0)],
    )
    .unwrap()
    .with_name(Some("wave".into()))
}

/// `ξ₁ξ₂` on `ℝ²`.
pub fn hyperbolic_symbol() -> HomogeneousSymbol {
    HomogeneousSymbol::new(2, 2, vec![(vec![1, 1], 1.0)])
        .unwrap()
        .with_name(Some("xi1xi2".into()))
}

/// `ξ₃(ξ₁² + ξ₂² + ξ₃²)`.
pub fn cubic_symbol() -> HomogeneousSymbol {
    HomogeneousSymbol::new(
        3,
        3,
        vec![(vec![2, 0, 1], 1.0), (vec![0, 2, 1], 1.0), (vec![0, 0, 3], 1.0)],
    )
    .unwrap()
    .with_name(Some("xi3_norm2".into()))
}

/// `ξ₁⁴ − ξ₂⁴`; its characteristic set carries a nonzero principal value.
pub fn quartic_symbol() -> HomogeneousSymbol {
    HomogeneousSymbol::new(2, 4, vec![(vec![4, 0], 1.0), (vec![0, 4], -1.0)])
        .unwrap()
        .with_name(Some("xi1^4-xi2^4".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn tol() -> ValidationTolerances {
        ValidationTolerances::default()
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(wave_symbol().eval(&[1.0, 1.0, 1.0]), 1.0);
        assert_eq!(hyperbolic_symbol().eval(&[2.0, 3.0]), 6.0);
        assert_eq!(cubic_symbol().eval(&[0.0, 0.0, 2.0]), 8.0);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(wave_symbol().gradient(&[0.0, 0.0, 1.0]), vec![0.0, 0.0, -2.0]);
        assert_eq!(hyperbolic_symbol().gradient(&[0.3, -1.7]), vec![-1.7, 0.3]);
    }

    #[test]
    fn loader_rejects_inhomogeneous_monomials() {
        let bad = r#"{"n":2,"k":2,"monomials":[{"alpha":[1,1],"coeff":1.0},{"alpha":[1,0],"coeff":2.0}]}"#;
        assert!(matches!(HomogeneousSymbol::from_json(bad), Err(Error::InvalidSymbol(_))));
        let zero = r#"{"n":2,"k":2,"monomials":[{"alpha":[1,1],"coeff":0.0}]}"#;
        assert!(HomogeneousSymbol::from_json(zero).is_err());
        let short = r#"{"n":3,"k":2,"monomials":[{"alpha":[1,1],"coeff":1.0}]}"#;
        assert!(matches!(
            HomogeneousSymbol::from_json(short),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(matches!(HomogeneousSymbol::new(2, 0, vec![(vec![0, 0], 1.0)]), Err(Error::DegreeError)));
    }

    #[test]
    fn json_roundtrip() {
        let s = cubic_symbol();
        let text = serde_json::to_string(&s.to_file()).unwrap();
        let back = HomogeneousSymbol::from_json(&text).unwrap();
        assert_eq!(back.polynomial(), s.polynomial());
        assert_eq!(back.name(), Some("xi3_norm2"));
    }

    #[test]
    fn wave_passes_with_expected_window() {
        let v = validate_h(&wave_symbol(), 20_000, &tol(), 7).unwrap();
        assert!(v.passes_h);
        assert!(!v.empty_characteristic_set);
        assert_relative_eq!(v.min_tangential_gradient_norm.unwrap(), 2.0, max_relative = 1e-9);
        assert_relative_eq!(v.epsilon_max, 0.75f64.sqrt(), max_relative = 1e-6);
        for s in &v.characteristic_samples {
            assert!((norm(s) - 1.0).abs() < 1e-12);
            assert!(wave_symbol().eval(s).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_and_hyperbolic_windows() {
        let v = validate_h(&cubic_symbol(), 20_000, &tol(), 7).unwrap();
        assert_relative_eq!(v.min_tangential_gradient_norm.unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(v.epsilon_max, 0.75f64.sqrt(), max_relative = 1e-6);
        let v = validate_h(&hyperbolic_symbol(), 4_000, &tol(), 7).unwrap();
        assert_relative_eq!(v.epsilon_max, 0.75f64.sqrt() / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn hyperbolic_characteristic_points_are_axes() {
        let v = validate_h(&hyperbolic_symbol(), 2_000, &tol(), 3).unwrap();
        assert_eq!(v.characteristic_samples.len(), 4);
        for s in &v.characteristic_samples {
            let on_axis = (s[0].abs() - 1.0).abs() < 1e-12 && s[1].abs() < 1e-12
                || (s[1].abs() - 1.0).abs() < 1e-12 && s[0].abs() < 1e-12;
            assert!(on_axis, "{s:?}");
        }
    }

    #[test]
    fn triple_product_is_degenerate() {
        let p = HomogeneousSymbol::new(3, 3, vec![(vec![1, 1, 1], 1.0)]).unwrap();
        match validate_h(&p, 5_000, &tol(), 7) {
            Err(Error::DegenerateSymbol { min_norm, directions, .. }) => {
                assert!(min_norm < 1e-8);
                assert!(!directions.is_empty());
                for d in &directions {
                    assert!(p.gradient(d).iter().all(|g| g.abs() < 1e-6));
                }
            }
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn definite_symbol_flags_empty_set() {
        let p = HomogeneousSymbol::new(2, 2, vec![(vec![2, 0], 1.0), (vec![0, 2], 1.0)]).unwrap();
        let v = validate_h(&p, 2_000, &tol(), 7).unwrap();
        assert!(v.passes_h && v.empty_characteristic_set);
        assert!(v.characteristic_samples.is_empty());
        assert!(v.min_tangential_gradient_norm.is_none());
    }

    #[test]
    fn epsilon_override() {
        let t = ValidationTolerances {
            epsilon_override: Some(0.1),
            ..tol()
        };
        assert_eq!(validate_h(&wave_symbol(), 2_000, &t, 7).unwrap().epsilon_window, 0.1);
    }

    #[test]
    fn budget_floor() {
        assert!(validate_h(&wave_symbol(), 10, &tol(), 7).is_err());
    }

    fn rotation3(a: f64, b: f64, c: f64) -> Vec<Vec<f64>> {
        let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
        let rx = |t: f64| [[1.0, 0.0, 0.0], [0.0, t.cos(), -t.sin()], [0.0, t.sin(), t.cos()]];
        let mul = |x: [[f64; 3]; 3], y: [[f64; 3]; 3]| {
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = (0..3).map(|l| x[i][l] * y[l][j]).sum();
                }
            }
            m
        };
        mul(mul(rz(a), rx(b)), rz(c)).iter().map(|r| r.to_vec()).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn euler_identity(x in prop::collection::vec(-3.0f64..3.0, 3)) {
            for s in [wave_symbol(), cubic_symbol()] {
                let g = s.gradient(&x);
                let lhs: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
                let rhs = s.degree() as f64 * s.eval(&x);
                prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn homogeneity(x in prop::collection::vec(-2.0f64..2.0, 3), lambda in 0.05f64..20.0) {
            for s in [wave_symbol(), cubic_symbol()] {
                let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                let a = s.eval(&y);
                let b = lambda.powi(s.degree() as i32) * s.eval(&x);
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn validation_is_scale_stable(c in 1e-4f64..1e4) {
            for s in [wave_symbol(), cubic_symbol(), hyperbolic_symbol()] {
                let v = validate_h(&s.scaled(c), 2_000, &tol(), 11);
                prop_assert!(v.map(|v| v.passes_h).unwrap_or(false));
            }
            let deg = HomogeneousSymbol::new(3, 3, vec![(vec![1, 1, 1], c)]).unwrap();
            let is_degenerate = matches!(validate_h(&deg, 2_000, &tol(), 11), Err(Error::DegenerateSymbol { .. }));
            prop_assert!(is_degenerate);
        }

        #[test]
        fn validation_is_rotation_stable(a in 0.0f64..6.3, b in 0.0f64..3.1, c in 0.0f64..6.3) {
            let r = rotation3(a, b, c);
            for s in [wave_symbol(), cubic_symbol()] {
                let v = validate_h(&s.composed(&r), 3_000, &tol(), 5).unwrap();
                prop_assert!(v.passes_h);
            }
            let deg = HomogeneousSymbol::new(3, 3, vec![(vec![1, 1, 1], 1.0)]).unwrap().composed(&r);
            let is_degenerate = matches!(validate_h(&deg, 3_000, &tol(), 5), Err(Error::DegenerateSymbol { .. }));
            prop_assert!(is_degenerate);
        }
    }
}
