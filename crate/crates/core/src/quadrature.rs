//! One-dimensional Gauss rules and tensor-product rules on `S^{n-1}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{gamma, sphere_area};

/// Largest dimension supported by the tensor sphere rules.
pub const DIMENSION_CAP: usize = 6;

/// Nodes and weights of a one-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine map of a rule on `[-1, 1]` to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> GaussRule {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        GaussRule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Legendre on `[-1, 1]` by Newton iteration on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Golub–Welsch from the Jacobi matrix of a monic recurrence
/// `p_{j+1} = (x - a_j) p_j - b_j p_{j-1}` and total mass `mu0`.
fn golub_welsch(diag: &[f64], offdiag_sq: &[f64], mu0: f64) -> GaussRule {
    let n = diag.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            let b = offdiag_sq[i].sqrt();
            j[(i, i + 1)] = b;
            j[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Gauss–Jacobi for the weight `(1-x)^α (1+x)^β` on `[-1, 1]`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> GaussRule {
    assert!(n > 0 && alpha > -1.0 && beta > -1.0);
    if alpha == 0.0 && beta == 0.0 {
        return gauss_legendre(n);
    }
    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        let a = if denom.abs() < 1e-300 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / denom
        };
        diag.push(a);
        if k + 1 < n {
            let k1 = kf + 1.0;
            let num = 4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab);
            let s = 2.0 * k1 + ab;
            off.push(num / (s * s * (s + 1.0) * (s - 1.0)));
        }
    }
    let mu0 = 2f64.powf(ab + 1.0) * gamma(alpha + 1.0) * gamma(beta + 1.0) / gamma(ab + 2.0);
    golub_welsch(&diag, &off, mu0)
}

/// Gauss–Hermite for the weight `e^{-x²}` on the real line.
pub fn gauss_hermite(n: usize) -> GaussRule {
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| k as f64 / 2.0).collect();
    golub_welsch(&diag, &off, PI.sqrt())
}

/// Composite Gauss–Legendre on a list of breakpoints.
pub fn composite(breaks: &[f64], points_per_panel: usize) -> GaussRule {
    let base = gauss_legendre(points_per_panel);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let m = base.mapped(w[0], w[1]);
            nodes.extend(m.nodes);
            weights.extend(m.weights);
        }
    }
    GaussRule { nodes, weights }
}

/// Panels `[a·q^{m+1}, a·q^m]` for `m = 0..panels`, ordered towards zero, with
/// the innermost left edge returned separately.
pub fn geometric_breaks(a: f64, ratio: f64, panels: usize) -> (Vec<f64>, f64) {
    let mut breaks: Vec<f64> = (0..=panels).map(|m| a * ratio.powi(m as i32)).collect();
    breaks.reverse();
    let inner = breaks[0];
    (breaks, inner)
}

/// Product rule on the unit sphere `S^{n-1}` in hyperspherical angles.
///
/// `n = 2` uses the trapezoid rule with `2L` nodes. For `n ≥ 3` the polar
/// angles carry Gauss–Jacobi rules for their `sin^m` weights (in `cos φ`) and
/// the azimuth the trapezoid rule with `2L` nodes, so the rule integrates
/// polynomials of degree `2L - 1` exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereQuadrature {
    pub dim: usize,
    pub level: usize,
    /// Row-major `len × dim` unit vectors.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.level - 1
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * f(self.point(i))).sum()
    }
}

pub fn build_quadrature(n: usize, level: usize) -> Result<SphereQuadrature> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n, DIMENSION_CAP));
    }
    if n > DIMENSION_CAP {
        return Err(Error::UnsupportedDimension(n, DIMENSION_CAP));
    }
    if level == 0 {
        return Err(Error::Config("quadrature level must be positive".into()));
    }
    let naz = 2 * level;
    let az: Vec<f64> = (0..naz).map(|j| PI * j as f64 / level as f64).collect();
    let waz = PI / level as f64;

    // polar rules, outermost first: sin^{n-2}, ..., sin^1
    let polar: Vec<GaussRule> = (1..=n - 2)
        .map(|j| {
            let m = (n - 1 - j) as f64;
            let a = 0.5 * (m - 1.0);
            gauss_jacobi(level, a, a)
        })
        .collect();

    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; n - 2];
    loop {
        let mut w_polar = 1.0;
        let mut coords = Vec::with_capacity(n);
        let mut sin_prod = 1.0;
        for (j, rule) in polar.iter().enumerate() {
            let t = rule.nodes[idx[j]];
            w_polar *= rule.weights[idx[j]];
            coords.push(sin_prod * t);
            sin_prod *= (1.0 - t * t).max(0.0).sqrt();
        }
        for &phi in &az {
            points.extend_from_slice(&coords);
            points.push(sin_prod * phi.cos());
            points.push(sin_prod * phi.sin());
            weights.push(w_polar * waz);
        }
        // odometer over polar indices
        let mut carry = true;
        for d in (0..idx.len()).rev() {
            if !carry {
                break;
            }
            idx[d] += 1;
            if idx[d] == level {
                idx[d] = 0;
            } else {
                carry = false;
            }
        }
        if carry {
            break;
        }
    }
    Ok(SphereQuadrature {
        dim: n,
        level,
        points,
        weights,
    })
}

/// `∫_{S^{n-1}} θ^α dθ` in closed form.
pub fn sphere_monomial_integral(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let n = alpha.len() as f64;
    let total: f64 = alpha.iter().map(|&a| a as f64).sum();
    let num: f64 = alpha.iter().map(|&a| gamma((a as f64 + 1.0) / 2.0)).product();
    2.0 * num / gamma((total + n) / 2.0)
}

/// `|S^{n-1}|`, re-exported for quadrature checks.
pub fn sphere_measure(n: usize) -> f64 {
    sphere_area(n)
}
