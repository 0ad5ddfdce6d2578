//! Polar Gelfand–Leray transform `𝔏(h)(u)` on the unit sphere.
//!
//! Everything here is linear in the point values of `h`, so the estimators are
//! built once as a [`LerayOperator`] (points plus coefficient maps) and applied
//! to many weights `h` afterwards.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, SphereQuadrature};
use crate::symbol::{HomogeneousSymbol, SymbolValidation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    MollifiedDelta,
    Cumulative,
    ExactN2,
    CurveTraceN3,
}

impl Estimator {
    pub fn tag(&self) -> &'static str {
        match self {
            Estimator::MollifiedDelta => "mollified-delta",
            Estimator::Cumulative => "cumulative",
            Estimator::ExactN2 => "exact-n2",
            Estimator::CurveTraceN3 => "curve-trace-n3",
        }
    }

    /// Exact roots for `n = 2`, mollified delta otherwise.
    pub fn default_for(n: usize) -> Self {
        if n == 2 {
            Estimator::ExactN2
        } else {
            Estimator::MollifiedDelta
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LerayConfig {
    /// Mollifier width; `ε/8` when unset.
    pub eta: Option<f64>,
    pub fit_degree: usize,
    pub fit_points: usize,
    pub grid_points: usize,
    pub estimator: Option<Estimator>,
    /// Azimuthal slices of the curve tracer.
    pub trace_slices: usize,
}

impl Default for LerayConfig {
    fn default() -> Self {
        Self {
            eta: None,
            fit_degree: 8,
            fit_points: 36,
            grid_points: 512,
            estimator: None,
            trace_slices: 720,
        }
    }
}

/// Quadrature level resolving the mollifier `η/2` along the steepest level
/// sets: `⌈1.5π·G_max/(η/2)⌉`.
pub fn auto_level(max_tangential_gradient: f64, eta: f64) -> usize {
    ((1.5 * PI * max_tangential_gradient / (0.5 * eta)).ceil() as usize).max(16)
}

pub fn gaussian_mollifier(x: f64, eta: f64) -> f64 {
    (-0.5 * (x / eta).powi(2)).exp() / ((2.0 * PI).sqrt() * eta)
}

/// One Richardson step over `η` and `η/2`.
fn richardson_kernel(x: f64, eta: f64) -> f64 {
    (4.0 * gaussian_mollifier(x, 0.5 * eta) - gaussian_mollifier(x, eta)) / 3.0
}

/// `C^∞` transition, 0 at `s ≤ 0` and 1 at `s ≥ 1`.
pub fn smooth_transition(s: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        f(s) / (f(s) + f(1.0 - s))
    }
}

/// Window bump: 1 on `[-ε/2, ε/2]`, 0 outside `(-ε, ε)`.
pub fn window_bump(u: f64, eps: f64) -> f64 {
    1.0 - smooth_transition((u.abs() - 0.5 * eps) / (0.5 * eps))
}

/// Chebyshev points of the first kind on `[-ε, ε]`.
pub fn chebyshev_points(count: usize, eps: f64) -> Vec<f64> {
    (0..count)
        .map(|l| eps * (PI * (l as f64 + 0.5) / count as f64).cos())
        .rev()
        .collect()
}

/// Least-squares pseudo-inverse `(ΦᵀΦ)^{-1}Φᵀ` for the monomials `tᵈ`, `t = u/ε`.
fn fit_pseudo_inverse(nodes: &[f64], eps: f64, degree: usize) -> DMatrix<f64> {
    let phi = DMatrix::from_fn(nodes.len(), degree + 1, |l, d| (nodes[l] / eps).powi(d as i32));
    phi.svd(true, true)
        .pseudo_inverse(1e-14)
        .expect("svd of the fit matrix")
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(d, &x)| d as f64 * x).collect()
}

/// Mass spread of sorted atoms: atom `j` spreads uniformly over
/// `[b_{j-1}, b_j]` with `b_j` the midpoints between neighbours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    /// Distinct sorted positions.
    pub positions: Vec<f64>,
    pub masses: Vec<f64>,
    cells: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut positions: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut masses: Vec<f64> = Vec::with_capacity(atoms.len());
        for (p, m) in atoms {
            match positions.last() {
                Some(&q) if (p - q).abs() <= 1e-13 * (1.0 + q.abs()) => {
                    *masses.last_mut().unwrap() += m;
                }
                _ => {
                    positions.push(p);
                    masses.push(m);
                }
            }
        }
        let m = positions.len();
        let mut cells = Vec::with_capacity(m + 1);
        if m == 1 {
            cells.push(positions[0]);
            cells.push(positions[0]);
        } else if m > 1 {
            cells.push(positions[0] - 0.5 * (positions[1] - positions[0]));
            for j in 0..m - 1 {
                cells.push(0.5 * (positions[j] + positions[j + 1]));
            }
            cells.push(positions[m - 1] + 0.5 * (positions[m - 1] - positions[m - 2]));
        }
        Self {
            positions,
            masses,
            cells,
        }
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Midpoint-interpolated cumulative `A(u)`.
    pub fn cumulative(&self, u: f64) -> f64 {
        let j = self.cells.partition_point(|&b| b <= u);
        // atoms with cells[j'] <= u fully counted
        let mut acc: f64 = self.masses[..j.saturating_sub(1).min(self.masses.len())].iter().sum();
        if j >= 1 && j <= self.masses.len() {
            let (lo, hi) = (self.cells[j - 1], self.cells[j]);
            let frac = if hi > lo { ((u - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 1.0 };
            acc += self.masses[j - 1] * frac;
        }
        acc
    }

    /// Cumulative at many sorted abscissae in one pass.
    pub fn cumulative_sorted(&self, us: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(us.len());
        let mut j = 0;
        let mut acc = 0.0;
        for &u in us {
            while j < self.masses.len() && self.cells[j + 1] <= u {
                acc += self.masses[j];
                j += 1;
            }
            let mut v = acc;
            if j < self.masses.len() {
                let (lo, hi) = (self.cells[j], self.cells[j + 1]);
                if u > lo {
                    let frac = if hi > lo { ((u - lo) / (hi - lo)).min(1.0) } else { 1.0 };
                    v += self.masses[j] * frac;
                }
            }
            out.push(v);
        }
        out
    }

    /// `Σ m_j g(p_j)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.positions
            .iter()
            .zip(&self.masses)
            .map(|(&p, &m)| m * g(p))
            .sum()
    }
}

/// The transform `𝔏(h)` for one weight `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LerayProfile {
    pub estimator: Estimator,
    pub u_min: f64,
    pub u_max: f64,
    pub eps: f64,
    pub eta: Option<f64>,
    /// Coefficients of the window fit in `t = u/ε`.
    pub fit_coeffs: Vec<f64>,
    /// RMS misfit at the fit nodes, relative to the RMS value.
    pub fit_residual: f64,
    pub grid_u: Vec<f64>,
    pub grid_a: Vec<f64>,
    pub measure: AtomicMeasure,
}

impl LerayProfile {
    pub fn fit_value(&self, u: f64) -> Result<f64> {
        self.check_window(u)?;
        Ok(poly_eval(&self.fit_coeffs, u / self.eps))
    }

    fn check_window(&self, u: f64) -> Result<()> {
        if u.abs() > self.eps * (1.0 + 1e-12) {
            return Err(Error::OutsideSmoothWindow { u, eps: self.eps });
        }
        Ok(())
    }

    /// `𝔏^{(l)}(u)` from the window fit.
    pub fn deriv(&self, l: usize, u: f64) -> Result<f64> {
        self.check_window(u)?;
        let mut c = self.fit_coeffs.clone();
        for _ in 0..l {
            c = poly_derivative(&c);
        }
        Ok(poly_eval(&c, u / self.eps) / self.eps.powi(l as i32))
    }

    pub fn cumulative(&self, u: f64) -> f64 {
        self.measure.cumulative(u)
    }

    /// `∫𝔏 du`: fit inside the window, cumulative increments outside.
    pub fn coarea_integral(&self) -> f64 {
        let c = &self.fit_coeffs;
        let inside: f64 = c
            .iter()
            .enumerate()
            .filter(|(d, _)| d % 2 == 0)
            .map(|(d, &x)| 2.0 * x / (d as f64 + 1.0))
            .sum::<f64>()
            * self.eps;
        let total = self.measure.total();
        inside + self.cumulative(-self.eps) + (total - self.cumulative(self.eps))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.fit_coeffs.iter_mut().for_each(|c| *c *= alpha);
        out.grid_a.iter_mut().for_each(|a| *a *= alpha);
        out.measure.masses.iter_mut().for_each(|m| *m *= alpha);
        out
    }

    /// Builds a profile from a closed-form density on `[a, b]`.
    pub fn from_density<F: Fn(f64) -> f64>(density: F, a: f64, b: f64, eps: f64, cfg: &LerayConfig) -> Self {
        let nodes = chebyshev_points(cfg.fit_points, eps);
        let pinv = fit_pseudo_inverse(&nodes, eps, cfg.fit_degree);
        let y: Vec<f64> = nodes.iter().map(|&u| density(u)).collect();
        let fit_coeffs: Vec<f64> = (0..=cfg.fit_degree)
            .map(|d| (0..nodes.len()).map(|l| pinv[(d, l)] * y[l]).sum())
            .collect();
        let rule = gauss_legendre(16);
        let panels = 4000;
        let h = (b - a) / panels as f64;
        let mut atoms = Vec::with_capacity(panels * 16);
        for j in 0..panels {
            let m = rule.mapped(a + j as f64 * h, a + (j + 1) as f64 * h);
            for (x, w) in m.nodes.iter().zip(&m.weights) {
                atoms.push((*x, w * density(*x)));
            }
        }
        let measure = AtomicMeasure::new(atoms);
        let grid_u = uniform_grid(a, b, cfg.grid_points);
        let grid_a = measure.cumulative_sorted(&grid_u);
        let fit_residual = residual(&nodes, &y, &fit_coeffs, eps);
        Self {
            estimator: Estimator::Cumulative,
            u_min: a,
            u_max: b,
            eps,
            eta: None,
            fit_coeffs,
            fit_residual,
            grid_u,
            grid_a,
            measure,
        }
    }

    /// CSV with columns `u, A(u), L_fit(u)`; the fit column is blank outside the window.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# estimator: {}", self.estimator.tag());
        let _ = writeln!(s, "# eps: {:.17e}", self.eps);
        s.push_str("u,A,L_fit\n");
        for (u, a) in self.grid_u.iter().zip(&self.grid_a) {
            match self.fit_value(*u) {
                Ok(v) => {
                    let _ = writeln!(s, "{u:.12e},{a:.12e},{v:.12e}");
                }
                Err(_) => {
                    let _ = writeln!(s, "{u:.12e},{a:.12e},");
                }
            }
        }
        s
    }
}

fn uniform_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

fn residual(nodes: &[f64], y: &[f64], c: &[f64], eps: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (u, v) in nodes.iter().zip(y) {
        let e = poly_eval(c, u / eps) - v;
        num += e * e;
        den += v * v;
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

/// Linear map from point values of `h` to a [`LerayProfile`].
#[derive(Debug, Clone)]
pub struct LerayOperator {
    pub dim: usize,
    pub eps: f64,
    pub eta: Option<f64>,
    pub estimator: Estimator,
    pub fit_degree: usize,
    pub grid_points: usize,
    pub u_min: f64,
    pub u_max: f64,
    /// Row-major `len × dim` unit vectors: quadrature nodes, then auxiliary points.
    points: Vec<f64>,
    p_values: Vec<f64>,
    /// Sphere weights; zero on auxiliary points.
    node_weights: Vec<f64>,
    /// Row-major `(degree + 1) × len`.
    fit_map: Vec<f64>,
    fit_nodes: Vec<f64>,
    /// Sparse rows `y_l = Σ value_rows[l] · h` for the fit nodes.
    value_rows: Vec<Vec<(usize, f64)>>,
}

impl LerayOperator {
    pub fn new(
        sym: &HomogeneousSymbol,
        quad: &SphereQuadrature,
        val: &SymbolValidation,
        cfg: &LerayConfig,
    ) -> Result<Self> {
        if !val.passes_h {
            return Err(Error::HypothesisViolated);
        }
        if quad.dim != sym.dim() {
            return Err(Error::DimensionMismatch {
                expected: sym.dim(),
                got: quad.dim,
            });
        }
        let n = sym.dim();
        let eps = val.epsilon_window;
        let estimator = cfg.estimator.unwrap_or(Estimator::default_for(n));
        let eta = match estimator {
            Estimator::MollifiedDelta => {
                let eta = cfg.eta.unwrap_or(eps / 8.0);
                if eta > eps / 4.0 {
                    return Err(Error::MollifierTooWide {
                        eta,
                        limit: eps / 4.0,
                    });
                }
                Some(eta)
            }
            _ => None,
        };
        if estimator == Estimator::ExactN2 && n != 2 {
            return Err(Error::Config("exact estimator requires n = 2".into()));
        }
        if estimator == Estimator::CurveTraceN3 && n != 3 {
            return Err(Error::Config("curve tracer requires n = 3".into()));
        }

        let mut points = quad.points.clone();
        let mut p_values: Vec<f64> = (0..quad.len()).map(|i| sym.eval(quad.point(i))).collect();
        let mut node_weights = quad.weights.clone();
        let fit_nodes = chebyshev_points(cfg.fit_points, eps);
        let u_min = p_values.iter().copied().fold(f64::INFINITY, f64::min);
        let u_max = p_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let mut value_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); fit_nodes.len()];
        match estimator {
            Estimator::MollifiedDelta => {
                let eta = eta.unwrap();
                let reach = 12.0 * eta;
                for i in 0..quad.len() {
                    let p = p_values[i];
                    for (l, &u) in fit_nodes.iter().enumerate() {
                        if (p - u).abs() < reach {
                            value_rows[l].push((i, node_weights[i] * richardson_kernel(p - u, eta)));
                        }
                    }
                }
            }
            Estimator::Cumulative => {
                value_rows = cumulative_rows(&p_values, &node_weights, &fit_nodes, eps, cfg.fit_degree);
            }
            Estimator::ExactN2 => {
                for (l, &u) in fit_nodes.iter().enumerate() {
                    for (theta, w) in circle_level_points(sym, u) {
                        let idx = p_values.len();
                        points.extend_from_slice(&theta);
                        p_values.push(u);
                        node_weights.push(0.0);
                        value_rows[l].push((idx, w));
                    }
                }
            }
            Estimator::CurveTraceN3 => {
                for (l, &u) in fit_nodes.iter().enumerate() {
                    for (theta, w) in meridian_level_points(sym, u, cfg.trace_slices) {
                        let idx = p_values.len();
                        points.extend_from_slice(&theta);
                        p_values.push(u);
                        node_weights.push(0.0);
                        value_rows[l].push((idx, w));
                    }
                }
            }
        }

        let pinv = fit_pseudo_inverse(&fit_nodes, eps, cfg.fit_degree);
        let len = p_values.len();
        let mut fit_map = vec![0.0; (cfg.fit_degree + 1) * len];
        for (l, row) in value_rows.iter().enumerate() {
            for &(i, v) in row {
                for d in 0..=cfg.fit_degree {
                    fit_map[d * len + i] += pinv[(d, l)] * v;
                }
            }
        }
        Ok(Self {
            dim: n,
            eps,
            eta,
            estimator,
            fit_degree: cfg.fit_degree,
            grid_points: cfg.grid_points,
            u_min,
            u_max,
            points,
            p_values,
            node_weights,
            fit_map,
            fit_nodes,
            value_rows,
        })
    }

    pub fn len(&self) -> usize {
        self.p_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p_values.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn p_value(&self, i: usize) -> f64 {
        self.p_values[i]
    }

    pub fn node_weight(&self, i: usize) -> f64 {
        self.node_weights[i]
    }

    /// `∂c_d/∂h_i`.
    pub fn fit_weight(&self, d: usize, i: usize) -> f64 {
        self.fit_map[d * self.len() + i]
    }

    pub fn fit_nodes(&self) -> &[f64] {
        &self.fit_nodes
    }

    pub fn sample<F: Fn(&[f64]) -> f64>(&self, h: F) -> Vec<f64> {
        (0..self.len()).map(|i| h(self.point(i))).collect()
    }

    pub fn apply(&self, h: &[f64]) -> Result<LerayProfile> {
        assert_eq!(h.len(), self.len());
        let len = self.len();
        let fit_coeffs: Vec<f64> = (0..=self.fit_degree)
            .map(|d| (0..len).map(|i| self.fit_map[d * len + i] * h[i]).sum())
            .collect();
        if fit_coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonfiniteProfile);
        }
        let y: Vec<f64> = self
            .value_rows
            .iter()
            .map(|row| row.iter().map(|&(i, v)| v * h[i]).sum())
            .collect();
        let fit_residual = if self.estimator == Estimator::Cumulative {
            0.0
        } else {
            residual(&self.fit_nodes, &y, &fit_coeffs, self.eps)
        };
        let atoms: Vec<(f64, f64)> = (0..len)
            .filter(|&i| self.node_weights[i] != 0.0)
            .map(|i| (self.p_values[i], self.node_weights[i] * h[i]))
            .collect();
        if atoms.iter().any(|a| !a.1.is_finite()) {
            return Err(Error::NonfiniteProfile);
        }
        let measure = AtomicMeasure::new(atoms);
        let grid_u = uniform_grid(self.u_min, self.u_max, self.grid_points);
        let grid_a = measure.cumulative_sorted(&grid_u);
        Ok(LerayProfile {
            estimator: self.estimator,
            u_min: self.u_min,
            u_max: self.u_max,
            eps: self.eps,
            eta: self.eta,
            fit_coeffs,
            fit_residual,
            grid_u,
            grid_a,
            measure,
        })
    }

    /// Plain mollified sum `Σ w_j h_j φ_η(p_j − u)` at any `u`.
    pub fn mollified_value(&self, h: &[f64], u: f64, eta: f64) -> f64 {
        (0..self.len())
            .filter(|&i| self.node_weights[i] != 0.0)
            .map(|i| self.node_weights[i] * h[i] * gaussian_mollifier(self.p_values[i] - u, eta))
            .sum()
    }
}

/// Rows mapping atom masses to the derivative of a degree `d+1` fit of the
/// midpoint-interpolated cumulative, sampled at the fit nodes.
fn cumulative_rows(
    p_values: &[f64],
    weights: &[f64],
    fit_nodes: &[f64],
    eps: f64,
    degree: usize,
) -> Vec<Vec<(usize, f64)>> {
    let mut order: Vec<usize> = (0..p_values.len()).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    // group equal values
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for &i in &order {
        let p = p_values[i];
        match groups.last_mut() {
            Some((q, members)) if (p - *q).abs() <= 1e-13 * (1.0 + q.abs()) => members.push(i),
            _ => groups.push((p, vec![i])),
        }
    }
    let m = groups.len();
    let pos: Vec<f64> = groups.iter().map(|g| g.0).collect();
    let mut cells = Vec::with_capacity(m + 1);
    cells.push(pos[0] - 0.5 * (pos[1] - pos[0]));
    for j in 0..m - 1 {
        cells.push(0.5 * (pos[j] + pos[j + 1]));
    }
    cells.push(pos[m - 1] + 0.5 * (pos[m - 1] - pos[m - 2]));

    let samples = chebyshev_points(8 * fit_nodes.len(), eps);
    let pinv = fit_pseudo_inverse(&samples, eps, degree + 1);
    // c_A = pinv · A(samples); derivative coefficients in t, divided by ε
    // then evaluated at the fit nodes give the estimator values.
    let deriv_at_nodes: Vec<Vec<f64>> = fit_nodes
        .iter()
        .map(|&u| {
            let t = u / eps;
            (0..samples.len())
                .map(|q| {
                    (1..=degree + 1)
                        .map(|d| pinv[(d, q)] * d as f64 * t.powi(d as i32 - 1))
                        .sum::<f64>()
                        / eps
                })
                .collect()
        })
        .collect();
    // A(s_q) = Σ_j m_j frac_j(s_q); only groups overlapping the window vary
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); fit_nodes.len()];
    let lo = cells.partition_point(|&b| b < -eps) .saturating_sub(1);
    for j in lo..m {
        if cells[j] > eps {
            break;
        }
        let (a, b) = (cells[j], cells[j + 1]);
        let fracs: Vec<f64> = samples
            .iter()
            .map(|&s| if b > a { ((s - a) / (b - a)).clamp(0.0, 1.0) } else { (s >= a) as u8 as f64 })
            .collect();
        for (l, d) in deriv_at_nodes.iter().enumerate() {
            let coef: f64 = d.iter().zip(&fracs).map(|(x, f)| x * f).sum();
            if coef != 0.0 {
                for &i in &groups[j].1 {
                    rows[l].push((i, coef * weights[i]));
                }
            }
        }
    }
    rows
}

/// Points of `{θ ∈ S¹ : p(θ) = u}` with weights `1/|∂_t p|`.
pub fn circle_level_points(sym: &HomogeneousSymbol, u: f64) -> Vec<(Vec<f64>, f64)> {
    let steps = 4096;
    let g = |t: f64| sym.eval(&[t.cos(), t.sin()]) - u;
    let mut out = Vec::new();
    let h = 2.0 * PI / steps as f64;
    let offset = 0.5 * h * (2f64.sqrt() - 1.0);
    let mut t0 = offset;
    let mut g0 = g(t0);
    for j in 1..=steps {
        let t1 = offset + j as f64 * h;
        let g1 = g(t1);
        if (g0 > 0.0) != (g1 > 0.0) {
            let t = bisect(&g, t0, t1, g0);
            let theta = vec![t.cos(), t.sin()];
            let grad = sym.gradient(&theta);
            let dt = -grad[0] * theta[1] + grad[1] * theta[0];
            out.push((theta, 1.0 / dt.abs()));
        }
        t0 = t1;
        g0 = g1;
    }
    out
}

/// Level points on meridians `φ_j`, weighted by `(2π/M)·sinϑ/|∂_ϑ p|`.
pub fn meridian_level_points(sym: &HomogeneousSymbol, u: f64, slices: usize) -> Vec<(Vec<f64>, f64)> {
    let steps = 2048;
    let mut out = Vec::new();
    for j in 0..slices {
        let phi = 2.0 * PI * (j as f64 + 0.5) / slices as f64;
        let (cp, sp) = (phi.cos(), phi.sin());
        let pt = |v: f64| [v.sin() * cp, v.sin() * sp, v.cos()];
        let g = |v: f64| sym.eval(&pt(v)) - u;
        let h = PI / steps as f64;
        let mut v0 = 0.0;
        let mut g0 = g(v0);
        for s in 1..=steps {
            let v1 = s as f64 * h;
            let g1 = g(v1);
            if (g0 > 0.0) != (g1 > 0.0) {
                let v = bisect(&g, v0, v1, g0);
                let theta = pt(v);
                let grad = sym.gradient(&theta);
                let dv = grad[0] * v.cos() * cp + grad[1] * v.cos() * sp - grad[2] * v.sin();
                out.push((theta.to_vec(), 2.0 * PI / slices as f64 * v.sin() / dv.abs()));
            }
            v0 = v1;
            g0 = g1;
        }
    }
    out
}

fn bisect<F: Fn(f64) -> f64>(g: &F, mut a: f64, mut b: f64, ga: f64) -> f64 {
    let sa = ga > 0.0;
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == sa {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-16 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Builds the operator and applies it to `h`.
pub fn leray_transform<F: Fn(&[f64]) -> f64>(
    sym: &HomogeneousSymbol,
    h: F,
    quad: &SphereQuadrature,
    val: &SymbolValidation,
    cfg: &LerayConfig,
) -> Result<LerayProfile> {
    let op = LerayOperator::new(sym, quad, val, cfg)?;
    let values = op.sample(h);
    op.apply(&values)
}

/// `𝔏^{(l)}(u)` for `l ∈ {1, 2}`.
pub fn leray_deriv(profile: &LerayProfile, l: usize, u: f64) -> Result<f64> {
    if !(1..=2).contains(&l) {
        return Err(Error::Config(format!("derivative order {l} not in {{1, 2}}")));
    }
    profile.deriv(l, u)
}
