//! Radial functionals of a bracket scan `F(r)`: boundary derivatives of
//! `r^{k+n-1}F` at 0 and `∫ log r ∂^{2k}(r^{k+n-1}F) dr`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leray::LerayOperator;
use crate::pairing::scan;
use crate::quadrature::{composite, gauss_legendre};
use crate::special::{binomial, factorial, falling};
use crate::testfn::SpectralTestFunction;

/// Decades of geometric grading below the scale radius.
pub const GRADED_DECADES: usize = 6;
pub const PANELS_PER_DECADE: usize = 16;
/// `|f̂|` at the truncation radius is below `10^{-TAIL_DIGITS}` squared.
pub const TAIL_DIGITS: f64 = 14.0;
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

/// `R = (σ²/2)^{-1/2} √(2·14·ln 10)`.
pub fn truncation_radius(sigma: f64) -> f64 {
    (2.0 * TAIL_DIGITS * std::f64::consts::LN_10).sqrt() / (0.5 * sigma * sigma).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBudget {
    pub panels_per_decade: usize,
    pub decades: usize,
    pub graded_order: usize,
    /// Uniform panel width in units of the scale radius.
    pub panel_width: f64,
    pub uniform_order: usize,
}

impl Default for GridBudget {
    fn default() -> Self {
        Self {
            panels_per_decade: PANELS_PER_DECADE,
            decades: GRADED_DECADES,
            graded_order: 4,
            panel_width: 0.25,
            uniform_order: 8,
        }
    }
}

impl GridBudget {
    pub fn scaled(&self, s: f64) -> Self {
        let up = |v: usize| ((v as f64 * s).round() as usize).max(1);
        Self {
            panels_per_decade: up(self.panels_per_decade),
            decades: self.decades,
            graded_order: self.graded_order,
            panel_width: self.panel_width / s,
            uniform_order: self.uniform_order,
        }
    }
}

/// Quadrature nodes on `(0, R]`: geometric panels on `[δ, a]`, uniform on `[a, R]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Below `delta` integrands are replaced by their value at 0.
    pub delta: f64,
    pub scale: f64,
    pub radius: f64,
}

impl RadialGrid {
    pub fn new(scale: f64, radius: f64, budget: &GridBudget) -> Result<Self> {
        if !(scale > 0.0) || !(radius > scale) {
            return Err(Error::NonPositiveScale(scale.min(radius - scale)));
        }
        let panels = budget.panels_per_decade * budget.decades;
        let delta = scale * 10f64.powi(-(budget.decades as i32));
        let geo: Vec<f64> = (0..=panels)
            .map(|i| delta * 10f64.powf(i as f64 / budget.panels_per_decade as f64))
            .collect();
        let g = composite(&geo, budget.graded_order);
        let count = ((radius - scale) / (budget.panel_width * scale)).ceil().max(1.0) as usize;
        let uni: Vec<f64> = (0..=count)
            .map(|i| scale + (radius - scale) * i as f64 / count as f64)
            .collect();
        let u = composite(&uni, budget.uniform_order);
        let mut nodes = g.nodes;
        nodes.extend(u.nodes);
        let mut weights = g.weights;
        weights.extend(u.weights);
        Ok(Self {
            nodes,
            weights,
            delta,
            scale,
            radius,
        })
    }

    pub fn for_sigma(sigma: f64, budget: &GridBudget) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::NonPositiveWidth(sigma));
        }
        Self::new(1.0 / sigma, truncation_radius(sigma), budget)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `F^{(m)}` on `{0} ∪ grid` for `m = 0..=max_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialScan {
    pub grid: RadialGrid,
    /// `derivs[m][0]` is at `r = 0`, `derivs[m][i+1]` at `grid.nodes[i]`.
    pub derivs: Vec<Vec<Complex64>>,
    pub tail_tolerance: f64,
}

impl RadialScan {
    pub fn from_operator(
        op: &LerayOperator,
        weights: &[f64],
        f: &SpectralTestFunction,
        grid: &RadialGrid,
        max_order: usize,
    ) -> Result<Self> {
        let mut radii = vec![0.0];
        radii.extend_from_slice(&grid.nodes);
        let out = scan(op, f, &[weights], 0..=max_order, &radii)?;
        Ok(Self {
            grid: grid.clone(),
            derivs: out.into_iter().next().unwrap(),
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        })
    }

    /// From a closed-form `F^{(m)}(r)`.
    pub fn from_fn<G: Fn(usize, f64) -> Complex64>(grid: &RadialGrid, max_order: usize, g: G) -> Self {
        let derivs = (0..=max_order)
            .map(|m| std::iter::once(0.0).chain(grid.nodes.iter().copied()).map(|r| g(m, r)).collect())
            .collect();
        Self {
            grid: grid.clone(),
            derivs,
            tail_tolerance: DEFAULT_TAIL_TOLERANCE,
        }
    }

    pub fn max_order(&self) -> usize {
        self.derivs.len() - 1
    }

    pub fn at_zero(&self, m: usize) -> Complex64 {
        self.derivs[m][0]
    }

    /// `F^{(m)}(0)/m!`.
    pub fn taylor(&self) -> Vec<Complex64> {
        (0..=self.max_order()).map(|m| self.at_zero(m) / factorial(m)).collect()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.derivs[0]
    }

    /// Radii aligned with `values()`.
    pub fn radii(&self) -> Vec<f64> {
        std::iter::once(0.0).chain(self.grid.nodes.iter().copied()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r");
        for m in 0..=self.max_order() {
            let _ = write!(s, ",F{m}_re,F{m}_im");
        }
        s.push('\n');
        for (i, r) in self.radii().iter().enumerate() {
            let _ = write!(s, "{r:.12e}");
            for m in 0..=self.max_order() {
                let v = self.derivs[m][i];
                let _ = write!(s, ",{:.12e},{:.12e}", v.re, v.im);
            }
            s.push('\n');
        }
        s
    }
}

/// `F^{(m)}(0) = ⟨log|u| ; 𝔏(q_m)⟩`, a single pairing of the degree-`m`
/// directional-derivative weight.
pub fn taylor_at_zero(op: &LerayOperator, weights: &[f64], f: &SpectralTestFunction, m: usize) -> Result<Complex64> {
    let out = scan(op, f, &[weights], m..=m, &[0.0])?;
    Ok(out[0][0][0])
}

/// `∂_r^{2k-1}(r^{k+n-1}F)|_{r=0} = C(2k-1,k+n-1)(k+n-1)! F^{(k-n)}(0)`, zero for `k < n`.
pub fn boundary_derivative(scan: &RadialScan, k: usize, n: usize) -> Result<Complex64> {
    if k < n {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let m = k - n;
    if m > scan.max_order() {
        return Err(Error::OrderCapExceeded {
            order: m,
            cap: scan.max_order(),
        });
    }
    let e = k + n - 1;
    Ok(scan.at_zero(m) * (binomial(2 * k - 1, e) * factorial(e)))
}

/// Leibniz terms of `∂^{2k}(r^{k+n-1}F)`: `(coefficient, power of r, order of F)`.
pub fn leibniz_terms(k: usize, n: usize) -> Result<Vec<(f64, i64, usize)>> {
    let e = k + n - 1;
    let mut out = Vec::new();
    for j in 0..=(2 * k).min(e) {
        let power = e as i64 - j as i64;
        if power < 0 {
            return Err(Error::NonintegrableAssembly(power));
        }
        out.push((binomial(2 * k, j) * falling(e, j), power, 2 * k - j));
    }
    Ok(out)
}

/// `∂^{2k}(r^{k+n-1}F)` at every scan radius (index 0 is `r = 0`).
pub fn leibniz_integrand(scan: &RadialScan, k: usize, n: usize) -> Result<Vec<Complex64>> {
    let terms = leibniz_terms(k, n)?;
    if 2 * k > scan.max_order() {
        return Err(Error::OrderCapExceeded {
            order: 2 * k,
            cap: scan.max_order(),
        });
    }
    Ok(scan
        .radii()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            terms
                .iter()
                .map(|&(c, p, m)| scan.derivs[m][i] * (c * r.powi(p as i32)))
                .sum()
        })
        .collect())
}

/// Neumaier-compensated complex sum.
fn compensated_sum(it: impl Iterator<Item = Complex64>) -> Complex64 {
    let (mut s, mut c) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for v in it {
        for (sp, cp, x) in [(&mut s.re, &mut c.re, v.re), (&mut s.im, &mut c.im, v.im)] {
            let t = *sp + x;
            if sp.abs() >= x.abs() {
                *cp += (*sp - t) + x;
            } else {
                *cp += (x - t) + *sp;
            }
            *sp = t;
        }
    }
    s + c
}

fn check_tail(values: &[Complex64], tol: f64) -> Result<()> {
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let last = values.last().map(|v| v.norm()).unwrap_or(0.0);
    if last > tol * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::TailNotCertified {
            value: last,
            tolerance: tol * peak,
        });
    }
    Ok(())
}

/// `∫_0^R log r ∂^{2k}(r^{k+n-1}F) dr`.
pub fn log_weighted_integral(scan: &RadialScan, k: usize, n: usize) -> Result<Complex64> {
    if k < n {
        return Err(Error::CaseMismatch(format!("log-weighted integral needs k >= n, got k={k}, n={n}")));
    }
    let g = leibniz_integrand(scan, k, n)?;
    check_tail(&g, scan.tail_tolerance)?;
    let d = scan.grid.delta;
    let head = g[0] * (d * (d.ln() - 1.0));
    let body = compensated_sum(
        scan.grid
            .nodes
            .iter()
            .zip(&scan.grid.weights)
            .zip(&g[1..])
            .map(|((r, w), v)| v * (w * r.ln())),
    );
    Ok(head + body)
}

/// `∫_0^R F(r) r^p dr` for `p ≥ 0`.
pub fn power_weighted_integral(scan: &RadialScan, p: i32) -> Result<Complex64> {
    if p < 0 {
        return Err(Error::NonintegrableAssembly(p as i64));
    }
    let vals = scan.values();
    let weighted: Vec<Complex64> = scan.radii().iter().zip(vals).map(|(r, v)| v * r.powi(p)).collect();
    check_tail(&weighted, scan.tail_tolerance)?;
    let d = scan.grid.delta;
    let head = vals[0] * d.powi(p + 1) / (p + 1) as f64;
    let body = compensated_sum(
        scan.grid
            .nodes
            .iter()
            .zip(&scan.grid.weights)
            .zip(&weighted[1..])
            .map(|((_, w), v)| v * *w),
    );
    Ok(head + body)
}

/// Fixed-order Gauss–Legendre on `[a, b]`, used where a closed interval rule is enough.
pub fn integrate_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, points: usize) -> f64 {
    gauss_legendre(points).mapped(a, b).integrate(f)
}
