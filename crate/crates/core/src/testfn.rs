//! Gaussian × polynomial test functions with closed-form Fourier data.
//!
//! Convention: `f̂(ξ) = ∫ e^{-i⟨x,ξ⟩} f(x) dx`. Every term is stored as
//! `amp · P(ξ) · Ĝ_{a,σ}(ξ)` with `Ĝ_{a,σ}(ξ) = (2πσ²)^{n/2} e^{-i⟨a,ξ⟩ - σ²|ξ|²/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{order, MultiIndex, Polynomial};
use crate::special::binomial;
use crate::symbol::{HomogeneousSymbol, MonomialSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default derivative-order cap when no symbol degree is known.
pub const DEFAULT_ORDER_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm {
    pub amplitude: Complex64,
    pub center: Vec<f64>,
    pub sigma: f64,
    /// Polynomial factor of the hat.
    pub hat_poly: Polynomial<Complex64>,
}

impl GaussianTerm {
    fn base_hat(&self, xi: &[f64]) -> Complex64 {
        let n = xi.len() as f64;
        let s2 = self.sigma * self.sigma;
        let phase: f64 = self.center.iter().zip(xi).map(|(a, x)| a * x).sum();
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let norm = (2.0 * PI * s2).powf(n / 2.0);
        Complex64::from_polar(norm * (-0.5 * s2 * r2).exp(), -phase)
    }

    /// `(∂^δ Ĝ)/Ĝ` as a product of one-dimensional Hermite-type factors.
    fn base_deriv_factor(&self, delta: &[u32], xi: &[f64]) -> Complex64 {
        let s2 = self.sigma * self.sigma;
        let mut out = Complex64::new(1.0, 0.0);
        for (j, &d) in delta.iter().enumerate() {
            let s = -I * self.center[j] - s2 * xi[j];
            out *= hermite_factor(d as usize, s, s2);
        }
        out
    }
}

/// `H_m` with `H_0 = 1`, `H_1 = s`, `H_{m+1} = s H_m - m σ² H_{m-1}`.
fn hermite_factor(m: usize, s: Complex64, s2: f64) -> Complex64 {
    let mut h0 = Complex64::new(1.0, 0.0);
    if m == 0 {
        return h0;
    }
    let mut h1 = s;
    for j in 1..m {
        let h2 = s * h1 - h0 * (j as f64 * s2);
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// A finite sum of Gaussian terms, plus the cached value `f(0)` when known.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTestFunction {
    dim: usize,
    terms: Vec<GaussianTerm>,
    value_at_zero: Option<Complex64>,
    order_cap: usize,
}

/// Config block for a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionSpec {
    #[serde(rename = "type")]
    pub kind: String,
    pub center: Vec<f64>,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<Vec<MonomialSpec>>,
}

impl TestFunctionSpec {
    pub fn build(&self) -> Result<SpectralTestFunction> {
        if self.kind != "gaussian" {
            return Err(Error::Config(format!("unknown test function type '{}'", self.kind)));
        }
        let f = SpectralTestFunction::gaussian(&self.center, self.sigma)?;
        match &self.poly {
            None => Ok(f),
            Some(monos) => {
                let n = self.center.len();
                for m in monos {
                    if m.alpha.len() != n {
                        return Err(Error::DimensionMismatch {
                            expected: n,
                            got: m.alpha.len(),
                        });
                    }
                }
                let q = Polynomial::from_terms(n, monos.iter().map(|m| (m.alpha.clone(), m.coeff)));
                Ok(f.times_polynomial(&q))
            }
        }
    }
}

impl SpectralTestFunction {
    /// `f(x) = exp(-|x-a|²/(2σ²))`.
    pub fn gaussian(center: &[f64], sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::NonPositiveWidth(sigma));
        }
        let n = center.len();
        let a2: f64 = center.iter().map(|a| a * a).sum();
        Ok(Self {
            dim: n,
            terms: vec![GaussianTerm {
                amplitude: Complex64::new(1.0, 0.0),
                center: center.to_vec(),
                sigma,
                hat_poly: Polynomial::one(n),
            }],
            value_at_zero: Some(Complex64::new((-a2 / (2.0 * sigma * sigma)).exp(), 0.0)),
            order_cap: DEFAULT_ORDER_CAP,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn value_at_zero(&self) -> Option<Complex64> {
        self.value_at_zero
    }

    pub fn order_cap(&self) -> usize {
        self.order_cap
    }

    pub fn with_order_cap(mut self, cap: usize) -> Self {
        self.order_cap = cap;
        self
    }

    /// Smallest width over all terms; sets the radial truncation.
    pub fn min_sigma(&self) -> f64 {
        self.terms.iter().map(|t| t.sigma).fold(f64::INFINITY, f64::min)
    }

    /// Largest degree of the hat polynomial factors.
    pub fn hat_degree(&self) -> usize {
        self.terms.iter().map(|t| t.hat_poly.degree()).max().unwrap_or(0)
    }

    /// `x ↦ q(x) f(x)`; multiplication by `x_j` acts on the hat as `i∂_j`.
    pub fn times_polynomial(&self, q: &Polynomial<f64>) -> Self {
        assert_eq!(q.dim(), self.dim);
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let mut acc = Polynomial::zero(self.dim);
            for (alpha, &c) in q.terms() {
                let mut p = t.hat_poly.clone();
                for (j, &e) in alpha.iter().enumerate() {
                    for _ in 0..e {
                        p = times_coordinate(&p, j, t);
                    }
                }
                acc = &acc + &p.scale(Complex64::new(c, 0.0));
            }
            terms.push(GaussianTerm {
                hat_poly: acc,
                ..t.clone()
            });
        }
        let q0 = q.eval(&vec![0.0; self.dim]);
        Self {
            dim: self.dim,
            terms,
            value_at_zero: self.value_at_zero.map(|v| v * q0),
            order_cap: self.order_cap,
        }
    }

    /// Multiplies the hat by `m(ξ)`; `f(0)` is no longer known in closed form.
    pub fn with_multiplier(&self, m: &Polynomial<f64>) -> Result<Self> {
        if m.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: m.dim(),
            });
        }
        let mc = m.to_complex();
        Ok(Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| GaussianTerm {
                    hat_poly: &t.hat_poly * &mc,
                    ..t.clone()
                })
                .collect(),
            value_at_zero: if m.is_one() { self.value_at_zero } else { None },
            order_cap: self.order_cap,
        })
    }

    /// The operator `Q`: `(Qf)^ = p f̂`.
    pub fn apply_symbol(&self, sym: &HomogeneousSymbol) -> Result<Self> {
        if sym.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: sym.dim(),
            });
        }
        if sym.degree() == 0 {
            return Err(Error::DegreeError);
        }
        let mut out = self.with_multiplier(sym.polynomial())?;
        out.value_at_zero = None;
        Ok(out)
    }

    /// `x ↦ f(λx)`.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NonPositiveScale(lambda));
        }
        Ok(Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| GaussianTerm {
                    amplitude: t.amplitude,
                    center: t.center.iter().map(|a| a / lambda).collect(),
                    sigma: t.sigma / lambda,
                    hat_poly: t.hat_poly.dilate_argument(lambda),
                })
                .collect(),
            value_at_zero: self.value_at_zero,
            order_cap: self.order_cap,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| GaussianTerm {
                    amplitude: t.amplitude * c,
                    ..t.clone()
                })
                .collect(),
            value_at_zero: self.value_at_zero.map(|v| v * c),
            order_cap: self.order_cap,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self {
            dim: self.dim,
            terms,
            value_at_zero: match (self.value_at_zero, other.value_at_zero) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
            order_cap: self.order_cap.max(other.order_cap),
        })
    }

    pub fn hat_eval(&self, xi: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.amplitude * t.hat_poly.eval(xi) * t.base_hat(xi))
            .sum()
    }

    /// `∂^β f̂(ξ)` via Leibniz over the hat polynomial.
    pub fn hat_deriv(&self, beta: &[u32], xi: &[f64]) -> Result<Complex64> {
        if beta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: beta.len(),
            });
        }
        if order(beta) > self.order_cap {
            return Err(Error::OrderCapExceeded {
                order: order(beta),
                cap: self.order_cap,
            });
        }
        let mut total = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let g = t.base_hat(xi);
            let mut acc = Complex64::new(0.0, 0.0);
            for gamma in sub_indices(beta) {
                let pd = t.hat_poly.derivative(&gamma);
                if pd.is_zero() {
                    continue;
                }
                let delta: MultiIndex = beta.iter().zip(&gamma).map(|(b, g)| b - g).collect();
                let coef: f64 = beta
                    .iter()
                    .zip(&gamma)
                    .map(|(&b, &g)| binomial(b as usize, g as usize))
                    .product();
                acc += pd.eval(xi) * t.base_deriv_factor(&delta, xi) * coef;
            }
            total += t.amplitude * g * acc;
        }
        Ok(total)
    }

    /// Per-direction data for fast radial derivatives along `r ↦ f̂(rθ)`.
    pub fn ray(&self, theta: &[f64]) -> Ray {
        Ray {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let n = self.dim as f64;
                    let s2 = t.sigma * t.sigma;
                    RayTerm {
                        scale: t.amplitude * (2.0 * PI * s2).powf(n / 2.0),
                        b: t.center.iter().zip(theta).map(|(a, x)| a * x).sum(),
                        s2,
                        coeffs: t.hat_poly.ray_coefficients(theta),
                    }
                })
                .collect(),
        }
    }
}

/// `i∂_j P + P·(a_j − iσ²ξ_j)`, the hat-side image of multiplying by `x_j`.
fn times_coordinate(p: &Polynomial<Complex64>, j: usize, t: &GaussianTerm) -> Polynomial<Complex64> {
    let n = p.dim();
    let mut lin = Polynomial::constant(n, Complex64::new(t.center[j], 0.0));
    let mut e = vec![0; n];
    e[j] = 1;
    lin.add_term(e, Complex64::new(0.0, -t.sigma * t.sigma));
    &p.partial(j).scale(I) + &(p * &lin)
}

fn sub_indices(beta: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![Vec::with_capacity(beta.len())];
    for &b in beta {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for prefix in &out {
            for g in 0..=b {
                let mut v: MultiIndex = prefix.clone();
                v.push(g);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Clone)]
struct RayTerm {
    scale: Complex64,
    b: f64,
    s2: f64,
    coeffs: Vec<Complex64>,
}

/// `f̂(rθ)` and its `r`-derivatives for one fixed direction θ.
#[derive(Debug, Clone)]
pub struct Ray {
    terms: Vec<RayTerm>,
}

impl Ray {
    /// Writes `∂_r^m f̂(rθ)` for `m = 0..out.len()` into `out`.
    pub fn derivatives(&self, r: f64, out: &mut [Complex64]) {
        let mmax = out.len();
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        let mut herm = [Complex64::new(0.0, 0.0); 64];
        let mut pder = [Complex64::new(0.0, 0.0); 64];
        assert!(mmax <= 64);
        for t in &self.terms {
            let g = t.scale * Complex64::from_polar((-0.5 * t.s2 * r * r).exp(), -t.b * r);
            if g.norm_sqr() == 0.0 {
                continue;
            }
            let s = Complex64::new(-t.s2 * r, -t.b);
            herm[0] = Complex64::new(1.0, 0.0);
            if mmax > 1 {
                herm[1] = s;
            }
            for j in 1..mmax.saturating_sub(1) {
                herm[j + 1] = s * herm[j] - herm[j - 1] * (j as f64 * t.s2);
            }
            // P^{(j)}(r) by Horner on the derivative coefficients
            let deg = t.coeffs.len();
            for (j, slot) in pder.iter_mut().enumerate().take(mmax) {
                let mut acc = Complex64::new(0.0, 0.0);
                for d in (j..deg).rev() {
                    acc = acc * r + t.coeffs[d] * crate::special::falling(d, j);
                }
                *slot = acc;
            }
            for m in 0..mmax {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..=m.min(deg.saturating_sub(1)) {
                    acc += pder[j] * herm[m - j] * binomial(m, j);
                }
                out[m] += g * acc;
            }
        }
    }

    pub fn value(&self, r: f64) -> Complex64 {
        let mut out = [Complex64::new(0.0, 0.0)];
        self.derivatives(r, &mut out);
        out[0]
    }
}

/// `∫_{ℝⁿ} f̂(ξ) dξ` by tensor Gauss–Hermite quadrature, term by term.
pub fn hat_integral_gauss_hermite(f: &SpectralTestFunction, nodes: usize) -> Complex64 {
    let rule = crate::quadrature::gauss_hermite(nodes);
    let n = f.dim();
    let total_points = nodes.pow(n as u32);
    let mut total = Complex64::new(0.0, 0.0);
    for t in f.terms() {
        let scale = 2f64.sqrt() / t.sigma;
        for flat in 0..total_points {
            let mut rest = flat;
            let mut xi = Vec::with_capacity(n);
            let mut w = scale.powi(n as i32);
            let mut x2 = 0.0;
            for _ in 0..n {
                let i = rest % nodes;
                rest /= nodes;
                xi.push(rule.nodes[i] * scale);
                w *= rule.weights[i];
                x2 += rule.nodes[i] * rule.nodes[i];
            }
            total += t.amplitude * t.hat_poly.eval(&xi) * t.base_hat(&xi) * (w * x2.exp());
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{hyperbolic_symbol, wave_symbol};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn base_gaussian_values() {
        let f = SpectralTestFunction::gaussian(&[0.0, 0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(f.hat_eval(&[0.0; 3]).re, (2.0 * PI).powf(1.5), max_relative = 1e-14);
        assert_relative_eq!((2.0 * PI).powf(1.5), 15.7496, max_relative = 1e-5);
        let g = SpectralTestFunction::gaussian(&[1.0, 0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(g.value_at_zero().unwrap().re, (-0.5f64).exp(), max_relative = 1e-15);
        let h = SpectralTestFunction::gaussian(&[0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(h.hat_eval(&[0.0, 0.0]).re, 2.0 * PI, max_relative = 1e-15);
        assert!(matches!(SpectralTestFunction::gaussian(&[0.0], 0.0), Err(Error::NonPositiveWidth(_))));
    }

    #[test]
    fn multiplier_example() {
        let f = SpectralTestFunction::gaussian(&[0.0, 0.0], 1.0).unwrap();
        let q = f.apply_symbol(&hyperbolic_symbol()).unwrap();
        let v = q.hat_eval(&[1.0, 1.0]);
        assert_relative_eq!(v.re, 2.0 * PI * (-1.0f64).exp(), max_relative = 1e-14);
        assert!(q.value_at_zero().is_none());
        assert_eq!(q.hat_eval(&[1.0, 0.0]), c(0.0));
    }

    #[test]
    fn apply_twice_equals_square_multiplier() {
        let f = SpectralTestFunction::gaussian(&[0.3, -0.2], 0.8).unwrap();
        let p = hyperbolic_symbol();
        let twice = f.apply_symbol(&p).unwrap().apply_symbol(&p).unwrap();
        let sq = f.with_multiplier(&p.polynomial().pow(2)).unwrap();
        let xi = [0.7, -1.1];
        assert!((twice.hat_eval(&xi) - sq.hat_eval(&xi)).norm() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let f = SpectralTestFunction::gaussian(&[0.0, 0.0], 1.0).unwrap();
        assert!(matches!(f.apply_symbol(&wave_symbol()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn one_dimensional_derivatives() {
        let f = SpectralTestFunction::gaussian(&[0.0], 1.0).unwrap();
        assert_eq!(f.hat_deriv(&[1], &[0.0]).unwrap().norm(), 0.0);
        assert_relative_eq!(f.hat_deriv(&[2], &[0.0]).unwrap().re, -(2.0 * PI).sqrt(), max_relative = 1e-14);
        assert!(matches!(f.hat_deriv(&[17], &[0.0]), Err(Error::OrderCapExceeded { .. })));
    }

    #[test]
    fn dilation_law_and_identity() {
        let f = SpectralTestFunction::gaussian(&[0.4, -0.3, 0.1], 1.0)
            .unwrap()
            .times_polynomial(&Polynomial::from_terms(3, [(vec![1, 0, 1], 2.0), (vec![0, 0, 0], 1.0)]));
        let xi = [0.3, 1.2, -0.7];
        assert!((f.dilate(1.0).unwrap().hat_eval(&xi) - f.hat_eval(&xi)).norm() < 1e-14);
        let lam = 2.0;
        let g = f.dilate(lam).unwrap();
        let half: Vec<f64> = xi.iter().map(|x| x / lam).collect();
        let expect = f.hat_eval(&half) / lam.powi(3);
        assert!((g.hat_eval(&xi) - expect).norm() < 1e-13 * expect.norm().max(1e-300));
        assert_eq!(g.value_at_zero(), f.value_at_zero());
        let base = SpectralTestFunction::gaussian(&[0.0; 3], 1.0).unwrap().dilate(2.0).unwrap();
        assert_eq!(base.terms()[0].sigma, 0.5);
        assert!(f.dilate(-1.0).is_err());
    }

    #[test]
    fn polynomial_prefactor_value_at_zero() {
        let q = Polynomial::from_terms(2, [(vec![0, 0], 3.0), (vec![2, 0], 1.0)]);
        let f = SpectralTestFunction::gaussian(&[1.0, 0.5], 1.2).unwrap().times_polynomial(&q);
        let g0 = (-(1.25) / (2.0 * 1.44f64)).exp();
        assert_relative_eq!(f.value_at_zero().unwrap().re, 3.0 * g0, max_relative = 1e-14);
        let total = hat_integral_gauss_hermite(&f, 48) / (2.0 * PI).powi(2);
        assert_relative_eq!(total.re, 3.0 * g0, max_relative = 1e-10);
        assert!(total.im.abs() < 1e-10);
    }

    #[test]
    fn parseval_for_shifted_gaussians() {
        for (a, s) in [(vec![0.0, 0.0, 0.0], 1.0), (vec![1.0, 0.0, 0.0], 1.0), (vec![0.0, -1.0, 1.0], 1.0), (vec![1.0, 1.2], 0.9)] {
            let f = SpectralTestFunction::gaussian(&a, s).unwrap();
            let n = a.len() as i32;
            let v = hat_integral_gauss_hermite(&f, 40) / (2.0 * PI).powi(n);
            let f0 = f.value_at_zero().unwrap();
            assert!((v - f0).norm() <= 1e-8 * f0.norm(), "{a:?}: {v} vs {f0}");
        }
    }

    #[test]
    fn ray_derivatives_match_directional_expansion() {
        let f = SpectralTestFunction::gaussian(&[0.5, -0.2, 0.3], 0.9)
            .unwrap()
            .apply_symbol(&wave_symbol())
            .unwrap();
        let theta = [0.48, 0.6, 0.64];
        let ray = f.ray(&theta);
        let mut d = [Complex64::new(0.0, 0.0); 6];
        let r = 0.0;
        ray.derivatives(r, &mut d);
        // ∂_r^m f̂(rθ)|₀ = Σ_{|α|=m} m!/α! θ^α ∂^α f̂(0)
        for m in 0..6 {
            let mut expect = Complex64::new(0.0, 0.0);
            for alpha in crate::poly::multi_indices(3, m) {
                let w = crate::special::factorial(m) / crate::poly::multi_factorial(&alpha)
                    * crate::poly::monomial(&alpha, &theta);
                expect += f.hat_deriv(&alpha, &[0.0; 3]).unwrap() * w;
            }
            assert!((d[m] - expect).norm() <= 1e-11 * (1.0 + expect.norm()), "m={m}");
        }
    }

    #[test]
    fn ray_derivatives_match_finite_differences() {
        let f = SpectralTestFunction::gaussian(&[0.5, -0.2], 0.7)
            .unwrap()
            .apply_symbol(&hyperbolic_symbol())
            .unwrap();
        let theta = [0.6, 0.8];
        let ray = f.ray(&theta);
        let r = 1.3;
        let h = 1e-3;
        let mut d = [Complex64::new(0.0, 0.0); 3];
        ray.derivatives(r, &mut d);
        let v = |r: f64| {
            let x: Vec<f64> = theta.iter().map(|t| t * r).collect();
            f.hat_eval(&x)
        };
        assert!((d[0] - v(r)).norm() < 1e-14);
        let d1 = (v(r - 2.0 * h) - v(r - h) * 8.0 + v(r + h) * 8.0 - v(r + 2.0 * h)) / (12.0 * h);
        assert!((d[1] - d1).norm() < 1e-9);
        let d2 = (v(r - h) - v(r) * 2.0 + v(r + h)) / (h * h);
        assert!((d[2] - d2).norm() < 1e-5);
    }

    fn arb_function() -> impl Strategy<Value = SpectralTestFunction> {
        (prop::collection::vec(-1.0f64..1.0, 3), 0.5f64..1.5, -1.0f64..1.0).prop_map(|(a, s, q)| {
            SpectralTestFunction::gaussian(&a, s)
                .unwrap()
                .times_polynomial(&Polynomial::from_terms(3, [(vec![0, 0, 0], 1.0), (vec![1, 0, 0], q)]))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn hat_deriv_matches_central_differences(
            f in arb_function(),
            xi in prop::collection::vec(-1.5f64..1.5, 3),
            j in 0usize..3,
            l in 0usize..3,
        ) {
            let h = 1e-4;
            let mut beta = vec![0u32; 3];
            beta[j] += 1;
            let fd_at = |x: &[f64]| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[l] += h;
                m[l] -= h;
                (f.hat_deriv(&beta, &p).unwrap() - f.hat_deriv(&beta, &m).unwrap()) / (2.0 * h)
            };
            let mut beta2 = beta.clone();
            beta2[l] += 1;
            let exact = f.hat_deriv(&beta2, &xi).unwrap();
            let fd = fd_at(&xi);
            prop_assert!((exact - fd).norm() <= 1e-6 * (1.0 + exact.norm()));
        }

        #[test]
        fn derivatives_are_permutation_invariant(
            a in prop::collection::vec(-1.0f64..1.0, 3),
            q in -1.0f64..1.0,
            xi in prop::collection::vec(-1.5f64..1.5, 3),
            beta in prop::collection::vec(0u32..3, 3),
        ) {
            // g(x) = f(x₂, x₃, x₁) has ∂^{πβ} ĝ(πξ) = ∂^β f̂(ξ)
            let perm = [1usize, 2, 0];
            let build = |center: &[f64], alpha: Vec<u32>| {
                SpectralTestFunction::gaussian(center, 0.8)
                    .unwrap()
                    .times_polynomial(&Polynomial::from_terms(3, [(vec![0, 0, 0], 1.0), (alpha, q)]))
            };
            let f = build(&a, vec![2, 1, 0]);
            let mut ga = vec![0.0; 3];
            let mut galpha = vec![0u32; 3];
            let mut gxi = vec![0.0; 3];
            let mut gbeta = vec![0u32; 3];
            let src = [2u32, 1, 0];
            for j in 0..3 {
                ga[perm[j]] = a[j];
                galpha[perm[j]] = src[j];
                gxi[perm[j]] = xi[j];
                gbeta[perm[j]] = beta[j];
            }
            let g = build(&ga, galpha);
            let u = f.hat_deriv(&beta, &xi).unwrap();
            let v = g.hat_deriv(&gbeta, &gxi).unwrap();
            prop_assert!((u - v).norm() <= 1e-12 * (1.0 + u.norm()));
        }

        #[test]
        fn q_and_dilation_intertwine(
            f in arb_function(),
            xi in prop::collection::vec(-2.0f64..2.0, 3),
            lam in 0.3f64..3.0,
        ) {
            let p = wave_symbol();
            let lhs = f.dilate(lam).unwrap().apply_symbol(&p).unwrap().hat_eval(&xi);
            let rhs = f.apply_symbol(&p).unwrap().dilate(lam).unwrap().hat_eval(&xi) * lam.powi(2);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1e-300 + lhs.norm().max(rhs.norm())));
        }

        #[test]
        fn reality_symmetry(a in prop::collection::vec(-1.0f64..1.0, 2), xi in prop::collection::vec(-2.0f64..2.0, 2)) {
            let f = SpectralTestFunction::gaussian(&a, 1.0)
                .unwrap()
                .times_polynomial(&Polynomial::from_terms(2, [(vec![1, 1], 1.0), (vec![0, 0], 0.5)]));
            let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
            let u = f.hat_eval(&xi);
            let v = f.hat_eval(&neg);
            prop_assert!((u - v.conj()).norm() <= 1e-12 * (1.0 + u.norm()));
        }
    }
}
