//! Brackets `⟨log|u|^j ; 𝔏^{(1)}(u)⟩`, regularized by a cutoff split.
//!
//! Inner part `∫χ log|u|^j 𝔏′` uses the window fit; the outer part
//! `−∫((1−χ) log|u|^j)′ 𝔏` uses the fit where the window bump `β` is on and
//! the Stieltjes sum over the atoms of the Leray measure elsewhere.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leray::{window_bump, LerayOperator, LerayProfile};
use crate::quadrature::{composite, gauss_legendre};
use crate::testfn::SpectralTestFunction;

/// `C²` cutoff: 1 on `[-ρ/2, ρ/2]`, `1 − (6s⁵ − 15s⁴ + 10s³)` with
/// `s = (|u| − ρ/2)/(ρ/2)` on the transition, 0 beyond `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub rho: f64,
}

impl Cutoff {
    pub const SHAPE: &'static str = "chi(u) = 1 - (6s^5 - 15s^4 + 10s^3), s = clamp((|u| - rho/2)/(rho/2), 0, 1)";

    pub fn value(&self, u: f64) -> f64 {
        let s = ((u.abs() - 0.5 * self.rho) / (0.5 * self.rho)).clamp(0.0, 1.0);
        1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }

    pub fn derivative(&self, u: f64) -> f64 {
        let s = (u.abs() - 0.5 * self.rho) / (0.5 * self.rho);
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let ds = 30.0 * s * s * (1.0 - s) * (1.0 - s);
        -ds * u.signum() / (0.5 * self.rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogBracketSpec {
    /// `j ∈ {1, 2}`.
    pub power: u8,
    pub cutoff: Cutoff,
    /// Dyadic panels toward the log singularity.
    pub inner_panels: usize,
    pub inner_order: usize,
    /// Gauss points per outer subpanel.
    pub outer_order: usize,
}

impl LogBracketSpec {
    pub fn new(power: u8, rho: f64) -> Result<Self> {
        if !(1..=2).contains(&power) {
            return Err(Error::Config(format!("log power must be 1 or 2, got {power}")));
        }
        if !(rho > 0.0) {
            return Err(Error::Config(format!("cutoff radius must be positive, got {rho}")));
        }
        Ok(Self {
            power,
            cutoff: Cutoff { rho },
            inner_panels: 25,
            inner_order: 8,
            outer_order: 24,
        })
    }

    pub fn rho(&self) -> f64 {
        self.cutoff.rho
    }

    fn log_power(&self, u: f64) -> f64 {
        let l = u.abs().ln();
        if self.power == 1 {
            l
        } else {
            l * l
        }
    }

    fn log_power_derivative(&self, u: f64) -> f64 {
        if self.power == 1 {
            1.0 / u
        } else {
            2.0 * u.abs().ln() / u
        }
    }

    /// `ψ′` with `ψ = (1 − χ) log|u|^j`.
    pub fn outer_kernel(&self, u: f64) -> f64 {
        if u.abs() <= 0.5 * self.rho() {
            return 0.0;
        }
        -self.cutoff.derivative(u) * self.log_power(u) + (1.0 - self.cutoff.value(u)) * self.log_power_derivative(u)
    }

    /// `∫_0^δ u^{a-1} log(u)^j du`.
    fn remainder(&self, delta: f64, a: f64) -> f64 {
        let l = delta.ln();
        let da = delta.powf(a);
        if self.power == 1 {
            da * (l / a - 1.0 / (a * a))
        } else {
            da * (l * l / a - 2.0 * l / (a * a) + 2.0 / (a * a * a))
        }
    }
}

/// A linear functional on Leray profiles: `Σ_d g_d c_d + Σ_atoms m ν(p)`.
#[derive(Clone)]
pub struct ProfileFunctional {
    pub eps: f64,
    pub coeff_weights: Vec<f64>,
    pub node_kernel: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ProfileFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProfileFunctional")
            .field("eps", &self.eps)
            .field("coeff_weights", &self.coeff_weights)
            .finish()
    }
}

impl ProfileFunctional {
    pub fn apply(&self, prof: &LerayProfile) -> Result<f64> {
        if (prof.eps - self.eps).abs() > 1e-14 * self.eps {
            return Err(Error::Config("profile window differs from the functional's".into()));
        }
        let fit: f64 = prof.fit_coeffs.iter().zip(&self.coeff_weights).map(|(c, g)| c * g).sum();
        let nodes = prof.measure.integrate(|p| (self.node_kernel)(p));
        let v = fit + nodes;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonfiniteProfile)
        }
    }

    /// Per-point weights `W_i` with `functional(h) = Σ W_i h_i`.
    pub fn point_weights(&self, op: &LerayOperator) -> Vec<f64> {
        (0..op.len())
            .map(|i| {
                let mut w = 0.0;
                for (d, g) in self.coeff_weights.iter().enumerate() {
                    w += g * op.fit_weight(d, i);
                }
                let nw = op.node_weight(i);
                if nw != 0.0 {
                    w += nw * (self.node_kernel)(op.p_value(i));
                }
                w
            })
            .collect()
    }
}

/// The bracket functional for a window of radius `eps` and fit degree `degree`.
pub fn log_bracket_functional(spec: &LogBracketSpec, eps: f64, degree: usize) -> Result<ProfileFunctional> {
    let rho = spec.rho();
    if rho > eps * (1.0 + 1e-12) {
        return Err(Error::WindowTooSmall { rho, eps });
    }
    let cut = spec.cutoff;

    // inner: ∫χ log^j (t^d)′ du, only odd d survive
    let gl = gauss_legendre(spec.inner_order);
    let mut inner = vec![0.0; degree + 1];
    for (d, slot) in inner.iter_mut().enumerate().skip(1).step_by(2) {
        let mut acc = 0.0;
        for m in 0..spec.inner_panels {
            let hi = rho * 0.5f64.powi(m as i32);
            let lo = 0.5 * hi;
            let rule = gl.mapped(lo, hi);
            acc += rule.integrate(|u| cut.value(u) * spec.log_power(u) * u.powi(d as i32 - 1));
        }
        let delta = rho * 0.5f64.powi(spec.inner_panels as i32);
        acc += spec.remainder(delta, d as f64);
        *slot = 2.0 * d as f64 / eps.powi(d as i32) * acc;
    }

    // window: ∫ψ′β (u/ε)^d du over [ρ/2, ε], only odd d survive
    let mut breaks = vec![0.5 * rho, rho, 0.5 * eps, eps];
    breaks.retain(|&b| b >= 0.5 * rho && b <= eps);
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * eps);
    let mut fine = Vec::new();
    for w in breaks.windows(2) {
        let sub = 8;
        for s in 0..sub {
            fine.push(w[0] + (w[1] - w[0]) * s as f64 / sub as f64);
        }
    }
    fine.push(*breaks.last().unwrap());
    let rule = composite(&fine, spec.outer_order);
    let mut window = vec![0.0; degree + 1];
    for (d, slot) in window.iter_mut().enumerate().skip(1).step_by(2) {
        *slot = 2.0 * rule.integrate(|u| spec.outer_kernel(u) * window_bump(u, eps) * (u / eps).powi(d as i32));
    }

    let coeff_weights: Vec<f64> = inner.iter().zip(&window).map(|(a, b)| a - b).collect();
    let s = *spec;
    Ok(ProfileFunctional {
        eps,
        coeff_weights,
        node_kernel: Arc::new(move |p| -s.outer_kernel(p) * (1.0 - window_bump(p, eps))),
    })
}

/// `⟨log|u|^j ; 𝔏^{(1)}⟩` for one profile.
pub fn log_bracket(profile: &LerayProfile, spec: &LogBracketSpec) -> Result<f64> {
    if profile.fit_coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonfiniteProfile);
    }
    let func = log_bracket_functional(spec, profile.eps, profile.fit_coeffs.len() - 1)?;
    func.apply(profile)
}

/// Point weights of the `j = 1` and `j = 2` brackets on a Leray operator.
#[derive(Debug, Clone)]
pub struct BracketOperator {
    pub spec_j1: LogBracketSpec,
    pub spec_j2: LogBracketSpec,
    pub weights_j1: Vec<f64>,
    pub weights_j2: Vec<f64>,
}

impl BracketOperator {
    pub fn new(op: &LerayOperator, rho: f64) -> Result<Self> {
        let spec_j1 = LogBracketSpec::new(1, rho)?;
        let spec_j2 = LogBracketSpec::new(2, rho)?;
        let f1 = log_bracket_functional(&spec_j1, op.eps, op.fit_degree)?;
        let f2 = log_bracket_functional(&spec_j2, op.eps, op.fit_degree)?;
        Ok(Self {
            spec_j1,
            spec_j2,
            weights_j1: f1.point_weights(op),
            weights_j2: f2.point_weights(op),
        })
    }
}

/// `S[a][m][r] = Σ_i W^a_i ∂_r^m f̂(r θ_i)` for `m ∈ orders`.
///
/// Points are processed in fixed chunks and reduced in order, so results do
/// not depend on the thread count.
pub fn scan(
    op: &LerayOperator,
    f: &SpectralTestFunction,
    weights: &[&[f64]],
    orders: std::ops::RangeInclusive<usize>,
    radii: &[f64],
) -> Result<Vec<Vec<Vec<Complex64>>>> {
    if f.dim() != op.dim {
        return Err(Error::DimensionMismatch {
            expected: op.dim,
            got: f.dim(),
        });
    }
    let (m_lo, m_hi) = (*orders.start(), *orders.end());
    if m_hi > f.order_cap() {
        return Err(Error::OrderCapExceeded {
            order: m_hi,
            cap: f.order_cap(),
        });
    }
    let nm = m_hi - m_lo + 1;
    let na = weights.len();
    let nr = radii.len();
    const CHUNK: usize = 1024;
    let chunks: Vec<usize> = (0..op.len().div_ceil(CHUNK)).collect();
    let partial: Vec<Vec<Complex64>> = chunks
        .par_iter()
        .map(|&c| {
            let mut acc = vec![Complex64::new(0.0, 0.0); na * nm * nr];
            let mut d = vec![Complex64::new(0.0, 0.0); m_hi + 1];
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(op.len());
            for i in lo..hi {
                if weights.iter().all(|w| w[i] == 0.0) {
                    continue;
                }
                let ray = f.ray(op.point(i));
                for (ri, &r) in radii.iter().enumerate() {
                    ray.derivatives(r, &mut d);
                    for (a, w) in weights.iter().enumerate() {
                        let wi = w[i];
                        if wi == 0.0 {
                            continue;
                        }
                        for m in 0..nm {
                            acc[(a * nm + m) * nr + ri] += d[m_lo + m] * wi;
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Complex64::new(0.0, 0.0); na * nm * nr];
    for p in &partial {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok((0..na)
        .map(|a| {
            (0..nm)
                .map(|m| total[(a * nm + m) * nr..(a * nm + m + 1) * nr].to_vec())
                .collect()
        })
        .collect())
}

/// Bracket values as a function of `r` for `h = f̂(rθ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketScan {
    pub r: Vec<f64>,
    pub j1: Vec<Complex64>,
    pub j2: Vec<Complex64>,
}

impl BracketScan {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,bracket_j1,bracket_j2,bracket_j1_im,bracket_j2_im\n");
        for i in 0..self.r.len() {
            let _ = writeln!(
                s,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                self.r[i], self.j1[i].re, self.j2[i].re, self.j1[i].im, self.j2[i].im
            );
        }
        s
    }
}

pub fn log_bracket_scan(
    op: &LerayOperator,
    brackets: &BracketOperator,
    f: &SpectralTestFunction,
    radii: &[f64],
) -> Result<BracketScan> {
    let out = scan(op, f, &[&brackets.weights_j1, &brackets.weights_j2], 0..=0, radii)?;
    Ok(BracketScan {
        r: radii.to_vec(),
        j1: out[0][0].clone(),
        j2: out[1][0].clone(),
    })
}
