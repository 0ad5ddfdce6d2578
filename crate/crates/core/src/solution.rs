//! The fundamental solution functional `⟨s, f⟩`, the null solution `⟨s₀, f⟩`
//! and the family `s + λs₀`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leray::{auto_level, Estimator, LerayConfig, LerayOperator};
use crate::pairing::BracketOperator;
use crate::quadrature::{build_quadrature, SphereQuadrature};
use crate::radial::{
    boundary_derivative, log_weighted_integral, power_weighted_integral, taylor_at_zero, GridBudget, RadialGrid,
    RadialScan,
};
use crate::special::{digamma, gamma, EULER_GAMMA};
use crate::symbol::{validate_h, HomogeneousSymbol, SymbolValidation, ValidationTolerances};
use crate::testfn::SpectralTestFunction;

/// Global orientation of every assembled term. The bracket is
/// `∫ log|u|^j 𝔏′(u) du`, the negative of the principal-value form.
pub const ORIENTATION: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    A,
    B,
}

impl Case {
    pub fn of(n: usize, k: usize) -> Self {
        if k < n {
            Case::A
        } else {
            Case::B
        }
    }
}

/// First-term coefficient: `(γ+Ψ(k))/Γ(2k)` or `(γ+Ψ(2k))/Γ(2k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    Theorem,
    Proof,
}

impl Variant {
    pub fn tag(&self) -> &'static str {
        match self {
            Variant::Theorem => "theorem",
            Variant::Proof => "proof",
        }
    }
}

/// Coefficient of the log-weighted integral: `2k·h(0) = −1/Γ(2k)` or the
/// displayed `1/Γ(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Term3Coefficient {
    #[default]
    ProofConstant,
    Displayed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub k: usize,
    pub euler_gamma: f64,
    pub gamma_2k: f64,
    pub gamma_1p2k: f64,
    pub gamma_k: f64,
    pub psi_k: f64,
    pub psi_2k: f64,
}

impl Constants {
    pub fn new(k: usize) -> Self {
        let kf = k as f64;
        Self {
            k,
            euler_gamma: EULER_GAMMA,
            gamma_2k: gamma(2.0 * kf),
            gamma_1p2k: gamma(1.0 + 2.0 * kf),
            gamma_k: gamma(kf),
            psi_k: digamma(kf),
            psi_2k: digamma(2.0 * kf),
        }
    }

    pub fn first(&self, v: Variant) -> f64 {
        let psi = match v {
            Variant::Theorem => self.psi_k,
            Variant::Proof => self.psi_2k,
        };
        (self.euler_gamma + psi) / self.gamma_2k
    }

    pub fn second(&self) -> f64 {
        1.0 / self.gamma_1p2k
    }

    pub fn third(&self, t: Term3Coefficient) -> f64 {
        match t {
            Term3Coefficient::ProofConstant => -1.0 / self.gamma_2k,
            Term3Coefficient::Displayed => 1.0 / self.gamma_k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    /// Sphere quadrature level; sized from the mollifier when unset.
    pub quadrature_level: Option<usize>,
    pub min_level_n2: usize,
    /// Mollifier width; `ε/8` when unset.
    pub eta: Option<f64>,
    /// Bracket cutoff radius; `ε/2` when unset.
    pub rho: Option<f64>,
    pub fit_degree: usize,
    pub fit_points: usize,
    pub grid_points: usize,
    pub estimator: Option<Estimator>,
    pub radial: GridBudget,
    /// Radial truncation `R`; sized from the narrowest Gaussian when unset.
    pub radius: Option<f64>,
    pub validation_points: usize,
    pub seed: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        let l = LerayConfig::default();
        Self {
            quadrature_level: None,
            min_level_n2: 1024,
            eta: None,
            rho: None,
            fit_degree: l.fit_degree,
            fit_points: l.fit_points,
            grid_points: l.grid_points,
            estimator: None,
            radial: GridBudget::default(),
            radius: None,
            validation_points: 20_000,
            seed: 17,
        }
    }
}

impl Budgets {
    /// Scales node counts by `s` (levels, radial panels, validation samples).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonPositiveScale(s));
        }
        let up = |v: usize| ((v as f64 * s).round() as usize).max(1);
        Ok(Self {
            quadrature_level: self.quadrature_level.map(up),
            min_level_n2: up(self.min_level_n2),
            radial: self.radial.scaled(s),
            validation_points: up(self.validation_points).max(1000),
            ..self.clone()
        })
    }

    pub fn leray_config(&self) -> LerayConfig {
        LerayConfig {
            eta: self.eta,
            fit_degree: self.fit_degree,
            fit_points: self.fit_points,
            grid_points: self.grid_points,
            estimator: self.estimator,
            ..LerayConfig::default()
        }
    }
}

/// Resolved numerical parameters of a built functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub level: usize,
    pub sphere_points: usize,
    pub eps: f64,
    pub eta: Option<f64>,
    pub rho: f64,
    pub estimator: Estimator,
}

#[derive(Debug, Clone)]
pub struct SolutionFunctional {
    symbol: HomogeneousSymbol,
    case: Case,
    constants: Constants,
    variant: Variant,
    term3: Term3Coefficient,
    budgets: Budgets,
    validation: SymbolValidation,
    resolved: Resolved,
    operator: Arc<LerayOperator>,
    brackets: Arc<BracketOperator>,
}

/// Terms of the case-B assembly, before the `(2π)^{-n}` factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseBTerms {
    pub boundary_log: Complex64,
    pub boundary_log2: Complex64,
    pub log_integral: Complex64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub orientation: f64,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub case: Case,
    pub value: Complex64,
    pub terms: Option<CaseBTerms>,
    pub null_value: Option<Complex64>,
    pub truncation_radius: f64,
    pub radial_nodes: usize,
}

impl SolutionFunctional {
    pub fn new(symbol: &HomogeneousSymbol, budgets: &Budgets, variant: Variant) -> Result<Self> {
        let val = validate_h(
            symbol,
            budgets.validation_points,
            &ValidationTolerances::default(),
            budgets.seed,
        )?;
        Self::with_validation(symbol, budgets, variant, val)
    }

    pub fn with_validation(
        symbol: &HomogeneousSymbol,
        budgets: &Budgets,
        variant: Variant,
        validation: SymbolValidation,
    ) -> Result<Self> {
        if !validation.passes_h {
            return Err(Error::HypothesisViolated);
        }
        let n = symbol.dim();
        let k = symbol.degree();
        let eps = validation.epsilon_window;
        let level = resolve_level(n, &validation, budgets);
        let (operator, sphere_points) = build_operator(symbol, &validation, budgets, level)?;
        let rho = budgets.rho.unwrap_or(eps / 2.0);
        let brackets = BracketOperator::new(&operator, rho)?;
        Ok(Self {
            symbol: symbol.clone(),
            case: Case::of(n, k),
            constants: Constants::new(k),
            variant,
            term3: Term3Coefficient::default(),
            budgets: budgets.clone(),
            resolved: Resolved {
                level,
                sphere_points,
                eps,
                eta: operator.eta,
                rho,
                estimator: operator.estimator,
            },
            validation,
            operator: Arc::new(operator),
            brackets: Arc::new(brackets),
        })
    }

    /// Same numerics, different first-term coefficient.
    pub fn with_variant(&self, variant: Variant) -> Self {
        Self {
            variant,
            ..self.clone()
        }
    }

    pub fn with_term3(&self, term3: Term3Coefficient) -> Self {
        Self { term3, ..self.clone() }
    }

    pub fn symbol(&self) -> &HomogeneousSymbol {
        &self.symbol
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn term3(&self) -> Term3Coefficient {
        self.term3
    }

    pub fn budgets(&self) -> &Budgets {
        &self.budgets
    }

    pub fn validation(&self) -> &SymbolValidation {
        &self.validation
    }

    pub fn resolved(&self) -> &Resolved {
        &self.resolved
    }

    pub fn operator(&self) -> &LerayOperator {
        &self.operator
    }

    pub fn shared_operator(&self) -> Arc<LerayOperator> {
        Arc::clone(&self.operator)
    }

    pub fn brackets(&self) -> &BracketOperator {
        &self.brackets
    }

    fn prefactor(&self) -> f64 {
        (2.0 * PI).powi(-(self.symbol.dim() as i32))
    }

    pub fn radial_grid(&self, f: &SpectralTestFunction) -> Result<RadialGrid> {
        match self.budgets.radius {
            Some(r) => RadialGrid::new(1.0 / f.min_sigma(), r, &self.budgets.radial),
            None => RadialGrid::for_sigma(f.min_sigma(), &self.budgets.radial),
        }
    }

    fn check_dim(&self, f: &SpectralTestFunction) -> Result<()> {
        if f.dim() != self.symbol.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.symbol.dim(),
                got: f.dim(),
            });
        }
        Ok(())
    }

    fn require(&self, case: Case) -> Result<()> {
        if self.case != case {
            return Err(Error::CaseMismatch(format!(
                "symbol has n={}, k={}: case {:?}, requested case {:?}",
                self.symbol.dim(),
                self.symbol.degree(),
                self.case,
                case
            )));
        }
        Ok(())
    }

    /// The `j = 1` bracket scan with `F^{(m)}`, `m ≤ max_order`.
    pub fn bracket_scan(&self, f: &SpectralTestFunction, max_order: usize) -> Result<RadialScan> {
        self.check_dim(f)?;
        let grid = self.radial_grid(f)?;
        RadialScan::from_operator(&self.operator, &self.brackets.weights_j1, f, &grid, max_order)
    }

    pub fn eval_a(&self, f: &SpectralTestFunction) -> Result<Complex64> {
        self.require(Case::A)?;
        let scan = self.bracket_scan(f, 0)?;
        let p = (self.symbol.dim() - self.symbol.degree() - 1) as i32;
        Ok(power_weighted_integral(&scan, p)? * (ORIENTATION * self.prefactor()))
    }

    pub fn eval_b_terms(&self, f: &SpectralTestFunction) -> Result<CaseBTerms> {
        self.require(Case::B)?;
        let k = self.symbol.degree();
        let scan = self.bracket_scan(f, 2 * k)?;
        self.assemble_b(f, &scan)
    }

    fn assemble_b(&self, f: &SpectralTestFunction, scan: &RadialScan) -> Result<CaseBTerms> {
        let (n, k) = (self.symbol.dim(), self.symbol.degree());
        let boundary_log = boundary_derivative(scan, k, n)?;
        let t2_taylor = taylor_at_zero(&self.operator, &self.brackets.weights_j2, f, k - n)?;
        let boundary_log2 = t2_taylor * (boundary_derivative_factor(k, n));
        let log_integral = log_weighted_integral(scan, k, n)?;
        let c1 = self.constants.first(self.variant);
        let c2 = self.constants.second();
        let c3 = self.constants.third(self.term3);
        let value =
            (boundary_log * c1 + boundary_log2 * c2 + log_integral * c3) * (ORIENTATION * self.prefactor());
        Ok(CaseBTerms {
            boundary_log,
            boundary_log2,
            log_integral,
            c1,
            c2,
            c3,
            orientation: ORIENTATION,
            value,
        })
    }

    /// The assembled value of `terms` with the first coefficient of `variant`.
    pub fn variant_value(&self, terms: &CaseBTerms, variant: Variant) -> Complex64 {
        let c1 = self.constants.first(variant);
        terms.value + terms.boundary_log * ((c1 - terms.c1) * terms.orientation * self.prefactor())
    }

    pub fn eval_b(&self, f: &SpectralTestFunction) -> Result<Complex64> {
        Ok(self.eval_b_terms(f)?.value)
    }

    /// `∂_r^{2k-1}(r^{k+n-1}⟨log|u| ; 𝔏′⟩)|_{r=0}`, no prefactor.
    pub fn eval_null(&self, f: &SpectralTestFunction) -> Result<Complex64> {
        self.require(Case::B)?;
        self.check_dim(f)?;
        let (n, k) = (self.symbol.dim(), self.symbol.degree());
        let t = taylor_at_zero(&self.operator, &self.brackets.weights_j1, f, k - n)?;
        Ok(t * boundary_derivative_factor(k, n))
    }

    pub fn eval_family(&self, lambda: Complex64, f: &SpectralTestFunction) -> Result<Complex64> {
        let t = self.eval_b_terms(f)?;
        Ok(t.value + lambda * t.boundary_log)
    }

    /// `⟨s, f⟩` in either case.
    pub fn eval(&self, f: &SpectralTestFunction) -> Result<Complex64> {
        match self.case {
            Case::A => self.eval_a(f),
            Case::B => self.eval_b(f),
        }
    }

    /// Full evaluation record; one radial scan serves both functionals.
    pub fn evaluate(&self, f: &SpectralTestFunction) -> Result<Evaluation> {
        Ok(self.evaluate_with_scan(f)?.0)
    }

    /// [`Self::evaluate`] plus the bracket scan it was assembled from.
    pub fn evaluate_with_scan(&self, f: &SpectralTestFunction) -> Result<(Evaluation, RadialScan)> {
        let (n, k) = (self.symbol.dim(), self.symbol.degree());
        match self.case {
            Case::A => {
                let scan = self.bracket_scan(f, 0)?;
                let value = power_weighted_integral(&scan, (n - k - 1) as i32)? * (ORIENTATION * self.prefactor());
                let ev = Evaluation {
                    case: Case::A,
                    value,
                    terms: None,
                    null_value: None,
                    truncation_radius: scan.grid.radius,
                    radial_nodes: scan.grid.len(),
                };
                Ok((ev, scan))
            }
            Case::B => {
                let scan = self.bracket_scan(f, 2 * k)?;
                let t = self.assemble_b(f, &scan)?;
                let ev = Evaluation {
                    case: Case::B,
                    value: t.value,
                    terms: Some(t),
                    null_value: Some(t.boundary_log),
                    truncation_radius: scan.grid.radius,
                    radial_nodes: scan.grid.len(),
                };
                Ok((ev, scan))
            }
        }
    }
}

/// Sphere level from the budgets: explicit, or sized so the mollifier is
/// resolved along the steepest level sets.
pub fn resolve_level(n: usize, validation: &SymbolValidation, budgets: &Budgets) -> usize {
    match budgets.quadrature_level {
        Some(l) => l,
        None => {
            let eta = budgets.eta.unwrap_or(validation.epsilon_window / 8.0);
            let l = auto_level(validation.max_tangential_gradient_norm, eta);
            if n == 2 {
                l.max(budgets.min_level_n2)
            } else {
                l
            }
        }
    }
}

/// Leray operator on the sphere rule of the given level, and the rule's size.
pub fn build_operator(
    symbol: &HomogeneousSymbol,
    validation: &SymbolValidation,
    budgets: &Budgets,
    level: usize,
) -> Result<(LerayOperator, usize)> {
    let quad: SphereQuadrature = build_quadrature(symbol.dim(), level)?;
    let op = LerayOperator::new(symbol, &quad, validation, &budgets.leray_config())?;
    Ok((op, quad.len()))
}

/// `C(2k-1, k+n-1)·(k+n-1)!`.
fn boundary_derivative_factor(k: usize, n: usize) -> f64 {
    let e = k + n - 1;
    crate::special::binomial(2 * k - 1, e) * crate::special::factorial(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{cubic_symbol, hyperbolic_symbol, wave_symbol};
    use approx::assert_relative_eq;

    fn small() -> Budgets {
        Budgets {
            quadrature_level: Some(48),
            min_level_n2: 64,
            ..Budgets::default()
        }
    }

    #[test]
    fn constants_identities() {
        for k in 1..=8 {
            let c = Constants::new(k);
            assert_relative_eq!(c.gamma_2k * 2.0 * k as f64, c.gamma_1p2k, max_relative = 1e-12);
        }
        let c1 = Constants::new(1);
        assert_relative_eq!(c1.psi_2k, 1.0 - EULER_GAMMA, max_relative = 1e-12);
        assert_relative_eq!(c1.first(Variant::Proof), 1.0, max_relative = 1e-12);
        assert_relative_eq!(c1.first(Variant::Theorem), 0.0, epsilon = 1e-15);
        assert_relative_eq!(Constants::new(2).third(Term3Coefficient::ProofConstant), -1.0 / 6.0);
        assert_relative_eq!(Constants::new(2).third(Term3Coefficient::Displayed), 1.0);
    }

    #[test]
    fn case_tags_and_guards() {
        assert_eq!(Case::of(3, 2), Case::A);
        assert_eq!(Case::of(3, 3), Case::B);
        assert_eq!(Case::of(2, 4), Case::B);
        let sf = SolutionFunctional::new(&wave_symbol(), &small(), Variant::Theorem).unwrap();
        let f = SpectralTestFunction::gaussian(&[0.0; 3], 1.0).unwrap();
        assert!(matches!(sf.eval_b(&f), Err(Error::CaseMismatch(_))));
        assert!(matches!(sf.eval_null(&f), Err(Error::CaseMismatch(_))));
        let g = SpectralTestFunction::gaussian(&[0.0; 2], 1.0).unwrap();
        assert!(matches!(sf.eval_a(&g), Err(Error::DimensionMismatch { .. })));
        let sf = SolutionFunctional::new(&hyperbolic_symbol(), &small(), Variant::Theorem).unwrap();
        assert!(matches!(sf.eval_a(&g), Err(Error::CaseMismatch(_))));
    }

    #[test]
    fn linear_in_the_test_function() {
        let f = SpectralTestFunction::gaussian(&[0.3, 0.0, -0.5], 1.0).unwrap();
        let g = SpectralTestFunction::gaussian(&[-0.2, 0.4, 0.1], 0.8).unwrap();
        let alpha = Complex64::new(1.5, -0.7);
        let h = f.scale(alpha).add(&g).unwrap();
        for sym in [wave_symbol(), cubic_symbol()] {
            let sf = SolutionFunctional::new(&sym, &small(), Variant::Theorem).unwrap();
            let (a, b, c) = (sf.eval(&f).unwrap(), sf.eval(&g).unwrap(), sf.eval(&h).unwrap());
            let lin = alpha * a + b;
            assert!((c - lin).norm() <= 1e-10 * lin.norm(), "{c} vs {lin}");
            if sf.case() == Case::B {
                let (a, b, c) = (sf.eval_null(&f).unwrap(), sf.eval_null(&g).unwrap(), sf.eval_null(&h).unwrap());
                // vanishes identically for this symbol, so only roundoff against |f̂(0)|·Σ|W| remains
                let lin = alpha * a + b;
                assert!((c - lin).norm() <= 1e-10 * (alpha.norm() * a.norm() + b.norm()) + 1e-10);
            }
        }
    }

    #[test]
    fn family_is_affine_in_lambda() {
        let sf = SolutionFunctional::new(&cubic_symbol(), &small(), Variant::Theorem).unwrap();
        let f = SpectralTestFunction::gaussian(&[0.5, -0.3, 0.8], 1.0).unwrap();
        let base = sf.eval_b(&f).unwrap();
        let null = sf.eval_null(&f).unwrap();
        assert_eq!(sf.eval_family(Complex64::new(0.0, 0.0), &f).unwrap(), base);
        for lam in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-3.0, 0.0)] {
            let v = sf.eval_family(lam, &f).unwrap();
            assert!((v - (base + lam * null)).norm() <= 1e-14 * v.norm().max(1.0));
        }
        let t = sf.eval_b_terms(&f).unwrap();
        assert_eq!(t.boundary_log, null);
    }

    #[test]
    fn variant_only_changes_first_coefficient() {
        let sf = SolutionFunctional::new(&cubic_symbol(), &small(), Variant::Theorem).unwrap();
        let f = SpectralTestFunction::gaussian(&[0.5, -0.3, 0.8], 1.0).unwrap();
        let a = sf.eval_b_terms(&f).unwrap();
        let b = sf.with_variant(Variant::Proof).eval_b_terms(&f).unwrap();
        assert_eq!(a.log_integral, b.log_integral);
        assert_eq!(a.boundary_log, b.boundary_log);
        let dc = b.c1 - a.c1;
        let expect = a.value + a.boundary_log * (dc * ORIENTATION * sf.prefactor());
        assert!((b.value - expect).norm() <= 1e-12 * b.value.norm().max(1.0));
    }

    #[test]
    fn budget_scaling() {
        let b = Budgets::default().scaled(0.5).unwrap();
        assert_eq!(b.min_level_n2, 512);
        assert_eq!(b.radial.panels_per_decade, 8);
        assert!(Budgets::default().scaled(0.0).is_err());
    }
}
