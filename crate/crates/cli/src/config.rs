use std::fs;
use std::path::{Path, PathBuf};

use fundsol_core::leray::Estimator;
use fundsol_core::solution::{Budgets, Variant};
use fundsol_core::symbol::{HomogeneousSymbol, SymbolFile};
use fundsol_core::testfn::{SpectralTestFunction, TestFunctionSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum VariantFlag {
    Theorem,
    Proof,
    Both,
}

impl VariantFlag {
    /// Variant the functional is built with; `both` evaluates the theorem form first.
    pub fn primary(self) -> Variant {
        match self {
            VariantFlag::Proof => Variant::Proof,
            _ => Variant::Theorem,
        }
    }

    pub fn variants(self) -> Vec<Variant> {
        match self {
            VariantFlag::Theorem => vec![Variant::Theorem],
            VariantFlag::Proof => vec![Variant::Proof],
            VariantFlag::Both => vec![Variant::Theorem, Variant::Proof],
        }
    }
}

/// Budget overrides; unset fields keep the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_level_n2: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimator: Option<Estimator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panels_per_decade: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decades: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graded_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub panel_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uniform_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    pub delta_tolerance: f64,
    pub null_tolerance: f64,
    pub scaling_tolerance: f64,
    pub oracle_tolerance: f64,
    pub family_lambdas: Vec<[f64; 2]>,
    pub dilations: Vec<f64>,
    /// Test functions for the scaling law; the first configured one when empty.
    pub scaling: Vec<TestFunctionSpec>,
    /// Test functions for the Laurent adjudication; the first configured one when empty.
    pub adjudication: Vec<TestFunctionSpec>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            delta_tolerance: 2e-2,
            null_tolerance: 2e-2,
            scaling_tolerance: 1e-3,
            oracle_tolerance: 2e-2,
            family_lambdas: vec![[1.0, 0.0], [0.0, 1.0], [-3.0, 0.0]],
            dilations: vec![0.5, 1.0, 2.0, 4.0],
            scaling: Vec::new(),
            adjudication: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsOptions {
    pub max_k: usize,
    pub tolerance: f64,
}

impl Default for ConstantsOptions {
    fn default() -> Self {
        Self {
            max_k: 8,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Symbol file, relative to the config file.
    pub symbol: Option<PathBuf>,
    pub test_functions: Vec<TestFunctionSpec>,
    pub budgets: BudgetConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<VariantFlag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub verify: VerifyOptions,
    pub constants: ConstantsOptions,
}

/// Command-line values that a config file may override.
#[derive(Debug, Clone, Default)]
pub struct FlagDefaults {
    pub variant: Option<VariantFlag>,
    pub budget_scale: Option<f64>,
    pub out: Option<PathBuf>,
}

/// A config with flags merged in and the symbol loaded.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub config_path: Option<PathBuf>,
    pub symbol_file: Option<SymbolFile>,
    pub variant: VariantFlag,
    pub budget_scale: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub budgets: Budgets,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(self, config_path: Option<&Path>, flags: &FlagDefaults) -> Result<Resolved, CliError> {
        let base = config_path.and_then(Path::parent).unwrap_or(Path::new("."));
        let symbol_file = match &self.symbol {
            Some(p) => {
                let full = base.join(p);
                let text =
                    fs::read_to_string(&full).map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
                Some(
                    serde_json::from_str::<SymbolFile>(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?,
                )
            }
            None => None,
        };
        let variant = self.variant.or(flags.variant).unwrap_or(VariantFlag::Theorem);
        let budget_scale = self.budget_scale.or(flags.budget_scale).unwrap_or(1.0);
        let seed = self.seed.unwrap_or(Budgets::default().seed);
        let out = self.out.as_ref().map(|o| base.join(o)).or_else(|| flags.out.clone());
        let budgets = build_budgets(&self.budgets, budget_scale, seed)?;
        for spec in self.test_functions.iter().chain(&self.verify.scaling).chain(&self.verify.adjudication) {
            if !(spec.sigma > 0.0 && spec.sigma <= 100.0) {
                return Err(CliError::Config(format!("test function sigma {} outside (0, 100]", spec.sigma)));
            }
        }
        Ok(Resolved {
            config: self,
            config_path: config_path.map(Path::to_path_buf),
            symbol_file,
            variant,
            budget_scale,
            seed,
            out,
            budgets,
        })
    }
}

fn check<T: PartialOrd + std::fmt::Display + Copy>(name: &str, v: Option<T>, lo: T, hi: T) -> Result<(), CliError> {
    match v {
        Some(x) if !(x >= lo && x <= hi) => Err(CliError::Config(format!("{name} = {x} outside [{lo}, {hi}]"))),
        _ => Ok(()),
    }
}

/// Applies overrides to the defaults, checks the documented ranges, then scales.
pub fn build_budgets(c: &BudgetConfig, scale: f64, seed: u64) -> Result<Budgets, CliError> {
    check("budget_scale", Some(scale), 0.125, 8.0)?;
    check("quadrature_level", c.quadrature_level, 16, 8192)?;
    check("min_level_n2", c.min_level_n2, 16, 8192)?;
    check("eta", c.eta, 1e-8, 1.0)?;
    check("rho", c.rho, 1e-8, 1.0)?;
    check("radius", c.radius, 1e-3, 1e4)?;
    check("fit_degree", c.fit_degree, 2, 16)?;
    check("fit_points", c.fit_points, 3, 512)?;
    check("grid_points", c.grid_points, 16, 1 << 16)?;
    check("panels_per_decade", c.panels_per_decade, 1, 128)?;
    check("decades", c.decades, 1, 16)?;
    check("graded_order", c.graded_order, 2, 32)?;
    check("panel_width", c.panel_width, 1e-3, 2.0)?;
    check("uniform_order", c.uniform_order, 2, 32)?;
    check("validation_points", c.validation_points, 1000, 10_000_000)?;
    let mut b = Budgets::default();
    macro_rules! set {
        ($($f:ident),*) => { $( if let Some(v) = c.$f { b.$f = v; } )* };
    }
    set!(min_level_n2, fit_degree, fit_points, grid_points, validation_points);
    b.quadrature_level = c.quadrature_level.or(b.quadrature_level);
    b.eta = c.eta.or(b.eta);
    b.rho = c.rho.or(b.rho);
    b.radius = c.radius.or(b.radius);
    b.estimator = c.estimator.or(b.estimator);
    if let Some(v) = c.panels_per_decade {
        b.radial.panels_per_decade = v;
    }
    if let Some(v) = c.decades {
        b.radial.decades = v;
    }
    if let Some(v) = c.graded_order {
        b.radial.graded_order = v;
    }
    if let Some(v) = c.panel_width {
        b.radial.panel_width = v;
    }
    if let Some(v) = c.uniform_order {
        b.radial.uniform_order = v;
    }
    if b.fit_points <= b.fit_degree {
        return Err(CliError::Config(format!(
            "fit_points = {} must exceed fit_degree = {}",
            b.fit_points, b.fit_degree
        )));
    }
    b.seed = seed;
    let b = if scale == 1.0 { b } else { b.scaled(scale)? };
    Ok(b)
}

impl Resolved {
    pub fn symbol(&self) -> Result<HomogeneousSymbol, CliError> {
        let file = self
            .symbol_file
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a `symbol` entry".into()))?;
        Ok(HomogeneousSymbol::from_file(file)?)
    }

    pub fn test_functions(&self) -> Result<Vec<SpectralTestFunction>, CliError> {
        build_all(&self.config.test_functions)
    }

    pub fn scaling_functions(&self) -> Result<Vec<SpectralTestFunction>, CliError> {
        self.or_first(&self.config.verify.scaling)
    }

    pub fn adjudication_functions(&self) -> Result<Vec<SpectralTestFunction>, CliError> {
        self.or_first(&self.config.verify.adjudication)
    }

    fn or_first(&self, specs: &[TestFunctionSpec]) -> Result<Vec<SpectralTestFunction>, CliError> {
        if specs.is_empty() {
            build_all(&self.config.test_functions[..self.config.test_functions.len().min(1)])
        } else {
            build_all(specs)
        }
    }
}

fn build_all(specs: &[TestFunctionSpec]) -> Result<Vec<SpectralTestFunction>, CliError> {
    specs.iter().map(|s| Ok(s.build()?)).collect()
}
