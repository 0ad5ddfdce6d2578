use std::f64::consts::PI;

use fundsol_core::leray::leray_transform;
use fundsol_core::oracle::{adjudicate, proof_constants, MomentSampler};
use fundsol_core::quadrature::{build_quadrature, sphere_measure};
use fundsol_core::solution::{resolve_level, Case, SolutionFunctional, Variant};
use fundsol_core::symbol::{validate_h, ValidationTolerances};
use fundsol_core::testfn::SpectralTestFunction;
use fundsol_core::Error;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{Resolved, VariantFlag};
use crate::report::{complex, sci, short_complex, Outcome, Provenance, Report, Status, Table};
use crate::{CliError, EXIT_ASSERTION, EXIT_DEGENERATE};

fn outcome(prov: Provenance, status: Status, tables: Vec<Table>, result: Value, files: Vec<(String, String)>) -> Outcome {
    let exit_code = match status {
        Status::Fail => EXIT_ASSERTION,
        _ => 0,
    };
    Outcome {
        report: Report {
            provenance: prov,
            status,
            tables,
            result,
        },
        files,
        exit_code,
        out: None,
    }
}

fn amplitude(f: &SpectralTestFunction) -> f64 {
    f.terms().iter().map(|t| t.amplitude.norm()).sum()
}

fn build_functional(r: &Resolved) -> Result<SolutionFunctional, CliError> {
    Ok(SolutionFunctional::new(&r.symbol()?, &r.budgets, r.variant.primary())?)
}

fn value_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn validate(r: &Resolved) -> Result<Outcome, CliError> {
    let sym = r.symbol()?;
    let prov = Provenance::new("validate", r);
    match validate_h(&sym, r.budgets.validation_points, &ValidationTolerances::default(), r.seed) {
        Ok(v) => {
            let mut t = Table::new("characteristic set", &["quantity", "value"]);
            t.row(&["hypothesis (H)".to_string(), "pass".into()]);
            t.row(&["empty characteristic set".to_string(), v.empty_characteristic_set.to_string()]);
            t.row(&["characteristic samples".to_string(), v.characteristic_samples.len().to_string()]);
            t.row(&[
                "min tangential gradient".to_string(),
                v.min_tangential_gradient_norm.map_or("-".into(), sci),
            ]);
            t.row(&["max tangential gradient".to_string(), sci(v.max_tangential_gradient_norm)]);
            t.row(&["sup |p| on sphere".to_string(), sci(v.sup_norm)]);
            t.row(&["window eps".to_string(), sci(v.epsilon_window)]);
            t.row(&["grid points".to_string(), v.grid_points.to_string()]);
            let result = json!({
                "passes_h": true,
                "empty_characteristic_set": v.empty_characteristic_set,
                "characteristic_sample_count": v.characteristic_samples.len(),
                "min_tangential_gradient_norm": v.min_tangential_gradient_norm,
                "max_tangential_gradient_norm": v.max_tangential_gradient_norm,
                "epsilon_window": v.epsilon_window,
                "epsilon_max": v.epsilon_max,
                "sup_norm": v.sup_norm,
                "zero_tolerance": v.zero_tolerance,
                "gradient_tolerance": v.gradient_tolerance,
                "grid_points": v.grid_points,
            });
            Ok(outcome(prov, Status::Pass, vec![t], result, Vec::new()))
        }
        Err(Error::DegenerateSymbol {
            min_norm,
            tolerance,
            directions,
        }) => {
            let mut t = Table::new("degenerate directions", &["direction", "|grad p|"]);
            for d in &directions {
                let s: Vec<String> = d.iter().map(|&x| format!("{:.6}", if x.abs() < 5e-7 { 0.0 } else { x })).collect();
                t.row(&[format!("({})", s.join(", ")), sci(sym.tangential_gradient_norm(d))]);
            }
            let result = json!({
                "passes_h": false,
                "min_tangential_gradient_norm": min_norm,
                "gradient_tolerance": tolerance,
                "directions": directions,
            });
            let mut out = outcome(prov, Status::Fail, vec![t], result, Vec::new());
            out.exit_code = EXIT_DEGENERATE;
            Ok(out)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn eval(r: &Resolved) -> Result<Outcome, CliError> {
    let sf = build_functional(r)?;
    let fs = r.test_functions()?;
    if fs.is_empty() {
        return Err(CliError::Config("eval needs at least one test function".into()));
    }
    let mut prov = Provenance::new("eval", r);
    prov.numerics = Some(sf.resolved().clone());
    let variants = r.variant.variants();
    let case_b = sf.case() == Case::B;

    let mut headers = vec!["#".to_string()];
    for v in &variants {
        headers.push(format!("<s,f> {}", v.tag()));
    }
    if case_b {
        headers.push("<s0,f>".into());
    }
    headers.push("R".into());
    let hdr: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut table = Table::new("functional values", &hdr);
    let mut entries = Vec::new();
    let mut files = Vec::new();
    let mut case_b_invoked = false;
    for (i, f) in fs.iter().enumerate() {
        let (ev, scan) = sf.evaluate_with_scan(f)?;
        case_b_invoked |= ev.terms.is_some();
        let values: Vec<(Variant, Complex64)> = variants
            .iter()
            .map(|&v| (v, ev.terms.as_ref().map_or(ev.value, |t| sf.variant_value(t, v))))
            .collect();
        let mut row = vec![i.to_string()];
        row.extend(values.iter().map(|(_, z)| complex(z.re, z.im)));
        if let Some(n) = ev.null_value {
            row.push(complex(n.re, n.im));
        }
        row.push(format!("{:.4}", ev.truncation_radius));
        table.row(&row);
        let name = format!("scan_{i}.csv");
        files.push((name.clone(), scan.to_csv()));
        entries.push(json!({
            "index": i,
            "test_function": r.config.test_functions[i],
            "values": values.iter().map(|(v, z)| json!({"variant": v, "value": value_json(*z)})).collect::<Vec<_>>(),
            "null_value": ev.null_value.map(value_json),
            "terms": ev.terms,
            "truncation_radius": ev.truncation_radius,
            "radial_nodes": ev.radial_nodes,
            "scan_csv": name,
        }));
    }
    let result = json!({
        "case": sf.case(),
        "case_b_machinery_invoked": case_b_invoked,
        "constants": sf.constants(),
        "evaluations": entries,
    });
    Ok(outcome(prov, Status::Ok, vec![table], result, files))
}

/// One row of the verification table.
#[derive(Debug, Clone, serde::Serialize)]
struct Check {
    check: String,
    subject: String,
    measured: f64,
    tolerance: f64,
    pass: bool,
}

impl Check {
    fn new(check: &str, subject: String, measured: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            subject,
            measured,
            tolerance,
            pass: measured <= tolerance,
        }
    }
}

/// Least-squares line through `(x, y)`; returns the largest deviation.
fn line_residual(xs: &[f64], ys: &[Complex64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<Complex64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: Complex64 = xs.iter().zip(ys).map(|(x, y)| (y - my) * (x - mx)).sum();
    let b = sxy / sxx;
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (y - (my + b * (x - mx))).norm())
        .fold(0.0, f64::max)
}

/// Deviation of `λᵏ⟨s, f_λ⟩` from the scaling law over the configured dilations.
pub fn scaling_error(sf: &SolutionFunctional, f: &SpectralTestFunction, dilations: &[f64]) -> Result<f64, CliError> {
    let k = sf.symbol().degree() as i32;
    let ys: Vec<Complex64> = dilations
        .iter()
        .map(|&l| Ok(sf.eval(&f.dilate(l)?)? * l.powi(k)))
        .collect::<Result<_, CliError>>()?;
    let size = ys.iter().map(|y| y.norm()).fold(0.0, f64::max).max(1e-300);
    Ok(match sf.case() {
        Case::A => {
            let base = ys[dilations.iter().position(|&l| l == 1.0).unwrap_or(0)];
            ys.iter().map(|y| (y - base).norm()).fold(0.0, f64::max) / base.norm().max(1e-300)
        }
        Case::B => {
            let xs: Vec<f64> = dilations.iter().map(|l| l.ln()).collect();
            line_residual(&xs, &ys) / size
        }
    })
}

pub fn verify(r: &Resolved) -> Result<Outcome, CliError> {
    let sf = build_functional(r)?;
    let sym = sf.symbol().clone();
    let opts = &r.config.verify;
    let fs = r.test_functions()?;
    if fs.is_empty() {
        return Err(CliError::Config("verify needs at least one test function".into()));
    }
    let mut prov = Provenance::new("verify", r);
    prov.numerics = Some(sf.resolved().clone());
    let mut checks = Vec::new();

    for (i, f) in fs.iter().enumerate() {
        let target = f
            .value_at_zero()
            .ok_or_else(|| CliError::Config(format!("test function {i} has no closed-form value at 0")))?;
        let qf = f.apply_symbol(&sym)?;
        let ev = sf.evaluate(&qf)?;
        let err = |v: Complex64| (v - target).norm() / target.norm();
        checks.push(Check::new("delta property", format!("f{i}"), err(ev.value), opts.delta_tolerance));
        if let Some(null) = ev.null_value {
            checks.push(Check::new(
                "null annihilation",
                format!("f{i}"),
                null.norm() / amplitude(f),
                opts.null_tolerance,
            ));
            for l in &opts.family_lambdas {
                let lam = Complex64::new(l[0], l[1]);
                checks.push(Check::new(
                    "family delta property",
                    format!("f{i}, lambda={}", short_complex(lam.re, lam.im)),
                    err(ev.value + lam * null),
                    opts.delta_tolerance,
                ));
            }
        }
    }

    for (i, f) in r.scaling_functions()?.iter().enumerate() {
        let name = match sf.case() {
            Case::A => "homogeneity",
            Case::B => "log-affine homogeneity",
        };
        checks.push(Check::new(
            name,
            format!("g{i}"),
            scaling_error(&sf, f, &opts.dilations)?,
            opts.scaling_tolerance,
        ));
    }

    let sampler = MomentSampler::for_functional(&sf)?;
    let mut adj_table = Table::new("Laurent adjudication", &["subject", "a0", "pole", "variant", "formula", "rel diff"]);
    let mut adjudications = Vec::new();
    for (i, f) in r.adjudication_functions()?.iter().enumerate() {
        let adj = adjudicate(&sf, &sampler, f)?;
        let floor = 1e-6 * amplitude(f);
        for c in &adj.comparisons {
            adj_table.row(&[
                format!("h{i}"),
                complex(adj.fit.a0.re, adj.fit.a0.im),
                adj.fit.pole_order.to_string(),
                c.variant.tag().to_string(),
                complex(c.formula_value.re, c.formula_value.im),
                sci(c.relative_difference),
            ]);
        }
        let primary = adj
            .comparisons
            .iter()
            .find(|c| c.variant == sf.variant())
            .expect("primary variant compared");
        let measured = (primary.formula_value - adj.fit.a0).norm() / adj.fit.a0.norm().max(floor);
        checks.push(Check::new(
            "oracle equivalence",
            format!("h{i}, {}", sf.variant().tag()),
            measured,
            opts.oracle_tolerance,
        ));
        let winner = match (sf.case(), adj.winner) {
            (Case::A, _) => "n/a (case A)".to_string(),
            (Case::B, None) => "indistinguishable".to_string(),
            (Case::B, Some(v)) => v.tag().to_string(),
        };
        if r.variant == VariantFlag::Both {
            adj_table.row(&[format!("h{i}"), "winner".into(), String::new(), winner.clone(), String::new(), String::new()]);
        }
        adjudications.push(json!({
            "subject": format!("h{i}"),
            "a0": value_json(adj.fit.a0),
            "a0_uncertainty": adj.fit.a0_uncertainty,
            "pole_order": adj.fit.pole_order,
            "regular_degree": adj.fit.regular_degree,
            "fit_residual": adj.fit.residual,
            "max_sample_error": adj.max_sample_error,
            "comparisons": adj.comparisons,
            "winner": winner,
        }));
    }

    let mut table = Table::new("checks", &["check", "subject", "measured", "tolerance", "result"]);
    for c in &checks {
        table.row(&[
            c.check.clone(),
            c.subject.clone(),
            sci(c.measured),
            sci(c.tolerance),
            if c.pass { "pass" } else { "FAIL" }.to_string(),
        ]);
    }
    let all = checks.iter().all(|c| c.pass);
    let result = json!({
        "case": sf.case(),
        "checks": checks,
        "adjudications": adjudications,
        "passed": all,
    });
    let status = if all { Status::Pass } else { Status::Fail };
    Ok(outcome(prov, status, vec![table, adj_table], result, Vec::new()))
}

pub fn constants(r: &Resolved) -> Result<Outcome, CliError> {
    let opts = &r.config.constants;
    if opts.max_k == 0 || opts.max_k > 16 {
        return Err(CliError::Config(format!("constants.max_k = {} outside [1, 16]", opts.max_k)));
    }
    let prov = Provenance::new("constants", r);
    let mut table = Table::new("proof constants", &["k", "h(0)", "h'(0)", "m(0)", "m'(0)", "m''(0)", "max rel diff", "result"]);
    let mut rows = Vec::new();
    let mut all = true;
    for k in 1..=opts.max_k {
        let c = proof_constants(k)?;
        let d = c.max_relative_discrepancy();
        let pass = d <= opts.tolerance;
        all &= pass;
        let v = c.closed;
        table.row(&[
            k.to_string(),
            sci(v.h0),
            sci(v.h1),
            sci(v.m0),
            sci(v.m1),
            sci(v.m2),
            sci(d),
            if pass { "pass" } else { "FAIL" }.to_string(),
        ]);
        rows.push(json!({"constants": c, "max_relative_discrepancy": d, "pass": pass}));
    }
    let status = if all { Status::Pass } else { Status::Fail };
    let result = json!({"tolerance": opts.tolerance, "rows": rows});
    Ok(outcome(prov, status, vec![table], result, Vec::new()))
}

pub fn leray(r: &Resolved) -> Result<Outcome, CliError> {
    let sym = r.symbol()?;
    let n = sym.dim();
    let val = validate_h(&sym, r.budgets.validation_points, &ValidationTolerances::default(), r.seed)?;
    let level = resolve_level(n, &val, &r.budgets);
    let quad = build_quadrature(n, level)?;
    let prof = leray_transform(&sym, |_| 1.0, &quad, &val, &r.budgets.leray_config())?;
    let prov = Provenance::new("leray", r);
    let coarea = prof.coarea_integral();
    let measure = sphere_measure(n);
    let mut table = Table::new("profile of h = 1", &["quantity", "value"]);
    table.row(&["estimator".to_string(), prof.estimator.tag().to_string()]);
    table.row(&["sphere level".to_string(), level.to_string()]);
    table.row(&["window eps".to_string(), sci(prof.eps)]);
    table.row(&["fit residual".to_string(), sci(prof.fit_residual)]);
    for u in [-prof.eps, 0.0, prof.eps] {
        table.row(&[format!("L({u:.4e})"), sci(prof.fit_value(u)?)]);
    }
    table.row(&["coarea integral".to_string(), sci(coarea)]);
    table.row(&["sphere measure".to_string(), sci(measure)]);
    table.row(&["relative gap".to_string(), sci((coarea - measure).abs() / measure)]);
    let result = json!({
        "estimator": prof.estimator,
        "level": level,
        "eps": prof.eps,
        "eta": prof.eta,
        "fit_coefficients": prof.fit_coeffs,
        "fit_residual": prof.fit_residual,
        "coarea_integral": coarea,
        "sphere_measure": measure,
        "two_pi": 2.0 * PI,
        "profile_csv": "profile.csv",
    });
    Ok(outcome(prov, Status::Ok, vec![table], result, vec![("profile.csv".into(), prof.to_csv())]))
}
