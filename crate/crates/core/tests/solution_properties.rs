mod common;

use common::{gaussian, line, rel, scale, test_set};
use fundsol_core::solution::{Budgets, Case, SolutionFunctional, Variant};
use fundsol_core::symbol::{hyperbolic_symbol, quartic_symbol, wave_symbol, HomogeneousSymbol};
use num_complex::Complex64;

fn functional(sym: &HomogeneousSymbol) -> SolutionFunctional {
    SolutionFunctional::new(sym, &Budgets::default(), Variant::Theorem).unwrap()
}

#[test]
fn delta_property_on_the_five_member_set_n2() {
    for sym in [hyperbolic_symbol(), quartic_symbol()] {
        let sf = functional(&sym);
        for f in test_set(2) {
            let target = f.value_at_zero().unwrap();
            let v = sf.eval(&f.apply_symbol(&sym).unwrap()).unwrap();
            assert!(rel(v, target) <= 2e-2, "{v} vs {target}");
            // realness: f real ⇒ ⟨s, Qf⟩ real
            assert!(v.im.abs() <= 1e-10 * v.norm());
        }
    }
}

#[test]
fn null_solution_annihilates_and_family_keeps_the_delta_property() {
    for sym in [hyperbolic_symbol(), quartic_symbol()] {
        let sf = functional(&sym);
        for f in test_set(2).into_iter().take(3) {
            let qf = f.apply_symbol(&sym).unwrap();
            assert!(sf.eval_null(&qf).unwrap().norm() <= 1e-2 * scale(&f));
            let target = f.value_at_zero().unwrap();
            for lam in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-3.0, 0.0)] {
                assert!(rel(sf.eval_family(lam, &qf).unwrap(), target) <= 2e-2);
            }
        }
    }
}

#[test]
fn case_a_homogeneity() {
    let sym = wave_symbol();
    let sf = functional(&sym);
    let f = gaussian(&[0.3, -0.2, 0.5], 1.0);
    let base = sf.eval_a(&f).unwrap();
    for lam in [0.5, 2.0] {
        let v = sf.eval_a(&f.dilate(lam).unwrap()).unwrap() * lam.powi(2);
        assert!(rel(v, base) <= 1e-3, "λ={lam}: {v} vs {base}");
    }
}

#[test]
fn case_b_quasi_homogeneity_and_slope_link() {
    let sym = quartic_symbol();
    let sf = functional(&sym);
    let k = sym.degree() as i32;
    let fs = [gaussian(&[1.0, 0.0], 1.0), gaussian(&[0.5, -0.7], 1.0), gaussian(&[-0.3, 0.9], 0.8)];
    let mut ratios = Vec::new();
    for f in &fs {
        let lams = [0.5, 1.0, 2.0];
        let ys: Vec<Complex64> = lams
            .iter()
            .map(|&l| sf.eval_b(&f.dilate(l).unwrap()).unwrap() * l.powi(k))
            .collect();
        let xs: Vec<f64> = lams.iter().map(|l: &f64| l.ln()).collect();
        let (a, b) = line(&xs, &ys);
        let predicted = a + b * 4f64.ln();
        let actual = sf.eval_b(&f.dilate(4.0).unwrap()).unwrap() * 4f64.powi(k);
        assert!(rel(predicted, actual) <= 1e-3, "{predicted} vs {actual}");
        let null = sf.eval_null(f).unwrap();
        assert!(null.norm() > 1e-6 * scale(f));
        ratios.push(b / null);
    }
    for r in &ratios[1..] {
        assert!(rel(*r, ratios[0]) <= 1e-2, "{ratios:?}");
    }
}

#[test]
fn symmetry_under_coordinate_swap() {
    // ξ₁ξ₂ is invariant under ξ₁ ↔ ξ₂
    let sym = hyperbolic_symbol();
    let sf = functional(&sym);
    let f = gaussian(&[0.6, -0.2], 1.0);
    let g = gaussian(&[-0.2, 0.6], 1.0);
    let (a, b) = (sf.eval(&f).unwrap(), sf.eval(&g).unwrap());
    assert!((a - b).norm() <= 1e-8 * a.norm().max(1e-12), "{a} vs {b}");
    // the wave symbol is invariant under ξ₁ ↔ ξ₂ and ξ₁ → −ξ₁
    let sym = wave_symbol();
    let sf = functional(&sym);
    let f = gaussian(&[0.5, 0.1, -0.3], 1.0);
    for c in [[0.1, 0.5, -0.3], [-0.5, 0.1, -0.3]] {
        let (a, b) = (sf.eval(&f).unwrap(), sf.eval(&gaussian(&c, 1.0)).unwrap());
        assert!((a - b).norm() <= 1e-8 * a.norm(), "{a} vs {b}");
    }
}

#[test]
fn evaluation_record_is_consistent() {
    let sym = hyperbolic_symbol();
    let sf = functional(&sym);
    assert_eq!(sf.case(), Case::B);
    let f = gaussian(&[0.5, -0.7], 1.0);
    let ev = sf.evaluate(&f).unwrap();
    assert_eq!(ev.value, sf.eval_b(&f).unwrap());
    assert_eq!(ev.null_value.unwrap(), sf.eval_null(&f).unwrap());
    let t = ev.terms.unwrap();
    assert_eq!(t.c3, -1.0 / 6.0);
}
