#![allow(dead_code)]

use fundsol_core::poly::Polynomial;
use fundsol_core::testfn::SpectralTestFunction;
use num_complex::Complex64;

pub fn gaussian(center: &[f64], sigma: f64) -> SpectralTestFunction {
    SpectralTestFunction::gaussian(center, sigma).unwrap()
}

/// Five test functions: three centers, a narrower width, a polynomial prefactor.
pub fn test_set(n: usize) -> Vec<SpectralTestFunction> {
    let centers: Vec<Vec<f64>> = if n == 3 {
        vec![vec![0.0; 3], vec![1.0, 0.0, 0.0], vec![0.0, -1.0, 1.0], vec![0.4, 0.3, -0.2]]
    } else {
        vec![vec![0.0; 2], vec![1.0, 0.0], vec![0.5, -0.7], vec![-0.3, 0.2]]
    };
    let mut out: Vec<SpectralTestFunction> = centers[..3].iter().map(|c| gaussian(c, 1.0)).collect();
    out.push(gaussian(&centers[3], 0.7));
    let mut q = Polynomial::constant(n, 2.0);
    let mut e = vec![0; n];
    e[0] = 2;
    q.add_term(e, 1.0);
    out.push(gaussian(&centers[3], 1.0).times_polynomial(&q));
    out
}

/// `Σ|a_j|`, a bound for `sup|f|` of the plain Gaussian sums used here.
pub fn scale(f: &SpectralTestFunction) -> f64 {
    f.terms().iter().map(|t| t.amplitude.norm()).sum()
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Least-squares line through `(x_i, y_i)`; returns intercept and slope.
pub fn line(xs: &[f64], ys: &[Complex64]) -> (Complex64, Complex64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my: Complex64 = ys.iter().sum::<Complex64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: Complex64 = xs.iter().zip(ys).map(|(x, y)| (y - my) * (x - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}
