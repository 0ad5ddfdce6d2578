//! Sparse multivariate polynomials over `f64` or `Complex64`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Exponent multi-index `α`.
pub type MultiIndex = Vec<u32>;

/// Scalar field of polynomial coefficients.
pub trait Coeff:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_f64(x: f64) -> Self;
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Total degree `|α|`.
pub fn order(alpha: &[u32]) -> usize {
    alpha.iter().map(|&a| a as usize).sum()
}

/// `θ^α`.
pub fn monomial(alpha: &[u32], x: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(x)
        .fold(1.0, |acc, (&a, &xi)| acc * xi.powi(a as i32))
}

/// `α!`.
pub fn multi_factorial(alpha: &[u32]) -> f64 {
    alpha
        .iter()
        .map(|&a| crate::special::factorial(a as usize))
        .product()
}

/// All multi-indices of length `n` with `|α| = m`, in lexicographic order.
pub fn multi_indices(n: usize, m: usize) -> Vec<MultiIndex> {
    fn rec(n: usize, m: usize, prefix: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if prefix.len() == n - 1 {
            prefix.push(m as u32);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=m).rev() {
            prefix.push(a as u32);
            rec(n, m - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, m, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Sparse polynomial `Σ c_α x^α` in `dim` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T: Coeff> {
    dim: usize,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Coeff> Polynomial<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, T::one())
    }

    /// The coordinate function `x_j`.
    pub fn variable(dim: usize, j: usize) -> Self {
        let mut alpha = vec![0; dim];
        alpha[j] = 1;
        let mut p = Self::zero(dim);
        p.add_term(alpha, T::one());
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, T)>) -> Self {
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            p.add_term(alpha, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: T) {
        assert_eq!(alpha.len(), self.dim, "multi-index length mismatch");
        let entry = self.terms.entry(alpha).or_insert_with(T::zero);
        *entry = *entry + c;
        self.terms.retain(|_, v| !v.is_zero());
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|a| order(a)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.terms.keys().map(|a| order(a)).min().unwrap_or(0)
    }

    pub fn coefficient(&self, alpha: &[u32]) -> T {
        self.terms.get(alpha).copied().unwrap_or_else(T::zero)
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coefficient(&vec![0; self.dim]) == T::one()
    }

    pub fn eval(&self, x: &[f64]) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, (alpha, &c)| acc + c * monomial(alpha, x))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_terms(self.dim, self.terms.iter().map(|(a, &c)| (a.clone(), c * s)))
    }

    /// `∂_j`.
    pub fn partial(&self, j: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (alpha, &c) in &self.terms {
            if alpha[j] > 0 {
                let mut beta = alpha.clone();
                beta[j] -= 1;
                out.add_term(beta, c * alpha[j] as f64);
            }
        }
        out
    }

    /// `∂^β`.
    pub fn derivative(&self, beta: &[u32]) -> Self {
        let mut out = self.clone();
        for (j, &b) in beta.iter().enumerate() {
            for _ in 0..b {
                out = out.partial(j);
            }
        }
        out
    }

    /// `x ↦ p(x / λ)`: scales each coefficient by `λ^{-|α|}`.
    pub fn dilate_argument(&self, lambda: f64) -> Self {
        Self::from_terms(
            self.dim,
            self.terms
                .iter()
                .map(|(a, &c)| (a.clone(), c * lambda.powi(-(order(a) as i32)))),
        )
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(self.dim), |acc, _| &acc * self)
    }

    /// Substitutes `x_j ↦ Σ_l m[j][l] y_l`.
    pub fn compose_linear(&self, m: &[Vec<f64>]) -> Self {
        let forms: Vec<Self> = (0..self.dim)
            .map(|j| {
                Self::from_terms(
                    self.dim,
                    (0..self.dim).map(|l| {
                        let mut a = vec![0; self.dim];
                        a[l] = 1;
                        (a, T::from_f64(m[j][l]))
                    }),
                )
            })
            .collect();
        let mut out = Self::zero(self.dim);
        for (alpha, &c) in &self.terms {
            let mut term = Self::constant(self.dim, c);
            for (j, &a) in alpha.iter().enumerate() {
                term = &term * &forms[j].pow(a);
            }
            out = &out + &term;
        }
        out
    }

    /// Homogeneous pieces of the restriction to the ray `r θ`:
    /// `p(rθ) = Σ_d c_d(θ) r^d`.
    pub fn ray_coefficients(&self, theta: &[f64]) -> Vec<T> {
        let mut out = vec![T::zero(); self.degree() + 1];
        for (alpha, &c) in &self.terms {
            let d = order(alpha);
            out[d] = out[d] + c * monomial(alpha, theta);
        }
        out
    }
}

impl Polynomial<f64> {
    pub fn to_complex(&self) -> Polynomial<Complex64> {
        Polynomial::from_terms(
            self.dim,
            self.terms
                .iter()
                .map(|(a, &c)| (a.clone(), Complex64::new(c, 0.0))),
        )
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl<T: Coeff> Add for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn add(self, rhs: Self) -> Polynomial<T> {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (a, &c) in &rhs.terms {
            out.add_term(a.clone(), c);
        }
        out
    }
}

impl<T: Coeff> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn sub(self, rhs: Self) -> Polynomial<T> {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (a, &c) in &rhs.terms {
            out.add_term(a.clone(), -c);
        }
        out
    }
}

impl<T: Coeff> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;
    fn mul(self, rhs: Self) -> Polynomial<T> {
        assert_eq!(self.dim, rhs.dim);
        let mut acc: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (a, &c) in &self.terms {
            for (b, &d) in &rhs.terms {
                let sum: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let e = acc.entry(sum).or_insert_with(T::zero);
                *e = *e + c * d;
            }
        }
        Polynomial::from_terms(self.dim, acc)
    }
}
