//! Classical weights and their symmetric tridiagonal Jacobi matrices.
//!
//! Recurrence coefficients use the orthonormal convention
//! `x p_n = beta_{n-1} p_{n-1} + alpha_n p_n + beta_n p_{n+1}` and come from
//! closed forms per family; they are the exact seed of everything downstream.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A classical weight family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum WeightSpec {
    /// `w(x) = 1` on `(-1, 1)`.
    Legendre,
    /// `w(x) = (1-x)^a (1+x)^b` on `(-1, 1)`, `a, b > -1`.
    Jacobi { a: f64, b: f64 },
    /// `w(x) = x^a e^{-x}` on `(0, inf)`, `a > -1`.
    Laguerre { a: f64 },
    /// `w(x) = e^{-x^2}` on `(-inf, inf)`.
    Hermite,
}

/// Support of a weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Interval(f64, f64),
    HalfLine,
    RealLine,
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightSpec::Legendre | WeightSpec::Hermite => Ok(()),
            WeightSpec::Jacobi { a, b } => {
                if a > -1.0 && b > -1.0 && a.is_finite() && b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidWeight(format!(
                        "Jacobi parameters must be > -1, got a = {}, b = {}",
                        a, b
                    )))
                }
            }
            WeightSpec::Laguerre { a } => {
                if a > -1.0 && a.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidWeight(format!(
                        "Laguerre parameter must be > -1, got a = {}",
                        a
                    )))
                }
            }
        }
    }

    pub fn support(&self) -> Support {
        match self {
            WeightSpec::Legendre | WeightSpec::Jacobi { .. } => Support::Interval(-1.0, 1.0),
            WeightSpec::Laguerre { .. } => Support::HalfLine,
            WeightSpec::Hermite => Support::RealLine,
        }
    }

    /// Total mass `<1, 1>_w`.
    pub fn mass(&self) -> f64 {
        match *self {
            WeightSpec::Legendre => 2.0,
            WeightSpec::Jacobi { a, b } => {
                // 2^{a+b+1} * Gamma(a+1) Gamma(b+1) / Gamma(a+b+2)
                ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
                    - ln_gamma(a + b + 2.0))
                .exp()
            }
            WeightSpec::Laguerre { a } => ln_gamma(a + 1.0).exp(),
            WeightSpec::Hermite => std::f64::consts::PI.sqrt(),
        }
    }

    /// True when the weight is an even function on a symmetric support.
    pub fn is_even(&self) -> bool {
        match *self {
            WeightSpec::Legendre | WeightSpec::Hermite => true,
            WeightSpec::Jacobi { a, b } => a == b,
            WeightSpec::Laguerre { .. } => false,
        }
    }

    /// Evaluates the weight function itself.
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            WeightSpec::Legendre => 1.0,
            WeightSpec::Jacobi { a, b } => (1.0 - x).powf(a) * (1.0 + x).powf(b),
            WeightSpec::Laguerre { a } => x.powf(a) * (-x).exp(),
            WeightSpec::Hermite => (-x * x).exp(),
        }
    }

    fn alpha(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            WeightSpec::Legendre | WeightSpec::Hermite => 0.0,
            WeightSpec::Jacobi { a, b } => {
                if n == 0 {
                    (b - a) / (a + b + 2.0)
                } else {
                    let s = 2.0 * nf + a + b;
                    (b * b - a * a) / (s * (s + 2.0))
                }
            }
            WeightSpec::Laguerre { a } => 2.0 * nf + a + 1.0,
        }
    }

    /// Orthonormal off-diagonal `beta_n = sqrt(b_{n+1})` where `b` is the
    /// monic recurrence coefficient.
    fn beta(&self, n: usize) -> f64 {
        let k = (n + 1) as f64; // monic index
        match *self {
            WeightSpec::Legendre => k / (4.0 * k * k - 1.0).sqrt(),
            WeightSpec::Jacobi { a, b } => {
                let s = 2.0 * k + a + b;
                let num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
                let den = s * s * (s + 1.0) * (s - 1.0);
                (num / den).sqrt()
            }
            WeightSpec::Laguerre { a } => (k * (k + a)).sqrt(),
            WeightSpec::Hermite => (k / 2.0).sqrt(),
        }
    }

    /// The leading `m`-section of the Jacobi matrix `J(w)`; every stored
    /// entry is exact.
    pub fn jacobi_matrix(&self, m: usize) -> Result<SymTridiag> {
        self.validate()?;
        if m == 0 {
            return Err(Error::SectionTooSmall("jacobi_matrix needs m >= 1".into()));
        }
        let alpha = (0..m).map(|n| self.alpha(n)).collect();
        let beta = (0..m.saturating_sub(1)).map(|n| self.beta(n)).collect();
        Ok(SymTridiag::new(alpha, beta))
    }
}

/// A symmetric tridiagonal matrix stored as its diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl SymTridiag {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        assert_eq!(beta.len() + 1, alpha.len(), "beta must be one shorter");
        SymTridiag { alpha, beta }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn alpha(&self, n: usize) -> f64 {
        self.alpha[n]
    }

    pub fn beta(&self, n: usize) -> f64 {
        self.beta[n]
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alpha
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn section(&self, m: usize) -> SymTridiag {
        assert!(m <= self.len());
        SymTridiag {
            alpha: self.alpha[..m].to_vec(),
            beta: self.beta[..m.saturating_sub(1)].to_vec(),
        }
    }

    pub fn to_banded(&self) -> crate::banded::BandedMatrix {
        let n = self.len();
        let mut out = crate::banded::BandedMatrix::zeros(n, n, 1, 1);
        for i in 0..n {
            out.set(i, i, self.alpha[i]);
        }
        for i in 0..n - 1 {
            out.set(i, i + 1, self.beta[i]);
            out.set(i + 1, i, self.beta[i]);
        }
        // the final row couples to the removed beta_{n-1}
        out.set_exact_rows(n.saturating_sub(1));
        out.set_symmetric(true);
        out
    }

    pub fn to_dense(&self, m: usize) -> nalgebra::DMatrix<f64> {
        let m = m.min(self.len());
        let mut out = nalgebra::DMatrix::zeros(m, m);
        for i in 0..m {
            out[(i, i)] = self.alpha[i];
        }
        for i in 0..m.saturating_sub(1) {
            out[(i, i + 1)] = self.beta[i];
            out[(i + 1, i)] = self.beta[i];
        }
        out
    }

    /// Eigenvalues in ascending order, by the implicit-shift QL iteration
    /// without eigenvector accumulation. Positivity sampling only needs the
    /// node positions, and skipping the vectors makes large sections cheap.
    pub fn eigenvalues(&self) -> crate::error::Result<Vec<f64>> {
        let n = self.len();
        let mut d = self.alpha.clone();
        let mut e = self.beta.clone();
        e.push(0.0);
        for l in 0..n {
            let mut iterations = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iterations += 1;
                if iterations > 64 {
                    return Err(crate::error::Error::QuadratureFailure);
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                if g < 0.0 {
                    r = -r;
                }
                g = d[m] - d[l] + e[l] / (g + r);
                let mut s = 1.0;
                let mut c = 1.0;
                let mut p = 0.0;
                let mut underflow = false;
                for i in (l..m).rev() {
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if underflow {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(d)
    }

    /// Values `p_0(x), ..., p_n(x)` of the orthonormal polynomials encoded by
    /// this Jacobi matrix, with `p_0 = 1/sqrt(mass)`.
    pub fn eval_orthonormal(&self, x: f64, n: usize, mass: f64) -> Vec<f64> {
        assert!(n < self.len(), "recurrence section too small");
        let mut out = Vec::with_capacity(n + 1);
        let p0 = 1.0 / mass.sqrt();
        out.push(p0);
        if n == 0 {
            return out;
        }
        out.push((x - self.alpha[0]) * p0 / self.beta[0]);
        for k in 1..n {
            let next =
                ((x - self.alpha[k]) * out[k] - self.beta[k - 1] * out[k - 1]) / self.beta[k];
            out.push(next);
        }
        out
    }
}

/// Natural log of the gamma function (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection formula
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}
