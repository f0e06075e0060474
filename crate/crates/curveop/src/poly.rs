//! Dense univariate polynomials in the monomial basis.

use serde::{Deserialize, Serialize};
use std::ops::Mul;

/// A real polynomial `c_0 + c_1 x + ... + c_d x^d` with trimmed coefficients,
/// so the leading coefficient is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial from monomial coefficients `c_0..c_d`, trimming
    /// trailing zeros.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// `x + shift`, convenient for building products of linear factors.
    pub fn linear(shift: f64) -> Self {
        Poly::new(vec![shift, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Index of the last nonzero coefficient (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// True when every odd-power coefficient vanishes.
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn constant_eval() {
        let p = Poly::constant(1.0);
        assert_eq!(p.eval(0.3), 1.0);
        assert_eq!(p.degree(), 0);
    }

    #[test]
    fn cubic_eval() {
        // x^3 - x^2 + x + 1 at x = 1
        let p = Poly::new(vec![1.0, 1.0, -1.0, 1.0]);
        assert_eq!(p.eval(1.0), 2.0);
    }

    #[test]
    fn even_sextic_root() {
        // x^6 - x^4 - x^2 + 1 vanishes at x = -1
        let p = Poly::new(vec![1.0, 0.0, -1.0, 0.0, -1.0, 0.0, 1.0]);
        assert_eq!(p.eval(-1.0), 0.0);
        assert!(p.is_even());
    }

    #[test]
    fn horner_matches_direct_summation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let deg = rng.gen_range(0..9);
            let coeffs: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let p = Poly::new(coeffs.clone());
            let x: f64 = rng.gen_range(-2.0..2.0);
            let direct: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * x.powi(k as i32))
                .sum();
            let scale = direct.abs().max(1.0);
            assert!((p.eval(x) - direct).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn trimming_keeps_leading_nonzero() {
        let p = Poly::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert_eq!(p.coeffs(), &[1.0, 2.0]);
        assert!(!p.is_zero());
        assert!(Poly::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn product_of_linear_factors() {
        // (2+x)(1-x^2)(5/4-x) expands with degree 4 and leading coefficient +1.
        let phi = &(&Poly::linear(2.0) * &Poly::new(vec![1.0, 0.0, -1.0]))
            * &Poly::new(vec![1.25, -1.0]);
        assert_eq!(phi.degree(), 4);
        assert!((phi.eval(0.0) - 2.5).abs() < 1e-15);
        assert!((phi.eval(1.0) - 0.0).abs() < 1e-15);
    }
}
