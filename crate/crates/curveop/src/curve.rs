//! Planar algebraic curves `y^m = phi(x)` over a classical weight, their
//! inner product, dimension counts, and flat index maps.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quadrature::gauss_rule;
use crate::weights::{Support, WeightSpec};
use serde::{Deserialize, Serialize};

/// Tolerance for deciding whether a point lies on the curve.
pub const ON_CURVE_TOL: f64 = 1e-10;

/// A curve `y = phi(x)` (m = 1) or `y^2 = phi(x) > 0` (m = 2) over the
/// support of a classical weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub m: u8,
    pub phi: Poly,
    pub weight: WeightSpec,
}

impl CurveSpec {
    pub fn new(m: u8, phi: Poly, weight: WeightSpec) -> Result<Self> {
        if m != 1 && m != 2 {
            return Err(Error::IndexError(format!("m must be 1 or 2, got {}", m)));
        }
        if phi.degree() < 1 || phi.is_zero() {
            return Err(Error::IndexError(
                "phi must have degree at least 1".to_string(),
            ));
        }
        weight.validate()?;
        Ok(CurveSpec { m, phi, weight })
    }

    pub fn degree(&self) -> usize {
        self.phi.degree()
    }

    /// `max(d, m)`: where `dim V_n` saturates.
    pub fn saturation(&self) -> usize {
        self.degree().max(self.m as usize)
    }

    /// Validates positivity of `phi` for m = 2 by dense sampling: the Gauss
    /// nodes of a large rule plus interior uniform samples on bounded
    /// support. `strict` re-checks at ten times the density.
    pub fn validate(self, strict: bool) -> Result<ValidatedCurve> {
        if self.m == 2 {
            let factor = if strict { 10 } else { 1 };
            let bounded = matches!(self.weight.support(), Support::Interval(..));
            let gauss_n = if bounded { 200 * factor } else { 400 * factor };
            // node positions only; no need for the quadrature weights
            let nodes = self.weight.jacobi_matrix(gauss_n)?.eigenvalues()?;
            for &x in &nodes {
                let v = self.phi.eval(x);
                if v <= 0.0 {
                    return Err(Error::CurveInvalid { x, value: v });
                }
            }
            if let Support::Interval(a, b) = self.weight.support() {
                let n = 100 * factor;
                for i in 0..n {
                    // midpoint grid: phi may vanish at the endpoints themselves
                    let x = a + (b - a) * (i as f64 + 0.5) / n as f64;
                    let v = self.phi.eval(x);
                    if v <= 0.0 {
                        return Err(Error::CurveInvalid { x, value: v });
                    }
                }
            }
        }
        Ok(ValidatedCurve(self))
    }

    /// Whether both the weight and `phi` are even (checkerboard sparsity).
    pub fn is_even(&self) -> bool {
        self.weight.is_even() && self.phi.is_even()
    }

    /// Residual `|y^m - phi(x)|` of a point against the curve equation.
    pub fn residual(&self, x: f64, y: f64) -> f64 {
        let ym = if self.m == 1 { y } else { y * y };
        (ym - self.phi.eval(x)).abs()
    }

    pub fn check_on_curve(&self, x: f64, y: f64) -> Result<()> {
        let res = self.residual(x, y);
        let scale = self.phi.eval(x).abs().max(1.0);
        if res > ON_CURVE_TOL * scale {
            Err(Error::PointOffCurve { x, y, residual: res })
        } else {
            Ok(())
        }
    }
}

/// A curve that has passed positivity validation.
#[derive(Debug, Clone)]
pub struct ValidatedCurve(CurveSpec);

impl ValidatedCurve {
    pub fn spec(&self) -> &CurveSpec {
        &self.0
    }
}

impl std::ops::Deref for ValidatedCurve {
    type Target = CurveSpec;

    fn deref(&self) -> &CurveSpec {
        &self.0
    }
}

/// `dim V_n = min(n + 1, max(d, m))`.
pub fn dim_vn(n: usize, m: u8, d: usize) -> usize {
    (n + 1).min(d.max(m as usize))
}

/// Flat column index of the OP `(n, k)` in the degree-graded ordering:
/// the sum of `dim V_l` for `l < n` plus `k - 1`.
pub fn ell_index(n: usize, k: usize, m: u8, d: usize) -> Result<usize> {
    let dim = dim_vn(n, m, d);
    if k < 1 || k > dim {
        return Err(Error::IndexError(format!(
            "k = {} out of range 1..={} for degree {}",
            k, dim, n
        )));
    }
    let s = d.max(m as usize);
    let below = if n <= s {
        (0..n).map(|l| dim_vn(l, m, d)).sum::<usize>()
    } else {
        // all of 0..s-1 plus saturated blocks
        s * (s + 1) / 2 + (n - s) * s
    };
    Ok(below + k - 1)
}

/// Inverse of [`ell_index`]: flat column to `(n, k)`.
pub fn column_to_index(col: usize, m: u8, d: usize) -> (usize, usize) {
    let mut n = 0;
    let mut acc = 0;
    loop {
        let dim = dim_vn(n, m, d);
        if col < acc + dim {
            return (n, col - acc + 1);
        }
        acc += dim;
        n += 1;
    }
}

/// Which univariate family carries a flat row of the orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowPart {
    /// `p_j(w)` rows (all rows for m = 1; row 0 and odd rows for m = 2).
    Base,
    /// `y p_{j-1}(phi w)` rows (even rows `2j`, m = 2 only).
    Lifted,
}

/// Flat row of `P_{j, part}`: for m = 1 simply `j`; for m = 2 row 0 holds
/// `P_{0,0}`, row `2j - 1` holds `P_{j,0}` and row `2j` holds `P_{j,1}`.
pub fn flat_row(m: u8, j: usize, part: RowPart) -> usize {
    match (m, part) {
        (1, RowPart::Base) => j,
        (2, RowPart::Base) => {
            if j == 0 {
                0
            } else {
                2 * j - 1
            }
        }
        (2, RowPart::Lifted) => {
            assert!(j >= 1, "lifted part starts at j = 1");
            2 * j
        }
        _ => panic!("invalid (m, part) combination"),
    }
}

/// Inverse of [`flat_row`].
pub fn row_to_part(m: u8, row: usize) -> (usize, RowPart) {
    match m {
        1 => (row, RowPart::Base),
        2 => {
            if row == 0 {
                (0, RowPart::Base)
            } else if row % 2 == 1 {
                ((row + 1) / 2, RowPart::Base)
            } else {
                (row / 2, RowPart::Lifted)
            }
        }
        _ => panic!("invalid m"),
    }
}

/// Inner product on the curve: a Gauss sum against `w`, over both signed
/// branches of `sqrt(phi)` when m = 2.
pub fn curve_inner_product(
    curve: &CurveSpec,
    f: &dyn Fn(f64, f64) -> f64,
    g: &dyn Fn(f64, f64) -> f64,
    nquad: usize,
) -> Result<f64> {
    let rule = gauss_rule(&curve.weight, nquad.max(1))?;
    let mut acc = 0.0;
    match curve.m {
        1 => {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let y = curve.phi.eval(x);
                acc += w * f(x, y) * g(x, y);
            }
        }
        2 => {
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let y = curve.phi.eval(x).max(0.0).sqrt();
                acc += w * (f(x, y) * g(x, y) + f(x, -y) * g(x, -y));
            }
        }
        _ => unreachable!(),
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> CurveSpec {
        CurveSpec::new(2, Poly::new(vec![1.0, 0.0, -1.0]), WeightSpec::Legendre).unwrap()
    }

    #[test]
    fn endpoint_zeros_accepted() {
        // phi = 1 - x^2 vanishes only at the endpoints
        assert!(circle().validate(false).is_ok());
        assert!(circle().validate(true).is_ok());
    }

    #[test]
    fn interior_negativity_rejected() {
        let c = CurveSpec::new(2, Poly::new(vec![-2.0, 0.0, 1.0]), WeightSpec::Legendre).unwrap();
        match c.validate(false) {
            Err(Error::CurveInvalid { value, .. }) => assert!(value < 0.0),
            other => panic!("expected CurveInvalid, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn m1_has_no_positivity_constraint() {
        let c = CurveSpec::new(1, Poly::new(vec![-5.0, 0.0, 1.0]), WeightSpec::Legendre).unwrap();
        assert!(c.validate(false).is_ok());
    }

    #[test]
    fn dim_vn_table() {
        assert_eq!(dim_vn(0, 1, 3), 1);
        assert_eq!(dim_vn(5, 2, 3), 3);
        assert_eq!(dim_vn(4, 2, 1), 2);
        // non-decreasing, saturates at max(d, m)
        for (m, d) in [(1u8, 4usize), (2, 1), (2, 6)] {
            let mut prev = 0;
            for n in 0..20 {
                let dim = dim_vn(n, m, d);
                assert!(dim >= prev);
                prev = dim;
            }
            assert_eq!(prev, d.max(m as usize));
        }
    }

    #[test]
    fn ell_index_examples() {
        assert_eq!(ell_index(0, 1, 1, 3).unwrap(), 0);
        // sum of dims 1+2+3 plus k-1
        assert_eq!(ell_index(3, 2, 1, 3).unwrap(), 7);
        // closed form d n - d(d-1)/2 + k - 1 for n >= d >= m
        assert_eq!(ell_index(4, 1, 1, 3).unwrap(), 9);
        for n in 3..12 {
            for k in 1..=3 {
                assert_eq!(
                    ell_index(n, k, 1, 3).unwrap(),
                    3 * n - 3 + k - 1,
                    "closed form at ({}, {})",
                    n,
                    k
                );
            }
        }
        assert!(ell_index(2, 4, 1, 3).is_err());
    }

    #[test]
    fn column_roundtrip() {
        for (m, d) in [(1u8, 1usize), (1, 4), (2, 1), (2, 5)] {
            let mut col = 0;
            for n in 0..15 {
                for k in 1..=dim_vn(n, m, d) {
                    assert_eq!(ell_index(n, k, m, d).unwrap(), col);
                    assert_eq!(column_to_index(col, m, d), (n, k));
                    col += 1;
                }
            }
        }
    }

    #[test]
    fn flat_row_bijection() {
        for row in 0..40 {
            let (j, part) = row_to_part(2, row);
            assert_eq!(flat_row(2, j, part), row);
        }
        for j in 0..20 {
            assert_eq!(flat_row(1, j, RowPart::Base), j);
        }
    }

    #[test]
    fn inner_product_mass_normalization() {
        // <P_00, P_00> = 1 on any valid curve
        let c = circle();
        let f = move |_x: f64, _y: f64| 1.0 / (2.0 * 2.0f64).sqrt(); // p_0/sqrt(2) with mass 2
        let v = curve_inner_product(&c, &f, &f, 8).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn m1_quadratic_moment() {
        let c = CurveSpec::new(1, Poly::new(vec![0.0, 1.0]), WeightSpec::Legendre).unwrap();
        let id = |x: f64, _y: f64| x;
        let v = curve_inner_product(&c, &id, &id, 4).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn branch_symmetry_kills_mixed_terms() {
        // <f, g> = 0 when f is even in y and g is odd in y
        let c = circle();
        let f = |x: f64, _y: f64| 1.0 + x;
        let g = |_x: f64, y: f64| y;
        let v = curve_inner_product(&c, &f, &g, 16).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn off_curve_detection() {
        let c = circle();
        assert!(c.check_on_curve(0.6, 0.8).is_ok());
        assert!(matches!(
            c.check_on_curve(0.6, 0.9),
            Err(Error::PointOffCurve { .. })
        ));
    }
}
