//! Banded operators representing multiplication by `x` and `y` in the
//! orthonormal basis spanning polynomials on the curve, plus evaluation of
//! that basis at points.

use crate::banded::BandedMatrix;
use crate::bounds::zero_bounds;
use crate::curve::{dim_vn, flat_row, CurveSpec, RowPart, ValidatedCurve};
use crate::error::{Error, Result};
use crate::semiclassical::{
    gram_phi, raise_and_semiclassical, semiclassical_buffer, weighted_mass, RaisingMatrix,
};
use crate::weights::SymTridiag;

/// Multiplication operators on a finite section, with the univariate data
/// they were assembled from.
#[derive(Debug, Clone)]
pub struct MultOps {
    curve: CurveSpec,
    /// Flat rows guaranteed usable by the requested degree budget.
    required_rows: usize,
    pub x: BandedMatrix,
    pub y: BandedMatrix,
    /// Raising entries `r_{k,n}` (m = 2 only; undefined when phi changes
    /// sign, which is allowed for m = 1).
    pub raising: Option<RaisingMatrix>,
    pub jw: SymTridiag,
    pub jphiw: Option<SymTridiag>,
    pub mass_w: f64,
    pub mass_phiw: Option<f64>,
}

impl MultOps {
    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    pub fn flat_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn required_rows(&self) -> usize {
        self.required_rows
    }

    pub fn op(&self, by_y: bool) -> &BandedMatrix {
        if by_y {
            &self.y
        } else {
            &self.x
        }
    }

    /// Values of all basis rows with degree index `j <= jmax` at an on-curve
    /// point, in flat row order.
    pub fn pbasis_eval(&self, x: f64, y: f64, jmax: usize) -> Result<Vec<f64>> {
        self.curve.check_on_curve(x, y)?;
        self.pbasis_eval_unchecked(x, y, jmax)
    }

    /// Same as [`MultOps::pbasis_eval`] without the on-curve check (for
    /// quadrature nodes constructed to be on the curve).
    pub fn pbasis_eval_unchecked(&self, x: f64, y: f64, jmax: usize) -> Result<Vec<f64>> {
        match self.curve.m {
            1 => {
                if jmax >= self.jw.len() {
                    return Err(Error::TruncationOverflow {
                        needed: jmax + 1,
                        exact: self.jw.len(),
                    });
                }
                Ok(self.jw.eval_orthonormal(x, jmax, self.mass_w))
            }
            2 => {
                let jphiw = self.jphiw.as_ref().expect("m = 2 carries J(phi w)");
                if jmax >= self.jw.len() || jmax >= jphiw.len() + 1 {
                    return Err(Error::TruncationOverflow {
                        needed: jmax + 1,
                        exact: self.jw.len().min(jphiw.len() + 1),
                    });
                }
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                let base = self.jw.eval_orthonormal(x, jmax, self.mass_w);
                let lifted = if jmax >= 1 {
                    jphiw.eval_orthonormal(x, jmax - 1, self.mass_phiw.unwrap())
                } else {
                    Vec::new()
                };
                let mut out = vec![0.0; 2 * jmax + 1];
                out[0] = base[0] * inv_sqrt2;
                for j in 1..=jmax {
                    out[flat_row(2, j, RowPart::Base)] = base[j] * inv_sqrt2;
                    out[flat_row(2, j, RowPart::Lifted)] = y * lifted[j - 1] * inv_sqrt2;
                }
                Ok(out)
            }
            _ => unreachable!(),
        }
    }
}

/// Flat rows the engine touches for degrees up to `n_max`: the deepest
/// proven column support two blocks past the budget, plus slack room.
fn flat_rows_needed(m: u8, d: usize, n_max: usize) -> usize {
    let probe = n_max + 2;
    let deepest = (1..=dim_vn(probe, m, d))
        .map(|k| zero_bounds(m, d, probe, k).jmax)
        .max()
        .unwrap_or(0);
    deepest + 2 * d
}

/// Assembles the multiplication operators for OP degrees up to `n_max`.
pub fn build_mult_ops(curve: &ValidatedCurve, n_max: usize) -> Result<MultOps> {
    let d = curve.degree();
    let spec = curve.spec().clone();
    match spec.m {
        1 => {
            let required = flat_rows_needed(1, d, n_max);
            let mu = required + 2 * d + 2;
            let jw = spec.weight.jacobi_matrix(mu)?;
            let x = jw.to_banded();
            let y = gram_phi(&jw, &spec.phi)?;
            let mass_w = spec.weight.mass();
            Ok(MultOps {
                curve: spec,
                required_rows: required,
                x,
                y,
                raising: None,
                jw,
                jphiw: None,
                mass_w,
                mass_phiw: None,
            })
        }
        2 => {
            let required = flat_rows_needed(2, d, n_max);
            let mu = required / 2 + 2 * d + 4;
            let jw_full = spec.weight.jacobi_matrix(mu + semiclassical_buffer(d))?;
            let (raising, jphiw) = raise_and_semiclassical(&jw_full, &spec.phi)?;
            let jw = jw_full.section(mu);
            let flat = 2 * mu - 1;

            let mut x = BandedMatrix::zeros(flat, flat, 2, 2);
            x.set(0, 0, jw.alpha(0));
            x.set(1, 0, jw.beta(0));
            x.set(0, 1, jw.beta(0));
            for j in 1..mu {
                let rb = flat_row(2, j, RowPart::Base);
                x.set(rb, rb, jw.alpha(j));
                if rb + 2 < flat {
                    x.set(rb + 2, rb, jw.beta(j));
                    x.set(rb, rb + 2, jw.beta(j));
                }
                let rl = flat_row(2, j, RowPart::Lifted);
                if rl < flat {
                    x.set(rl, rl, jphiw.alpha(j - 1));
                    if rl + 2 < flat {
                        x.set(rl + 2, rl, jphiw.beta(j - 1));
                        x.set(rl, rl + 2, jphiw.beta(j - 1));
                    }
                }
            }
            x.set_symmetric(true);

            // y couples the two parts through the raising entries; the
            // sub-diagonal raising block forces bandwidth 3 when d = 1.
            let band = (2 * d - 1).max(3);
            let mut y = BandedMatrix::zeros(flat, flat, band, band);
            for r in 1..mu {
                let col_lifted = flat_row(2, r, RowPart::Lifted);
                if col_lifted >= flat {
                    continue;
                }
                // <P_{j,0}, y P_{r,1}> = r_{r-1, j} for r-1 <= j <= r-1+d
                for j in (r - 1)..=(r - 1 + d).min(mu - 1) {
                    let row = flat_row(2, j, RowPart::Base);
                    let v = raising.r(r - 1, j);
                    if v != 0.0 {
                        y.set(row, col_lifted, v);
                        y.set(col_lifted, row, v);
                    }
                }
            }
            y.set_symmetric(true);

            let mass_w = spec.weight.mass();
            let mass_phiw = weighted_mass(&spec.weight, &spec.phi)?;
            Ok(MultOps {
                curve: spec,
                required_rows: required,
                x,
                y,
                raising: Some(raising),
                jw,
                jphiw: Some(jphiw),
                mass_w,
                mass_phiw: Some(mass_phiw),
            })
        }
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::curve_inner_product;
    use crate::poly::Poly;
    use crate::quadrature::gauss_rule;
    use crate::weights::WeightSpec;
    use rand::{Rng, SeedableRng};

    fn curve(m: u8, phi: Poly) -> ValidatedCurve {
        CurveSpec::new(m, phi, WeightSpec::Legendre)
            .unwrap()
            .validate(false)
            .unwrap()
    }

    fn fig2_quartic() -> Poly {
        // (2+x)(1-x^2)(5/4-x)
        &(&Poly::linear(2.0) * &Poly::new(vec![1.0, 0.0, -1.0])) * &Poly::new(vec![1.25, -1.0])
    }

    #[test]
    fn m1_linear_phi_y_equals_x() {
        let c = curve(1, Poly::new(vec![0.0, 1.0]));
        let ops = build_mult_ops(&c, 6).unwrap();
        for i in 0..ops.required_rows() {
            for j in i.saturating_sub(1)..=(i + 1).min(ops.flat_rows() - 1) {
                assert!((ops.x.get(i, j) - ops.y.get(i, j)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn m2_first_blocks_match_recurrences() {
        let c = curve(2, fig2_quartic());
        let ops = build_mult_ops(&c, 6).unwrap();
        // x P_00 block: alpha_0(w) on the diagonal, beta_0(w) below
        assert_eq!(ops.x.get(0, 0), 0.0); // Legendre alpha_0
        assert!((ops.x.get(1, 0) - ops.jw.beta(0)).abs() < 1e-15);
        assert_eq!(ops.x.get(2, 0), 0.0);
        // y P_00 = r_00 P_11
        let r = ops.raising.as_ref().unwrap();
        assert!((ops.y.get(2, 0) - r.r(0, 0)).abs() < 1e-15);
        assert_eq!(ops.y.get(1, 0), 0.0);
    }

    #[test]
    fn operators_symmetric_on_exact_rows() {
        for (m, phi) in [(1u8, Poly::new(vec![1.0, 1.0, -1.0, 1.0])), (2, fig2_quartic())] {
            let c = curve(m, phi);
            let ops = build_mult_ops(&c, 8).unwrap();
            assert!(ops.x.symmetry_defect() < 1e-13);
            assert!(ops.y.symmetry_defect() < 1e-13);
        }
    }

    #[test]
    fn commutator_vanishes_on_interior() {
        let c = curve(2, fig2_quartic());
        let ops = build_mult_ops(&c, 8).unwrap();
        let d = c.degree();
        let xd = ops.x.to_dense();
        let yd = ops.y.to_dense();
        let comm = &xd * &yd - &yd * &xd;
        let interior = ops.flat_rows() - 4 * d;
        let mut worst: f64 = 0.0;
        for i in 0..interior.min(40) {
            for j in 0..interior.min(40) {
                worst = worst.max(comm[(i, j)].abs());
            }
        }
        assert!(worst < 1e-11, "commutator {}", worst);
    }

    #[test]
    fn multiplication_fidelity_at_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for (m, phi) in [(1u8, Poly::new(vec![1.0, 1.0, -1.0, 1.0])), (2, fig2_quartic())] {
            let c = curve(m, phi.clone());
            let ops = build_mult_ops(&c, 6).unwrap();
            let jmax = 14;
            let rows = if m == 1 { jmax + 1 } else { 2 * jmax + 1 };
            for _ in 0..20 {
                let x: f64 = rng.gen_range(-0.95..0.95);
                let y = if m == 1 {
                    phi.eval(x)
                } else {
                    let s = phi.eval(x).sqrt();
                    if rng.gen_bool(0.5) {
                        s
                    } else {
                        -s
                    }
                };
                let vals = ops.pbasis_eval(x, y, jmax).unwrap();
                let (lo, up) = ops.x.bandwidths();
                let interior = rows - lo.max(up) - 1;
                // x * P_i = (X v)_i on interior rows (X symmetric)
                for i in 0..interior {
                    let mut acc = 0.0;
                    for j in i.saturating_sub(lo)..=(i + up).min(rows - 1) {
                        acc += ops.x.get(i, j) * vals[j];
                    }
                    assert!(
                        (acc - x * vals[i]).abs() < 1e-10 * vals[i].abs().max(1.0),
                        "x row {}",
                        i
                    );
                }
                let (lo, up) = ops.y.bandwidths();
                let interior = rows - lo.max(up) - 1;
                for i in 0..interior {
                    let mut acc = 0.0;
                    for j in i.saturating_sub(lo)..=(i + up).min(rows - 1) {
                        acc += ops.y.get(i, j) * vals[j];
                    }
                    assert!(
                        (acc - y * vals[i]).abs() < 1e-10 * vals[i].abs().max(1.0),
                        "y row {}",
                        i
                    );
                }
            }
        }
    }

    #[test]
    fn pbasis_rows_orthonormal_under_curve_inner_product() {
        let c = curve(2, fig2_quartic());
        let ops = build_mult_ops(&c, 10).unwrap();
        let jmax = 10usize;
        let nquad = jmax + c.degree() + 2;
        let rule = gauss_rule(&c.weight, nquad).unwrap();
        let rows = 2 * jmax + 1;
        let mut gram = vec![vec![0.0; rows]; rows];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let yv = c.phi.eval(x).max(0.0).sqrt();
            for s in [yv, -yv] {
                let vals = ops.pbasis_eval_unchecked(x, s, jmax).unwrap();
                for i in 0..rows {
                    for j in i..rows {
                        gram[i][j] += w * vals[i] * vals[j];
                    }
                }
            }
        }
        for i in 0..rows {
            for j in i..rows {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (gram[i][j] - want).abs() < 1e-11,
                    "gram ({}, {}) = {}",
                    i,
                    j,
                    gram[i][j]
                );
            }
        }
    }

    #[test]
    fn base_and_lifted_parts_orthogonal_by_symmetry() {
        let c = curve(2, Poly::new(vec![1.0, 0.0, -1.0]));
        let ops = build_mult_ops(&c, 6).unwrap();
        let f = {
            let ops = ops.clone();
            move |x: f64, y: f64| ops.pbasis_eval_unchecked(x, y, 4).unwrap()[3]
        };
        let g = {
            let ops = ops.clone();
            move |x: f64, y: f64| ops.pbasis_eval_unchecked(x, y, 4).unwrap()[4]
        };
        let v = curve_inner_product(c.spec(), &f, &g, 12).unwrap();
        assert!(v.abs() < 1e-13);
    }

    #[test]
    fn even_curve_checkerboard() {
        // even weight and even phi: zero diagonal of X, parity zeros of Y
        let phi = Poly::new(vec![2.0, 0.0, 0.0, 0.0, -1.0]); // 2 - x^4
        let c = curve(2, phi);
        assert!(c.is_even());
        let ops = build_mult_ops(&c, 8).unwrap();
        let n = ops.required_rows();
        for i in 0..n {
            assert!(ops.x.get(i, i).abs() < 1e-14);
        }
        // r_{k,n} = 0 for odd k + n
        let r = ops.raising.as_ref().unwrap();
        for k in 0..30 {
            for nn in k..=(k + 4) {
                if (k + nn) % 2 == 1 {
                    assert!(r.r(k, nn).abs() < 1e-14, "r({}, {}) = {}", k, nn, r.r(k, nn));
                }
            }
        }
    }

    #[test]
    fn off_curve_point_rejected() {
        let c = curve(2, Poly::new(vec![1.0, 0.0, -1.0]));
        let ops = build_mult_ops(&c, 4).unwrap();
        assert!(matches!(
            ops.pbasis_eval(0.5, 0.9, 3),
            Err(Error::PointOffCurve { .. })
        ));
    }
}
