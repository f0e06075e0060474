//! The Gram matrix `phi(J(w))`, the banded raising matrix, and the Jacobi
//! matrix of the modified weight `phi * w`.

use crate::banded::{cholesky_banded, BandedMatrix};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quadrature::gauss_rule;
use crate::weights::{SymTridiag, WeightSpec};

/// Upper-triangular banded matrix with bandwidths `(0, d)` relating the
/// orthonormal families of `w` and `phi * w`; entry `(k, n)` is the
/// connection coefficient `r_{k,n}`.
#[derive(Debug, Clone)]
pub struct RaisingMatrix(BandedMatrix);

impl RaisingMatrix {
    pub fn r(&self, k: usize, n: usize) -> f64 {
        if k >= self.0.nrows() || n >= self.0.ncols() {
            return 0.0;
        }
        self.0.get(k, n)
    }

    pub fn matrix(&self) -> &BandedMatrix {
        &self.0
    }

    /// Columns with all contributing entries exact.
    pub fn exact_cols(&self) -> usize {
        self.0.exact_rows()
    }
}

/// Evaluates `phi(J)` on the section carried by `j`, a symmetric banded
/// matrix with bandwidths `(d, d)` and `exact_rows = len - d`.
pub fn gram_phi(j: &SymTridiag, phi: &Poly) -> Result<BandedMatrix> {
    let m = j.len();
    let d = phi.degree();
    if m < d + 2 {
        return Err(Error::SectionTooSmall(format!(
            "phi(J) needs a section of at least deg(phi) + 2 = {}, got {}",
            d + 2,
            m
        )));
    }
    let jb = j.to_banded();
    let mut acc = BandedMatrix::zeros(m, m, d, d);
    for i in 0..m {
        acc.set(i, i, phi.coeff(0));
    }
    // accumulate c_k J^k with banded products
    let mut power = {
        let mut id = BandedMatrix::zeros(m, m, 0, 0);
        for i in 0..m {
            id.set(i, i, 1.0);
        }
        id
    };
    for k in 1..=d {
        power = jb.mul_banded(&power);
        let c = phi.coeff(k);
        if c != 0.0 {
            for i in 0..m {
                let j0 = i.saturating_sub(k);
                let j1 = (i + k).min(m - 1);
                for jj in j0..=j1 {
                    let v = acc.get(i, jj) + c * power.get(i, jj);
                    acc.set(i, jj, v);
                }
            }
        }
    }
    acc.set_exact_rows(m.saturating_sub(d));
    acc.set_symmetric(true);
    Ok(acc)
}

/// Section buffer needed so that `raise_and_semiclassical` on a `(m + buf)`
/// section delivers `m` exact rows of both outputs.
pub fn semiclassical_buffer(d: usize) -> usize {
    (2 * d).max(d + 2)
}

/// Computes the raising matrix `R = L^T` from the Cholesky factor of
/// `phi(J(w))` and the Jacobi matrix of the weight `phi * w`.
///
/// `J(phi w)` is the similarity transform `R J R^{-1}` restricted to its
/// tridiagonal support. The sub-diagonal comes from the locally stable
/// product formula `beta_i L_{i+1,i+1} / L_{i,i}`; the super-diagonal is
/// recomputed through an independent row-wise route purely as an asymmetry
/// check of the transform. The check tolerance is 1e-10: the row route
/// cancels three near-equal terms, so its noise floor sits at
/// `eps * cond(phi(J))`, which passes 1e-11 only for mildly conditioned
/// curves. The binding accuracy statement is the a-posteriori quadrature
/// orthonormality of the resulting OPs, which the tests enforce at 1e-10.
pub fn raise_and_semiclassical(j: &SymTridiag, phi: &Poly) -> Result<(RaisingMatrix, SymTridiag)> {
    let mj = j.len();
    let d = phi.degree();
    let buf = semiclassical_buffer(d);
    if mj <= buf {
        return Err(Error::SectionTooSmall(format!(
            "semiclassical transform needs a section larger than {}, got {}",
            buf, mj
        )));
    }
    let m_out = mj - buf;

    let gram = gram_phi(j, phi)?;
    let l = cholesky_banded(&gram).map_err(|e| match e {
        Error::NotPositiveDefinite { index, pivot } => Error::PhiNotPositive { index, pivot },
        other => other,
    })?;
    let mut r = l.transpose();
    r.set_exact_rows(l.exact_rows());

    let rr = |k: usize, n: usize| -> f64 {
        if n >= k && n - k <= d && k < r.nrows() && n < r.ncols() {
            r.get(k, n)
        } else {
            0.0
        }
    };

    let mut alpha_out = Vec::with_capacity(m_out);
    let mut beta_out = Vec::with_capacity(m_out - 1);
    let mut beta_prev = 0.0;
    for i in 0..m_out {
        let rii = rr(i, i);
        let ai = j.alpha(i);
        let bi = j.beta(i);
        // diagonal of R J R^{-1}
        let num_a = if i == 0 {
            bi * rr(i, i + 1)
        } else {
            bi * rr(i, i + 1) - beta_prev * rr(i - 1, i)
        };
        let alpha_i = ai + num_a / rii;
        alpha_out.push(alpha_i);

        if i + 1 < m_out {
            // sub-diagonal route: products and ratios of Cholesky entries
            let beta_i = bi * rr(i + 1, i + 1) / rii;
            // independent super-diagonal route through row i of (R J) R^{-1}
            let t = rii * bi + rr(i, i + 1) * j.alpha(i + 1) + rr(i, i + 2) * j.beta(i + 1);
            let proj = if i == 0 {
                alpha_i * rr(i, i + 1)
            } else {
                beta_prev * rr(i - 1, i + 1) + alpha_i * rr(i, i + 1)
            };
            let beta_upper = (t - proj) / rr(i + 1, i + 1);
            let scale = beta_i.abs().max(1.0);
            let defect = (beta_upper - beta_i).abs();
            if defect > 1e-10 * scale {
                return Err(Error::NumericalCheck(format!(
                    "similarity transform asymmetry {:.3e} at index {} exceeds 1e-10",
                    defect, i
                )));
            }
            if beta_i <= 0.0 {
                return Err(Error::PhiNotPositive {
                    index: i,
                    pivot: beta_i,
                });
            }
            beta_out.push(beta_i);
            beta_prev = beta_i;
        }
    }

    Ok((RaisingMatrix(r), SymTridiag::new(alpha_out, beta_out)))
}

/// `<1, 1>_{phi w}` by Gauss quadrature of the base weight.
pub fn weighted_mass(w: &WeightSpec, phi: &Poly) -> Result<f64> {
    let q = gauss_rule(w, phi.degree() / 2 + 2)?;
    Ok(q.integrate(|x| phi.eval(x)))
}
