//! Independent ground-truth oracles: Gram-Schmidt of the bivariate monomial
//! basis through a dense Cholesky factorization, and a discrete Stieltjes
//! recurrence. Both live on the quadrature side and never touch the banded
//! engine.

use crate::curve::CurveSpec;
#[cfg(test)]
use crate::curve::dim_vn;
use crate::error::{Error, Result};
use crate::quadrature::gauss_rule;
use crate::weights::SymTridiag;
use nalgebra::DMatrix;

/// Orthonormal polynomials obtained by orthogonalizing the degree-graded
/// monomial basis on the curve.
#[derive(Debug, Clone)]
pub struct OracleBasis {
    pub n_max: usize,
    /// `(x exponent, y exponent)` per degree block, in graded order.
    pub monomials: Vec<Vec<(u32, u32)>>,
    /// Column `l` holds the monomial coefficients of oracle OP `l`.
    pub coeffs: DMatrix<f64>,
    pub cond_estimate: f64,
    /// Orthonormality residual of the oracle itself under quadrature.
    pub orthonormality_residual: f64,
}

/// The monomial basis of degree `n` on the curve, in graded order.
pub fn monomial_basis(n: usize, m: u8, d: usize) -> Vec<(u32, u32)> {
    let s = d.max(m as usize);
    if n <= s - 1 || n == 0 {
        (0..=n as u32).map(|k| (n as u32 - k, k)).collect()
    } else if (m as usize) > d {
        (0..m as u32).map(|k| (n as u32 - k, k)).collect()
    } else {
        (1..=d as u32)
            .map(|k| (d as u32 - k, (n + k as usize - d) as u32))
            .collect()
    }
}

fn mono_eval(px: u32, py: u32, x: f64, y: f64) -> f64 {
    x.powi(px as i32) * y.powi(py as i32)
}

fn lower_inverse(l: &DMatrix<f64>) -> DMatrix<f64> {
    let nu = l.nrows();
    let mut linv = DMatrix::zeros(nu, nu);
    for col in 0..nu {
        linv[(col, col)] = 1.0 / l[(col, col)];
        for i in col + 1..nu {
            let mut s = 0.0;
            for k in col..i {
                s -= l[(i, k)] * linv[(k, col)];
            }
            linv[(i, col)] = s / l[(i, i)];
        }
    }
    linv
}

fn branches(curve: &CurveSpec, x: f64) -> Vec<f64> {
    match curve.m {
        1 => vec![curve.phi.eval(x)],
        _ => {
            let s = curve.phi.eval(x).max(0.0).sqrt();
            vec![s, -s]
        }
    }
}

/// Builds the oracle for degrees `0..=n_max`, gated on the (equilibrated)
/// Gram matrix condition estimate; callers shrink `n_max` on
/// [`Error::OracleInfeasible`].
///
/// The Cholesky solve is refined by re-orthogonalizing the computed OPs
/// through further (well-conditioned) Cholesky passes until the quadrature
/// Gram is the identity to near roundoff; each pass is an upper-triangular
/// recombination, so the degree-graded flags and leading signs are
/// untouched.
pub fn monomial_oracle(curve: &CurveSpec, n_max: usize) -> Result<OracleBasis> {
    let m = curve.m;
    let d = curve.degree();
    let monomials: Vec<Vec<(u32, u32)>> = (0..=n_max).map(|n| monomial_basis(n, m, d)).collect();
    let flat: Vec<(u32, u32)> = monomials.iter().flatten().copied().collect();
    let nu = flat.len();

    let nquad = n_max * d + 2 * d + 2;
    let rule = gauss_rule(&curve.weight, nquad)?;

    // basis values per branch: nu x nodes
    let mut vmats: Vec<DMatrix<f64>> = Vec::new();
    let nb = if m == 1 { 1 } else { 2 };
    for b in 0..nb {
        let mut v = DMatrix::zeros(nu, rule.len());
        for (q, &x) in rule.nodes.iter().enumerate() {
            let y = branches(curve, x)[b];
            for (i, &(px, py)) in flat.iter().enumerate() {
                v[(i, q)] = mono_eval(px, py, x, y);
            }
        }
        vmats.push(v);
    }
    let weighted_gram = |vals: &[DMatrix<f64>]| -> DMatrix<f64> {
        let n = vals[0].nrows();
        let mut g = DMatrix::zeros(n, n);
        for v in vals {
            let mut vw = v.clone();
            for (q, &w) in rule.weights.iter().enumerate() {
                vw.column_mut(q).scale_mut(w);
            }
            g += &vw * v.transpose();
        }
        0.5 * (&g + g.transpose())
    };
    let gram = weighted_gram(&vmats);

    // diagonal equilibration before factorization
    let scale: Vec<f64> = (0..nu).map(|i| 1.0 / gram[(i, i)].sqrt()).collect();
    let mut eq = gram;
    for i in 0..nu {
        for j in 0..nu {
            eq[(i, j)] *= scale[i] * scale[j];
        }
    }
    let eig: nalgebra::SymmetricEigen<f64, nalgebra::Dyn> =
        nalgebra::SymmetricEigen::try_new(eq.clone(), 1e-14, 10_000)
            .ok_or(Error::QuadratureFailure)?;
    let lmax = eig.eigenvalues.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = eig.eigenvalues.iter().cloned().fold(f64::MAX, f64::min);
    let cond = if lmin <= 0.0 { f64::INFINITY } else { lmax / lmin };
    if cond > 1e12 {
        return Err(Error::OracleInfeasible { cond });
    }
    let chol = nalgebra::Cholesky::new(eq).ok_or(Error::OracleInfeasible { cond })?;
    let mut coeffs = lower_inverse(&chol.l()).transpose();
    for i in 0..nu {
        for j in 0..nu {
            coeffs[(i, j)] *= scale[i];
        }
    }

    let mut residual = f64::INFINITY;
    for _ in 0..4 {
        let ops_vals: Vec<DMatrix<f64>> =
            vmats.iter().map(|v| coeffs.transpose() * v).collect();
        let g2 = weighted_gram(&ops_vals);
        residual = {
            let mut worst: f64 = 0.0;
            for i in 0..nu {
                for j in 0..nu {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g2[(i, j)] - want).abs());
                }
            }
            worst
        };
        if residual < 1e-13 {
            break;
        }
        let chol2 = nalgebra::Cholesky::new(g2).ok_or(Error::OracleInfeasible { cond })?;
        coeffs *= lower_inverse(&chol2.l()).transpose();
    }

    Ok(OracleBasis {
        n_max,
        monomials,
        coeffs,
        cond_estimate: cond,
        orthonormality_residual: residual,
    })
}

/// Largest degree budget at or below `n_max` that passes the oracle's
/// condition gate.
pub fn feasible_oracle(curve: &CurveSpec, n_max: usize) -> Result<OracleBasis> {
    let mut n = n_max;
    loop {
        match monomial_oracle(curve, n) {
            Err(Error::OracleInfeasible { cond }) if n > 1 => {
                let _ = cond;
                n -= 1;
            }
            other => return other,
        }
    }
}

impl OracleBasis {
    fn flat_monomials(&self) -> impl Iterator<Item = &(u32, u32)> {
        self.monomials.iter().flatten()
    }

    fn block_offset(&self, n: usize) -> usize {
        self.monomials[..n].iter().map(|b| b.len()).sum()
    }

    /// Values of every oracle OP at a point, degree-graded flat order.
    pub fn eval_all(&self, x: f64, y: f64) -> Vec<f64> {
        let vals: Vec<f64> = self
            .flat_monomials()
            .map(|&(px, py)| mono_eval(px, py, x, y))
            .collect();
        (0..self.coeffs.ncols())
            .map(|l| {
                let col = self.coeffs.column(l);
                vals.iter().zip(col.iter()).map(|(v, c)| v * c).sum()
            })
            .collect()
    }

    /// Values of the degree-`n` block at a point.
    pub fn eval_block(&self, n: usize, x: f64, y: f64) -> Vec<f64> {
        let off = self.block_offset(n);
        let all = self.eval_all(x, y);
        all[off..off + self.monomials[n].len()].to_vec()
    }
}

/// Orthogonality defect between a computed degree block and the oracle's:
/// the cross-Gram `M_n` is formed by quadrature and the defect is
/// `max |M_n^T M_n - I|`, near zero iff both blocks span the same space.
pub fn span_equivalence(
    c: &crate::lanczos::ConnectionMatrix,
    ops: &crate::multops::MultOps,
    oracle: &OracleBasis,
    n: usize,
    nquad: usize,
) -> Result<f64> {
    let curve = ops.curve();
    let rule = gauss_rule(&curve.weight, nquad)?;
    let dim = c.block(n).len();
    let odim = oracle.monomials[n].len();
    let mut cross = DMatrix::zeros(dim, odim);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let ys: Vec<f64> = match curve.m {
            1 => vec![curve.phi.eval(x)],
            _ => {
                let s = curve.phi.eval(x).max(0.0).sqrt();
                vec![s, -s]
            }
        };
        for y in ys {
            let jmax_flat = c.nrows() - 1;
            let jmax = match curve.m {
                1 => jmax_flat,
                _ => crate::curve::row_to_part(2, jmax_flat).0.max(1),
            };
            let p = ops.pbasis_eval_unchecked(x, y, jmax)?;
            let ev: Vec<f64> = c.block(n)
                .iter()
                .map(|col| (col.jmin..=col.jmax).map(|r| col.get(r) * p[r]).sum())
                .collect();
            let ov = oracle.eval_block(n, x, y);
            for i in 0..dim {
                for j in 0..odim {
                    cross[(i, j)] += w * ev[i] * ov[j];
                }
            }
        }
    }
    Ok(span_defect(&cross))
}

/// Orthogonality defect of the cross-Gram between two function families on
/// the curve: zero iff they span the same space with orthonormal columns.
pub fn span_defect(cross_gram: &DMatrix<f64>) -> f64 {
    let p = cross_gram.transpose() * cross_gram;
    let mut worst: f64 = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - want).abs());
        }
    }
    worst
}

/// Discrete Stieltjes procedure on a fixed discrete measure, returning the
/// orthonormal recurrence coefficients it induces.
pub fn stieltjes_recurrence(nodes: &[f64], weights: &[f64], n: usize) -> SymTridiag {
    assert_eq!(nodes.len(), weights.len());
    let total: f64 = weights.iter().sum();
    let mut p_prev = vec![0.0; nodes.len()];
    let mut p_cur: Vec<f64> = vec![1.0 / total.sqrt(); nodes.len()];
    let mut alpha = Vec::with_capacity(n + 1);
    let mut beta = Vec::with_capacity(n);
    for k in 0..=n {
        let a: f64 = nodes
            .iter()
            .zip(weights)
            .zip(&p_cur)
            .map(|((&x, &w), &p)| w * x * p * p)
            .sum();
        alpha.push(a);
        if k == n {
            break;
        }
        let mut v: Vec<f64> = nodes
            .iter()
            .zip(&p_cur)
            .zip(&p_prev)
            .map(|((&x, &p), &q)| {
                (x - a) * p - if k > 0 { beta[k - 1] } else { 0.0 } * q
            })
            .collect();
        let b: f64 = v
            .iter()
            .zip(weights)
            .map(|(&vi, &w)| w * vi * vi)
            .sum::<f64>()
            .sqrt();
        for vi in &mut v {
            *vi /= b;
        }
        beta.push(b);
        p_prev = std::mem::replace(&mut p_cur, v);
    }
    SymTridiag::new(alpha, beta)
}
