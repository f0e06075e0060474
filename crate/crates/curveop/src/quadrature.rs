//! Gauss quadrature from Jacobi matrices (Golub-Welsch).

use crate::error::{Error, Result};
use crate::weights::{SymTridiag, WeightSpec};

/// Nodes and positive weights of an `m`-point Gauss rule; exact for
/// polynomial integrands of degree `2m - 1`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss rule for a classical weight via eigendecomposition of the Jacobi
/// matrix; weight `i` is `mass * v_{0,i}^2` for the normalized eigenvector.
pub fn gauss_rule(w: &WeightSpec, m: usize) -> Result<QuadratureRule> {
    let j = w.jacobi_matrix(m)?;
    gauss_rule_from_tridiag(&j, w.mass())
}

/// Golub-Welsch applied to an arbitrary symmetric tridiagonal section.
pub fn gauss_rule_from_tridiag(j: &SymTridiag, mass: f64) -> Result<QuadratureRule> {
    let m = j.len();
    let dense = j.to_dense(m);
    let eig = nalgebra::SymmetricEigen::try_new(dense, 1e-14, 10_000)
        .ok_or(Error::QuadratureFailure)?;
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mass * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(QuadratureRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}
