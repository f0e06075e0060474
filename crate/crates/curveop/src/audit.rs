//! Aggregated verification of a computed basis: orthonormality under the
//! curve inner product, recurrence and commutator residuals, bandwidth and
//! parity audits against the proven bounds, and oracle span equivalence.

use crate::bounds::zero_bounds;
use crate::curve::row_to_part;
use crate::error::Result;
use crate::jacobi::{recurrence_residual, BlockJacobiPair};
use crate::lanczos::ConnectionMatrix;
use crate::multops::MultOps;
use crate::oracle::{monomial_oracle, span_defect};
use crate::quadrature::gauss_rule;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Support diagnostics for one column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnSupport {
    pub degree: usize,
    pub index: usize,
    pub column: usize,
    pub proven: (usize, usize),
    pub observed_sharp: (usize, usize),
    pub actual: Option<(usize, usize)>,
    /// Entries above threshold outside the proven bounds (hard failure).
    pub outside_proven: usize,
    /// Zero rows strictly inside the observed-sharp region (informational).
    pub interior_zeros: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub m: u8,
    pub d: usize,
    pub n_max: usize,
    pub nquad: usize,
    pub orthonormality_residual: f64,
    pub coefficient_orthogonality_residual: f64,
    pub recurrence_residual_x: f64,
    pub recurrence_residual_y: f64,
    pub commutator_max: f64,
    pub jacobi_block_asymmetry: f64,
    pub bandwidth_lambda: usize,
    pub bandwidth_mu: usize,
    pub bandwidth_expected: usize,
    pub proven_zero_violation_max: f64,
    pub proven_zero_violations: usize,
    pub parity_violations: usize,
    /// Minimum normalization entry (engine-built bases only).
    pub normalizer_min: Option<f64>,
    pub column_support: Vec<ColumnSupport>,
    pub oracle_condition: Option<f64>,
    pub span_defect_per_block: Option<Vec<f64>>,
    pub cross_degree_leakage: Option<f64>,
    pub wall_clock_per_degree: Vec<f64>,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct AuditOptions {
    pub nquad: Option<usize>,
    pub oracle: bool,
    /// Cap on oracle degrees (the dense Gram route is desk-scale only).
    pub oracle_n_max: usize,
    pub x_then_y_secondary: bool,
    pub tol_orthonormality: f64,
    pub tol_recurrence: f64,
    pub tol_commutator: f64,
    pub tol_span: f64,
    pub tol_leakage: f64,
    pub tol_zero: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions {
            nquad: None,
            oracle: false,
            oracle_n_max: 8,
            x_then_y_secondary: false,
            tol_orthonormality: 1e-10,
            tol_recurrence: 1e-10,
            tol_commutator: 1e-10,
            tol_span: 1e-8,
            tol_leakage: 1e-9,
            tol_zero: 1e-12,
        }
    }
}

/// Expected bandwidth of the connection matrix relative to its diagonal.
pub fn expected_bandwidth(m: u8, d: usize) -> usize {
    match m {
        1 => (d.saturating_sub(1)) * (d.saturating_sub(2)) / 2,
        2 => d * d.saturating_sub(3) / 2,
        _ => 0,
    }
}

/// Values of every computed OP at the quadrature nodes of one branch.
fn y_values(
    c: &ConnectionMatrix,
    ops: &MultOps,
    x: f64,
    y: f64,
) -> Result<Vec<f64>> {
    let jmax_flat = c.nrows() - 1;
    let jmax = match c.m {
        1 => jmax_flat,
        _ => row_to_part(2, jmax_flat).0.max(1),
    };
    let p = ops.pbasis_eval_unchecked(x, y, jmax)?;
    Ok(c.columns()
        .map(|col| (col.jmin..=col.jmax).map(|r| col.get(r) * p[r]).sum())
        .collect())
}

/// Quadrature Gram of the computed OPs; the residual against the identity is
/// the orthonormality defect in function space.
pub fn quadrature_gram(c: &ConnectionMatrix, ops: &MultOps, nquad: usize) -> Result<DMatrix<f64>> {
    let curve = ops.curve();
    let rule = gauss_rule(&curve.weight, nquad)?;
    let total = c.total_columns();
    let mut gram = DMatrix::zeros(total, total);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let branches: Vec<f64> = match curve.m {
            1 => vec![curve.phi.eval(x)],
            _ => {
                let s = curve.phi.eval(x).max(0.0).sqrt();
                vec![s, -s]
            }
        };
        for y in branches {
            let v = y_values(c, ops, x, y)?;
            for i in 0..total {
                for j in i..total {
                    gram[(i, j)] += w * v[i] * v[j];
                }
            }
        }
    }
    for i in 0..total {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    Ok(gram)
}

fn identity_residual(g: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - want).abs());
        }
    }
    worst
}

/// Default quadrature size covering products of the highest stored rows.
pub fn default_nquad(c: &ConnectionMatrix, d: usize) -> usize {
    let max_univariate = match c.m {
        1 => c.nrows().saturating_sub(1),
        _ => c.nrows() / 2,
    };
    max_univariate + d + 2
}

/// Runs every audit on a computed pipeline output.
pub fn audit(
    c: &ConnectionMatrix,
    pair: &BlockJacobiPair,
    ops: &MultOps,
    opts: &AuditOptions,
) -> Result<VerificationReport> {
    let curve = ops.curve();
    let m = curve.m;
    let d = curve.degree();
    let nquad = opts.nquad.unwrap_or_else(|| default_nquad(c, d));

    let gram = quadrature_gram(c, ops, nquad)?;
    let orthonormality = identity_residual(&gram);
    let coeff_orth = c.orthogonality_residual();
    let rec_x = recurrence_residual(c, pair, ops, false)?;
    let rec_y = recurrence_residual(c, pair, ops, true)?;
    let commutator = pair.commutator_max();

    let (lambda, mu) = c.bandwidths_from(d, opts.tol_zero);
    let expected = expected_bandwidth(m, d);

    let mut column_support = Vec::new();
    let mut outside_max: f64 = 0.0;
    let mut outside_count = 0usize;
    let mut parity_violations = 0usize;
    for col in c.columns() {
        let zb = zero_bounds(m, d, col.owner_degree, col.owner_index);
        let mut actual: Option<(usize, usize)> = None;
        let mut outside = 0usize;
        let mut interior_zeros = 0usize;
        for row in col.jmin..=col.jmax {
            let v = col.get(row).abs();
            if v > opts.tol_zero {
                actual = Some(match actual {
                    None => (row, row),
                    Some((lo, hi)) => (lo.min(row), hi.max(row)),
                });
                if row < zb.jmin || row > zb.jmax {
                    outside += 1;
                    outside_max = outside_max.max(v);
                }
                if let Some(part) = zb.parity {
                    if v > 1e-14 && row_to_part(2, row).1 != part {
                        parity_violations += 1;
                    }
                }
            } else if row >= zb.observed_jmin
                && row <= zb.observed_jmax
                && (zb.parity.is_none() || row_to_part(2, row).1 == zb.parity.unwrap())
            {
                interior_zeros += 1;
            }
        }
        outside_count += outside;
        column_support.push(ColumnSupport {
            degree: col.owner_degree,
            index: col.owner_index,
            column: col.column,
            proven: (zb.jmin, zb.jmax),
            observed_sharp: (zb.observed_jmin, zb.observed_jmax),
            actual,
            outside_proven: outside,
            interior_zeros,
        });
    }

    // normalization signs are pinned only by the Gram-Schmidt construction
    let normalizer_min = match c.source {
        crate::lanczos::BasisSource::Engine => Some(
            pair.normalizer_entries(m, d, opts.x_then_y_secondary)
                .into_iter()
                .fold(f64::INFINITY, f64::min),
        ),
        crate::lanczos::BasisSource::Explicit => None,
    };

    let (mut oracle_condition, mut span_per_block, mut leakage) = (None, None, None);
    if opts.oracle {
        let n_oracle = c.n_max().min(opts.oracle_n_max);
        let oracle = monomial_oracle(curve, n_oracle)?;
        oracle_condition = Some(oracle.cond_estimate);
        let rule = gauss_rule(&curve.weight, nquad)?;
        // cross-Grams of engine blocks against all oracle blocks
        let dims: Vec<usize> = (0..=n_oracle).map(|n| c.block(n).len()).collect();
        let mut cross: Vec<Vec<DMatrix<f64>>> = (0..=n_oracle)
            .map(|n| {
                (0..=n_oracle)
                    .map(|s| DMatrix::zeros(dims[n], oracle.monomials[s].len()))
                    .collect()
            })
            .collect();
        let col_offset: Vec<usize> = {
            let mut acc = 0;
            let mut v = Vec::new();
            for n in 0..=n_oracle {
                v.push(acc);
                acc += dims[n];
            }
            v
        };
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let branches: Vec<f64> = match m {
                1 => vec![curve.phi.eval(x)],
                _ => {
                    let s = curve.phi.eval(x).max(0.0).sqrt();
                    vec![s, -s]
                }
            };
            for y in branches {
                let ev = y_values(c, ops, x, y)?;
                let ov = oracle.eval_all(x, y);
                let mut o_off = 0;
                for s in 0..=n_oracle {
                    let odim = oracle.monomials[s].len();
                    for n in 0..=n_oracle {
                        let block = &mut cross[n][s];
                        for i in 0..dims[n] {
                            for j in 0..odim {
                                block[(i, j)] += w * ev[col_offset[n] + i] * ov[o_off + j];
                            }
                        }
                    }
                    o_off += odim;
                }
            }
        }
        let mut defects = Vec::with_capacity(n_oracle + 1);
        let mut leak: f64 = 0.0;
        for n in 0..=n_oracle {
            defects.push(span_defect(&cross[n][n]));
            for (s, block) in cross[n].iter().enumerate().take(n) {
                let _ = s;
                leak = leak.max(block.amax());
            }
        }
        span_per_block = Some(defects);
        leakage = Some(leak);
    }

    let mut checks = vec![
        CheckResult {
            name: "orthonormality".into(),
            value: orthonormality,
            tolerance: opts.tol_orthonormality,
            pass: orthonormality < opts.tol_orthonormality,
        },
        CheckResult {
            name: "recurrence_x".into(),
            value: rec_x,
            tolerance: opts.tol_recurrence,
            pass: rec_x < opts.tol_recurrence,
        },
        CheckResult {
            name: "recurrence_y".into(),
            value: rec_y,
            tolerance: opts.tol_recurrence,
            pass: rec_y < opts.tol_recurrence,
        },
        CheckResult {
            name: "commutator".into(),
            value: commutator,
            tolerance: opts.tol_commutator,
            pass: commutator < opts.tol_commutator,
        },
        CheckResult {
            name: "bandwidth".into(),
            value: lambda.max(mu) as f64,
            tolerance: expected as f64,
            pass: c.n_max() < d + 2 || (lambda <= expected && mu <= expected),
        },
        CheckResult {
            name: "proven_zero_bounds".into(),
            value: outside_max,
            tolerance: opts.tol_zero,
            pass: outside_count == 0,
        },
        CheckResult {
            name: "parity".into(),
            value: parity_violations as f64,
            tolerance: 0.0,
            pass: parity_violations == 0,
        },
        CheckResult {
            name: "normalizer_positivity".into(),
            value: normalizer_min.unwrap_or(1.0),
            tolerance: 0.0,
            pass: normalizer_min.map_or(true, |v| v > 0.0),
        },
    ];
    if let Some(defects) = &span_per_block {
        let worst = defects.iter().cloned().fold(0.0f64, f64::max);
        checks.push(CheckResult {
            name: "oracle_span".into(),
            value: worst,
            tolerance: opts.tol_span,
            pass: worst < opts.tol_span,
        });
        let lk = leakage.unwrap_or(0.0);
        checks.push(CheckResult {
            name: "oracle_degree_leakage".into(),
            value: lk,
            tolerance: opts.tol_leakage,
            pass: lk < opts.tol_leakage,
        });
    }

    Ok(VerificationReport {
        m,
        d,
        n_max: c.n_max(),
        nquad,
        orthonormality_residual: orthonormality,
        coefficient_orthogonality_residual: coeff_orth,
        recurrence_residual_x: rec_x,
        recurrence_residual_y: rec_y,
        commutator_max: commutator,
        jacobi_block_asymmetry: pair.max_asymmetry,
        bandwidth_lambda: lambda,
        bandwidth_mu: mu,
        bandwidth_expected: expected,
        proven_zero_violation_max: outside_max,
        proven_zero_violations: outside_count,
        parity_violations,
        normalizer_min,
        column_support,
        oracle_condition,
        span_defect_per_block: span_per_block,
        cross_degree_leakage: leakage,
        wall_clock_per_degree: c.block_seconds.clone(),
        checks,
    })
}
