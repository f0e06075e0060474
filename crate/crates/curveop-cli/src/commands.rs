//! Implementations of the build / verify / eval / scaling commands.

use crate::config::RunConfig;
use crate::mm::{self, Triplets};
use curveop::audit::{audit, AuditOptions};
use curveop::formulas::connection_by_formulas;
use curveop::lanczos::{max_column_deviation, LanczosOptions};
use curveop::oracle::feasible_oracle;
use curveop::{
    zero_bounds, ConnectionMatrix, CurveSpec, Pipeline, PipelineOptions, Poly,
};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Entries below this magnitude are omitted from the sparsity-pattern file
/// (and counted), matching the log-magnitude plots the file feeds.
const SPARSITY_THRESHOLD: f64 = 1e-13;

pub fn lanczos_options(config: &RunConfig) -> LanczosOptions {
    LanczosOptions {
        reorth: config.reorth,
        reorth_passes: 2,
        x_then_y_secondary: config.x_then_y_secondary,
        allocation_slack: 0,
        breakdown_tol: config.tolerances.breakdown,
    }
}

pub fn audit_options(config: &RunConfig) -> AuditOptions {
    AuditOptions {
        nquad: config.nquad,
        oracle: config.oracle,
        oracle_n_max: 8,
        x_then_y_secondary: config.x_then_y_secondary,
        tol_orthonormality: config.tolerances.orthonormality,
        tol_recurrence: config.tolerances.recurrence,
        tol_commutator: config.tolerances.commutator,
        tol_span: config.tolerances.span,
        tol_leakage: config.tolerances.leakage,
        tol_zero: config.tolerances.zero,
    }
}

pub fn run_pipeline(config: &RunConfig) -> Result<Pipeline, String> {
    let curve = config.curve().map_err(|e| e.to_string())?;
    let opts = PipelineOptions {
        lanczos: lanczos_options(config),
        explicit_shortcut: config.explicit_shortcut,
        strict_validation: config.strict_validation,
    };
    curveop::run_pipeline(curve, config.n_max, &opts).map_err(|e| e.to_string())
}

fn connection_triplets(c: &ConnectionMatrix) -> Triplets {
    let mut entries = Vec::new();
    for col in c.columns() {
        for row in col.jmin..=col.jmax {
            let v = col.get(row);
            if v != 0.0 {
                entries.push((row, col.column, v));
            }
        }
    }
    Triplets {
        nrows: c.nrows(),
        ncols: c.total_columns(),
        entries,
    }
}

fn jacobi_triplets(pipeline: &Pipeline, by_y: bool) -> Triplets {
    let dense = pipeline.pair.to_block_matrix(by_y).to_dense();
    let mut entries = Vec::new();
    for j in 0..dense.ncols() {
        for i in 0..dense.nrows() {
            let v = dense[(i, j)];
            if v != 0.0 {
                entries.push((i, j, v));
            }
        }
    }
    // column-major body sorted by (row, col) for a stable layout
    entries.sort_by_key(|&(i, j, _)| (i, j));
    Triplets {
        nrows: dense.nrows(),
        ncols: dense.ncols(),
        entries,
    }
}

#[derive(Serialize)]
struct BlockBandwidth {
    block: usize,
    lambda: usize,
    mu: usize,
}

#[derive(Serialize)]
struct ColumnMap {
    degree: usize,
    index: usize,
    column: usize,
    jmin: usize,
    jmax: usize,
}

#[derive(Serialize)]
struct BuildSummary {
    m: u8,
    d: usize,
    n_max: usize,
    total_columns: usize,
    rows: usize,
    bandwidth_lambda: usize,
    bandwidth_mu: usize,
    bandwidth_expected: usize,
    bandwidths_per_block: Vec<BlockBandwidth>,
    column_map: Vec<ColumnMap>,
    sparsity_entries: usize,
    sparsity_omitted: usize,
    cross_check_deviation: Option<f64>,
    wall_clock_per_degree: Vec<f64>,
    explicit_arrangement: bool,
}

fn per_block_bandwidths(c: &ConnectionMatrix, tol: f64) -> Vec<BlockBandwidth> {
    (0..=c.n_max())
        .map(|n| {
            let mut lambda = 0usize;
            let mut mu = 0usize;
            for col in c.block(n) {
                for row in col.jmin..=col.jmax {
                    if col.get(row).abs() > tol {
                        if row > col.column {
                            lambda = lambda.max(row - col.column);
                        } else {
                            mu = mu.max(col.column - row);
                        }
                    }
                }
            }
            BlockBandwidth {
                block: n,
                lambda,
                mu,
            }
        })
        .collect()
}

fn write_sparsity(path: &Path, c: &ConnectionMatrix) -> Result<(usize, usize), String> {
    let file = std::fs::File::create(path).map_err(|e| e.to_string())?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "row,col,log10_magnitude").map_err(|e| e.to_string())?;
    let mut kept = 0usize;
    let mut omitted = 0usize;
    for col in c.columns() {
        for row in col.jmin..=col.jmax {
            let v = col.get(row).abs();
            if v >= SPARSITY_THRESHOLD {
                writeln!(out, "{},{},{:.6}", row, col.column, v.log10())
                    .map_err(|e| e.to_string())?;
                kept += 1;
            } else if v > 0.0 {
                omitted += 1;
            }
        }
    }
    Ok((kept, omitted))
}

/// Cross-checks the engine columns against the entrywise recursion on the
/// first few degrees, returning the max deviation up to column signs.
pub fn cross_check_deviation(pipeline: &Pipeline, config: &RunConfig) -> Result<f64, String> {
    let d = pipeline.ops.curve().degree();
    if pipeline.ops.curve().m == 2 && d <= 2 {
        return Ok(0.0); // the entrywise recursion assumes degree >= 3
    }
    let n_small = config.n_max.min(d + 2);
    let formulas = connection_by_formulas(&pipeline.ops, n_small).map_err(|e| e.to_string())?;
    let engine = curveop::connection_matrix(
        &pipeline.ops,
        n_small,
        &lanczos_options(config),
    )
    .map_err(|e| e.to_string())?;
    Ok(max_column_deviation(&engine, &formulas))
}

pub fn cmd_build(config: &RunConfig) -> Result<i32, String> {
    let pipeline = run_pipeline(config)?;
    let out_dir = PathBuf::from(&config.out);
    std::fs::create_dir_all(&out_dir).map_err(|e| e.to_string())?;
    // echo the effective config for reproducibility
    std::fs::write(out_dir.join("config.json"), config.to_json()).map_err(|e| e.to_string())?;
    let c = &pipeline.connection;
    let d = pipeline.ops.curve().degree();

    let cross = if config.cross_check {
        let dev = cross_check_deviation(&pipeline, config)?;
        if dev > 1e-6 {
            return Err(format!(
                "cross-check failed: entrywise recursion deviates by {:.3e}",
                dev
            ));
        }
        Some(dev)
    } else {
        None
    };

    mm::write_matrix(&out_dir.join("C.mtx"), &connection_triplets(c))
        .map_err(|e| e.to_string())?;
    mm::write_matrix(&out_dir.join("Jx.mtx"), &jacobi_triplets(&pipeline, false))
        .map_err(|e| e.to_string())?;
    mm::write_matrix(&out_dir.join("Jy.mtx"), &jacobi_triplets(&pipeline, true))
        .map_err(|e| e.to_string())?;
    let (kept, omitted) = write_sparsity(&out_dir.join("sparsity.csv"), c)?;

    let from = d.max(pipeline.ops.curve().m as usize);
    let (lambda, mu) = c.bandwidths_from(from, config.tolerances.zero);
    let summary = BuildSummary {
        m: c.m,
        d,
        n_max: c.n_max(),
        total_columns: c.total_columns(),
        rows: c.nrows(),
        bandwidth_lambda: lambda,
        bandwidth_mu: mu,
        bandwidth_expected: curveop::audit::expected_bandwidth(c.m, d),
        bandwidths_per_block: per_block_bandwidths(c, config.tolerances.zero),
        column_map: c
            .columns()
            .map(|col| ColumnMap {
                degree: col.owner_degree,
                index: col.owner_index,
                column: col.column,
                jmin: col.jmin,
                jmax: col.jmax,
            })
            .collect(),
        sparsity_entries: kept,
        sparsity_omitted: omitted,
        cross_check_deviation: cross,
        wall_clock_per_degree: c.block_seconds.clone(),
        explicit_arrangement: c.source == curveop::lanczos::BasisSource::Explicit,
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )
    .map_err(|e| e.to_string())?;

    println!(
        "wrote C ({} x {}, {} entries), Jx, Jy, sparsity ({} kept, {} below threshold) to {}",
        summary.rows,
        summary.total_columns,
        connection_triplets(c).entries.len(),
        kept,
        omitted,
        out_dir.display()
    );
    Ok(0)
}

/// Audits a previously written connection matrix file in coefficient space.
fn verify_from_dir(config: &RunConfig, dir: &Path) -> Result<i32, String> {
    let t = mm::read_matrix(&dir.join("C.mtx"))?;
    let curve = config.curve().map_err(|e| e.to_string())?;
    let d = curve.degree();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); t.ncols];
    for &(i, j, v) in &t.entries {
        cols[j].push((i, v));
    }
    // orthonormality of the stored columns
    let dot = |a: &[(usize, f64)], b: &[(usize, f64)]| -> f64 {
        let mut acc = 0.0;
        for &(i, v) in a {
            if let Some(&(_, w)) = b.iter().find(|&&(k, _)| k == i) {
                acc += v * w;
            }
        }
        acc
    };
    let mut worst: f64 = 0.0;
    for i in 0..t.ncols {
        for j in i..t.ncols {
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(&cols[i], &cols[j]) - want).abs());
        }
    }
    let mut failed = Vec::new();
    if worst >= config.tolerances.orthonormality {
        failed.push(("orthogonality", worst));
    }
    // proven support membership
    let mut outside: f64 = 0.0;
    for (j, col) in cols.iter().enumerate() {
        let (n, k) = curveop::curve::column_to_index(j, curve.m, d);
        let zb = zero_bounds(curve.m, d, n, k);
        for &(row, v) in col {
            if (row < zb.jmin || row > zb.jmax) && v.abs() > config.tolerances.zero {
                outside = outside.max(v.abs());
            }
        }
    }
    if outside > 0.0 {
        failed.push(("proven_zero_bounds", outside));
    }
    if failed.is_empty() {
        println!("PASS orthogonality {:.3e}", worst);
        println!("PASS proven_zero_bounds");
        Ok(0)
    } else {
        for (name, value) in &failed {
            println!("FAIL {} {:.3e}", name, value);
        }
        Ok(1)
    }
}

pub fn cmd_verify(config: &RunConfig, from: Option<&Path>) -> Result<i32, String> {
    if let Some(dir) = from {
        return verify_from_dir(config, dir);
    }
    let out_dir = PathBuf::from(&config.out);
    std::fs::create_dir_all(&out_dir).map_err(|e| e.to_string())?;
    let pipeline = run_pipeline(config)?;
    let mut opts = audit_options(config);
    if opts.oracle {
        opts.oracle_n_max = feasible_oracle(pipeline.ops.curve(), opts.oracle_n_max.min(config.n_max))
            .map_err(|e| e.to_string())?
            .n_max;
    }
    let report = audit(&pipeline.connection, &pipeline.pair, &pipeline.ops, &opts)
        .map_err(|e| e.to_string())?;
    std::fs::write(out_dir.join("report.json"), report.to_json()).map_err(|e| e.to_string())?;
    for check in &report.checks {
        println!(
            "{} {} {:.3e} (tolerance {:.3e})",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.value,
            check.tolerance
        );
    }
    if report.all_pass() {
        println!("all checks passed; report at {}", out_dir.join("report.json").display());
        Ok(0)
    } else {
        let first = report.first_failure().expect("some check failed");
        println!("verification failed at check '{}'", first.name);
        Ok(1)
    }
}

pub fn cmd_eval(config: &RunConfig, points: &Path) -> Result<i32, String> {
    let text = std::fs::read_to_string(points)
        .map_err(|e| format!("cannot read points {}: {}", points.display(), e))?;
    let pipeline = run_pipeline(config)?;
    let out_dir = PathBuf::from(&config.out);
    std::fs::create_dir_all(&out_dir).map_err(|e| e.to_string())?;
    let out_path = out_dir.join("eval.csv");
    let file = std::fs::File::create(&out_path).map_err(|e| e.to_string())?;
    let mut out = std::io::BufWriter::new(file);

    let header: Vec<String> = pipeline
        .connection
        .columns()
        .map(|c| format!("Y_{}_{}", c.owner_degree, c.owner_index))
        .collect();
    writeln!(out, "x,y,{}", header.join(",")).map_err(|e| e.to_string())?;

    let mut skipped = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("x,") {
            continue;
        }
        let parts: Vec<&str> = line.split([',', ' ', '\t']).filter(|p| !p.is_empty()).collect();
        if parts.len() < 2 {
            eprintln!("warning: line {} malformed, skipping", lineno + 1);
            skipped += 1;
            continue;
        }
        let x: f64 = parts[0]
            .parse()
            .map_err(|e| format!("line {}: bad x: {}", lineno + 1, e))?;
        let y: f64 = parts[1]
            .parse()
            .map_err(|e| format!("line {}: bad y: {}", lineno + 1, e))?;
        match pipeline.connection.eval_y(&pipeline.ops, x, y) {
            Ok(vals) => {
                let cells: Vec<String> = vals.iter().map(|v| format!("{:.16e}", v)).collect();
                writeln!(out, "{:.16e},{:.16e},{}", x, y, cells.join(","))
                    .map_err(|e| e.to_string())?;
            }
            Err(curveop::Error::PointOffCurve { residual, .. }) => {
                eprintln!(
                    "warning: point ({}, {}) off curve (residual {:.3e}), skipping",
                    x, y, residual
                );
                skipped += 1;
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    println!("wrote {} ({} points skipped)", out_path.display(), skipped);
    Ok(0)
}

#[derive(Serialize)]
struct ScalingRow {
    n: usize,
    d: usize,
    seconds: f64,
}

#[derive(Serialize)]
struct ScalingSummary {
    rows: Vec<ScalingRow>,
    slope_n: Option<f64>,
    d_rows: Vec<ScalingRow>,
    slope_d: Option<f64>,
}

fn time_engine(curve: CurveSpec, n_max: usize, opts: &LanczosOptions) -> Result<f64, String> {
    let validated = curve.validate(false).map_err(|e| e.to_string())?;
    let ops = curveop::build_mult_ops(&validated, n_max).map_err(|e| e.to_string())?;
    // repeat until the measurement is comfortably above timer noise
    let mut best = f64::INFINITY;
    let mut spent = 0.0;
    let mut reps = 0;
    while (spent < 0.25 || reps < 3) && reps < 50 {
        let start = std::time::Instant::now();
        let c = curveop::connection_matrix(&ops, n_max, opts).map_err(|e| e.to_string())?;
        let pair = curveop::assemble_jacobi(&c, &ops).map_err(|e| e.to_string())?;
        std::hint::black_box(&pair);
        let dt = start.elapsed().as_secs_f64();
        best = best.min(dt);
        spent += dt;
        reps += 1;
    }
    Ok(best)
}

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0.ln()).sum();
    let sy: f64 = points.iter().map(|p| p.1.ln()).sum();
    let sxx: f64 = points.iter().map(|p| p.0.ln() * p.0.ln()).sum();
    let sxy: f64 = points.iter().map(|p| p.0.ln() * p.1.ln()).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Positive-on-support product polynomial of the requested degree (m = 2),
/// or a sign-alternating one (m = 1), used for the informational d sweep.
pub fn sweep_phi(m: u8, d: usize) -> Poly {
    let factors = [
        Poly::linear(1.15),
        Poly::linear(1.05),
        Poly::new(vec![1.0, 0.0, -1.0]),
        Poly::new(vec![1.1, -1.0]),
        Poly::new(vec![1.2, -1.0]),
        Poly::new(vec![1.3, -1.0]),
        Poly::linear(1.25),
        Poly::linear(1.35),
    ];
    if m == 2 {
        let mut phi = Poly::constant(1.0);
        let mut deg = 0;
        for f in factors.iter().cycle() {
            if deg + f.degree() > d {
                continue;
            }
            phi = &phi * f;
            deg += f.degree();
            if deg == d {
                return phi;
            }
        }
        unreachable!()
    } else {
        let mut coeffs = vec![1.0; d + 1];
        for (i, c) in coeffs.iter_mut().enumerate() {
            if i % 2 == 0 && i != 0 && i != d {
                *c = -1.0;
            }
        }
        Poly::new(coeffs)
    }
}

pub fn cmd_scaling(
    config: &RunConfig,
    n_values: &[usize],
    d_values: &[usize],
) -> Result<i32, String> {
    let opts = lanczos_options(config);
    let mut rows = Vec::new();
    for &n in n_values {
        let curve = config.curve().map_err(|e| e.to_string())?;
        let seconds = time_engine(curve, n, &opts)?;
        println!("N = {:6}  d = {}  {:.6} s", n, config.phi.len() - 1, seconds);
        rows.push(ScalingRow {
            n,
            d: config.phi.len() - 1,
            seconds,
        });
    }
    let slope_n = if rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.seconds)).collect();
        let s = fit_slope(&pts);
        println!("fitted slope of log(time) vs log(N): {:.3}", s);
        Some(s)
    } else {
        None
    };

    let mut d_rows = Vec::new();
    for &d in d_values {
        let base = config.curve().map_err(|e| e.to_string())?;
        let curve = CurveSpec::new(base.m, sweep_phi(base.m, d), base.weight.clone())
            .map_err(|e| e.to_string())?;
        let seconds = time_engine(curve, config.n_max, &opts)?;
        println!("N = {:6}  d = {}  {:.6} s", config.n_max, d, seconds);
        d_rows.push(ScalingRow {
            n: config.n_max,
            d,
            seconds,
        });
    }
    let slope_d = if d_rows.len() >= 2 {
        let pts: Vec<(f64, f64)> = d_rows.iter().map(|r| (r.d as f64, r.seconds)).collect();
        let s = fit_slope(&pts);
        println!("fitted slope of log(time) vs log(d) (informational): {:.3}", s);
        Some(s)
    } else {
        None
    };

    let out_dir = PathBuf::from(&config.out);
    std::fs::create_dir_all(&out_dir).map_err(|e| e.to_string())?;
    let summary = ScalingSummary {
        rows,
        slope_n,
        d_rows,
        slope_d,
    };
    std::fs::write(
        out_dir.join("scaling.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )
    .map_err(|e| e.to_string())?;
    Ok(0)
}
