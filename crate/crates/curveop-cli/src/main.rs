//! Command-line front end: builds orthonormal OP bases on curves
//! `y^m = phi(x)`, verifies them against independent oracles, evaluates them
//! at points, and measures scaling.

mod commands;
mod config;
mod mm;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "curveop", version, about = "Orthonormal polynomial bases on planar algebraic curves")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<String>,
    /// Disable windowed re-orthogonalization (instability study).
    #[arg(long)]
    no_reorth: bool,
    /// Enable the monomial-Cholesky oracle during verification.
    #[arg(long)]
    oracle: bool,
    /// Quadrature size override.
    #[arg(long)]
    nquad: Option<usize>,
    /// Secondary sequence variant: multiply by x for all but the last column.
    #[arg(long)]
    x_then_y: bool,
    /// Cross-check the engine against the entrywise recursion on low degrees.
    #[arg(long)]
    cross_check: bool,
    /// Always run the Lanczos engine, even when an explicit basis exists.
    #[arg(long)]
    no_explicit_shortcut: bool,
    /// Re-validate curve positivity at ten times the sample density.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    tol_orthonormality: Option<f64>,
    #[arg(long)]
    tol_recurrence: Option<f64>,
    #[arg(long)]
    tol_commutator: Option<f64>,
    #[arg(long)]
    tol_span: Option<f64>,
    #[arg(long)]
    tol_leakage: Option<f64>,
    #[arg(long)]
    tol_zero: Option<f64>,
    #[arg(long)]
    tol_breakdown: Option<f64>,
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) {
        if let Some(out) = &self.out {
            config.out = out.clone();
        }
        if self.no_reorth {
            config.reorth = false;
        }
        if self.oracle {
            config.oracle = true;
        }
        if let Some(nquad) = self.nquad {
            config.nquad = Some(nquad);
        }
        if self.x_then_y {
            config.x_then_y_secondary = true;
        }
        if self.cross_check {
            config.cross_check = true;
        }
        if self.no_explicit_shortcut {
            config.explicit_shortcut = false;
        }
        if self.strict {
            config.strict_validation = true;
        }
        let t = &mut config.tolerances;
        if let Some(v) = self.tol_orthonormality {
            t.orthonormality = v;
        }
        if let Some(v) = self.tol_recurrence {
            t.recurrence = v;
        }
        if let Some(v) = self.tol_commutator {
            t.commutator = v;
        }
        if let Some(v) = self.tol_span {
            t.span = v;
        }
        if let Some(v) = self.tol_leakage {
            t.leakage = v;
        }
        if let Some(v) = self.tol_zero {
            t.zero = v;
        }
        if let Some(v) = self.tol_breakdown {
            t.breakdown = v;
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the pipeline and write C, Jx, Jy, a summary, and sparsity data.
    Build {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the audits; exit 0 iff every check passes.
    Verify {
        config: PathBuf,
        /// Audit matrix files from this directory instead of recomputing.
        #[arg(long)]
        from: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Evaluate the basis at points read from a CSV file of x,y pairs.
    Eval {
        config: PathBuf,
        points: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Time the pipeline over degree budgets and report fitted slopes.
    Scaling {
        config: PathBuf,
        /// Degree budgets to time, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        n_values: Vec<usize>,
        /// Optional curve degrees for an informational sweep.
        #[arg(long, value_delimiter = ',')]
        d_values: Vec<usize>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load(path: &PathBuf, overrides: &Overrides) -> Result<RunConfig, String> {
    let mut config = RunConfig::load(path)?;
    overrides.apply(&mut config);
    config.validate()?;
    Ok(config)
}

fn run() -> Result<i32, String> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Build { config, overrides } => {
            let config = load(&config, &overrides)?;
            commands::cmd_build(&config)
        }
        Cmd::Verify {
            config,
            from,
            overrides,
        } => {
            let config = load(&config, &overrides)?;
            commands::cmd_verify(&config, from.as_deref())
        }
        Cmd::Eval {
            config,
            points,
            overrides,
        } => {
            let config = load(&config, &overrides)?;
            commands::cmd_eval(&config, &points)
        }
        Cmd::Scaling {
            config,
            n_values,
            d_values,
            overrides,
        } => {
            let config = load(&config, &overrides)?;
            commands::cmd_scaling(&config, &n_values, &d_values)
        }
    }
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("error: {}", message);
            std::process::exit(2);
        }
    }
}
