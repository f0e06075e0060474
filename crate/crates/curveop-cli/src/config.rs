//! Run configuration: a flat JSON document plus command-line overrides.

use curveop::{CurveSpec, Error, Poly, WeightSpec};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_true() -> bool {
    true
}

fn default_out() -> String {
    "out".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "Tolerances::d_orthonormality")]
    pub orthonormality: f64,
    #[serde(default = "Tolerances::d_recurrence")]
    pub recurrence: f64,
    #[serde(default = "Tolerances::d_commutator")]
    pub commutator: f64,
    #[serde(default = "Tolerances::d_span")]
    pub span: f64,
    #[serde(default = "Tolerances::d_leakage")]
    pub leakage: f64,
    #[serde(default = "Tolerances::d_zero")]
    pub zero: f64,
    #[serde(default = "Tolerances::d_breakdown")]
    pub breakdown: f64,
}

impl Tolerances {
    fn d_orthonormality() -> f64 {
        1e-10
    }
    fn d_recurrence() -> f64 {
        1e-10
    }
    fn d_commutator() -> f64 {
        1e-10
    }
    fn d_span() -> f64 {
        1e-8
    }
    fn d_leakage() -> f64 {
        1e-9
    }
    fn d_zero() -> f64 {
        1e-12
    }
    fn d_breakdown() -> f64 {
        1e-10
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            orthonormality: Self::d_orthonormality(),
            recurrence: Self::d_recurrence(),
            commutator: Self::d_commutator(),
            span: Self::d_span(),
            leakage: Self::d_leakage(),
            zero: Self::d_zero(),
            breakdown: Self::d_breakdown(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub m: u8,
    /// Monomial coefficients of phi, constant term first.
    pub phi: Vec<f64>,
    pub weight: WeightSpec,
    pub n_max: usize,
    #[serde(default)]
    pub nquad: Option<usize>,
    #[serde(default = "default_true")]
    pub reorth: bool,
    #[serde(default)]
    pub cross_check: bool,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default = "default_true")]
    pub explicit_shortcut: bool,
    #[serde(default)]
    pub x_then_y_secondary: bool,
    #[serde(default)]
    pub strict_validation: bool,
    #[serde(default = "default_out")]
    pub out: String,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {}", path.display(), e))?;
        let config: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("invalid config: {}", e))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        let t = &self.tolerances;
        for (name, v) in [
            ("orthonormality", t.orthonormality),
            ("recurrence", t.recurrence),
            ("commutator", t.commutator),
            ("span", t.span),
            ("leakage", t.leakage),
            ("zero", t.zero),
            ("breakdown", t.breakdown),
        ] {
            if !(v > 0.0) {
                return Err(format!("tolerance {} must be positive, got {}", name, v));
            }
        }
        self.curve().map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn curve(&self) -> Result<CurveSpec, Error> {
        CurveSpec::new(self.m, Poly::new(self.phi.clone()), self.weight.clone())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
