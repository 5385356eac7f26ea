//! Run configuration (TOML).
//!
//! ```toml
//! [model]
//! kind = "cubic"            # or "cubic-quintic"
//! lambda = -1.0
//! g1 = 0.0                  # cubic-quintic only
//! period = 1.0
//! n_per_period = 100        # or: h = 0.01
//!
//! [coefficient]             # g for cubic, V for cubic-quintic
//! expr = "1 + a*sin(2*pi*x)"
//! a = 0.5
//! # table = [1.0, 1.2, ...] # node values on [0, T) instead of expr
//!
//! [minimize]
//! half_length = 20.0        # optional, automatic otherwise
//!
//! [evolve]
//! dt = 1e-3
//! t_max = 5.0
//!
//! [sweep]
//! lambda = [-0.25, -1.0, -4.0]
//! ```

use std::path::Path;

use darksol_core::heteroclinic::MinimizeOptions;
use darksol_core::periodic_orbit::PeriodicSolveOptions;
use darksol_core::verify::VerifyOptions;
use darksol_core::{
    sample_coefficient, validate_problem, CheckedProblem, CoefficientRole, CoefficientSpec, Problem,
};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{at, CliError, CliResult};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Cubic,
    CubicQuintic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub lambda: f64,
    pub g1: Option<f64>,
    #[serde(default = "one")]
    pub period: f64,
    pub n_per_period: Option<usize>,
    pub h: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSection {
    pub expr: Option<String>,
    pub table: Option<Vec<f64>>,
    #[serde(default)]
    pub a: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicSection {
    pub residual_tol: Option<f64>,
    pub max_newton_iters: Option<usize>,
    pub oracle_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeSection {
    pub half_length: Option<f64>,
    pub grad_tol: Option<f64>,
    pub max_outer_iters: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub decay_tail_fraction: Option<f64>,
    pub ratio_tail_fraction: Option<f64>,
    pub gradient_trials: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_t_max() -> f64 {
    5.0
}

fn default_snapshot_every() -> usize {
    100
}

impl Default for EvolveSection {
    fn default() -> Self {
        EvolveSection {
            dt: default_dt(),
            t_max: default_t_max(),
            snapshot_every: default_snapshot_every(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Absent: the model's lambda. Present but empty: no rows.
    pub lambda: Option<Vec<f64>>,
    /// Values of the coefficient parameter `a`.
    pub amplitude: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub coefficient: CoefficientSection,
    #[serde(default)]
    pub periodic: PeriodicSection,
    #[serde(default)]
    pub minimize: MinimizeSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

/// A parsed config together with the SHA-256 of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl LoadedConfig {
    pub fn load(path: &Path) -> CliResult<LoadedConfig> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Validation(format!("config: cannot read {}: {e}", path.display())))?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> CliResult<LoadedConfig> {
        let text = std::str::from_utf8(bytes).map_err(|_| CliError::Validation("config: not UTF-8".into()))?;
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {}", e.message())))?;
        config.check()?;
        Ok(LoadedConfig {
            config,
            hash: hash_bytes(bytes),
        })
    }
}

impl RunConfig {
    fn check(&self) -> CliResult<()> {
        let m = &self.model;
        if !(m.period > 0.0 && m.period.is_finite()) {
            return Err(CliError::Validation(format!("config: period must be positive (got {})", m.period)));
        }
        if m.kind == ModelKind::CubicQuintic && m.g1.is_none() {
            return Err(CliError::Validation("config: cubic-quintic model needs g1".into()));
        }
        if m.kind == ModelKind::Cubic && m.g1.is_some() {
            return Err(CliError::Validation("config: g1 only applies to the cubic-quintic model".into()));
        }
        match (&self.coefficient.expr, &self.coefficient.table) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation("config: give either coefficient.expr or coefficient.table".into()))
            }
            (None, None) => return Err(CliError::Validation("config: coefficient.expr or coefficient.table is required".into())),
            _ => {}
        }
        if let Some(e) = &self.coefficient.expr {
            Expr::parse(e).map_err(|err| CliError::Validation(format!("config: coefficient.expr: {err}")))?;
        }
        self.nodes_per_period()?;
        Ok(())
    }

    /// Nodes per period from `n_per_period`, `h`, or the table length, which must agree.
    pub fn nodes_per_period(&self) -> CliResult<usize> {
        let m = &self.model;
        let from_h = match m.h {
            None => None,
            Some(h) => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(CliError::Validation(format!("config: h must be positive (got {h})")));
                }
                let n = (m.period / h).round();
                if n < 1.0 || ((n * h - m.period).abs() > 1e-9 * m.period) {
                    return Err(CliError::Validation(format!(
                        "model: grid step {h} does not divide the period {}",
                        m.period
                    )));
                }
                Some(n as usize)
            }
        };
        let table = self.coefficient.table.as_ref().map(|t| t.len());
        let candidates = [m.n_per_period, from_h, table];
        let mut chosen: Option<usize> = None;
        for c in candidates.into_iter().flatten() {
            match chosen {
                Some(n) if n != c => {
                    return Err(CliError::Validation(format!(
                        "config: inconsistent nodes per period ({n} vs {c})"
                    )))
                }
                _ => chosen = Some(c),
            }
        }
        let n = chosen.ok_or_else(|| CliError::Validation("config: set model.n_per_period or model.h".into()))?;
        if n < 3 {
            return Err(CliError::Validation(format!("config: need at least 3 nodes per period (got {n})")));
        }
        Ok(n)
    }

    pub fn step(&self) -> CliResult<f64> {
        Ok(self.model.period / self.nodes_per_period()? as f64)
    }

    /// Builds and validates the problem, optionally overriding `lambda` and `a`.
    pub fn problem(&self, lambda: Option<f64>, a: Option<f64>) -> CliResult<CheckedProblem> {
        let n = self.nodes_per_period()?;
        let period = self.model.period;
        let a = a.unwrap_or(self.coefficient.a);
        let role = match self.model.kind {
            ModelKind::Cubic => CoefficientRole::Nonlinearity,
            ModelKind::CubicQuintic => CoefficientRole::Potential,
        };
        let coefficient = match (&self.coefficient.expr, &self.coefficient.table) {
            (Some(src), _) => {
                let e = Expr::parse(src).map_err(|err| CliError::Validation(format!("config: coefficient.expr: {err}")))?;
                let f = move |x: f64| e.eval(x, a);
                sample_coefficient(CoefficientSpec::Closed(&f), period, n, role)
            }
            (None, Some(t)) => sample_coefficient(CoefficientSpec::Table(t), period, n, role),
            (None, None) => unreachable!("checked on load"),
        }
        .map_err(at("model"))?;
        let lambda = lambda.unwrap_or(self.model.lambda);
        let problem = match self.model.kind {
            ModelKind::Cubic => Problem::cubic(lambda, coefficient),
            ModelKind::CubicQuintic => Problem::cubic_quintic(lambda, coefficient, self.model.g1.unwrap_or(0.0)),
        };
        validate_problem(problem).map_err(at("model"))
    }

    pub fn periodic_options(&self) -> PeriodicSolveOptions {
        let mut o = PeriodicSolveOptions::default();
        if let Some(t) = self.periodic.residual_tol {
            o.residual_tol = t;
        }
        if let Some(n) = self.periodic.max_newton_iters {
            o.max_newton_iters = n;
        }
        o
    }

    pub fn oracle_tol(&self) -> f64 {
        self.periodic.oracle_tol.unwrap_or(1e-11)
    }

    /// Minimizer options for a given half-length.
    pub fn minimize_options(&self, half_length: f64) -> MinimizeOptions {
        let mut o = MinimizeOptions::with_half_length(half_length);
        if let Some(t) = self.minimize.grad_tol {
            o.grad_tol = t;
        }
        if let Some(n) = self.minimize.max_outer_iters {
            o.max_outer_iters = n;
        }
        o
    }

    pub fn verify_options(&self) -> VerifyOptions {
        let mut o = VerifyOptions::default();
        if let Some(t) = self.verify.decay_tail_fraction {
            o.decay_tail_fraction = t;
        }
        if let Some(t) = self.verify.ratio_tail_fraction {
            o.ratio_tail_fraction = t;
        }
        o
    }

    pub fn gradient_trials(&self) -> usize {
        self.verify.gradient_trials.unwrap_or(20)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(s: &str) -> CliResult<LoadedConfig> {
        LoadedConfig::from_bytes(s.as_bytes())
    }

    const BASE: &str = "[model]\nkind = \"cubic\"\nlambda = -1.0\nn_per_period = 10\n[coefficient]\nexpr = \"1\"\n";

    #[test]
    fn minimal_config_loads() {
        let c = load(BASE).unwrap();
        assert_eq!(c.config.nodes_per_period().unwrap(), 10);
        assert_eq!(c.hash.len(), 64);
        assert!(c.config.problem(None, None).is_ok());
    }

    #[test]
    fn step_must_divide_period() {
        let s = BASE.replace("n_per_period = 10", "h = 0.3");
        assert!(matches!(load(&s), Err(CliError::Validation(_))));
        let s = BASE.replace("n_per_period = 10", "h = 0.1");
        assert_eq!(load(&s).unwrap().config.nodes_per_period().unwrap(), 10);
        let s = BASE.replace("n_per_period = 10", "n_per_period = 10\nh = 0.05");
        assert!(load(&s).is_err());
    }

    #[test]
    fn rejects_unknown_keys_and_bad_models() {
        assert!(load(&format!("{BASE}[minimize]\nhalflength = 3\n")).is_err());
        let c = load(&BASE.replace("-1.0", "1.0")).unwrap();
        let err = c.config.problem(None, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("lambda must be negative"));
        assert!(load(&BASE.replace("\"1\"", "\"1 + y\"")).is_err());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            hash_bytes(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
