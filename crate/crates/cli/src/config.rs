use crate::error::CliError;
use crate::registry::BUILTIN_NAMES;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemSource {
    Builtin(String),
    File(PathBuf),
}

impl ProblemSource {
    /// Anything containing a path separator or a dot is a file; every other
    /// value must name a built-in instance.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        if BUILTIN_NAMES.contains(&s) {
            return Ok(ProblemSource::Builtin(s.to_string()));
        }
        if s.contains(['/', '\\', '.']) {
            return Ok(ProblemSource::File(PathBuf::from(s)));
        }
        Err(CliError::Usage(format!(
            "unknown built-in problem {s:?}; expected a file path or one of: {}",
            BUILTIN_NAMES.join(", ")
        )))
    }

    pub fn label(&self) -> String {
        match self {
            ProblemSource::Builtin(name) => name.clone(),
            ProblemSource::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum NormChoice {
    /// Euclidean norms on both blocks.
    L2,
    /// Energy norms induced by A, C and M.
    Mnorm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem_source: ProblemSource,
    pub norm_choice: NormChoice,
    pub max_iters: usize,
    pub gap_tol: Option<f64>,
    pub inner_tol: f64,
    pub rng_seed: u64,
    pub out_trace: Option<PathBuf>,
    pub out_report: Option<PathBuf>,
    /// Replaces the theoretical linear rate in `verify`.
    pub rate_override: Option<f64>,
    /// Estimate `H*` by a long reference run when no closed form exists.
    pub reference_solve: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem_source: ProblemSource::Builtin("paper-example".into()),
            norm_choice: NormChoice::L2,
            max_iters: 100,
            gap_tol: None,
            inner_tol: altmin::engine::DEFAULT_INNER_TOL,
            rng_seed: 0,
            out_trace: None,
            out_report: None,
            rate_override: None,
            reference_solve: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Usage(format!(
                    "{name} must be positive and finite, got {v}"
                )))
            }
        };
        positive("--inner-tol", self.inner_tol)?;
        if let Some(t) = self.gap_tol {
            positive("--gap-tol", t)?;
        }
        if let Some(r) = self.rate_override {
            if !(0.0..=1.0).contains(&r) {
                return Err(CliError::Usage(format!(
                    "--rate-override must lie in [0, 1], got {r}"
                )));
            }
        }
        if let ProblemSource::Builtin(name) = &self.problem_source {
            if !BUILTIN_NAMES.contains(&name.as_str()) {
                return Err(CliError::Usage(format!(
                    "unknown built-in problem {name:?}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sources_are_classified() {
        assert_eq!(
            ProblemSource::parse("random-spd").unwrap(),
            ProblemSource::Builtin("random-spd".into())
        );
        assert_eq!(
            ProblemSource::parse("data/p.json").unwrap(),
            ProblemSource::File("data/p.json".into())
        );
        assert!(matches!(
            ProblemSource::parse("nonsense"),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn tolerances_must_be_positive() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.inner_tol = 0.0;
        assert!(c.validate().is_err());
        c.inner_tol = 1e-12;
        c.gap_tol = Some(-1.0);
        assert!(c.validate().is_err());
        c.gap_tol = None;
        c.rate_override = Some(1.5);
        assert!(c.validate().is_err());
    }
}
