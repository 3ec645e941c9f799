//! Built-in instances and file loading.

use crate::config::{ExperimentConfig, ProblemSource};
use crate::error::CliError;
use altmin::engine::{reference_value, ReferenceValue};
use altmin::instances::{
    assemble_paper_example, make_smooth_instance, parse_problem_file, random_box_instance,
    random_l1_singular_instance, random_singular_instance, random_spd_instance, QuadraticProblem,
};
use altmin::linalg::Cholesky;
use altmin::problem::TwoBlockProblem;
use serde::Serialize;

pub const BUILTIN_NAMES: &[&str] = &[
    "paper-example",
    "random-spd",
    "identity",
    "random-singular",
    "random-l1-singular",
    "random-box",
];

const RANDOM_DIM: usize = 5;
const RANDOM_CONDITION: f64 = 1e3;
const SINGULAR_NULLITY: usize = 2;
const SINGULAR_CONDITION: f64 = 1e2;
const L1_DIM: usize = 4;
const L1_CONDITION: f64 = 50.0;
const IDENTITY_DIM: usize = 3;

/// Reference runs use this multiple of the requested iteration count, and
/// at least `REFERENCE_FACTOR * MIN_REFERENCE_BASE` steps.
pub const REFERENCE_FACTOR: usize = 10;
const MIN_REFERENCE_BASE: usize = 100;

/// What is known about the problem beyond its data.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Structure {
    /// `M` positive definite.
    Definite,
    /// Smooth, rank-deficient, with analytic growth modulus and `H*`.
    Singular { kappa: f64, h_star: f64 },
    /// ℓ1 terms on a singular quadratic, smooth part bounded below.
    L1Singular {
        smooth_lower_bound: f64,
        min_weight: f64,
    },
    /// No certifiable structure detected.
    General,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub problem: QuadraticProblem,
    pub x1_initial: Vec<f64>,
    pub structure: Structure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HStarSource {
    /// Direct solve of `M x = b`.
    Kkt,
    /// Known by construction.
    Analytic,
    /// Smallest objective value of a long reference run.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalValue {
    pub h_star: f64,
    pub source: HStarSource,
    /// Present for [`HStarSource::Reference`].
    pub reference: Option<ReferenceValue>,
}

fn builtin(name: &str, seed: u64) -> Result<(QuadraticProblem, Structure), CliError> {
    Ok(match name {
        "paper-example" => (
            make_smooth_instance(assemble_paper_example())?,
            Structure::Definite,
        ),
        "random-spd" => (
            make_smooth_instance(random_spd_instance(
                RANDOM_DIM,
                RANDOM_DIM,
                RANDOM_CONDITION,
                seed,
            ))?,
            Structure::Definite,
        ),
        "identity" => (
            make_smooth_instance(random_spd_instance(IDENTITY_DIM, IDENTITY_DIM, 1.0, seed))?,
            Structure::Definite,
        ),
        "random-singular" => {
            let s = random_singular_instance(
                RANDOM_DIM,
                RANDOM_DIM,
                SINGULAR_NULLITY,
                SINGULAR_CONDITION,
                seed,
            );
            let structure = Structure::Singular {
                kappa: s.kappa,
                h_star: s.h_star,
            };
            (s.smooth_problem()?, structure)
        }
        "random-l1-singular" => {
            let s =
                random_l1_singular_instance(L1_DIM, L1_DIM, SINGULAR_NULLITY, L1_CONDITION, seed)?;
            let structure = Structure::L1Singular {
                smooth_lower_bound: s.smooth_lower_bound(),
                min_weight: s.weight1.min(s.weight2),
            };
            (s.problem, structure)
        }
        "random-box" => (
            random_box_instance(RANDOM_DIM, RANDOM_DIM, SINGULAR_CONDITION, seed)?,
            Structure::Definite,
        ),
        other => {
            return Err(CliError::Usage(format!(
                "unknown built-in problem {other:?}"
            )))
        }
    })
}

/// Loads the configured problem. Built-ins start from `x1 = 0`, which is
/// feasible for every family.
pub fn load(config: &ExperimentConfig) -> Result<Instance, CliError> {
    let (problem, structure) = match &config.problem_source {
        ProblemSource::Builtin(name) => builtin(name, config.rng_seed)?,
        ProblemSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let (_, problem) = parse_problem_file(&text)?;
            let structure = if Cholesky::factor(&problem.quadratic().assemble()).is_ok() {
                Structure::Definite
            } else {
                Structure::General
            };
            (problem, structure)
        }
    };
    log::info!("loaded {} ({:?})", config.problem_source.label(), structure);
    Ok(Instance {
        label: config.problem_source.label(),
        x1_initial: vec![0.0; problem.dim1()],
        problem,
        structure,
    })
}

impl Instance {
    /// `H*` from a closed form when one exists, otherwise from a reference
    /// run if `allow_reference` is set.
    pub fn optimal_value(
        &self,
        config: &ExperimentConfig,
    ) -> Result<Option<OptimalValue>, CliError> {
        match &self.structure {
            Structure::Definite if self.problem.is_smooth() => {
                return Ok(Some(OptimalValue {
                    h_star: self.problem.quadratic().direct_optimal_value()?,
                    source: HStarSource::Kkt,
                    reference: None,
                }))
            }
            Structure::Singular { h_star, .. } => {
                return Ok(Some(OptimalValue {
                    h_star: *h_star,
                    source: HStarSource::Analytic,
                    reference: None,
                }))
            }
            _ => {}
        }
        if !config.reference_solve {
            return Ok(None);
        }
        let budget = REFERENCE_FACTOR * config.max_iters.max(MIN_REFERENCE_BASE);
        let r = reference_value(&self.problem, &self.x1_initial, budget, config.inner_tol)?;
        log::info!(
            "reference H* = {:e} after {} steps (last decrease {:e})",
            r.h_star,
            r.iterations,
            r.last_decrease
        );
        Ok(Some(OptimalValue {
            h_star: r.h_star,
            source: HStarSource::Reference,
            reference: Some(r),
        }))
    }
}
