use crate::config::{ExperimentConfig, NormChoice, ProblemSource};
use crate::error::CliError;
use crate::registry::{load, HStarSource, Instance, OptimalValue, Structure};
use crate::trace_io::{write_file, TraceTable};
use altmin::bounds::{
    descent_check_nonsmooth, descent_check_smooth, empirical_asymptotic_rate, literature_rates,
    rate_quadratic_growth, rate_quasi_strong, sublinear_params, truncation_floor,
    verify_trace_bound, BoundKind, BoundSequence, DescentReport, DominationPoint, LiteratureRates,
};
use altmin::engine::{run, IterateTrace, ReferenceValue, RunOptions};
use altmin::instances::{
    certificate_l2, certificate_mnorm, level_set_radius_l1, level_set_radius_smooth,
    lipschitz_upper, spectral_summary, SpectralSummary,
};
use altmin::problem::{ConvexityCertificate, Regime};
use altmin::Extended;
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

fn run_trace(
    inst: &Instance,
    config: &ExperimentConfig,
) -> Result<(IterateTrace, Option<OptimalValue>), CliError> {
    let opts = RunOptions {
        max_iters: config.max_iters,
        gap_tol: config.gap_tol,
        inner_tol: config.inner_tol,
    };
    let trace = run(&inst.problem, &inst.x1_initial, &opts)?;
    log::info!(
        "{} steps, final H = {:e}",
        trace.iterations(),
        trace.last().h_full
    );
    let optimum = inst.optimal_value(config)?;
    let trace = match optimum {
        Some(o) => trace.with_h_star(o.h_star),
        None => trace,
    };
    Ok((trace, optimum))
}

fn empirical_rate(trace: &IterateTrace) -> Option<f64> {
    let gaps = trace.gaps_full()?;
    empirical_asymptotic_rate(&gaps, truncation_floor(trace.h_star?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub problem: String,
    pub seed: u64,
    pub iterations: usize,
    pub final_h: f64,
    pub h_star: Option<f64>,
    pub h_star_source: Option<HStarSource>,
    pub reference: Option<ReferenceValue>,
    pub final_gap: Option<f64>,
    pub empirical_rate: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub table: TraceTable,
    pub summary: SolveSummary,
}

pub fn solve(config: &ExperimentConfig) -> Result<SolveOutput, CliError> {
    config.validate()?;
    let inst = load(config)?;
    let (trace, optimum) = run_trace(&inst, config)?;
    Ok(SolveOutput {
        table: TraceTable::from_trace(&trace),
        summary: SolveSummary {
            problem: inst.label,
            seed: config.rng_seed,
            iterations: trace.iterations(),
            final_h: trace.last().h_full,
            h_star: optimum.map(|o| o.h_star),
            h_star_source: optimum.map(|o| o.source),
            reference: optimum.and_then(|o| o.reference),
            final_gap: trace.gaps_full().and_then(|g| g.last().copied()),
            empirical_rate: empirical_rate(&trace),
        },
    })
}

/// Euclidean constants `(σ or κ, L1, L2)` when the instance provides them.
fn euclidean_constants(inst: &Instance) -> Result<Option<(f64, Extended, Extended)>, CliError> {
    let q = inst.problem.quadratic();
    Ok(match inst.structure {
        Structure::Definite => {
            let c = certificate_l2(q)?.certificate;
            c.sigma.map(|s| (s, c.l1, c.l2))
        }
        Structure::Singular { kappa, .. } => Some((
            kappa,
            Extended::Finite(lipschitz_upper(&q.a)?),
            Extended::Finite(lipschitz_upper(&q.c)?),
        )),
        _ => None,
    })
}

fn require_l2(inst: &Instance, norm: NormChoice) -> Result<(), CliError> {
    if norm == NormChoice::Mnorm {
        return Err(CliError::Data(format!(
            "{}: M is singular, so the energy norm degenerates; use --norm l2",
            inst.label
        )));
    }
    Ok(())
}

/// The certificate for the instance's regime. `h0` is needed for the
/// ℓ1 level-set radius.
fn certificate(
    inst: &Instance,
    norm: NormChoice,
    h0: f64,
) -> Result<ConvexityCertificate, CliError> {
    let q = inst.problem.quadratic();
    match inst.structure {
        Structure::Definite => Ok(match norm {
            NormChoice::L2 => certificate_l2(q)?.certificate,
            NormChoice::Mnorm => certificate_mnorm(q)?.certificate,
        }),
        Structure::Singular { kappa, .. } => {
            require_l2(inst, norm)?;
            let l1 = Extended::Finite(lipschitz_upper(&q.a)?);
            let l2 = Extended::Finite(lipschitz_upper(&q.c)?);
            Ok(ConvexityCertificate::quadratic_growth(
                kappa, l1, l2, 1.0, 1.0,
            ))
        }
        Structure::L1Singular {
            smooth_lower_bound,
            min_weight,
        } => {
            require_l2(inst, norm)?;
            let l1 = Extended::Finite(lipschitz_upper(&q.a)?);
            let l2 = Extended::Finite(lipschitz_upper(&q.c)?);
            let r = level_set_radius_l1(h0, smooth_lower_bound, min_weight);
            Ok(ConvexityCertificate::plain_convex(l1, l2, 1.0, 1.0, r))
        }
        Structure::General => Err(CliError::Data(format!(
            "{}: no certifiable regime; M is not positive definite and no growth modulus is known",
            inst.label
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifyReport {
    pub problem: String,
    pub seed: u64,
    pub norm: NormChoice,
    pub regime: Regime,
    pub certificate: ConvexityCertificate,
    /// Linear rate `ρ`, for the linear regimes.
    pub rate: Option<f64>,
    pub m_star: Option<usize>,
    pub p_star: Option<f64>,
    /// `4R² / (β1/L1 + β2/L2)`.
    pub bound_numerator: Option<f64>,
    pub h0: f64,
    pub h_star: Option<f64>,
    pub h_star_source: Option<HStarSource>,
    /// Literature rates from the Euclidean constants, for comparison.
    pub literature: Option<LiteratureRates>,
    pub spectrum: Option<SpectralSummary>,
}

pub fn certify(config: &ExperimentConfig) -> Result<CertifyReport, CliError> {
    config.validate()?;
    let inst = load(config)?;
    let init = run(
        &inst.problem,
        &inst.x1_initial,
        &RunOptions {
            max_iters: 0,
            ..Default::default()
        },
    )?;
    let h0 = init.last().h_full;
    let cert = certificate(&inst, config.norm_choice, h0)?;
    let mut report = CertifyReport {
        problem: inst.label.clone(),
        seed: config.rng_seed,
        norm: config.norm_choice,
        regime: cert.regime,
        certificate: cert.clone(),
        rate: None,
        m_star: None,
        p_star: None,
        bound_numerator: None,
        h0,
        h_star: None,
        h_star_source: None,
        literature: None,
        spectrum: None,
    };
    match cert.regime {
        Regime::QuasiStrong => report.rate = Some(rate_quasi_strong(&cert)?),
        Regime::QuadraticGrowth => report.rate = Some(rate_quadratic_growth(&cert)?),
        _ => {
            let optimum = inst
                .optimal_value(config)?
                .ok_or(altmin::bounds::BoundError::MissingReference)?;
            let params = sublinear_params(h0 - optimum.h_star, &cert)?;
            report.h_star = Some(optimum.h_star);
            report.h_star_source = Some(optimum.source);
            report.m_star = Some(params.m_star);
            report.p_star = Some(params.p_star);
            report.bound_numerator = Some(params.numerator);
        }
    }
    if inst.structure == Structure::Definite {
        let spectrum = spectral_summary(inst.problem.quadratic())?;
        if let Some((sigma, _, _)) = euclidean_constants(&inst)? {
            report.literature = Some(literature_rates(sigma, spectrum.lambda_max_m, 2));
        }
        report.spectrum = Some(spectrum);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentSummary {
    /// `casewise` for the general lemma, `smooth` for the g ≡ 0 lemma.
    pub lemma: &'static str,
    pub holds: bool,
    pub worst_margin: f64,
    pub half_steps: usize,
    pub first_failure: Option<usize>,
}

impl DescentSummary {
    fn new(lemma: &'static str, r: &DescentReport) -> Self {
        let slack = altmin::bounds::DESCENT_SLACK;
        DescentSummary {
            lemma,
            holds: r.holds,
            worst_margin: r.worst_margin,
            half_steps: r.steps.len(),
            first_failure: r
                .steps
                .iter()
                .find(|s| s.first_margin < -slack || s.second_margin < -slack)
                .map(|s| s.k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub problem: String,
    pub seed: u64,
    pub norm: NormChoice,
    pub regime: Regime,
    pub bound: BoundKind,
    pub h_star: f64,
    pub h_star_source: HStarSource,
    pub reference: Option<ReferenceValue>,
    pub theoretical_rate: Option<f64>,
    pub rate_overridden: bool,
    pub empirical_rate: Option<f64>,
    pub m_star: Option<usize>,
    pub p_star: Option<f64>,
    pub radius: Option<f64>,
    pub dominated: bool,
    pub first_failure: Option<usize>,
    pub worst_margin: f64,
    pub max_ratio: f64,
    pub truncated: usize,
    pub descent: Option<DescentSummary>,
    pub points: Vec<DominationPoint>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.dominated && self.descent.as_ref().is_none_or(|d| d.holds)
    }

    pub fn failure_summary(&self) -> String {
        let mut parts = Vec::new();
        if let Some(k) = self.first_failure {
            parts.push(format!("bound {:?} violated first at k = {k}", self.bound));
        }
        if let Some(d) = self.descent.as_ref().filter(|d| !d.holds) {
            parts.push(format!(
                "{} descent lemma fails at k = {:?}",
                d.lemma, d.first_failure
            ));
        }
        parts.join("; ")
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOutput {
    pub table: TraceTable,
    pub report: VerifyReport,
}

pub fn verify(config: &ExperimentConfig) -> Result<VerifyOutput, CliError> {
    config.validate()?;
    let inst = load(config)?;
    let (trace, optimum) = run_trace(&inst, config)?;
    let optimum = optimum.ok_or(altmin::bounds::BoundError::MissingReference)?;
    let gaps = trace.gaps_full().expect("H* attached");
    let h0 = trace.entries[0].h_full;
    let cert = certificate(&inst, config.norm_choice, h0)?;
    let len = trace.entries.len();
    let bound = match config.rate_override {
        Some(rate) => {
            let kind = match cert.regime {
                Regime::QuasiStrong => BoundKind::LinearQSC,
                Regime::QuadraticGrowth => BoundKind::LinearQFG,
                other => {
                    return Err(CliError::Usage(format!(
                        "--rate-override needs a linear regime, this instance is {other:?}"
                    )))
                }
            };
            log::info!("replacing the theoretical rate by {rate}");
            BoundSequence::linear(kind, rate, gaps[0], len)
        }
        None => BoundSequence::for_certificate(&cert, gaps[0], len)?,
    };
    let dom = verify_trace_bound(&trace, &bound)?;
    let descent = match inst.structure {
        Structure::L1Singular { .. } => Some(DescentSummary::new(
            "casewise",
            &descent_check_nonsmooth(&trace, &cert)?,
        )),
        _ if inst.problem.is_smooth() => match euclidean_constants(&inst)? {
            Some((modulus, l1, l2)) => {
                let r = level_set_radius_smooth(gaps[0], modulus);
                Some(DescentSummary::new(
                    "smooth",
                    &descent_check_smooth(&trace, l1, l2, r)?,
                ))
            }
            None => None,
        },
        _ => None,
    };
    let params = &bound.parameters;
    let report = VerifyReport {
        problem: inst.label,
        seed: config.rng_seed,
        norm: config.norm_choice,
        regime: cert.regime,
        bound: bound.kind,
        h_star: optimum.h_star,
        h_star_source: optimum.source,
        reference: optimum.reference,
        theoretical_rate: params.rate,
        rate_overridden: config.rate_override.is_some(),
        empirical_rate: dom.empirical_rate,
        m_star: params.m_star,
        p_star: params.p_star,
        radius: cert.radius,
        dominated: dom.dominated,
        first_failure: dom.first_failure,
        worst_margin: dom.worst_margin,
        max_ratio: dom.max_ratio,
        truncated: dom.truncated,
        descent,
        points: dom.points,
    };
    Ok(VerifyOutput {
        table: TraceTable::from_trace(&trace),
        report,
    })
}

/// Figure abscissa `j` is the gap after `j − 1` steps.
pub const FIGURE_ANCHORS: [(usize, f64); 4] =
    [(1, 0.2827), (2, 0.0206), (10, 6.9995e-4), (31, 7.5230e-7)];
pub const ANCHOR_REL_TOL: f64 = 1e-2;
/// Steps needed to reach the last anchor.
pub const FIGURE_ITERS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureRow {
    pub j: usize,
    pub gap: f64,
    /// `η^{j−1} (H⁰ − H*)`.
    pub reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorCheck {
    pub j: usize,
    pub expected: f64,
    pub observed: Option<f64>,
    pub rel_err: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureOutput {
    pub eta: f64,
    pub rows: Vec<FigureRow>,
    pub anchors: Vec<AnchorCheck>,
}

impl FigureOutput {
    pub fn passed(&self) -> bool {
        self.anchors.iter().all(|a| a.passed)
    }

    pub fn table(&self) -> String {
        let mut out = format!(
            "eta = {:.6}\n{:>4}  {:>14}  {:>14}\n",
            self.eta, "j", "gap", "eta^(j-1) gap"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:>4}  {:>14.4e}  {:>14.4e}\n",
                r.j, r.gap, r.reference
            ));
        }
        out
    }

    pub fn anchor_table(&self) -> String {
        let mut out = format!(
            "{:>4}  {:>12}  {:>12}  {:>10}  result\n",
            "j", "expected", "observed", "rel err"
        );
        for a in &self.anchors {
            let obs = a.observed.map_or("missing".into(), |v| format!("{v:.4e}"));
            let rel = a.rel_err.map_or("-".into(), |v| format!("{v:.2e}"));
            let verdict = if a.passed { "ok" } else { "MISMATCH" };
            out.push_str(&format!(
                "{:>4}  {:>12.4e}  {:>12}  {:>10}  {verdict}\n",
                a.j, a.expected, obs, rel
            ));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,gap,reference\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.16e},{:.16e}\n", r.j, r.gap, r.reference));
        }
        out
    }
}

/// The 3+2 example from `x1 = 0` in the energy norms.
pub fn repro_figure1(iters: usize) -> Result<FigureOutput, CliError> {
    let config = ExperimentConfig {
        problem_source: ProblemSource::Builtin("paper-example".into()),
        norm_choice: NormChoice::Mnorm,
        max_iters: iters,
        ..Default::default()
    };
    let inst = load(&config)?;
    let (trace, _) = run_trace(&inst, &config)?;
    let gaps = trace.gaps_full().expect("H* known for the 3+2 example");
    let eta = rate_quasi_strong(&certificate(&inst, NormChoice::Mnorm, gaps[0])?)?;
    let rows: Vec<FigureRow> = gaps
        .iter()
        .enumerate()
        .map(|(i, &gap)| FigureRow {
            j: i + 1,
            gap,
            reference: eta.powi(i as i32) * gaps[0],
        })
        .collect();
    let anchors = FIGURE_ANCHORS
        .iter()
        .map(|&(j, expected)| {
            let observed = rows.get(j - 1).map(|r| r.gap);
            let rel_err = observed.map(|o| ((o - expected) / expected).abs());
            AnchorCheck {
                j,
                expected,
                observed,
                rel_err,
                passed: rel_err.is_some_and(|e| e <= ANCHOR_REL_TOL),
            }
        })
        .collect();
    Ok(FigureOutput { eta, rows, anchors })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchEntry {
    pub seed: u64,
    pub passed: bool,
    pub dominated: bool,
    pub descent_holds: Option<bool>,
    pub theoretical_rate: Option<f64>,
    pub empirical_rate: Option<f64>,
    pub final_gap: Option<f64>,
    pub trace: PathBuf,
    pub report: PathBuf,
}

/// Runs `verify` for seeds `seed, seed + 1, …` with `jobs` workers. Each
/// seed writes `seed-<s>/trace.csv` and `seed-<s>/report.json` below
/// `out_dir`; entries are returned in seed order.
pub fn batch(
    config: &ExperimentConfig,
    count: u64,
    jobs: usize,
    out_dir: &Path,
) -> Result<Vec<BatchEntry>, CliError> {
    config.validate()?;
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let seeds: Vec<u64> = (0..count)
        .map(|i| config.rng_seed.wrapping_add(i))
        .collect();
    let results: Vec<Result<BatchEntry, CliError>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                let dir = out_dir.join(format!("seed-{seed}"));
                let cfg = ExperimentConfig {
                    rng_seed: seed,
                    out_trace: Some(dir.join("trace.csv")),
                    out_report: Some(dir.join("report.json")),
                    ..config.clone()
                };
                let out = verify(&cfg)?;
                let trace = cfg.out_trace.expect("set above");
                let report = cfg.out_report.expect("set above");
                out.table.write(&trace)?;
                write_file(&report, &to_json(&out.report))?;
                let r = &out.report;
                Ok(BatchEntry {
                    seed,
                    passed: r.passed(),
                    dominated: r.dominated,
                    descent_holds: r.descent.as_ref().map(|d| d.holds),
                    theoretical_rate: r.theoretical_rate,
                    empirical_rate: r.empirical_rate,
                    final_gap: out.table.rows.last().and_then(|row| row.gap_full),
                    trace,
                    report,
                })
            })
            .collect()
    });
    results.into_iter().collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}
