//! Running scenarios and checking their results.

use crate::error::Result;
use crate::scenario::{Scenario, Study, SweepParameter};
use fracchem::{
    direct_residual, volterra_residual, ChemostatParams, Classification, Collocation,
    DilutionSchedule, EquilibriumReport, MultistartSummary, PeriodicSolution, SolveConfig,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Acceptance bound for the direct-quadrature residual of the derivative.
pub const DIRECT_RESIDUAL_LIMIT: f64 = 1e-8;

/// Series on the interpolation grid `t̂_j = jT/M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub label: String,
    /// The swept parameter's value, for sweep studies.
    pub value: Option<f64>,
    pub params: ChemostatParams,
    pub solution: PeriodicSolution,
    /// Defect of the sliding-window integral form; recorded, not checked.
    pub volterra_residual: f64,
    /// `sup_j |D^α_L s(t_j) - f(t_j, s_j)|` with the derivative taken by
    /// direct quadrature.
    pub direct_residual: f64,
    pub series: Series,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub equilibrium: EquilibriumReport,
    pub runs: Vec<RunRecord>,
    pub buckets: Option<MultistartSummary>,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn not_converged(&self) -> usize {
        self.runs.iter().filter(|r| !r.solution.converged()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
    /// Measured and reported without a pass/fail verdict.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub measured: Option<f64>,
    pub limit: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(
        name: &str,
        status: CheckStatus,
        measured: Option<f64>,
        limit: Option<f64>,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            name: name.to_string(),
            status,
            measured,
            limit,
            detail: detail.into(),
        }
    }

    fn verdict(
        name: &str,
        ok: bool,
        measured: f64,
        limit: Option<f64>,
        detail: impl Into<String>,
    ) -> Self {
        let status = if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self::new(name, status, Some(measured), limit, detail)
    }

    fn not_applicable(name: &str, detail: impl Into<String>) -> Self {
        Self::new(name, CheckStatus::NotApplicable, None, None, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub checks: Vec<Check>,
    pub not_converged: usize,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.not_converged == 0 && self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    /// `0` when everything passes, `2` when any solve failed to converge,
    /// otherwise `1`.
    pub fn exit_code(&self) -> i32 {
        if self.not_converged > 0 {
            2
        } else if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Executes the scenario's study and attaches [`verify`]'s checks.
pub fn run_scenario(scenario: &Scenario) -> Result<RunReport> {
    scenario.validate()?;
    let params = scenario.params;
    let schedule = &scenario.schedule;
    let config = &scenario.config;
    let (runs, buckets) = match &scenario.study {
        Study::Single | Study::Bangbang => {
            let disc = Collocation::new(&params, schedule, config.node_count)?;
            let solution = disc.solve(&steady_guess(&params, schedule, config), config)?;
            (
                vec![record(
                    "single".into(),
                    None,
                    &params,
                    schedule,
                    config,
                    solution,
                )?],
                None,
            )
        }
        Study::Multistart { starts } | Study::Washout { starts } => {
            let disc = Collocation::new(&params, schedule, config.node_count)?;
            let outcome = disc.multistart(*starts, config)?;
            let runs = outcome
                .solutions
                .into_iter()
                .enumerate()
                .map(|(i, sol)| {
                    record(
                        format!("start_{i:03}"),
                        None,
                        &params,
                        schedule,
                        config,
                        sol,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            (runs, Some(outcome.summary))
        }
        Study::Sweep { parameter, values } => (
            sweep_runs(&params, schedule, config, *parameter, values)?,
            None,
        ),
    };
    let mut report = RunReport {
        scenario: scenario.clone(),
        seed: config.seed,
        equilibrium: params.equilibrium(schedule),
        runs,
        buckets,
        checks: Vec::new(),
    };
    report.checks = verify(&report)?.checks;
    Ok(report)
}

/// Runs `base` once per value of `parameter`, each from `s ≡ s̄`.
pub fn sweep(base: &Scenario, parameter: SweepParameter, values: &[f64]) -> Result<RunReport> {
    let mut scenario = base.clone();
    scenario.study = Study::Sweep {
        parameter,
        values: values.to_vec(),
    };
    run_scenario(&scenario)
}

fn sweep_runs(
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
    config: &SolveConfig,
    parameter: SweepParameter,
    values: &[f64],
) -> Result<Vec<RunRecord>> {
    values
        .par_iter()
        .map(|&v| {
            let p = parameter.apply(params, v)?;
            let disc = Collocation::new(&p, schedule, config.node_count)?;
            let solution = disc.solve(&steady_guess(&p, schedule, config), config)?;
            record(
                format!("{parameter}_{v}"),
                Some(v),
                &p,
                schedule,
                config,
                solution,
            )
        })
        .collect()
}

/// `s ≡ s̄` when the equilibrium exists, otherwise `s ≡ s_in`.
fn steady_guess(
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
    config: &SolveConfig,
) -> Vec<f64> {
    let eq = params.equilibrium(schedule);
    let level = if eq.exists { eq.s_bar } else { params.s_in() };
    vec![level; config.node_count]
}

fn record(
    label: String,
    value: Option<f64>,
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
    config: &SolveConfig,
    solution: PeriodicSolution,
) -> Result<RunRecord> {
    let dense = solution.interpolate(config.interpolation_count)?;
    let y = params.yield_coefficient();
    let s_in = params.s_in();
    let series = Series {
        x: dense.values.iter().map(|s| y * (s_in - s)).collect(),
        d: dense.times.iter().map(|&t| schedule.evaluate(t)).collect(),
        t: dense.times,
        s: dense.values,
    };
    Ok(RunRecord {
        label,
        value,
        params: *params,
        volterra_residual: volterra_residual(&solution, params, schedule)?,
        direct_residual: direct_residual(&solution, params, schedule)?,
        solution,
        series,
    })
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn amplitude(run: &RunRecord) -> f64 {
    max_of(&run.solution.s_nodes) - min_of(&run.solution.s_nodes)
}

/// Re-derives every check from the nodal data stored in the report.
///
/// Collocation residuals, bounds, positivity, classification and the
/// study-level properties are recomputed; the direct-quadrature and
/// integral-form residuals are read from the run records.
pub fn verify(report: &RunReport) -> Result<Verification> {
    let scenario = &report.scenario;
    let schedule = &scenario.schedule;
    let config = &scenario.config;
    let (_, d_max) = schedule.bounds();
    let converged: Vec<&RunRecord> = report
        .runs
        .iter()
        .filter(|r| r.solution.converged())
        .collect();
    let not_converged = report.runs.len() - converged.len();
    let mut checks = Vec::new();

    checks.push(Check::verdict(
        "convergence",
        not_converged == 0,
        not_converged as f64,
        Some(0.0),
        format!(
            "{} of {} solves converged",
            converged.len(),
            report.runs.len()
        ),
    ));

    // collocation residual, recomputed
    let mut worst: Option<(f64, f64, &str)> = None;
    let mut cached: Option<(ChemostatParams, Collocation)> = None;
    let mut residual_ok = true;
    for run in &converged {
        let sol = &run.solution;
        if sol.s_nodes.len() != config.node_count || sol.grid.node_count() != config.node_count {
            residual_ok = false;
            continue;
        }
        if cached
            .as_ref()
            .map(|(p, _)| *p != run.params)
            .unwrap_or(true)
        {
            cached = Some((
                run.params,
                Collocation::new(&run.params, schedule, config.node_count)?,
            ));
        }
        let disc = &cached.as_ref().expect("just filled").1;
        let s_in = run.params.s_in();
        let clamped: Vec<f64> = sol.s_nodes.iter().map(|s| s.clamp(0.0, s_in)).collect();
        let r = fracchem::residual(&clamped, &run.params, schedule, disc.operator())?;
        let f_sup = clamped
            .iter()
            .enumerate()
            .map(|(j, &s)| {
                run.params
                    .rhs_f(sol.grid.node(j), s, schedule)
                    .map(f64::abs)
            })
            .collect::<fracchem::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let bound = config.newton_tol * (1.0 + f_sup);
        residual_ok &= res <= bound;
        if worst.map(|(w, b, _)| res / bound > w / b).unwrap_or(true) {
            worst = Some((res, bound, &run.label));
        }
    }
    checks.push(match worst {
        Some((res, bound, label)) => Check::verdict(
            "collocation-residual",
            residual_ok,
            res,
            Some(bound),
            format!("worst run {label}; limit newton_tol·(1 + sup|f|)"),
        ),
        None => Check::not_applicable("collocation-residual", "no converged solution"),
    });

    // boundedness and the biomass relation
    let mut margin = f64::INFINITY;
    let mut relation = true;
    let mut offenders = Vec::new();
    for run in &converged {
        let sol = &run.solution;
        let s_in = run.params.s_in();
        let y = run.params.yield_coefficient();
        let m = min_of(&sol.s_nodes)
            .min(s_in - max_of(&sol.s_nodes))
            .min(min_of(&sol.x_nodes));
        let rel = sol.x_nodes.len() == sol.s_nodes.len()
            && sol
                .s_nodes
                .iter()
                .zip(&sol.x_nodes)
                .all(|(s, x)| *x == y * (s_in - s));
        if m < 0.0 || !rel {
            offenders.push(run.label.clone());
        }
        relation &= rel;
        margin = margin.min(m);
    }
    checks.push(if converged.is_empty() {
        Check::not_applicable("boundedness", "no converged solution")
    } else {
        Check::verdict(
            "boundedness",
            offenders.is_empty(),
            margin,
            Some(0.0),
            if offenders.is_empty() {
                "0 <= s <= s_in and x = Y(s_in - s) >= 0 at every node".to_string()
            } else {
                format!(
                    "violated by {}{}",
                    offenders.join(", "),
                    if relation {
                        ""
                    } else {
                        " (biomass relation broken)"
                    }
                )
            },
        )
    });

    // strict positivity where the dilution stays below the growth ceiling
    let eligible: Vec<&&RunRecord> = converged
        .iter()
        .filter(|r| {
            r.solution.classification == Classification::NonTrivial && d_max < r.params.mu_max()
        })
        .collect();
    checks.push(if eligible.is_empty() {
        Check::not_applicable(
            "positivity",
            "no non-trivial solution with D(t) < mu_max throughout",
        )
    } else {
        let m = eligible
            .iter()
            .map(|r| {
                let s_in = r.params.s_in();
                (s_in - max_of(&r.solution.s_nodes)).min(min_of(&r.solution.x_nodes))
            })
            .fold(f64::INFINITY, f64::min);
        Check::verdict(
            "positivity",
            m > 0.0,
            m,
            Some(0.0),
            "s < s_in and x > 0 strictly",
        )
    });

    // stored classification against the nodal data
    let mismatched: Vec<&str> = converged
        .iter()
        .filter(|r| {
            let s_in = r.params.s_in();
            let trivial = r
                .solution
                .s_nodes
                .iter()
                .all(|s| (s - s_in).abs() <= config.trivial_threshold);
            trivial != (r.solution.classification == Classification::TrivialWashout)
        })
        .map(|r| r.label.as_str())
        .collect();
    checks.push(Check::verdict(
        "classification",
        mismatched.is_empty(),
        mismatched.len() as f64,
        Some(0.0),
        if mismatched.is_empty() {
            "labels agree with sup|s - s_in| against the trivial threshold".to_string()
        } else {
            format!("mismatched: {}", mismatched.join(", "))
        },
    ));

    // equilibrium: washout where predicted, otherwise s̄ inside the orbit
    let margins: Vec<f64> = converged
        .iter()
        .filter_map(|run| {
            let eq = run.params.equilibrium(schedule);
            let s = &run.solution.s_nodes;
            if eq.washout_predicted {
                let s_in = run.params.s_in();
                Some(
                    config.trivial_threshold
                        - s.iter().fold(0.0f64, |m, v| m.max((v - s_in).abs())),
                )
            } else if run.solution.classification == Classification::NonTrivial {
                Some((eq.s_bar - min_of(s)).min(max_of(s) - eq.s_bar))
            } else {
                None
            }
        })
        .collect();
    checks.push(if margins.is_empty() {
        Check::not_applicable(
            "equilibrium",
            "only trivial solutions while an equilibrium exists",
        )
    } else {
        let m = min_of(&margins);
        Check::verdict(
            "equilibrium",
            m >= 0.0,
            m,
            Some(0.0),
            "s = s_in where mean D >= mu_max, otherwise min s <= s_bar <= max s",
        )
    });

    // direct-quadrature residual of the derivative
    if converged.is_empty() {
        checks.push(Check::not_applicable(
            "direct-residual",
            "no converged solution",
        ));
    } else {
        let worst = converged
            .iter()
            .map(|r| r.direct_residual)
            .fold(0.0, f64::max);
        checks.push(Check::verdict(
            "direct-residual",
            worst <= DIRECT_RESIDUAL_LIMIT,
            worst,
            Some(DIRECT_RESIDUAL_LIMIT),
            "derivative by direct quadrature of its defining integral",
        ));
        let worst_v = converged
            .iter()
            .map(|r| r.volterra_residual)
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "integral-form",
            CheckStatus::Info,
            Some(worst_v),
            None,
            "sliding Riemann-Liouville integral form; the window-limited integral does not invert the window-limited derivative, so this is reported only",
        ));
    }

    checks.extend(study_checks(report, &converged, d_max));
    Ok(Verification {
        checks,
        not_converged,
    })
}

fn study_checks(report: &RunReport, converged: &[&RunRecord], d_max: f64) -> Vec<Check> {
    let scenario = &report.scenario;
    let mut out = Vec::new();
    match &scenario.study {
        Study::Multistart { .. } | Study::Washout { .. } => {
            let params = &scenario.params;
            let s_star = params.s_star();
            let applies = d_max <= params.nu_s_star();
            let below: Vec<&RunRecord> = converged
                .iter()
                .copied()
                .filter(|r| {
                    r.solution.classification == Classification::NonTrivial
                        && r.solution.s_at_zero <= s_star
                })
                .collect();
            out.push(if !applies || below.is_empty() {
                Check::not_applicable(
                    "uniqueness",
                    "needs D(t) <= nu(s*) and a non-trivial solution with s(0) <= s*",
                )
            } else {
                let spread = below
                    .iter()
                    .map(|r| r.solution.sup_distance(&below[0].solution))
                    .fold(0.0, f64::max);
                Check::verdict(
                    "uniqueness",
                    spread <= scenario.config.cluster_radius,
                    spread,
                    Some(scenario.config.cluster_radius),
                    format!(
                        "{} non-trivial solutions with s(0) <= s* = {s_star}",
                        below.len()
                    ),
                )
            });
            if let Study::Washout { .. } = scenario.study {
                let others = converged
                    .iter()
                    .filter(|r| r.solution.classification != Classification::TrivialWashout)
                    .count();
                out.push(Check::verdict(
                    "all-washout",
                    others == 0 && !converged.is_empty(),
                    others as f64,
                    Some(0.0),
                    format!("{} converged runs not at s = s_in", others),
                ));
            }
        }
        Study::Bangbang => {
            let s_star = scenario.params.s_star();
            match converged.first() {
                Some(run) if run.solution.classification == Classification::NonTrivial => {
                    out.push(Check::verdict(
                        "threshold",
                        run.solution.s_at_zero <= s_star,
                        run.solution.s_at_zero,
                        Some(s_star),
                        "s(0) <= s*",
                    ))
                }
                _ => out.push(Check::verdict(
                    "threshold",
                    false,
                    f64::NAN,
                    Some(s_star),
                    "no non-trivial solution",
                )),
            }
        }
        Study::Sweep { parameter, .. } => {
            let nontrivial = converged
                .iter()
                .filter(|r| r.solution.classification == Classification::NonTrivial)
                .count();
            out.push(Check::verdict(
                "sweep-nontrivial",
                nontrivial == report.runs.len(),
                nontrivial as f64,
                Some(report.runs.len() as f64),
                "every sweep value yields a non-trivial solution",
            ));
            match parameter {
                SweepParameter::MemoryLength => out.push(memory_convergence(converged)),
                SweepParameter::Theta => out.push(amplitude_monotone(converged)),
                SweepParameter::Alpha => {}
            }
        }
        Study::Single => {}
    }
    out
}

fn run_at<'a>(runs: &[&'a RunRecord], v: f64) -> Option<&'a RunRecord> {
    runs.iter().copied().find(|r| r.value == Some(v))
}

/// Long memories settle: `d(L=3, L=5) < d(L=0.1, L=0.5)`.
fn memory_convergence(runs: &[&RunRecord]) -> Check {
    let name = "memory-convergence";
    match (
        run_at(runs, 0.1),
        run_at(runs, 0.5),
        run_at(runs, 3.0),
        run_at(runs, 5.0),
    ) {
        (Some(a), Some(b), Some(c), Some(d)) => {
            let short = a.solution.sup_distance(&b.solution);
            let long = c.solution.sup_distance(&d.solution);
            Check::verdict(
                name,
                long < short,
                long,
                Some(short),
                "sup distance between L=3 and L=5 below that between L=0.1 and L=0.5",
            )
        }
        _ => Check::not_applicable(name, "needs L values 0.1, 0.5, 3 and 5"),
    }
}

/// Oscillation amplitude `max s - min s` does not decrease with `ϑ`.
fn amplitude_monotone(runs: &[&RunRecord]) -> Check {
    let name = "amplitude-monotone";
    let mut pts: Vec<(f64, f64)> = runs
        .iter()
        .filter_map(|r| r.value.map(|v| (v, amplitude(r))))
        .collect();
    if pts.len() < 2 {
        return Check::not_applicable(name, "needs at least two theta values");
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let worst_drop = pts
        .windows(2)
        .map(|w| w[0].1 - w[1].1)
        .fold(f64::NEG_INFINITY, f64::max);
    Check::verdict(
        name,
        worst_drop <= 0.0,
        worst_drop,
        Some(0.0),
        "largest decrease of max s - min s between consecutive theta values",
    )
}
