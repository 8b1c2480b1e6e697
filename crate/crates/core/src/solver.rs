//! Periodic collocation of the substrate equation and its Newton solver.
//!
//! The unknowns are nodal substrate values `s_j = s(t_j)` on a
//! [`PeriodicGrid`]. The discrete system is
//!
//! ```text
//! R_j(s) = (A s)_j - f(t_j, s_j) = 0,
//! ```
//!
//! where `A` is the nodal matrix of the sliding-memory derivative. The
//! Jacobian is `A - diag(∂f/∂s)`, so each Newton step is one dense solve.

use crate::error::{Error, Result};
use crate::fracops::{cfds_direct, sliding_rl_integral_fn, CfdsOperator};
use crate::grid::{PeriodicGrid, TrigInterpolant};
use crate::model::{ChemostatParams, DilutionSchedule};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Newton and discretisation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub node_count: usize,
    pub interpolation_count: usize,
    pub newton_tol: f64,
    pub max_iterations: usize,
    pub backtrack: f64,
    pub min_step: f64,
    pub trivial_threshold: f64,
    pub cluster_radius: f64,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self::smooth()
    }
}

impl SolveConfig {
    /// `N = 100`, `M = 200`: the mesh for smooth dilution schedules.
    pub fn smooth() -> Self {
        Self {
            node_count: 100,
            interpolation_count: 200,
            newton_tol: 1e-12,
            max_iterations: 200,
            backtrack: 0.5,
            min_step: 2f64.powi(-20),
            trivial_threshold: 1e-6,
            cluster_radius: 1e-6,
            seed: 42,
        }
    }

    /// `N = 300`, `M = 400`: the refined mesh for discontinuous schedules.
    pub fn discontinuous() -> Self {
        Self {
            node_count: 300,
            interpolation_count: 400,
            ..Self::smooth()
        }
    }

    /// Picks the smooth or refined mesh based on the schedule.
    pub fn for_schedule(schedule: &DilutionSchedule) -> Self {
        if schedule.is_discontinuous() {
            Self::discontinuous()
        } else {
            Self::smooth()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.node_count < 4 || !self.node_count.is_multiple_of(2) {
            return bad(format!(
                "node_count must be even and >= 4, got {}",
                self.node_count
            ));
        }
        if self.interpolation_count < self.node_count {
            return bad(format!(
                "interpolation_count {} is below node_count {}",
                self.interpolation_count, self.node_count
            ));
        }
        for (name, v) in [
            ("newton_tol", self.newton_tol),
            ("min_step", self.min_step),
            ("trivial_threshold", self.trivial_threshold),
            ("cluster_radius", self.cluster_radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad(format!(
                "backtrack must lie in (0, 1), got {}",
                self.backtrack
            ));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if self.seed > i64::MAX as u64 {
            return bad(format!(
                "seed must not exceed {}, got {}",
                i64::MAX,
                self.seed
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    NonTrivial,
    TrivialWashout,
    NotConverged,
}

/// A converged (or abandoned) periodic substrate profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSolution {
    pub grid: PeriodicGrid,
    pub s_nodes: Vec<f64>,
    pub x_nodes: Vec<f64>,
    /// `|R_j|` at the final iterate.
    pub residual_nodes: Vec<f64>,
    pub residual_sup: f64,
    pub iterations: usize,
    pub classification: Classification,
    pub s_at_zero: f64,
}

impl PeriodicSolution {
    pub fn converged(&self) -> bool {
        self.classification != Classification::NotConverged
    }

    /// Trigonometric interpolation of `s` on `t̂_j = jT/M`, `j = 0..M`.
    pub fn interpolate(&self, m: usize) -> Result<DenseSeries> {
        let interp = TrigInterpolant::new(&self.grid, &self.s_nodes)?;
        let values = interp.resample(m)?;
        let period = self.grid.period();
        Ok(DenseSeries {
            times: (0..m).map(|j| j as f64 * period / m as f64).collect(),
            values,
        })
    }

    pub fn interpolant(&self) -> TrigInterpolant {
        TrigInterpolant::new(&self.grid, &self.s_nodes).expect("solution matches its grid")
    }

    pub fn sup_distance(&self, other: &PeriodicSolution) -> f64 {
        sup_distance(&self.s_nodes, &other.s_nodes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Collocation residual `R_j = (A s)_j - f(t_j, s_j)`.
pub fn residual(
    s_nodes: &[f64],
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
    op: &CfdsOperator,
) -> Result<Vec<f64>> {
    let deriv = op.apply(s_nodes)?;
    let grid = op.grid();
    s_nodes
        .iter()
        .zip(deriv)
        .enumerate()
        .map(|(j, (&s, d))| Ok(d - params.rhs_f(grid.node(j), s, schedule)?))
        .collect()
}

/// `J = A - diag(∂f/∂s(t_j, s_j))`.
pub fn jacobian(
    s_nodes: &[f64],
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
    op: &CfdsOperator,
) -> Result<DMatrix<f64>> {
    let grid = op.grid();
    grid.check_len(s_nodes.len())?;
    let mut j = op.nodal_matrix();
    for (i, &s) in s_nodes.iter().enumerate() {
        j[(i, i)] -= params.rhs_df_ds(grid.node(i), s, schedule)?;
    }
    Ok(j)
}

/// Discretised problem: operator, its nodal matrix and the sampled schedule,
/// shared by every Newton solve on the same grid.
#[derive(Debug, Clone)]
pub struct Collocation {
    params: ChemostatParams,
    schedule: DilutionSchedule,
    op: CfdsOperator,
    matrix: DMatrix<f64>,
}

impl Collocation {
    pub fn new(
        params: &ChemostatParams,
        schedule: &DilutionSchedule,
        node_count: usize,
    ) -> Result<Self> {
        if (schedule.period() - params.period()).abs() > 1e-12 * params.period() {
            return Err(Error::Config(format!(
                "schedule period {} differs from model period {}",
                schedule.period(),
                params.period()
            )));
        }
        let grid = PeriodicGrid::new(params.period(), node_count)?;
        let op = CfdsOperator::new(&grid, params.alpha(), params.memory_length())?;
        let matrix = op.nodal_matrix();
        Ok(Self {
            params: *params,
            schedule: schedule.clone(),
            op,
            matrix,
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.op.grid()
    }

    pub fn operator(&self) -> &CfdsOperator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn params(&self) -> &ChemostatParams {
        &self.params
    }

    pub fn schedule(&self) -> &DilutionSchedule {
        &self.schedule
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(0.0, self.params.s_in())
    }

    /// Residual and right-hand side values at the nodes.
    fn evaluate(&self, s: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let sv = DVector::from_column_slice(s);
        let deriv = &self.matrix * sv;
        let grid = self.grid();
        let f: Vec<f64> = s
            .iter()
            .enumerate()
            .map(|(j, &sj)| {
                self.params
                    .rhs_f(grid.node(j), sj, &self.schedule)
                    .expect("iterate clamped to [0, s_in]")
            })
            .collect();
        let r = deriv.iter().zip(&f).map(|(d, fj)| d - fj).collect();
        (r, f)
    }

    fn jacobian_at(&self, s: &[f64]) -> DMatrix<f64> {
        let mut j = self.matrix.clone();
        let grid = self.grid();
        for (i, &si) in s.iter().enumerate() {
            j[(i, i)] -= self
                .params
                .rhs_df_ds(grid.node(i), si, &self.schedule)
                .expect("iterate clamped to [0, s_in]");
        }
        j
    }

    /// Damped Newton from `initial_guess`.
    pub fn solve(&self, initial_guess: &[f64], config: &SolveConfig) -> Result<PeriodicSolution> {
        config.validate()?;
        let grid = self.grid();
        grid.check_len(initial_guess.len())?;
        let s_in = self.params.s_in();
        if let Some(&bad) = initial_guess.iter().find(|v| !(**v >= 0.0 && **v <= s_in)) {
            return Err(crate::error::domain(
                "initial_guess",
                bad,
                "values must lie in [0, s_in]",
            ));
        }

        let mut s = initial_guess.to_vec();
        let (mut r, mut f) = self.evaluate(&s);
        let mut iterations = 0;
        let mut converged = false;
        loop {
            if sup_norm(&r) <= config.newton_tol * (1.0 + sup_norm(&f)) {
                converged = true;
                break;
            }
            if iterations >= config.max_iterations {
                break;
            }
            let Some(step) = self.newton_step(&s, &r) else {
                break;
            };
            let norm0 = l2_norm(&r);
            let mut lambda = 1.0;
            let mut accepted = None;
            while lambda >= config.min_step {
                let trial: Vec<f64> = s
                    .iter()
                    .zip(&step)
                    .map(|(si, di)| self.clamp(si + lambda * di))
                    .collect();
                let (rt, ft) = self.evaluate(&trial);
                if l2_norm(&rt) <= (1.0 - 1e-4 * lambda) * norm0 {
                    accepted = Some((trial, rt, ft));
                    break;
                }
                lambda *= config.backtrack;
            }
            iterations += 1;
            match accepted {
                Some((trial, rt, ft)) => {
                    s = trial;
                    r = rt;
                    f = ft;
                }
                None => break,
            }
        }

        let residual_sup = sup_norm(&r);
        let classification = if !converged {
            Classification::NotConverged
        } else if s
            .iter()
            .all(|v| (v - s_in).abs() <= config.trivial_threshold)
        {
            Classification::TrivialWashout
        } else {
            Classification::NonTrivial
        };
        Ok(PeriodicSolution {
            grid: grid.clone(),
            x_nodes: self.params.biomass_from_substrate(&s),
            s_at_zero: s[0],
            s_nodes: s,
            residual_nodes: r.iter().map(|v| v.abs()).collect(),
            residual_sup,
            iterations,
            classification,
        })
    }

    /// Solves `J δ = -R`; on a singular factorisation retries once with
    /// `J + 1e-12 I`.
    fn newton_step(&self, s: &[f64], r: &[f64]) -> Option<Vec<f64>> {
        let rhs = -DVector::from_column_slice(r);
        let mut j = self.jacobian_at(s);
        for attempt in 0..2 {
            if attempt == 1 {
                for i in 0..s.len() {
                    j[(i, i)] += 1e-12;
                }
            }
            if let Some(step) = j.clone().lu().solve(&rhs) {
                if step.iter().all(|v| v.is_finite()) {
                    return Some(step.iter().copied().collect());
                }
            }
        }
        None
    }

    /// Runs `n_starts` solves from elementwise-uniform guesses on `[0, s_in]`.
    /// Start `i` draws its guess from a generator seeded with `seed + i`.
    pub fn multistart(&self, n_starts: usize, config: &SolveConfig) -> Result<MultistartOutcome> {
        if n_starts == 0 {
            return Err(Error::Config("multistart needs at least one start".into()));
        }
        config.validate()?;
        let n = self.grid().node_count();
        let s_in = self.params.s_in();
        let solutions = (0..n_starts)
            .into_par_iter()
            .map(|i| {
                let guess = random_guess(n, s_in, config.seed.wrapping_add(i as u64));
                self.solve(&guess, config)
            })
            .collect::<Result<Vec<_>>>()?;
        let summary = MultistartSummary::from_solutions(&solutions, config.cluster_radius);
        Ok(MultistartOutcome { solutions, summary })
    }
}

/// Elementwise-uniform guess on `[0, s_in]`.
pub fn random_guess(n: usize, s_in: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0.0..=s_in)).collect()
}

/// One-shot solve on a fresh discretisation.
pub fn solve(
    initial_guess: &[f64],
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
    config: &SolveConfig,
) -> Result<PeriodicSolution> {
    config.validate()?;
    Collocation::new(params, schedule, config.node_count)?.solve(initial_guess, config)
}

pub fn multistart(
    n_starts: usize,
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
    config: &SolveConfig,
) -> Result<MultistartOutcome> {
    config.validate()?;
    Collocation::new(params, schedule, config.node_count)?.multistart(n_starts, config)
}

#[derive(Debug, Clone)]
pub struct MultistartOutcome {
    pub solutions: Vec<PeriodicSolution>,
    pub summary: MultistartSummary,
}

/// Converged runs grouped by sup-norm distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartSummary {
    pub buckets: Vec<Bucket>,
    pub not_converged: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub classification: Classification,
    /// Index of the first solution that opened the bucket.
    pub representative: usize,
    pub members: Vec<usize>,
}

impl Bucket {
    pub fn count(&self) -> usize {
        self.members.len()
    }
}

impl MultistartSummary {
    /// Greedy clustering: a converged solution joins the first bucket whose
    /// representative lies within `radius`, otherwise it opens a new one.
    pub fn from_solutions(solutions: &[PeriodicSolution], radius: f64) -> Self {
        let mut buckets: Vec<Bucket> = Vec::new();
        let mut not_converged = 0;
        for (i, sol) in solutions.iter().enumerate() {
            if !sol.converged() {
                not_converged += 1;
                continue;
            }
            match buckets
                .iter_mut()
                .find(|b| solutions[b.representative].sup_distance(sol) <= radius)
            {
                Some(b) => b.members.push(i),
                None => buckets.push(Bucket {
                    classification: sol.classification,
                    representative: i,
                    members: vec![i],
                }),
            }
        }
        Self {
            buckets,
            not_converged,
        }
    }

    /// Number of buckets with the given classification.
    pub fn count(&self, class: Classification) -> usize {
        self.buckets
            .iter()
            .filter(|b| b.classification == class)
            .count()
    }

    /// Number of runs, across all buckets, with the given classification.
    pub fn runs(&self, class: Classification) -> usize {
        self.buckets
            .iter()
            .filter(|b| b.classification == class)
            .map(Bucket::count)
            .sum()
    }
}

/// Collocation solution of the coupled substrate/biomass system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullSolution {
    pub grid: PeriodicGrid,
    pub s_nodes: Vec<f64>,
    pub x_nodes: Vec<f64>,
    /// `sup |Y(s_in - s) - x|`.
    pub z_sup: f64,
    pub residual_sup: f64,
    pub iterations: usize,
    pub classification: Classification,
}

/// Stacked residual, right-hand side and nodal `2×2` Jacobian blocks.
type FullEvaluation = (Vec<f64>, Vec<f64>, Vec<[[f64; 2]; 2]>);

/// Damped Newton on the `2N` collocation equations of the unreduced model.
pub fn solve_2d(
    initial_s: &[f64],
    initial_x: &[f64],
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
    config: &SolveConfig,
) -> Result<FullSolution> {
    config.validate()?;
    let disc = Collocation::new(params, schedule, config.node_count)?;
    let grid = disc.grid().clone();
    let n = grid.node_count();
    grid.check_len(initial_s.len())?;
    grid.check_len(initial_x.len())?;
    let s_in = params.s_in();
    let clamp = |u: &mut [f64]| {
        for v in &mut u[..n] {
            *v = v.clamp(0.0, s_in);
        }
        for v in &mut u[n..] {
            *v = v.max(0.0);
        }
    };

    let evaluate = |u: &[f64]| -> Result<FullEvaluation> {
        let ds = &disc.matrix * DVector::from_column_slice(&u[..n]);
        let dx = &disc.matrix * DVector::from_column_slice(&u[n..]);
        let mut r = vec![0.0; 2 * n];
        let mut f = vec![0.0; 2 * n];
        let mut jac = Vec::with_capacity(n);
        for j in 0..n {
            let rhs = params.full_rhs(grid.node(j), u[j], u[n + j], schedule)?;
            f[j] = rhs.substrate;
            f[n + j] = rhs.biomass;
            r[j] = ds[j] - rhs.substrate;
            r[n + j] = dx[j] - rhs.biomass;
            jac.push(rhs.jacobian);
        }
        Ok((r, f, jac))
    };

    let mut u: Vec<f64> = initial_s.iter().chain(initial_x).copied().collect();
    clamp(&mut u);
    let (mut r, mut f, mut jac) = evaluate(&u)?;
    let mut iterations = 0;
    let mut converged = false;
    loop {
        if sup_norm(&r) <= config.newton_tol * (1.0 + sup_norm(&f)) {
            converged = true;
            break;
        }
        if iterations >= config.max_iterations {
            break;
        }
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&disc.matrix);
        big.view_mut((n, n), (n, n)).copy_from(&disc.matrix);
        for (j, p) in jac.iter().enumerate() {
            big[(j, j)] -= p[0][0];
            big[(j, n + j)] -= p[0][1];
            big[(n + j, j)] -= p[1][0];
            big[(n + j, n + j)] -= p[1][1];
        }
        let rhs = -DVector::from_column_slice(&r);
        let step = match big.clone().lu().solve(&rhs) {
            Some(step) if step.iter().all(|v| v.is_finite()) => step,
            _ => {
                for i in 0..2 * n {
                    big[(i, i)] += 1e-12;
                }
                match big.lu().solve(&rhs) {
                    Some(step) if step.iter().all(|v| v.is_finite()) => step,
                    _ => break,
                }
            }
        };
        let norm0 = l2_norm(&r);
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= config.min_step {
            let mut trial: Vec<f64> = u
                .iter()
                .zip(step.iter())
                .map(|(a, b)| a + lambda * b)
                .collect();
            clamp(&mut trial);
            let (rt, ft, jt) = evaluate(&trial)?;
            if l2_norm(&rt) <= (1.0 - 1e-4 * lambda) * norm0 {
                accepted = Some((trial, rt, ft, jt));
                break;
            }
            lambda *= config.backtrack;
        }
        iterations += 1;
        match accepted {
            Some((trial, rt, ft, jt)) => {
                u = trial;
                r = rt;
                f = ft;
                jac = jt;
            }
            None => break,
        }
    }

    let s_nodes = u[..n].to_vec();
    let x_nodes = u[n..].to_vec();
    let z = params.z_transform(&s_nodes, &x_nodes)?;
    let classification = if !converged {
        Classification::NotConverged
    } else if s_nodes
        .iter()
        .all(|v| (v - s_in).abs() <= config.trivial_threshold)
        && x_nodes.iter().all(|v| v.abs() <= config.trivial_threshold)
    {
        Classification::TrivialWashout
    } else {
        Classification::NonTrivial
    };
    Ok(FullSolution {
        grid,
        z_sup: sup_norm(&z),
        residual_sup: sup_norm(&r),
        iterations,
        classification,
        s_nodes,
        x_nodes,
    })
}

/// `∫_0^T z·D^α_L z dt + ϑ^{1-α} ∫_0^T D z² dt`, both by the periodic
/// trapezoid rule on the nodes. Vanishes for a periodic solution of the
/// `z`-equation.
pub fn energy_balance(
    z_nodes: &[f64],
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
    op: &CfdsOperator,
) -> Result<f64> {
    let dz = op.apply(z_nodes)?;
    let grid = op.grid();
    let h = grid.spacing();
    let memory_term: f64 = z_nodes.iter().zip(&dz).map(|(z, d)| z * d).sum::<f64>() * h;
    let dissipation: f64 = z_nodes
        .iter()
        .enumerate()
        .map(|(j, z)| schedule.evaluate(grid.node(j)) * z * z)
        .sum::<f64>()
        * h;
    Ok(memory_term + params.time_scale() * dissipation)
}

/// Defect of the integral form `s(t) = s(t - L + kT) + I^α_L f(·, s(·))(t)`
/// at every node, with `k` the smallest integer putting `t - L + kT` in
/// `[0, T]`. Returns the sup over nodes.
///
/// `s(τ)` is the trigonometric interpolant of the nodal values (clamped to
/// `[0, s_in]`), and the quadrature splits at the jumps of `D`.
pub fn volterra_residual(
    solution: &PeriodicSolution,
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
) -> Result<f64> {
    let interp = solution.interpolant();
    let period = params.period();
    let memory = params.memory_length();
    let s_in = params.s_in();
    let s_at = |tau: f64| interp.eval(tau).clamp(0.0, s_in);
    let g = |tau: f64| {
        params
            .rhs_f(tau, s_at(tau), schedule)
            .expect("clamped substrate")
    };
    let mut worst: f64 = 0.0;
    for (j, &sj) in solution.s_nodes.iter().enumerate() {
        let t = solution.grid.node(j);
        let k = ((memory - t) / period).ceil();
        let shifted = t - memory + k * period;
        let breaks = schedule.discontinuities(t - memory, t);
        let integral = sliding_rl_integral_fn(g, params.alpha(), memory, t, &breaks)?;
        worst = worst.max((sj - (s_at(shifted) + integral)).abs());
    }
    Ok(worst)
}

/// Defect of the differential form with the derivative evaluated by direct
/// quadrature of its defining integral (not through the Fourier
/// multipliers): `sup_j |D^α_L s(t_j) - f(t_j, s_j)|`.
pub fn direct_residual(
    solution: &PeriodicSolution,
    params: &ChemostatParams,
    schedule: &DilutionSchedule,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (j, &sj) in solution.s_nodes.iter().enumerate() {
        let t = solution.grid.node(j);
        let d = cfds_direct(
            &solution.grid,
            &solution.s_nodes,
            params.alpha(),
            params.memory_length(),
            t,
        )?;
        worst = worst.max((d - params.rhs_f(t, sj, schedule)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DilutionProfile;

    fn reference() -> (ChemostatParams, DilutionSchedule) {
        let p = ChemostatParams::reference();
        let d = DilutionSchedule::new(DilutionProfile::reference_sinusoid(), 1.0).unwrap();
        (p, d)
    }

    #[test]
    fn trivial_state_has_zero_residual() {
        let (p, d) = reference();
        let grid = PeriodicGrid::new(1.0, 16).unwrap();
        let op = CfdsOperator::new(&grid, 0.8, 1.5).unwrap();
        let r = residual(&[1.0; 16], &p, &d, &op).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn constant_equilibrium_has_zero_residual() {
        let (p, _) = reference();
        let d = DilutionSchedule::constant(1.0, 1.0).unwrap();
        let s_bar = p.equilibrium(&d).s_bar;
        let grid = PeriodicGrid::new(1.0, 16).unwrap();
        let op = CfdsOperator::new(&grid, 0.8, 1.5).unwrap();
        let r = residual(&[s_bar; 16], &p, &d, &op).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn equilibrium_under_sinusoid_tracks_dilution_sign() {
        let (p, d) = reference();
        let s_bar = p.equilibrium(&d).s_bar;
        let grid = PeriodicGrid::new(1.0, 16).unwrap();
        let op = CfdsOperator::new(&grid, 0.8, 1.5).unwrap();
        let r = residual(&[s_bar; 16], &p, &d, &op).unwrap();
        for (j, rj) in r.iter().enumerate() {
            let t = grid.node(j);
            let expect = -p.rhs_f(t, s_bar, &d).unwrap();
            assert!((rj - expect).abs() < 1e-14);
            let dd = d.evaluate(t) - 1.0;
            if dd.abs() > 1e-12 {
                assert_eq!(rj.signum(), -dd.signum());
            }
        }
    }

    #[test]
    fn jacobian_at_washout() {
        let (p, d) = reference();
        let grid = PeriodicGrid::new(1.0, 12).unwrap();
        let op = CfdsOperator::new(&grid, 0.8, 1.5).unwrap();
        let j = jacobian(&[1.0; 12], &p, &d, &op).unwrap();
        let a = op.nodal_matrix();
        for i in 0..12 {
            let expect = a[(i, i)] - (3.1 - d.evaluate(grid.node(i)));
            assert!((j[(i, i)] - expect).abs() < 1e-13);
            let row_sum: f64 = (0..12).map(|k| a[(i, k)]).sum();
            assert!(row_sum.abs() < 1e-12);
        }
    }

    #[test]
    fn exact_root_needs_no_iterations() {
        let (p, _) = reference();
        let d = DilutionSchedule::constant(1.0, 1.0).unwrap();
        let s_bar = p.equilibrium(&d).s_bar;
        let cfg = SolveConfig {
            node_count: 16,
            interpolation_count: 32,
            ..SolveConfig::smooth()
        };
        let sol = solve(&[s_bar; 16], &p, &d, &cfg).unwrap();
        assert_eq!(sol.classification, Classification::NonTrivial);
        assert!(sol.iterations <= 2);
        assert!(sup_distance(&sol.s_nodes, &[s_bar; 16]) < 1e-14);
    }

    #[test]
    fn guess_must_be_in_domain() {
        let (p, d) = reference();
        let cfg = SolveConfig {
            node_count: 8,
            interpolation_count: 8,
            ..SolveConfig::smooth()
        };
        assert!(solve(&[1.2; 8], &p, &d, &cfg).is_err());
        assert!(solve(&[0.5; 6], &p, &d, &cfg).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = SolveConfig::smooth();
        c.node_count = 99;
        assert!(c.validate().is_err());
        let mut c = SolveConfig::smooth();
        c.interpolation_count = 50;
        assert!(c.validate().is_err());
        let mut c = SolveConfig::smooth();
        c.newton_tol = 0.0;
        assert!(c.validate().is_err());
        assert!(SolveConfig::discontinuous().validate().is_ok());
    }

    #[test]
    fn bucketing_counts_not_converged_separately() {
        let grid = PeriodicGrid::new(1.0, 4).unwrap();
        let mk = |v: f64, c| PeriodicSolution {
            grid: grid.clone(),
            s_nodes: vec![v; 4],
            x_nodes: vec![1.0 - v; 4],
            residual_nodes: vec![0.0; 4],
            residual_sup: 0.0,
            iterations: 1,
            classification: c,
            s_at_zero: v,
        };
        let sols = vec![
            mk(0.3, Classification::NonTrivial),
            mk(1.0, Classification::TrivialWashout),
            mk(0.3 + 1e-9, Classification::NonTrivial),
            mk(0.7, Classification::NotConverged),
        ];
        let s = MultistartSummary::from_solutions(&sols, 1e-6);
        assert_eq!(s.buckets.len(), 2);
        assert_eq!(s.buckets[0].members, vec![0, 2]);
        assert_eq!(s.not_converged, 1);
        assert_eq!(s.count(Classification::TrivialWashout), 1);
    }

    #[test]
    fn random_guesses_are_reproducible() {
        assert_eq!(random_guess(10, 1.0, 42), random_guess(10, 1.0, 42));
        assert_ne!(random_guess(10, 1.0, 42), random_guess(10, 1.0, 43));
        assert!(random_guess(100, 2.0, 7)
            .iter()
            .all(|v| (0.0..=2.0).contains(v)));
    }
}
