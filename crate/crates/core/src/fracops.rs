//! The sliding-memory Caputo derivative on `T`-periodic functions.
//!
//! For a single Fourier mode `e^{iωt}` the derivative
//! `(1/Γ(1-α)) ∫_{t-L}^{t} (t-τ)^{-α} f'(τ) dτ` returns the same mode scaled by
//!
//! ```text
//! m(ω) = iω/Γ(1-α) · ∫_0^L u^{-α} e^{-iωu} du,
//! ```
//!
//! so on a periodic grid the operator is diagonal in the trigonometric basis.
//! [`CfdsOperator`] stores these multipliers; [`cfds_direct`] and
//! [`sliding_rl_integral`] evaluate the defining integrals directly and serve
//! as independent checks.

use crate::error::{domain, Result};
use crate::grid::{fourier_coefficients, nodal_values, PeriodicGrid, TrigInterpolant};
use crate::quadrature::{jacobi_moment, GaussJacobi};
use nalgebra::DMatrix;
use num_complex::Complex64;
use statrs::function::gamma::gamma;
use std::sync::Arc;

pub const MIN_ORDER: usize = 64;
pub const MAX_ORDER: usize = 512;
pub const AGREEMENT: f64 = 1e-13;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(
            "alpha",
            alpha,
            "fractional order must lie in (0, 1]",
        ));
    }
    Ok(())
}

pub(crate) fn check_memory(memory_length: f64) -> Result<()> {
    if !(memory_length.is_finite() && memory_length > 0.0) {
        return Err(domain(
            "memory_length",
            memory_length,
            "must be positive and finite",
        ));
    }
    Ok(())
}

/// Gauss–Jacobi rules of doubling order for one weight, fetched on demand.
#[derive(Debug, Clone)]
pub(crate) struct RuleLadder {
    a: f64,
    b: f64,
    moment: f64,
    rules: Vec<Arc<GaussJacobi>>,
}

impl RuleLadder {
    pub(crate) fn new(a: f64, b: f64) -> Self {
        Self {
            a,
            b,
            moment: jacobi_moment(a, b),
            rules: Vec::new(),
        }
    }

    fn rule(&mut self, level: usize) -> &GaussJacobi {
        while self.rules.len() <= level {
            let n = MIN_ORDER << self.rules.len();
            let rule =
                GaussJacobi::cached(n, self.a, self.b).expect("exponents validated by caller");
            self.rules.push(rule);
        }
        &self.rules[level]
    }

    /// Doubles the order from [`MIN_ORDER`] until two successive estimates
    /// agree to [`AGREEMENT`] relative to the integrand's absolute mass, or
    /// [`MAX_ORDER`] is reached. Returns the estimate and the order used.
    ///
    /// The sum is anchored at `x = -1`: `g(-1)` is integrated against the
    /// exact moment and only `g(x) - g(-1)` meets the discrete weights.
    /// Weights of nodes crowding a strongly singular endpoint carry relative
    /// errors of order `ε / (1 + x_i)`, and the anchored difference is
    /// `O(1 + x_i)` there, so the two cancel.
    pub(crate) fn integrate<G: Fn(f64) -> Complex64>(&mut self, g: G) -> (Complex64, usize) {
        let anchor = g(-1.0);
        let moment = self.moment;
        let eval = |rule: &GaussJacobi| {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut mass = 0.0;
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                let v = g(x);
                sum += (v - anchor) * w;
                mass += w * v.norm();
            }
            (sum + anchor * moment, mass)
        };
        let (mut prev, _) = eval(self.rule(0));
        let mut level = 1;
        loop {
            let (cur, mass) = eval(self.rule(level));
            let order = MIN_ORDER << level;
            if (cur - prev).norm() <= AGREEMENT * cur.norm().max(mass) || order >= MAX_ORDER {
                return (cur, order);
            }
            prev = cur;
            level += 1;
        }
    }
}

/// `∫_0^L u^{-α} e^{-iωu} du` for `α ∈ (0, 1)`.
fn kernel_transform(
    ladder: &mut RuleLadder,
    alpha: f64,
    memory_length: f64,
    omega: f64,
) -> Complex64 {
    let half = 0.5 * memory_length;
    let (integral, _) = ladder.integrate(|x| Complex64::from_polar(1.0, -omega * half * (1.0 + x)));
    integral * half.powf(1.0 - alpha)
}

fn multiplier_with(
    ladder: &mut RuleLadder,
    alpha: f64,
    memory_length: f64,
    omega: f64,
) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    if alpha == 1.0 {
        return Complex64::new(0.0, omega);
    }
    Complex64::new(0.0, omega) * kernel_transform(ladder, alpha, memory_length, omega)
        / gamma(1.0 - alpha)
}

/// Factor by which the sliding-memory derivative scales the mode `e^{iωt}`.
pub fn memory_multiplier(alpha: f64, memory_length: f64, omega: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    check_memory(memory_length)?;
    if !omega.is_finite() {
        return Err(domain("omega", omega, "angular frequency must be finite"));
    }
    let mut ladder = RuleLadder::new(0.0, -alpha);
    Ok(multiplier_with(&mut ladder, alpha, memory_length, omega))
}

/// The sliding-memory Caputo derivative restricted to a periodic grid.
#[derive(Debug, Clone)]
pub struct CfdsOperator {
    alpha: f64,
    memory_length: f64,
    grid: PeriodicGrid,
    // m(ω_k) in FFT slot order; slot N/2 holds the Nyquist mode k = -N/2
    multipliers: Vec<Complex64>,
}

impl CfdsOperator {
    pub fn new(grid: &PeriodicGrid, alpha: f64, memory_length: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_memory(memory_length)?;
        let n = grid.node_count();
        let mut ladder = RuleLadder::new(0.0, -alpha);
        let mut multipliers = vec![Complex64::new(0.0, 0.0); n];
        for k in 1..=n / 2 {
            let m = multiplier_with(
                &mut ladder,
                alpha,
                memory_length,
                grid.angular_frequency(k as i64),
            );
            if k < n / 2 {
                multipliers[k] = m;
            }
            multipliers[n - k] = m.conj();
        }
        Ok(Self {
            alpha,
            memory_length,
            grid: grid.clone(),
            multipliers,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn memory_length(&self) -> f64 {
        self.memory_length
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// `m(ω_k)` for a mode index `k ∈ [-N/2, N/2)`.
    pub fn multiplier(&self, k: i64) -> Complex64 {
        let n = self.grid.node_count() as i64;
        assert!(k >= -n / 2 && k < n / 2, "mode {k} outside the grid basis");
        self.multipliers[k.rem_euclid(n) as usize]
    }

    /// All multipliers paired with their mode index, ordered `-N/2 .. N/2`.
    pub fn multipliers(&self) -> Vec<(i64, Complex64)> {
        self.grid
            .frequencies()
            .into_iter()
            .map(|(k, _)| (k, self.multiplier(k)))
            .collect()
    }

    /// Factor actually applied to FFT slot `idx`: the Nyquist cosine only
    /// keeps `Re m`, since its sine partner vanishes on the nodes.
    fn transfer(&self, idx: usize) -> Complex64 {
        if idx == self.grid.node_count() / 2 {
            Complex64::new(self.multipliers[idx].re, 0.0)
        } else {
            self.multipliers[idx]
        }
    }

    /// Applies the operator and returns the output together with the
    /// discarded imaginary residue relative to the output norm.
    pub fn apply_with_residue(&self, nodal_values_in: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.grid.check_len(nodal_values_in.len())?;
        let mut coeffs = fourier_coefficients(nodal_values_in);
        for (idx, c) in coeffs.iter_mut().enumerate() {
            *c *= self.transfer(idx);
        }
        let out = nodal_values(&coeffs);
        let norm = out.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
        let imag = out.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
        let residue = if norm > 0.0 { imag / norm } else { imag };
        Ok((out.into_iter().map(|c| c.re).collect(), residue))
    }

    pub fn apply(&self, nodal_values_in: &[f64]) -> Result<Vec<f64>> {
        self.apply_with_residue(nodal_values_in).map(|(v, _)| v)
    }

    /// Dense nodal matrix `A` with `(A v)_j = apply(v)_j`. The operator is
    /// translation invariant, so `A` is circulant and built from one column.
    pub fn nodal_matrix(&self) -> DMatrix<f64> {
        let n = self.grid.node_count();
        let mut unit = vec![0.0; n];
        unit[0] = 1.0;
        let column = self.apply(&unit).expect("unit vector matches grid");
        DMatrix::from_fn(n, n, |i, j| column[(i + n - j) % n])
    }
}

/// Evaluates the sliding-memory derivative of the trigonometric interpolant
/// of `samples` at `t_eval` straight from its integral definition.
pub fn cfds_direct(
    grid: &PeriodicGrid,
    samples: &[f64],
    alpha: f64,
    memory_length: f64,
    t_eval: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    check_memory(memory_length)?;
    check_time(grid, t_eval)?;
    let interp = TrigInterpolant::new(grid, samples)?;
    if alpha == 1.0 {
        return Ok(interp.derivative(t_eval));
    }
    let half = 0.5 * memory_length;
    let mut ladder = RuleLadder::new(0.0, -alpha);
    let (integral, _) =
        ladder.integrate(|x| Complex64::new(interp.derivative(t_eval - half * (1.0 + x)), 0.0));
    Ok(integral.re * half.powf(1.0 - alpha) / gamma(1.0 - alpha))
}

fn check_time(grid: &PeriodicGrid, t: f64) -> Result<()> {
    if !(t >= 0.0 && t < grid.period()) {
        return Err(domain("t_eval", t, "evaluation time must lie in [0, T)"));
    }
    Ok(())
}

/// Sliding Riemann–Liouville integral `(1/Γ(α)) ∫_{t-L}^{t} (t-τ)^{α-1} f(τ) dτ`
/// of the trigonometric interpolant of `samples`.
pub fn sliding_rl_integral(
    grid: &PeriodicGrid,
    samples: &[f64],
    alpha: f64,
    memory_length: f64,
    t_eval: f64,
) -> Result<f64> {
    check_time(grid, t_eval)?;
    let interp = TrigInterpolant::new(grid, samples)?;
    sliding_rl_integral_fn(|tau| interp.eval(tau), alpha, memory_length, t_eval, &[])
}

/// Sliding Riemann–Liouville integral of an arbitrary integrand.
///
/// `breakpoints` lists times where `f` may jump; those inside the window
/// split it so that every panel sees a smooth integrand. The panel touching
/// `t` carries the weak singularity and uses a Gauss–Jacobi rule; the others
/// use Gauss–Legendre with the kernel folded into the integrand.
pub fn sliding_rl_integral_fn<F: Fn(f64) -> f64>(
    f: F,
    alpha: f64,
    memory_length: f64,
    t_eval: f64,
    breakpoints: &[f64],
) -> Result<f64> {
    check_alpha(alpha)?;
    check_memory(memory_length)?;
    let start = t_eval - memory_length;
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > start && b < t_eval)
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();

    // singular panel [last_cut, t]
    let near = cuts.last().copied().unwrap_or(start);
    let width = t_eval - near;
    let half = 0.5 * width;
    let mut jacobi = RuleLadder::new(0.0, alpha - 1.0);
    let (singular, _) = jacobi.integrate(|x| Complex64::new(f(t_eval - half * (1.0 + x)), 0.0));
    let mut total = singular.re * half.powf(alpha);

    let mut legendre = RuleLadder::new(0.0, 0.0);
    let mut edges = Vec::with_capacity(cuts.len() + 1);
    edges.push(start);
    edges.extend_from_slice(&cuts);
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let (part, _) = legendre.integrate(|x| {
            let tau = mid + h * x;
            Complex64::new((t_eval - tau).powf(alpha - 1.0) * f(tau), 0.0)
        });
        total += part.re * h;
    }
    Ok(total / gamma(alpha))
}
