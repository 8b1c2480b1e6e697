//! Chemostat parameters, dilution schedules, Contois kinetics and the
//! closed-form quantities of the reduced substrate equation
//!
//! ```text
//! D^α_L s(t) = ϑ^{1-α} [D(t) - ν(s)] (s_in - s),   ν(s) = μ_max s / (KY(s_in - s) + s).
//! ```

use crate::error::{domain, Error, Result};
use crate::fracops::{check_alpha, check_memory};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Model constants. All strictly positive, `alpha ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRecord", into = "ParamsRecord")]
pub struct ChemostatParams {
    alpha: f64,
    memory_length: f64,
    period: f64,
    theta: f64,
    s_in: f64,
    yield_coefficient: f64,
    saturation: f64,
    mu_max: f64,
    ky: f64,
}

/// Serialized form of [`ChemostatParams`]; field names are the config keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRecord {
    pub alpha: f64,
    pub memory_length: f64,
    pub period: f64,
    pub theta: f64,
    pub s_in: f64,
    #[serde(rename = "yield")]
    pub yield_coefficient: f64,
    pub saturation: f64,
    pub mu_max: f64,
}

impl TryFrom<ParamsRecord> for ChemostatParams {
    type Error = Error;

    fn try_from(r: ParamsRecord) -> Result<Self> {
        check_alpha(r.alpha)?;
        check_memory(r.memory_length)?;
        for (name, value) in [
            ("period", r.period),
            ("theta", r.theta),
            ("s_in", r.s_in),
            ("yield", r.yield_coefficient),
            ("saturation", r.saturation),
            ("mu_max", r.mu_max),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(domain(name, value, "must be positive and finite"));
            }
        }
        Ok(Self {
            alpha: r.alpha,
            memory_length: r.memory_length,
            period: r.period,
            theta: r.theta,
            s_in: r.s_in,
            yield_coefficient: r.yield_coefficient,
            saturation: r.saturation,
            mu_max: r.mu_max,
            ky: r.saturation * r.yield_coefficient,
        })
    }
}

impl From<ChemostatParams> for ParamsRecord {
    fn from(p: ChemostatParams) -> Self {
        Self {
            alpha: p.alpha,
            memory_length: p.memory_length,
            period: p.period,
            theta: p.theta,
            s_in: p.s_in,
            yield_coefficient: p.yield_coefficient,
            saturation: p.saturation,
            mu_max: p.mu_max,
        }
    }
}

impl ChemostatParams {
    pub fn from_record(record: ParamsRecord) -> Result<Self> {
        record.try_into()
    }

    pub fn record(&self) -> ParamsRecord {
        (*self).into()
    }

    /// The reference dataset: α = 0.8, L = 1.5, T = ϑ = s_in = Y = K = 1, μ_max = 3.1.
    pub fn reference() -> Self {
        Self::from_record(ParamsRecord {
            alpha: 0.8,
            memory_length: 1.5,
            period: 1.0,
            theta: 1.0,
            s_in: 1.0,
            yield_coefficient: 1.0,
            saturation: 1.0,
            mu_max: 3.1,
        })
        .expect("reference parameters are valid")
    }

    /// Copy with one record field changed, re-validated.
    pub fn with(&self, edit: impl FnOnce(&mut ParamsRecord)) -> Result<Self> {
        let mut r = self.record();
        edit(&mut r);
        Self::from_record(r)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn memory_length(&self) -> f64 {
        self.memory_length
    }
    pub fn period(&self) -> f64 {
        self.period
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn s_in(&self) -> f64 {
        self.s_in
    }
    pub fn yield_coefficient(&self) -> f64 {
        self.yield_coefficient
    }
    pub fn saturation(&self) -> f64 {
        self.saturation
    }
    pub fn mu_max(&self) -> f64 {
        self.mu_max
    }
    /// `K·Y`.
    pub fn ky(&self) -> f64 {
        self.ky
    }

    /// Time-scale prefactor `ϑ^{1-α}`.
    pub fn time_scale(&self) -> f64 {
        self.theta.powf(1.0 - self.alpha)
    }

    fn check_substrate(&self, s: f64) -> Result<()> {
        if !(s >= 0.0 && s <= self.s_in) {
            return Err(domain("s", s, "substrate must lie in [0, s_in]"));
        }
        Ok(())
    }

    /// Contois specific growth rate `μ_max s / (Kx + s)`, with `μ(0, 0) = 0`.
    pub fn contois_mu(&self, s: f64, x: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(domain("s", s, "substrate must be non-negative"));
        }
        if x.is_nan() || x < 0.0 {
            return Err(domain("x", x, "biomass must be non-negative"));
        }
        let denom = self.saturation * x + s;
        if denom == 0.0 {
            return Ok(0.0);
        }
        Ok(self.mu_max * s / denom)
    }

    fn nu_denominator(&self, s: f64) -> f64 {
        self.ky * (self.s_in - s) + s
    }

    /// Growth rate on the manifold `x = Y(s_in - s)`.
    pub fn nu(&self, s: f64) -> Result<f64> {
        self.check_substrate(s)?;
        Ok(self.mu_max * s / self.nu_denominator(s))
    }

    pub fn nu_prime(&self, s: f64) -> Result<f64> {
        self.check_substrate(s)?;
        Ok(self.ky * self.mu_max * self.s_in / self.nu_denominator(s).powi(2))
    }

    pub fn nu_second(&self, s: f64) -> Result<f64> {
        self.check_substrate(s)?;
        Ok(2.0 * self.ky * self.mu_max * self.s_in * (self.ky - 1.0)
            / self.nu_denominator(s).powi(3))
    }

    /// Lipschitz constant of `ν` on `[0, s_in]`: `(μ_max/s_in)·max{KY, 1/KY}`.
    pub fn nu_max_lipschitz(&self) -> f64 {
        self.mu_max / self.s_in * self.ky.max(1.0 / self.ky)
    }

    /// Right-hand side `f(t, s) = ϑ^{1-α} [D(t) - ν(s)] (s_in - s)`.
    pub fn rhs_f(&self, t: f64, s: f64, schedule: &DilutionSchedule) -> Result<f64> {
        Ok(self.time_scale() * (schedule.evaluate(t) - self.nu(s)?) * (self.s_in - s))
    }

    /// `∂f/∂s = ϑ^{1-α} [ν(s) - D(t) - (s_in - s) ν'(s)]`.
    pub fn rhs_df_ds(&self, t: f64, s: f64, schedule: &DilutionSchedule) -> Result<f64> {
        Ok(self.time_scale()
            * (self.nu(s)? - schedule.evaluate(t) - (self.s_in - s) * self.nu_prime(s)?))
    }

    /// Bound `ϑ^{1-α} (D_max + μ_max) s_in` on `|f|` over `[0, T] × [0, s_in]`.
    pub fn rhs_bound(&self, schedule: &DilutionSchedule) -> f64 {
        self.time_scale() * (schedule.bounds().1 + self.mu_max) * self.s_in
    }

    /// Lipschitz constant of `f` in `s`: `ϑ^{1-α}(D_max + μ_max + 2 s_in ν_max)`.
    pub fn lipschitz_lf(&self, schedule: &DilutionSchedule) -> f64 {
        self.time_scale()
            * (schedule.bounds().1 + self.mu_max + 2.0 * self.s_in * self.nu_max_lipschitz())
    }

    /// Non-trivial steady state for the period-averaged dilution rate.
    pub fn equilibrium(&self, schedule: &DilutionSchedule) -> EquilibriumReport {
        let d = schedule.mean();
        if d < self.mu_max {
            let s_bar = d * self.ky * self.s_in / (d * self.ky + self.mu_max - d);
            EquilibriumReport {
                mean_dilution: d,
                s_bar,
                x_bar: self.yield_coefficient * (self.s_in - s_bar),
                exists: true,
                washout_predicted: false,
            }
        } else {
            EquilibriumReport {
                mean_dilution: d,
                s_bar: self.s_in,
                x_bar: 0.0,
                exists: false,
                washout_predicted: true,
            }
        }
    }

    /// Threshold `s* = s_in √KY / (√KY + 1)`, the maximiser of `h`.
    pub fn s_star(&self) -> f64 {
        let r = self.ky.sqrt();
        self.s_in * r / (r + 1.0)
    }

    /// `ν(s*) = μ_max / (1 + √KY)`.
    pub fn nu_s_star(&self) -> f64 {
        self.mu_max / (1.0 + self.ky.sqrt())
    }

    /// `h(s) = ν(s)(s_in - s)`, the consumption term.
    pub fn h(&self, s: f64) -> Result<f64> {
        Ok(self.nu(s)? * (self.s_in - s))
    }

    pub fn h_prime(&self, s: f64) -> Result<f64> {
        self.check_substrate(s)?;
        let u = self.s_in - s;
        Ok(self.mu_max * (self.ky * u * u - s * s) / self.nu_denominator(s).powi(2))
    }

    /// `x = Y(s_in - s)` pointwise.
    pub fn biomass_from_substrate(&self, s_values: &[f64]) -> Vec<f64> {
        s_values
            .iter()
            .map(|&s| self.yield_coefficient * (self.s_in - s))
            .collect()
    }

    /// `z = Y(s_in - s) - x` pointwise.
    pub fn z_transform(&self, s_values: &[f64], x_values: &[f64]) -> Result<Vec<f64>> {
        if s_values.len() != x_values.len() {
            return Err(Error::Dimension {
                expected: s_values.len(),
                got: x_values.len(),
            });
        }
        Ok(s_values
            .iter()
            .zip(x_values)
            .map(|(&s, &x)| self.yield_coefficient * (self.s_in - s) - x)
            .collect())
    }

    /// Right-hand sides of the coupled substrate/biomass equations and their
    /// partial derivatives `[[∂F1/∂s, ∂F1/∂x], [∂F2/∂s, ∂F2/∂x]]`.
    pub fn full_rhs(&self, t: f64, s: f64, x: f64, schedule: &DilutionSchedule) -> Result<FullRhs> {
        let mu = self.contois_mu(s, x)?;
        let d = schedule.evaluate(t);
        let scale = self.time_scale();
        let k = self.saturation;
        let denom = k * x + s;
        // partials of the uptake μ(s, x)·x
        let (dsx, dxx) = if denom == 0.0 {
            (0.0, self.mu_max)
        } else {
            (
                self.mu_max * k * x * x / (denom * denom),
                self.mu_max * s * s / (denom * denom),
            )
        };
        let y = self.yield_coefficient;
        Ok(FullRhs {
            substrate: scale * (-mu * x / y + d * (self.s_in - s)),
            biomass: scale * (mu - d) * x,
            jacobian: [
                [scale * (-dsx / y - d), scale * (-dxx / y)],
                [scale * dsx, scale * (dxx - d)],
            ],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullRhs {
    pub substrate: f64,
    pub biomass: f64,
    pub jacobian: [[f64; 2]; 2],
}

/// Steady state of the reduced equation under the mean dilution rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub mean_dilution: f64,
    pub s_bar: f64,
    pub x_bar: f64,
    pub exists: bool,
    pub washout_predicted: bool,
}

/// Shape of a `T`-periodic dilution rate, independent of the period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DilutionProfile {
    Constant {
        level: f64,
    },
    /// `mean + amplitude·sin(2πt/T)`.
    Sinusoid {
        mean: f64,
        amplitude: f64,
    },
    /// `d_max` on `[on_start·T, on_end·T)`, `d_min` elsewhere.
    #[serde(rename = "bangbang")]
    BangBang {
        d_min: f64,
        d_max: f64,
        on_start: f64,
        on_end: f64,
    },
    /// Nodal values at `jT/n`, read by nearest-node lookup.
    Table {
        values: Vec<f64>,
    },
}

impl DilutionProfile {
    /// The bang-bang schedule switching to `d_max` on `[T/4, 3T/4)`.
    pub fn reference_bang_bang() -> Self {
        Self::BangBang {
            d_min: 0.5,
            d_max: 1.5,
            on_start: 0.25,
            on_end: 0.75,
        }
    }

    pub fn reference_sinusoid() -> Self {
        Self::Sinusoid {
            mean: 1.0,
            amplitude: 0.5,
        }
    }
}

/// A validated dilution profile bound to its period.
#[derive(Debug, Clone, PartialEq)]
pub struct DilutionSchedule {
    period: f64,
    profile: DilutionProfile,
    bounds: (f64, f64),
}

impl DilutionSchedule {
    pub fn new(profile: DilutionProfile, period: f64) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(domain("period", period, "must be positive and finite"));
        }
        let bounds = match &profile {
            DilutionProfile::Constant { level } => (*level, *level),
            DilutionProfile::Sinusoid { mean, amplitude } => {
                (mean - amplitude.abs(), mean + amplitude.abs())
            }
            DilutionProfile::BangBang {
                d_min,
                d_max,
                on_start,
                on_end,
            } => {
                if d_max.is_nan() || d_max < d_min {
                    return Err(domain("d_max", *d_max, "must not be below d_min"));
                }
                if !(0.0 <= *on_start && on_start < on_end && *on_end <= 1.0) {
                    return Err(domain(
                        "on_start",
                        *on_start,
                        "switching fractions need 0 <= on_start < on_end <= 1",
                    ));
                }
                (*d_min, *d_max)
            }
            DilutionProfile::Table { values } => {
                if values.is_empty() {
                    return Err(Error::Config("dilution table is empty".into()));
                }
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        };
        if !(bounds.0.is_finite() && bounds.1.is_finite() && bounds.0 > 0.0) {
            return Err(domain(
                "d_min",
                bounds.0,
                "dilution rate must stay positive",
            ));
        }
        Ok(Self {
            period,
            profile,
            bounds,
        })
    }

    pub fn constant(level: f64, period: f64) -> Result<Self> {
        Self::new(DilutionProfile::Constant { level }, period)
    }

    pub fn profile(&self) -> &DilutionProfile {
        &self.profile
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// `(D_min, D_max)`.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    fn phase(&self, t: f64) -> f64 {
        let p = (t / self.period).rem_euclid(1.0);
        // rem_euclid can round up to exactly 1 for tiny negative inputs
        if p >= 1.0 {
            0.0
        } else {
            p
        }
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        match &self.profile {
            DilutionProfile::Constant { level } => *level,
            DilutionProfile::Sinusoid { mean, amplitude } => {
                mean + amplitude * (2.0 * PI * t / self.period).sin()
            }
            DilutionProfile::BangBang {
                d_min,
                d_max,
                on_start,
                on_end,
            } => {
                let tm = self.phase(t) * self.period;
                if tm >= on_start * self.period && tm < on_end * self.period {
                    *d_max
                } else {
                    *d_min
                }
            }
            DilutionProfile::Table { values } => {
                let n = values.len();
                let idx = (self.phase(t) * n as f64 + 0.5).floor() as usize % n;
                values[idx]
            }
        }
    }

    /// Period average `(1/T) ∫_0^T D dt`.
    pub fn mean(&self) -> f64 {
        match &self.profile {
            DilutionProfile::Constant { level } => *level,
            DilutionProfile::Sinusoid { mean, .. } => *mean,
            DilutionProfile::BangBang {
                d_min,
                d_max,
                on_start,
                on_end,
            } => d_min + (d_max - d_min) * (on_end - on_start),
            DilutionProfile::Table { values } => values.iter().sum::<f64>() / values.len() as f64,
        }
    }

    pub fn is_discontinuous(&self) -> bool {
        match &self.profile {
            DilutionProfile::Constant { .. } | DilutionProfile::Sinusoid { .. } => false,
            DilutionProfile::BangBang { d_min, d_max, .. } => d_min != d_max,
            DilutionProfile::Table { values } => values.windows(2).any(|w| w[0] != w[1]),
        }
    }

    /// Jump times of `D` inside the open interval `(a, b)`.
    pub fn discontinuities(&self, a: f64, b: f64) -> Vec<f64> {
        let fractions: Vec<f64> = match &self.profile {
            DilutionProfile::Constant { .. } | DilutionProfile::Sinusoid { .. } => {
                return Vec::new()
            }
            DilutionProfile::BangBang {
                on_start, on_end, ..
            } => vec![*on_start, *on_end],
            DilutionProfile::Table { values } => {
                let n = values.len() as f64;
                (0..values.len()).map(|j| (j as f64 + 0.5) / n).collect()
            }
        };
        let first = (a / self.period).floor() as i64 - 1;
        let last = (b / self.period).ceil() as i64 + 1;
        let mut out = Vec::new();
        for k in first..=last {
            for f in &fractions {
                let t = (k as f64 + f) * self.period;
                if t > a && t < b {
                    out.push(t);
                }
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out.dedup();
        out
    }
}
