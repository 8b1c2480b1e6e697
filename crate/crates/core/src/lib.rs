//! Periodic solutions of a fractional-order chemostat whose substrate obeys
//!
//! ```text
//! D^α_L s(t) = ϑ^{1-α} [D(t) - ν(s)] (s_in - s),    s(t + T) = s(t),
//! ```
//!
//! with `D^α_L` the Caputo derivative over the sliding window `[t - L, t]`
//! and `ν` the Contois growth rate on the manifold `x = Y(s_in - s)`.
//!
//! * [`fracops`]: the sliding-memory derivative as Fourier multipliers, plus
//!   direct-quadrature evaluations of the defining integrals.
//! * [`model`]: parameters, dilution schedules, kinetics, equilibria and the
//!   analytic constants (Lipschitz bounds, uniqueness thresholds).
//! * [`solver`]: collocation, damped Newton, multistart bucketing and the
//!   unreduced two-variable solve.
//!
//! ```
//! use fracchem::{ChemostatParams, DilutionProfile, DilutionSchedule, SolveConfig, Classification};
//!
//! let params = ChemostatParams::reference();
//! let schedule = DilutionSchedule::new(DilutionProfile::reference_sinusoid(), params.period())?;
//! let s_bar = params.equilibrium(&schedule).s_bar;
//! let config = SolveConfig { node_count: 32, interpolation_count: 64, ..SolveConfig::smooth() };
//! let sol = fracchem::solve(&vec![s_bar; 32], &params, &schedule, &config)?;
//! assert_eq!(sol.classification, Classification::NonTrivial);
//! # Ok::<(), fracchem::Error>(())
//! ```

pub mod error;
pub mod fracops;
pub mod grid;
pub mod model;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use fracops::{
    cfds_direct, memory_multiplier, sliding_rl_integral, sliding_rl_integral_fn, CfdsOperator,
};
pub use grid::{PeriodicGrid, TrigInterpolant};
pub use model::{
    ChemostatParams, DilutionProfile, DilutionSchedule, EquilibriumReport, ParamsRecord,
};
pub use solver::{
    direct_residual, energy_balance, jacobian, multistart, random_guess, residual, solve, solve_2d,
    sup_distance, volterra_residual, Bucket, Classification, Collocation, DenseSeries,
    FullSolution, MultistartOutcome, MultistartSummary, PeriodicSolution, SolveConfig,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/operator.md")]
    mod operator {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
}
