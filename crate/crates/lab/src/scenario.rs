//! Scenario files: model constants as top-level keys, then `[schedule]`,
//! `[solver]` and `[study]` sections.
//!
//! ```toml
//! name = "fig1-baseline"
//! alpha = 0.8
//! memory_length = 1.5
//! period = 1.0
//! theta = 1.0
//! s_in = 1.0
//! yield = 1.0
//! saturation = 1.0
//! mu_max = 3.1
//!
//! [schedule]
//! kind = "sinusoid"
//! mean = 1.0
//! amplitude = 0.5
//!
//! [study]
//! kind = "single"
//! ```
//!
//! A missing `[solver]` section selects the default mesh for the schedule
//! (`N = 100, M = 200`, or `N = 300, M = 400` for discontinuous ones); a
//! partial one fills the remaining keys from that same default.

use crate::error::{LabError, Result};
use fracchem::{ChemostatParams, DilutionProfile, DilutionSchedule, ParamsRecord, SolveConfig};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Model parameter that a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Alpha,
    MemoryLength,
    Theta,
}

impl SweepParameter {
    pub fn key(self) -> &'static str {
        match self {
            Self::Alpha => "alpha",
            Self::MemoryLength => "memory_length",
            Self::Theta => "theta",
        }
    }

    pub fn apply(self, params: &ChemostatParams, value: f64) -> Result<ChemostatParams> {
        Ok(params.with(|r| match self {
            Self::Alpha => r.alpha = value,
            Self::MemoryLength => r.memory_length = value,
            Self::Theta => r.theta = value,
        })?)
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "alpha" => Ok(Self::Alpha),
            "memory_length" | "L" => Ok(Self::MemoryLength),
            "theta" => Ok(Self::Theta),
            other => Err(format!(
                "unknown sweep parameter `{other}` (alpha, memory_length, theta)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Study {
    /// One solve from the constant guess `s ≡ s̄`.
    Single,
    Multistart {
        starts: usize,
    },
    /// One solve per value from `s ≡ s̄`.
    Sweep {
        parameter: SweepParameter,
        values: Vec<f64>,
    },
    /// Multistart in a regime where every start must wash out.
    Washout {
        starts: usize,
    },
    /// Single solve under a discontinuous schedule, checked against `s*`.
    Bangbang,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub params: ChemostatParams,
    pub schedule: DilutionSchedule,
    pub config: SolveConfig,
    pub study: Study,
}

/// On-disk layout. Kept separate from [`Scenario`] so that every key is
/// checked against a fixed list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    alpha: f64,
    memory_length: f64,
    period: f64,
    theta: f64,
    s_in: f64,
    #[serde(rename = "yield")]
    yield_coefficient: f64,
    saturation: f64,
    mu_max: f64,
    schedule: DilutionProfile,
    #[serde(default)]
    solver: Option<toml::Table>,
    study: Study,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        params: ChemostatParams,
        profile: DilutionProfile,
        config: SolveConfig,
        study: Study,
    ) -> Result<Self> {
        let schedule = DilutionSchedule::new(profile, params.period())?;
        let scenario = Self {
            name: name.into(),
            params,
            schedule,
            config,
            study,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(LabError::Scenario {
                name: self.name.clone(),
                reason,
            })
        };
        if self.name.trim().is_empty() {
            return fail("name is empty".into());
        }
        self.config.validate()?;
        match &self.study {
            Study::Multistart { starts } | Study::Washout { starts } if *starts == 0 => {
                fail("study needs at least one start".into())
            }
            Study::Sweep { parameter, values } => {
                if values.is_empty() {
                    return fail("sweep has no values".into());
                }
                for &v in values {
                    parameter.apply(&self.params, v)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Parses scenario text; `origin` names the source in error messages.
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| LabError::Parse {
            origin: origin.to_string(),
            message: e.to_string(),
        })?;
        let params = ChemostatParams::from_record(ParamsRecord {
            alpha: file.alpha,
            memory_length: file.memory_length,
            period: file.period,
            theta: file.theta,
            s_in: file.s_in,
            yield_coefficient: file.yield_coefficient,
            saturation: file.saturation,
            mu_max: file.mu_max,
        })?;
        let schedule = DilutionSchedule::new(file.schedule, params.period())?;
        let mut base = toml::Table::try_from(SolveConfig::for_schedule(&schedule))
            .expect("solver defaults serialize");
        base.extend(file.solver.unwrap_or_default());
        let config: SolveConfig =
            base.try_into()
                .map_err(|e: toml::de::Error| LabError::Parse {
                    origin: format!("{origin} [solver]"),
                    message: e.to_string(),
                })?;
        let scenario = Self {
            name: file.name,
            params,
            schedule,
            config,
            study: file.study,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        let r = self.params.record();
        let file = ScenarioFile {
            name: self.name.clone(),
            alpha: r.alpha,
            memory_length: r.memory_length,
            period: r.period,
            theta: r.theta,
            s_in: r.s_in,
            yield_coefficient: r.yield_coefficient,
            saturation: r.saturation,
            mu_max: r.mu_max,
            schedule: self.schedule.profile().clone(),
            solver: Some(toml::Table::try_from(&self.config).expect("solver config serializes")),
            study: self.study.clone(),
        };
        toml::to_string(&file).expect("scenario serializes")
    }
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ScenarioEcho::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let echo = ScenarioEcho::deserialize(deserializer)?;
        let schedule = DilutionSchedule::new(echo.schedule, echo.params.period())
            .map_err(serde::de::Error::custom)?;
        Ok(Self {
            name: echo.name,
            params: echo.params,
            schedule,
            config: echo.config,
            study: echo.study,
        })
    }
}

/// JSON form of a scenario inside a report.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioEcho {
    name: String,
    params: ChemostatParams,
    schedule: DilutionProfile,
    config: SolveConfig,
    study: Study,
}

impl From<&Scenario> for ScenarioEcho {
    fn from(s: &Scenario) -> Self {
        Self {
            name: s.name.clone(),
            params: s.params,
            schedule: s.schedule.profile().clone(),
            config: s.config.clone(),
            study: s.study.clone(),
        }
    }
}

/// Parses `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let bad = |reason: &str| LabError::Values {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let number = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(number).collect::<Result<Vec<_>>>()?,
        [start, stop, step] => {
            let (start, stop, step) = (number(start)?, number(stop)?, number(step)?);
            if !(step > 0.0 && stop >= start) {
                return Err(bad("need step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > 10_000 {
                return Err(bad("more than 10000 values"));
            }
            // snap to 12 decimals so that 0.1 + 2·0.1 reads back as 0.3
            (0..count)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect()
        }
        _ => return Err(bad("expected start:stop:step or a comma list")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}
