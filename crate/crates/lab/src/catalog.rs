//! Built-in scenarios `fig1-baseline` to `fig7-bangbang`.

use crate::error::{LabError, Result};
use crate::scenario::{Scenario, Study, SweepParameter};
use fracchem::{ChemostatParams, DilutionProfile, SolveConfig};

pub const NAMES: [&str; 7] = [
    "fig1-baseline",
    "fig2-multistart",
    "fig3-alpha-sweep",
    "fig4-memory-sweep",
    "fig5-theta-sweep",
    "fig6-washout",
    "fig7-bangbang",
];

const TENTHS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

pub fn scenario(name: &str) -> Result<Scenario> {
    let base = ChemostatParams::reference();
    let sinusoid = DilutionProfile::reference_sinusoid();
    let smooth = SolveConfig::smooth();
    match name {
        "fig1-baseline" => Scenario::new(name, base, sinusoid, smooth, Study::Single),
        "fig2-multistart" => Scenario::new(
            name,
            base,
            sinusoid,
            smooth,
            Study::Multistart { starts: 100 },
        ),
        "fig3-alpha-sweep" => Scenario::new(
            name,
            base,
            sinusoid,
            smooth,
            Study::Sweep {
                parameter: SweepParameter::Alpha,
                values: TENTHS.to_vec(),
            },
        ),
        "fig4-memory-sweep" => Scenario::new(
            name,
            base,
            sinusoid,
            smooth,
            Study::Sweep {
                parameter: SweepParameter::MemoryLength,
                values: vec![0.1, 0.3, 0.5, 1.0, 3.0, 5.0],
            },
        ),
        "fig5-theta-sweep" => Scenario::new(
            name,
            base,
            sinusoid,
            smooth,
            Study::Sweep {
                parameter: SweepParameter::Theta,
                values: TENTHS.to_vec(),
            },
        ),
        "fig6-washout" => {
            let params = base.with(|r| {
                r.mu_max = 0.25;
                r.saturation = 2.0;
            })?;
            Scenario::new(
                name,
                params,
                sinusoid,
                smooth,
                Study::Washout { starts: 100 },
            )
        }
        "fig7-bangbang" => Scenario::new(
            name,
            base,
            DilutionProfile::reference_bang_bang(),
            SolveConfig::discontinuous(),
            Study::Bangbang,
        ),
        other => Err(LabError::UnknownScenario(other.to_string())),
    }
}

pub fn all() -> Vec<Scenario> {
    NAMES
        .iter()
        .map(|n| scenario(n).expect("catalog entries are valid"))
        .collect()
}

/// Every catalog entry in scenario-file form, separated by blank lines.
pub fn serialized() -> String {
    all()
        .iter()
        .map(Scenario::to_toml)
        .collect::<Vec<_>>()
        .join("\n")
}
