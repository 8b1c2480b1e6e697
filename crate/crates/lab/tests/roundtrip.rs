use fracchem::{ChemostatParams, DilutionProfile, SolveConfig};
use fracchem_lab::{parse_values, Scenario, Study};
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = DilutionProfile> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|level| DilutionProfile::Constant { level }),
        (0.6f64..3.0, 0.0f64..0.5)
            .prop_map(|(mean, amplitude)| DilutionProfile::Sinusoid { mean, amplitude }),
        (0.1f64..1.0, 0.0f64..2.0, 0.0f64..0.5, 0.5f64..1.0).prop_map(
            |(d_min, extra, on_start, on_end)| DilutionProfile::BangBang {
                d_min,
                d_max: d_min + extra,
                on_start,
                on_end,
            }
        ),
        prop::collection::vec(0.1f64..3.0, 1..8)
            .prop_map(|values| DilutionProfile::Table { values }),
    ]
}

fn study() -> impl Strategy<Value = Study> {
    prop_oneof![
        Just(Study::Single),
        (1usize..200).prop_map(|starts| Study::Multistart { starts }),
        (1usize..200).prop_map(|starts| Study::Washout { starts }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scenario_survives_a_toml_round_trip(
        alpha in 0.05f64..=1.0,
        memory in 0.1f64..5.0,
        theta in 0.1f64..2.0,
        mu_max in 0.2f64..5.0,
        half in 2usize..200,
        extra in 0usize..200,
        seed in 0..=i64::MAX as u64,
        profile in profile(),
        study in study(),
    ) {
        let params = ChemostatParams::reference()
            .with(|r| {
                r.alpha = alpha;
                r.memory_length = memory;
                r.theta = theta;
                r.mu_max = mu_max;
            })
            .unwrap();
        let config = SolveConfig {
            node_count: 2 * half,
            interpolation_count: 2 * half + extra,
            seed,
            ..SolveConfig::smooth()
        };
        let scenario = Scenario::new("round-trip", params, profile, config, study).unwrap();
        let parsed = Scenario::from_toml(&scenario.to_toml(), "generated").unwrap();
        prop_assert_eq!(parsed, scenario);
    }

    #[test]
    fn oversized_seeds_are_rejected(seed in (i64::MAX as u64 + 1)..=u64::MAX) {
        let config = SolveConfig { seed, ..SolveConfig::smooth() };
        prop_assert!(config.validate().is_err());
    }

    #[test]
    fn value_ranges_include_both_ends(start in 0.0f64..1.0, steps in 1usize..50, step in 0.01f64..0.5) {
        let start = (start * 100.0).round() / 100.0;
        let step = (step * 100.0).round() / 100.0;
        let stop = start + steps as f64 * step;
        let values = parse_values(&format!("{start}:{stop}:{step}")).unwrap();
        prop_assert_eq!(values.len(), steps + 1);
        prop_assert!((values[0] - start).abs() < 1e-12);
        prop_assert!((values[steps] - stop).abs() < 1e-9);
        prop_assert!(values.windows(2).all(|w| w[1] > w[0]));
    }
}
