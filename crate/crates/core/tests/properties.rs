use fracchem::{
    cfds_direct, memory_multiplier, CfdsOperator, ChemostatParams, DilutionProfile,
    DilutionSchedule, ParamsRecord, PeriodicGrid, TrigInterpolant,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Nodal samples of a random real trigonometric polynomial with modes below `kmax`.
fn band_limited(grid: &PeriodicGrid, kmax: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c0: f64 = rng.gen_range(-1.0..1.0);
    let modes: Vec<(f64, f64)> = (1..kmax)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    grid.nodes()
        .iter()
        .map(|&t| {
            c0 + modes
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| {
                    let w = grid.angular_frequency(i as i64 + 1) * t;
                    a * w.cos() + b * w.sin()
                })
                .sum::<f64>()
        })
        .collect()
}

fn params_strategy() -> impl Strategy<Value = ChemostatParams> {
    (
        0.05f64..=1.0,
        0.1f64..5.0,
        0.5f64..3.0,
        0.1f64..2.0,
        0.5f64..3.0,
        0.2f64..3.0,
        0.2f64..5.0,
        0.2f64..3.0,
    )
        .prop_map(
            |(alpha, memory_length, period, theta, s_in, y, k, mu_max)| {
                ChemostatParams::from_record(ParamsRecord {
                    alpha,
                    memory_length,
                    period,
                    theta,
                    s_in,
                    yield_coefficient: y,
                    saturation: k,
                    mu_max,
                })
                .unwrap()
            },
        )
}

fn schedule_strategy() -> impl Strategy<Value = DilutionProfile> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|level| DilutionProfile::Constant { level }),
        (0.6f64..3.0, 0.0f64..0.5)
            .prop_map(|(mean, amplitude)| DilutionProfile::Sinusoid { mean, amplitude }),
        (0.1f64..1.0, 0.0f64..2.0, 0.0f64..0.5, 0.5f64..1.0).prop_map(
            |(d_min, extra, on_start, on_end)| {
                DilutionProfile::BangBang {
                    d_min,
                    d_max: d_min + extra,
                    on_start,
                    on_end,
                }
            }
        ),
        prop::collection::vec(0.1f64..3.0, 1..16)
            .prop_map(|values| DilutionProfile::Table { values }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplier_is_conjugate_symmetric(alpha in 0.05f64..=1.0, memory in 0.1f64..5.0, omega in 0.0f64..500.0) {
        let plus = memory_multiplier(alpha, memory, omega).unwrap();
        let minus = memory_multiplier(alpha, memory, -omega).unwrap();
        prop_assert_eq!(plus, minus.conj());
    }

    #[test]
    fn multiplier_vanishes_at_zero_frequency(alpha in 0.05f64..=1.0, memory in 0.1f64..5.0) {
        let m = memory_multiplier(alpha, memory, 0.0).unwrap();
        prop_assert_eq!((m.re, m.im), (0.0, 0.0));
    }

    #[test]
    fn real_inputs_map_to_real_outputs(alpha in 0.05f64..=1.0, memory in 0.1f64..5.0, seed in any::<u64>(), half in 2usize..32) {
        let grid = PeriodicGrid::new(1.0, 2 * half).unwrap();
        let op = CfdsOperator::new(&grid, alpha, memory).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..grid.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, residue) = op.apply_with_residue(&v).unwrap();
        prop_assert!(residue <= 1e-12, "imaginary residue {residue:e}");
    }

    #[test]
    fn operator_is_linear(alpha in 0.05f64..=1.0, memory in 0.1f64..5.0, seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let grid = PeriodicGrid::new(2.0, 32).unwrap();
        let op = CfdsOperator::new(&grid, alpha, memory).unwrap();
        let u = band_limited(&grid, 16, seed);
        let v = band_limited(&grid, 16, seed.wrapping_add(1));
        let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = op.apply(&combo).unwrap();
        let (au, av) = (op.apply(&u).unwrap(), op.apply(&v).unwrap());
        let rhs: Vec<f64> = au.iter().zip(&av).map(|(x, y)| a * x + b * y).collect();
        let scale = lhs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(sup(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn constants_map_to_zero(alpha in 0.05f64..=1.0, memory in 0.1f64..5.0, c in -10.0f64..10.0) {
        let grid = PeriodicGrid::new(1.0, 16).unwrap();
        let op = CfdsOperator::new(&grid, alpha, memory).unwrap();
        let out = op.apply(&[c; 16]).unwrap();
        prop_assert!(out.iter().all(|x| x.abs() <= 1e-13 * c.abs().max(1.0)));
    }

    #[test]
    fn interpolant_reproduces_nodes_and_resamples_exactly(seed in any::<u64>(), factor in 1usize..4) {
        let grid = PeriodicGrid::new(1.5, 24).unwrap();
        let v = band_limited(&grid, 12, seed);
        let interp = TrigInterpolant::new(&grid, &v).unwrap();
        for (j, &t) in grid.nodes().iter().enumerate() {
            prop_assert!((interp.eval(t) - v[j]).abs() <= 1e-13);
        }
        let m = 24 * factor;
        let dense = interp.resample(m).unwrap();
        for (j, &value) in dense.iter().enumerate() {
            prop_assert!((interp.eval(1.5 * j as f64 / m as f64) - value).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectral_apply_matches_direct_quadrature(alpha in 0.05f64..0.999, memory in 0.1f64..3.0, seed in any::<u64>()) {
        let grid = PeriodicGrid::new(1.0, 32).unwrap();
        let op = CfdsOperator::new(&grid, alpha, memory).unwrap();
        let v = band_limited(&grid, 8, seed);
        let spectral = op.apply(&v).unwrap();
        let direct: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&t| cfds_direct(&grid, &v, alpha, memory, t).unwrap())
            .collect();
        prop_assert!(sup(&spectral, &direct) <= 1e-9, "sup gap {:e}", sup(&spectral, &direct));
    }

    /// The gap per unit amplitude is about `(1-α)|ω ln(iω)|`, so the check
    /// uses unit-scale inputs in the lowest three modes.
    #[test]
    fn near_classical_order_approaches_the_derivative(memory in 0.1f64..5.0, seed in any::<u64>()) {
        let grid = PeriodicGrid::new(1.0, 32).unwrap();
        let op = CfdsOperator::new(&grid, 1.0 - 1e-6, memory).unwrap();
        let v: Vec<f64> = band_limited(&grid, 4, seed).iter().map(|x| 0.5 * x).collect();
        let interp = TrigInterpolant::new(&grid, &v).unwrap();
        let exact: Vec<f64> = grid.nodes().iter().map(|&t| interp.derivative(t)).collect();
        prop_assert!(sup(&op.apply(&v).unwrap(), &exact) <= 1e-4);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn nu_is_strictly_increasing(p in params_strategy()) {
        let n = 1000;
        for i in 0..=n {
            let s = i as f64 / n as f64 * p.s_in();
            prop_assert!(p.nu_prime(s).unwrap() > 0.0);
        }
    }

    #[test]
    fn nu_second_has_the_sign_of_ky_minus_one(p in params_strategy()) {
        prop_assume!((p.ky() - 1.0).abs() > 1e-3);
        let h = 1e-6 * p.s_in();
        let n = 200;
        for i in 1..n {
            let s = i as f64 / n as f64 * p.s_in();
            let second = p.nu_second(s).unwrap();
            let fd = (p.nu_prime(s + h).unwrap() - p.nu_prime(s - h).unwrap()) / (2.0 * h);
            prop_assert_eq!(second.signum(), (p.ky() - 1.0).signum());
            prop_assert_eq!(fd.signum(), (p.ky() - 1.0).signum());
        }
    }

    #[test]
    fn rhs_decreases_in_substrate_under_strong_dilution(p in params_strategy(), excess in 0.01f64..2.0, amp in 0.0f64..1.0) {
        prop_assume!(p.ky() > 1.0);
        let schedule = DilutionSchedule::new(
            DilutionProfile::Sinusoid { mean: p.mu_max() + excess + amp, amplitude: amp },
            p.period(),
        )
        .unwrap();
        for i in 0..=50 {
            let t = p.period() * i as f64 / 50.0;
            for j in 0..=50 {
                let s = j as f64 / 50.0 * p.s_in();
                prop_assert!(p.rhs_df_ds(t, s, &schedule).unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn consumption_rises_to_the_threshold(p in params_strategy()) {
        let s_star = p.s_star();
        for i in 0..1000 {
            let s = s_star * i as f64 / 1000.0;
            prop_assert!(p.h_prime(s).unwrap() > 0.0);
        }
        prop_assert!(p.h_prime(s_star).unwrap().abs() <= 1e-12 * p.mu_max().max(1.0));
        prop_assert!((p.nu(s_star).unwrap() - p.nu_s_star()).abs() <= 1e-14 * p.mu_max().max(1.0));
    }

    #[test]
    fn equilibrium_balances_mean_dilution(p in params_strategy(), profile in schedule_strategy()) {
        let schedule = DilutionSchedule::new(profile, p.period()).unwrap();
        let eq = p.equilibrium(&schedule);
        prop_assert_eq!(eq.exists, eq.mean_dilution < p.mu_max());
        prop_assert_eq!(eq.washout_predicted, !eq.exists);
        if eq.exists {
            prop_assert!(eq.s_bar > 0.0 && eq.s_bar < p.s_in());
            prop_assert!(eq.x_bar > 0.0);
            prop_assert_eq!(eq.x_bar, p.yield_coefficient() * (p.s_in() - eq.s_bar));
            prop_assert!((p.nu(eq.s_bar).unwrap() - eq.mean_dilution).abs() <= 1e-12 * eq.mean_dilution.max(1.0));
        }
    }

    #[test]
    fn rhs_and_its_slope_obey_their_bounds(p in params_strategy(), profile in schedule_strategy(), seed in any::<u64>()) {
        let schedule = DilutionSchedule::new(profile, p.period()).unwrap();
        let bound = p.rhs_bound(&schedule);
        let lf = p.lipschitz_lf(&schedule);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let t = rng.gen_range(0.0..p.period());
            let s1 = rng.gen_range(0.0..=p.s_in());
            let s2 = rng.gen_range(0.0..=p.s_in());
            let (f1, f2) = (p.rhs_f(t, s1, &schedule).unwrap(), p.rhs_f(t, s2, &schedule).unwrap());
            prop_assert!(f1.abs() <= bound * (1.0 + 1e-14));
            prop_assert!((f1 - f2).abs() <= lf * (s1 - s2).abs() * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn schedule_is_periodic_and_bounded(profile in schedule_strategy(), period in 0.5f64..3.0, t in 0.0f64..1.0, shift in -5i32..5) {
        let schedule = DilutionSchedule::new(profile, period).unwrap();
        let (lo, hi) = schedule.bounds();
        let t = t * period;
        let d = schedule.evaluate(t);
        prop_assert!(d >= lo && d <= hi);
        let shifted = schedule.evaluate(t + shift as f64 * period);
        let near_jump = !schedule.discontinuities(t - 1e-9, t + 1e-9).is_empty();
        prop_assert!(near_jump || (shifted - d).abs() <= 1e-12 * hi.max(1.0));
    }

    #[test]
    fn growth_rate_stays_below_its_maximum(p in params_strategy(), s in 0.0f64..10.0, x in 0.0f64..10.0) {
        let mu = p.contois_mu(s, x).unwrap();
        prop_assert!((0.0..=p.mu_max()).contains(&mu));
    }
}

#[test]
fn schedule_means_match_trapezoid_averages() {
    let schedule = DilutionSchedule::new(DilutionProfile::reference_sinusoid(), 1.0).unwrap();
    let n = 4096;
    let avg = (0..n)
        .map(|j| schedule.evaluate(j as f64 / n as f64))
        .sum::<f64>()
        / n as f64;
    assert!((avg - schedule.mean()).abs() < 1e-14);
    let bang = DilutionSchedule::new(DilutionProfile::reference_bang_bang(), 2.0).unwrap();
    let avg = (0..n)
        .map(|j| bang.evaluate(2.0 * j as f64 / n as f64))
        .sum::<f64>()
        / n as f64;
    assert!((avg - bang.mean()).abs() < 1e-12);
    assert_eq!(bang.mean(), 1.0);
}
