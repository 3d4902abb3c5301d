use airylab_core::sampler::{
    calibrate, calibration_from_values, initial_heights, replica_seed, sample_paths, simulate_tasep, Airy2Map,
    InitialCondition, Rescaling, SamplerError, ScalingConstants, TasepConfig,
};
use airylab_core::stats::{covariance, mean, std_error, variance};
use airylab_core::tracy_widom::{Family, TracyWidom};

fn flat(horizon: f64, sites: (i64, i64), seed: u64) -> TasepConfig {
    TasepConfig::new(InitialCondition::Flat, horizon, sites, seed, ScalingConstants::for_ic(InitialCondition::Flat))
}

fn column(paths: &[airylab_core::sampler::PathSample], k: usize) -> Vec<f64> {
    paths.iter().map(|p| p.values[k]).collect()
}

#[test]
fn flat_profile_at_time_zero_is_a_sawtooth() {
    let snap = initial_heights(&flat(100.0, (-6, 6), 0));
    let expected: Vec<i64> = (-6..=6i64).map(|x| x.rem_euclid(2)).collect();
    assert_eq!(snap.heights, expected);
    assert_eq!(snap.height_at(0), Some(0));
}

#[test]
fn height_growth_rate_matches_density_one_half_flux() {
    // h(0) = c0 T - c1 T^{1/3} A with E[A] = mean of F1(2.)/1; solve for c0 from 100 replicas
    let t = 500.0;
    let base = flat(t, (0, 1), 0xc0);
    let tw = TracyWidom::shared().unwrap();
    let law_mean = 0.5 * tw.moments(Family::Goe).0;
    let heights: Vec<f64> = (0..100)
        .map(|r| {
            let c = TasepConfig { seed: replica_seed(base.seed, r), ..base };
            simulate_tasep(&c).unwrap().height_at(0).unwrap() as f64
        })
        .collect();
    let fit = (mean(&heights) + base.scaling.fluct * t.cbrt() * law_mean) / t;
    assert!((fit / 0.5 - 1.0).abs() < 0.02, "{fit}");
    let raw = mean(&heights) / t;
    assert!((raw / 0.5 - 1.0).abs() < 0.03, "{raw}");
}

#[test]
fn one_point_laws_and_variance() {
    let t = 1000.0;
    let tw = TracyWidom::shared().unwrap();
    for ic in [InitialCondition::Flat, InitialCondition::Step] {
        let cfg = TasepConfig::new(ic, t, (0, 1), 0x1a2b, ScalingConstants::for_ic(ic));
        let rescaling = Rescaling::default_for(ic);
        let paths = sample_paths(&cfg, 3000, &[0.0], rescaling).unwrap();
        let values = column(&paths, 0);
        let report = calibration_from_values(&values, &cfg, rescaling).unwrap();
        // 99.9% KS quantile at n = 3000 is 0.036; the finite-T bias is about 0.006
        assert!(report.ks < 0.04, "{ic:?}: {}", report.ks);
        assert!((report.sample_variance / report.law_variance - 1.0).abs() < 0.08, "{ic:?}: {report:?}");
        assert!(report.height_rate_drift < 0.02);
        let law = match ic {
            InitialCondition::Flat => 0.25 * tw.moments(Family::Goe).1,
            InitialCondition::Step => tw.moments(Family::Gue).1,
        };
        assert_eq!(report.law_variance, law);
    }
}

#[test]
fn corrupted_fluctuation_scale_is_detected() {
    let cfg = flat(1000.0, (0, 1), 5);
    let paths = sample_paths(&cfg, 1000, &[0.0], Rescaling::Airy1).unwrap();
    let good = calibration_from_values(&column(&paths, 0), &cfg, Rescaling::Airy1).unwrap();
    // doubling c1 halves every value
    let wrong_scaling = ScalingConstants { fluct: 2.0 * cfg.scaling.fluct, ..cfg.scaling };
    let wrong_cfg = TasepConfig { scaling: wrong_scaling, ..cfg };
    let halved: Vec<f64> = column(&paths, 0).iter().map(|v| 0.5 * v).collect();
    let bad = calibration_from_values(&halved, &wrong_cfg, Rescaling::Airy1).unwrap();
    assert!(good.ks < 0.06);
    assert!(bad.ks > 0.2 && !bad.passed, "{}", bad.ks);
    assert!(matches!(calibrate(&cfg, 100), Err(SamplerError::TooFewReplicas(100))));
}

#[test]
fn airy1_is_stationary_and_decorrelates() {
    let grid = [0.0, 0.5, 3.0, 5.0];
    let cfg = TasepConfig::for_grid(
        InitialCondition::Flat,
        1000.0,
        &grid,
        Rescaling::Airy1,
        0x57a7,
        ScalingConstants::for_ic(InitialCondition::Flat),
    )
    .unwrap();
    let paths = sample_paths(&cfg, 2000, &grid, Rescaling::Airy1).unwrap();
    let (a0, a_half, a3, a5) = (column(&paths, 0), column(&paths, 1), column(&paths, 2), column(&paths, 3));
    let diff: Vec<f64> = a0.iter().zip(&a5).map(|(x, y)| x - y).collect();
    assert!(mean(&diff).abs() <= 3.0 * std_error(&diff), "{}", mean(&diff));
    // the covariance is about 0.09 at lag 1/2 and 0.02 at lag 1
    let near = covariance(&a0, &a_half);
    let lag3 = covariance(&a0, &a3);
    assert!(near.value > 3.0 * near.se, "{near:?}");
    assert!(lag3.value < 0.01 + 3.0 * lag3.se && lag3.value > -3.0 * lag3.se, "{lag3:?}");
    assert!(variance(&a0) > 0.0);
}

#[test]
fn airy2_parabola_correction() {
    let grid = [0.0, 2.0];
    let ic = InitialCondition::Step;
    let sc = ScalingConstants::for_ic(ic);
    let rescaling = Rescaling::Airy2(Airy2Map::Characteristic);
    let cfg = TasepConfig::for_grid(ic, 1000.0, &grid, rescaling, 0xa2, sc).unwrap();
    let paths = sample_paths(&cfg, 2000, &grid, rescaling).unwrap();
    let diff: Vec<f64> = paths.iter().map(|p| p.values[0] - p.values[1]).collect();
    assert!(mean(&diff).abs() <= 3.0 * std_error(&diff), "{} +- {}", mean(&diff), std_error(&diff));

    // the same replicas under the parabolic map, with and without the v^2 term
    let parabolic = Rescaling::Airy2(Airy2Map::Parabolic);
    let pcfg = TasepConfig::for_grid(ic, 1000.0, &grid, parabolic, 0xa2, sc).unwrap();
    let ppaths = sample_paths(&pcfg, 500, &grid, parabolic).unwrap();
    let uncorrected: Vec<f64> = ppaths.iter().map(|p| p.values[1] - 4.0).collect();
    let at_zero = column(&ppaths, 0);
    let drop = mean(&at_zero) - mean(&uncorrected);
    assert!((drop - 4.0).abs() < 0.5, "{drop}");
}

#[test]
fn sampling_is_deterministic_and_seeds_are_distinct() {
    let cfg = flat(100.0, (-10, 10), 42);
    let grid = [-0.2, 0.0, 0.2];
    let a = sample_paths(&cfg, 6, &grid, Rescaling::Airy1).unwrap();
    let b = sample_paths(&cfg, 6, &grid, Rescaling::Airy1).unwrap();
    assert_eq!(a, b);
    let seeds: std::collections::HashSet<u64> = (0..10_000).map(|r| replica_seed(42, r)).collect();
    assert_eq!(seeds.len(), 10_000);
    assert!(a.iter().all(|p| p.values.iter().all(|v| v.is_finite())));
}

#[test]
fn configuration_errors() {
    let mut cfg = flat(50.0, (0, 1), 1);
    assert!(matches!(cfg.validate(), Err(SamplerError::InvalidHorizon(_))));
    cfg = flat(100.0, (0, 1), 1);
    // the grid point v = 1 sits 2 T^{2/3} = 43 sites out, beyond the reported sites
    let err = sample_paths(&cfg, 1, &[0.0, 1.0], Rescaling::Airy1).unwrap_err();
    assert!(matches!(err, SamplerError::GridOutsideWindow { .. }));
    let step = TasepConfig { ic: InitialCondition::Step, ..cfg };
    assert!(matches!(
        sample_paths(&step, 1, &[0.0], Rescaling::Airy1),
        Err(SamplerError::WrongInitialCondition { .. })
    ));
    assert!(matches!(sample_paths(&cfg, 1, &[1.0, 0.0], Rescaling::Airy1), Err(SamplerError::BadGrid)));
}

#[test]
fn ks_shrinks_as_the_horizon_grows() {
    // five calibration repetitions at each horizon, same replica seeds
    let avg_ks = |t: f64| -> f64 {
        (11..=15u64)
            .map(|seed| {
                let cfg = flat(t, (0, 1), seed);
                calibrate(&cfg, 5000).unwrap().ks
            })
            .sum::<f64>()
            / 5.0
    };
    let (short, long) = (avg_ks(250.0), avg_ks(1000.0));
    assert!(long < short, "T=250: {short}, T=1000: {long}");
}
