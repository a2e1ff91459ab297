use gwchart::charts::{self, bootstrap_quantiles, ChartConfig, ChartKind, ControlChart, Signal};
use gwchart::distribution;
use gwchart::simulation::{scheme_catalog, study_params};
use gwchart::{censor, datasets, CensoringScheme, Estimator, Execution, FitConfig, GwParams, HybridCensoredSample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn phase1(params: &GwParams, scheme: &CensoringScheme, k: usize, seed: u64) -> Vec<HybridCensoredSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| censor(&distribution::sample(params, scheme.n, &mut rng).unwrap(), scheme).unwrap())
        .collect()
}

fn bladder_chart(b: usize) -> ControlChart {
    let scheme = CensoringScheme::hybrid(25, 15, 7.6).unwrap();
    let data = datasets::bladder_cancer_125();
    let groups: Vec<_> = data
        .chunks(25)
        .map(|c| {
            let mut c = c.to_vec();
            c.sort_by(f64::total_cmp);
            censor(&c, &scheme).unwrap()
        })
        .collect();
    let config = ChartConfig::new(0.9, 0.0027, 5, scheme, b, 11).unwrap();
    charts::build_bhc(&groups, &config, &FitConfig::default().with_estimator(Estimator::PseudoLikelihood)).unwrap()
}

#[test]
fn single_bootstrap_collapses_the_limits() {
    let scheme = scheme_catalog()[0];
    let data = phase1(&study_params(), &scheme, 5, 1);
    let config = ChartConfig::new(0.5, 0.0027, 5, scheme, 1, 3).unwrap();
    let chart = charts::build_bhc(&data, &config, &FitConfig::default()).unwrap();
    assert_eq!(chart.lcl, chart.cl);
    assert_eq!(chart.cl, chart.ucl);
}

#[test]
fn limits_are_ordered_and_reproducible() {
    let scheme = scheme_catalog()[0];
    let data = phase1(&study_params(), &scheme, 20, 2);
    let config = ChartConfig::new(0.5, 0.0027, 20, scheme, 500, 5).unwrap();
    let fit = FitConfig::default();
    for kind in [ChartKind::Bhc, ChartKind::Shc] {
        let build = |exec: Execution| match kind {
            ChartKind::Bhc => charts::build_bhc(&data, &config.with_execution(exec), &fit).unwrap(),
            ChartKind::Shc => charts::build_shc(&data, &config.with_execution(exec), &fit).unwrap(),
        };
        let a = build(Execution::Sequential);
        assert!(0.0 < a.lcl && a.lcl < a.cl && a.cl < a.ucl, "{kind:?}: {a:?}");
        let json = |c: &ControlChart| serde_json::to_string(c).unwrap();
        assert_eq!(json(&a), json(&build(Execution::Sequential)));
        assert_eq!(json(&a), json(&build(Execution::Parallel)));
    }
}

#[test]
fn json_shape_and_round_trip() {
    let chart = bladder_chart(200);
    let value: serde_json::Value = serde_json::to_value(&chart).unwrap();
    for key in ["kind", "p", "nu", "scheme", "lcl", "cl", "ucl", "theta_hat", "alpha_hat", "B", "seed"] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
    assert_eq!(value["kind"], "BHC");
    assert_eq!(value["scheme"]["x0"], 7.6);
    let back: ControlChart = serde_json::from_value(value).unwrap();
    assert_eq!((back.lcl, back.cl, back.ucl), (chart.lcl, chart.cl, chart.ucl));
    assert_eq!(back.phase1_fit.params, chart.phase1_fit.params);
    assert_eq!(back.config, chart.config);
}

#[test]
fn fresh_bootstrap_estimates_fall_outside_at_the_nominal_rate() {
    let params = GwParams::new(0.632, 8.946).unwrap();
    let scheme = CensoringScheme::hybrid(25, 15, 7.6).unwrap();
    let fit = FitConfig::default();
    let nu = 0.1;
    let (build, _) = bootstrap_quantiles(&params, &scheme, &[0.9], 2000, &[1], &fit, Execution::default()).unwrap();
    let (lcl, _, ucl) = charts::bootstrap_limits(&build[0], nu, Default::default()).unwrap();
    let (fresh, _) = bootstrap_quantiles(&params, &scheme, &[0.9], 2000, &[2], &fit, Execution::default()).unwrap();
    let outside = fresh[0].iter().filter(|&&q| q < lcl || q > ucl).count() as f64 / 2000.0;
    // binomial sd of the fresh fraction plus the sampling error of the limits
    let sd = (2.0 * nu * (1.0 - nu) / 2000.0).sqrt();
    assert!((outside - nu).abs() < 4.0 * sd, "outside fraction {outside}");
}

#[test]
fn large_theta_drop_signals_early() {
    let chart = bladder_chart(1000);
    let shifted = GwParams::new(0.4, 8.946).unwrap();
    let fit = FitConfig::default();
    let streams = 20;
    let mut early = 0;
    for seed in 0..streams {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let signalled = (0..2).any(|_| {
            let x = distribution::sample(&shifted, 25, &mut rng).unwrap();
            let s = censor(&x, &chart.config.scheme).unwrap();
            charts::monitor(&chart, &s, &fit).signal == Signal::OutOfControlHigh
        });
        early += usize::from(signalled);
    }
    assert!(early >= streams as usize * 3 / 4, "{early} of {streams} streams signalled in two subgroups");
}

#[test]
fn in_control_subgroups_rarely_signal() {
    let chart = bladder_chart(1000);
    let fit = FitConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let alarms = (0..200)
        .filter(|_| {
            let x = distribution::sample(&chart.phase1_fit.params, 25, &mut rng).unwrap();
            charts::monitor(&chart, &censor(&x, &chart.config.scheme).unwrap(), &fit).signal.is_alarm()
        })
        .count();
    assert!(alarms <= 5, "{alarms} alarms in 200 in-control subgroups");
}

#[test]
fn unfittable_subgroup_is_unassessable() {
    let chart = bladder_chart(200);
    let mut x: Vec<f64> = (0..25).map(|i| 8.0 + i as f64).collect();
    x[0] = 1.0;
    let s = censor(&x, &chart.config.scheme).unwrap();
    assert_eq!(s.d(), 1);
    let verdict = charts::monitor(&chart, &s, &FitConfig::default());
    assert_eq!(verdict.signal, Signal::Unassessable);
    assert!(verdict.statistic.is_none());
    assert!(!verdict.signal.is_alarm());
}
