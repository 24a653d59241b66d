use kgg::inequality::empirical_gini;
use kgg::simulator::{
    gini_now, log_binned_histogram, run, run_realization, total_money, AgentState, HistogramSpec, LambdaMode,
    SimConfig, WealthHistogram,
};
use kgg_testkit::reference::gamma_cdf_mean;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(lambda_mode: LambdaMode, n_exchanges: u64, n_realizations: usize) -> SimConfig {
    SimConfig {
        n_exchanges,
        n_realizations,
        ..SimConfig::desk(lambda_mode)
    }
}

#[test]
fn conservation_is_bit_exact() {
    let lambda: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.618).fract() * 0.999).collect();
    let mut s = AgentState::equal(lambda, 1.0).unwrap();
    let before = total_money(&s);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1_000_000 {
        s.exchange_step(&mut rng);
    }
    assert_eq!(total_money(&s).to_bits(), before.to_bits());
    // summation order does not matter on the grid
    let reversed: f64 = s.wealth.iter().rev().sum();
    assert_eq!(reversed.to_bits(), before.to_bits());
}

#[test]
fn gini_starts_at_zero_and_saving_lowers_it() {
    let s = AgentState::equal(vec![0.0; 100], 2.5).unwrap();
    assert_eq!(gini_now(&s).unwrap(), 0.0);

    let spread = |lambda: f64| {
        let r = run_realization(&small(LambdaMode::Homogeneous { lambda }, 1_000_000, 1), 0).unwrap();
        gini_now(&r.final_state).unwrap()
    };
    let (g0, g9) = (spread(0.0), spread(0.9));
    assert!(g0 > g9, "{g0} {g9}");
    // exponential has Gini 1/2
    assert!((g0 - 0.5).abs() < 0.05);
}

#[test]
fn identical_seed_gives_identical_output() {
    let c = small(LambdaMode::Uniform, 200_000, 4);
    let a = run(&c).unwrap();
    let b = run(&c).unwrap();
    assert_eq!(a, b);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let c3 = pool.install(|| run(&c).unwrap());
    assert_eq!(a.histogram, c3.histogram);
    assert!(a.conserved());
    let other = run(&SimConfig { seed: 2, ..c }).unwrap();
    assert_ne!(a.histogram, other.histogram);
}

#[test]
fn lambda_redrawn_unless_fixed() {
    let c = small(LambdaMode::Uniform, 1000, 2);
    let out = run(&c).unwrap();
    assert_ne!(out.realizations[0].final_state.lambda, out.realizations[1].final_state.lambda);
    let fixed = run(&SimConfig { fix_lambda: true, ..c }).unwrap();
    assert_eq!(fixed.realizations[0].final_state.lambda, fixed.realizations[1].final_state.lambda);
    let cap = fixed.realizations[0].final_state.lambda.iter().cloned().fold(0.0, f64::max);
    assert!(cap <= 1.0 - 1e-6);
}

#[test]
fn histogram_examples() {
    let xs: Vec<f64> = (0..1000).map(|i| 1.0 + 9.0 * i as f64 / 1000.0).collect();
    let h = log_binned_histogram(&xs, 1, 1.0, 10.0).unwrap();
    assert!((h.density()[0] - 1.0 / 9.0).abs() < 1e-15);
    assert!(log_binned_histogram(&[], 4, 1.0, 2.0).is_err());
    assert!(log_binned_histogram(&[1.0], 4, 0.0, 2.0).is_err());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ys: Vec<f64> = (0..50_000).map(|_| -rng.gen::<f64>().ln()).collect();
    let h = log_binned_histogram(&ys, 40, 1e-3, 20.0).unwrap();
    let norm: f64 = h.density().iter().zip(h.widths()).map(|(d, w)| d * w).sum();
    assert!((norm - 1.0).abs() < 1e-9);
    assert!(h.underflow > 0);
    assert_eq!(h.n_total(), 50_000);
}

#[test]
fn histogram_csv_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ys: Vec<f64> = (0..10_000).map(|_| -rng.gen::<f64>().ln()).collect();
    let h = log_binned_histogram(&ys, 25, 1e-2, 10.0).unwrap();
    let mut buf = Vec::new();
    h.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("bin_center,density,count\n"));
    let back = WealthHistogram::read_csv(text.as_bytes()).unwrap();
    assert_eq!(back.counts, h.counts);
    for (a, b) in back.edges.iter().zip(&h.edges) {
        assert!((a / b - 1.0).abs() < 1e-12);
    }
}

#[test]
fn config_rejects_invalid() {
    let ok = small(LambdaMode::Uniform, 10, 1);
    assert!(ok.validate().is_ok());
    assert!(SimConfig { n_agents: 1, ..ok.clone() }.validate().is_err());
    assert!(SimConfig { mean_money: 0.0, ..ok.clone() }.validate().is_err());
    assert!(SimConfig { thermalization_fraction: 1.0, ..ok.clone() }.validate().is_err());
    let bad_custom = LambdaMode::Custom { values: vec![0.5; 3] };
    assert!(SimConfig { lambda_mode: bad_custom, ..ok.clone() }.validate().is_err());
    let bad_hist = HistogramSpec { n_bins: 0, ..HistogramSpec::default() };
    assert!(SimConfig { histogram: bad_hist, ..ok }.validate().is_err());
}

#[test]
fn zero_saving_is_exponential() {
    let c = small(LambdaMode::Homogeneous { lambda: 0.0 }, 10_000_000, 1);
    let out = run(&c).unwrap();
    let ks = out.histogram.ks_statistic(|x| 1.0 - (-x).exp());
    assert!(ks < 0.02, "{ks}");
    assert!(out.conserved());
}

#[test]
fn half_saving_is_gamma_four() {
    let c = small(LambdaMode::Homogeneous { lambda: 0.5 }, 10_000_000, 1);
    let out = run(&c).unwrap();
    let ks = out.histogram.ks_statistic(|x| gamma_cdf_mean(x, 4.0, 1.0));
    assert!(ks < 0.02, "{ks}");
}

#[test]
fn empirical_gini_of_run_matches_gini_now() {
    let r = run_realization(&small(LambdaMode::Uniform, 100_000, 1), 0).unwrap();
    assert_eq!(gini_now(&r.final_state).unwrap(), empirical_gini(&r.final_state.wealth, false).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wealth_stays_nonnegative_and_total_exact(
        wealth in proptest::collection::vec(0.0f64..100.0, 2..40),
        seed in 0u64..1000,
    ) {
        let n = wealth.len();
        prop_assume!(wealth.iter().sum::<f64>() > 0.0);
        let lambda: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).fract()).collect();
        let mut s = AgentState::from_wealth(wealth, lambda).unwrap();
        let before = total_money(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2000 {
            s.exchange_step(&mut rng);
            prop_assert!(s.wealth.iter().all(|x| *x >= 0.0));
        }
        prop_assert_eq!(total_money(&s).to_bits(), before.to_bits());
    }

    #[test]
    fn exchange_matches_rearranged_rule(
        xi in 0.0f64..10.0, xj in 0.0f64..10.0,
        li in 0.0f64..1.0, lj in 0.0f64..1.0, eps in 0.0f64..1.0,
    ) {
        prop_assume!(xi + xj > 0.0);
        let mut s = AgentState::from_wealth(vec![xi, xj], vec![li, lj]).unwrap();
        let (xi, xj) = (s.wealth[0], s.wealth[1]);
        s.exchange_pair(0, 1, eps);
        let want = xi * (li + eps * (1.0 - li)) + eps * (1.0 - lj) * xj;
        prop_assert!((s.wealth[0] - want).abs() <= 1e-14 * (xi + xj));
    }
}
