mod common;

use common::{bisect, exact_sum, integrate};
use proptest::prelude::*;
use sbfit_core::mcmc::RngStream;
use sbfit_core::{ContinuousModel, Dataset, JsbParams, WeibullParams};

fn jsb_cases() -> Vec<JsbParams> {
    [
        (2.0, 2.0, 20.0, 0.0),
        (0.772, 0.545, 52.311, 8.719),
        (0.6, -1.5, 10.0, -5.0),
        (4.0, 0.0, 1.0, 100.0),
        (1.2, 3.0, 75.0, -40.0),
    ]
    .into_iter()
    .map(|(d, g, l, x)| JsbParams::new(d, g, l, x).unwrap())
    .collect()
}

#[test]
fn jsb_cdf_matches_integrated_density() {
    for p in jsb_cases() {
        for i in 1..25 {
            let x = p.xi + p.lambda * i as f64 / 25.0;
            let quad = integrate(|t| p.pdf(t).unwrap(), p.xi, x, 16);
            let cdf = p.cdf(x).unwrap();
            assert!((quad - cdf).abs() < 1e-9, "{p:?} x={x}: {quad} vs {cdf}");
        }
    }
}

#[test]
fn jsb_density_integrates_to_one() {
    for p in jsb_cases() {
        let total = integrate(|t| p.pdf(t).unwrap(), p.xi, p.upper(), 32);
        assert!((total - 1.0).abs() < 1e-9, "{p:?}: {total}");
    }
}

#[test]
fn weibull_cdf_matches_integrated_density() {
    for (a, b, m) in [(1.682, 23.12, 7.436), (0.7, 2.0, -1.0), (3.5, 10.0, 0.0), (1.005, 22.746, 8.278)] {
        let p = WeibullParams::new(a, b, m).unwrap();
        for q in [0.01, 0.1, 0.3, 0.5, 0.8, 0.99] {
            let x = p.quantile(q).unwrap();
            let quad = integrate(|t| p.pdf(t).unwrap(), m, x, 16);
            assert!((quad - q).abs() < 1e-9, "{p:?} q={q}: {quad}");
        }
    }
}

#[test]
fn jsb_quantile_matches_bisection() {
    for p in jsb_cases() {
        for q in [0.001, 0.05, 0.25, 0.5, 0.75, 0.95, 0.999] {
            let root = bisect(|x| p.cdf(x).unwrap() - q, p.xi, p.upper());
            let x = p.quantile(q).unwrap();
            assert!((root - x).abs() <= 1e-9 * p.lambda, "{p:?} q={q}: {root} vs {x}");
        }
    }
}

#[test]
fn log_likelihood_matches_exact_sum() {
    let p = JsbParams::new(2.0, 2.0, 20.0, 0.0).unwrap();
    let data = p.sample(5000, &mut RngStream::new(21)).unwrap();
    let exact = exact_sum(data.values().iter().map(|&x| p.pdf(x).unwrap().ln()));
    let ll = p.log_likelihood(&data);
    assert!((ll - exact).abs() <= 1e-9 * exact.abs(), "{ll} vs {exact}");

    let w = WeibullParams::new(1.682, 23.12, 7.436).unwrap();
    let data = w.sample(5000, &mut RngStream::new(22)).unwrap();
    let exact = exact_sum(data.values().iter().map(|&x| w.pdf(x).unwrap().ln()));
    assert!((w.log_likelihood(&data) - exact).abs() <= 1e-9 * exact.abs());
}

#[test]
fn empirical_moments_of_samples() {
    // Monte Carlo mean against the quadrature mean
    let p = JsbParams::new(2.0, 2.0, 20.0, 0.0).unwrap();
    let data = p.sample(20_000, &mut RngStream::new(5)).unwrap();
    let (m, se) = common::mean_and_se(data.values());
    let quad = integrate(|t| t * p.pdf(t).unwrap(), 0.0, 20.0, 32);
    assert!((m - quad).abs() < 4.0 * se, "{m} vs {quad} (se {se})");

    let w = WeibullParams::new(2.0, 1.0, 0.0).unwrap();
    let data = w.sample(20_000, &mut RngStream::new(6)).unwrap();
    let (m, se) = common::mean_and_se(data.values());
    let exact = statrs::function::gamma::gamma(1.5);
    assert!((m - exact).abs() < 4.0 * se, "{m} vs {exact}");
}

fn jsb_strategy() -> impl Strategy<Value = JsbParams> {
    (0.2f64..8.0, -5.0f64..5.0, 0.5f64..100.0, -50.0f64..50.0)
        .prop_map(|(d, g, l, x)| JsbParams::new(d, g, l, x).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jsb_cdf_monotone_and_bounded(p in jsb_strategy(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let xa = p.xi + a * p.lambda;
        let xb = p.xi + b * p.lambda;
        let (ga, gb) = (p.cdf_at(xa), p.cdf_at(xb));
        prop_assert!((0.0..=1.0).contains(&ga) && (0.0..=1.0).contains(&gb));
        prop_assert!(ga <= gb);
        prop_assert_eq!(p.cdf_at(p.xi - 1.0), 0.0);
        prop_assert_eq!(p.cdf_at(p.upper() + 1.0), 1.0);
    }

    #[test]
    fn jsb_quantile_inverts_cdf(p in jsb_strategy(), q in 0.01f64..0.99) {
        let x = p.quantile(q).unwrap();
        prop_assert!(x > p.xi && x < p.upper());
        // rounding x to the nearest double moves the CDF by up to pdf * ulp
        let slack = p.pdf(x).unwrap() * 4.0 * f64::EPSILON * (x.abs() + p.xi.abs() + p.lambda);
        prop_assert!((p.cdf(x).unwrap() - q).abs() < 1e-9 + slack);
    }

    #[test]
    fn weibull_quantile_inverts_cdf(a in 0.3f64..8.0, b in 0.1f64..50.0, m in -20.0f64..20.0, q in 0.01f64..0.99) {
        let p = WeibullParams::new(a, b, m).unwrap();
        let x = p.quantile(q).unwrap();
        prop_assert!(x > m);
        prop_assert!((p.cdf(x).unwrap() - q).abs() < 1e-10);
    }

    #[test]
    fn jsb_samples_inside_support(p in jsb_strategy(), seed in any::<u64>()) {
        let d = p.sample(50, &mut RngStream::new(seed)).unwrap();
        prop_assert!(p.covers(&d));
        prop_assert!(p.log_likelihood(&d) > f64::NEG_INFINITY);
    }

    #[test]
    fn dataset_is_sorted(values in prop::collection::vec(0.01f64..1e3, 1..60)) {
        let d = Dataset::new(values.clone()).unwrap();
        prop_assert!(d.values().windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(d.len(), values.len());
    }
}
