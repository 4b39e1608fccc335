use proptest::prelude::*;
use sbfit_core::gof::{compute_gof, ks_statistics};
use sbfit_core::mcmc::RngStream;
use sbfit_core::{Dataset, JsbParams, WeibullParams};

fn jsb_strategy() -> impl Strategy<Value = JsbParams> {
    (0.3f64..4.0, -3.0f64..3.0, 1.0f64..80.0, -10.0f64..20.0)
        .prop_map(|(d, g, l, x)| JsbParams::new(d, g, l, x).unwrap())
}

/// Sample at the plotting positions (2i - 1) / 2n.
fn quantile_data(p: &JsbParams, n: usize) -> Dataset {
    let v = (1..=n)
        .map(|i| p.quantile((2 * i - 1) as f64 / (2 * n) as f64).unwrap())
        .collect();
    Dataset::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cm_bounded_below(p in jsb_strategy(), n in 2usize..300, seed in any::<u64>()) {
        let data = p.sample(n, &mut RngStream::new(seed)).unwrap();
        let g = compute_gof(&data, &p).unwrap();
        prop_assert!(g.cm >= 1.0 / (12.0 * n as f64) - 1e-15);
    }

    #[test]
    fn ks_minimal_for_plotting_positions(p in jsb_strategy(), n in 2usize..300) {
        let data = quantile_data(&p, n);
        let ks = ks_statistics(&data, &p);
        prop_assert!(ks.two_sided <= 1.0 / (2.0 * n as f64) + 1e-9, "{}", ks.two_sided);
        prop_assert!(ks.at_points <= ks.two_sided + 1e-15);
    }

    #[test]
    fn ks_in_unit_interval(p in jsb_strategy(), q in jsb_strategy(), n in 2usize..200, seed in any::<u64>()) {
        let data = p.sample(n, &mut RngStream::new(seed)).unwrap();
        let ks = ks_statistics(&data, &q);
        prop_assert!((0.0..=1.0).contains(&ks.two_sided));
        prop_assert!(ks.two_sided >= 1.0 / (2.0 * n as f64) - 1e-12);
    }

    #[test]
    fn statistics_invariant_to_input_order(p in jsb_strategy(), n in 2usize..200, seed in any::<u64>()) {
        let data = p.sample(n, &mut RngStream::new(seed)).unwrap();
        let mut shuffled = data.values().to_vec();
        shuffled.reverse();
        shuffled.rotate_left(n / 3);
        let again = Dataset::new(shuffled).unwrap();
        prop_assert_eq!(compute_gof(&data, &p).unwrap(), compute_gof(&again, &p).unwrap());
    }

    #[test]
    fn ad_nonnegative_for_weibull(
        a in 0.5f64..5.0, b in 0.5f64..30.0, m in 0.0f64..10.0,
        n in 2usize..200, seed in any::<u64>(),
    ) {
        let w = WeibullParams::new(a, b, m).unwrap();
        let data = w.sample(n, &mut RngStream::new(seed)).unwrap();
        if let Ok(g) = compute_gof(&data, &w) {
            prop_assert!(g.ad >= 0.0 || !g.ad.is_finite());
            prop_assert!(g.ll.is_finite());
        }
    }
}

#[test]
fn data_outside_support_is_flagged() {
    let p = JsbParams::new(1.0, 0.0, 10.0, 0.0).unwrap();
    let data = Dataset::new(vec![1.0, 2.0, 12.0]).unwrap();
    assert!(compute_gof(&data, &p).is_err());
    let g = sbfit_core::gof::compute_gof_lenient(&data, &p).unwrap();
    assert_eq!(g.ll, f64::NEG_INFINITY);
    assert_eq!(g.ad, f64::INFINITY);
}
