use proptest::prelude::*;
use qhkit::discounting::{
    discount_weight, discounted_sum, ewma_update, qhwma, rho, rho_truncated, DiscountFunction, Hwma,
};
use qhkit::{schedule_lr, LrSchedule, SeededRng, Vector};

fn squared_weight_sum(nu: f64, beta: f64, t: usize) -> f64 {
    let f = DiscountFunction::quasi_hyperbolic(nu, beta).unwrap();
    (0..=t).map(|i| discount_weight(&f, i).powi(2)).sum()
}

#[test]
fn quasi_hyperbolic_weights_sum_to_one() {
    for nu in [0.0f64, 0.1, 0.5, 0.7, 0.9, 1.0] {
        for beta in [0.0f64, 0.5, 0.9, 0.99, 0.999] {
            let n = (50.0 / (1.0 - beta)).ceil() as usize;
            let f = DiscountFunction::quasi_hyperbolic(nu, beta).unwrap();
            assert!((f.partial_sum(n) - 1.0).abs() <= 1e-9, "({nu}, {beta})");
        }
    }
}

#[test]
fn exponential_weights_sum_to_one() {
    for beta in [0.0f64, 0.5, 0.9, 0.99] {
        let n = (50.0 / (1.0 - beta)).ceil() as usize;
        let f = DiscountFunction::exponential(beta).unwrap();
        assert!((f.partial_sum(n) - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn hyperbolic_weights_diverge() {
    let f = DiscountFunction::hyperbolic(1.0, 1.0).unwrap();
    assert!(f.partial_sum(100_000) > 10.0);
}

#[test]
fn rho_has_the_lower_bound_and_is_monotone() {
    for i in 0..=100 {
        let nu = f64::from(i) / 100.0;
        let mut prev = f64::INFINITY;
        for j in 0..=19_990 {
            let beta = f64::from(j) * 0.00005;
            let r = rho(nu, beta).unwrap();
            assert!(r >= (1.0 - nu).powi(2) - 1e-15, "({nu}, {beta})");
            assert!(r <= prev + 1e-15, "rho increased at ({nu}, {beta})");
            prev = r;
        }
        assert!((rho(nu, 1.0 - 1e-9).unwrap() - (1.0 - nu).powi(2)).abs() < 1e-6);
    }
}

#[test]
fn truncated_rho_matches_squared_weights() {
    for nu in [0.0, 0.3, 0.7, 1.0] {
        for beta in [0.1, 0.5, 0.9, 0.99] {
            for t in [1, 2, 5, 10, 100, 1000] {
                let oracle = squared_weight_sum(nu, beta, t);
                let r = rho_truncated(nu, beta, t).unwrap();
                assert!((r - oracle).abs() <= 1e-12, "({nu}, {beta}, {t}): {r} vs {oracle}");
            }
        }
    }
}

#[test]
fn hwma_matches_direct_sum_and_enforces_cap() {
    let mut h = Hwma::new(1.0, 0.5, 3).unwrap();
    let xs: Vec<Vector> = [1.0, -2.0, 4.0].iter().map(|&x| Vector::scalar(x).unwrap()).collect();
    for x in &xs {
        h.push(x.clone()).unwrap();
    }
    let expected = 4.0 + (-2.0) / 1.5 + 1.0 / 2.0;
    assert!((h.value().unwrap().as_slice()[0] - expected).abs() < 1e-15);
    assert!(h.push(Vector::scalar(0.0).unwrap()).is_err());
}

#[test]
fn rng_streams_are_reproducible() {
    let draw = |seed| {
        let mut r = SeededRng::new(seed);
        (0..100).map(|_| r.normal()).collect::<Vec<_>>()
    };
    assert_eq!(draw(42), draw(42));
    assert_ne!(draw(42), draw(43));
    let mut a = SeededRng::stream(5, 0);
    let mut b = SeededRng::stream(5, 1);
    assert_ne!(a.uniform(), b.uniform());
}

fn history() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 3), 1..=200)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn qhwma_of_tracked_ewma_is_the_discounted_sum(nu in 0.0..=1.0f64, beta in 0.0..0.999f64, xs in history()) {
        let xs: Vec<Vector> = xs.into_iter().map(|x| Vector::new(x).unwrap()).collect();
        let mut ewma = Vector::zeros(3);
        for x in &xs {
            ewma = ewma_update(&ewma, beta, x).unwrap();
        }
        let got = qhwma(nu, beta, &ewma, xs.last().unwrap()).unwrap();
        let f = DiscountFunction::quasi_hyperbolic(nu, beta).unwrap();
        let want = discounted_sum(&f, &xs).unwrap();
        prop_assert!(got.max_abs_diff(&want).unwrap() <= 1e-12);
    }

    #[test]
    fn schedule_never_increases_after_warmup(
        base in 1e-4..10.0f64,
        warmup in 0u64..50,
        every in 1u64..500,
        factor in 0.01..=1.0f64,
    ) {
        let s = LrSchedule::new(base, warmup, every, factor).unwrap();
        let mut prev = f64::INFINITY;
        for step in warmup..warmup + 3000 {
            let lr = schedule_lr(&s, step);
            prop_assert!(lr <= prev && lr > 0.0 && lr <= base);
            prev = lr;
        }
        for step in 0..warmup.saturating_sub(1) {
            prop_assert!(schedule_lr(&s, step) <= schedule_lr(&s, step + 1) + 1e-15);
        }
    }
}
