use proptest::prelude::*;
use qhkit::analysis::{
    adam_update_bound, adversarial_gradient_sequence, kingma_claimed_bound, nu2_bound_curve, qhadam_update_ratio,
    BoundParams, Horizon,
};
use qhkit::optimizers::{Optimizer, QhAdam, QhAdamParams};
use qhkit::Vector;

const SLACK: f64 = 1e-12;

fn adam(beta1: f64, beta2: f64, horizon: Horizon) -> BoundParams<f64> {
    BoundParams::new(1.0, 1.0, beta1, beta2, horizon).unwrap()
}

fn params() -> impl Strategy<Value = BoundParams<f64>> {
    (0.5..0.9999f64, 0.01..0.99f64, 0.0..=1.0f64, 0.01..=1.0f64)
        .prop_map(|(b2, frac, nu1, nu2)| BoundParams::new(nu1, nu2, frac * b2.sqrt(), b2, Horizon::Infinite).unwrap())
}

#[test]
fn adversarial_sequence_approaches_the_limit() {
    let limit = adam_update_bound(&adam(0.9, 0.999, Horizon::Infinite));
    let p = adam(0.9, 0.999, Horizon::Steps(1000));
    let xs = adversarial_gradient_sequence(&p, 1000).unwrap();
    let ratio = qhadam_update_ratio(1.0, 1.0, 0.9, 0.999, &xs).unwrap();
    assert!(ratio >= 0.98 * limit, "{ratio} vs {limit}");
    assert!(ratio <= limit * (1.0 + SLACK));
    assert!((ratio - adam_update_bound(&p)).abs() <= 1e-10 * limit);
}

#[test]
fn claimed_bound_is_exceeded() {
    let claimed = kingma_claimed_bound(0.9, 0.999);
    let p = adam(0.9, 0.999, Horizon::Steps(200));
    let xs = adversarial_gradient_sequence(&p, 200).unwrap();
    let ratio = qhadam_update_ratio(1.0, 1.0, 0.9, 0.999, &xs).unwrap();
    assert!(ratio > 3.17 && 3.17 > claimed, "{ratio} vs {claimed}");
}

#[test]
fn nu2_curve_has_an_interior_minimum() {
    let grid: Vec<f64> = (1..=100).map(|i| f64::from(i) / 100.0).collect();
    let curve = nu2_bound_curve(1.0, 0.9, 0.999, &grid).unwrap();
    assert!(curve.iter().all(|(_, b)| b.is_finite() && *b > 0.0));
    assert!(curve[0].1 > 5.0 * curve[99].1);
    let argmin = (0..curve.len())
        .min_by(|&i, &j| curve[i].1.total_cmp(&curve[j].1))
        .unwrap();
    assert!(argmin > 0 && argmin < 99, "minimum at nu2 = {}", curve[argmin].0);
    for w in curve[..=argmin].windows(2) {
        assert!(w[1].1 < w[0].1);
    }
    for w in curve[argmin..].windows(2) {
        assert!(w[1].1 > w[0].1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn adversarial_sequence_attains_the_finite_bound(p in params(), t in 1usize..300) {
        let p = p.with_horizon(Horizon::Steps(t)).unwrap();
        let xs = adversarial_gradient_sequence(&p, t).unwrap();
        let ratio = qhadam_update_ratio(p.nu1, p.nu2, p.beta1, p.beta2, &xs).unwrap();
        let bound = adam_update_bound(&p);
        prop_assert!((ratio - bound).abs() <= 1e-9 * bound, "{} vs {}", ratio, bound);
        prop_assert!(bound <= adam_update_bound(&p.with_horizon(Horizon::Infinite).unwrap()) * (1.0 + SLACK));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn random_sequences_stay_below_the_bound(
        p in params(),
        xs in prop::collection::vec(-10.0..10.0f64, 1..60),
    ) {
        prop_assume!(xs.last().unwrap().abs() > 1e-6);
        let bound = adam_update_bound(&p.with_horizon(Horizon::Steps(xs.len() - 1)).unwrap());
        let ratio = qhadam_update_ratio(p.nu1, p.nu2, p.beta1, p.beta2, &xs).unwrap();
        prop_assert!(ratio <= bound * (1.0 + SLACK), "{} > {}", ratio, bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn qhadam_steps_stay_below_lr_times_bound(
        p in params(),
        lr in 1e-3..1.0f64,
        grads in prop::collection::vec(prop::collection::vec(0.01..5.0f64, 4), 1..80),
        signs in prop::collection::vec(any::<bool>(), 320),
    ) {
        let qp = QhAdamParams::new(1.0, 0.0, p.beta1, p.beta2, p.nu1, p.nu2).unwrap().without_bias_correction();
        let mut opt = QhAdam::new(qp, 4);
        let mut theta = Vector::zeros(4);
        for (n, g) in grads.iter().enumerate() {
            let g: Vec<f64> = g.iter().enumerate().map(|(i, &x)| if signs[4 * n + i] { x } else { -x }).collect();
            let next = opt.step(&theta, &Vector::new(g).unwrap(), lr).unwrap();
            let bound = lr * adam_update_bound(&p.with_horizon(Horizon::Steps(n)).unwrap());
            let step = next.max_abs_diff(&theta).unwrap();
            prop_assert!(step <= bound * (1.0 + SLACK), "step {} > {}", step, bound);
            theta = next;
        }
    }
}

fn nonzero() -> impl Strategy<Value = f64> {
    (0.01..5.0f64, any::<bool>()).prop_map(|(x, neg)| if neg { -x } else { x })
}

#[test]
fn finite_bound_does_not_cover_bias_correction() {
    let p = BoundParams::new(1.0, 1.0, 0.6, 0.5, Horizon::Steps(0)).unwrap();
    let qp = QhAdamParams::new(1.0, 0.0, 0.6, 0.5, 1.0, 1.0).unwrap();
    let mut opt = QhAdam::new(qp, 1);
    let next = opt
        .step(&Vector::zeros(1), &Vector::new(vec![2.0]).unwrap(), 1.0)
        .unwrap();
    assert!((next.as_slice()[0].abs() - 1.0).abs() < 1e-15);
    assert!(adam_update_bound(&p) < 1.0);
}

#[test]
fn bias_corrected_adversarial_run_stays_below_the_limit() {
    let p = adam(0.9, 0.999, Horizon::Steps(1000));
    let limit = adam_update_bound(&p.with_horizon(Horizon::Infinite).unwrap());
    let qp = QhAdamParams::new(1.0, 0.0, 0.9, 0.999, 1.0, 1.0).unwrap();
    let mut opt = QhAdam::new(qp, 1);
    let mut theta = Vector::zeros(1);
    for x in adversarial_gradient_sequence(&p, 1000).unwrap() {
        let next = opt.step(&theta, &Vector::new(vec![x]).unwrap(), 1.0).unwrap();
        assert!(next.max_abs_diff(&theta).unwrap() <= limit * (1.0 + SLACK));
        theta = next;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn bias_corrected_steps_stay_below_the_limit(p in params(), grads in prop::collection::vec(nonzero(), 1..80)) {
        let qp = QhAdamParams::new(1.0, 0.0, p.beta1, p.beta2, p.nu1, p.nu2).unwrap();
        let mut opt = QhAdam::new(qp, 1);
        let mut theta = Vector::zeros(1);
        let limit = adam_update_bound(&p);
        for g in grads {
            let next = opt.step(&theta, &Vector::new(vec![g]).unwrap(), 1.0).unwrap();
            let step = next.max_abs_diff(&theta).unwrap();
            prop_assert!(step <= limit * (1.0 + SLACK), "{} > {}", step, limit);
            theta = next;
        }
    }

    #[test]
    fn positive_eps_only_shrinks_steps(
        p in params(),
        eps in 1e-8..1.0f64,
        grads in prop::collection::vec(nonzero(), 1..80),
    ) {
        let qp = QhAdamParams::new(1.0, eps, p.beta1, p.beta2, p.nu1, p.nu2).unwrap().without_bias_correction();
        let mut opt = QhAdam::new(qp, 1);
        let mut theta = Vector::zeros(1);
        for (n, g) in grads.into_iter().enumerate() {
            let next = opt.step(&theta, &Vector::new(vec![g]).unwrap(), 1.0).unwrap();
            let bound = adam_update_bound(&p.with_horizon(Horizon::Steps(n)).unwrap());
            prop_assert!(next.max_abs_diff(&theta).unwrap() <= bound * (1.0 + SLACK));
            theta = next;
        }
    }
}
