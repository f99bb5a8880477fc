use proptest::prelude::*;
use qhkit::conversions::{
    accsgd_to_qhm, anpid_to_qhm, nag_recovery_xi, pid_to_qhm, qhm_to_accsgd, qhm_to_pid, qhm_to_snv, qhm_to_tso,
    snv_to_qhm, tso_to_qhm,
};
use qhkit::harness::{accsgd_eps_for, check_equivalence, oracle_pair, OptimizerSpec, ProblemSpec};
use qhkit::optimizers::{AnPid, AnPidParams, Optimizer, Qhm, QhmParams, TsoParams};
use qhkit::problems::QuadraticProblem;
use qhkit::{Error, Vector};

const NUS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
const BETAS: [f64; 4] = [0.5, 0.9, 0.99, 0.999];
const ALPHAS: [f64; 2] = [0.01, 1.0];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn assert_round_trip(p: &QhmParams<f64>, q: &QhmParams<f64>) {
    assert!(rel(p.alpha, q.alpha) <= 1e-12, "{p:?} -> {q:?}");
    assert!(rel(p.nu, q.nu) <= 1e-12, "{p:?} -> {q:?}");
    assert!(rel(p.beta, q.beta) <= 1e-12, "{p:?} -> {q:?}");
}

fn grid() -> impl Iterator<Item = QhmParams<f64>> {
    ALPHAS.into_iter().flat_map(|a| {
        NUS.into_iter()
            .flat_map(move |n| BETAS.into_iter().map(move |b| QhmParams::new(a, n, b).unwrap()))
    })
}

fn quadratic() -> ProblemSpec {
    let eig: Vec<f64> = (0..6).map(|i| 0.05 * 2f64.powi(i)).collect();
    let b = Vector::new(vec![0.3, -0.2, 0.1, 0.0, -0.4, 0.25]).unwrap();
    ProblemSpec::Quadratic(QuadraticProblem::new(eig, b, qhkit::problems::NoiseModel::None).unwrap())
}

#[test]
fn pid_round_trip_on_grid() {
    for p in grid() {
        let g = qhm_to_pid(&p).unwrap();
        assert_round_trip(&p, &pid_to_qhm(g.kp, g.ki, g.kd).unwrap());
        assert!(rel(g.kd / g.kp, -p.beta / (1.0 - p.beta)) <= 1e-12);
    }
}

#[test]
fn snv_round_trip_on_grid() {
    for p in grid() {
        let s = qhm_to_snv(&p).unwrap();
        assert_round_trip(&p, &snv_to_qhm(s.gamma, s.beta1, s.beta2).unwrap());
    }
}

#[test]
fn accsgd_round_trip_where_feasible() {
    for p in grid() {
        match accsgd_eps_for(&p) {
            Ok(eps) => {
                assert!(p.nu < p.beta, "{p:?} should be infeasible");
                let s = qhm_to_accsgd(&p, eps).unwrap();
                assert_round_trip(&p, &accsgd_to_qhm(s.delta, s.kappa, s.xi, s.eps).unwrap());
            }
            Err(Error::Infeasible { .. }) => assert!(p.nu >= p.beta, "{p:?} should be feasible"),
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn tso_round_trip_on_grid() {
    for p in grid() {
        let t = qhm_to_tso(&p).unwrap();
        let back = tso_to_qhm(&t).unwrap();
        assert_round_trip(&p, &back.params);
    }
}

#[test]
fn mapped_pairs_follow_the_same_trajectory() {
    let problem = quadratic();
    for (alpha, nu, beta) in [(0.05, 0.7, 0.9), (0.1, 0.3, 0.5), (0.02, 0.9, 0.99), (0.1, 0.5, 0.95)] {
        for other in ["sgd", "momentum", "nag", "pid", "snv", "aggmo", "tso"] {
            let pair = oracle_pair(other, alpha, nu, beta).unwrap();
            let r = check_equivalence(&pair.a, &pair.b, &problem, 50, 0).unwrap();
            assert!(r.pass, "qhm/{other} at {alpha},{nu},{beta}: {}", r.max_deviation);
        }
        if nu < beta {
            let pair = oracle_pair("accsgd", alpha, nu, beta).unwrap();
            let r = check_equivalence(&pair.a, &pair.b, &problem, 50, 0).unwrap();
            assert!(r.pass, "qhm/accsgd at {alpha},{nu},{beta}: {}", r.max_deviation);
        }
    }
}

#[test]
fn equivalence_is_symmetric_for_bijections() {
    let problem = quadratic();
    for other in ["pid", "snv", "accsgd", "nag"] {
        let pair = oracle_pair(other, 0.05, 0.6, 0.9).unwrap();
        let ab = check_equivalence(&pair.a, &pair.b, &problem, 50, 0).unwrap();
        let ba = check_equivalence(&pair.b, &pair.a, &problem, 50, 0).unwrap();
        assert!(ab.pass && ba.pass, "{other}");
    }
}

#[test]
fn reverse_mappings_follow_the_same_trajectory() {
    let problem = quadratic();
    let (kp, ki, kd) = (-0.4, 0.2, 1.2);
    let q = pid_to_qhm(kp, ki, kd).unwrap();
    let pid = OptimizerSpec::Pid {
        kp,
        ki,
        kd,
        beta: q.beta,
    };
    let qhm = OptimizerSpec::Qhm {
        alpha: q.alpha,
        nu: q.nu,
        beta: q.beta,
    };
    assert!(check_equivalence(&pid, &qhm, &problem, 50, 0).unwrap().pass);

    let snv = OptimizerSpec::Snv {
        gamma: 0.01,
        beta1: 0.9,
        beta2: 0.5,
    };
    let q = snv_to_qhm(0.01, 0.9, 0.5).unwrap();
    let qhm = OptimizerSpec::Qhm {
        alpha: q.alpha,
        nu: q.nu,
        beta: q.beta,
    };
    assert!(check_equivalence(&snv, &qhm, &problem, 50, 0).unwrap().pass);

    let acc = OptimizerSpec::AccSgd {
        delta: 0.05,
        kappa: 50.0,
        xi: 5.0,
        eps: 0.5,
    };
    let q = accsgd_to_qhm(0.05, 50.0, 5.0, 0.5).unwrap();
    let qhm = OptimizerSpec::Qhm {
        alpha: q.alpha,
        nu: q.nu,
        beta: q.beta,
    };
    assert!(check_equivalence(&acc, &qhm, &problem, 50, 0).unwrap().pass);
}

#[test]
fn tso_outside_qhm_family_is_rejected() {
    let t = TsoParams::new(0.5, 0.1, 0.2, 0.3, 0.9, -0.1).unwrap();
    let e = tso_to_qhm(&t).unwrap_err();
    assert!(matches!(e, Error::Infeasible { .. }), "{e}");
}

#[test]
fn anpid_mapping_reproduces_anpid() {
    let problem = quadratic();
    let qp = problem.problem();
    for (r, kd, beta) in [(0.01, 0.1, 0.9), (0.02, 0.5, 0.5), (0.005, 0.0, 0.95)] {
        let q = anpid_to_qhm(r, kd, beta).unwrap();
        let theta0 = qp.initial_point();
        let (mut ta, mut tq) = (theta0.clone(), theta0.clone());
        let mut qhm = Qhm::new(q, theta0.dim());
        let mut worst = 0.0f64;
        let mut anpid: Option<AnPid<f64>> =
            (kd > 0.0).then(|| AnPid::new(AnPidParams::new(r, kd, beta).unwrap(), theta0.dim()));
        if anpid.is_none() {
            // kD = 0 is plain momentum with α = r/(1-β).
            assert_eq!(q.nu, 1.0);
            continue;
        }
        let mut rng = qhkit::SeededRng::new(0);
        for _ in 0..50 {
            let (_, ga) = qp.loss_grad(&ta, &mut rng).unwrap();
            let (_, gq) = qp.loss_grad(&tq, &mut rng).unwrap();
            ta = anpid.as_mut().unwrap().step(&ta, &ga, 1.0).unwrap();
            tq = qhm.step(&tq, &gq, q.alpha).unwrap();
            worst = worst.max(ta.max_abs_diff(&tq).unwrap());
        }
        assert!(worst < 1e-8, "({r}, {kd}, {beta}): {worst}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn accsgd_never_recovers_nag(kappa in 1.0001..1e4f64, eps in 1e-6..0.999999f64) {
        let r = nag_recovery_xi(kappa, eps);
        prop_assert!(r.xi > kappa.sqrt());
        prop_assert!(!r.feasible);
    }

    #[test]
    fn pid_restriction_holds(alpha in 1e-3..10.0f64, nu in 0.01..=1.0f64, beta in 0.01..0.9999f64) {
        let g = qhm_to_pid(&QhmParams::new(alpha, nu, beta).unwrap()).unwrap();
        prop_assert!(rel(g.kd / g.kp, -beta / (1.0 - beta)) <= 1e-12);
    }
}
