use std::fs::{self, File};
use std::io::{self, BufWriter, Write};

use anyhow::{Context, Result};

use qhkit::analysis::{adam_update_bound, kingma_claimed_bound, BoundParams, Horizon};
use qhkit::conversions::{
    accsgd_to_qhm, aggmo_effective_lr, anpid_to_qhm, extended_aggmo_from_qhm, nag_recovery_xi, pid_to_qhm,
    qhm_to_accsgd, qhm_to_pid, qhm_to_snv, qhm_to_tso, snv_to_qhm, tso_to_qhm, unnormalized_lr_convert,
};
use qhkit::harness::{
    bound_curve, check_equivalence, default_nu2_grid, oracle_pair, run_single, run_sweep, summarize_sweep,
    variance_check, CellSummary, OptimizerSpec, ProblemSpec, SweepFamily, SweepSpec,
};
use qhkit::optimizers::{QhmParams, TsoParams};
use qhkit::problems::{LeastSquaresProblem, LogisticSpec, NoiseModel, QuadraticProblem};
use qhkit::{LrSchedule, Vector};

use crate::config::{parse_list, Config};
use crate::{usage, Cli, Coded, Command, ConvertArgs, OracleArgs, EXIT_EXPLODED, EXIT_FAILED_CHECK, EXIT_OK};

pub fn dispatch(cli: &Cli) -> Result<u8> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    for s in &cli.set {
        cfg.apply_override(s)?;
    }
    if cli.jobs == 0 {
        return Err(usage("--jobs must be >= 1"));
    }
    match &cli.command {
        Command::Run => cmd_run(cli, &cfg),
        Command::Sweep => cmd_sweep(cli, &cfg),
        Command::Convert(a) => cmd_convert(a),
        Command::Bound(a) => cmd_bound(cli, &cfg, a),
        Command::Variance(a) => cmd_variance(cli, &cfg, a.nu, a.beta, a.n),
        Command::OracleCheck(a) => cmd_oracle_check(cli, &cfg, a),
    }
}

/// Opens `--out`, falling back to `output.path`, then stdout.
fn open_output(cli: &Cli, cfg: &Config) -> Result<Box<dyn Write>> {
    let path = cli.out.clone().or_else(|| cfg.str("output.path").map(Into::into));
    Ok(match path {
        Some(p) => {
            let f = File::create(&p).map_err(|e| usage(format!("cannot create {}: {e}", p.display())))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn seed(cli: &Cli, cfg: &Config) -> Result<u64> {
    Ok(match cli.seed {
        Some(s) => s,
        None => cfg.get_or("run.seed", 0)?,
    })
}

fn problem_from(cfg: &Config) -> Result<ProblemSpec> {
    let kind = cfg.str("problem.kind").unwrap_or("quadratic");
    Ok(match kind {
        "quadratic" => {
            let eig: Vec<f64> = cfg.list("problem.eigenvalues")?.unwrap_or_else(|| vec![1.0, 10.0]);
            let dim = eig.len();
            let b = match cfg.list::<f64>("problem.b")? {
                Some(b) => Vector::new(b)?,
                None => Vector::zeros(dim.max(1)),
            };
            let sigma = cfg.get_or("problem.sigma", 0.0)?;
            let noise = match cfg.str("problem.noise").unwrap_or("none") {
                "none" => NoiseModel::None,
                "additive" => NoiseModel::additive(sigma)?,
                "multiplicative" => NoiseModel::multiplicative(sigma)?,
                other => return Err(usage(format!("unknown problem.noise `{other}`"))),
            };
            let mut p = QuadraticProblem::new(eig, b, noise)?;
            if let Some(start) = cfg.list::<f64>("problem.start")? {
                p = p.with_start(Vector::new(start)?)?;
            }
            ProblemSpec::Quadratic(p)
        }
        "least-squares" => {
            let eig: Vec<f64> = cfg.list("problem.eigenvalues")?.unwrap_or_else(|| vec![1.0, 10.0]);
            let w = match cfg.list::<f64>("problem.w_true")? {
                Some(w) => Vector::new(w)?,
                None => Vector::filled(eig.len().max(1), 1.0)?,
            };
            ProblemSpec::LeastSquares(LeastSquaresProblem::new(
                eig,
                w,
                cfg.get_or("problem.label_sigma", 0.1)?,
                cfg.get_or("problem.batch", 1)?,
            )?)
        }
        "logistic" => {
            let d = LogisticSpec::default();
            ProblemSpec::logistic(LogisticSpec {
                samples: cfg.get_or("problem.samples", d.samples)?,
                features: cfg.get_or("problem.features", d.features)?,
                classes: cfg.get_or("problem.classes", d.classes)?,
                data_seed: cfg.get_or("problem.data_seed", d.data_seed)?,
                separation: cfg.get_or("problem.separation", d.separation)?,
                l2_coeff: cfg.get_or("problem.l2", d.l2_coeff)?,
                minibatch: cfg.get_or("problem.minibatch", d.minibatch)?,
            })?
        }
        other => return Err(usage(format!("unknown problem.kind `{other}`"))),
    })
}

fn optimizer_from(cfg: &Config) -> Result<OptimizerSpec> {
    let f = |k: &str| cfg.require::<f64>(&format!("optimizer.{k}"));
    let or = |k: &str, d: f64| cfg.get_or::<f64>(&format!("optimizer.{k}"), d);
    let kind = cfg.str("optimizer.kind").unwrap_or("qhm");
    Ok(match kind {
        "sgd" => OptimizerSpec::Sgd { alpha: f("alpha")? },
        "momentum" => OptimizerSpec::Momentum {
            alpha: f("alpha")?,
            beta: f("beta")?,
        },
        "nag" => OptimizerSpec::Nag {
            alpha: f("alpha")?,
            beta: f("beta")?,
        },
        "qhm" => OptimizerSpec::Qhm {
            alpha: or("alpha", 0.1)?,
            nu: or("nu", 0.7)?,
            beta: or("beta", 0.999)?,
        },
        "adam" => OptimizerSpec::Adam {
            alpha: or("alpha", 1e-3)?,
            beta1: or("beta1", 0.9)?,
            beta2: or("beta2", 0.999)?,
            eps: or("eps", 1e-8)?,
        },
        "qhadam" => OptimizerSpec::QhAdam {
            alpha: or("alpha", 1e-3)?,
            nu1: or("nu1", 0.7)?,
            nu2: or("nu2", 1.0)?,
            beta1: or("beta1", 0.995)?,
            beta2: or("beta2", 0.999)?,
            eps: or("eps", 1e-8)?,
        },
        "pid" => OptimizerSpec::Pid {
            kp: f("kp")?,
            ki: f("ki")?,
            kd: f("kd")?,
            beta: f("beta")?,
        },
        "anpid" => OptimizerSpec::AnPid {
            r: f("r")?,
            kd: f("kd")?,
            beta: f("beta")?,
        },
        "snv" => OptimizerSpec::Snv {
            gamma: f("gamma")?,
            beta1: f("beta1")?,
            beta2: f("beta2")?,
        },
        "accsgd" => OptimizerSpec::AccSgd {
            delta: f("delta")?,
            kappa: f("kappa")?,
            xi: f("xi")?,
            eps: f("eps")?,
        },
        "aggmo" => OptimizerSpec::AggMo {
            gamma: f("gamma")?,
            betas: cfg
                .list("optimizer.betas")?
                .ok_or_else(|| usage("missing required key `optimizer.betas`"))?,
        },
        "aggmo-extended" => OptimizerSpec::ExtendedAggMo {
            betas: cfg
                .list("optimizer.betas")?
                .ok_or_else(|| usage("missing required key `optimizer.betas`"))?,
            gammas: cfg
                .list("optimizer.gammas")?
                .ok_or_else(|| usage("missing required key `optimizer.gammas`"))?,
        },
        "tso" => OptimizerSpec::Tso {
            h: f("h")?,
            k: f("k")?,
            l: f("l")?,
            m: f("m")?,
            q: f("q")?,
            z: f("z")?,
        },
        other => return Err(usage(format!("unknown optimizer.kind `{other}`"))),
    })
}

fn schedule_from(cfg: &Config, default: LrSchedule) -> Result<LrSchedule> {
    Ok(LrSchedule::new(
        cfg.get_or("schedule.alpha", default.base_alpha)?,
        cfg.get_or("schedule.warmup", default.warmup_steps)?,
        cfg.get_or("schedule.decay_every", default.decay_every)?,
        cfg.get_or("schedule.decay_factor", default.decay_factor)?,
    )?)
}

fn cmd_run(cli: &Cli, cfg: &Config) -> Result<u8> {
    let problem = problem_from(cfg)?;
    let opt = optimizer_from(cfg)?;
    let schedule = schedule_from(cfg, LrSchedule::constant(1.0)?)?;
    let steps: u64 = cfg.get_or("run.steps", 100)?;
    let result = run_single(&opt, &problem, &schedule, steps, seed(cli, cfg)?)?;

    let mut out = open_output(cli, cfg)?;
    writeln!(out, "step,lr,loss,param_norm,update_norm")?;
    for r in &result.records {
        writeln!(out, "{},{},{},{},{}", r.step, r.lr, r.loss, r.param_norm, r.update_norm)?;
    }
    out.flush()?;
    if let Some(at) = result.exploded_at {
        eprintln!("run exploded at step {at}");
        return Ok(EXIT_EXPLODED);
    }
    eprintln!("final_loss={}", result.final_loss);
    Ok(EXIT_OK)
}

fn describe(label: &str, c: Option<&CellSummary>) -> String {
    match c {
        Some(c) => format!(
            "{label}: nu={} beta={} median_final_loss={} explosions={}",
            c.nu, c.beta, c.median_final_loss, c.explosions
        ),
        None => format!("{label}: not in grid"),
    }
}

fn cmd_sweep(cli: &Cli, cfg: &Config) -> Result<u8> {
    let family = match cfg.str("sweep.family").unwrap_or("qhm") {
        "qhm" => SweepFamily::Qhm {
            alpha: cfg.get_or("sweep.alpha", 1.0)?,
        },
        "qhadam" => {
            let SweepFamily::QhAdam { alpha, eps, nu2, beta2 } = SweepFamily::qhadam_default() else {
                unreachable!()
            };
            SweepFamily::QhAdam {
                alpha: cfg.get_or("sweep.alpha", alpha)?,
                eps: cfg.get_or("sweep.eps", eps)?,
                nu2: cfg.get_or("sweep.nu2", nu2)?,
                beta2: cfg.get_or("sweep.beta2", beta2)?,
            }
        }
        other => return Err(usage(format!("unknown sweep.family `{other}`"))),
    };
    let mut spec = SweepSpec::default_for(family)?;
    if let Some(g) = cfg.list("sweep.nu_grid")? {
        spec.nu_grid = g;
    }
    if let Some(g) = cfg.list("sweep.beta_grid")? {
        spec.beta_grid = g;
    }
    if let Some(s) = cfg.list("sweep.seeds")? {
        spec.seeds = s;
    }
    if let Some(base) = cli.seed {
        let n = spec.seeds.len() as u64;
        spec.seeds = (0..n).map(|i| base + i).collect();
    }
    spec.steps = cfg.get_or("sweep.steps", spec.steps)?;
    spec.schedule = schedule_from(cfg, spec.schedule)?;
    if cfg.str("problem.kind").is_some() {
        spec.problem = problem_from(cfg)?;
    }

    let rows = run_sweep(&spec, cli.jobs)?;
    let mut out = open_output(cli, cfg)?;
    writeln!(out, "optimizer,nu,beta,alpha,seed,final_loss,best_loss,exploded")?;
    for r in &rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.optimizer, r.nu, r.beta, r.alpha, r.seed, r.final_loss, r.best_loss, r.exploded
        )?;
    }
    out.flush()?;

    let s = summarize_sweep(&rows)?;
    eprintln!("{}", describe("best", Some(&s.best)));
    eprintln!("{}", describe("default", s.default_cell.as_ref()));
    eprintln!("{}", describe("best_nag", s.best_nag.as_ref()));
    if let (Some(d), Some(n)) = (s.default_cell, s.best_nag) {
        eprintln!("default_over_best_nag={}", d.median_final_loss / n.median_final_loss);
    }
    Ok(EXIT_OK)
}

fn need(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| usage(format!("missing --{flag}")))
}

fn print_qhm(p: &QhmParams<f64>) {
    println!("alpha={}\nnu={}\nbeta={}", p.alpha, p.nu, p.beta);
}

fn cmd_convert(a: &ConvertArgs) -> Result<u8> {
    let qhm = || -> Result<QhmParams<f64>> {
        Ok(QhmParams::new(
            need(a.alpha, "alpha")?,
            need(a.nu, "nu")?,
            need(a.beta, "beta")?,
        )?)
    };
    match (a.from.as_str(), a.to.as_deref()) {
        ("qhm", Some("pid")) => {
            let g = qhm_to_pid(&qhm()?)?;
            println!("kP={}\nkI={}\nkD={}\nbeta={}", g.kp, g.ki, g.kd, g.beta);
        }
        ("pid", Some("qhm")) => print_qhm(&pid_to_qhm(need(a.kp, "kp")?, need(a.ki, "ki")?, need(a.kd, "kd")?)?),
        ("qhm", Some("snv")) => {
            let s = qhm_to_snv(&qhm()?)?;
            println!("gamma={}\nbeta1={}\nbeta2={}", s.gamma, s.beta1, s.beta2);
        }
        ("snv", Some("qhm")) => print_qhm(&snv_to_qhm(
            need(a.gamma, "gamma")?,
            need(a.beta1, "beta1")?,
            need(a.beta2, "beta2")?,
        )?),
        ("qhm", Some("accsgd")) => {
            let s = qhm_to_accsgd(&qhm()?, need(a.eps, "eps")?)?;
            println!("delta={}\nkappa={}\nxi={}\neps={}", s.delta, s.kappa, s.xi, s.eps);
        }
        ("accsgd", Some("qhm")) => print_qhm(&accsgd_to_qhm(
            need(a.delta, "delta")?,
            need(a.kappa, "kappa")?,
            need(a.xi, "xi")?,
            need(a.eps, "eps")?,
        )?),
        ("anpid", Some("qhm")) => print_qhm(&anpid_to_qhm(
            need(a.r, "r")?,
            need(a.kd, "kd")?,
            need(a.beta, "beta")?,
        )?),
        ("tso", Some("qhm")) => {
            let t = TsoParams::new(
                need(a.h, "h")?,
                need(a.k, "k")?,
                need(a.l, "l")?,
                need(a.m, "m")?,
                need(a.q, "q")?,
                need(a.z, "z")?,
            )?;
            let map = tso_to_qhm(&t)?;
            print_qhm(&map.params);
            println!("g0_scale={}", map.g0_scale);
        }
        ("qhm", Some("tso")) => {
            let t = qhm_to_tso(&qhm()?)?;
            println!("h={}\nk={}\nl={}\nm={}\nq={}\nz={}", t.h, t.k, t.l, t.m, t.q, t.z);
        }
        ("qhm", Some("aggmo")) => {
            let e = extended_aggmo_from_qhm(&qhm()?)?;
            println!("betas={}\ngammas={}", join(&e.betas), join(&e.gammas));
        }
        ("aggmo-lr", None) => {
            let betas = a.betas.as_deref().ok_or_else(|| usage("missing --betas"))?;
            let betas: Vec<f64> = parse_list("betas", betas)?;
            println!("effective_lr={}", aggmo_effective_lr(need(a.gamma, "gamma")?, &betas)?);
        }
        ("unnormalized-lr", None) => {
            println!(
                "lr={}",
                unnormalized_lr_convert(need(a.alpha, "alpha")?, need(a.beta, "beta")?)?
            );
        }
        ("nag-xi", None) => {
            let kappa = need(a.kappa, "kappa")?;
            let r = nag_recovery_xi(kappa, need(a.eps, "eps")?);
            println!("xi={}\nfeasible={}", r.xi, r.feasible);
            if !r.feasible {
                return Err(qhkit::Error::Infeasible {
                    constraint: format!("xi <= sqrt(kappa) (xi = {}, sqrt(kappa) = {})", r.xi, kappa.sqrt()),
                }
                .into());
            }
        }
        (from, to) => {
            return Err(usage(format!(
                "unknown conversion `{from}{}`",
                to.map(|t| format!(" {t}")).unwrap_or_default()
            )))
        }
    }
    Ok(EXIT_OK)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn cmd_bound(cli: &Cli, cfg: &Config, a: &crate::BoundArgs) -> Result<u8> {
    let horizon = match a.t {
        Some(t) => Horizon::Steps(t),
        None => Horizon::Infinite,
    };
    let p = BoundParams::new(a.nu1, a.nu2, a.beta1, a.beta2, horizon)?;
    if a.sweep_nu2 {
        let curve = bound_curve(a.nu1, a.beta1, a.beta2, &default_nu2_grid())?;
        let mut out = open_output(cli, cfg)?;
        writeln!(out, "nu2,bound")?;
        for (nu2, b) in curve {
            writeln!(out, "{nu2},{b}")?;
        }
        out.flush()?;
    } else {
        println!("bound={}", adam_update_bound(&p));
        println!("claimed={}", kingma_claimed_bound(a.beta1, a.beta2));
    }
    Ok(EXIT_OK)
}

fn cmd_variance(cli: &Cli, cfg: &Config, nu: f64, beta: f64, n: usize) -> Result<u8> {
    let r = variance_check(nu, beta, n, seed(cli, cfg)?)?;
    println!(
        "empirical={}\nrho={}\nrelative_error={}",
        r.empirical, r.rho, r.relative_error
    );
    println!("result={}", if r.pass { "pass" } else { "fail" });
    Ok(if r.pass { EXIT_OK } else { EXIT_FAILED_CHECK })
}

/// Default problem for equivalence checks: a 10-dimensional noisy quadratic.
fn oracle_problem() -> Result<ProblemSpec> {
    let eig: Vec<f64> = (0..10).map(|i| 0.1 * 100f64.powf(i as f64 / 9.0)).collect();
    let p = QuadraticProblem::new(eig, Vector::filled(10, 0.5)?, NoiseModel::additive(0.1)?)?;
    Ok(ProblemSpec::Quadratic(p))
}

fn cmd_oracle_check(cli: &Cli, cfg: &Config, a: &OracleArgs) -> Result<u8> {
    let other = match (a.a.as_str(), a.b.as_str()) {
        ("qhm", other) | (other, "qhm") => other,
        _ => return Err(usage("oracle-check compares qhm against another family")),
    };
    let pair = oracle_pair(other, a.alpha, a.nu, a.beta).map_err(|e| match e {
        qhkit::Error::InvalidSpec(m) => usage(m),
        e => e.into(),
    })?;
    let problem = if cfg.str("problem.kind").is_some() {
        problem_from(cfg)?
    } else {
        oracle_problem()?
    };
    let report =
        check_equivalence(&pair.a, &pair.b, &problem, a.steps, seed(cli, cfg)?).context("equivalence run failed")?;
    if cli.out.is_some() || cfg.str("output.path").is_some() {
        let mut out = open_output(cli, cfg)?;
        writeln!(out, "step,deviation")?;
        for (i, d) in report.deviations.iter().enumerate() {
            writeln!(out, "{i},{d}")?;
        }
        out.flush()?;
    }
    println!(
        "max_deviation={}\nmax_relative_deviation={}",
        report.max_deviation, report.max_relative_deviation
    );
    let verdict = match (report.pass, pair.expect_equal) {
        (true, true) => "pass",
        (false, false) => "fail (expected)",
        (true, false) => "pass (unexpected)",
        (false, true) => "fail",
    };
    println!("result={verdict}");
    if report.pass == pair.expect_equal {
        Ok(EXIT_OK)
    } else {
        Err(Coded {
            code: EXIT_FAILED_CHECK,
            message: format!("qhm/{other}: {verdict}"),
        }
        .into())
    }
}
