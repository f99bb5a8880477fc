//! Experiment drivers: single runs, grid sweeps, trajectory-equivalence
//! checks, variance estimation and bound curves.
//!
//! Everything here is deterministic given its seed. Sweeps run cells on a
//! rayon pool but each cell owns its generator and results are returned in
//! grid order, so output does not depend on the number of workers.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::analysis::nu2_bound_curve;
use crate::conversions::{
    accsgd_to_qhm, extended_aggmo_from_qhm, qhm_to_accsgd, qhm_to_pid, qhm_to_snv, qhm_to_tso, snv_to_qhm,
};
use crate::discounting::{estimate_variance_ratio, rho, DiscountFunction};
use crate::error::{Error, Result};
use crate::optimizers::{
    AccSgd, AccSgdParams, Adam, AggMo, AnPid, AnPidParams, Momentum, Nag, Optimizer, Pid, PidGains, QhAdam,
    QhAdamParams, Qhm, QhmParams, Sgd, Snv, SnvParams, Tso, TsoParams,
};
use crate::problems::{LeastSquaresProblem, LogisticProblem, LogisticSpec, Problem, QuadraticProblem};
use crate::rng::SeededRng;
use crate::schedule::LrSchedule;
use crate::trajectory::TrajectoryRecord;
use crate::vector::RealVector;

type Vector = RealVector<f64>;

/// Parameter norm above which a run counts as exploded.
pub const EXPLOSION_NORM: f64 = 1e12;
/// Maximum per-coordinate deviation for two trajectories to count as equal.
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-8;
/// Relative error allowed between an empirical variance ratio and `ρ`.
pub const VARIANCE_TOLERANCE: f64 = 0.05;

pub const DEFAULT_NU_GRID: [f64; 15] = [
    0.0, 0.25, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.998, 0.999, 0.9995, 1.0,
];
pub const DEFAULT_BETA_GRID: [f64; 14] = [
    0.0, 0.25, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.998, 0.999, 0.9995,
];
pub const DEFAULT_CELL: (f64, f64) = (0.7, 0.999);
pub const DEFAULT_SWEEP_STEPS: u64 = 2700;

/// A fully parameterized optimizer.
///
/// α-parameterized families carry their step size; gain-parameterized
/// families run at a native rate of 1 (see [`OptimizerSpec::native_lr`]).
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerSpec {
    Sgd {
        alpha: f64,
    },
    Momentum {
        alpha: f64,
        beta: f64,
    },
    Nag {
        alpha: f64,
        beta: f64,
    },
    Qhm {
        alpha: f64,
        nu: f64,
        beta: f64,
    },
    Adam {
        alpha: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
    QhAdam {
        alpha: f64,
        nu1: f64,
        nu2: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
    Pid {
        kp: f64,
        ki: f64,
        kd: f64,
        beta: f64,
    },
    AnPid {
        r: f64,
        kd: f64,
        beta: f64,
    },
    Snv {
        gamma: f64,
        beta1: f64,
        beta2: f64,
    },
    AccSgd {
        delta: f64,
        kappa: f64,
        xi: f64,
        eps: f64,
    },
    AggMo {
        gamma: f64,
        betas: Vec<f64>,
    },
    ExtendedAggMo {
        betas: Vec<f64>,
        gammas: Vec<f64>,
    },
    Tso {
        h: f64,
        k: f64,
        l: f64,
        m: f64,
        q: f64,
        z: f64,
    },
}

impl OptimizerSpec {
    pub fn family(&self) -> &'static str {
        match self {
            Self::Sgd { .. } => "sgd",
            Self::Momentum { .. } => "momentum",
            Self::Nag { .. } => "nag",
            Self::Qhm { .. } => "qhm",
            Self::Adam { .. } => "adam",
            Self::QhAdam { .. } => "qhadam",
            Self::Pid { .. } => "pid",
            Self::AnPid { .. } => "anpid",
            Self::Snv { .. } => "snv",
            Self::AccSgd { .. } => "accsgd",
            Self::AggMo { .. } => "aggmo",
            Self::ExtendedAggMo { .. } => "aggmo-extended",
            Self::Tso { .. } => "tso",
        }
    }

    /// Per-step rate before any schedule multiplier.
    pub fn native_lr(&self) -> f64 {
        match *self {
            Self::Sgd { alpha }
            | Self::Momentum { alpha, .. }
            | Self::Nag { alpha, .. }
            | Self::Qhm { alpha, .. }
            | Self::Adam { alpha, .. }
            | Self::QhAdam { alpha, .. } => alpha,
            _ => 1.0,
        }
    }

    /// Builds the optimizer with its conventional initial state at `theta0`.
    pub fn build(&self, theta0: &Vector) -> Result<Box<dyn Optimizer<f64>>> {
        let dim = theta0.dim();
        let lr = self.native_lr();
        if !(lr.is_finite() && lr > 0.0) {
            return Err(Error::param("alpha", format!("{lr} must be finite and > 0")));
        }
        Ok(match self {
            Self::Sgd { .. } => Box::new(Sgd::new(dim)),
            Self::Momentum { beta, .. } => Box::new(Momentum::new(*beta, dim)?),
            Self::Nag { beta, .. } => Box::new(Nag::new(*beta, dim)?),
            Self::Qhm { alpha, nu, beta } => Box::new(Qhm::new(QhmParams::new(*alpha, *nu, *beta)?, dim)),
            Self::Adam { beta1, beta2, eps, .. } => Box::new(Adam::new(*beta1, *beta2, *eps, dim)?),
            Self::QhAdam {
                alpha,
                nu1,
                nu2,
                beta1,
                beta2,
                eps,
            } => Box::new(QhAdam::new(
                QhAdamParams::new(*alpha, *eps, *beta1, *beta2, *nu1, *nu2)?,
                dim,
            )),
            Self::Pid { kp, ki, kd, beta } => Box::new(Pid::new(PidGains::new(*kp, *ki, *kd, *beta)?, theta0.clone())),
            Self::AnPid { r, kd, beta } => Box::new(AnPid::new(AnPidParams::new(*r, *kd, *beta)?, dim)),
            Self::Snv { gamma, beta1, beta2 } => {
                Box::new(Snv::new(SnvParams::new(*gamma, *beta1, *beta2)?, theta0.clone()))
            }
            Self::AccSgd { delta, kappa, xi, eps } => Box::new(AccSgd::new(
                AccSgdParams::new(*delta, *kappa, *xi, *eps)?,
                theta0.clone(),
            )),
            Self::AggMo { gamma, betas } => Box::new(AggMo::standard(*gamma, betas.clone(), dim)?),
            Self::ExtendedAggMo { betas, gammas } => Box::new(AggMo::extended(betas.clone(), gammas.clone(), dim)?),
            Self::Tso { h, k, l, m, q, z } => {
                Box::new(Tso::new(TsoParams::new(*h, *k, *l, *m, *q, *z)?, Vector::zeros(dim)))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Quadratic(QuadraticProblem),
    LeastSquares(LeastSquaresProblem),
    Logistic(LogisticProblem),
}

impl ProblemSpec {
    pub fn logistic(spec: LogisticSpec) -> Result<Self> {
        Ok(Self::Logistic(LogisticProblem::new(spec)?))
    }

    pub fn problem(&self) -> &dyn Problem {
        match self {
            Self::Quadratic(p) => p,
            Self::LeastSquares(p) => p,
            Self::Logistic(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub optimizer: OptimizerSpec,
    pub seed: u64,
    /// Ordered by step; empty when recording is off.
    pub records: Vec<TrajectoryRecord>,
    /// Full objective at the last iterate (`NaN` if the run exploded).
    pub final_loss: f64,
    /// Smallest full objective seen at the evaluation checkpoints.
    pub best_loss: f64,
    /// First step whose loss, gradient or iterate was nonfinite or whose
    /// iterate norm exceeded [`EXPLOSION_NORM`].
    pub exploded_at: Option<u64>,
    pub final_theta: Vector,
    pub wall_time: Duration,
}

impl RunResult {
    pub fn exploded(&self) -> bool {
        self.exploded_at.is_some()
    }
}

/// Options for [`run_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub steps: u64,
    pub seed: u64,
    /// Keep every n-th step record (`None` keeps none).
    pub record_every: Option<u64>,
    /// Number of evenly spaced full-objective evaluations feeding `best_loss`.
    pub checkpoints: u64,
}

impl RunOptions {
    pub fn new(steps: u64, seed: u64) -> Self {
        Self {
            steps,
            seed,
            record_every: Some(1),
            checkpoints: 30,
        }
    }
}

/// Runs one optimizer, recording every step.
pub fn run_single(
    optimizer: &OptimizerSpec,
    problem: &ProblemSpec,
    schedule: &LrSchedule,
    steps: u64,
    seed: u64,
) -> Result<RunResult> {
    run_with(optimizer, problem, schedule, RunOptions::new(steps, seed))
}

fn is_explosion(e: &Error) -> bool {
    matches!(e, Error::NonFinite { .. })
}

/// Runs one optimizer. The step-`s` rate is `native_lr · schedule.lr(s)`;
/// each record holds the minibatch loss at the iterate the step started from
/// and the norms of the new iterate and of the update.
pub fn run_with(
    optimizer: &OptimizerSpec,
    problem: &ProblemSpec,
    schedule: &LrSchedule,
    opts: RunOptions,
) -> Result<RunResult> {
    if opts.steps == 0 {
        return Err(Error::param("steps", "must be >= 1"));
    }
    if opts.record_every == Some(0) {
        return Err(Error::param("record_every", "must be >= 1"));
    }
    let started = Instant::now();
    let problem = problem.problem();
    let mut theta = problem.initial_point();
    let mut opt = optimizer.build(&theta)?;
    let mut rng = SeededRng::new(opts.seed);
    let native = optimizer.native_lr();
    let eval_every = (opts.steps / opts.checkpoints.max(1)).max(1);

    let mut records = Vec::new();
    let mut best = problem.eval_loss(&theta)?;
    let mut exploded_at = None;

    for step in 0..opts.steps {
        let lr = native * schedule.lr(step);
        let (loss, grad) = match problem.loss_grad(&theta, &mut rng) {
            Ok(v) => v,
            Err(e) if is_explosion(&e) => {
                exploded_at = Some(step);
                break;
            }
            Err(e) => return Err(e),
        };
        if !loss.is_finite() {
            exploded_at = Some(step);
            break;
        }
        let next = match opt.step(&theta, &grad, lr) {
            Ok(v) => v,
            Err(e) if is_explosion(&e) => {
                exploded_at = Some(step);
                break;
            }
            Err(e) => return Err(e),
        };
        let param_norm = next.norm();
        let update_norm = next.sub(&theta)?.norm();
        if !(param_norm.is_finite() && update_norm.is_finite()) || param_norm > EXPLOSION_NORM {
            exploded_at = Some(step);
            break;
        }
        if let Some(every) = opts.record_every {
            if step % every == 0 {
                records.push(TrajectoryRecord {
                    step,
                    lr,
                    loss,
                    param_norm,
                    update_norm,
                });
            }
        }
        theta = next;
        if (step + 1) % eval_every == 0 || step + 1 == opts.steps {
            let full = problem.eval_loss(&theta)?;
            if !full.is_finite() {
                exploded_at = Some(step);
                break;
            }
            best = best.min(full);
        }
    }

    let final_loss = if exploded_at.is_some() {
        f64::NAN
    } else {
        problem.eval_loss(&theta)?
    };
    Ok(RunResult {
        optimizer: optimizer.clone(),
        seed: opts.seed,
        records,
        final_loss,
        best_loss: best,
        exploded_at,
        final_theta: theta,
        wall_time: started.elapsed(),
    })
}

/// Which family a sweep varies over `(ν, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepFamily {
    /// QHM with step size `alpha`.
    Qhm { alpha: f64 },
    /// QHAdam sweeping `(ν₁, β₁)` with the other constants fixed.
    QhAdam { alpha: f64, eps: f64, nu2: f64, beta2: f64 },
}

impl SweepFamily {
    pub fn qhm_default() -> Self {
        Self::Qhm { alpha: 1.0 }
    }

    pub fn qhadam_default() -> Self {
        Self::QhAdam {
            alpha: 1e-3,
            eps: 1e-8,
            nu2: 1.0,
            beta2: 0.999,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Qhm { .. } => "qhm",
            Self::QhAdam { .. } => "qhadam",
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            Self::Qhm { alpha } | Self::QhAdam { alpha, .. } => alpha,
        }
    }

    pub fn cell(&self, nu: f64, beta: f64) -> OptimizerSpec {
        match *self {
            Self::Qhm { alpha } => OptimizerSpec::Qhm { alpha, nu, beta },
            Self::QhAdam { alpha, eps, nu2, beta2 } => OptimizerSpec::QhAdam {
                alpha,
                nu1: nu,
                nu2,
                beta1: beta,
                beta2,
                eps,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub family: SweepFamily,
    pub nu_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub steps: u64,
    pub schedule: LrSchedule,
    pub problem: ProblemSpec,
}

impl SweepSpec {
    /// Full default grids, 3 seeds, 2700 steps, a schedule multiplier of 1
    /// decayed 10× every 900 steps, on the default logistic problem.
    pub fn default_for(family: SweepFamily) -> Result<Self> {
        Ok(Self {
            family,
            nu_grid: DEFAULT_NU_GRID.to_vec(),
            beta_grid: DEFAULT_BETA_GRID.to_vec(),
            seeds: vec![0, 1, 2],
            steps: DEFAULT_SWEEP_STEPS,
            schedule: default_sweep_schedule()?,
            problem: ProblemSpec::logistic(LogisticSpec::default())?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("nu_grid", &self.nu_grid), ("beta_grid", &self.beta_grid)] {
            if grid.is_empty() {
                return Err(Error::Empty { what: name });
            }
            if !grid.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidSpec(format!("{name} must be strictly increasing")));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::Empty { what: "seeds" });
        }
        if !self.seeds.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpec("seeds must be strictly increasing".into()));
        }
        if self.steps == 0 {
            return Err(Error::param("steps", "must be >= 1"));
        }
        let probe = self.problem.problem().initial_point();
        for &nu in &self.nu_grid {
            for &beta in &self.beta_grid {
                self.family.cell(nu, beta).build(&probe)?;
            }
        }
        Ok(())
    }

    /// Cells in output order: ν ascending, then β, then seed.
    pub fn cells(&self) -> Vec<(f64, f64, u64)> {
        let mut out = Vec::with_capacity(self.nu_grid.len() * self.beta_grid.len() * self.seeds.len());
        for &nu in &self.nu_grid {
            for &beta in &self.beta_grid {
                for &seed in &self.seeds {
                    out.push((nu, beta, seed));
                }
            }
        }
        out
    }
}

pub fn default_sweep_schedule() -> Result<LrSchedule> {
    LrSchedule::new(1.0, 0, 900, 0.1)
}

/// One sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub optimizer: &'static str,
    pub nu: f64,
    pub beta: f64,
    pub alpha: f64,
    pub seed: u64,
    pub final_loss: f64,
    pub best_loss: f64,
    pub exploded: bool,
}

/// Runs every `(ν, β, seed)` cell on `jobs` worker threads.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    if jobs == 0 {
        return Err(Error::param("jobs", "must be >= 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    let cells = spec.cells();
    let run_cell = |&(nu, beta, seed): &(f64, f64, u64)| -> Result<SweepRow> {
        let opt = spec.family.cell(nu, beta);
        let opts = RunOptions {
            record_every: None,
            ..RunOptions::new(spec.steps, seed)
        };
        let r = run_with(&opt, &spec.problem, &spec.schedule, opts)?;
        Ok(SweepRow {
            optimizer: spec.family.name(),
            nu,
            beta,
            alpha: spec.family.alpha(),
            seed,
            final_loss: r.final_loss,
            best_loss: r.best_loss,
            exploded: r.exploded(),
        })
    };
    pool.install(|| cells.par_iter().map(run_cell).collect())
}

/// Median final loss of one `(ν, β)` cell across seeds. Exploded seeds
/// count as `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub nu: f64,
    pub beta: f64,
    pub median_final_loss: f64,
    pub explosions: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub cells: Vec<CellSummary>,
    pub best: CellSummary,
    /// The `(0.7, 0.999)` cell, when present in the grid.
    pub default_cell: Option<CellSummary>,
    /// Best cell on the `ν = β` diagonal (NAG), when the grids share values.
    pub best_nag: Option<CellSummary>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

pub fn summarize_sweep(rows: &[SweepRow]) -> Result<SweepSummary> {
    let mut cells: Vec<CellSummary> = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let (nu, beta) = (rows[i].nu, rows[i].beta);
        let mut j = i;
        let mut losses = Vec::new();
        let mut explosions = 0;
        while j < rows.len() && rows[j].nu == nu && rows[j].beta == beta {
            if rows[j].exploded || !rows[j].final_loss.is_finite() {
                explosions += 1;
                losses.push(f64::INFINITY);
            } else {
                losses.push(rows[j].final_loss);
            }
            j += 1;
        }
        cells.push(CellSummary {
            nu,
            beta,
            median_final_loss: median(losses),
            explosions,
        });
        i = j;
    }
    let pick_best = |it: &mut dyn Iterator<Item = &CellSummary>| -> Option<CellSummary> {
        it.fold(None, |acc: Option<CellSummary>, c| match acc {
            Some(b) if b.median_final_loss <= c.median_final_loss => Some(b),
            _ => Some(*c),
        })
    };
    let best = pick_best(&mut cells.iter()).ok_or(Error::Empty { what: "sweep rows" })?;
    let best_nag = pick_best(&mut cells.iter().filter(|c| c.nu == c.beta));
    let default_cell = cells
        .iter()
        .find(|c| c.nu == DEFAULT_CELL.0 && c.beta == DEFAULT_CELL.1)
        .copied();
    Ok(SweepSummary {
        cells,
        best,
        default_cell,
        best_nag,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    /// `|θ_A - θ_B|_∞` after each step.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    /// Max over steps of `|θ_A - θ_B|_∞ / max(1, |θ_A|_∞)`.
    pub max_relative_deviation: f64,
    pub steps: u64,
    pub pass: bool,
}

/// Runs two optimizers in lockstep on the same gradient noise, each at its
/// native rate, and compares iterates after every step.
pub fn check_equivalence(
    a: &OptimizerSpec,
    b: &OptimizerSpec,
    problem: &ProblemSpec,
    steps: u64,
    seed: u64,
) -> Result<EquivalenceReport> {
    if steps == 0 {
        return Err(Error::param("steps", "must be >= 1"));
    }
    let problem = problem.problem();
    let theta0 = problem.initial_point();
    let (mut opt_a, mut opt_b) = (a.build(&theta0)?, b.build(&theta0)?);
    let (lr_a, lr_b) = (a.native_lr(), b.native_lr());
    let (mut rng_a, mut rng_b) = (SeededRng::new(seed), SeededRng::new(seed));
    let (mut ta, mut tb) = (theta0.clone(), theta0);
    let mut max_dev = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut deviations = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        let (_, ga) = problem.loss_grad(&ta, &mut rng_a)?;
        let (_, gb) = problem.loss_grad(&tb, &mut rng_b)?;
        ta = opt_a.step(&ta, &ga, lr_a)?;
        tb = opt_b.step(&tb, &gb, lr_b)?;
        let dev = ta.max_abs_diff(&tb)?;
        let scale = ta.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        deviations.push(dev);
        max_dev = max_dev.max(dev);
        max_rel = max_rel.max(dev / scale);
    }
    Ok(EquivalenceReport {
        deviations,
        max_deviation: max_dev,
        max_relative_deviation: max_rel,
        steps,
        pass: max_dev < EQUIVALENCE_TOLERANCE,
    })
}

/// Named optimizer pairs for equivalence checks, built from one QHM
/// parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePair {
    pub a: OptimizerSpec,
    pub b: OptimizerSpec,
    /// Whether the pair is expected to be trajectory-equivalent.
    pub expect_equal: bool,
}

pub const ORACLE_PAIRS: [&str; 9] = [
    "sgd",
    "momentum",
    "nag",
    "pid",
    "snv",
    "accsgd",
    "aggmo",
    "tso",
    "momentum-nubeta",
];

/// `qhm` against the named family. `nu` is ignored for pairs that pin it
/// (`sgd`: 0, `momentum`: 1, `nag`: β).
pub fn oracle_pair(other: &str, alpha: f64, nu: f64, beta: f64) -> Result<OraclePair> {
    let qhm = |nu: f64| OptimizerSpec::Qhm { alpha, nu, beta };
    let p = QhmParams::new(alpha, nu, beta)?;
    let pair = |b: OptimizerSpec, nu: f64| OraclePair {
        a: qhm(nu),
        b,
        expect_equal: true,
    };
    Ok(match other {
        "sgd" => pair(OptimizerSpec::Sgd { alpha }, 0.0),
        "momentum" => pair(OptimizerSpec::Momentum { alpha, beta }, 1.0),
        "nag" => pair(OptimizerSpec::Nag { alpha, beta }, beta),
        "pid" => {
            let g = qhm_to_pid(&p)?;
            pair(
                OptimizerSpec::Pid {
                    kp: g.kp,
                    ki: g.ki,
                    kd: g.kd,
                    beta: g.beta,
                },
                nu,
            )
        }
        "snv" => {
            let s = qhm_to_snv(&p)?;
            pair(
                OptimizerSpec::Snv {
                    gamma: s.gamma,
                    beta1: s.beta1,
                    beta2: s.beta2,
                },
                nu,
            )
        }
        "accsgd" => {
            let s = qhm_to_accsgd(&p, accsgd_eps_for(&p)?)?;
            pair(
                OptimizerSpec::AccSgd {
                    delta: s.delta,
                    kappa: s.kappa,
                    xi: s.xi,
                    eps: s.eps,
                },
                nu,
            )
        }
        "aggmo" => {
            let e = extended_aggmo_from_qhm(&p)?;
            pair(
                OptimizerSpec::ExtendedAggMo {
                    betas: e.betas,
                    gammas: e.gammas,
                },
                nu,
            )
        }
        "tso" => {
            let t = qhm_to_tso(&p)?;
            pair(
                OptimizerSpec::Tso {
                    h: t.h,
                    k: t.k,
                    l: t.l,
                    m: t.m,
                    q: t.q,
                    z: t.z,
                },
                nu,
            )
        }
        "momentum-nubeta" => OraclePair {
            a: qhm(nu),
            b: OptimizerSpec::Momentum { alpha, beta: nu * beta },
            expect_equal: false,
        },
        _ => {
            return Err(Error::InvalidSpec(format!(
                "unknown oracle pair qhm/{other}; expected one of {}",
                ORACLE_PAIRS.join(", ")
            )))
        }
    })
}

/// An `ε` for which the QHM → AccSGD mapping is feasible: the median of the
/// feasible values on the grid `0.01, 0.02, …, 0.99`.
pub fn accsgd_eps_for(p: &QhmParams<f64>) -> Result<f64> {
    let feasible: Vec<f64> = (1..100)
        .map(|i| i as f64 / 100.0)
        .filter(|&eps| qhm_to_accsgd(p, eps).is_ok())
        .collect();
    if feasible.is_empty() {
        return Err(Error::infeasible(format!(
            "no eps in (0, 1) maps qhm(alpha = {}, nu = {}, beta = {}) to accsgd",
            p.alpha, p.nu, p.beta
        )));
    }
    Ok(feasible[feasible.len() / 2])
}

/// Round trip helpers used by the acceptance checks: QHM through SNV or
/// AccSGD and back.
pub fn snv_round_trip(p: &QhmParams<f64>) -> Result<QhmParams<f64>> {
    let s = qhm_to_snv(p)?;
    snv_to_qhm(s.gamma, s.beta1, s.beta2)
}

pub fn accsgd_round_trip(p: &QhmParams<f64>, eps: f64) -> Result<QhmParams<f64>> {
    let s = qhm_to_accsgd(p, eps)?;
    accsgd_to_qhm(s.delta, s.kappa, s.xi, s.eps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub empirical: f64,
    pub rho: f64,
    pub relative_error: f64,
    pub pass: bool,
}

/// Empirical variance ratio of a QHWMA of i.i.d. draws against `ρ(ν, β)`.
pub fn variance_check(nu: f64, beta: f64, samples: usize, seed: u64) -> Result<VarianceReport> {
    let f = DiscountFunction::quasi_hyperbolic(nu, beta)?;
    let r = rho(nu, beta)?;
    let mut rng = SeededRng::new(seed);
    let empirical = estimate_variance_ratio(&f, samples, &mut rng)?;
    let relative_error = (empirical - r).abs() / r;
    Ok(VarianceReport {
        empirical,
        rho: r,
        relative_error,
        pass: relative_error <= VARIANCE_TOLERANCE,
    })
}

/// `ν₂ = 0.01, 0.02, …, 1`.
pub fn default_nu2_grid() -> Vec<f64> {
    (1..=100).map(|i| i as f64 / 100.0).collect()
}

/// Limit bound over `ν₂`.
pub fn bound_curve(nu1: f64, beta1: f64, beta2: f64, nu2_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    nu2_bound_curve(nu1, beta1, beta2, nu2_grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> ProblemSpec {
        ProblemSpec::Quadratic(QuadraticProblem::diagonal(vec![1.0, 10.0]).unwrap())
    }

    #[test]
    fn sgd_converges_on_quadratic() {
        let sched = LrSchedule::constant(1.0).unwrap();
        let r = run_single(&OptimizerSpec::Sgd { alpha: 0.05 }, &quad(), &sched, 500, 0).unwrap();
        assert!(!r.exploded());
        assert!(r.final_loss < 1e-8, "{}", r.final_loss);
        assert_eq!(r.records.len(), 500);
        assert!(r.records.windows(2).all(|w| w[0].step < w[1].step));
    }

    #[test]
    fn qhm_default_converges_on_quadratic() {
        let sched = LrSchedule::constant(1.0).unwrap();
        let opt = OptimizerSpec::Qhm {
            alpha: 0.05,
            nu: 0.7,
            beta: 0.999,
        };
        let r = run_single(&opt, &quad(), &sched, 20000, 0).unwrap();
        assert!(r.final_loss < 1e-8, "{}", r.final_loss);
    }

    #[test]
    fn large_step_explodes() {
        let sched = LrSchedule::constant(1.0).unwrap();
        let r = run_single(&OptimizerSpec::Sgd { alpha: 0.25 }, &quad(), &sched, 5000, 0).unwrap();
        let at = r.exploded_at.expect("should explode");
        assert_eq!(r.records.len() as u64, at);
        assert!(r.final_loss.is_nan());
    }

    #[test]
    fn nu_zero_sweep_matches_sgd() {
        let mut spec = SweepSpec::default_for(SweepFamily::Qhm { alpha: 0.5 }).unwrap();
        spec.nu_grid = vec![0.0];
        spec.beta_grid = vec![0.0, 0.5, 0.9];
        spec.seeds = vec![3];
        spec.steps = 60;
        let rows = run_sweep(&spec, 2).unwrap();
        assert_eq!(rows.len(), 3);
        let sgd = run_with(
            &OptimizerSpec::Sgd { alpha: 0.5 },
            &spec.problem,
            &spec.schedule,
            RunOptions {
                record_every: None,
                ..RunOptions::new(60, 3)
            },
        )
        .unwrap();
        for r in &rows {
            assert_eq!(r.final_loss, sgd.final_loss);
        }
    }

    #[test]
    fn sweep_order_and_parallel_invariance() {
        let mut spec = SweepSpec::default_for(SweepFamily::qhm_default()).unwrap();
        spec.nu_grid = vec![0.5, 0.9];
        spec.beta_grid = vec![0.5, 0.9];
        spec.seeds = vec![0, 1];
        spec.steps = 40;
        let one = run_sweep(&spec, 1).unwrap();
        let four = run_sweep(&spec, 4).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.len(), 8);
        let keys: Vec<_> = one.iter().map(|r| (r.nu, r.beta, r.seed)).collect();
        assert_eq!(keys, spec.cells());
        let s = summarize_sweep(&one).unwrap();
        assert_eq!(s.cells.len(), 4);
        assert!(s.default_cell.is_none());
        assert_eq!(s.best_nag.map(|c| c.nu == c.beta), Some(true));
    }

    #[test]
    fn sweep_rejects_bad_specs() {
        let mut spec = SweepSpec::default_for(SweepFamily::qhm_default()).unwrap();
        spec.beta_grid = vec![0.9, 0.5];
        assert!(run_sweep(&spec, 1).is_err());
        spec.beta_grid = vec![1.0];
        assert!(run_sweep(&spec, 1).is_err());
    }

    #[test]
    fn equivalence_examples() {
        let p = quad();
        let pair = oracle_pair("nag", 0.05, 0.0, 0.9).unwrap();
        let r = check_equivalence(&pair.a, &pair.b, &p, 50, 0).unwrap();
        assert!(r.pass && r.max_deviation < 1e-14, "{r:?}");

        let pair = oracle_pair("snv", 0.05, 0.7, 0.9).unwrap();
        assert!(check_equivalence(&pair.a, &pair.b, &p, 50, 0).unwrap().pass);

        let pair = oracle_pair("momentum-nubeta", 0.05, 0.7, 0.999).unwrap();
        let r = check_equivalence(&pair.a, &pair.b, &p, 50, 0).unwrap();
        assert!(!r.pass && r.max_deviation > 1e-3, "{r:?}");

        assert!(oracle_pair("bogus", 0.1, 0.5, 0.5).is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median(vec![1.0, f64::INFINITY, 2.0]), 2.0);
    }
}
