//! Closed-form parameter mappings between QHM and the other optimizer
//! families.
//!
//! Every mapping validates its output against the target family's parameter
//! ranges and reports an [`Error::Infeasible`] naming the violated constraint
//! instead of returning out-of-range values.

use crate::error::{Error, Result};
use crate::optimizers::{AccSgdParams, PidGains, QhmParams, SnvParams, TsoParams};
use crate::scalar::Scalar;

fn check_qhm_image<T: Scalar>(alpha: T, nu: T, beta: T) -> Result<QhmParams<T>> {
    if !(alpha.is_finite() && alpha > T::zero()) {
        return Err(Error::infeasible(format!("alpha > 0 (mapped alpha = {alpha})")));
    }
    if !(nu >= T::zero() && nu <= T::one()) {
        return Err(Error::infeasible(format!("0 <= nu <= 1 (mapped nu = {nu})")));
    }
    if !(beta >= T::zero() && beta < T::one()) {
        return Err(Error::infeasible(format!("0 <= beta < 1 (mapped beta = {beta})")));
    }
    QhmParams::new(alpha, nu, beta)
}

fn require_open_beta<T: Scalar>(name: &'static str, beta: T) -> Result<()> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::param(name, format!("{beta} outside (0, 1)")));
    }
    Ok(())
}

/// PID gains equivalent to QHM:
/// `kP = -ανβ/(1-β)`, `kI = α`, `kD = ανβ²/(1-β)²`.
pub fn qhm_to_pid<T: Scalar>(p: &QhmParams<T>) -> Result<PidGains<T>> {
    if p.beta == T::zero() {
        return Err(Error::Degenerate(
            "beta = 0 gives kP = kD = 0; the kD/kP ratio is undefined (plain SGD: use kI = alpha)".into(),
        ));
    }
    require_open_beta("beta", p.beta)?;
    let QhmParams { alpha, nu, beta } = *p;
    let one = T::one();
    let kp = -alpha * nu * beta / (one - beta);
    let ki = alpha;
    let kd = alpha * nu * beta * beta / ((one - beta) * (one - beta));
    PidGains::new(kp, ki, kd, beta)
}

/// QHM parameters equivalent to PID gains:
/// `α = kI`, `ν = kP²/(kD·kI)`, `β = kD/(kD - kP)`.
pub fn pid_to_qhm<T: Scalar>(kp: T, ki: T, kd: T) -> Result<QhmParams<T>> {
    if ki == T::zero() {
        return Err(Error::infeasible(
            "kI != 0 (P, D and PD controllers are not recoverable)",
        ));
    }
    if kd == T::zero() {
        if kp == T::zero() {
            return Err(Error::Degenerate(format!(
                "pure-I controller: use alpha = {ki}, nu = 0, any beta"
            )));
        }
        return Err(Error::infeasible("kP != 0 = kD is a PI controller, not recoverable"));
    }
    if kd - kp == T::zero() {
        return Err(Error::infeasible("kD - kP != 0 (beta = kD/(kD - kP) undefined)"));
    }
    let alpha = ki;
    let nu = kp * kp / (kd * ki);
    let beta = kd / (kd - kp);
    check_qhm_image(alpha, nu, beta)
}

/// `γ = α(1-β)`, `β₁ = β`, `β₂ = (1-ν)·β/(1-β)`.
pub fn qhm_to_snv<T: Scalar>(p: &QhmParams<T>) -> Result<SnvParams<T>> {
    require_open_beta("beta", p.beta)?;
    let QhmParams { alpha, nu, beta } = *p;
    let one = T::one();
    SnvParams::new(alpha * (one - beta), beta, (one - nu) * beta / (one - beta))
}

/// `α = γ/(1-β₁)`, `ν = 1 - ((1-β₁)/β₁)·β₂`, `β = β₁`.
pub fn snv_to_qhm<T: Scalar>(gamma: T, beta1: T, beta2: T) -> Result<QhmParams<T>> {
    require_open_beta("beta1", beta1)?;
    let one = T::one();
    let alpha = gamma / (one - beta1);
    let nu = one - (one - beta1) / beta1 * beta2;
    check_qhm_image(alpha, nu, beta1)
}

/// `δ = α(1-ν)`, `κ = (β+ε)(εν+1)/((1-ν)(1-β))`, `ξ = (εν+1)/(ε(1-ν))`.
pub fn qhm_to_accsgd<T: Scalar>(p: &QhmParams<T>, eps: T) -> Result<AccSgdParams<T>> {
    let QhmParams { alpha, nu, beta } = *p;
    let one = T::one();
    if nu == one {
        return Err(Error::infeasible("nu < 1 (momentum is not representable as AccSGD)"));
    }
    require_open_beta("beta", beta)?;
    if !(eps > T::zero() && eps < one) {
        return Err(Error::param("eps", format!("{eps} outside (0, 1)")));
    }
    let delta = alpha * (one - nu);
    let kappa = (beta + eps) * (eps * nu + one) / ((one - nu) * (one - beta));
    let xi = (eps * nu + one) / (eps * (one - nu));
    AccSgdParams::new(delta, kappa, xi, eps)
}

/// `α = δε(1+ξ)/(1+ε)`, `ν = (εξ-1)/(ε(1+ξ))`, `β = (κ-ε²ξ)/(κ+εξ)`.
pub fn accsgd_to_qhm<T: Scalar>(delta: T, kappa: T, xi: T, eps: T) -> Result<QhmParams<T>> {
    AccSgdParams::new(delta, kappa, xi, eps)?;
    let one = T::one();
    let alpha = delta * eps * (one + xi) / (one + eps);
    let nu = (eps * xi - one) / (eps * (one + xi));
    let beta = (kappa - eps * eps * xi) / (kappa + eps * xi);
    check_qhm_image(alpha, nu, beta)
}

/// The `ξ` at which AccSGD's unrolled coefficients would coincide with NAG's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NagRecovery<T> {
    pub xi: T,
    /// Whether `ξ ≤ √κ` (the AccSGD constraint) holds.
    pub feasible: bool,
}

/// `ξ = (1/2ε)·(1 - ε + √(4κ + (1-ε)²))`. For every `κ > 1` and `ε ∈ (0,1)`
/// this exceeds `√κ`, so the result is always flagged infeasible.
pub fn nag_recovery_xi<T: Scalar>(kappa: T, eps: T) -> NagRecovery<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let gap = one - eps;
    let xi = (gap + (four * kappa + gap * gap).sqrt()) / (two * eps);
    NagRecovery {
        xi,
        feasible: xi <= kappa.sqrt(),
    }
}

/// QHM parameters that reproduce the An-PID recursion exactly:
/// `α = r/(1-β)`, `ν = 1 + kD(1-β)²/(rβ)`.
///
/// Because that recursion's D term tracks the negated error difference, the
/// image lands at `ν ≥ 1`; the returned parameters are built with
/// [`QhmParams::extended`]. `kD = 0` gives plain momentum (`ν = 1`).
pub fn anpid_to_qhm<T: Scalar>(r: T, kd: T, beta: T) -> Result<QhmParams<T>> {
    if !(r.is_finite() && r > T::zero()) {
        return Err(Error::param("r", format!("{r} must be finite and > 0")));
    }
    if !(kd.is_finite() && kd >= T::zero()) {
        return Err(Error::param("kd", format!("{kd} must be finite and >= 0")));
    }
    require_open_beta("beta", beta)?;
    let one = T::one();
    let alpha = r / (one - beta);
    let nu = one + kd * (one - beta) * (one - beta) / (r * beta);
    QhmParams::extended(alpha, nu, beta)
}

/// QHM image of a two-state optimizer, including the initial momentum buffer
/// as a multiple of the TSO's initial auxiliary buffer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsoMapping<T> {
    pub params: QhmParams<T>,
    /// `g₀ = g0_scale · a₀`.
    pub g0_scale: T,
}

pub const TSO_TOLERANCE: f64 = 1e-9;

/// Maps a two-state optimizer onto QHM when its spectral conditions hold:
/// `ψ = km - hq ≠ 0`, `φ = √((h-q)² + 4km)` real, nonzero and `≤ 1`,
/// `½(h+q+φ) = 1`, `h - q + φ = 0` and `1 - l = ½(h+q-φ)`.
/// Equalities are checked to absolute tolerance [`TSO_TOLERANCE`].
pub fn tso_to_qhm<T: Scalar>(p: &TsoParams<T>) -> Result<TsoMapping<T>> {
    let TsoParams { h, k, l, m, q, z } = *p;
    let tol = T::lit(TSO_TOLERANCE);
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let one = T::one();

    let psi = k * m - h * q;
    let disc = (h - q) * (h - q) + T::lit(4.0) * k * m;
    if disc < T::zero() {
        return Err(Error::infeasible(format!(
            "phi must be real: (h-q)^2 + 4km = {disc} < 0"
        )));
    }
    let phi = disc.sqrt();

    let mut violated = Vec::new();
    if psi.abs() <= tol {
        violated.push("psi = km - hq != 0".to_string());
    }
    if phi <= tol {
        violated.push("phi != 0".to_string());
    }
    if phi > one + tol {
        violated.push(format!("phi <= 1 (phi = {phi})"));
    }
    if (half * (h + q + phi) - one).abs() > tol {
        violated.push(format!("(h+q+phi)/2 = 1 (got {})", half * (h + q + phi)));
    }
    if (h - q + phi).abs() > tol {
        violated.push(format!("h-q+phi = 0 (got {})", h - q + phi));
    }
    if ((one - l) - half * (h + q - phi)).abs() > tol {
        violated.push(format!(
            "1-l = (h+q-phi)/2 (got {} vs {})",
            one - l,
            half * (h + q - phi)
        ));
    }
    if !violated.is_empty() {
        return Err(Error::infeasible(violated.join("; ")));
    }

    let lq_kz = l * q - k * z;
    let lm_hz = l * m - h * z;
    let denom = (h - q - phi) * lm_hz + two * m * lq_kz;
    let beta = half * (h + q - phi);
    let alpha = denom / (two * psi * phi);
    let nu = two * m * lq_kz / denom;
    let g0_scale = -((two - (h + q - phi)) * psi) / ((h + q - phi) * lq_kz);
    let params = check_qhm_image(alpha, nu, beta)?;
    if !g0_scale.is_finite() {
        return Err(Error::infeasible("g0 scale must be finite ((h+q-phi)(lq-kz) != 0)"));
    }
    Ok(TsoMapping { params, g0_scale })
}

/// TSO coefficients of QHM (`a` plays the momentum buffer).
pub fn qhm_to_tso<T: Scalar>(p: &QhmParams<T>) -> Result<TsoParams<T>> {
    let QhmParams { alpha, nu, beta } = *p;
    let one = T::one();
    TsoParams::new(
        beta,
        T::zero(),
        one - beta,
        -alpha * nu * beta,
        one,
        -alpha * (one - nu * beta),
    )
}

/// Effective step size of standard AggMo: `(γ/K)·Σ 1/(1-β_i)`.
pub fn aggmo_effective_lr<T: Scalar>(gamma: T, betas: &[T]) -> Result<T> {
    if betas.is_empty() {
        return Err(Error::Empty { what: "aggmo betas" });
    }
    let mut total = T::zero();
    for &b in betas {
        if !(b >= T::zero() && b < T::one()) {
            return Err(Error::param("beta", format!("{b} outside [0, 1)")));
        }
        total = total + T::one() / (T::one() - b);
    }
    Ok(gamma * total / T::lit(betas.len() as f64))
}

/// Step size for normalized momentum/QHM replacing an unnormalized buffer:
/// `α/(1-β)`.
pub fn unnormalized_lr_convert<T: Scalar>(alpha: T, beta: T) -> Result<T> {
    if !(beta >= T::zero() && beta < T::one()) {
        return Err(Error::param("beta", format!("{beta} outside [0, 1)")));
    }
    Ok(alpha / (T::one() - beta))
}

/// Two-buffer extended AggMo reproducing QHM.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedAggMo<T> {
    pub betas: Vec<T>,
    pub gammas: Vec<T>,
}

/// Buffers `[0, β]` with rates `[2α(1-ν), 2αν(1-β)]`: the undiscounted buffer
/// carries the current gradient and the second buffer, rescaled by `1-β`,
/// is QHM's normalized momentum.
pub fn extended_aggmo_from_qhm<T: Scalar>(p: &QhmParams<T>) -> Result<ExtendedAggMo<T>> {
    let QhmParams { alpha, nu, beta } = QhmParams::new(p.alpha, p.nu, p.beta)?;
    let one = T::one();
    let two = T::lit(2.0);
    Ok(ExtendedAggMo {
        betas: vec![T::zero(), beta],
        gammas: vec![two * alpha * (one - nu), two * alpha * nu * (one - beta)],
    })
}
