//! Linear-operator view of the two-state optimizers, unrolled-update
//! oracles, and the tight (QH)Adam update bound.
//!
//! Each optimizer acting coordinate-wise has a small transition matrix `A`
//! over the state `[buffers…, ∇_t, 0]`; after one application the last slot
//! holds the iterate. The iterate after `t` steps is therefore a fixed linear
//! combination of the initial buffers and the gradient history, with
//! coefficients read off the last row of powers of `A`.

use crate::discounting::powu;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vector::RealVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    Qhm,
    Pid,
    Snv,
    AccSgd,
}

/// An optimizer kind together with the parameters its matrix depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionSpec<T> {
    Qhm { alpha: T, nu: T, beta: T },
    Pid { kp: T, ki: T, kd: T, beta: T },
    Snv { gamma: T, beta1: T, beta2: T },
    AccSgd { delta: T, kappa: T, xi: T, eps: T },
}

impl<T: Scalar> TransitionSpec<T> {
    pub fn kind(&self) -> TransitionKind {
        match self {
            Self::Qhm { .. } => TransitionKind::Qhm,
            Self::Pid { .. } => TransitionKind::Pid,
            Self::Snv { .. } => TransitionKind::Snv,
            Self::AccSgd { .. } => TransitionKind::AccSgd,
        }
    }

    /// Number of internal buffers `b` (the iterate-producing buffers included).
    pub fn buffers(&self) -> usize {
        match self {
            Self::Pid { .. } => 4,
            _ => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, x: T| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, "must be finite"))
            }
        };
        match *self {
            Self::Qhm { alpha, nu, beta } => {
                finite("alpha", alpha)?;
                finite("nu", nu)?;
                if !(beta >= T::zero() && beta < T::one()) {
                    return Err(Error::param("beta", "outside [0, 1)"));
                }
            }
            Self::Pid { kp, ki, kd, beta } => {
                finite("kp", kp)?;
                finite("ki", ki)?;
                finite("kd", kd)?;
                if !(beta > T::zero() && beta < T::one()) {
                    return Err(Error::param("beta", "outside (0, 1)"));
                }
            }
            Self::Snv { gamma, beta1, beta2 } => {
                finite("gamma", gamma)?;
                finite("beta2", beta2)?;
                if !(beta1 > T::zero() && beta1 < T::one()) {
                    return Err(Error::param("beta1", "outside (0, 1)"));
                }
            }
            Self::AccSgd { delta, kappa, xi, eps } => {
                finite("delta", delta)?;
                finite("xi", xi)?;
                if !(kappa.is_finite() && kappa > T::zero()) {
                    return Err(Error::param("kappa", "must be finite and > 0"));
                }
                if !(eps > T::zero() && eps < T::one()) {
                    return Err(Error::param("eps", "outside (0, 1)"));
                }
            }
        }
        Ok(())
    }
}

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T> {
    side: usize,
    entries: Vec<T>,
    kind: TransitionKind,
}

impl<T: Scalar> TransitionMatrix<T> {
    fn from_rows(kind: TransitionKind, rows: Vec<Vec<T>>) -> Result<Self> {
        let side = rows.len();
        let mut entries = Vec::with_capacity(side * side);
        for row in rows {
            debug_assert_eq!(row.len(), side);
            entries.extend(row);
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                what: "transition matrix",
            });
        }
        Ok(Self { side, entries, kind })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn kind(&self) -> TransitionKind {
        self.kind
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.side + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.entries[row * self.side..(row + 1) * self.side]
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.side;
        let mut entries = vec![T::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] = entries[i * n + j] + a * other.get(k, j);
                }
            }
        }
        Self {
            side: n,
            entries,
            kind: self.kind,
        }
    }

    /// `A^n` by repeated multiplication, `n ≥ 1`.
    pub fn power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "power must be >= 1"));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.mul(self);
        }
        if acc.entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { what: "matrix power" });
        }
        Ok(acc)
    }
}

/// Per-coordinate transition matrix of the given optimizer.
pub fn build_transition<T: Scalar>(spec: &TransitionSpec<T>) -> Result<TransitionMatrix<T>> {
    spec.validate()?;
    let z = T::zero();
    let one = T::one();
    let rows = match *spec {
        // state [g, θ, ∇, 0] → [g', θ', 0, θ]
        TransitionSpec::Qhm { alpha, nu, beta } => vec![
            vec![beta, z, one - beta, z],
            vec![-alpha * nu * beta, one, -alpha * (one - nu * beta), z],
            vec![z, z, z, z],
            vec![z, one, z, z],
        ],
        // state [e_{t-1}, w_{t-1}, v_{t-1}, θ₀, ∇_t, 0] → [e_t, w_t, v_t, θ₀, 0, θ_t]
        TransitionSpec::Pid { kp, ki, kd, beta } => vec![
            vec![z, z, z, z, -one, z],
            vec![z, one, z, z, -one, z],
            vec![-(one - beta), z, beta, z, -(one - beta), z],
            vec![z, z, z, one, z, z],
            vec![z, z, z, z, z, z],
            vec![kp, ki, kd, one, z, z],
        ],
        // state [ξ_t, ξ_{t-1}, ∇, 0] → [ξ_{t+1}, ξ_t, 0, θ_t]
        TransitionSpec::Snv { gamma, beta1, beta2 } => vec![
            vec![one + beta1, -beta1, -gamma, z],
            vec![one, z, z, z],
            vec![z, z, z, z],
            vec![one + beta2, -beta2, z, z],
        ],
        // state [w̄, w, ∇, 0] → [w̄', w', 0, w]
        TransitionSpec::AccSgd { delta, kappa, xi, eps } => {
            let mix = eps * eps * xi / kappa;
            let denom = kappa + eps * xi;
            vec![
                vec![one - mix, mix, -delta * eps * xi, z],
                vec![
                    eps * xi / denom * (one - mix),
                    (kappa + eps * eps * eps * xi * xi / kappa) / denom,
                    -delta * (kappa + eps * eps * xi * xi) / denom,
                    z,
                ],
                vec![z, z, z, z],
                vec![z, one, z, z],
            ]
        }
    };
    TransitionMatrix::from_rows(spec.kind(), rows)
}

/// Last row of `A^{n+1}`, by repeated multiplication.
pub fn matrix_power_last_row<T: Scalar>(a: &TransitionMatrix<T>, n: usize) -> Result<Vec<T>> {
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    let p = a.power(n + 1)?;
    Ok(p.row(p.side() - 1).to_vec())
}

/// Closed form of the last row of `A^{n+1}` for `n ≥ 1`.
pub fn closed_form_last_row<T: Scalar>(spec: &TransitionSpec<T>, n: usize) -> Result<Vec<T>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::param("n", "must be >= 1"));
    }
    let z = T::zero();
    let one = T::one();
    let row = match *spec {
        TransitionSpec::Qhm { alpha, nu, beta } => {
            let bn = powu(beta, n);
            // Σ_{j=0}^{n-1} β^j, written without dividing by 1-β so β = 0 is fine.
            let geo = (0..n).fold(z, |acc, j| acc + powu(beta, j));
            vec![-alpha * nu * beta * geo, one, -alpha * (one - nu * bn), z]
        }
        TransitionSpec::Pid { kp, ki, kd, beta } => {
            let grad = if n == 1 {
                -(kp + ki + (one - beta) * kd)
            } else {
                -(ki - (one - beta) * (one - beta) * powu(beta, n - 2) * kd)
            };
            vec![
                -kd * powu(beta, n - 1) * (one - beta),
                ki,
                kd * powu(beta, n),
                one,
                grad,
                z,
            ]
        }
        TransitionSpec::Snv { gamma, beta1, beta2 } => {
            let chi = powu(beta1, n) * (beta2 * (one - beta1) - beta1);
            let scale = one / (one - beta1);
            vec![
                scale * (one + chi),
                -scale * (beta1 + chi),
                -gamma / (beta1 * (one - beta1)) * (beta1 + chi),
                z,
            ]
        }
        TransitionSpec::AccSgd { delta, kappa, xi, eps } => {
            let lead = kappa - eps * eps * xi;
            let chi_n = powu(lead / (kappa + eps * xi), n);
            let denom = kappa * (one + eps);
            vec![
                (lead - lead * chi_n) / denom,
                (eps * (kappa + eps * xi) + lead * chi_n) / denom,
                -delta * (eps * (one + xi) - (eps * xi - one) * chi_n) / (one + eps),
                z,
            ]
        }
    };
    Ok(row)
}

/// How the non-iterate buffers start.
#[derive(Debug, Clone, PartialEq)]
pub enum BufferInit<T> {
    /// The usual start: zero momentum (QHM), zero P/I/D terms (PID), and
    /// both iterates at `θ₀` (SNV, AccSGD).
    Standard,
    /// Explicit values for the buffers other than `θ₀`: `[g₀]` for QHM,
    /// `[e₋₁, w₋₁, v₋₁]` for PID, `[ξ₋₁]` for SNV, `[w̄₀]` for AccSGD.
    Explicit(Vec<RealVector<T>>),
}

fn initial_state<T: Scalar>(
    spec: &TransitionSpec<T>,
    theta0: &RealVector<T>,
    init: &BufferInit<T>,
) -> Result<Vec<RealVector<T>>> {
    let dim = theta0.dim();
    let zero = RealVector::zeros(dim);
    let extra_len = match spec.kind() {
        TransitionKind::Pid => 3,
        _ => 1,
    };
    let extras = match init {
        BufferInit::Standard => match spec.kind() {
            TransitionKind::Qhm => vec![zero],
            TransitionKind::Pid => vec![zero.clone(), zero.clone(), zero],
            TransitionKind::Snv | TransitionKind::AccSgd => vec![theta0.clone()],
        },
        BufferInit::Explicit(v) => {
            if v.len() != extra_len {
                return Err(Error::InvalidSpec(format!(
                    "{:?} needs {extra_len} initial buffers, got {}",
                    spec.kind(),
                    v.len()
                )));
            }
            for b in v {
                theta0.check_dim(b)?;
            }
            v.clone()
        }
    };
    Ok(match spec.kind() {
        TransitionKind::Qhm => vec![extras[0].clone(), theta0.clone()],
        TransitionKind::Pid => {
            let mut s = extras;
            s.push(theta0.clone());
            s
        }
        // SNV state is [ξ₀, ξ₋₁] with ξ₀ = θ₀.
        TransitionKind::Snv => vec![theta0.clone(), extras[0].clone()],
        // AccSGD state is [w̄₀, w₀] with w₀ = θ₀.
        TransitionKind::AccSgd => vec![extras[0].clone(), theta0.clone()],
    })
}

/// Iterate after `grads.len()` steps, computed directly from the gradient
/// history with closed-form coefficients:
///
/// `θ_t = Σ_j (A^{t+1})_{last,j}·S₀ⱼ + Σ_{i=1}^{t} (A^{i+1})_{last,b+1}·∇_{t-i}`.
pub fn unrolled_theta<T: Scalar>(
    spec: &TransitionSpec<T>,
    grads: &[RealVector<T>],
    theta0: &RealVector<T>,
    init: &BufferInit<T>,
) -> Result<RealVector<T>> {
    let t = grads.len();
    if t == 0 {
        return Err(Error::Empty {
            what: "gradient history",
        });
    }
    for g in grads {
        theta0.check_dim(g)?;
    }
    let state = initial_state(spec, theta0, init)?;
    let b = spec.buffers();
    let head = closed_form_last_row(spec, t)?;
    let mut acc = RealVector::zeros(theta0.dim());
    for (coef, s) in head.iter().take(b).zip(&state) {
        acc = RealVector::axpy(*coef, s, &acc)?;
    }
    for i in 1..=t {
        let coef = closed_form_last_row(spec, i)?[b];
        acc = RealVector::axpy(coef, &grads[t - i], &acc)?;
    }
    Ok(acc)
}

/// Horizon of the (QH)Adam bound: a finite number of past steps or the limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Steps(usize),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams<T> {
    pub nu1: T,
    pub nu2: T,
    pub beta1: T,
    pub beta2: T,
    pub horizon: Horizon,
}

impl<T: Scalar> BoundParams<T> {
    /// Requires `0 < β₁ < √β₂ < 1` and `0 < ν₂`.
    pub fn new(nu1: T, nu2: T, beta1: T, beta2: T, horizon: Horizon) -> Result<Self> {
        if !(beta1 > T::zero() && beta2 < T::one() && beta2 > T::zero() && beta1 < beta2.sqrt()) {
            return Err(Error::param(
                "beta1/beta2",
                format!("need 0 < beta1 < sqrt(beta2) < 1 (beta1 = {beta1}, beta2 = {beta2})"),
            ));
        }
        if !(nu2 > T::zero() && nu2.is_finite()) {
            return Err(Error::param("nu2", format!("{nu2} must be > 0")));
        }
        if !nu1.is_finite() {
            return Err(Error::param("nu1", "must be finite"));
        }
        Ok(Self {
            nu1,
            nu2,
            beta1,
            beta2,
            horizon,
        })
    }

    pub fn with_horizon(self, horizon: Horizon) -> Result<Self> {
        Self::new(self.nu1, self.nu2, self.beta1, self.beta2, horizon)
    }
}

/// Tight per-coordinate bound on `|g̃/√s̃|` for QHAdam with `ε = 0` and no
/// bias correction:
///
/// `√( (1-ν₁β₁)²/(1-ν₂β₂) + [ν₁β₁(1-β₁)]²·[1-(β₁²/β₂)^t] / (ν₂(1-β₂)(β₂-β₁²)) )`.
///
/// The infinite horizon drops the `(β₁²/β₂)^t` term exactly.
pub fn adam_update_bound<T: Scalar>(p: &BoundParams<T>) -> T {
    let one = T::one();
    let BoundParams {
        nu1, nu2, beta1, beta2, ..
    } = *p;
    let head = (one - nu1 * beta1) * (one - nu1 * beta1) / (one - nu2 * beta2);
    let tail_scale = (nu1 * beta1 * (one - beta1)) * (nu1 * beta1 * (one - beta1));
    let tail_denom = nu2 * (one - beta2) * (beta2 - beta1 * beta1);
    let remaining = match p.horizon {
        Horizon::Infinite => one,
        Horizon::Steps(t) => one - powu(beta1 * beta1 / beta2, t),
    };
    (head + tail_scale * remaining / tail_denom).sqrt()
}

/// The bound `max{1, (1-β₁)/√(1-β₂)}` once claimed for Adam. It is not an
/// upper bound; kept for comparison.
pub fn kingma_claimed_bound<T: Scalar>(beta1: T, beta2: T) -> T {
    T::one().max((T::one() - beta1) / (T::one() - beta2).sqrt())
}

/// Gradient history (chronological, length `t+1`) maximizing `|g̃/√s̃|` after
/// `t+1` steps. The gradient `j` steps before the last is
/// `ν₁(1-β₁)β₁^j / (ν₂(1-β₂)β₂^j)` and the last is `(1-ν₁β₁)/(1-ν₂β₂)`.
pub fn adversarial_gradient_sequence<T: Scalar>(p: &BoundParams<T>, t: usize) -> Result<Vec<T>> {
    if t == 0 {
        return Err(Error::param("t", "must be >= 1"));
    }
    BoundParams::new(p.nu1, p.nu2, p.beta1, p.beta2, Horizon::Steps(t))?;
    let one = T::one();
    let BoundParams {
        nu1, nu2, beta1, beta2, ..
    } = *p;
    let mut xs: Vec<T> = (1..=t)
        .rev()
        .map(|lag| nu1 * (one - beta1) * powu(beta1 / beta2, lag) / (nu2 * (one - beta2)))
        .collect();
    xs.push((one - nu1 * beta1) / (one - nu2 * beta2));
    Ok(xs)
}

/// `|g̃/√s̃|` after feeding `xs` through the uncorrected QHAdam moment
/// recursions from zero buffers.
pub fn qhadam_update_ratio<T: Scalar>(nu1: T, nu2: T, beta1: T, beta2: T, xs: &[T]) -> Result<T> {
    let last = *xs.last().ok_or(Error::Empty {
        what: "gradient sequence",
    })?;
    let one = T::one();
    let (mut g, mut s) = (T::zero(), T::zero());
    for &x in xs {
        g = beta1 * g + (one - beta1) * x;
        s = beta2 * s + (one - beta2) * x * x;
    }
    let numer = (one - nu1) * last + nu1 * g;
    let denom = ((one - nu2) * last * last + nu2 * s).sqrt();
    if denom == T::zero() {
        return Err(Error::param("xs", "second-moment estimate is zero"));
    }
    Ok((numer / denom).abs())
}

/// Limit bound as `ν₂` varies with the other parameters fixed.
pub fn nu2_bound_curve<T: Scalar>(nu1: T, beta1: T, beta2: T, nu2_grid: &[T]) -> Result<Vec<(T, T)>> {
    nu2_grid
        .iter()
        .map(|&nu2| {
            let p = BoundParams::new(nu1, nu2, beta1, beta2, Horizon::Infinite)?;
            Ok((nu2, adam_update_bound(&p)))
        })
        .collect()
}

/// Closed form of the PID derivative term after the last gradient in
/// `grads`, from zero initial buffers:
/// `v_t = ((1-β)/β)·[-∇_t + (1-β)·Σ_{i=0}^{t} β^i·∇_{t-i}]`.
pub fn pid_d_term_closed_form<T: Scalar>(grads: &[RealVector<T>], beta: T) -> Result<RealVector<T>> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::param("beta", "outside (0, 1)"));
    }
    let newest = grads.last().ok_or(Error::Empty {
        what: "gradient history",
    })?;
    let one = T::one();
    let mut ewma = RealVector::zeros(newest.dim());
    for (lag, g) in grads.iter().rev().enumerate() {
        ewma = RealVector::axpy((one - beta) * powu(beta, lag), g, &ewma)?;
    }
    let inner = ewma.sub(newest)?;
    inner.scale((one - beta) / beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qhm(alpha: f64, nu: f64, beta: f64) -> TransitionSpec<f64> {
        TransitionSpec::Qhm { alpha, nu, beta }
    }

    #[test]
    fn qhm_matrix_row() {
        let a = build_transition(&qhm(1.0, 0.7, 0.9)).unwrap();
        let row = a.row(1);
        assert!((row[0] + 0.63).abs() < 1e-15);
        assert_eq!(row[1], 1.0);
        assert!((row[2] + 0.37).abs() < 1e-15);
        assert_eq!(row[3], 0.0);

        let sgd = build_transition(&qhm(0.5, 0.0, 0.9)).unwrap();
        assert_eq!(sgd.get(1, 0), 0.0);
        assert_eq!(sgd.get(1, 2), -0.5);
    }

    #[test]
    fn pid_matrix_last_row() {
        let a = build_transition(&TransitionSpec::Pid {
            kp: 0.0,
            ki: 0.3,
            kd: 0.0,
            beta: 0.5,
        })
        .unwrap();
        assert_eq!(a.row(5), &[0.0, 0.3, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn power_row_examples() {
        let spec = qhm(1.0, 0.7, 0.9);
        let a = build_transition(&spec).unwrap();
        let row = matrix_power_last_row(&a, 1).unwrap();
        assert!((row[2] + 0.37).abs() < 1e-15);

        let row = matrix_power_last_row(&a, 10).unwrap();
        let expect = -0.7 * 0.9 * (1.0 - 0.9f64.powi(10)) / 0.1;
        assert!((row[0] - expect).abs() < 1e-12);

        let sq = a.mul(&a);
        let row = matrix_power_last_row(&a, 1).unwrap();
        for (x, y) in row.iter().zip(sq.row(3)) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(matrix_power_last_row(&a, 0).is_err());
    }

    #[test]
    fn unrolled_examples() {
        let theta0 = RealVector::scalar(2.0).unwrap();
        let g = RealVector::scalar(1.0).unwrap();
        let th = unrolled_theta(
            &qhm(1.0, 0.7, 0.999),
            std::slice::from_ref(&g),
            &theta0,
            &BufferInit::Standard,
        )
        .unwrap();
        assert!((th[0] - (2.0 - 0.3007)).abs() < 1e-14);

        let grads: Vec<_> = (0..5).map(|k| RealVector::scalar(k as f64).unwrap()).collect();
        let th = unrolled_theta(&qhm(0.1, 0.0, 0.9), &grads, &theta0, &BufferInit::Standard).unwrap();
        assert!((th[0] - (2.0 - 0.1 * 10.0)).abs() < 1e-14);

        assert!(unrolled_theta(&qhm(0.1, 0.0, 0.9), &[], &theta0, &BufferInit::Standard).is_err());
    }

    #[test]
    fn bound_examples() {
        let adam = BoundParams::new(1.0, 1.0, 0.9, 0.999, Horizon::Infinite).unwrap();
        let b: f64 = adam_update_bound(&adam);
        assert!((b - 7.268).abs() < 0.01, "{b}");
        assert!((kingma_claimed_bound(0.9f64, 0.999) - 3.162).abs() < 0.001);
        assert!((kingma_claimed_bound(0.0f64, 0.999) - 31.62).abs() < 0.01);
        assert_eq!(kingma_claimed_bound(0.9f64, 0.99), 1.0);

        // Without bias correction a lone first gradient already reaches
        // 1/√(1-β₂); that is the β₁ → 0 limit.
        let p = BoundParams::new(1.0f64, 1.0, 1e-12, 0.999, Horizon::Infinite).unwrap();
        assert!((adam_update_bound(&p) - 1.0 / 0.001f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn bound_preconditions() {
        assert!(BoundParams::new(1.0, 1.0, 0.95, 0.9, Horizon::Infinite).is_err());
        assert!(BoundParams::new(1.0, 0.0, 0.5, 0.9, Horizon::Infinite).is_err());
        assert!(BoundParams::new(1.0, 1.0, 0.0, 0.9, Horizon::Infinite).is_err());
        assert!(BoundParams::new(1.0, 1.0, 0.5, 1.0, Horizon::Infinite).is_err());
    }

    #[test]
    fn adversarial_small_cases() {
        let p = BoundParams::new(0.8f64, 0.6, 0.9, 0.99, Horizon::Steps(1)).unwrap();
        let xs = adversarial_gradient_sequence(&p, 1).unwrap();
        assert_eq!(xs.len(), 2);
        let r = qhadam_update_ratio(p.nu1, p.nu2, p.beta1, p.beta2, &xs).unwrap();
        assert!((r - adam_update_bound(&p)).abs() < 1e-12 * r);

        let p = BoundParams::new(0.0, 0.6, 0.9, 0.99, Horizon::Steps(50)).unwrap();
        let xs = adversarial_gradient_sequence(&p, 50).unwrap();
        assert!(xs[..50].iter().all(|&x| x == 0.0));
        let r = qhadam_update_ratio(0.0, 0.6, 0.9, 0.99, &xs).unwrap();
        let head_only = (1.0 / (1.0 - 0.6 * 0.99f64)).sqrt();
        assert!((r - head_only).abs() < 1e-12 * r);
        assert!((adam_update_bound(&p) - head_only).abs() < 1e-12);
    }

    #[test]
    fn d_term_single_gradient() {
        let v = pid_d_term_closed_form(&[RealVector::scalar(1.0f64).unwrap()], 0.9).unwrap();
        assert!((v[0] + 0.1).abs() < 1e-15);
        assert!(pid_d_term_closed_form::<f64>(&[], 0.9).is_err());
        assert!(pid_d_term_closed_form(&[RealVector::scalar(1.0).unwrap()], 1.0).is_err());
    }

    #[test]
    fn d_term_vanishes_under_constant_gradient() {
        let grads = vec![RealVector::scalar(3.0f64).unwrap(); 2000];
        let v = pid_d_term_closed_form(&grads, 0.9).unwrap();
        assert!(v[0].abs() < 1e-12);
    }
}
