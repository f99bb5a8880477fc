//! Desk-scale objectives with seeded stochastic gradients.

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::vector::RealVector;

type Vector = RealVector<f64>;

/// An objective the harness can optimize.
///
/// `loss_grad` may be stochastic (minibatches, injected noise) and draws all
/// randomness from the supplied generator; `eval_loss` is the deterministic
/// objective used for reporting.
pub trait Problem: Send + Sync {
    fn dim(&self) -> usize;
    fn initial_point(&self) -> Vector;
    fn loss_grad(&self, theta: &Vector, rng: &mut SeededRng) -> Result<(f64, Vector)>;
    fn eval_loss(&self, theta: &Vector) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    None,
    /// `∇ + σ·z`
    Additive {
        sigma: f64,
    },
    /// `∇ ⊙ (1 + σ·z)`
    Multiplicative {
        sigma: f64,
    },
}

impl NoiseModel {
    pub fn additive(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self::Additive { sigma })
    }

    pub fn multiplicative(sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(Self::Multiplicative { sigma })
    }

    fn apply(&self, grad: Vector, rng: &mut SeededRng) -> Result<Vector> {
        match *self {
            Self::None => Ok(grad),
            Self::Additive { sigma } => {
                let noisy: Vec<f64> = grad.iter().map(|g| g + sigma * rng.normal()).collect();
                Vector::new(noisy)
            }
            Self::Multiplicative { sigma } => {
                let noisy: Vec<f64> = grad.iter().map(|g| g * (1.0 + sigma * rng.normal())).collect();
                Vector::new(noisy)
            }
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::param("sigma", format!("{sigma} must be finite and >= 0")));
    }
    Ok(())
}

/// `L(θ) = ½·θᵀHθ + bᵀθ` with diagonal `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    eigenvalues: Vec<f64>,
    b: Vector,
    noise: NoiseModel,
    start: Vector,
}

impl QuadraticProblem {
    pub fn new(eigenvalues: Vec<f64>, b: Vector, noise: NoiseModel) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Empty { what: "eigenvalues" });
        }
        if let Some(bad) = eigenvalues.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::param("eigenvalues", format!("{bad} must be finite and > 0")));
        }
        if b.dim() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                found: b.dim(),
            });
        }
        let start = Vector::filled(eigenvalues.len(), 1.0)?;
        Ok(Self {
            eigenvalues,
            b,
            noise,
            start,
        })
    }

    /// Zero linear term, no noise.
    pub fn diagonal(eigenvalues: Vec<f64>) -> Result<Self> {
        let dim = eigenvalues.len().max(1);
        Self::new(eigenvalues, Vector::zeros(dim), NoiseModel::None)
    }

    pub fn with_start(mut self, start: Vector) -> Result<Self> {
        self.b.check_dim(&start)?;
        self.start = start;
        Ok(self)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn loss(&self, theta: &Vector) -> Result<f64> {
        self.b.check_dim(theta)?;
        Ok(self
            .eigenvalues
            .iter()
            .zip(theta.iter())
            .zip(self.b.iter())
            .map(|((l, t), b)| 0.5 * l * t * t + b * t)
            .sum())
    }

    pub fn exact_grad(&self, theta: &Vector) -> Result<Vector> {
        self.b.check_dim(theta)?;
        let g: Vec<f64> = self
            .eigenvalues
            .iter()
            .zip(theta.iter())
            .zip(self.b.iter())
            .map(|((l, t), b)| l * t + b)
            .collect();
        Vector::new(g)
    }
}

impl Problem for QuadraticProblem {
    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn initial_point(&self) -> Vector {
        self.start.clone()
    }

    fn loss_grad(&self, theta: &Vector, rng: &mut SeededRng) -> Result<(f64, Vector)> {
        quadratic_grad(self, theta, rng)
    }

    fn eval_loss(&self, theta: &Vector) -> Result<f64> {
        self.loss(theta)
    }
}

/// Exact loss and the noisy gradient `Hθ + b` under the problem's noise model.
pub fn quadratic_grad(p: &QuadraticProblem, theta: &Vector, rng: &mut SeededRng) -> Result<(f64, Vector)> {
    let loss = p.loss(theta)?;
    let grad = p.noise.apply(p.exact_grad(theta)?, rng)?;
    Ok((loss, grad))
}

pub fn condition_number(p: &QuadraticProblem) -> f64 {
    let max = p.eigenvalues.iter().copied().fold(f64::MIN, f64::max);
    let min = p.eigenvalues.iter().copied().fold(f64::MAX, f64::min);
    max / min
}

/// Streaming least squares: `x ~ N(0, diag(λ))`, `y = xᵀw* + σ·ε`,
/// per-sample loss `½(xᵀθ - y)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresProblem {
    cov_eigenvalues: Vec<f64>,
    w_true: Vector,
    label_sigma: f64,
    batch: usize,
}

impl LeastSquaresProblem {
    pub fn new(cov_eigenvalues: Vec<f64>, w_true: Vector, label_sigma: f64, batch: usize) -> Result<Self> {
        if cov_eigenvalues.is_empty() {
            return Err(Error::Empty {
                what: "covariance eigenvalues",
            });
        }
        if let Some(bad) = cov_eigenvalues.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::param("cov_eigenvalues", format!("{bad} must be finite and > 0")));
        }
        if w_true.dim() != cov_eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: cov_eigenvalues.len(),
                found: w_true.dim(),
            });
        }
        check_sigma(label_sigma)?;
        if batch == 0 {
            return Err(Error::param("batch", "must be >= 1"));
        }
        Ok(Self {
            cov_eigenvalues,
            w_true,
            label_sigma,
            batch,
        })
    }

    pub fn w_true(&self) -> &Vector {
        &self.w_true
    }

    /// Population gradient `Σ(θ - w*)`.
    pub fn expected_grad(&self, theta: &Vector) -> Result<Vector> {
        let diff = theta.sub(&self.w_true)?;
        let g: Vec<f64> = diff.iter().zip(&self.cov_eigenvalues).map(|(d, l)| l * d).collect();
        Vector::new(g)
    }
}

impl Problem for LeastSquaresProblem {
    fn dim(&self) -> usize {
        self.cov_eigenvalues.len()
    }

    fn initial_point(&self) -> Vector {
        Vector::zeros(self.dim())
    }

    fn loss_grad(&self, theta: &Vector, rng: &mut SeededRng) -> Result<(f64, Vector)> {
        self.w_true.check_dim(theta)?;
        let d = self.dim();
        let mut grad = vec![0.0; d];
        let mut loss = 0.0;
        let mut x = vec![0.0; d];
        for _ in 0..self.batch {
            for (xi, l) in x.iter_mut().zip(&self.cov_eigenvalues) {
                *xi = l.sqrt() * rng.normal();
            }
            let y: f64 =
                x.iter().zip(self.w_true.iter()).map(|(a, w)| a * w).sum::<f64>() + self.label_sigma * rng.normal();
            let r: f64 = x.iter().zip(theta.iter()).map(|(a, t)| a * t).sum::<f64>() - y;
            loss += 0.5 * r * r;
            for (g, xi) in grad.iter_mut().zip(&x) {
                *g += r * xi;
            }
        }
        let n = self.batch as f64;
        let grad = Vector::new(grad.into_iter().map(|g| g / n).collect())?;
        Ok((loss / n, grad))
    }

    /// Population loss `½(θ - w*)ᵀΣ(θ - w*) + ½σ²`.
    fn eval_loss(&self, theta: &Vector) -> Result<f64> {
        let diff = theta.sub(&self.w_true)?;
        let quad: f64 = diff.iter().zip(&self.cov_eigenvalues).map(|(d, l)| l * d * d).sum();
        Ok(0.5 * quad + 0.5 * self.label_sigma * self.label_sigma)
    }
}

/// Parameters of the synthetic classification dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticSpec {
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    pub data_seed: u64,
    /// Scale of the class means relative to the unit within-class spread.
    pub separation: f64,
    pub l2_coeff: f64,
    pub minibatch: usize,
}

impl Default for LogisticSpec {
    fn default() -> Self {
        Self {
            samples: 512,
            features: 8,
            classes: 4,
            data_seed: 7,
            separation: 1.0,
            l2_coeff: 0.5e-4,
            minibatch: 32,
        }
    }
}

/// Multinomial logistic regression on Gaussian class clusters.
///
/// `θ` holds the `classes × features` weight matrix row-major, followed by
/// `classes` biases. The loss is mean cross-entropy plus `l2_coeff·|θ|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticProblem {
    spec: LogisticSpec,
    xs: Vec<f64>,
    labels: Vec<usize>,
}

impl LogisticProblem {
    pub fn new(spec: LogisticSpec) -> Result<Self> {
        if spec.samples == 0 || spec.features == 0 {
            return Err(Error::param("samples/features", "must be >= 1"));
        }
        if spec.classes < 2 {
            return Err(Error::param("classes", "must be >= 2"));
        }
        if spec.minibatch == 0 {
            return Err(Error::param("minibatch", "must be >= 1"));
        }
        if !(spec.l2_coeff.is_finite() && spec.l2_coeff >= 0.0) {
            return Err(Error::param("l2_coeff", "must be finite and >= 0"));
        }
        if !(spec.separation.is_finite() && spec.separation >= 0.0) {
            return Err(Error::param("separation", "must be finite and >= 0"));
        }
        let mut rng = SeededRng::new(spec.data_seed);
        let means: Vec<f64> = (0..spec.classes * spec.features)
            .map(|_| spec.separation * rng.normal())
            .collect();
        let mut xs = Vec::with_capacity(spec.samples * spec.features);
        let mut labels = Vec::with_capacity(spec.samples);
        for i in 0..spec.samples {
            let y = i % spec.classes;
            labels.push(y);
            let mu = &means[y * spec.features..(y + 1) * spec.features];
            xs.extend(mu.iter().map(|m| m + rng.normal()));
        }
        Ok(Self { spec, xs, labels })
    }

    pub fn spec(&self) -> &LogisticSpec {
        &self.spec
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features_of(&self, i: usize) -> &[f64] {
        let d = self.spec.features;
        &self.xs[i * d..(i + 1) * d]
    }

    pub fn param_dim(&self) -> usize {
        self.spec.classes * (self.spec.features + 1)
    }

    fn check_theta(&self, theta: &Vector) -> Result<()> {
        if theta.dim() != self.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim(),
                found: theta.dim(),
            });
        }
        Ok(())
    }

    /// Adds sample `i`'s cross-entropy gradient into `grad`; returns its loss.
    fn accumulate(&self, theta: &[f64], i: usize, grad: &mut [f64], logits: &mut [f64]) -> f64 {
        let (c, d) = (self.spec.classes, self.spec.features);
        let x = self.features_of(i);
        let bias = &theta[c * d..];
        for k in 0..c {
            let w = &theta[k * d..(k + 1) * d];
            logits[k] = bias[k] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = logits.iter().map(|l| (l - max).exp()).sum();
        let log_z = max + z.ln();
        let y = self.labels[i];
        for k in 0..c {
            let p = (logits[k] - log_z).exp();
            let r = p - if k == y { 1.0 } else { 0.0 };
            for (g, xv) in grad[k * d..(k + 1) * d].iter_mut().zip(x) {
                *g += r * xv;
            }
            grad[c * d + k] += r;
        }
        log_z - logits[y]
    }

    fn batch_loss_grad(&self, theta: &Vector, indices: impl Iterator<Item = usize>) -> Result<(f64, Vector)> {
        self.check_theta(theta)?;
        let t = theta.as_slice();
        let mut grad = vec![0.0; t.len()];
        let mut logits = vec![0.0; self.spec.classes];
        let mut loss = 0.0;
        let mut n = 0usize;
        for i in indices {
            loss += self.accumulate(t, i, &mut grad, &mut logits);
            n += 1;
        }
        let inv = 1.0 / n as f64;
        let l2 = self.spec.l2_coeff;
        let reg: f64 = t.iter().map(|v| v * v).sum::<f64>() * l2;
        let grad: Vec<f64> = grad.iter().zip(t).map(|(g, v)| g * inv + 2.0 * l2 * v).collect();
        Ok((loss * inv + reg, Vector::new(grad)?))
    }

    /// Loss and gradient over the whole dataset.
    pub fn full_loss_grad(&self, theta: &Vector) -> Result<(f64, Vector)> {
        self.batch_loss_grad(theta, 0..self.spec.samples)
    }

    /// Loss and gradient of one sample (regularizer included).
    pub fn sample_loss_grad(&self, theta: &Vector, i: usize) -> Result<(f64, Vector)> {
        if i >= self.spec.samples {
            return Err(Error::param("i", format!("sample {i} out of range")));
        }
        self.batch_loss_grad(theta, std::iter::once(i))
    }
}

/// Cross-entropy on a minibatch drawn with replacement, plus the L2 term.
pub fn logistic_minibatch_grad(p: &LogisticProblem, theta: &Vector, rng: &mut SeededRng) -> Result<(f64, Vector)> {
    let n = p.spec.samples;
    let picks: Vec<usize> = (0..p.spec.minibatch).map(|_| rng.below(n)).collect();
    p.batch_loss_grad(theta, picks.into_iter())
}

impl Problem for LogisticProblem {
    fn dim(&self) -> usize {
        self.param_dim()
    }

    fn initial_point(&self) -> Vector {
        Vector::zeros(self.param_dim())
    }

    fn loss_grad(&self, theta: &Vector, rng: &mut SeededRng) -> Result<(f64, Vector)> {
        logistic_minibatch_grad(self, theta, rng)
    }

    fn eval_loss(&self, theta: &Vector) -> Result<f64> {
        Ok(self.full_loss_grad(theta)?.0)
    }
}
