//! Points on the probability simplex and the statistics W-LDA needs on them:
//! Dirichlet sampling, the Fisher geodesic distance, the information
//! diffusion kernel and the unbiased MMD estimator with its gradient.

use std::f64::consts::PI;
use std::ops::Index;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Tolerance on `Σ θ_k = 1` for a validated simplex vector.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Above this Bhattacharyya coefficient the factor `arccos(s)/√(1−s²)` is
/// replaced by its limit 1.
const COINCIDENT_THRESHOLD: f64 = 1.0 - 1e-12;

/// A point on the simplex: non-negative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::dim("a simplex vector needs at least one entry"));
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::invalid(format!("simplex entry {bad} is not a finite non-negative number")));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!("simplex entries sum to {sum}")));
        }
        Ok(Self(entries))
    }

    /// Wraps entries that are already normalized by construction.
    pub(crate) fn from_normalized(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        debug_assert!((entries.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOLERANCE);
        Self(entries)
    }

    pub fn uniform(dim: usize) -> Self {
        Self(vec![1.0 / dim as f64; dim])
    }

    /// The `k`-th vertex `e_k`.
    pub fn vertex(dim: usize, k: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[k] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Index of the largest entry (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Index<usize> for SimplexVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl AsRef<[f64]> for SimplexVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Concentration parameters of a Dirichlet distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    alpha: Vec<f64>,
}

impl DirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::invalid("a Dirichlet needs at least two dimensions"));
        }
        if let Some(bad) = alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::invalid(format!("Dirichlet concentration {bad} is not positive")));
        }
        Ok(Self { alpha })
    }

    pub fn symmetric(dim: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; dim])
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn mean(&self) -> Vec<f64> {
        let total: f64 = self.alpha.iter().sum();
        self.alpha.iter().map(|a| a / total).collect()
    }
}

/// Natural log of a `Gamma(shape, 1)` draw.
///
/// Marsaglia–Tsang squeeze/rejection for `shape ≥ 1`; smaller shapes use
/// `Gamma(a) = Gamma(a + 1)·U^{1/a}`, kept in log space because `U^{1/a}`
/// underflows for small `a`.
pub fn sample_log_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let u: f64 = 1.0 - rng.random::<f64>();
        return sample_log_gamma(shape + 1.0, rng) + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = StandardNormal.sample(rng);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = 1.0 - rng.random::<f64>();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return (d * v).ln();
        }
    }
}

/// Draws `θ ~ Dir(α)` by normalizing independent Gamma draws.
pub fn sample_dirichlet<R: Rng + ?Sized>(params: &DirichletParams, rng: &mut R) -> SimplexVector {
    let logs: Vec<f64> = params
        .alpha
        .iter()
        .map(|&a| sample_log_gamma(a, rng))
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = out.iter().sum();
    for v in &mut out {
        *v /= total;
    }
    SimplexVector(out)
}

/// `n` independent Dirichlet draws.
pub fn sample_dirichlet_n<R: Rng + ?Sized>(
    params: &DirichletParams,
    n: usize,
    rng: &mut R,
) -> Vec<SimplexVector> {
    (0..n).map(|_| sample_dirichlet(params, rng)).collect()
}

fn check_same_dim(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::dim(format!(
            "simplex vectors of dimension {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `Σ_k √(a_k b_k)` clamped to `[0, 1]`.
fn bhattacharyya(sqrt_a: &[f64], sqrt_b: &[f64]) -> f64 {
    let s: f64 = sqrt_a.iter().zip(sqrt_b).map(|(x, y)| x * y).sum();
    s.clamp(0.0, 1.0)
}

fn sqrt_coords(v: &SimplexVector) -> Vec<f64> {
    v.0.iter().map(|x| x.sqrt()).collect()
}

/// Great-circle distance after mapping `θ ↦ √θ` onto the sphere:
/// `2·arccos(Σ_k √(a_k b_k))`, in `[0, π]`.
pub fn geodesic_distance(a: &SimplexVector, b: &SimplexVector) -> Result<f64> {
    check_same_dim(&a.0, &b.0)?;
    Ok(2.0 * bhattacharyya(&sqrt_coords(a), &sqrt_coords(b)).acos())
}

/// Information diffusion kernel `exp(−arccos²(Σ_k √(a_k b_k)))`.
pub fn diffusion_kernel(a: &SimplexVector, b: &SimplexVector) -> Result<f64> {
    check_same_dim(&a.0, &b.0)?;
    Ok(kernel_from_coefficient(bhattacharyya(&sqrt_coords(a), &sqrt_coords(b))))
}

#[inline]
fn kernel_from_coefficient(s: f64) -> f64 {
    let angle = s.acos();
    (-angle * angle).exp()
}

/// `dk/ds` for `k(s) = exp(−arccos² s)`.
#[inline]
fn kernel_slope(s: f64, k: f64) -> f64 {
    let ratio = if s >= COINCIDENT_THRESHOLD {
        1.0
    } else {
        s.acos() / (1.0 - s * s).sqrt()
    };
    2.0 * k * ratio
}

/// Kernel Gram matrix of `points`, row-major.
pub fn kernel_gram(points: &[SimplexVector]) -> Result<Vec<Vec<f64>>> {
    let roots: Vec<Vec<f64>> = points.iter().map(sqrt_coords).collect();
    let mut gram = vec![vec![0.0; points.len()]; points.len()];
    for i in 0..points.len() {
        for j in 0..points.len() {
            check_same_dim(&roots[i], &roots[j])?;
            gram[i][j] = kernel_from_coefficient(bhattacharyya(&roots[i], &roots[j]));
        }
    }
    Ok(gram)
}

fn check_samples(q: &[SimplexVector], p: &[SimplexVector]) -> Result<usize> {
    if q.len() < 2 || p.len() < 2 {
        return Err(Error::invalid(format!(
            "unbiased MMD needs at least 2 samples per set, got {} and {}",
            q.len(),
            p.len()
        )));
    }
    let dim = q[0].dim();
    if q.iter().chain(p).any(|v| v.dim() != dim) {
        return Err(Error::dim("MMD samples have differing dimensions"));
    }
    Ok(dim)
}

/// Unbiased estimate of MMD² between the distributions behind `q` and `p`:
///
/// `1/(m(m−1)) Σ_{i≠j} k(q_i,q_j) + 1/(n(n−1)) Σ_{i≠j} k(p_i,p_j) − 2/(mn) Σ_{i,j} k(q_i,p_j)`.
///
/// Can be negative.
pub fn mmd_unbiased(q: &[SimplexVector], p: &[SimplexVector]) -> Result<f64> {
    check_samples(q, p)?;
    let rq: Vec<Vec<f64>> = q.iter().map(sqrt_coords).collect();
    let rp: Vec<Vec<f64>> = p.iter().map(sqrt_coords).collect();
    Ok(within_term(&rq) + within_term(&rp) - cross_term(&rq, &rp))
}

fn within_term(roots: &[Vec<f64>]) -> f64 {
    let m = roots.len();
    let mut sum = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            sum += kernel_from_coefficient(bhattacharyya(&roots[i], &roots[j]));
        }
    }
    2.0 * sum / (m * (m - 1)) as f64
}

fn cross_term(rq: &[Vec<f64>], rp: &[Vec<f64>]) -> f64 {
    let mut sum = 0.0;
    for a in rq {
        for b in rp {
            sum += kernel_from_coefficient(bhattacharyya(a, b));
        }
    }
    2.0 * sum / (rq.len() * rp.len()) as f64
}

/// MMD value together with its gradient with respect to the `q` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MmdGradient {
    pub value: f64,
    /// One vector per `q` sample.
    pub grad: Vec<Vec<f64>>,
}

/// [`mmd_unbiased`] plus `θ_i ⊙ ∂MMD/∂θ_i` for each `q` sample, i.e. the
/// gradient with respect to `ln θ_i`.
///
/// This form stays finite when an entry of `θ_i` is zero or underflows, and
/// it is what a softmax backward pass consumes: for `θ = softmax(z)`,
/// `∂/∂z_j = u_j − θ_j Σ_k u_k` with `u = θ ⊙ ∇_θ`.
pub fn mmd_unbiased_log_grad(q: &[SimplexVector], p: &[SimplexVector]) -> Result<MmdGradient> {
    let dim = check_samples(q, p)?;
    let m = q.len();
    let n = p.len();
    let rq: Vec<Vec<f64>> = q.iter().map(sqrt_coords).collect();
    let rp: Vec<Vec<f64>> = p.iter().map(sqrt_coords).collect();

    let within_scale = 2.0 / (m * (m - 1)) as f64;
    let cross_scale = 2.0 / (m * n) as f64;
    let mut grad = vec![vec![0.0; dim]; m];
    let mut within_q = 0.0;
    let mut cross = 0.0;

    // ∂k(a,b)/∂ln a_k = k'(s) · ½ √a_k √b_k
    for i in 0..m {
        for j in (i + 1)..m {
            let s = bhattacharyya(&rq[i], &rq[j]);
            let k = kernel_from_coefficient(s);
            within_q += k;
            let c = 0.5 * within_scale * kernel_slope(s, k);
            for d in 0..dim {
                let shared = c * rq[i][d] * rq[j][d];
                grad[i][d] += shared;
                grad[j][d] += shared;
            }
        }
        for b in &rp {
            let s = bhattacharyya(&rq[i], b);
            let k = kernel_from_coefficient(s);
            cross += k;
            let c = 0.5 * cross_scale * kernel_slope(s, k);
            for d in 0..dim {
                grad[i][d] -= c * rq[i][d] * b[d];
            }
        }
    }
    let value = within_scale * within_q + within_term(&rp) - cross_scale * cross;
    Ok(MmdGradient { value, grad })
}

/// [`mmd_unbiased`] plus `∂MMD/∂θ_i` in ordinary coordinates.
///
/// Coordinates where `θ_i` is exactly zero get an infinite (or NaN) partial;
/// prefer [`mmd_unbiased_log_grad`] when chaining through a softmax.
pub fn mmd_unbiased_with_grad(q: &[SimplexVector], p: &[SimplexVector]) -> Result<MmdGradient> {
    let mut out = mmd_unbiased_log_grad(q, p)?;
    for (g, theta) in out.grad.iter_mut().zip(q) {
        for (gd, &t) in g.iter_mut().zip(theta.iter()) {
            *gd /= t;
        }
    }
    Ok(out)
}

/// MMD estimates between pairs of independent `m`-sample draws from the same
/// Dirichlet, i.e. draws from the estimator's null distribution.
pub fn prior_null_mmd<R: Rng + ?Sized>(
    prior: &DirichletParams,
    m: usize,
    resamples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    (0..resamples)
        .map(|_| {
            let a = sample_dirichlet_n(prior, m, rng);
            let b = sample_dirichlet_n(prior, m, rng);
            mmd_unbiased(&a, &b)
        })
        .collect()
}

/// Empirical `q`-quantile (nearest-rank, `q ∈ [0, 1]`) of `values`.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[rank - 1])
}

/// `k(e_i, e_j)` for distinct vertices: `exp(−π²/4)`.
pub fn vertex_kernel() -> f64 {
    (-(PI / 2.0) * (PI / 2.0)).exp()
}
