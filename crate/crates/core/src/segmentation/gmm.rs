//! Weighted Gaussian mixture colour models fitted by EM.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg3::{
    cholesky, clamp_eigenvalues, dot, forward_substitute, sub, zeros, Mat3, Vec3,
};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct GmmConfig {
    pub components: usize,
    pub max_iters: usize,
    /// EM stops once the mean weighted log-likelihood improves by less.
    pub tol: f64,
    /// Lower bound on every covariance eigenvalue.
    pub eps_cov: f64,
    pub seed: u64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        GmmConfig {
            components: 5,
            max_iters: 100,
            tol: 1e-6,
            eps_cov: 1e-4,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianComponent<T> {
    pub weight: T,
    pub mean: Vec3<T>,
    pub covariance: Mat3<T>,
    chol: Mat3<T>,
    /// `-½ (3 ln 2π + ln |Σ|)`
    log_norm: T,
}

impl<T: Real> GaussianComponent<T> {
    pub fn new(weight: T, mean: Vec3<T>, covariance: Mat3<T>) -> Result<Self> {
        let chol = cholesky(&covariance).ok_or_else(|| {
            Error::Gmm(format!("covariance {covariance:?} not positive definite"))
        })?;
        let half = T::of(0.5);
        let log_det = (0..3).fold(T::zero(), |s, i| s + chol[i][i].ln()) * T::of(2.0);
        let log_norm = -half * (T::of(3.0) * (T::of(2.0) * T::PI()).ln() + log_det);
        Ok(GaussianComponent {
            weight,
            mean,
            covariance,
            chol,
            log_norm,
        })
    }

    /// `ln N(x | μ, Σ)`.
    pub fn log_pdf(&self, x: Vec3<T>) -> T {
        let y = forward_substitute(&self.chol, sub(x, self.mean));
        self.log_norm - T::of(0.5) * dot(y, y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture<T> {
    components: Vec<GaussianComponent<T>>,
}

fn log_sum_exp<T: Real>(xs: impl Iterator<Item = T> + Clone) -> T {
    let max = xs.clone().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + xs.fold(T::zero(), |s, x| s + (x - max).exp()).ln()
}

impl<T: Real> GaussianMixture<T> {
    /// Weights must be positive and sum to 1 (within 1e-9).
    pub fn new(components: Vec<GaussianComponent<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Gmm("mixture needs at least one component".into()));
        }
        if components.iter().any(|c| !(c.weight > T::zero())) {
            return Err(Error::Gmm("component weights must be positive".into()));
        }
        let total = components.iter().fold(T::zero(), |s, c| s + c.weight);
        if (total - T::one()).abs() > T::of(1e-9) {
            return Err(Error::Gmm(format!("weights sum to {total}, not 1")));
        }
        Ok(GaussianMixture { components })
    }

    /// Single-component model.
    pub fn single(mean: Vec3<T>, covariance: Mat3<T>) -> Result<Self> {
        Self::new(vec![GaussianComponent::new(T::one(), mean, covariance)?])
    }

    pub fn components(&self) -> &[GaussianComponent<T>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn log_density(&self, x: Vec3<T>) -> T {
        log_sum_exp(self.components.iter().map(|c| c.weight.ln() + c.log_pdf(x)))
    }

    pub fn density(&self, x: Vec3<T>) -> T {
        self.log_density(x).exp()
    }

    /// Mean weighted log-likelihood `Σ w_n ln p(x_n) / Σ w_n`.
    pub fn mean_log_likelihood(&self, samples: &[(Vec3<T>, T)]) -> T {
        let (sum, total) = samples
            .iter()
            .fold((T::zero(), T::zero()), |(s, t), &(x, w)| {
                if w > T::zero() {
                    (s + w * self.log_density(x), t + w)
                } else {
                    (s, t)
                }
            });
        sum / total
    }
}

#[derive(Debug, Clone)]
pub struct GmmFit<T> {
    pub model: GaussianMixture<T>,
    /// Mean weighted log-likelihood of the initial model and after every EM
    /// iteration.
    pub log_likelihood: Vec<T>,
}

/// Weighted k-means++ seeding followed by hard assignment to the nearest
/// seed. Returns per-sample component indices.
fn seed_assignment<T: Real>(
    samples: &[(Vec3<T>, T)],
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let draw = |weights: &[f64], rng: &mut ChaCha8Rng| -> usize {
        let total: f64 = weights.iter().sum();
        let r = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if w > 0.0 && acc > r {
                return i;
            }
        }
        // rounding fallback: last sample with positive weight
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    };
    let sq = |a: Vec3<T>, b: Vec3<T>| {
        let d = sub(a, b);
        dot(d, d).as_f64()
    };
    let weights: Vec<f64> = samples.iter().map(|&(_, w)| w.as_f64().max(0.0)).collect();
    let mut centers = vec![samples[draw(&weights, rng)].0];
    let mut nearest: Vec<f64> = samples.iter().map(|&(x, _)| sq(x, centers[0])).collect();
    while centers.len() < m {
        let scores: Vec<f64> = weights.iter().zip(&nearest).map(|(w, d)| w * d).collect();
        if scores.iter().all(|&s| s <= 0.0) {
            break;
        }
        let c = samples[draw(&scores, rng)].0;
        for (d, &(x, _)) in nearest.iter_mut().zip(samples) {
            *d = d.min(sq(x, c));
        }
        centers.push(c);
    }
    samples
        .iter()
        .map(|&(x, _)| {
            (1..centers.len()).fold(0, |best, k| {
                if sq(x, centers[k]) < sq(x, centers[best]) {
                    k
                } else {
                    best
                }
            })
        })
        .collect()
}

/// M-step from soft responsibilities `resp[n][k]`. Components that receive
/// no weight are dropped.
fn maximize<T: Real>(
    samples: &[(Vec3<T>, T)],
    resp: &[Vec<T>],
    m: usize,
    eps_cov: T,
) -> Result<GaussianMixture<T>> {
    let total = samples.iter().fold(T::zero(), |s, &(_, w)| s + w);
    let mut components = Vec::with_capacity(m);
    for k in 0..m {
        let nk = samples
            .iter()
            .zip(resp)
            .fold(T::zero(), |s, (&(_, w), r)| s + w * r[k]);
        if !(nk > T::zero()) {
            continue;
        }
        let mut mean = [T::zero(); 3];
        for (&(x, w), r) in samples.iter().zip(resp) {
            for d in 0..3 {
                mean[d] += w * r[k] * x[d];
            }
        }
        mean = mean.map(|v| v / nk);
        let mut cov = zeros();
        for (&(x, w), r) in samples.iter().zip(resp) {
            let diff = sub(x, mean);
            let g = w * r[k];
            for i in 0..3 {
                for j in 0..3 {
                    cov[i][j] += g * diff[i] * diff[j];
                }
            }
        }
        for row in cov.iter_mut() {
            for v in row.iter_mut() {
                *v /= nk;
            }
        }
        components.push((nk / total, mean, clamp_eigenvalues(&cov, eps_cov)));
    }
    // renormalize so rounding never leaves the simplex
    let sum = components.iter().fold(T::zero(), |s, c| s + c.0);
    GaussianMixture::new(
        components
            .into_iter()
            .map(|(w, mu, cov)| GaussianComponent::new(w / sum, mu, cov))
            .collect::<Result<_>>()?,
    )
}

/// E-step: responsibilities and the mean weighted log-likelihood.
fn expect<T: Real>(model: &GaussianMixture<T>, samples: &[(Vec3<T>, T)]) -> (Vec<Vec<T>>, T) {
    let mut ll = T::zero();
    let mut total = T::zero();
    let resp = samples
        .iter()
        .map(|&(x, w)| {
            let logs: Vec<T> = model
                .components
                .iter()
                .map(|c| c.weight.ln() + c.log_pdf(x))
                .collect();
            let lse = log_sum_exp(logs.iter().copied());
            ll += w * lse;
            total += w;
            logs.into_iter().map(|l| (l - lse).exp()).collect()
        })
        .collect();
    (resp, ll / total)
}

/// Fits a mixture to weighted colour samples. Samples with non-positive
/// weight are ignored; the component count is reduced to the number of
/// distinct sample colours when that is smaller.
pub fn fit_gmm<T: Real>(samples: &[(Vec3<T>, T)], cfg: &GmmConfig) -> Result<GmmFit<T>> {
    if cfg.components == 0 || !(cfg.eps_cov > 0.0) {
        return Err(Error::Gmm("need components >= 1 and eps_cov > 0".into()));
    }
    let samples: Vec<(Vec3<T>, T)> = samples
        .iter()
        .copied()
        .filter(|&(x, w)| w > T::zero() && w.is_finite() && x.iter().all(|v| v.is_finite()))
        .collect();
    if samples.is_empty() {
        return Err(Error::Gmm("no samples with positive weight".into()));
    }
    let distinct: HashSet<[u64; 3]> = samples
        .iter()
        .map(|(x, _)| x.map(|v| v.as_f64().to_bits()))
        .collect();
    let m = cfg.components.min(distinct.len());
    let eps_cov = T::of(cfg.eps_cov);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hard = seed_assignment(&samples, m, &mut rng);
    let resp: Vec<Vec<T>> = hard
        .iter()
        .map(|&k| {
            (0..m)
                .map(|j| if j == k { T::one() } else { T::zero() })
                .collect()
        })
        .collect();
    let mut model = maximize(&samples, &resp, m, eps_cov)?;
    let (mut resp, mut ll) = expect(&model, &samples);
    let mut trace = vec![ll];
    for _ in 0..cfg.max_iters {
        let next = maximize(&samples, &resp, model.len(), eps_cov)?;
        let (next_resp, next_ll) = expect(&next, &samples);
        model = next;
        resp = next_resp;
        trace.push(next_ll);
        let gain = next_ll - ll;
        ll = next_ll;
        if gain.as_f64() < cfg.tol {
            break;
        }
    }
    Ok(GmmFit {
        model,
        log_likelihood: trace,
    })
}
