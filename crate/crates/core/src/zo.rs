//! Random-direction zeroth-order gradient estimation:
//!
//! `∇̂L(z) = d / (β·Q) · Σ_q [L(z + β·u_q) − L(z)] · u_q`
//!
//! with `u_q` drawn uniformly on the unit sphere. One estimate costs `Q + 1`
//! loss queries; `L(z)` is evaluated once and reused by every difference.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{QmoError, Result};
use crate::types::{norm, LatentVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Number of random directions `Q`.
    pub queries: usize,
    /// Smoothing radius `β`.
    pub beta: f64,
}

impl EstimatorConfig {
    pub fn new(queries: usize, beta: f64) -> Result<Self> {
        let cfg = EstimatorConfig { queries, beta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.queries == 0 {
            return Err(QmoError::Config("Q must be >= 1".into()));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(QmoError::Config(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }
}

/// `Q` unit vectors in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    dim: usize,
    directions: Vec<Vec<f64>>,
}

impl DirectionSet {
    /// Wraps caller-supplied directions, normalizing each one.
    pub fn from_vectors(directions: Vec<Vec<f64>>) -> Result<Self> {
        let dim = directions.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(QmoError::Config("direction set needs Q >= 1 and d >= 1".into()));
        }
        let directions = directions
            .into_iter()
            .map(|v| {
                if v.len() != dim {
                    return Err(QmoError::Dimension { expected: dim, got: v.len() });
                }
                let n = norm(&v);
                if !(n > 0.0 && n.is_finite()) {
                    return Err(QmoError::Domain("direction has zero or non-finite norm".into()));
                }
                Ok(v.into_iter().map(|x| x / n).collect())
            })
            .collect::<Result<_>>()?;
        Ok(DirectionSet { dim, directions })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.directions.iter().map(Vec::as_slice)
    }
}

/// Normalized isotropic Gaussian draws: i.i.d. uniform on the sphere.
pub fn sample_directions<R: Rng + ?Sized>(d: usize, q: usize, rng: &mut R) -> Result<DirectionSet> {
    if d == 0 || q == 0 {
        return Err(QmoError::Config(format!(
            "direction sampling needs d >= 1 and Q >= 1 (got d = {d}, Q = {q})"
        )));
    }
    let directions = (0..q).map(|_| unit_vector(d, rng)).collect();
    Ok(DirectionSet { dim: d, directions })
}

pub(crate) fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = norm(&g);
        if n > 0.0 {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `z + β·u_q` for every direction, in direction order.
pub fn perturbed_points(z: &LatentVector, beta: f64, dirs: &DirectionSet) -> Result<Vec<LatentVector>> {
    z.check_dim(dirs.dim)?;
    dirs.iter()
        .map(|u| LatentVector::new(z.iter().zip(u).map(|(a, b)| a + beta * b).collect()))
        .collect()
}

/// Reduces precomputed loss values into the estimate. `perturbed[q]` is the
/// loss at `z + β·u_q`. Accumulates in ascending `q`.
pub fn combine(base: f64, perturbed: &[f64], cfg: &EstimatorConfig, dirs: &DirectionSet) -> Result<Vec<f64>> {
    cfg.validate()?;
    if dirs.len() != cfg.queries || perturbed.len() != cfg.queries {
        return Err(QmoError::Config(format!(
            "estimator expects Q = {} directions and values, got {} and {}",
            cfg.queries,
            dirs.len(),
            perturbed.len()
        )));
    }
    if !base.is_finite() {
        return Err(QmoError::NonFiniteLoss { query: 0, value: base });
    }
    let d = dirs.dim;
    let mut grad = vec![0.0; d];
    for (q, (u, &value)) in dirs.iter().zip(perturbed).enumerate() {
        if !value.is_finite() {
            return Err(QmoError::NonFiniteLoss { query: q + 1, value });
        }
        let diff = value - base;
        for (g, ui) in grad.iter_mut().zip(u) {
            *g += diff * ui;
        }
    }
    let scale = d as f64 / (cfg.beta * cfg.queries as f64);
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok(grad)
}

/// Estimate with a batched loss: `loss_at` receives `[z, z + β·u_1, ..., z + β·u_Q]`
/// and must return the `Q + 1` losses in that order.
pub fn estimate_gradient_batched<F>(
    loss_at: F,
    z: &LatentVector,
    cfg: &EstimatorConfig,
    dirs: &DirectionSet,
) -> Result<Vec<f64>>
where
    F: FnOnce(&[&LatentVector]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let points = perturbed_points(z, cfg.beta, dirs)?;
    let mut batch: Vec<&LatentVector> = Vec::with_capacity(points.len() + 1);
    batch.push(z);
    batch.extend(points.iter());
    let values = loss_at(&batch)?;
    if values.len() != batch.len() {
        return Err(QmoError::Config(format!(
            "loss returned {} values for {} queries",
            values.len(),
            batch.len()
        )));
    }
    combine(values[0], &values[1..], cfg, dirs)
}

/// Estimate with a pointwise loss; calls `loss_at` exactly `Q + 1` times.
pub fn estimate_gradient<F>(mut loss_at: F, z: &LatentVector, cfg: &EstimatorConfig, dirs: &DirectionSet) -> Result<Vec<f64>>
where
    F: FnMut(&LatentVector) -> Result<f64>,
{
    estimate_gradient_batched(|pts| pts.iter().map(|p| loss_at(p)).collect(), z, cfg, dirs)
}
