//! Two-dimensional slices of the latent space around a start point.
//!
//! Principal mode spans `v_x = z* − z0` and a random unit `v_y ⟂ v_x` scaled
//! by `‖z*‖`, so cell `(0, 0)` is `z0` and cell `(1, 0)` is `z*`. Random mode
//! spans two random unit vectors, both scaled by `‖z0‖`.
//!
//! Trajectories are projected by least squares onto the plane, expressed in
//! the same scaled basis, which keeps both anchors fixed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QmoError, Result};
use crate::loss::ObjectiveConfig;
use crate::oracle::OracleSuite;
use crate::types::{dot, norm, LatentVector};
use crate::zo::unit_vector;

/// Recorded in landscape metadata.
pub const PROJECTION_CONVENTION: &str =
    "least-squares projection of (z - z0) onto span(basis_x, basis_y), coordinates in the scaled grid basis";

pub const DEFAULT_RESOLUTION: usize = 41;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) || points == 0 {
            return Err(QmoError::Config(format!(
                "invalid grid axis [{lo}, {hi}] with {points} points"
            )));
        }
        Ok(Axis { lo, hi, points })
    }

    /// Evenly spaced; endpoints and any exactly representable interior
    /// anchors land on exact values.
    pub fn value(&self, i: usize) -> f64 {
        if self.points == 1 {
            return self.lo;
        }
        let n = (self.points - 1) as f64;
        (self.lo * (n - i as f64) + self.hi * i as f64) / n
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    Principal,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGrid {
    pub mode: GridMode,
    pub origin: LatentVector,
    /// Unit-free directions as sampled (`v_x`, `v_y`).
    pub v_x: Vec<f64>,
    pub v_y: Vec<f64>,
    /// Scaled basis actually used for cells.
    pub basis_x: Vec<f64>,
    pub basis_y: Vec<f64>,
    pub x_axis: Axis,
    pub y_axis: Axis,
}

pub fn principal_grid<R: Rng + ?Sized>(
    z0: &LatentVector,
    z_star: &LatentVector,
    x_axis: Axis,
    y_axis: Axis,
    rng: &mut R,
) -> Result<LandscapeGrid> {
    z_star.check_dim(z0.dim())?;
    let v_x: Vec<f64> = z_star.iter().zip(z0.iter()).map(|(a, b)| a - b).collect();
    let vx_norm = norm(&v_x);
    if vx_norm == 0.0 {
        return Err(QmoError::Domain("principal direction is zero: z* equals z0".into()));
    }
    if z0.dim() < 2 {
        return Err(QmoError::Domain("principal grid needs d >= 2".into()));
    }
    let unit_x: Vec<f64> = v_x.iter().map(|x| x / vx_norm).collect();
    let v_y = loop {
        let mut r = unit_vector(z0.dim(), rng);
        // two Gram-Schmidt passes
        for _ in 0..2 {
            let c = dot(&r, &unit_x);
            r.iter_mut().zip(&unit_x).for_each(|(ri, ui)| *ri -= c * ui);
        }
        let n = norm(&r);
        if n > 1e-6 {
            break r.into_iter().map(|x| x / n).collect::<Vec<f64>>();
        }
    };
    let scale_y = z_star.norm();
    Ok(LandscapeGrid {
        mode: GridMode::Principal,
        origin: z0.clone(),
        basis_x: v_x.clone(),
        basis_y: v_y.iter().map(|y| y * scale_y).collect(),
        v_x,
        v_y,
        x_axis,
        y_axis,
    })
}

pub fn random_grid<R: Rng + ?Sized>(z0: &LatentVector, x_axis: Axis, y_axis: Axis, rng: &mut R) -> Result<LandscapeGrid> {
    let scale = z0.norm();
    if scale == 0.0 {
        return Err(QmoError::Domain("random grid needs a nonzero z0 to set its scale".into()));
    }
    let v_x = unit_vector(z0.dim(), rng);
    let v_y = unit_vector(z0.dim(), rng);
    Ok(LandscapeGrid {
        mode: GridMode::Random,
        origin: z0.clone(),
        basis_x: v_x.iter().map(|v| v * scale).collect(),
        basis_y: v_y.iter().map(|v| v * scale).collect(),
        v_x,
        v_y,
        x_axis,
        y_axis,
    })
}

impl LandscapeGrid {
    pub fn default_axes(mode: GridMode) -> (Axis, Axis) {
        let n = DEFAULT_RESOLUTION;
        match mode {
            GridMode::Principal => (Axis { lo: -0.5, hi: 1.5, points: n }, Axis { lo: -2.0, hi: 2.0, points: n }),
            GridMode::Random => (Axis { lo: -1.6, hi: 1.6, points: n }, Axis { lo: -1.6, hi: 1.6, points: n }),
        }
    }

    /// `z0 + x·basis_x + y·basis_y`; coordinates with a zero offset are
    /// copied from `z0` unchanged.
    pub fn point(&self, x: f64, y: f64) -> Result<LatentVector> {
        let coords = self
            .origin
            .iter()
            .zip(self.basis_x.iter().zip(&self.basis_y))
            .map(|(&o, (&bx, &by))| {
                let offset = x * bx + y * by;
                if offset == 0.0 {
                    o
                } else {
                    o + offset
                }
            })
            .collect();
        LatentVector::new(coords)
    }

    /// `(x, y)` for every cell, x-major.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        let ys = self.y_axis.values();
        self.x_axis
            .values()
            .into_iter()
            .flat_map(|x| ys.iter().map(move |&y| (x, y)))
            .collect()
    }

    pub fn project(&self, z: &LatentVector) -> Result<(f64, f64)> {
        z.check_dim(self.origin.dim())?;
        let r: Vec<f64> = z.iter().zip(self.origin.iter()).map(|(a, b)| a - b).collect();
        let (a, b) = (&self.basis_x, &self.basis_y);
        let (aa, ab, bb) = (dot(a, a), dot(a, b), dot(b, b));
        let (ar, br) = (dot(a, &r), dot(b, &r));
        let det = aa * bb - ab * ab;
        if !(det.abs() > f64::EPSILON * aa * bb) {
            return Err(QmoError::Domain("grid basis vectors are (nearly) parallel".into()));
        }
        Ok(((bb * ar - ab * br) / det, (aa * br - ab * ar) / det))
    }
}

pub fn project_trajectory(trajectory: &[LatentVector], grid: &LandscapeGrid) -> Result<Vec<(f64, f64)>> {
    trajectory.iter().map(|z| grid.project(z)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub x: f64,
    pub y: f64,
    pub similarities: Vec<f64>,
    pub properties: Vec<f64>,
    pub valid: bool,
}

/// Decodes each cell exactly once and scores it under `objective`.
pub fn evaluate_grid(grid: &LandscapeGrid, objective: &ObjectiveConfig, suite: &OracleSuite) -> Result<Vec<GridCell>> {
    let cells = grid.cells();
    let points = cells
        .iter()
        .map(|&(x, y)| grid.point(x, y))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&LatentVector> = points.iter().collect();
    let assessed = objective.assess_batch(&refs, suite)?;
    Ok(cells
        .into_iter()
        .zip(assessed)
        .map(|((x, y), a)| GridCell {
            x,
            y,
            similarities: a.similarities,
            properties: a.properties,
            valid: a.valid,
        })
        .collect())
}
