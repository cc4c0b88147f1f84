//! Geodesic ball volumes `V_M(x, s) = |B(x, s) ∩ M|` by area-form quadrature.
//!
//! Each node carries its trapezoidal share of `f(r) dr dθ`. A node's cell is
//! counted fractionally: the distance is linearised across the cell and the
//! exact area of the cell below the level `s` is taken, which keeps the
//! volume continuous and monotone in the radius.

use alloc::format;
use alloc::vec::Vec;

use libm::sqrt;

use crate::eikonal::distance_field;
use crate::error::{Error, Result};
use crate::geometry::WarpedSurface;
use crate::grid::{FieldOnGrid, Grid, Node};

/// Area of a ball, with `saturated` set when the radius reaches past every
/// node (the ball is all of `M`).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BallVolume {
    pub area: f64,
    pub saturated: bool,
}

/// Distance field from one centre plus the per-node data needed to measure
/// balls of any radius around it.
#[derive(Debug, Clone)]
pub struct BallMeasure {
    center: Node,
    distance: FieldOnGrid,
    weight: Vec<f64>,
    /// Linearised distance at each cell centre.
    cell_distance: Vec<f64>,
    /// `|∇d|` used to convert level offsets into lengths.
    slope: Vec<f64>,
    /// Projected cell extents along the gradient direction.
    extent: Vec<(f64, f64)>,
    total_area: f64,
    eccentricity: f64,
}

/// Fraction of a box whose projection onto the level-set normal spans
/// `[0, u] ⊕ [0, v]` lying at projected coordinate `≤ tau`.
fn box_fraction(tau: f64, u: f64, v: f64) -> f64 {
    let span = u + v;
    if tau <= 0.0 {
        return 0.0;
    }
    if tau >= span {
        return 1.0;
    }
    if u * v <= 1e-12 * span * span {
        return tau / span;
    }
    let ramp = |x: f64| if x > 0.0 { x * x } else { 0.0 };
    ((ramp(tau) - ramp(tau - u) - ramp(tau - v) + ramp(tau - span)) / (2.0 * u * v)).clamp(0.0, 1.0)
}

impl BallMeasure {
    pub fn new(surface: &WarpedSurface, grid: &Grid, center: Node) -> Result<Self> {
        if grid.ntheta() < 4 {
            return Err(Error::InvalidGrid(format!(
                "geodesic balls need an angular resolution of at least 4 nodes, got {}",
                grid.ntheta()
            )));
        }
        let distance = distance_field(surface, grid, center)?;
        Ok(Self::from_distance(surface, distance, center))
    }

    pub fn from_distance(surface: &WarpedSurface, distance: FieldOnGrid, center: Node) -> Self {
        let grid = *distance.grid();
        let nr = grid.nr();
        let nt = grid.ntheta();
        let hr = grid.hr();
        let hth = grid.htheta();
        let d = distance.values();
        let area_w = grid.area_weights(surface);
        let mut weight = Vec::with_capacity(grid.len());
        let mut cell_distance = Vec::with_capacity(grid.len());
        let mut slope = Vec::with_capacity(grid.len());
        let mut extent = Vec::with_capacity(grid.len());
        for i in 0..nr {
            let fi = surface.f(grid.r(i));
            let radial_extent = grid.radial_weight(i);
            let offset = if i == 0 {
                0.25 * hr
            } else if i + 1 == nr {
                -0.25 * hr
            } else {
                0.0
            };
            for j in 0..nt {
                let k = i * nt + j;
                let gr = if i == 0 {
                    (d[k + nt] - d[k]) / hr
                } else if i + 1 == nr {
                    (d[k] - d[k - nt]) / hr
                } else {
                    (d[k + nt] - d[k - nt]) / (2.0 * hr)
                };
                let jm = if j == 0 { nt - 1 } else { j - 1 };
                let jp = if j + 1 == nt { 0 } else { j + 1 };
                let gt = (d[i * nt + jp] - d[i * nt + jm]) / (2.0 * fi * hth);
                let mut norm = sqrt(gr * gr + gt * gt);
                let (n1, n2) = if norm < 0.5 {
                    norm = 1.0;
                    (core::f64::consts::FRAC_1_SQRT_2, core::f64::consts::FRAC_1_SQRT_2)
                } else {
                    ((gr / norm).abs(), (gt / norm).abs())
                };
                weight.push(area_w[i]);
                cell_distance.push(d[k] + gr * offset);
                slope.push(norm);
                extent.push((n1 * radial_extent, n2 * fi * hth));
            }
        }
        let total_area = weight.iter().sum();
        let eccentricity = distance.max();
        Self { center, distance, weight, cell_distance, slope, extent, total_area, eccentricity }
    }

    pub fn center(&self) -> Node {
        self.center
    }

    pub fn distance(&self) -> &FieldOnGrid {
        &self.distance
    }

    /// Largest distance from the centre to any node.
    pub fn eccentricity(&self) -> f64 {
        self.eccentricity
    }

    pub fn total_area(&self) -> f64 {
        self.total_area
    }

    /// Fraction of node `k`'s cell inside the ball of radius `radius`.
    fn fraction(&self, k: usize, radius: f64) -> f64 {
        let (u, v) = self.extent[k];
        let tau = (radius - self.cell_distance[k]) / self.slope[k] + 0.5 * (u + v);
        box_fraction(tau, u, v)
    }

    pub fn volume(&self, radius: f64) -> BallVolume {
        if radius >= self.eccentricity {
            return BallVolume { area: self.total_area, saturated: true };
        }
        let area = (0..self.weight.len())
            .map(|k| self.weight[k] * self.fraction(k, radius))
            .sum();
        BallVolume { area, saturated: false }
    }

    /// `∫_{B(x, radius)} values dA` for a field on the same grid.
    pub fn integral(&self, values: &[f64], radius: f64) -> f64 {
        if radius >= self.eccentricity {
            return self.weight.iter().zip(values).map(|(w, v)| w * v).sum();
        }
        (0..self.weight.len())
            .map(|k| self.weight[k] * values[k] * self.fraction(k, radius))
            .sum()
    }
}

/// Area of the geodesic ball of `radius` around the node `center`.
pub fn ball_volume(surface: &WarpedSurface, grid: &Grid, center: Node, radius: f64) -> Result<BallVolume> {
    if !(radius > 0.0) {
        return Err(crate::error::domain("ball radius", format!("{radius} must be positive")));
    }
    Ok(BallMeasure::new(surface, grid, center)?.volume(radius))
}

/// Stride of the radial sublattice of centres used for suprema over centres.
pub const CENTER_STRIDE: usize = 4;

/// Radial indices of the sampled centres: every `stride`-th node plus the last.
pub fn center_rows(grid: &Grid, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut rows: Vec<usize> = (0..grid.nr()).step_by(stride).collect();
    if rows.last() != Some(&(grid.nr() - 1)) {
        rows.push(grid.nr() - 1);
    }
    rows
}

/// Diameter of the surface, as the largest eccentricity over centres on the
/// radial sublattice at `θ = 0` (rotational symmetry covers every angle).
pub fn diameter(surface: &WarpedSurface, grid: &Grid) -> Result<f64> {
    let mut diam = 0.0f64;
    for i in center_rows(grid, CENTER_STRIDE) {
        diam = diam.max(distance_field(surface, grid, Node::new(i, 0))?.max());
    }
    Ok(diam)
}
