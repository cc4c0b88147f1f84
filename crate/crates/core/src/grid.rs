//! Tensor grids on `[r_lo, r_hi] × S¹` and scalar fields sampled on them.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::WarpedSurface;

/// Node-centred tensor grid: `nr` radial nodes including both boundary
/// circles, `ntheta` equispaced angular nodes (`ntheta = 1` means
/// rotationally symmetric data).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    nr: usize,
    ntheta: usize,
    r_lo: f64,
    r_hi: f64,
}

/// Index pair of a grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Node {
    pub ir: usize,
    pub itheta: usize,
}

impl Node {
    pub const fn new(ir: usize, itheta: usize) -> Self {
        Self { ir, itheta }
    }
}

pub const MIN_RADIAL_NODES: usize = 8;

impl Grid {
    pub fn new(surface: &WarpedSurface, nr: usize, ntheta: usize) -> Result<Self> {
        Self::on_interval(surface.r_lo(), surface.r_hi(), nr, ntheta)
    }

    pub fn on_interval(r_lo: f64, r_hi: f64, nr: usize, ntheta: usize) -> Result<Self> {
        if nr < MIN_RADIAL_NODES {
            return Err(Error::InvalidGrid(format!("need at least {MIN_RADIAL_NODES} radial nodes, got {nr}")));
        }
        if ntheta == 0 || (ntheta > 1 && !ntheta.is_power_of_two()) {
            return Err(Error::InvalidGrid(format!("angular node count {ntheta} must be 1 or a power of two")));
        }
        if !(r_hi > r_lo) {
            return Err(Error::InvalidGrid(format!("empty radial interval [{r_lo}, {r_hi}]")));
        }
        Ok(Self { nr, ntheta, r_lo, r_hi })
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn ntheta(&self) -> usize {
        self.ntheta
    }

    pub fn r_lo(&self) -> f64 {
        self.r_lo
    }

    pub fn r_hi(&self) -> f64 {
        self.r_hi
    }

    pub fn len(&self) -> usize {
        self.nr * self.ntheta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hr(&self) -> f64 {
        (self.r_hi - self.r_lo) / (self.nr - 1) as f64
    }

    pub fn htheta(&self) -> f64 {
        2.0 * PI / self.ntheta as f64
    }

    pub fn r(&self, ir: usize) -> f64 {
        if ir + 1 == self.nr {
            self.r_hi
        } else {
            self.r_lo + ir as f64 * self.hr()
        }
    }

    pub fn theta(&self, itheta: usize) -> f64 {
        itheta as f64 * self.htheta()
    }

    pub fn index(&self, ir: usize, itheta: usize) -> usize {
        ir * self.ntheta + itheta
    }

    pub fn node_of(&self, index: usize) -> Node {
        Node::new(index / self.ntheta, index % self.ntheta)
    }

    /// Nearest node to `(r, θ)`.
    pub fn nearest(&self, r: f64, theta: f64) -> Node {
        let ir = libm::round((r - self.r_lo) / self.hr()).clamp(0.0, (self.nr - 1) as f64) as usize;
        let mut t = theta % (2.0 * PI);
        if t < 0.0 {
            t += 2.0 * PI;
        }
        let it = (libm::round(t / self.htheta()) as usize) % self.ntheta;
        Node::new(ir, it)
    }

    /// Trapezoidal weight of radial node `ir` (half cells at the boundary).
    pub fn radial_weight(&self, ir: usize) -> f64 {
        if ir == 0 || ir + 1 == self.nr {
            0.5 * self.hr()
        } else {
            self.hr()
        }
    }

    /// Quadrature weights of the area form `f(r) dr dθ` at each radial node
    /// (per angular node).
    pub fn area_weights(&self, surface: &WarpedSurface) -> Vec<f64> {
        (0..self.nr)
            .map(|i| self.radial_weight(i) * surface.f(self.r(i)) * self.htheta())
            .collect()
    }

    /// True when the grid spans the surface's radial interval.
    pub fn matches(&self, surface: &WarpedSurface) -> bool {
        let tol = 1e-12 * (1.0 + surface.width());
        (self.r_lo - surface.r_lo()).abs() <= tol && (self.r_hi - surface.r_hi()).abs() <= tol
    }

    /// Same node counts, lengths multiplied by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        Self { r_lo: self.r_lo * lambda, r_hi: self.r_hi * lambda, ..*self }
    }

    /// Same interval, `factor` times the radial and angular resolution.
    pub fn refined(&self, factor: usize) -> Self {
        let ntheta = if self.ntheta == 1 { 1 } else { self.ntheta * factor };
        Self { nr: (self.nr - 1) * factor + 1, ntheta, ..*self }
    }
}

/// Physical units of a field, carried for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Units {
    Dimensionless,
    Length,
    PerLength,
    PerLengthSquared,
    /// Solutions of the heat equation: amount per unit area.
    Density,
}

/// Scalar field on a [`Grid`], stored radial-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldOnGrid {
    grid: Grid,
    units: Units,
    values: Vec<f64>,
}

impl FieldOnGrid {
    pub fn from_fn(grid: Grid, units: Units, mut value: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nr() {
            for j in 0..grid.ntheta() {
                values.push(value(i, j));
            }
        }
        Self { grid, units, values }
    }

    pub fn from_values(grid: Grid, units: Units, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} values for a grid of {} nodes", values.len(), grid.len())));
        }
        if let Some(v) = values.iter().find(|v| v.is_nan()) {
            return Err(Error::Numeric(format!("field contains {v}")));
        }
        Ok(Self { grid, units, values })
    }

    pub fn constant(grid: Grid, units: Units, value: f64) -> Self {
        Self { grid, units, values: alloc::vec![value; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, ir: usize, itheta: usize) -> f64 {
        self.values[self.grid.index(ir, itheta)]
    }

    pub fn at(&self, node: Node) -> f64 {
        self.get(node.ir, node.itheta)
    }

    /// Values along the radial line at angular index `itheta`.
    pub fn radial_line(&self, itheta: usize) -> Vec<f64> {
        (0..self.grid.nr()).map(|i| self.get(i, itheta)).collect()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Node of the smallest value (first in storage order on ties).
    pub fn argmin(&self) -> Node {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = k;
            }
        }
        self.grid.node_of(best)
    }

    pub fn map(&self, units: Units, mut op: impl FnMut(f64) -> f64) -> Self {
        Self { grid: self.grid, units, values: self.values.iter().map(|v| op(*v)).collect() }
    }

    /// `∫ field dA` with the trapezoidal area weights of the grid.
    pub fn integrate(&self, surface: &WarpedSurface) -> f64 {
        let w = self.grid.area_weights(surface);
        let nt = self.grid.ntheta();
        let mut acc = 0.0;
        for (i, wi) in w.iter().enumerate() {
            let row: f64 = self.values[i * nt..(i + 1) * nt].iter().sum();
            acc += wi * row;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Warp;

    #[test]
    fn grid_validation() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        assert!(Grid::new(&s, 7, 4).is_err());
        assert!(Grid::new(&s, 8, 0).is_err());
        assert!(Grid::new(&s, 8, 6).is_err());
        assert!(Grid::new(&s, 8, 1).is_ok());
        let g = Grid::new(&s, 11, 16).unwrap();
        assert_eq!(g.len(), 176);
        assert_eq!(g.r(10), 1.0);
        assert!((g.hr() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn flat_area_is_exact() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 9, 8).unwrap();
        let one = FieldOnGrid::constant(g, Units::Dimensionless, 1.0);
        assert!((one.integrate(&s) - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_area_converges() {
        let s = WarpedSurface::new(0.0, 1.0, Warp::Cosh { offset: 1.0, amplitude: 0.05, rate: 1.0, center: 0.5 }).unwrap();
        let g = Grid::new(&s, 129, 1).unwrap();
        let one = FieldOnGrid::constant(g, Units::Dimensionless, 1.0);
        assert!((one.integrate(&s) - s.area()).abs() < 1e-5);
    }

    #[test]
    fn rejects_nan_values() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 8, 1).unwrap();
        let mut v = alloc::vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(FieldOnGrid::from_values(g, Units::Length, v).is_err());
    }
}
