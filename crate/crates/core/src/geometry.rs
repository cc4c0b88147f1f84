//! Warped-product surfaces `dr² + f(r)² dθ²` on `[r_lo, r_hi] × S¹`.
//!
//! Radial curves are unit-speed geodesics meeting both boundary circles
//! orthogonally, so the distance to the boundary, the Gauss curvature
//! `-f''/f` and the boundary second fundamental forms all have closed forms
//! in terms of the warp profile.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cosh, exp, sin, sinh, cos};

use crate::error::{domain, Error, Result};
use crate::grid::{FieldOnGrid, Grid, Units};
use crate::report::{Location, Provenance, VerifyReport};
use crate::tridiag;

/// Warp profile `f(r)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "snake_case"))]
pub enum Warp {
    /// `f ≡ value`: a flat cylinder.
    Constant { value: f64 },
    /// `f = offset + amplitude·cosh(rate·(r − center))`.
    Cosh { offset: f64, amplitude: f64, rate: f64, center: f64 },
    /// `f = amplitude·sin(rate·r + phase)`.
    Sin { amplitude: f64, rate: f64, phase: f64 },
    /// `f = amplitude·exp(rate·r)`.
    Exponential { amplitude: f64, rate: f64 },
    /// `f = offset + slope·r`; `f(r) = r` is the flat plane in polar coordinates.
    Linear { offset: f64, slope: f64 },
    /// `f = base + amplitude·b((r − center)/width)` with the smooth bump
    /// `b(s) = exp(1 − 1/(1 − s²))` on `|s| < 1`, so `b(0) = 1`.
    Bump { base: f64, amplitude: f64, center: f64, width: f64 },
    /// Uniformly spaced samples joined by a cubic spline.
    Sampled(SampledProfile),
}

/// Cubic-spline interpolant of uniformly spaced warp samples.
///
/// End second derivatives are pinned to second-order one-sided differences of
/// the first and last four samples, which keeps the curvature of a smooth
/// profile close to its true value near the boundary.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "SampledSpec", into = "SampledSpec"))]
pub struct SampledProfile {
    r0: f64,
    spacing: f64,
    values: Vec<f64>,
    second: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct SampledSpec {
    r0: f64,
    spacing: f64,
    values: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<SampledSpec> for SampledProfile {
    type Error = Error;
    fn try_from(s: SampledSpec) -> Result<Self> {
        SampledProfile::new(s.r0, s.spacing, s.values)
    }
}

#[cfg(feature = "serde")]
impl From<SampledProfile> for SampledSpec {
    fn from(p: SampledProfile) -> Self {
        SampledSpec { r0: p.r0, spacing: p.spacing, values: p.values }
    }
}

impl SampledProfile {
    pub fn new(r0: f64, spacing: f64, values: Vec<f64>) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() || !r0.is_finite() {
            return Err(Error::InvalidSurface(format!("sample spacing {spacing} must be positive")));
        }
        let n = values.len();
        if n < 4 {
            return Err(Error::InvalidSurface(format!("need at least 4 warp samples, got {n}")));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidSurface(format!("non-positive warp sample {v}")));
        }
        let h2 = spacing * spacing;
        let m_first = (2.0 * values[0] - 5.0 * values[1] + 4.0 * values[2] - values[3]) / h2;
        let m_last = (2.0 * values[n - 1] - 5.0 * values[n - 2] + 4.0 * values[n - 3] - values[n - 4]) / h2;
        // Interior moments: M[i-1] + 4 M[i] + M[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]) / h²
        let m = n - 2;
        let lower = vec![1.0; m.saturating_sub(1)];
        let upper = vec![1.0; m.saturating_sub(1)];
        let diag = vec![4.0; m];
        let mut rhs: Vec<f64> = (1..n - 1)
            .map(|i| 6.0 * (values[i + 1] - 2.0 * values[i] + values[i - 1]) / h2)
            .collect();
        rhs[0] -= m_first;
        rhs[m - 1] -= m_last;
        let interior = tridiag::solve(&lower, &diag, &upper, &rhs)?;
        let mut second = Vec::with_capacity(n);
        second.push(m_first);
        second.extend(interior);
        second.push(m_last);
        Ok(Self { r0, spacing, values, second })
    }

    pub fn r_range(&self) -> (f64, f64) {
        (self.r0, self.r0 + self.spacing * (self.values.len() - 1) as f64)
    }

    pub fn samples(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    fn eval(&self, r: f64) -> [f64; 3] {
        let n = self.values.len();
        let h = self.spacing;
        let x = (r - self.r0) / h;
        let k = if x <= 0.0 { 0 } else { (x as usize).min(n - 2) };
        let a = (self.r0 + (k + 1) as f64 * h - r) / h;
        let b = 1.0 - a;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.second[k], self.second[k + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let first = (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let second = a * m0 + b * m1;
        [value, first, second]
    }

    fn scaled(&self, lambda: f64) -> Self {
        Self {
            r0: self.r0 * lambda,
            spacing: self.spacing * lambda,
            values: self.values.iter().map(|v| v * lambda).collect(),
            second: self.second.iter().map(|m| m / lambda).collect(),
        }
    }
}

fn bump_parts(s: f64) -> [f64; 3] {
    if s.abs() >= 1.0 {
        return [0.0; 3];
    }
    let q = 1.0 - s * s;
    let b = exp(1.0 - 1.0 / q);
    let g1 = -2.0 * s / (q * q);
    let g2 = (-2.0 - 6.0 * s * s) / (q * q * q);
    [b, b * g1, b * (g1 * g1 + g2)]
}

impl Warp {
    /// `[f, f', f'']` at `r`.
    pub fn eval(&self, r: f64) -> [f64; 3] {
        match self {
            Warp::Constant { value } => [*value, 0.0, 0.0],
            Warp::Cosh { offset, amplitude, rate, center } => {
                let x = rate * (r - center);
                [
                    offset + amplitude * cosh(x),
                    amplitude * rate * sinh(x),
                    amplitude * rate * rate * cosh(x),
                ]
            }
            Warp::Sin { amplitude, rate, phase } => {
                let x = rate * r + phase;
                [amplitude * sin(x), amplitude * rate * cos(x), -amplitude * rate * rate * sin(x)]
            }
            Warp::Exponential { amplitude, rate } => {
                let e = amplitude * exp(rate * r);
                [e, rate * e, rate * rate * e]
            }
            Warp::Linear { offset, slope } => [offset + slope * r, *slope, 0.0],
            Warp::Bump { base, amplitude, center, width } => {
                let [b, b1, b2] = bump_parts((r - center) / width);
                [base + amplitude * b, amplitude * b1 / width, amplitude * b2 / (width * width)]
            }
            Warp::Sampled(p) => p.eval(r),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r)[0]
    }

    /// The profile of the same surface with every length multiplied by `lambda`:
    /// `f_λ(r) = λ f(r/λ)`.
    pub fn rescaled(&self, lambda: f64) -> Warp {
        match self {
            Warp::Constant { value } => Warp::Constant { value: value * lambda },
            Warp::Cosh { offset, amplitude, rate, center } => Warp::Cosh {
                offset: offset * lambda,
                amplitude: amplitude * lambda,
                rate: rate / lambda,
                center: center * lambda,
            },
            Warp::Sin { amplitude, rate, phase } => {
                Warp::Sin { amplitude: amplitude * lambda, rate: rate / lambda, phase: *phase }
            }
            Warp::Exponential { amplitude, rate } => {
                Warp::Exponential { amplitude: amplitude * lambda, rate: rate / lambda }
            }
            Warp::Linear { offset, slope } => Warp::Linear { offset: offset * lambda, slope: *slope },
            Warp::Bump { base, amplitude, center, width } => Warp::Bump {
                base: base * lambda,
                amplitude: amplitude * lambda,
                center: center * lambda,
                width: width * lambda,
            },
            Warp::Sampled(p) => Warp::Sampled(p.scaled(lambda)),
        }
    }
}

/// Second fundamental forms of the two boundary circles, with the sign
/// convention that makes the boundary of a Euclidean disk convex.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryCurvature {
    pub ii_lo: f64,
    pub ii_hi: f64,
    /// Convexity defect `max(0, −II_lo, −II_hi)`.
    pub h: f64,
}

/// A compact warped surface with two boundary circles at `r_lo` and `r_hi`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "SurfaceSpec", into = "SurfaceSpec"))]
pub struct WarpedSurface {
    r_lo: f64,
    r_hi: f64,
    warp: Warp,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct SurfaceSpec {
    r_lo: f64,
    r_hi: f64,
    warp: Warp,
}

#[cfg(feature = "serde")]
impl TryFrom<SurfaceSpec> for WarpedSurface {
    type Error = Error;
    fn try_from(s: SurfaceSpec) -> Result<Self> {
        WarpedSurface::new(s.r_lo, s.r_hi, s.warp)
    }
}

#[cfg(feature = "serde")]
impl From<WarpedSurface> for SurfaceSpec {
    fn from(s: WarpedSurface) -> Self {
        SurfaceSpec { r_lo: s.r_lo, r_hi: s.r_hi, warp: s.warp }
    }
}

/// Density of the positivity check on analytic profiles.
const POSITIVITY_SAMPLES: usize = 4096;

impl WarpedSurface {
    pub fn new(r_lo: f64, r_hi: f64, warp: Warp) -> Result<Self> {
        if !r_lo.is_finite() || !r_hi.is_finite() || !(r_hi > r_lo) {
            return Err(Error::InvalidSurface(format!("need r_lo < r_hi, got [{r_lo}, {r_hi}]")));
        }
        if let Warp::Sampled(p) = &warp {
            let (a, b) = p.r_range();
            let slack = 1e-9 * (b - a);
            if r_lo < a - slack || r_hi > b + slack {
                return Err(Error::InvalidSurface(format!(
                    "samples cover [{a}, {b}] but the surface spans [{r_lo}, {r_hi}]"
                )));
            }
        }
        if let Warp::Bump { width, .. } = &warp {
            if !(*width > 0.0) {
                return Err(Error::InvalidSurface(format!("bump width {width} must be positive")));
            }
        }
        for k in 0..=POSITIVITY_SAMPLES {
            let r = r_lo + (r_hi - r_lo) * k as f64 / POSITIVITY_SAMPLES as f64;
            let [f, f1, f2] = warp.eval(r);
            if !(f > 0.0) || !f.is_finite() || !f1.is_finite() || !f2.is_finite() {
                return Err(Error::InvalidSurface(format!("warp f({r}) = {f} is not positive")));
            }
        }
        Ok(Self { r_lo, r_hi, warp })
    }

    /// Flat cylinder of unit girth-radius on `[0, length]`.
    pub fn flat_cylinder(length: f64) -> Result<Self> {
        Self::new(0.0, length, Warp::Constant { value: 1.0 })
    }

    pub fn r_lo(&self) -> f64 {
        self.r_lo
    }

    pub fn r_hi(&self) -> f64 {
        self.r_hi
    }

    pub fn width(&self) -> f64 {
        self.r_hi - self.r_lo
    }

    pub fn warp(&self) -> &Warp {
        &self.warp
    }

    pub fn dim(&self) -> usize {
        crate::DIM
    }

    /// `[f, f', f'']` at `r`.
    pub fn profile(&self, r: f64) -> [f64; 3] {
        self.warp.eval(r)
    }

    pub fn f(&self, r: f64) -> f64 {
        self.warp.value(r)
    }

    /// Gauss curvature `−f''/f` at `r`.
    pub fn curvature_at(&self, r: f64) -> f64 {
        let [f, _, f2] = self.profile(r);
        -f2 / f
    }

    /// `|Ric⁻| = max(0, f''/f)`; in dimension two the Ricci tensor is `K_G g`.
    pub fn ric_minus_at(&self, r: f64) -> f64 {
        (-self.curvature_at(r)).max(0.0)
    }

    /// Total area `2π ∫ f dr`, by composite Simpson on a fine partition.
    pub fn area(&self) -> f64 {
        let n = 4096;
        let h = self.width() / n as f64;
        let mut acc = self.f(self.r_lo) + self.f(self.r_hi);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.f(self.r_lo + k as f64 * h);
        }
        2.0 * PI * acc * h / 3.0
    }

    /// The same surface with every length multiplied by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(domain("scale factor", format!("{lambda} must be positive")));
        }
        Self::new(self.r_lo * lambda, self.r_hi * lambda, self.warp.rescaled(lambda))
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_lo && r <= self.r_hi
    }
}

fn radial_field(grid: &Grid, units: Units, mut value: impl FnMut(f64) -> f64) -> Result<FieldOnGrid> {
    let column: Vec<f64> = (0..grid.nr()).map(|i| value(grid.r(i))).collect();
    if let Some(v) = column.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite radial value {v}")));
    }
    Ok(FieldOnGrid::from_fn(*grid, units, |i, _| column[i]))
}

fn check_grid(surface: &WarpedSurface, grid: &Grid) -> Result<()> {
    if !grid.matches(surface) {
        return Err(Error::InvalidGrid(format!(
            "grid spans [{}, {}] but the surface spans [{}, {}]",
            grid.r_lo(),
            grid.r_hi(),
            surface.r_lo(),
            surface.r_hi()
        )));
    }
    Ok(())
}

fn positive_warp(surface: &WarpedSurface, r: f64) -> Result<[f64; 3]> {
    let p = surface.profile(r);
    if !(p[0] > 0.0) {
        return Err(Error::InvalidSurface(format!("f({r}) = {} is not positive", p[0])));
    }
    Ok(p)
}

/// Gauss curvature `K_G = −f''/f` at every node.
pub fn gauss_curvature(surface: &WarpedSurface, grid: &Grid) -> Result<FieldOnGrid> {
    check_grid(surface, grid)?;
    for i in 0..grid.nr() {
        positive_warp(surface, grid.r(i))?;
    }
    radial_field(grid, Units::PerLengthSquared, |r| surface.curvature_at(r))
}

/// Negative part of the Ricci curvature, `max(0, f''/f)`, at every node.
pub fn ric_minus(surface: &WarpedSurface, grid: &Grid) -> Result<FieldOnGrid> {
    check_grid(surface, grid)?;
    for i in 0..grid.nr() {
        positive_warp(surface, grid.r(i))?;
    }
    radial_field(grid, Units::PerLengthSquared, |r| surface.ric_minus_at(r))
}

/// `II_hi = f'/f (r_hi)`, `II_lo = −f'/f (r_lo)` and `H = max(0, −II_lo, −II_hi)`.
pub fn boundary_second_fundamental_form(surface: &WarpedSurface) -> BoundaryCurvature {
    let [f_lo, d_lo, _] = surface.profile(surface.r_lo);
    let [f_hi, d_hi, _] = surface.profile(surface.r_hi);
    let ii_lo = -d_lo / f_lo;
    let ii_hi = d_hi / f_hi;
    BoundaryCurvature { ii_lo, ii_hi, h: 0.0f64.max(-ii_lo).max(-ii_hi) }
}

/// Distance from `(r, θ)` to the boundary.
pub fn dist_to_boundary(surface: &WarpedSurface, r: f64, theta: f64) -> Result<f64> {
    if !surface.contains(r) || !(0.0..2.0 * PI).contains(&theta) {
        return Err(domain("point", format!("({r}, {theta}) is outside [{}, {}] × [0, 2π)", surface.r_lo, surface.r_hi)));
    }
    Ok((r - surface.r_lo).min(surface.r_hi - r))
}

/// `Δ` of the distance to the boundary on the branch nearest `r`:
/// `f'/f` on the lower half, `−f'/f` on the upper half.
pub fn laplacian_of_boundary_distance(surface: &WarpedSurface, r: f64) -> f64 {
    let [f, f1, _] = surface.profile(r);
    let mid = 0.5 * (surface.r_lo + surface.r_hi);
    if r <= mid {
        f1 / f
    } else {
        -f1 / f
    }
}

/// Nodes within one cell of the equidistant circle, where the boundary
/// distance is not differentiable.
pub(crate) fn near_cut_locus(surface: &WarpedSurface, grid: &Grid, i: usize) -> bool {
    let mid = 0.5 * (surface.r_lo + surface.r_hi);
    (grid.r(i) - mid).abs() <= grid.hr() * (1.0 + 1e-12)
}

/// Checks `Δr ≥ −(n−1)(3H+1)` for the boundary distance `r(x)` away from the cut locus.
pub fn laplacian_dist_audit(surface: &WarpedSurface, grid: &Grid, h: f64) -> Result<VerifyReport> {
    check_grid(surface, grid)?;
    let n = surface.dim() as f64;
    let floor = -(n - 1.0) * (3.0 * h + 1.0);
    let mut report = VerifyReport::new("laplacian-distance", 0.0);
    let mut excluded = Vec::new();
    let mut margins = Vec::new();
    for i in 0..grid.nr() {
        let r = grid.r(i);
        if near_cut_locus(surface, grid, i) {
            excluded.push(Location::node(r, 0.0));
            continue;
        }
        margins.push((laplacian_of_boundary_distance(surface, r) - floor, Location::node(r, 0.0)));
    }
    report.record_snapshot(None, margins);
    report.excluded = excluded;
    report.provenance = vec![
        Provenance::formula("H", h, "boundary convexity defect"),
        Provenance::formula("floor", floor, "-(n-1)(3H+1)"),
        Provenance::measured("laplacian", "±f'/f on each boundary branch"),
    ];
    report.finish();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sin_surface(lo: f64, hi: f64) -> WarpedSurface {
        WarpedSurface::new(lo, hi, Warp::Sin { amplitude: 1.0, rate: 1.0, phase: 0.0 }).unwrap()
    }

    #[test]
    fn flat_cylinder_has_zero_curvature() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 16, 4).unwrap();
        assert!(gauss_curvature(&s, &g).unwrap().values().iter().all(|v| *v == 0.0));
        assert!(ric_minus(&s, &g).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn cosh_profile_has_curvature_minus_one() {
        let s = WarpedSurface::new(-0.5, 0.5, Warp::Cosh { offset: 0.0, amplitude: 1.0, rate: 1.0, center: 0.0 }).unwrap();
        let g = Grid::new(&s, 33, 8).unwrap();
        for v in gauss_curvature(&s, &g).unwrap().values() {
            assert_abs_diff_eq!(*v, -1.0, epsilon = 1e-8);
        }
        for v in ric_minus(&s, &g).unwrap().values() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn sine_profile_has_curvature_plus_one() {
        let s = sin_surface(0.3, 1.2);
        let g = Grid::new(&s, 32, 1).unwrap();
        for v in gauss_curvature(&s, &g).unwrap().values() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-8);
        }
        assert!(ric_minus(&s, &g).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn second_fundamental_forms() {
        let flat = WarpedSurface::flat_cylinder(1.0).unwrap();
        assert_eq!(boundary_second_fundamental_form(&flat), BoundaryCurvature { ii_lo: 0.0, ii_hi: 0.0, h: 0.0 });

        let e = WarpedSurface::new(0.0, 1.0, Warp::Exponential { amplitude: 1.0, rate: 1.0 }).unwrap();
        let b = boundary_second_fundamental_form(&e);
        assert_abs_diff_eq!(b.ii_hi, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.ii_lo, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.h, 1.0, epsilon = 1e-14);

        let s = sin_surface(0.2, 1.0);
        let b = boundary_second_fundamental_form(&s);
        assert_abs_diff_eq!(b.ii_hi, 1.0 / libm::tan(1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(b.ii_lo, -1.0 / libm::tan(0.2), epsilon = 1e-12);
        assert_abs_diff_eq!(b.ii_hi, 0.6421, epsilon = 1e-4);
        assert_abs_diff_eq!(b.h, 4.9332, epsilon = 1e-4);
    }

    #[test]
    fn euclidean_disk_boundary_is_convex() {
        let a = 2.0;
        let disk = WarpedSurface::new(0.05, a, Warp::Linear { offset: 0.0, slope: 1.0 }).unwrap();
        let b = boundary_second_fundamental_form(&disk);
        assert_abs_diff_eq!(b.ii_hi, 1.0 / a, epsilon = 1e-15);
        assert!(b.ii_hi > 0.0);
    }

    #[test]
    fn boundary_distance() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        assert_eq!(dist_to_boundary(&s, 0.5, 0.0).unwrap(), 0.5);
        assert_eq!(dist_to_boundary(&s, 0.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(dist_to_boundary(&s, 0.9, 3.0).unwrap(), 0.1, epsilon = 1e-15);
        assert!(matches!(dist_to_boundary(&s, 1.2, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(dist_to_boundary(&s, 0.5, 7.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn laplacian_audit_examples() {
        let flat = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&flat, 32, 1).unwrap();
        let rep = laplacian_dist_audit(&flat, &g, 0.0).unwrap();
        assert_abs_diff_eq!(rep.min_margin, 1.0, epsilon = 1e-15);
        assert!(rep.passed);

        let e = WarpedSurface::new(0.0, 1.0, Warp::Exponential { amplitude: 1.0, rate: 1.0 }).unwrap();
        let g = Grid::new(&e, 32, 1).unwrap();
        let rep = laplacian_dist_audit(&e, &g, 1.0).unwrap();
        assert_abs_diff_eq!(rep.min_margin, 3.0, epsilon = 1e-12);
        assert!(!rep.excluded.is_empty());

        let s = sin_surface(0.2, 1.0);
        let h = boundary_second_fundamental_form(&s).h;
        let g = Grid::new(&s, 64, 1).unwrap();
        assert!(laplacian_dist_audit(&s, &g, h).unwrap().min_margin >= 0.0);
    }

    #[test]
    fn rejects_nonpositive_profiles() {
        assert!(WarpedSurface::new(0.0, 4.0, Warp::Sin { amplitude: 1.0, rate: 1.0, phase: 0.0 }).is_err());
        assert!(WarpedSurface::new(1.0, 1.0, Warp::Constant { value: 1.0 }).is_err());
        assert!(SampledProfile::new(0.0, 0.1, vec![1.0, 1.0, -1.0, 1.0]).is_err());
    }

    #[test]
    fn spline_reproduces_smooth_profile() {
        let h = 0.01;
        let values: Vec<f64> = (0..=100).map(|k| libm::cosh(k as f64 * h - 0.5)).collect();
        let p = SampledProfile::new(0.0, h, values).unwrap();
        let s = WarpedSurface::new(0.0, 1.0, Warp::Sampled(p)).unwrap();
        for r in [0.0, 0.137, 0.5, 0.91, 1.0] {
            assert_abs_diff_eq!(s.f(r), libm::cosh(r - 0.5), epsilon = 1e-7);
            assert_abs_diff_eq!(s.curvature_at(r), -1.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn rescaling_scales_curvature() {
        let s = WarpedSurface::new(0.0, 1.0, Warp::Cosh { offset: 1.0, amplitude: 0.05, rate: 1.0, center: 0.5 }).unwrap();
        let t = s.rescaled(2.0).unwrap();
        assert_abs_diff_eq!(t.width(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.curvature_at(0.6), s.curvature_at(0.3) / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.area(), 4.0 * s.area(), epsilon = 1e-10);
    }
}
