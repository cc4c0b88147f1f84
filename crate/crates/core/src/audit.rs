//! Empirical checks of the geometric hypotheses: the scale-invariant integral
//! Ricci bound, volume doubling in the interior and up to the boundary, the
//! interior rolling-ball condition, and admissibility of the rolling radius.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{pow, round, sqrt, tan};

use crate::error::{domain, Error, Result};
use crate::geometry::{boundary_second_fundamental_form, dist_to_boundary, laplacian_dist_audit, ric_minus, WarpedSurface};
use crate::grid::{FieldOnGrid, Grid, Node};
use crate::report::Location;
use crate::volume::{center_rows, BallMeasure, CENTER_STRIDE};

/// Data of the hypotheses: convexity defect, rolling radius, diameter bound,
/// integrability exponent and smallness threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeometricHypotheses {
    #[cfg_attr(feature = "serde", serde(rename = "H"))]
    pub h: f64,
    #[cfg_attr(feature = "serde", serde(rename = "R"))]
    pub r: f64,
    #[cfg_attr(feature = "serde", serde(rename = "D"))]
    pub d: f64,
    #[cfg_attr(feature = "serde", serde(rename = "K"))]
    pub k: f64,
    pub p: f64,
}

impl GeometricHypotheses {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(domain("R", format!("{} must be positive", self.r)));
        }
        if !(self.d > 0.0) {
            return Err(domain("D", format!("{} must be positive", self.d)));
        }
        if !(self.p > n as f64 / 2.0) {
            return Err(domain("p", format!("{} must exceed n/2", self.p)));
        }
        if !(self.k > 0.0) {
            return Err(domain("K", format!("{} must be positive", self.k)));
        }
        if !(self.h >= 0.0) {
            return Err(domain("H", format!("{} must be non-negative", self.h)));
        }
        Ok(())
    }

    /// The same hypotheses for the surface rescaled by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        Self { h: self.h / lambda, r: self.r * lambda, d: self.d * lambda, ..*self }
    }
}

fn measures(surface: &WarpedSurface, grid: &Grid, stride: usize) -> Result<Vec<BallMeasure>> {
    center_rows(grid, stride)
        .into_iter()
        .map(|i| BallMeasure::new(surface, grid, Node::new(i, 0)))
        .collect()
}

fn averaged_power(measure: &BallMeasure, power: &[f64], radius: f64, p: f64) -> Result<f64> {
    let vol = measure.volume(radius).area;
    if !(vol > 0.0) {
        return Err(Error::Numeric(format!("empty ball of radius {radius}")));
    }
    Ok(pow(measure.integral(power, radius) / vol, 1.0 / p))
}

fn ric_power(surface: &WarpedSurface, grid: &Grid, p: f64) -> Result<Vec<f64>> {
    Ok(ric_minus(surface, grid)?.values().iter().map(|v| pow(*v, p)).collect())
}

/// `sup_x (⨍_{B(x, radius)} |Ric⁻|^p)^{1/p}` over centres on a radial
/// sublattice (rotational symmetry covers the angle).
pub fn integral_ric_norm(surface: &WarpedSurface, grid: &Grid, p: f64, radius: f64) -> Result<f64> {
    integral_ric_norm_with(surface, grid, &measures(surface, grid, CENTER_STRIDE)?, p, radius)
}

pub fn integral_ric_norm_with(surface: &WarpedSurface, grid: &Grid, measures: &[BallMeasure], p: f64, radius: f64) -> Result<f64> {
    if !(p > 1.0) || !(radius > 0.0) {
        return Err(domain("p, radius", format!("need p > 1 and radius > 0, got p = {p}, radius = {radius}")));
    }
    let power = ric_power(surface, grid, p)?;
    let mut sup = 0.0f64;
    for m in measures {
        sup = sup.max(averaged_power(m, &power, radius, p)?);
    }
    Ok(sup)
}

/// `(D²·norm < K, K − D²·norm)`.
pub fn check_curvature_condition(norm: f64, d: f64, k: f64) -> (bool, f64) {
    let margin = k - d * d * norm;
    (margin > 0.0, margin)
}

/// Both sides of `(⨍_M |Ric⁻|^p)^{1/p} < 2^{1/p} K / (D^{(2p−n)/p} R^{n/p})`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AveragedNormCheck {
    pub left: f64,
    pub right: f64,
    pub margin: f64,
}

pub fn averaged_norm_on_m_bound_check(surface: &WarpedSurface, grid: &Grid, hyp: &GeometricHypotheses) -> Result<AveragedNormCheck> {
    let n = surface.dim() as f64;
    let p = hyp.p;
    let power = FieldOnGrid::from_values(*grid, crate::Units::Dimensionless, ric_power(surface, grid, p)?)?;
    let ones = FieldOnGrid::constant(*grid, crate::Units::Dimensionless, 1.0);
    let left = pow(power.integrate(surface) / ones.integrate(surface), 1.0 / p);
    let right = pow(2.0, 1.0 / p) * hyp.k / (pow(hyp.d, (2.0 * p - n) / p) * pow(hyp.r, n / p));
    Ok(AveragedNormCheck { left, right, margin: right - left })
}

/// One doubling sample: centre node and radii `r < s`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoublingSample {
    pub center: Node,
    pub r: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DoublingReport {
    pub max_ratio: f64,
    pub worst: Option<DoublingSample>,
    pub evaluated: usize,
    /// Samples whose inner radius is below two cells.
    pub skipped: Vec<DoublingSample>,
}

/// Samples `(r, 2r)` and `(r, 4r)` with `r` doubling from two cells while `s < D`,
/// at each centre of the radial sublattice.
pub fn doubling_samples(surface: &WarpedSurface, grid: &Grid, d: f64, stride: usize) -> Vec<DoublingSample> {
    let mut out = Vec::new();
    for i in center_rows(grid, stride) {
        let cell = min_cell(surface, grid, i);
        let mut r = 2.0 * cell;
        while 2.0 * r < d {
            for s in [2.0 * r, 4.0 * r] {
                if s < d {
                    out.push(DoublingSample { center: Node::new(i, 0), r, s });
                }
            }
            r *= 2.0;
        }
    }
    out
}

fn min_cell(surface: &WarpedSurface, grid: &Grid, i: usize) -> f64 {
    let ang = if grid.ntheta() > 1 { surface.f(grid.r(i)) * grid.htheta() } else { 0.0 };
    grid.hr().max(ang)
}

fn doubling(
    surface: &WarpedSurface,
    grid: &Grid,
    samples: &[DoublingSample],
    ratio: impl Fn(f64, f64, f64) -> f64,
) -> Result<DoublingReport> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| {
        (a.center, a.r.to_bits(), a.s.to_bits()).cmp(&(b.center, b.r.to_bits(), b.s.to_bits()))
    });
    let mut report = DoublingReport { max_ratio: 0.0, worst: None, evaluated: 0, skipped: Vec::new() };
    let mut cache: Option<(Node, BallMeasure)> = None;
    for smp in sorted {
        if !(smp.r > 0.0 && smp.s >= smp.r) {
            return Err(domain("doubling sample", format!("need 0 < r ≤ s, got r = {}, s = {}", smp.r, smp.s)));
        }
        if smp.r < 2.0 * min_cell(surface, grid, smp.center.ir) {
            report.skipped.push(smp);
            continue;
        }
        if cache.as_ref().is_none_or(|(c, _)| *c != smp.center) {
            cache = Some((smp.center, BallMeasure::new(surface, grid, smp.center)?));
        }
        let m = &cache.as_ref().unwrap().1;
        let q = ratio(m.volume(smp.s).area, m.volume(smp.r).area, smp.s / smp.r);
        report.evaluated += 1;
        if report.worst.is_none() || q > report.max_ratio {
            report.max_ratio = q;
            report.worst = Some(smp);
        }
    }
    Ok(report)
}

/// `max V(x,s) / (2 (s/r)^n V(x,r))`; balls are taken in the surface itself.
pub fn doubling_audit_ambient(surface: &WarpedSurface, grid: &Grid, n: usize, samples: &[DoublingSample]) -> Result<DoublingReport> {
    let nf = n as f64;
    doubling(surface, grid, samples, |vs, vr, q| vs / (2.0 * pow(q, nf) * vr))
}

/// `max V_M(x,s) / (2^{n+1} 3^n (D/R)^n (s/r)^n V_M(x,r))`.
pub fn doubling_audit_boundary(surface: &WarpedSurface, grid: &Grid, hyp: &GeometricHypotheses, samples: &[DoublingSample]) -> Result<DoublingReport> {
    let nf = surface.dim() as f64;
    let constant = pow(2.0, nf + 1.0) * pow(3.0, nf) * pow(hyp.d / hyp.r, nf);
    doubling(surface, grid, samples, |vs, vr, q| vs / (constant * pow(q, nf) * vr))
}

/// Which boundary circle a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Side {
    Lower,
    Upper,
}

/// Outcome of the rolling-ball test at one boundary point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RollingWitness {
    pub side: Side,
    pub p: Location,
    pub q: Location,
    /// Distance from `q` to the nearest boundary node.
    pub boundary_distance: f64,
    /// Boundary nodes within `R + tol` of `q`.
    pub touching: usize,
    /// Metric length of the touching set along the boundary circle.
    pub extent: f64,
    pub window: f64,
    pub wraps: bool,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RollingBallReport {
    pub radius: f64,
    pub tolerance: f64,
    pub ok: bool,
    pub witnesses: Vec<RollingWitness>,
}

/// Minimum radius of the rolling ball, in radial cells.
pub const ROLLING_MIN_CELLS: f64 = 3.0;

/// Checks that the ball of radius `R` centred `R` inward from boundary points
/// on both circles meets the boundary in a single cluster around the point.
pub fn rolling_ball_check(surface: &WarpedSurface, grid: &Grid, radius: f64) -> Result<RollingBallReport> {
    if !(radius > 0.0 && radius < 0.5 * surface.width()) {
        return Err(domain("rolling radius", format!("{radius} must lie in (0, {})", 0.5 * surface.width())));
    }
    let hr = grid.hr();
    if radius < ROLLING_MIN_CELLS * hr {
        return Err(Error::Resolution(format!("rolling radius {radius} is below {ROLLING_MIN_CELLS} cells of {hr}")));
    }
    if grid.ntheta() < 4 {
        return Err(Error::InvalidGrid("rolling-ball check needs at least 4 angular nodes".into()));
    }
    let nr = grid.nr();
    let nt = grid.ntheta();
    let tol = hr;
    let steps = round(radius / hr) as usize;
    let mut witnesses = Vec::new();
    for side in [Side::Lower, Side::Upper] {
        for jp in [0, nt / 2] {
            let (ip, iq, ib_other) = match side {
                Side::Lower => (0, steps, nr - 1),
                Side::Upper => (nr - 1, nr - 1 - steps, 0),
            };
            let measure = BallMeasure::new(surface, grid, Node::new(iq, jp))?;
            let d = measure.distance();
            let own: Vec<f64> = (0..nt).map(|j| d.get(ip, j)).collect();
            let other_min = (0..nt).map(|j| d.get(ib_other, j)).fold(f64::INFINITY, f64::min);
            let boundary_distance = own.iter().copied().fold(other_min, f64::min);
            let level = radius + tol;
            let inside: Vec<bool> = own.iter().map(|v| *v <= level).collect();
            let touching = inside.iter().filter(|b| **b).count() + usize::from(other_min <= level);
            let wraps = inside.iter().all(|b| *b);
            // contiguous run through jp
            let mut run = 0usize;
            if inside[jp] {
                run = 1;
                let mut k = 1;
                while k < nt && inside[(jp + k) % nt] {
                    run += 1;
                    k += 1;
                }
                let mut k = 1;
                while k < nt && run < nt && inside[(jp + nt - k) % nt] {
                    run += 1;
                    k += 1;
                }
            }
            let contiguous = run == inside.iter().filter(|b| **b).count();
            let fb = surface.f(grid.r(ip));
            let cell = fb * grid.htheta();
            let extent = run.saturating_sub(1) as f64 * cell;
            let window = 2.0 * sqrt(2.0 * radius * tol + tol * tol) + 2.0 * cell;
            let ok = inside[jp]
                && !wraps
                && contiguous
                && other_min > level
                && extent <= window
                && (boundary_distance - radius).abs() <= tol;
            witnesses.push(RollingWitness {
                side,
                p: Location::node(grid.r(ip), grid.theta(jp)),
                q: Location::node(grid.r(iq), grid.theta(jp)),
                boundary_distance,
                touching,
                extent,
                window,
                wraps,
                ok,
            });
        }
    }
    let ok = witnesses.iter().all(|w| w.ok);
    Ok(RollingBallReport { radius, tolerance: tol, ok, witnesses })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Admissibility {
    /// Supremum of the Gauss curvature within distance `R` of the boundary.
    pub k_r: f64,
    /// `(1+H)/2 − √K_R tan(R√K_R)`; `None` past the tangent blow-up.
    pub margin_first: Option<f64>,
    /// `1/2 − (H/√K_R) tan(R√K_R)`, or `1/2 − HR` when `K_R ≤ 0`.
    pub margin_second: Option<f64>,
    pub admissible: bool,
}

/// Admissibility of the rolling radius from `K_R`, `H` and `R` alone.
pub fn admissibility_from(k_r: f64, h: f64, radius: f64) -> Admissibility {
    let (m1, m2) = if k_r > 0.0 {
        let s = sqrt(k_r);
        if radius * s >= PI / 2.0 {
            (None, None)
        } else {
            let t = tan(radius * s);
            (Some(0.5 * (1.0 + h) - s * t), Some(0.5 - h / s * t))
        }
    } else {
        (Some(0.5 * (1.0 + h)), Some(0.5 - h * radius))
    };
    let admissible = matches!((m1, m2), (Some(a), Some(b)) if a >= 0.0 && b >= 0.0);
    Admissibility { k_r, margin_first: m1, margin_second: m2, admissible }
}

/// Measures `K_R` on the grid and evaluates both admissibility inequalities.
pub fn r_admissibility(surface: &WarpedSurface, grid: &Grid, radius: f64, h: f64) -> Result<Admissibility> {
    if !(radius > 0.0) {
        return Err(domain("R", format!("{radius} must be positive")));
    }
    let mut k_r = f64::NEG_INFINITY;
    for i in 0..grid.nr() {
        let r = grid.r(i);
        if dist_to_boundary(surface, r, 0.0)? <= radius {
            k_r = k_r.max(surface.curvature_at(r));
        }
    }
    Ok(admissibility_from(k_r, h, radius))
}

/// Sampling choices for [`run_audit`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AuditOptions {
    pub center_stride: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self { center_stride: CENTER_STRIDE }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AuditReport {
    pub hypotheses: GeometricHypotheses,
    pub measured_diameter: f64,
    pub diameter_ok: bool,
    /// Convexity defect of the surface; the hypothesis needs `H ≥` this.
    pub measured_h: f64,
    pub convexity_ok: bool,
    pub kappa: f64,
    pub scale_invariant: f64,
    pub curvature_margin: f64,
    pub condition_met: bool,
    pub averaged_norm: AveragedNormCheck,
    pub doubling_ambient: DoublingReport,
    pub doubling_boundary: DoublingReport,
    pub rolling: RollingBallReport,
    pub admissibility: Admissibility,
    pub laplacian_distance_margin: f64,
    pub passed: bool,
}

/// Runs every hypothesis audit on one surface.
pub fn run_audit(surface: &WarpedSurface, grid: &Grid, hyp: &GeometricHypotheses, options: &AuditOptions) -> Result<AuditReport> {
    let n = surface.dim();
    hyp.validate(n)?;
    let ms = measures(surface, grid, options.center_stride)?;
    let measured_diameter = ms.iter().map(|m| m.eccentricity()).fold(0.0, f64::max);
    let measured_h = boundary_second_fundamental_form(surface).h;
    let kappa = integral_ric_norm_with(surface, grid, &ms, hyp.p, hyp.d)?;
    let (condition_met, curvature_margin) = check_curvature_condition(kappa, hyp.d, hyp.k);
    let averaged_norm = averaged_norm_on_m_bound_check(surface, grid, hyp)?;
    let samples = doubling_samples(surface, grid, hyp.d, options.center_stride);
    let doubling_ambient = doubling_audit_ambient(surface, grid, n, &samples)?;
    let doubling_boundary = doubling_audit_boundary(surface, grid, hyp, &samples)?;
    let rolling = rolling_ball_check(surface, grid, hyp.r)?;
    let admissibility = r_admissibility(surface, grid, hyp.r, hyp.h)?;
    let lap = laplacian_dist_audit(surface, grid, hyp.h)?;
    let diameter_ok = hyp.d >= measured_diameter;
    let convexity_ok = hyp.h >= measured_h - 1e-12;
    let passed = diameter_ok
        && convexity_ok
        && condition_met
        && averaged_norm.margin >= 0.0
        && doubling_ambient.max_ratio <= 1.0
        && doubling_boundary.max_ratio <= 1.0
        && rolling.ok
        && admissibility.admissible
        && lap.passed;
    Ok(AuditReport {
        hypotheses: *hyp,
        measured_diameter,
        diameter_ok,
        measured_h,
        convexity_ok,
        kappa,
        scale_invariant: hyp.d * hyp.d * kappa,
        curvature_margin,
        condition_met,
        averaged_norm,
        doubling_ambient,
        doubling_boundary,
        rolling,
        admissibility,
        laplacian_distance_margin: lap.min_margin,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Warp;

    fn flat() -> (WarpedSurface, Grid) {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 129, 64).unwrap();
        (s, g)
    }

    #[test]
    fn curvature_condition_arithmetic() {
        assert_eq!(check_curvature_condition(0.0, 3.0, 0.1), (true, 0.1));
        assert_eq!(check_curvature_condition(1.0, 1.0, 0.5), (false, -0.5));
        let (ok, m) = check_curvature_condition(0.03, 2.0, 0.2);
        assert!(ok && (m - 0.08).abs() < 1e-15);
    }

    #[test]
    fn flat_norm_vanishes() {
        let (s, g) = flat();
        assert_eq!(integral_ric_norm(&s, &g, 2.0, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn constant_curvature_norm_is_one() {
        let s = WarpedSurface::new(-0.5, 0.5, Warp::Cosh { offset: 0.0, amplitude: 1.0, rate: 1.0, center: 0.0 }).unwrap();
        let g = Grid::new(&s, 33, 16).unwrap();
        for p in [1.5, 3.0] {
            assert!((integral_ric_norm(&s, &g, p, 0.4).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn admissibility_examples() {
        let a = admissibility_from(1.0, 0.0, 0.4);
        assert!(a.admissible);
        assert!((a.margin_first.unwrap() - (0.5 - tan(0.4))).abs() < 1e-15);
        let b = admissibility_from(0.0, 1.0, 0.6);
        assert!(!b.admissible);
        assert!((b.margin_second.unwrap() + 0.1).abs() < 1e-15);
        let c = admissibility_from(4.0, 0.0, 1.0);
        assert!(!c.admissible && c.margin_first.is_none());
    }

    #[test]
    fn doubling_equal_radii() {
        let (s, g) = flat();
        let smp = [DoublingSample { center: Node::new(64, 0), r: 0.3, s: 0.3 }];
        let amb = doubling_audit_ambient(&s, &g, 2, &smp).unwrap();
        assert!((amb.max_ratio - 0.5).abs() < 1e-15);
        let hyp = GeometricHypotheses { h: 0.0, r: 0.2, d: 3.5, k: 0.1, p: 2.0 };
        let bd = doubling_audit_boundary(&s, &g, &hyp, &smp).unwrap();
        assert!((bd.max_ratio - 1.0 / (8.0 * 9.0 * (3.5f64 / 0.2).powi(2))).abs() < 1e-15);
    }

    #[test]
    fn rolling_ball_preconditions() {
        let (s, g) = flat();
        assert!(matches!(rolling_ball_check(&s, &g, 0.6), Err(Error::Domain { .. })));
        assert!(matches!(rolling_ball_check(&s, &g, 0.01), Err(Error::Resolution(_))));
    }

    #[test]
    fn flat_cylinder_rolls() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 129, 128).unwrap();
        let rep = rolling_ball_check(&s, &g, 0.2).unwrap();
        assert!(rep.ok, "{rep:?}");
        assert!(rep.witnesses.iter().all(|w| w.touching <= 3));
    }

    #[test]
    fn pinched_neck_wraps() {
        let s = WarpedSurface::new(0.0, 1.0, Warp::Bump { base: 0.005, amplitude: 1.0, center: 1.0, width: 0.9 }).unwrap();
        let g = Grid::new(&s, 129, 64).unwrap();
        let rep = rolling_ball_check(&s, &g, 0.2).unwrap();
        assert!(!rep.ok);
        let w = rep.witnesses.iter().find(|w| !w.ok).unwrap();
        assert_eq!(w.side, Side::Lower);
        assert!(w.wraps, "{w:?}");
    }

    #[test]
    fn flat_cylinder_passes_every_audit() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 65, 64).unwrap();
        let hyp = GeometricHypotheses { h: 0.0, r: 0.2, d: 3.5, k: 0.1, p: 2.0 };
        let rep = run_audit(&s, &g, &hyp, &AuditOptions::default()).unwrap();
        assert!(rep.passed, "{rep:#?}");
        assert!(rep.doubling_ambient.evaluated > 0);
        assert!(rep.doubling_ambient.max_ratio <= 1.0 && rep.doubling_boundary.max_ratio <= 1.0);
    }
}
