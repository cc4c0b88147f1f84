//! Geodesic distance from a grid node: factored fast sweeping for
//! `|∇d|_g = 1` in the metric `dr² + f(r)² dθ²`.
//!
//! The distance is written `d = d0·τ`, with `d0` the distance of the metric
//! frozen at the midpoint radius, and the upwind scheme is applied to `τ`.
//! This removes the point-source singularity, so the error stays first order
//! in the cell size even on strongly anisotropic grids, and the flat cylinder
//! is reproduced exactly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::geometry::WarpedSurface;
use crate::grid::{FieldOnGrid, Grid, Node, Units};

/// Sup-norm change between sweep passes below which the iteration stops.
pub const SWEEP_TOLERANCE: f64 = 1e-8;
pub const MAX_SWEEP_PASSES: usize = 500;

/// Nodes within this many cells of the centre keep the frozen-metric distance.
const SEED_CELLS: isize = 2;

/// One upwind stencil arm: metric step `step` (signed, positive when the
/// neighbour lies behind), `slope` the derivative of `d0` along the arm, and
/// the neighbour's `tau`.
#[derive(Clone, Copy)]
struct Arm {
    step: f64,
    slope: f64,
    tau: f64,
    d: f64,
}

impl Arm {
    /// Discrete derivative of `d` is `a·τ + b`.
    fn coeffs(&self, d0: f64) -> (f64, f64) {
        (self.slope + d0 / self.step, -d0 * self.tau / self.step)
    }
}

fn one_sided(arm: Arm, d0: f64) -> Option<f64> {
    let (a, b) = arm.coeffs(d0);
    if a.abs() < 1e-300 {
        return None;
    }
    let tau = (arm.step.signum() - b) / a;
    let d = d0 * tau;
    (tau > 0.0 && d >= arm.d).then_some(tau)
}

fn two_sided(x: Arm, y: Arm, d0: f64) -> Option<f64> {
    let (a1, b1) = x.coeffs(d0);
    let (a2, b2) = y.coeffs(d0);
    let qa = a1 * a1 + a2 * a2;
    let qb = a1 * b1 + a2 * b2;
    let qc = b1 * b1 + b2 * b2 - 1.0;
    let disc = qb * qb - qa * qc;
    if disc < 0.0 || qa <= 0.0 {
        return None;
    }
    let tau = (-qb + sqrt(disc)) / qa;
    let d = d0 * tau;
    // both arms must point downwind
    let gx = (a1 * tau + b1) * x.step.signum();
    let gy = (a2 * tau + b2) * y.step.signum();
    (tau > 0.0 && d >= x.d && d >= y.d && gx >= 0.0 && gy >= 0.0).then_some(tau)
}

/// Geodesic distance from `center` to every node.
///
/// Errors with [`Error::Numeric`] if the sweeps have not settled to
/// [`SWEEP_TOLERANCE`] after [`MAX_SWEEP_PASSES`] passes.
pub fn distance_field(surface: &WarpedSurface, grid: &Grid, center: Node) -> Result<FieldOnGrid> {
    if !grid.matches(surface) {
        return Err(Error::InvalidGrid("grid does not span the surface interval".into()));
    }
    if center.ir >= grid.nr() || center.itheta >= grid.ntheta() {
        return Err(Error::InvalidGrid(format!("centre {center:?} is not a grid node")));
    }
    let nr = grid.nr();
    let nt = grid.ntheta();
    let hr = grid.hr();
    let hth = grid.htheta();
    let f: Vec<f64> = (0..nr).map(|i| surface.f(grid.r(i))).collect();
    let rc = grid.r(center.ir);

    // frozen-metric distance and its metric gradient
    let mut d0 = vec![0.0; nr * nt];
    let mut g_r = vec![0.0; nr * nt];
    let mut g_t = vec![0.0; nr * nt];
    for i in 0..nr {
        let dr = grid.r(i) - rc;
        let [fm, fm1, _] = surface.profile(0.5 * (grid.r(i) + rc));
        for j in 0..nt {
            let mut dth = (j as f64 - center.itheta as f64) * hth;
            if dth > PI {
                dth -= 2.0 * PI;
            } else if dth <= -PI {
                dth += 2.0 * PI;
            }
            let k = i * nt + j;
            let v = sqrt(dr * dr + fm * fm * dth * dth);
            d0[k] = v;
            if v > 0.0 {
                g_r[k] = (dr + 0.5 * fm * fm1 * dth * dth) / v;
                g_t[k] = fm * fm * dth / (v * f[i]);
            }
        }
    }

    let mut tau = vec![f64::INFINITY; nr * nt];
    let mut fixed = vec![false; nr * nt];
    for di in -SEED_CELLS..=SEED_CELLS {
        let i = center.ir as isize + di;
        if i < 0 || i >= nr as isize {
            continue;
        }
        let span = if nt > 1 { SEED_CELLS.min((nt as isize - 1) / 2) } else { 0 };
        for dj in -span..=span {
            let j = (center.itheta as isize + dj).rem_euclid(nt as isize) as usize;
            let k = i as usize * nt + j;
            tau[k] = 1.0;
            fixed[k] = true;
        }
    }
    let dist = |tau: &[f64], k: usize| if d0[k] == 0.0 { 0.0 } else { d0[k] * tau[k] };

    let mut passes = 0;
    loop {
        let mut change = 0.0f64;
        for order in 0..4 {
            let i_up = order & 1 == 0;
            let j_up = order & 2 == 0;
            for ii in 0..nr {
                let i = if i_up { ii } else { nr - 1 - ii };
                for jj in 0..nt {
                    let j = if j_up { jj } else { nt - 1 - jj };
                    let k = i * nt + j;
                    if fixed[k] {
                        continue;
                    }
                    let mut radial: Option<Arm> = None;
                    for (nb, step) in [(i.checked_sub(1), hr), ((i + 1 < nr).then_some(i + 1), -hr)] {
                        if let Some(n) = nb {
                            let kn = n * nt + j;
                            if tau[kn].is_finite() {
                                let d = dist(&tau, kn);
                                if radial.is_none_or(|a| d < a.d) {
                                    radial = Some(Arm { step, slope: g_r[k], tau: tau[kn], d });
                                }
                            }
                        }
                    }
                    let mut angular: Option<Arm> = None;
                    if nt > 1 {
                        let jm = if j == 0 { nt - 1 } else { j - 1 };
                        let jp = if j + 1 == nt { 0 } else { j + 1 };
                        let ha = f[i] * hth;
                        for (n, step) in [(jm, ha), (jp, -ha)] {
                            let kn = i * nt + n;
                            if tau[kn].is_finite() {
                                let d = dist(&tau, kn);
                                if angular.is_none_or(|a| d < a.d) {
                                    angular = Some(Arm { step, slope: g_t[k], tau: tau[kn], d });
                                }
                            }
                        }
                    }
                    let mut best = f64::INFINITY;
                    if let (Some(x), Some(y)) = (radial, angular) {
                        if let Some(t) = two_sided(x, y, d0[k]) {
                            best = best.min(t);
                        }
                    }
                    for arm in [radial, angular].into_iter().flatten() {
                        if let Some(t) = one_sided(arm, d0[k]) {
                            best = best.min(t);
                        }
                    }
                    if best < tau[k] {
                        let delta = if tau[k].is_finite() { d0[k] * (tau[k] - best) } else { f64::INFINITY };
                        change = change.max(delta);
                        tau[k] = best;
                    }
                }
            }
        }
        passes += 1;
        if change < SWEEP_TOLERANCE {
            break;
        }
        if passes >= MAX_SWEEP_PASSES {
            return Err(Error::Numeric(format!(
                "fast sweeping did not settle after {passes} passes (last change {change:e})"
            )));
        }
    }
    let d: Vec<f64> = (0..nr * nt).map(|k| dist(&tau, k)).collect();
    FieldOnGrid::from_values(*grid, Units::Length, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn centre_is_zero_and_radial_lines_are_exact() {
        let s = WarpedSurface::new(0.0, 1.0, crate::Warp::Cosh { offset: 1.0, amplitude: 0.3, rate: 2.0, center: 0.4 }).unwrap();
        let g = Grid::new(&s, 101, 64).unwrap();
        let d = distance_field(&s, &g, Node::new(50, 0)).unwrap();
        assert_eq!(d.get(50, 0), 0.0);
        assert!((d.get(80, 0) - 0.3).abs() < 1e-3);
    }

    #[test]
    fn flat_cylinder_antipode() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 65, 128).unwrap();
        let d = distance_field(&s, &g, Node::new(32, 0)).unwrap();
        let far = d.get(32, 64);
        assert!((far - PI).abs() / PI < 0.02, "{far}");
    }

    #[test]
    fn one_dimensional_grid() {
        let s = WarpedSurface::flat_cylinder(2.0).unwrap();
        let g = Grid::new(&s, 21, 1).unwrap();
        let d = distance_field(&s, &g, Node::new(0, 0)).unwrap();
        for i in 0..21 {
            assert!((d.get(i, 0) - g.r(i)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_off_grid_centre() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 16, 8).unwrap();
        assert!(distance_field(&s, &g, Node::new(16, 0)).is_err());
    }

    #[test]
    fn plane_annulus_matches_euclidean_distance() {
        // f(r) = r is the flat plane in polar coordinates; near the centre the
        // straight segment stays inside the annulus
        let s = WarpedSurface::new(1.0, 2.0, crate::Warp::Linear { offset: 0.0, slope: 1.0 }).unwrap();
        let g = Grid::new(&s, 128, 256).unwrap();
        let d = distance_field(&s, &g, Node::new(64, 0)).unwrap();
        let x0 = g.r(64);
        let mut worst = 0.0f64;
        for i in 0..128 {
            for j in (0..256).filter(|&j| g.theta(j) < 0.3 || g.theta(j) > 2.0 * PI - 0.3) {
                let th = g.theta(j);
                let (x, y) = (g.r(i) * libm::cos(th), g.r(i) * libm::sin(th));
                let exact = libm::sqrt((x - x0) * (x - x0) + y * y);
                worst = worst.max((d.get(i, j) - exact).abs());
            }
        }
        assert!(worst < 5e-4, "{worst}");
    }
}
