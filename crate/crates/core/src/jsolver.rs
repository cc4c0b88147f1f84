//! The auxiliary function `J` through the substitution `w = J^{−(c−1)}`,
//! which turns its equation into the linear problem
//! `∂t w = Δw + V w`, `∂_ν w = 0`, `w(·, 0) = 1` with `V = 2(c−1)|Ric⁻|`.
//!
//! On a warped surface `V` depends on `r` only and `w` starts constant, so
//! `w` stays rotationally symmetric and is solved on a single radial line.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, pow};

use crate::constants::JLowerBound;
use crate::error::{domain, Error, Result};
use crate::geometry::WarpedSurface;
use crate::grid::{FieldOnGrid, Grid, Units};
use crate::heat::{HeatPropagator, StepKind};
use crate::report::{Location, Provenance, VerifyReport};

/// Slack allowed on `w ≥ 1` and `J ≤ 1`.
pub const CLAIM_TOLERANCE: f64 = 1e-8;
/// Slack allowed on `J ≥ J̲`.
pub const LOWER_BOUND_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_S_INTERVALS: usize = 64;

/// `V = 2(c−1)|Ric⁻|` on the grid.
pub fn potential_v(surface: &WarpedSurface, grid: &Grid, c: f64) -> Result<FieldOnGrid> {
    if !(c > 1.0) {
        return Err(domain("c", format!("{c} must exceed 1")));
    }
    Ok(crate::geometry::ric_minus(surface, grid)?.map(Units::PerLengthSquared, |v| 2.0 * (c - 1.0) * v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JConfig {
    pub c: f64,
    pub dt: f64,
    pub t_final: f64,
    pub grid: Grid,
}

impl JConfig {
    pub fn validate(&self) -> Result<usize> {
        if !(self.c > 1.0) {
            return Err(domain("c", format!("{} must exceed 1", self.c)));
        }
        if !(self.dt > 0.0) || !(self.t_final > 0.0) {
            return Err(domain("time grid", format!("need dt > 0 and T > 0, got dt = {}, T = {}", self.dt, self.t_final)));
        }
        let steps = libm::round(self.t_final / self.dt);
        if (steps * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(domain("time grid", format!("T = {} is not a multiple of dt = {}", self.t_final, self.dt)));
        }
        Ok(steps as usize)
    }
}

/// `w` and `J` at every time step on one radial line.
#[derive(Debug, Clone)]
pub struct JSolution {
    surface: WarpedSurface,
    grid: Grid,
    c: f64,
    dt: f64,
    potential: Vec<f64>,
    sup_v: f64,
    /// `w` at step `n`, one value per radial node.
    w: Vec<Vec<f64>>,
}

impl JSolution {
    pub fn surface(&self) -> &WarpedSurface {
        &self.surface
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sup_v(&self) -> f64 {
        self.sup_v
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn steps(&self) -> usize {
        self.w.len() - 1
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn w_line(&self, n: usize) -> &[f64] {
        &self.w[n]
    }

    pub fn j_line(&self, n: usize) -> Vec<f64> {
        let e = -1.0 / (self.c - 1.0);
        self.w[n].iter().map(|w| pow(*w, e)).collect()
    }

    /// `w` at step `n` spread over the full grid.
    pub fn w_field(&self, n: usize) -> FieldOnGrid {
        let line = &self.w[n];
        FieldOnGrid::from_fn(self.grid, Units::Dimensionless, |i, _| line[i])
    }

    pub fn j_field(&self, n: usize) -> FieldOnGrid {
        let line = self.j_line(n);
        FieldOnGrid::from_fn(self.grid, Units::Dimensionless, |i, _| line[i])
    }

    /// `e^{−t·sup V/(c−1)}`, a lower bound for `J` by comparison with the
    /// spatially constant supersolution `e^{t·sup V}` of the `w` problem.
    pub fn desk_bound(&self, t: f64) -> f64 {
        desk_bound(self.sup_v, self.c, t)
    }
}

pub fn desk_bound(sup_v: f64, c: f64, t: f64) -> f64 {
    exp(-t * sup_v / (c - 1.0))
}

/// Crank-Nicolson stepping of the `w` problem.
///
/// Errors with [`Error::Fidelity`] if `w < 1 − tol` or `w` is not finite at
/// some node and step.
pub fn solve_w(surface: &WarpedSurface, config: &JConfig) -> Result<JSolution> {
    let steps = config.validate()?;
    if !config.grid.matches(surface) {
        return Err(Error::InvalidGrid("grid does not span the surface interval".into()));
    }
    let line = Grid::on_interval(config.grid.r_lo(), config.grid.r_hi(), config.grid.nr(), 1)?;
    let v = potential_v(surface, &line, config.c)?.into_values();
    let sup_v = v.iter().copied().fold(0.0, f64::max);
    let prop = HeatPropagator::new(surface, &line, config.dt, Some(&v))?;
    let mut state = crate::heat::Spectrum::from_values(&line, &vec![1.0; line.nr()]);
    let mut w = Vec::with_capacity(steps + 1);
    w.push(vec![1.0; line.nr()]);
    for n in 1..=steps {
        prop.step(&mut state, StepKind::CrankNicolson)?;
        let vals = state.to_values();
        for (i, x) in vals.iter().enumerate() {
            if !x.is_finite() || *x < 1.0 - CLAIM_TOLERANCE {
                return Err(Error::Fidelity(format!(
                    "w = {x} below 1 at r = {}, t = {}",
                    line.r(i),
                    n as f64 * config.dt
                )));
            }
        }
        w.push(vals);
    }
    Ok(JSolution { surface: surface.clone(), grid: config.grid, c: config.c, dt: config.dt, potential: v, sup_v, w })
}

/// Outcome of evaluating Duhamel's formula against the stepped `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DuhamelCheck {
    pub residual: f64,
    pub worst_time: f64,
    /// Spacing of the trapezoidal `s`-nodes.
    pub ds: f64,
    pub nodes: usize,
}

/// `sup |w(t) − 1 − ∫₀ᵗ e^{(t−s)Δ}[V w(s)] ds|` over the `s`-nodes, with the
/// integral taken by the trapezoidal rule on `intervals` equal `s`-steps and
/// `e^{τΔ}` applied by the heat stepper without potential.
pub fn duhamel_residual(wsol: &JSolution, intervals: usize) -> Result<DuhamelCheck> {
    let steps = wsol.steps();
    if intervals == 0 {
        return Err(domain("s intervals", "need at least one"));
    }
    let m = (steps / intervals).max(1);
    let nodes = steps / m;
    let line = Grid::on_interval(wsol.grid.r_lo(), wsol.grid.r_hi(), wsol.grid.nr(), 1)?;
    let prop = HeatPropagator::new(&wsol.surface, &line, wsol.dt, None)?;
    let ds = m as f64 * wsol.dt;
    let forcing = |j: usize| -> Vec<f64> { wsol.w[j * m].iter().zip(&wsol.potential).map(|(w, v)| w * v).collect() };

    // Y_j = P_ds Y_{j−1} + g_j with Y_0 = g_0 / 2; the integral is ds (Y_j − g_j / 2)
    let g0 = forcing(0);
    let mut y = crate::heat::Spectrum::from_values(&line, &g0.iter().map(|g| 0.5 * g).collect::<Vec<_>>());
    let mut residual = 0.0f64;
    let mut worst_time = 0.0;
    for j in 1..=nodes {
        for _ in 0..m {
            prop.step(&mut y, StepKind::CrankNicolson)?;
        }
        let g = forcing(j);
        y.add_scaled(&crate::heat::Spectrum::from_values(&line, &g), 1.0);
        let yv = y.to_values();
        for i in 0..line.nr() {
            let rhs = 1.0 + ds * (yv[i] - 0.5 * g[i]);
            let e = (wsol.w[j * m][i] - rhs).abs();
            if e > residual {
                residual = e;
                worst_time = j as f64 * ds;
            }
        }
    }
    Ok(DuhamelCheck { residual, worst_time, ds, nodes })
}

/// Numerical status of the three claims on `w` and `J`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClaimsReport {
    pub c: f64,
    pub sup_v: f64,
    pub min_w: f64,
    pub max_j_minus_one: f64,
    pub min_j: f64,
    /// `min (J − J̲_desk)` over space-time.
    pub desk: VerifyReport,
    /// `min (J − J̲)` with the user-supplied constant, when one was given.
    pub c3_form: Option<VerifyReport>,
    pub positivity: bool,
    pub upper: bool,
    pub passed: bool,
}

/// Checks `w > 0`, `J ≤ 1` and `J ≥ J̲` along the stored time steps.
pub fn claims_audit(wsol: &JSolution, c3_form: Option<&JLowerBound>) -> ClaimsReport {
    let mut min_w = f64::INFINITY;
    let mut max_j = f64::NEG_INFINITY;
    let mut min_j = f64::INFINITY;
    let mut desk = VerifyReport::new("J ≥ exp(−t sup V/(c−1))", LOWER_BOUND_TOLERANCE);
    desk.provenance.push(Provenance::measured_value("sup V", wsol.sup_v, "maximum of 2(c−1)|Ric⁻| over the radial nodes"));
    desk.provenance.push(Provenance::formula("c", wsol.c, "exponent of the auxiliary problem"));
    let mut c3_report = c3_form.map(|b| {
        let mut r = VerifyReport::new("J ≥ 2^{−1/(c−1)} exp(−C̃3 t/(c−1))", LOWER_BOUND_TOLERANCE);
        r.provenance.push(Provenance::overridden("C̃3", b.c3_tilde, "from the user-supplied C3"));
        r.provenance.push(Provenance::formula("c", b.c, "exponent of the auxiliary problem"));
        r
    });
    for n in 0..=wsol.steps() {
        let t = wsol.time(n);
        let j = wsol.j_line(n);
        let locs = |i: usize| Location::at_time(wsol.grid.r(i), 0.0, t);
        for (i, w) in wsol.w[n].iter().enumerate() {
            min_w = min_w.min(*w);
            max_j = max_j.max(j[i]);
            min_j = min_j.min(j[i]);
        }
        let lb = wsol.desk_bound(t);
        desk.record_snapshot(Some(t), j.iter().enumerate().map(|(i, v)| (v - lb, locs(i))));
        if let (Some(r), Some(b)) = (c3_report.as_mut(), c3_form) {
            let lb = b.eval(t);
            r.record_snapshot(Some(t), j.iter().enumerate().map(|(i, v)| (v - lb, locs(i))));
        }
    }
    desk.finish();
    if let Some(r) = c3_report.as_mut() {
        r.finish();
    }
    let positivity = min_w > 0.0 && min_j > 0.0;
    let upper = max_j <= 1.0 + CLAIM_TOLERANCE;
    // the C̃3 route rests on a user-supplied constant and is reported only
    let passed = positivity && upper && desk.passed;
    ClaimsReport {
        c: wsol.c,
        sup_v: wsol.sup_v,
        min_w,
        max_j_minus_one: max_j - 1.0,
        min_j,
        desk,
        c3_form: c3_report,
        positivity,
        upper,
        passed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Warp;
    use core::f64::consts::SQRT_2;

    fn band() -> WarpedSurface {
        WarpedSurface::new(0.0, 1.0, Warp::Cosh { offset: 1.0, amplitude: 0.05, rate: 1.0, center: 0.5 }).unwrap()
    }

    #[test]
    fn potential_examples() {
        let flat = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&flat, 16, 4).unwrap();
        assert_eq!(potential_v(&flat, &g, 70.0).unwrap().max(), 0.0);
        let ch = WarpedSurface::new(0.0, 1.0, Warp::Cosh { offset: 0.0, amplitude: 1.0, rate: 1.0, center: 0.0 }).unwrap();
        let v = potential_v(&ch, &g, 70.0).unwrap();
        assert!((v.min() - 138.0).abs() < 1e-9 && (v.max() - 138.0).abs() < 1e-9);
        assert!(potential_v(&ch, &g, 1.0).is_err());
    }

    #[test]
    fn zero_potential_keeps_w_at_one() {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 64, 8).unwrap();
        let sol = solve_w(&s, &JConfig { c: 70.0, dt: 1e-3, t_final: 0.1, grid: g }).unwrap();
        for n in 0..=sol.steps() {
            assert!(sol.j_line(n).iter().all(|j| (j - 1.0).abs() < 1e-10));
        }
        let d = duhamel_residual(&sol, 64).unwrap();
        assert!(d.residual < 1e-13, "{}", d.residual);
    }

    #[test]
    fn constant_potential_follows_the_ode() {
        // |Ric⁻| = 1/2 on cosh(r/√2); c = 2 gives V = 1
        let s = WarpedSurface::new(0.0, 1.0, Warp::Cosh { offset: 0.0, amplitude: 1.0, rate: 1.0 / SQRT_2, center: 0.0 }).unwrap();
        let g = Grid::new(&s, 64, 1).unwrap();
        let sol = solve_w(&s, &JConfig { c: 2.0, dt: 1e-3, t_final: 0.1, grid: g }).unwrap();
        let n = sol.steps();
        for j in sol.j_line(n) {
            assert!((j - exp(-0.1)).abs() < 1e-6, "{j}");
        }
        let d = duhamel_residual(&sol, 64).unwrap();
        assert!(d.residual < 1e-4, "{}", d.residual);
    }

    #[test]
    fn curved_band_claims() {
        let s = band();
        let g = Grid::new(&s, 128, 16).unwrap();
        let sol = solve_w(&s, &JConfig { c: 70.0, dt: 1e-3, t_final: 0.1, grid: g }).unwrap();
        let rep = claims_audit(&sol, None);
        assert!(rep.passed, "{rep:?}");
        assert!(rep.min_w >= 1.0 - 1e-8);
        assert!(duhamel_residual(&sol, 64).unwrap().residual < 1e-3);
        // a C̃3-form bound below the desk bound holds as well
        let weak = JLowerBound::new(70.0, 2.0 * sol.sup_v()).unwrap();
        assert!(claims_audit(&sol, Some(&weak)).c3_form.unwrap().passed);
    }

    #[test]
    fn time_grid_must_be_a_lattice() {
        let s = band();
        let g = Grid::new(&s, 16, 1).unwrap();
        assert!(solve_w(&s, &JConfig { c: 70.0, dt: 0.03, t_final: 0.1, grid: g }).is_err());
        assert!(solve_w(&s, &JConfig { c: 0.5, dt: 0.01, t_final: 0.1, grid: g }).is_err());
    }
}
