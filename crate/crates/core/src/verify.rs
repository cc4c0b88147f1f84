//! Pointwise checks of the gradient estimates on heat-solver snapshots.

use alloc::format;
use alloc::vec::Vec;

use crate::constants::{classic_constants, DerivedConstants, JLowerBound};
use crate::error::{domain, Result};
use crate::geometry::{boundary_second_fundamental_form, ric_minus};
use crate::heat::{li_yau_terms, solve_heat, HeatConfig, HeatSolution, InitialData, LiYauTerms};
use crate::jsolver::desk_bound;
use crate::report::{Location, Provenance, VerifyReport};
use crate::{Grid, WarpedSurface};

/// Margins below `−MARGIN_TOLERANCE` count as violations.
pub const MARGIN_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_T_MIN: f64 = 0.01;

/// Closed time interval of snapshots to check.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
}

impl Window {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min > 0.0 && t_max >= t_min) {
            return Err(domain("verification window", format!("need 0 < t_min ≤ T, got [{t_min}, {t_max}]")));
        }
        Ok(Self { t_min, t_max })
    }

    fn contains(&self, t: f64) -> bool {
        let slack = 1e-12 * self.t_max;
        t >= self.t_min - slack && t <= self.t_max + slack
    }
}

/// Which lower bound for `J` enters the estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "route", rename_all = "snake_case"))]
pub enum LowerBoundSource {
    /// `e^{−t·sup V/(c−1)}` from the comparison principle.
    Desk { sup_v: f64, c: f64 },
    /// `2^{−1/(c−1)} e^{−C̃3 t/(c−1)}` with a user-supplied constant.
    C3Form(JLowerBound),
}

impl LowerBoundSource {
    /// Desk bound for the surface and exponent `c`, with `sup V` measured on `grid`.
    pub fn desk(surface: &WarpedSurface, grid: &Grid, c: f64) -> Result<Self> {
        let v = crate::jsolver::potential_v(surface, grid, c)?;
        Ok(Self::Desk { sup_v: v.max().max(0.0), c })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Desk { sup_v, c } => desk_bound(*sup_v, *c, t),
            Self::C3Form(b) => b.eval(t),
        }
    }

    fn provenance(&self) -> Vec<Provenance> {
        match self {
            Self::Desk { sup_v, c } => alloc::vec![
                Provenance::measured_value("sup V", *sup_v, "maximum of 2(c−1)|Ric⁻| on the grid"),
                Provenance::formula("J̲", desk_bound(*sup_v, *c, 1.0), "desk form exp(−t sup V/(c−1)), value at t = 1"),
            ],
            Self::C3Form(b) => alloc::vec![
                Provenance::overridden("C̃3", b.c3_tilde, "from the user-supplied C3"),
                Provenance::formula("J̲", b.eval(1.0), "C̃3 form 2^{−1/(c−1)} exp(−C̃3 t/(c−1)), value at t = 1"),
            ],
        }
    }
}

/// One row of the margin table.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginRow {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Verification {
    pub report: VerifyReport,
    /// The minimising node of each checked snapshot.
    pub rows: Vec<MarginRow>,
}

fn check(
    sol: &HeatSolution,
    window: Window,
    name: &str,
    mut side: impl FnMut(f64, &LiYauTerms, usize) -> (f64, f64),
) -> Result<Verification> {
    let grid = *sol.grid();
    let nt = grid.ntheta();
    let mut report = VerifyReport::new(name, MARGIN_TOLERANCE);
    let mut rows = Vec::new();
    for snap in sol.snapshots() {
        if !window.contains(snap.t) {
            continue;
        }
        let t = snap.t;
        let terms = li_yau_terms(sol.surface(), &snap.u)?;
        let mut best: Option<MarginRow> = None;
        let margins: Vec<(f64, Location)> = (0..grid.len())
            .map(|k| {
                let (lhs, rhs) = side(t, &terms, k);
                let (i, j) = (k / nt, k % nt);
                let row = MarginRow { t, r: grid.r(i), theta: grid.theta(j), lhs, rhs, margin: rhs - lhs };
                if best.is_none_or(|b| !(row.margin >= b.margin)) {
                    best = Some(row);
                }
                (row.margin, Location::at_time(row.r, row.theta, t))
            })
            .collect();
        report.record_snapshot(Some(t), margins);
        rows.extend(best);
    }
    if report.snapshots.is_empty() {
        return Err(domain("verification window", format!("no snapshot in [{}, {}]", window.t_min, window.t_max)));
    }
    report.finish();
    Ok(Verification { report, rows })
}

/// `α J̲ |∇u|²/u² − ∂t u/u ≤ C1 + C2/(J̲ t)` at every node and snapshot in
/// the window. `hypotheses_met` is copied into the report; the pass flag
/// reflects the margins alone.
pub fn verify_theorem(
    sol: &HeatSolution,
    constants: &DerivedConstants,
    bound: &LowerBoundSource,
    window: Window,
    hypotheses_met: bool,
) -> Result<Verification> {
    let (alpha, c1, c2) = (constants.alpha, constants.c1, constants.c2);
    let mut v = check(sol, window, "α J̲ |∇u|²/u² − ∂t u/u ≤ C1 + C2/(J̲ t)", |t, terms, k| {
        let j = bound.eval(t);
        (terms.quantity(k, alpha * j), c1 + c2 / (j * t))
    })?;
    let p = &mut v.report.provenance;
    p.push(Provenance::formula("α", alpha, "tuning"));
    p.push(Provenance::formula("C1", c1, "closed form, cross-checked against √(D̃/E)"));
    p.push(Provenance::formula("C2", c2, "closed form, cross-checked against 1/E"));
    p.extend(bound.provenance());
    p.push(Provenance::measured("∂t u", "taken as the discrete Δ_g u of each snapshot"));
    v.report.hypotheses_met = hypotheses_met;
    Ok(v)
}

/// `|∇u|²/u² − α ∂t u/u ≤ C1 + (n/2)α²/t` for convex boundary, with
/// `C1 = (n/√2)α²K/(α−1)` and `K = sup |Ric⁻|`.
///
/// Refused when the boundary is not convex.
pub fn verify_classic(sol: &HeatSolution, alpha: f64, window: Window) -> Result<Verification> {
    let surface = sol.surface();
    let h = boundary_second_fundamental_form(surface).h;
    if h > 0.0 {
        return Err(domain("classic estimate", format!("boundary is not convex (H = {h})")));
    }
    let k = ric_minus(surface, sol.grid())?.max();
    let (c1, c2) = classic_constants(surface.dim(), alpha, k)?;
    let mut v = check(sol, window, "|∇u|²/u² − α ∂t u/u ≤ C1 + (n/2)α²/t", |t, terms, idx| {
        (terms.gradient[idx] - alpha * terms.laplacian[idx], c1 + c2 / t)
    })?;
    let p = &mut v.report.provenance;
    p.push(Provenance::formula("α", alpha, "classic tuning"));
    p.push(Provenance::measured_value("K", k, "sup |Ric⁻| on the grid"));
    p.push(Provenance::formula("C1", c1, "(n/√2) α² K/(α−1)"));
    p.push(Provenance::formula("C2", c2, "(n/2) α²"));
    Ok(v)
}

/// Result of the Gaussian-regime calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeReport {
    /// `sup t·(|∇u|²/u² − ∂t u/u)` over the window and the core region.
    pub value: f64,
    pub target: f64,
    pub at: Option<Location>,
    /// The core region reached a boundary circle.
    pub boundary_affected: bool,
}

/// Nodes with `u` below this fraction of the snapshot maximum are outside
/// the probe's core region.
pub const PROBE_CORE: f64 = 1e-2;

/// Evaluates `t·(|∇u|²/u² − Δu/u)` on the snapshots of a heat run, restricted
/// to where `u ≥ 1e-2·max u`. For the Euclidean heat kernel this is `n/2`.
pub fn sharpness_probe(sol: &HeatSolution, window: Window) -> Result<ProbeReport> {
    let grid = *sol.grid();
    let nt = grid.ntheta();
    let mut report = ProbeReport { value: f64::NEG_INFINITY, target: sol.surface().dim() as f64 / 2.0, at: None, boundary_affected: false };
    for snap in sol.snapshots() {
        if !window.contains(snap.t) {
            continue;
        }
        let t = snap.t;
        let terms = li_yau_terms(sol.surface(), &snap.u)?;
        let floor = PROBE_CORE * snap.u.max();
        for (k, u) in snap.u.values().iter().enumerate() {
            if *u < floor {
                continue;
            }
            let i = k / nt;
            if i == 0 || i + 1 == grid.nr() {
                report.boundary_affected = true;
            }
            let q = t * terms.quantity(k, 1.0);
            if q > report.value {
                report.value = q;
                report.at = Some(Location::at_time(grid.r(i), grid.theta(k % nt), t));
            }
        }
    }
    if report.at.is_none() {
        return Err(domain("probe window", format!("no snapshot in [{}, {}]", window.t_min, window.t_max)));
    }
    Ok(report)
}

/// Heat run for [`sharpness_probe`]: a unit point mass at the middle of the
/// band over a faint background, stepped with smoothed start-up.
pub fn probe_solution(surface: &WarpedSurface, grid: &Grid, dt: f64, window: Window, snapshots: usize) -> Result<HeatSolution> {
    let r = 0.5 * (surface.r_lo() + surface.r_hi());
    let initial = InitialData::PointMass { r, theta: 0.0, mass: 1.0, background: 1e-6 };
    let steps_lo = libm::ceil(window.t_min / dt - 1e-9) as usize;
    let steps_hi = libm::floor(window.t_max / dt + 1e-9) as usize;
    let count = snapshots.max(2);
    let times: Vec<f64> = (0..count)
        .map(|m| (steps_lo + (steps_hi - steps_lo) * m / (count - 1)) as f64 * dt)
        .collect();
    let mut cfg = HeatConfig::new(*grid, dt, steps_hi as f64 * dt, times, initial);
    cfg.startup_steps = 4;
    solve_heat(surface, &cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{compute_constants, Tuning};
    use crate::heat::{Mode, DEFAULT_FLOOR};

    fn cosine() -> InitialData {
        InitialData::Trigonometric {
            constant: 2.0,
            modes: alloc::vec![Mode { radial: 1, angular: 0, amplitude: 1.0, phase: 0.0 }],
            floor: DEFAULT_FLOOR,
        }
    }

    fn flat_run(initial: InitialData) -> HeatSolution {
        let s = WarpedSurface::flat_cylinder(1.0).unwrap();
        let g = Grid::new(&s, 65, 8).unwrap();
        let times: Vec<f64> = (1..=100).map(|k| k as f64 * 0.01).collect();
        solve_heat(&s, &HeatConfig::new(g, 1e-3, 1.0, times, initial)).unwrap()
    }

    #[test]
    fn theorem_on_flat_cylinder() {
        let sol = flat_run(cosine());
        let t = Tuning::auto(0.5, 0.0, 2).unwrap();
        let k = compute_constants(2, t.xi, t.alpha, t.beta, 0.0, 0.2).unwrap();
        assert_eq!(k.c1, 0.0);
        let bound = LowerBoundSource::desk(sol.surface(), sol.grid(), k.c).unwrap();
        let v = verify_theorem(&sol, &k, &bound, Window::new(0.01, 1.0).unwrap(), true).unwrap();
        assert!(v.report.passed && v.report.min_margin > 0.0, "{}", v.report.min_margin);
        assert_eq!(v.rows.len(), 100);
    }

    #[test]
    fn constant_solution_margin_is_the_right_side() {
        let sol = flat_run(InitialData::constant(1.0));
        let k = compute_constants(2, 0.5, 0.25, 0.02, 0.0, 0.2).unwrap();
        let bound = LowerBoundSource::Desk { sup_v: 0.0, c: k.c };
        let v = verify_theorem(&sol, &k, &bound, Window::new(0.5, 0.5).unwrap(), true).unwrap();
        assert!((v.report.min_margin - k.c2 / 0.5).abs() < 1e-9);
        let c = verify_classic(&sol, 2.0, Window::new(0.5, 0.5).unwrap()).unwrap();
        assert!((c.report.min_margin - 4.0 / 0.5).abs() < 1e-9);
    }

    #[test]
    fn classic_margin_grows_with_alpha() {
        let sol = flat_run(cosine());
        let w = Window::new(0.01, 1.0).unwrap();
        let a = verify_classic(&sol, 1.05, w).unwrap();
        let b = verify_classic(&sol, 2.0, w).unwrap();
        assert!(a.report.passed && b.report.passed);
        assert!(b.report.min_margin > a.report.min_margin);
    }

    #[test]
    fn classic_refuses_nonconvex_boundary() {
        let s = WarpedSurface::new(0.0, 1.0, crate::Warp::Exponential { amplitude: 1.0, rate: 1.0 }).unwrap();
        let g = Grid::new(&s, 33, 4).unwrap();
        let sol = solve_heat(&s, &HeatConfig::new(g, 1e-2, 0.1, alloc::vec![0.1], InitialData::constant(1.0))).unwrap();
        assert!(verify_classic(&sol, 1.5, Window::new(0.05, 0.1).unwrap()).is_err());
    }

    #[test]
    fn unsupported_hypotheses_are_marked() {
        let sol = flat_run(cosine());
        let k = compute_constants(2, 0.5, 0.25, 0.02, 0.0, 0.2).unwrap();
        let bound = LowerBoundSource::Desk { sup_v: 0.0, c: k.c };
        let v = verify_theorem(&sol, &k, &bound, Window::new(0.01, 1.0).unwrap(), false).unwrap();
        assert!(v.report.passed && !v.report.hypotheses_met);
    }

    #[test]
    fn probe_on_constant_is_zero() {
        let sol = flat_run(InitialData::constant(3.0));
        let p = sharpness_probe(&sol, Window::new(0.01, 0.02).unwrap()).unwrap();
        assert!(p.value.abs() < 1e-9);
    }

    #[test]
    fn probe_calibrates_to_half_the_dimension() {
        let s = WarpedSurface::flat_cylinder(2.0).unwrap();
        let g = Grid::new(&s, 257, 256).unwrap();
        let w = Window::new(0.005, 0.02).unwrap();
        let sol = probe_solution(&s, &g, 1e-4, w, 4).unwrap();
        let p = sharpness_probe(&sol, w).unwrap();
        assert!(p.value >= 0.8 && p.value <= 1.05, "{p:?}");
        assert!(!p.boundary_affected);
    }
}
