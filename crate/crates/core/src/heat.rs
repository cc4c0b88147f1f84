//! Neumann heat flow `∂t u = Δ_g u` on a warped surface.
//!
//! The angular direction is handled spectrally: every Fourier mode
//! `u_k(r, t) e^{ikθ}` evolves on its own under
//! `(1/f) ∂r(f ∂r u_k) − (k²/f²) u_k`. The radial operator is a conservative
//! finite-volume discretisation on the node-centred grid, with half cells at
//! both ends and zero flux through the boundary faces, so the trapezoidal
//! mass `Σ ω_i f_i u_i` is conserved exactly by every step. Time stepping is
//! Crank-Nicolson; for rough data the first steps can be replaced by pairs of
//! implicit Euler half steps (Rannacher start-up) to damp the stiff modes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, round};

use crate::diff::radial_derivatives;
use crate::error::{domain, Error, Result};
use crate::fft;
use crate::geometry::WarpedSurface;
use crate::grid::{FieldOnGrid, Grid, Units};
use crate::tridiag::Factored;

/// Default positivity floor for trigonometric initial data.
pub const DEFAULT_FLOOR: f64 = 0.5;
/// Maximum number of step-size halvings after a positivity failure.
pub const MAX_HALVINGS: u32 = 6;
/// Half-width of the point-mass mollifier, in cells.
pub const MOLLIFIER_CELLS: f64 = 2.0;

/// One separable term `amplitude · cos(radial·π(r − r_lo)/L) · cos(angular·θ + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Mode {
    #[cfg_attr(feature = "serde", serde(default))]
    pub radial: u32,
    #[cfg_attr(feature = "serde", serde(default))]
    pub angular: u32,
    pub amplitude: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum InitialData {
    /// `constant + Σ modes`, with the modes scaled down if needed so that
    /// the minimum over the grid is at least `floor`.
    Trigonometric {
        constant: f64,
        #[cfg_attr(feature = "serde", serde(default))]
        modes: Vec<Mode>,
        #[cfg_attr(feature = "serde", serde(default = "default_floor"))]
        floor: f64,
    },
    /// `background + mass·m_x` where `m_x` is a bump of radius
    /// [`MOLLIFIER_CELLS`] cells around `(r, θ)` with unit integral.
    PointMass { r: f64, theta: f64, mass: f64, background: f64 },
}

#[cfg(feature = "serde")]
fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

impl InitialData {
    pub fn constant(value: f64) -> Self {
        InitialData::Trigonometric { constant: value, modes: Vec::new(), floor: DEFAULT_FLOOR.min(value) }
    }

    /// Samples the data on the grid, applying the positivity floor.
    pub fn sample(&self, surface: &WarpedSurface, grid: &Grid) -> Result<FieldOnGrid> {
        match self {
            InitialData::Trigonometric { constant, modes, floor } => {
                if !(*floor > 0.0) || !(constant > floor) && !modes.is_empty() || !(*constant >= *floor) {
                    return Err(domain(
                        "initial data",
                        format!("constant {constant} must exceed the positivity floor {floor} > 0"),
                    ));
                }
                for m in modes {
                    if grid.ntheta() > 1 && 2 * m.angular as usize >= grid.ntheta() || grid.ntheta() == 1 && m.angular > 0 {
                        return Err(domain(
                            "initial data",
                            format!("angular mode {} is not resolved by {} angular nodes", m.angular, grid.ntheta()),
                        ));
                    }
                }
                let len = surface.width();
                let shape = FieldOnGrid::from_fn(*grid, Units::Density, |i, j| {
                    let s = (grid.r(i) - surface.r_lo()) / len;
                    modes
                        .iter()
                        .map(|m| m.amplitude * cos(m.radial as f64 * PI * s) * cos(m.angular as f64 * grid.theta(j) + m.phase))
                        .sum()
                });
                let low = shape.min();
                let scale = if constant + low < *floor { (constant - floor) / -low } else { 1.0 };
                Ok(shape.map(Units::Density, |v| constant + scale * v))
            }
            InitialData::PointMass { r, theta, mass, background } => {
                let bump = mollified_point(surface, grid, *r, *theta)?;
                Ok(bump.map(Units::Density, |v| background + mass * v))
            }
        }
    }
}

/// Unit-integral bump of radius [`MOLLIFIER_CELLS`] cells around `(r, θ)`.
pub fn mollified_point(surface: &WarpedSurface, grid: &Grid, r: f64, theta: f64) -> Result<FieldOnGrid> {
    if !surface.contains(r) {
        return Err(domain("point mass", format!("r = {r} is outside [{}, {}]", surface.r_lo(), surface.r_hi())));
    }
    let hr = grid.hr();
    let hth = grid.htheta();
    let cosine_bump = |s: f64| if s.abs() < 1.0 { 0.5 * (1.0 + cos(PI * s)) } else { 0.0 };
    let raw = FieldOnGrid::from_fn(*grid, Units::Density, |i, j| {
        let radial = cosine_bump((grid.r(i) - r) / (MOLLIFIER_CELLS * hr));
        if grid.ntheta() == 1 {
            return radial;
        }
        let mut d = grid.theta(j) - theta;
        d -= 2.0 * PI * round(d / (2.0 * PI));
        radial * cosine_bump(d / (MOLLIFIER_CELLS * hth))
    });
    let total = raw.integrate(surface);
    if !(total > 0.0) {
        return Err(Error::Resolution(format!("no grid node within the mollifier around ({r}, {theta})")));
    }
    Ok(raw.map(Units::Density, |v| v / total))
}

/// Symmetric radial operator `S_k` with mass matrix `M` so that the semi-discrete
/// mode equation reads `M u' = S_k u`.
#[derive(Debug, Clone)]
struct RadialOperator {
    mass: Vec<f64>,
    /// Conductance `f(r_{i+1/2}) / h` of the face between nodes `i` and `i+1`.
    face: Vec<f64>,
    /// `ω_i / f_i`, multiplied by `k²` for angular mode `k`.
    angular: Vec<f64>,
    /// `ω_i f_i V_i` for a potential `V`.
    potential: Vec<f64>,
}

impl RadialOperator {
    fn new(surface: &WarpedSurface, grid: &Grid, potential: Option<&[f64]>) -> Self {
        let nr = grid.nr();
        let h = grid.hr();
        let f: Vec<f64> = (0..nr).map(|i| surface.f(grid.r(i))).collect();
        let mass: Vec<f64> = (0..nr).map(|i| grid.radial_weight(i) * f[i]).collect();
        let face = (0..nr - 1).map(|i| surface.f(0.5 * (grid.r(i) + grid.r(i + 1))) / h).collect();
        let angular = (0..nr).map(|i| grid.radial_weight(i) / f[i]).collect();
        let potential = match potential {
            Some(v) => (0..nr).map(|i| mass[i] * v[i]).collect(),
            None => vec![0.0; nr],
        };
        Self { mass, face, angular, potential }
    }

    fn diagonal(&self, k2: f64, i: usize) -> f64 {
        let mut d = -k2 * self.angular[i] + self.potential[i];
        if i > 0 {
            d -= self.face[i - 1];
        }
        if i < self.face.len() {
            d -= self.face[i];
        }
        d
    }

    /// `out = M u + w S_k u`.
    fn apply(&self, k2: f64, w: f64, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for i in 0..n {
            let mut s = self.diagonal(k2, i) * u[i];
            if i > 0 {
                s += self.face[i - 1] * u[i - 1];
            }
            if i + 1 < n {
                s += self.face[i] * u[i + 1];
            }
            out[i] = self.mass[i] * u[i] + w * s;
        }
    }

    /// Factorisation of `M − w S_k`.
    fn implicit(&self, k2: f64, w: f64) -> Result<Factored> {
        let n = self.mass.len();
        let diag: Vec<f64> = (0..n).map(|i| self.mass[i] - w * self.diagonal(k2, i)).collect();
        let off: Vec<f64> = self.face.iter().map(|c| -w * c).collect();
        Factored::new(&off, &diag, &off)
    }
}

/// Angular Fourier coefficients of a field, stored mode-major.
#[derive(Debug, Clone)]
pub(crate) struct Spectrum {
    nr: usize,
    nt: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Spectrum {
    pub(crate) fn from_values(grid: &Grid, values: &[f64]) -> Self {
        let (nr, nt) = (grid.nr(), grid.ntheta());
        let mut re = vec![0.0; nr * nt];
        let mut im = vec![0.0; nr * nt];
        let mut row_re = vec![0.0; nt];
        let mut row_im = vec![0.0; nt];
        for i in 0..nr {
            row_re.copy_from_slice(&values[i * nt..(i + 1) * nt]);
            row_im.iter_mut().for_each(|v| *v = 0.0);
            fft::transform(&mut row_re, &mut row_im, false);
            for k in 0..nt {
                re[k * nr + i] = row_re[k];
                im[k * nr + i] = row_im[k];
            }
        }
        Self { nr, nt, re, im }
    }

    pub(crate) fn to_values(&self) -> Vec<f64> {
        let (nr, nt) = (self.nr, self.nt);
        let mut out = vec![0.0; nr * nt];
        let mut row_re = vec![0.0; nt];
        let mut row_im = vec![0.0; nt];
        for i in 0..nr {
            for k in 0..nt {
                row_re[k] = self.re[k * nr + i];
                row_im[k] = self.im[k * nr + i];
            }
            fft::transform(&mut row_re, &mut row_im, true);
            out[i * nt..(i + 1) * nt].copy_from_slice(&row_re);
        }
        out
    }

    pub(crate) fn add_scaled(&mut self, other: &Spectrum, w: f64) {
        for (a, b) in self.re.iter_mut().zip(&other.re) {
            *a += w * b;
        }
        for (a, b) in self.im.iter_mut().zip(&other.im) {
            *a += w * b;
        }
    }
}

/// How a single step was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    CrankNicolson,
    /// Two implicit Euler steps of half the step size.
    EulerPair,
}

/// Time stepper for `∂t u = Δ_g u + V u` with Neumann ends and a fixed step.
#[derive(Debug, Clone)]
pub struct HeatPropagator {
    grid: Grid,
    dt: f64,
    op: RadialOperator,
    /// Factorisations of `M − (dt/2) S_k`, indexed by `|k|`.
    systems: Vec<Factored>,
}

impl HeatPropagator {
    /// `potential`, when given, holds one value per radial node.
    pub fn new(surface: &WarpedSurface, grid: &Grid, dt: f64, potential: Option<&[f64]>) -> Result<Self> {
        if !grid.matches(surface) {
            return Err(Error::InvalidGrid("grid does not span the surface interval".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(domain("time step", format!("{dt} must be positive")));
        }
        if let Some(v) = potential {
            if v.len() != grid.nr() {
                return Err(Error::InvalidGrid(format!("potential has {} values for {} radial nodes", v.len(), grid.nr())));
            }
        }
        let op = RadialOperator::new(surface, grid, potential);
        let nt = grid.ntheta();
        let systems = (0..=nt / 2)
            .map(|k| op.implicit((k * k) as f64, 0.5 * dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: *grid, dt, op, systems })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn mode_index(&self, k: usize) -> usize {
        let nt = self.grid.ntheta();
        k.min(nt - k)
    }

    pub(crate) fn step(&self, state: &mut Spectrum, kind: StepKind) -> Result<()> {
        let nr = self.grid.nr();
        let mut buf = vec![0.0; nr];
        for k in 0..state.nt {
            let idx = self.mode_index(k);
            let k2 = (idx * idx) as f64;
            let sys = &self.systems[idx];
            for part in [&mut state.re, &mut state.im] {
                let u = &mut part[k * nr..(k + 1) * nr];
                if k > 0 && u.iter().all(|v| *v == 0.0) {
                    continue;
                }
                match kind {
                    StepKind::CrankNicolson => {
                        self.op.apply(k2, 0.5 * self.dt, u, &mut buf);
                        sys.solve_in_place(&mut buf)?;
                        u.copy_from_slice(&buf);
                    }
                    StepKind::EulerPair => {
                        for _ in 0..2 {
                            self.op.apply(k2, 0.0, u, &mut buf);
                            sys.solve_in_place(&mut buf)?;
                            u.copy_from_slice(&buf);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Kind of the `n`-th step (0-based) when the first `startup` steps are smoothed.
    pub fn kind_of(n: usize, startup: usize) -> StepKind {
        if n < startup {
            StepKind::EulerPair
        } else {
            StepKind::CrankNicolson
        }
    }

    /// Advances nodal values by `steps` steps, the first `startup` of which
    /// are implicit Euler pairs.
    pub fn advance(&self, values: &[f64], steps: usize, startup: usize) -> Result<Vec<f64>> {
        let mut s = Spectrum::from_values(&self.grid, values);
        for n in 0..steps {
            self.step(&mut s, Self::kind_of(n, startup))?;
        }
        Ok(s.to_values())
    }

    /// Flux through the two boundary faces implied by one step from `prev` to
    /// `next`, per unit boundary length: `max |M (u⁺ − u)/Δt − S u*| / f` over
    /// the boundary nodes, where `u*` is the scheme's implicit average.
    pub(crate) fn boundary_flux(&self, prev: &Spectrum, next: &Spectrum, kind: StepKind) -> f64 {
        let nr = self.grid.nr();
        let nt = self.grid.ntheta();
        let mut worst = 0.0f64;
        for i in [0, nr - 1] {
            let mut row_re = vec![0.0; nt];
            let mut row_im = vec![0.0; nt];
            for k in 0..nt {
                let idx = self.mode_index(k);
                let k2 = (idx * idx) as f64;
                let mut parts = [0.0; 2];
                for (p, (a, b)) in [(&prev.re, &next.re), (&prev.im, &next.im)].into_iter().enumerate() {
                    let (ua, ub) = (&a[k * nr..(k + 1) * nr], &b[k * nr..(k + 1) * nr]);
                    // S u at node i for the relevant implicit average
                    let s_at = |u: &[f64]| {
                        let mut s = self.op.diagonal(k2, i) * u[i];
                        if i > 0 {
                            s += self.op.face[i - 1] * u[i - 1];
                        }
                        if i + 1 < nr {
                            s += self.op.face[i] * u[i + 1];
                        }
                        s
                    };
                    parts[p] = match kind {
                        StepKind::CrankNicolson => {
                            self.op.mass[i] * (ub[i] - ua[i]) / self.dt - 0.5 * (s_at(ua) + s_at(ub))
                        }
                        // only the last half step is checked; the intermediate state is not kept
                        StepKind::EulerPair => 0.0,
                    };
                }
                row_re[k] = parts[0];
                row_im[k] = parts[1];
            }
            fft::transform(&mut row_re, &mut row_im, true);
            let f = self.op.mass[i] / self.grid.radial_weight(i);
            for v in row_re {
                worst = worst.max(v.abs() / f);
            }
        }
        worst
    }
}

#[derive(Debug, Clone)]
pub struct HeatConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_final: f64,
    /// Times at which `u` is kept; each must be a multiple of `dt`.
    pub snapshots: Vec<f64>,
    pub initial: InitialData,
    /// Leading steps taken as implicit Euler pairs.
    pub startup_steps: usize,
}

impl HeatConfig {
    pub fn new(grid: Grid, dt: f64, t_final: f64, snapshots: Vec<f64>, initial: InitialData) -> Self {
        Self { grid, dt, t_final, snapshots, initial, startup_steps: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: FieldOnGrid,
    pub mass: f64,
    /// Implied boundary flux of the last step, relative to `sup |u|`;
    /// `None` at `t = 0` and after a smoothed step.
    pub neumann_residual: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct HeatSolution {
    surface: WarpedSurface,
    grid: Grid,
    dt: f64,
    halvings: u32,
    initial_mass: f64,
    initial_min: f64,
    snapshots: Vec<Snapshot>,
}

/// Step count reaching `t`, if `t` lies on the lattice of `dt`.
fn steps_to(t: f64, dt: f64) -> Option<usize> {
    let n = round(t / dt);
    ((n * dt - t).abs() <= 1e-9 * dt.max(t.abs()) && n >= 0.0).then_some(n as usize)
}

/// Solves the Neumann heat problem, halving `dt` (at most [`MAX_HALVINGS`]
/// times) whenever a snapshot loses positivity.
pub fn solve_heat(surface: &WarpedSurface, config: &HeatConfig) -> Result<HeatSolution> {
    let grid = config.grid;
    if !grid.matches(surface) {
        return Err(Error::InvalidGrid("grid does not span the surface interval".into()));
    }
    if !(config.dt > 0.0) || !(config.t_final >= config.dt) {
        return Err(domain("time step", format!("need 0 < dt ≤ T, got dt = {}, T = {}", config.dt, config.t_final)));
    }
    let mut times = config.snapshots.clone();
    if times.is_empty() {
        times.push(config.t_final);
    }
    for t in &times {
        if !(*t >= 0.0 && *t <= config.t_final * (1.0 + 1e-12)) || steps_to(*t, config.dt).is_none() {
            return Err(domain("snapshot time", format!("{t} is not a multiple of dt = {} in [0, T]", config.dt)));
        }
    }
    times.sort_by(f64::total_cmp);
    times.dedup();
    let u0 = config.initial.sample(surface, &grid)?;
    let initial_min = u0.min();
    if !(initial_min > 0.0) {
        return Err(Error::Positivity(format!("initial data reaches {initial_min}")));
    }
    let initial_mass = u0.integrate(surface);

    let mut last_failure = None;
    for halvings in 0..=MAX_HALVINGS {
        let factor = 1usize << halvings;
        let dt = config.dt / factor as f64;
        let prop = HeatPropagator::new(surface, &grid, dt, None)?;
        match run(&prop, surface, &u0, &times, config.startup_steps * factor) {
            Ok(snapshots) => {
                return Ok(HeatSolution { surface: surface.clone(), grid, dt, halvings, initial_mass, initial_min, snapshots })
            }
            Err(e @ Error::Positivity(_)) => last_failure = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_failure.unwrap_or_else(|| Error::Positivity("positivity lost".into())))
}

fn run(prop: &HeatPropagator, surface: &WarpedSurface, u0: &FieldOnGrid, times: &[f64], startup: usize) -> Result<Vec<Snapshot>> {
    let grid = *prop.grid();
    let mut state = Spectrum::from_values(&grid, u0.values());
    let mut n = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let target = steps_to(t, prop.dt()).ok_or_else(|| domain("snapshot time", format!("{t} is off the step lattice")))?;
        let mut prev = None;
        while n < target {
            if n + 1 == target {
                prev = Some(state.clone());
            }
            prop.step(&mut state, HeatPropagator::kind_of(n, startup))?;
            n += 1;
        }
        let u = FieldOnGrid::from_values(grid, Units::Density, state.to_values())?;
        let low = u.min();
        if !(low > 0.0) {
            let node = u.argmin();
            return Err(Error::Positivity(format!(
                "u = {low:e} at r = {}, θ = {}, t = {t} with dt = {}",
                grid.r(node.ir),
                grid.theta(node.itheta),
                prop.dt()
            )));
        }
        let sup = u.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let neumann_residual = match (prev, HeatPropagator::kind_of(target.saturating_sub(1), startup)) {
            (Some(p), StepKind::CrankNicolson) => Some(prop.boundary_flux(&p, &state, StepKind::CrankNicolson) / sup),
            _ => None,
        };
        let mass = u.integrate(surface);
        out.push(Snapshot { t, u, mass, neumann_residual });
    }
    Ok(out)
}

impl HeatSolution {
    pub fn surface(&self) -> &WarpedSurface {
        &self.surface
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Step size actually used, after any halvings.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn halvings(&self) -> u32 {
        self.halvings
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.snapshots.iter().map(|s| s.t)
    }

    fn snapshot(&self, t: f64) -> Result<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .ok_or(Error::NotASnapshot(t))
    }

    pub fn field(&self, t: f64) -> Result<&FieldOnGrid> {
        Ok(&self.snapshot(t)?.u)
    }

    /// `∫ u(·, t) dA`.
    pub fn mass(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(self.initial_mass);
        }
        Ok(self.snapshot(t)?.mass)
    }

    pub fn initial_mass(&self) -> f64 {
        self.initial_mass
    }

    pub fn initial_min(&self) -> f64 {
        self.initial_min
    }

    /// Largest relative mass change over the snapshots.
    pub fn mass_drift(&self) -> f64 {
        self.snapshots
            .iter()
            .map(|s| (s.mass - self.initial_mass).abs() / self.initial_mass.abs())
            .fold(0.0, f64::max)
    }

    /// Smallest value of `u` over all snapshots.
    pub fn positivity_min(&self) -> f64 {
        self.snapshots.iter().map(|s| s.u.min()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_neumann_residual(&self) -> f64 {
        self.snapshots.iter().filter_map(|s| s.neumann_residual).fold(0.0, f64::max)
    }
}

/// Pointwise derivative data of a positive field.
#[derive(Debug, Clone)]
pub struct LiYauTerms {
    pub grid: Grid,
    /// `|∇u|²_g / u²`.
    pub gradient: Vec<f64>,
    /// `Δ_g u / u`.
    pub laplacian: Vec<f64>,
}

impl LiYauTerms {
    /// `factor·|∇u|²/u² − Δu/u` at storage index `k`.
    pub fn quantity(&self, k: usize, factor: f64) -> f64 {
        factor * self.gradient[k] - self.laplacian[k]
    }
}

/// `|∇u|²/u²` and `Δu/u` with fourth-order radial differences and spectral
/// angular derivatives.
pub fn li_yau_terms(surface: &WarpedSurface, u: &FieldOnGrid) -> Result<LiYauTerms> {
    let grid = *u.grid();
    let (nr, nt) = (grid.nr(), grid.ntheta());
    if nr < 6 {
        return Err(Error::Resolution(format!("{nr} radial nodes are too few for the derivative stencils")));
    }
    if u.min() <= 0.0 {
        return Err(Error::Positivity(format!("field reaches {}", u.min())));
    }
    let v = u.values();
    let mut ur = vec![0.0; nr * nt];
    let mut urr = vec![0.0; nr * nt];
    let mut col = vec![0.0; nr];
    let mut d1 = vec![0.0; nr];
    let mut d2 = vec![0.0; nr];
    for j in 0..nt {
        for i in 0..nr {
            col[i] = v[i * nt + j];
        }
        radial_derivatives(&col, grid.hr(), &mut d1, &mut d2);
        for i in 0..nr {
            ur[i * nt + j] = d1[i];
            urr[i * nt + j] = d2[i];
        }
    }
    let mut gradient = vec![0.0; nr * nt];
    let mut laplacian = vec![0.0; nr * nt];
    let mut ut = vec![0.0; nt];
    let mut utt = vec![0.0; nt];
    for i in 0..nr {
        let [f, f1, _] = surface.profile(grid.r(i));
        fft::derivatives(&v[i * nt..(i + 1) * nt], &mut ut, &mut utt);
        for j in 0..nt {
            let k = i * nt + j;
            let w = v[k];
            gradient[k] = (ur[k] * ur[k] + ut[j] * ut[j] / (f * f)) / (w * w);
            laplacian[k] = (urr[k] + f1 / f * ur[k] + utt[j] / (f * f)) / w;
        }
    }
    Ok(LiYauTerms { grid, gradient, laplacian })
}

/// Multiplier of `|∇u|²/u²` in the Li-Yau quantity.
#[derive(Debug, Clone, Copy)]
pub enum Factor<'a> {
    Scalar(f64),
    Field(&'a FieldOnGrid),
}

/// `factor·|∇u|²_g/u² − Δ_g u/u` at a stored snapshot; `∂t u` is taken as
/// `Δ_g u`, which it equals on solutions.
pub fn li_yau_quantity(sol: &HeatSolution, t: f64, factor: Factor<'_>) -> Result<FieldOnGrid> {
    let u = sol.field(t)?;
    let terms = li_yau_terms(&sol.surface, u)?;
    let grid = sol.grid;
    if let Factor::Field(field) = factor {
        if *field.grid() != grid {
            return Err(Error::InvalidGrid("factor field lives on a different grid".into()));
        }
    }
    let values = (0..grid.len())
        .map(|k| {
            let a = match factor {
                Factor::Scalar(a) => a,
                Factor::Field(field) => field.values()[k],
            };
            terms.quantity(k, a)
        })
        .collect();
    FieldOnGrid::from_values(grid, Units::PerLengthSquared, values)
}
