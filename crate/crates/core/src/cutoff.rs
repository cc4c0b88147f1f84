//! The boundary cutoff `ψ`, the weight `φ̃ = α(1 + ψ(r(x)/R))²` built from
//! it, and an audit of the bounds on `φ̃`, `|∇φ̃|` and `Δφ̃`.
//!
//! `ψ = H·q(s)` with the quintic `q(s) = s + 4s³ − 7s⁴ + 3s⁵` on `[0, 1]` and
//! `ψ ≡ H` beyond. `q` is the unique quintic with `q(0) = 0, q'(0) = 1,
//! q''(0) = 0, q(1) = 1, q'(1) = q''(1) = 0`, and `q' = (s−1)²(15s² + 2s + 1) ≥ 0`.
//! No profile can have `ψ(1) = H`, `ψ'(1) = 0` and `ψ'' ≥ −H` together
//! (integrating gives `ψ(1) ≤ H/2`), so the measured `H_ψ = −inf ψ''` is
//! reported next to `H` and the Laplacian bound is checked with both.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::geometry::{dist_to_boundary, near_cut_locus, WarpedSurface};
use crate::grid::{FieldOnGrid, Grid, Units};
use crate::report::{Location, Provenance, VerifyReport};

/// Sample count used to measure the profile's extrema.
pub const PROFILE_SAMPLES: usize = 20_000;

fn quintic(s: f64) -> [f64; 3] {
    if s >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let s2 = s * s;
    [
        s + 4.0 * s2 * s - 7.0 * s2 * s2 + 3.0 * s2 * s2 * s,
        1.0 + 12.0 * s2 - 28.0 * s2 * s + 15.0 * s2 * s2,
        24.0 * s - 84.0 * s2 + 60.0 * s2 * s,
    ]
}

/// `ψ` together with its measured extrema on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutoffProfile {
    pub h: f64,
    pub sup_slope: f64,
    pub inf_second: f64,
    pub sup_value: f64,
}

impl CutoffProfile {
    /// `[ψ, ψ', ψ'']` at `s ≥ 0`.
    pub fn eval(&self, s: f64) -> [f64; 3] {
        let [q, q1, q2] = quintic(s.max(0.0));
        [self.h * q, self.h * q1, self.h * q2]
    }

    /// `H_ψ = −inf ψ''`, the constant `ψ'' ≥ −H_ψ` actually satisfied.
    pub fn h_psi(&self) -> f64 {
        (-self.inf_second).max(0.0)
    }
}

/// Builds `ψ` for convexity defect `h` and checks its invariants on a dense sample.
pub fn build_psi(h: f64) -> Result<CutoffProfile> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(domain("H", format!("{h} must be a finite non-negative number")));
    }
    let mut p = CutoffProfile { h, sup_slope: 0.0, inf_second: 0.0, sup_value: 0.0 };
    let tol = 1e-10 * (1.0 + h);
    let mut prev = 0.0;
    for k in 0..=PROFILE_SAMPLES {
        let s = k as f64 / PROFILE_SAMPLES as f64;
        let [v, v1, v2] = p.eval(s);
        if v < prev - tol || v1 < -tol || v1 > 2.0 * h + tol || v > h + tol {
            return Err(Error::Numeric(format!("cutoff invariant fails at s = {s}: ψ = {v}, ψ' = {v1}")));
        }
        prev = v;
        p.sup_slope = p.sup_slope.max(v1);
        p.inf_second = p.inf_second.min(v2);
        p.sup_value = p.sup_value.max(v);
    }
    Ok(p)
}

/// `φ̃(x) = α(1 + ψ(r(x)/R))²` with `r(x)` the distance to the boundary.
pub fn build_varphi_tilde(surface: &WarpedSurface, grid: &Grid, psi: &CutoffProfile, alpha: f64, radius: f64) -> Result<FieldOnGrid> {
    if !(alpha > 0.0) || !(radius > 0.0) {
        return Err(domain("α, R", format!("need α > 0 and R > 0, got α = {alpha}, R = {radius}")));
    }
    let column = (0..grid.nr())
        .map(|i| {
            let d = dist_to_boundary(surface, grid.r(i), 0.0)?;
            let w = 1.0 + psi.eval(d / radius)[0];
            Ok(alpha * w * w)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FieldOnGrid::from_fn(*grid, Units::Dimensionless, |i, _| column[i]))
}

/// Lower bound on `Δφ̃`: `−2α(1+H)[h2/R² + 2(n−1)H(3H+1)/R]`, where `h2`
/// is the constant in `ψ'' ≥ −h2`.
pub fn laplacian_floor(alpha: f64, h: f64, h2: f64, radius: f64, n: usize) -> f64 {
    let nf = n as f64;
    -2.0 * alpha * (1.0 + h) * (h2 / (radius * radius) + 2.0 * (nf - 1.0) * h * (3.0 * h + 1.0) / radius)
}

/// Upper bound on `|∇φ̃|`: `4αH(1+H)/R`.
pub fn gradient_ceiling(alpha: f64, h: f64, radius: f64) -> f64 {
    4.0 * alpha * h * (1.0 + h) / radius
}

/// Measured extrema of `φ̃` and the margins of its three bounds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CutoffAudit {
    pub min_value: f64,
    pub max_value: f64,
    pub sup_gradient: f64,
    pub inf_laplacian: f64,
    pub value_floor: f64,
    pub value_ceiling: f64,
    pub gradient_ceiling: f64,
    /// `H` as stated for `ψ'' ≥ −H`.
    pub laplacian_floor_stated: f64,
    /// `H_ψ` measured on the profile.
    pub laplacian_floor_measured: f64,
    pub h_psi: f64,
    /// Pointwise check with the stated constant.
    pub stated: VerifyReport,
    /// Pointwise check with `H_ψ` substituted.
    pub corrected: VerifyReport,
}

/// Finite-difference audit of `α ≤ φ̃ ≤ α(1+H)²`, `|∇φ̃| ≤ 4αH(1+H)/R` and the
/// Laplacian floor, away from the equidistant circle.
#[allow(clippy::too_many_arguments)]
pub fn cutoff_bounds_audit(
    phi: &FieldOnGrid,
    surface: &WarpedSurface,
    grid: &Grid,
    psi: &CutoffProfile,
    alpha: f64,
    h: f64,
    radius: f64,
    n: usize,
) -> Result<CutoffAudit> {
    if phi.grid() != grid || !grid.matches(surface) {
        return Err(Error::InvalidGrid("φ̃ does not live on the audited grid".into()));
    }
    let nr = grid.nr();
    let hr = grid.hr();
    let v = phi.radial_line(0);
    let mut d1 = vec![0.0; nr];
    let mut d2 = vec![0.0; nr];
    for i in 1..nr - 1 {
        d1[i] = (v[i + 1] - v[i - 1]) / (2.0 * hr);
        d2[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (hr * hr);
    }
    d1[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * hr);
    d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (hr * hr);
    let m = nr - 1;
    d1[m] = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * hr);
    d2[m] = (2.0 * v[m] - 5.0 * v[m - 1] + 4.0 * v[m - 2] - v[m - 3]) / (hr * hr);

    let value_floor = alpha;
    let value_ceiling = alpha * (1.0 + h) * (1.0 + h);
    let grad_ceiling = gradient_ceiling(alpha, h, radius);
    let floor_stated = laplacian_floor(alpha, h, h, radius, n);
    let floor_measured = laplacian_floor(alpha, h, psi.h_psi(), radius, n);

    let mut audit = CutoffAudit {
        min_value: f64::INFINITY,
        max_value: f64::NEG_INFINITY,
        sup_gradient: 0.0,
        inf_laplacian: f64::INFINITY,
        value_floor,
        value_ceiling,
        gradient_ceiling: grad_ceiling,
        laplacian_floor_stated: floor_stated,
        laplacian_floor_measured: floor_measured,
        h_psi: psi.h_psi(),
        stated: VerifyReport::new("cutoff-bounds-stated", 1e-6),
        corrected: VerifyReport::new("cutoff-bounds-corrected", 1e-6),
    };
    let mut stated = Vec::new();
    let mut corrected = Vec::new();
    let mut excluded = Vec::new();
    for i in 0..nr {
        let loc = Location::node(grid.r(i), 0.0);
        audit.min_value = audit.min_value.min(v[i]);
        audit.max_value = audit.max_value.max(v[i]);
        if near_cut_locus(surface, grid, i) {
            excluded.push(loc);
            continue;
        }
        let [f, f1, _] = surface.profile(grid.r(i));
        let lap = d2[i] + f1 / f * d1[i];
        audit.sup_gradient = audit.sup_gradient.max(d1[i].abs());
        audit.inf_laplacian = audit.inf_laplacian.min(lap);
        let common = (v[i] - value_floor).min(value_ceiling - v[i]).min(grad_ceiling - d1[i].abs());
        stated.push((common.min(lap - floor_stated), loc));
        corrected.push((common.min(lap - floor_measured), loc));
    }
    let provenance = vec![
        Provenance::formula("alpha", alpha, "weight scale"),
        Provenance::formula("H", h, "convexity defect"),
        Provenance::formula("R", radius, "rolling radius"),
        Provenance::measured_value("H_psi", psi.h_psi(), "-inf psi'' on a dense sample"),
        Provenance::formula("gradient_ceiling", grad_ceiling, "4 alpha H (1+H) / R"),
        Provenance::formula("laplacian_floor_stated", floor_stated, "-2 alpha (1+H)[H/R^2 + 2(n-1)H(3H+1)/R]"),
        Provenance::formula("laplacian_floor_measured", floor_measured, "-2 alpha (1+H)[H_psi/R^2 + 2(n-1)H(3H+1)/R]"),
        Provenance::measured("phi_tilde derivatives", "centred second-order differences in r"),
    ];
    for (report, margins) in [(&mut audit.stated, stated), (&mut audit.corrected, corrected)] {
        report.record_snapshot(None, margins);
        report.excluded = excluded.clone();
        report.provenance = provenance.clone();
        report.finish();
    }
    Ok(audit)
}

/// `min_x [2(1−β)φ̃ − α − α(1−2β)]`, non-negative whenever `φ̃ ≥ α`.
pub fn coefficient_positivity(phi: &FieldOnGrid, alpha: f64, beta: f64) -> f64 {
    phi.values()
        .iter()
        .map(|p| 2.0 * (1.0 - beta) * p - alpha - alpha * (1.0 - 2.0 * beta))
        .fold(f64::INFINITY, f64::min)
}
