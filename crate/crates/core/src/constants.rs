//! Constants of the Neumann Li-Yau estimate under integral Ricci bounds,
//! and the classical constants it is compared against.
//!
//! `C1` and `C2` are computed twice: from their closed forms, and from the
//! intermediate coefficients `A, B, C, E, D̃` of the maximum-principle
//! argument (`C1 = √(D̃/E)`, `C2 = 1/E`). The two routes must agree.

use alloc::format;

use libm::{exp, pow, sqrt};

use crate::error::{domain, Error, Result};

/// Relative agreement demanded between the two routes to `C1`, `C2`.
pub const ROUTE_TOLERANCE: f64 = 1e-12;

fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(domain("ξ", format!("{xi} is not in (0, 1)")));
    }
    Ok(())
}

fn check_h(h: f64) -> Result<()> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(domain("H", format!("{h} must be a finite non-negative number")));
    }
    Ok(())
}

/// Largest admissible `α = (1 − ξ)/(1 + H)²`.
pub fn admissible_alpha(xi: f64, h: f64) -> Result<f64> {
    check_xi(xi)?;
    check_h(h)?;
    Ok((1.0 - xi) / ((1.0 + h) * (1.0 + h)))
}

/// Largest admissible `β = ξ²(1 − ξ)/(2ξ² + n²(1 + H)²)`.
pub fn admissible_beta(xi: f64, h: f64, n: usize) -> Result<f64> {
    check_xi(xi)?;
    check_h(h)?;
    if n < 2 {
        return Err(domain("dimension", format!("n = {n} must be at least 2")));
    }
    let n2 = (n * n) as f64;
    Ok(xi * xi * (1.0 - xi) / (2.0 * xi * xi + n2 * (1.0 + h) * (1.0 + h)))
}

/// `c = (3 + 1/α)/β`, the exponent tying the auxiliary function to `(α, β)`.
pub fn exponent_c(alpha: f64, beta: f64) -> f64 {
    (3.0 + 1.0 / alpha) / beta
}

/// Closed form `C2 = n²/(α(1 − 2β))`, without the admissibility checks of
/// [`compute_constants`].
pub fn c2_closed_form(n: usize, alpha: f64, beta: f64) -> f64 {
    (n * n) as f64 / (alpha * (1.0 - 2.0 * beta))
}

/// Tuning parameters `(ξ, α, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tuning {
    pub xi: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Tuning {
    /// `(ξ, α_max, β_max/2)`.
    pub fn auto(xi: f64, h: f64, n: usize) -> Result<Self> {
        Ok(Self { xi, alpha: admissible_alpha(xi, h)?, beta: 0.5 * admissible_beta(xi, h, n)? })
    }
}

/// Everything the estimate and its proof compute from `(n, ξ, α, β, H, R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DerivedConstants {
    pub n: usize,
    pub xi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    pub r: f64,
    /// Exponent of the auxiliary function, `c = (3 + 1/α)/β`.
    pub c: f64,
    pub a: f64,
    pub b: f64,
    /// Coefficient `C` bounding the `|∇f|²` term from below.
    pub c_grad: f64,
    pub e: f64,
    pub d_tilde: f64,
    /// `√(D̃/E)`.
    pub c1: f64,
    /// `1/E`.
    pub c2: f64,
    pub c1_closed_form: f64,
    pub c2_closed_form: f64,
}

/// Builds every constant and cross-checks the two routes to `C1`, `C2`.
pub fn compute_constants(n: usize, xi: f64, alpha: f64, beta: f64, h: f64, r: f64) -> Result<DerivedConstants> {
    let alpha_max = admissible_alpha(xi, h)?;
    let beta_max = admissible_beta(xi, h, n)?;
    if !(alpha > 0.0 && alpha <= alpha_max) {
        return Err(domain("α", format!("{alpha} is not in (0, (1−ξ)/(1+H)² = {alpha_max}]")));
    }
    if !(beta > 0.0 && beta <= beta_max && beta < 0.5) {
        return Err(domain("β", format!("{beta} is not in (0, ξ²(1−ξ)/(2ξ²+n²(1+H)²) = {beta_max}]")));
    }
    evaluate_constants(n, xi, alpha, beta, h, r)
}

/// The arithmetic of [`compute_constants`] without the admissibility box:
/// only `β < 1/2`, `R > 0` and `0 < ξ < 1` are required for the formulas to
/// make sense.
pub fn evaluate_constants(n: usize, xi: f64, alpha: f64, beta: f64, h: f64, r: f64) -> Result<DerivedConstants> {
    check_xi(xi)?;
    check_h(h)?;
    if !(alpha > 0.0) || !(beta > 0.0 && beta < 0.5) {
        return Err(domain("α, β", format!("need α > 0 and 0 < β < 1/2, got α = {alpha}, β = {beta}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(domain("R", format!("{r} must be positive")));
    }
    let nf = n as f64;
    let n2 = nf * nf;
    let hp = 1.0 + h;
    let c = exponent_c(alpha, beta);
    let a = alpha * xi * xi * xi / n2;
    let b = 8.0 * alpha * h * hp / r;
    let grad = 4.0 * alpha * h * hp / r;
    let lap = 2.0 * alpha * hp * (h / (r * r) + 2.0 * (nf - 1.0) * h * (3.0 * h + 1.0) / r);
    let c_grad = lap + (beta + 4.0 / alpha) * grad * grad;
    let e = alpha * (1.0 - 2.0 * beta) / n2;
    let inner = b * b / (2.0 * a) + c_grad;
    let d_tilde = inner * inner / (2.0 * a);
    let c1 = sqrt(d_tilde / e);
    let c2 = 1.0 / e;

    let c1_closed_form = n2 / (alpha * sqrt(2.0 * xi * xi * xi * (1.0 - 2.0 * beta)))
        * (32.0 * n2 * alpha * h * h * hp * hp / (xi * xi * xi * r * r) + lap + (beta + 4.0 / alpha) * grad * grad);
    let c2_closed_form = c2_closed_form(n, alpha, beta);

    for (name, x, y) in [("C1", c1, c1_closed_form), ("C2", c2, c2_closed_form)] {
        if (x - y).abs() > ROUTE_TOLERANCE * x.abs().max(y.abs()) {
            return Err(Error::Numeric(format!("{name}: closed form {y:e} disagrees with the coefficient route {x:e}")));
        }
    }
    Ok(DerivedConstants { n, xi, alpha, beta, h, r, c, a, b, c_grad, e, d_tilde, c1, c2, c1_closed_form, c2_closed_form })
}

/// `C̃3 = C3·[K/(D^{2−n/p} R^{n/p}) + K^{2p/(2p−n)}/(D^{(4p−6n)/(2p−n)} R^{4n/(2p−n)})]`
/// with the unspecified `C3` supplied as `c3`.
pub fn c3_tilde(k: f64, d: f64, r: f64, n: usize, p: f64, c3: f64) -> Result<f64> {
    let nf = n as f64;
    if !(2.0 * p - nf > 0.0) {
        return Err(domain("p", format!("{p} must exceed n/2 = {}", nf / 2.0)));
    }
    if !(d > 0.0 && r > 0.0) {
        return Err(domain("lengths", format!("D = {d} and R = {r} must be positive")));
    }
    if !(k >= 0.0) {
        return Err(domain("K", format!("{k} must be non-negative")));
    }
    if !(c3 > 0.0) || !c3.is_finite() {
        return Err(domain("C3", format!("{c3} must be positive")));
    }
    let q = 2.0 * p - nf;
    let first = k / (pow(d, 2.0 - nf / p) * pow(r, nf / p));
    let second = pow(k, 2.0 * p / q) / (pow(d, (4.0 * p - 6.0 * nf) / q) * pow(r, 4.0 * nf / q));
    Ok(c3 * (first + second))
}

/// `J̲(t) = 2^{−1/(c−1)} e^{−C̃3 t/(c−1)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JLowerBound {
    pub c: f64,
    pub c3_tilde: f64,
}

impl JLowerBound {
    pub fn new(c: f64, c3_tilde: f64) -> Result<Self> {
        if !(c > 1.0) {
            return Err(domain("c", format!("{c} must exceed 1")));
        }
        if !(c3_tilde >= 0.0) {
            return Err(domain("C̃3", format!("{c3_tilde} must be non-negative")));
        }
        Ok(Self { c, c3_tilde })
    }

    pub fn eval(&self, t: f64) -> f64 {
        pow(2.0, -1.0 / (self.c - 1.0)) * exp(-self.c3_tilde * t / (self.c - 1.0))
    }
}

/// Classical Li-Yau constants for convex boundary and `Ric ≥ −K`.
pub fn classic_constants(n: usize, alpha: f64, k: f64) -> Result<(f64, f64)> {
    if !(alpha > 1.0) {
        return Err(domain("α", format!("{alpha} must exceed 1")));
    }
    if !(k >= 0.0) {
        return Err(domain("K", format!("{k} must be non-negative")));
    }
    let nf = n as f64;
    Ok((nf / core::f64::consts::SQRT_2 * alpha * alpha / (alpha - 1.0) * k, nf / 2.0 * alpha * alpha))
}

/// Constants of the estimate for non-convex boundary with a pointwise Ricci
/// lower bound `−K`, convexity defect `H` and rolling radius `R`.
pub fn wang_constants(n: usize, alpha: f64, beta: f64, k: f64, h: f64, r: f64) -> Result<(f64, f64)> {
    check_h(h)?;
    let hp = 1.0 + h;
    let gap = alpha - hp * hp;
    if !(gap > 0.0) {
        return Err(domain("α", format!("{alpha} must exceed (1+H)² = {}", hp * hp)));
    }
    if !(beta > 0.0 && beta < 0.5) {
        return Err(domain("β", format!("{beta} is not in (0, 1/2)")));
    }
    if !(k >= 0.0) || !(r > 0.0) {
        return Err(domain("K, R", format!("need K ≥ 0 and R > 0, got K = {k}, R = {r}")));
    }
    let nf = n as f64;
    let c1 = 6.0 * nf * alpha * (alpha - 1.0) * pow(hp, 7.0) * k / (gap * gap)
        + 309.0 * nf * nf * pow(alpha, 3.0) * (alpha - 1.0) * pow(hp, 10.0) * h / (pow(gap, 4.0) * r * r * beta);
    let c2 = nf * alpha * alpha * (alpha - 1.0) * (alpha - 1.0) * pow(hp, 4.0) / ((2.0 - beta) * (1.0 - beta) * gap * gap);
    Ok((c1, c2))
}
