//! Pointwise margin reports for checked inequalities.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Where a margin was evaluated; `t` is absent for time-independent checks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Location {
    pub r: f64,
    pub theta: f64,
    pub t: Option<f64>,
}

impl Location {
    pub const fn node(r: f64, theta: f64) -> Self {
        Self { r, theta, t: None }
    }

    pub const fn at_time(r: f64, theta: f64, t: f64) -> Self {
        Self { r, theta, t: Some(t) }
    }
}

/// How a constant entering an inequality was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Route {
    /// Closed-form expression.
    Formula,
    /// Measured on the discretisation.
    Measured,
    /// Supplied by the user in place of an unspecified constant.
    Override,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Provenance {
    pub name: String,
    pub value: Option<f64>,
    pub route: Route,
    pub detail: String,
}

impl Provenance {
    pub fn formula(name: &str, value: f64, detail: &str) -> Self {
        Self { name: name.to_string(), value: Some(value), route: Route::Formula, detail: detail.to_string() }
    }

    pub fn measured(name: &str, detail: &str) -> Self {
        Self { name: name.to_string(), value: None, route: Route::Measured, detail: detail.to_string() }
    }

    pub fn measured_value(name: &str, value: f64, detail: &str) -> Self {
        Self { name: name.to_string(), value: Some(value), route: Route::Measured, detail: detail.to_string() }
    }

    pub fn overridden(name: &str, value: f64, detail: &str) -> Self {
        Self { name: name.to_string(), value: Some(value), route: Route::Override, detail: detail.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SnapshotMargin {
    pub t: Option<f64>,
    pub min_margin: f64,
    pub argmin: Location,
}

/// Violating locations kept verbatim in a report; the full count is always kept.
pub const MAX_LISTED_VIOLATIONS: usize = 64;

/// Outcome of checking `margin(x, t) ≥ −tolerance` over a sampled set.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyReport {
    pub inequality: String,
    pub tolerance: f64,
    pub snapshots: Vec<SnapshotMargin>,
    pub min_margin: f64,
    pub argmin: Option<Location>,
    pub violation_count: usize,
    pub violations: Vec<Location>,
    /// Points deliberately left out (cut locus, unresolved samples).
    pub excluded: Vec<Location>,
    pub provenance: Vec<Provenance>,
    pub hypotheses_met: bool,
    pub passed: bool,
}

impl VerifyReport {
    pub fn new(inequality: &str, tolerance: f64) -> Self {
        Self {
            inequality: inequality.to_string(),
            tolerance,
            snapshots: Vec::new(),
            min_margin: f64::INFINITY,
            argmin: None,
            violation_count: 0,
            violations: Vec::new(),
            excluded: Vec::new(),
            provenance: Vec::new(),
            hypotheses_met: true,
            passed: false,
        }
    }

    /// Folds one snapshot's margins into the report. Non-finite margins count
    /// as violations.
    pub fn record_snapshot(&mut self, t: Option<f64>, margins: impl IntoIterator<Item = (f64, Location)>) {
        let mut best: Option<(f64, Location)> = None;
        for (m, loc) in margins {
            let m = if m.is_finite() { m } else { f64::NEG_INFINITY };
            if m < -self.tolerance {
                self.violation_count += 1;
                if self.violations.len() < MAX_LISTED_VIOLATIONS {
                    self.violations.push(loc);
                }
            }
            if best.is_none_or(|(b, _)| m < b) {
                best = Some((m, loc));
            }
        }
        if let Some((m, loc)) = best {
            self.snapshots.push(SnapshotMargin { t, min_margin: m, argmin: loc });
            if m < self.min_margin || self.argmin.is_none() {
                self.min_margin = m;
                self.argmin = Some(loc);
            }
        }
    }

    /// Sets the pass flag from the accumulated margins.
    pub fn finish(&mut self) {
        self.passed = self.argmin.is_some() && self.violation_count == 0 && self.min_margin >= -self.tolerance;
    }
}
