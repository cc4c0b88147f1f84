//! Cartesian sweeps over `(surface, ξ, α, β)`. Each surface is audited and
//! solved once; every tuning is then checked against that heat run. Rows run
//! in a worker pool and are collected in lexicographic parameter order, so
//! the table does not depend on the pool width.

use std::cmp::Ordering;
use std::path::Path;

use liyau_core::audit::{run_audit, AuditOptions, GeometricHypotheses};
use liyau_core::constants::{admissible_alpha, admissible_beta, Tuning};
use liyau_core::cutoff::{build_psi, build_varphi_tilde, cutoff_bounds_audit};
use liyau_core::heat::{solve_heat, HeatSolution};
use liyau_core::{Grid, WarpedSurface, DIM};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Choice, ExperimentConfig, NamedSurface};
use crate::run::theorem_for;
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub surface: String,
    pub xi: f64,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub min_margin: Option<f64>,
    pub t_at: Option<f64>,
    pub r_at: Option<f64>,
    pub theta_at: Option<f64>,
    pub hypotheses_met: Option<bool>,
    pub passed: bool,
    /// Failure marker of the form `kind: message`; empty on success.
    pub error: String,
}

struct Prepared {
    name: String,
    surface: WarpedSurface,
    grid: Grid,
    hyp: GeometricHypotheses,
    audit_passed: bool,
    sol: HeatSolution,
}

fn choice_order(a: &Choice, b: &Choice) -> Ordering {
    match (a, b) {
        (Choice::Value(x), Choice::Value(y)) => x.total_cmp(y),
        (Choice::Value(_), Choice::Auto(_)) => Ordering::Less,
        (Choice::Auto(_), Choice::Value(_)) => Ordering::Greater,
        _ => Ordering::Equal,
    }
}

fn marker(e: &HarnessError) -> String {
    let kind = match e {
        HarnessError::Core(liyau_core::Error::Domain { .. }) => "domain",
        HarnessError::Core(_) => "solver",
        HarnessError::Config(_) => "config",
        HarnessError::Io(_) | HarnessError::Csv(_) => "io",
    };
    format!("{kind}: {e}")
}

fn prepare(cfg: &ExperimentConfig, named: &NamedSurface) -> Result<Prepared, HarnessError> {
    let surface = named.surface.clone();
    let hyp = named.hypotheses.unwrap_or(cfg.hypotheses);
    let grid = Grid::new(&surface, cfg.grid.nr, cfg.grid.ntheta)?;
    let audit_passed = run_audit(&surface, &grid, &hyp, &AuditOptions::default())?.passed;
    let sol = solve_heat(&surface, &cfg.heat.build(grid)?)?;
    Ok(Prepared { name: named.name.clone(), surface, grid, hyp, audit_passed, sol })
}

fn row(cfg: &ExperimentConfig, prep: &Result<Prepared, (String, HarnessError)>, xi: f64, alpha: Choice, beta: Choice) -> SweepRow {
    let mut out = SweepRow {
        surface: String::new(),
        xi,
        alpha: None,
        beta: None,
        c1: None,
        c2: None,
        min_margin: None,
        t_at: None,
        r_at: None,
        theta_at: None,
        hypotheses_met: None,
        passed: false,
        error: String::new(),
    };
    let p = match prep {
        Ok(p) => p,
        Err((name, e)) => {
            out.surface = name.clone();
            out.error = marker(e);
            return out;
        }
    };
    out.surface = p.name.clone();
    let result = (|| -> Result<(), HarnessError> {
        let a = alpha.resolve(admissible_alpha(xi, p.hyp.h)?);
        let b = beta.resolve(0.5 * admissible_beta(xi, p.hyp.h, DIM)?);
        out.alpha = Some(a);
        out.beta = Some(b);
        let tuning = Tuning { xi, alpha: a, beta: b };
        let psi = build_psi(p.hyp.h)?;
        let phi = build_varphi_tilde(&p.surface, &p.grid, &psi, a, p.hyp.r)?;
        let cutoff = cutoff_bounds_audit(&phi, &p.surface, &p.grid, &psi, a, p.hyp.h, p.hyp.r, DIM)?;
        let met = p.audit_passed && cutoff.corrected.passed && cutoff.sup_gradient <= cutoff.gradient_ceiling + 1e-6;
        out.hypotheses_met = Some(met);
        let (k, _, v) = theorem_for(cfg, &p.sol, &p.hyp, &tuning, met)?;
        out.c1 = Some(k.c1);
        out.c2 = Some(k.c2);
        out.min_margin = Some(v.report.min_margin);
        if let Some(loc) = v.report.argmin {
            out.t_at = loc.t;
            out.r_at = Some(loc.r);
            out.theta_at = Some(loc.theta);
        }
        out.passed = v.report.passed && (met || cfg.verify.force);
        Ok(())
    })();
    if let Err(e) = result {
        out.error = marker(&e);
        out.passed = false;
    }
    out
}

/// Runs the sweep described by `cfg.sweep` (the configured surface is used
/// when no surfaces are listed) on `cfg.threads` workers.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let spec = cfg.sweep.clone().ok_or_else(|| HarnessError::Config("no sweep section".into()))?;
    let mut surfaces = if spec.surfaces.is_empty() {
        vec![NamedSurface { name: "configured".into(), surface: cfg.surface.clone(), hypotheses: None }]
    } else {
        spec.surfaces.clone()
    };
    surfaces.sort_by(|a, b| a.name.cmp(&b.name));
    let mut xi = spec.xi.clone();
    xi.sort_by(f64::total_cmp);
    let mut alpha = spec.alpha.clone();
    alpha.sort_by(choice_order);
    let mut beta = spec.beta.clone();
    beta.sort_by(choice_order);
    if xi.is_empty() || alpha.is_empty() || beta.is_empty() {
        return Ok(Vec::new());
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    pool.install(|| {
        let prepared: Vec<Result<Prepared, (String, HarnessError)>> =
            surfaces.par_iter().map(|s| prepare(cfg, s).map_err(|e| (s.name.clone(), e))).collect();
        let mut jobs = Vec::new();
        for si in 0..prepared.len() {
            for &x in &xi {
                for &a in &alpha {
                    for &b in &beta {
                        jobs.push((si, x, a, b));
                    }
                }
            }
        }
        Ok(jobs.par_iter().map(|&(si, x, a, b)| row(cfg, &prepared[si], x, a, b)).collect())
    })
}

pub const SWEEP_HEADER: [&str; 13] =
    ["surface", "xi", "alpha", "beta", "c1", "c2", "min_margin", "t", "x_r", "x_θ", "hypotheses_met", "passed", "error"];

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SWEEP_HEADER)?;
    let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.surface.clone(),
            r.xi.to_string(),
            num(r.alpha),
            num(r.beta),
            num(r.c1),
            num(r.c2),
            num(r.min_margin),
            num(r.t_at),
            num(r.r_at),
            num(r.theta_at),
            r.hypotheses_met.map(|b| b.to_string()).unwrap_or_default(),
            r.passed.to_string(),
            r.error.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
