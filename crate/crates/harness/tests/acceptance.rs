//! Acceptance suite. Runs every criterion in order, prints one line per
//! criterion and exits non-zero if any of them fails or overruns its time
//! limit. Oracles are computed here from closed forms, not taken from the
//! library.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use liyau_core::audit::{rolling_ball_check, run_audit, AuditOptions, GeometricHypotheses};
use liyau_core::constants::{admissible_alpha, admissible_beta, c2_closed_form, compute_constants, exponent_c};
use liyau_core::geometry::{boundary_second_fundamental_form, Warp};
use liyau_core::heat::{solve_heat, HeatConfig, InitialData, Mode, DEFAULT_FLOOR};
use liyau_core::jsolver::{claims_audit, duhamel_residual, solve_w, JConfig};
use liyau_core::kernel::kernel_gaussian_audit;
use liyau_core::verify::{probe_solution, sharpness_probe, verify_classic, Window};
use liyau_core::{Grid, Node, WarpedSurface};
use liyau_harness::config::ExperimentConfig;
use liyau_harness::run;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn flat() -> WarpedSurface {
    WarpedSurface::flat_cylinder(1.0).unwrap()
}

fn curved_band() -> WarpedSurface {
    WarpedSurface::new(0.0, 1.0, Warp::Cosh { offset: 1.0, amplitude: 0.05, rate: 1.0, center: 0.5 }).unwrap()
}

/// Name, surface and closed-form `f''/f`.
type SuiteSurface = (&'static str, WarpedSurface, fn(f64) -> f64);

/// The four surfaces every suite-wide check runs on.
fn suite() -> Vec<SuiteSurface> {
    vec![
        ("flat", flat(), |_| 0.0),
        ("curved band", curved_band(), |r| {
            let c = 0.05 * (r - 0.5).cosh();
            c / (1.0 + c)
        }),
        ("exponential", WarpedSurface::new(0.0, 1.0, Warp::Exponential { amplitude: 1.0, rate: 1.0 }).unwrap(), |_| 1.0),
        ("sine", WarpedSurface::new(0.2, 1.0, Warp::Sin { amplitude: 1.0, rate: 1.0, phase: 0.0 }).unwrap(), |_| -1.0),
    ]
}

fn cosine_data() -> InitialData {
    InitialData::Trigonometric {
        constant: 2.0,
        modes: vec![Mode { radial: 1, angular: 0, amplitude: 1.0, phase: 0.0 }],
        floor: DEFAULT_FLOOR,
    }
}

fn every(step: f64, t_final: f64) -> Vec<f64> {
    let n = (t_final / step).round() as usize;
    (1..=n).map(|k| k as f64 * step).collect()
}

fn config(surface: serde_json::Value, hypotheses: serde_json::Value, t_min: f64) -> ExperimentConfig {
    let doc = json!({
        "surface": surface,
        "grid": {"nr": 65, "ntheta": 64},
        "hypotheses": hypotheses,
        "tuning": {"xi": 0.5, "alpha": "auto", "beta": "auto"},
        "heat": {"dt": 1e-3, "t_final": 1.0, "snapshots": {"every": 0.05}},
        "j": {"dt": 1e-3, "t_final": 0.1},
        "verify": {"mode": "theorem", "t_min": t_min},
    });
    ExperimentConfig::from_json(&doc.to_string()).unwrap()
}

fn flat_config() -> ExperimentConfig {
    config(
        json!({"r_lo": 0.0, "r_hi": 1.0, "warp": {"family": "constant", "value": 1.0}}),
        json!({"H": 0.0, "R": 0.2, "D": 3.5, "K": 0.1, "p": 2.0}),
        0.05,
    )
}

fn band_config() -> ExperimentConfig {
    config(
        json!({"r_lo": 0.0, "r_hi": 1.0, "warp": {"family": "cosh", "offset": 1.0, "amplitude": 0.05, "rate": 1.0, "center": 0.5}}),
        json!({"H": 0.0, "R": 0.2, "D": 3.6, "K": 1.0, "p": 2.0}),
        0.05,
    )
}

fn heat_oracle() -> Outcome {
    let s = flat();
    let g = Grid::new(&s, 256, 4).unwrap();
    let sol = solve_heat(&s, &HeatConfig::new(g, 1e-4, 0.1, vec![0.1], cosine_data())).map_err(|e| e.to_string())?;
    let u = sol.field(0.1).unwrap();
    let decay = (-PI * PI * 0.1).exp();
    let mut err = 0.0f64;
    for i in 0..g.nr() {
        for j in 0..g.ntheta() {
            err = err.max((u.get(i, j) - (2.0 + decay * (PI * g.r(i)).cos())).abs());
        }
    }
    ensure!(err <= 1e-5, "sup error {err:.3e} > 1e-5");
    Ok(format!("sup error {err:.2e}"))
}

fn conservation() -> Outcome {
    let mut worst = (0.0f64, f64::INFINITY);
    for (name, s, _) in suite() {
        let g = Grid::new(&s, 65, 64).unwrap();
        let data = InitialData::Trigonometric {
            constant: 2.0,
            modes: vec![
                Mode { radial: 1, angular: 0, amplitude: 1.0, phase: 0.0 },
                Mode { radial: 2, angular: 3, amplitude: 0.5, phase: 0.3 },
            ],
            floor: DEFAULT_FLOOR,
        };
        let sol = solve_heat(&s, &HeatConfig::new(g, 1e-3, 1.0, every(0.01, 1.0), data)).map_err(|e| e.to_string())?;
        let m0 = sol.initial_mass();
        let mut drift = 0.0f64;
        for snap in sol.snapshots() {
            drift = drift.max((snap.u.integrate(&s) - m0).abs() / m0);
        }
        let slack = sol.positivity_min() - sol.initial_min();
        ensure!(drift <= 1e-8, "{name}: mass drift {drift:.3e}");
        ensure!(slack >= -1e-8, "{name}: min u fell {slack:.3e} below min u0");
        worst = (worst.0.max(drift), worst.1.min(slack));
    }
    Ok(format!("max drift {:.2e}, min(u) − min(u0) ≥ {:.2e}", worst.0, worst.1))
}

fn classic() -> Outcome {
    let s = flat();
    let g = Grid::new(&s, 65, 32).unwrap();
    let data = InitialData::Trigonometric {
        constant: 2.0,
        modes: vec![
            Mode { radial: 1, angular: 0, amplitude: 1.0, phase: 0.0 },
            Mode { radial: 1, angular: 2, amplitude: 0.4, phase: 0.0 },
        ],
        floor: DEFAULT_FLOOR,
    };
    let sol = solve_heat(&s, &HeatConfig::new(g, 1e-3, 1.0, every(0.01, 1.0), data)).map_err(|e| e.to_string())?;
    let window = Window::new(0.01, 1.0).unwrap();
    let mut mins = Vec::new();
    for alpha in [1.05, 2.0] {
        let v = verify_classic(&sol, alpha, window).map_err(|e| e.to_string())?;
        ensure!(v.report.min_margin >= -1e-6, "α = {alpha}: min margin {:.3e}", v.report.min_margin);
        // the exact solution 2 + e^{−π²t}cos(πr) obeys the same inequality
        for t in every(0.01, 1.0) {
            let e = (-PI * PI * t).exp();
            for i in 0..g.nr() {
                let r = g.r(i);
                let u = 2.0 + e * (PI * r).cos();
                let ur = -PI * e * (PI * r).sin();
                let ut = -PI * PI * e * (PI * r).cos();
                let m = alpha * alpha / t - (ur * ur / (u * u) - alpha * ut / u);
                ensure!(m >= 0.0, "closed-form margin {m} at t={t}, r={r}");
            }
        }
        mins.push(v.report.min_margin);
    }
    Ok(format!("min margins {:.3e} (α=1.05), {:.3e} (α=2)", mins[0], mins[1]))
}

fn sharpness() -> Outcome {
    let s = WarpedSurface::flat_cylinder(2.0).unwrap();
    let g = Grid::new(&s, 257, 256).unwrap();
    let w = Window::new(0.005, 0.02).unwrap();
    let sol = probe_solution(&s, &g, 1e-4, w, 4).map_err(|e| e.to_string())?;
    let p = sharpness_probe(&sol, w).map_err(|e| e.to_string())?;
    ensure!(!p.boundary_affected, "probe region reached the boundary");
    ensure!((0.8..=1.05).contains(&p.value), "probe value {}", p.value);
    Ok(format!("t·(|∇u|²/u² − ∂tu/u) = {:.4} (target {})", p.value, p.target))
}

fn constants_cross_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=6usize);
        let xi = rng.gen_range(0.05..0.95);
        let h = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.0) };
        let r = rng.gen_range(0.05..2.0);
        let alpha = admissible_alpha(xi, h).unwrap() * rng.gen_range(0.2..=1.0);
        let beta = admissible_beta(xi, h, n).unwrap() * rng.gen_range(0.05..0.95);
        let k = compute_constants(n, xi, alpha, beta, h, r).map_err(|e| e.to_string())?;
        let nf = n as f64;
        let a = alpha * xi.powi(3) / (nf * nf);
        let b = 8.0 * alpha * h * (1.0 + h) / r;
        let g = 4.0 * alpha * h * (1.0 + h) / r;
        let c = 2.0 * alpha * (1.0 + h) * (h / (r * r) + 2.0 * (nf - 1.0) * h * (3.0 * h + 1.0) / r) + (beta + 4.0 / alpha) * g * g;
        let e = alpha * (1.0 - 2.0 * beta) / (nf * nf);
        let d = (b * b / (2.0 * a) + c).powi(2) / (2.0 * a);
        let (c1, c2) = ((d / e).sqrt(), 1.0 / e);
        let rel = |x: f64, y: f64| if x == y { 0.0 } else { (x - y).abs() / x.abs().max(y.abs()) };
        let err = rel(k.c1_closed_form, c1).max(rel(k.c2_closed_form, c2));
        ensure!(err <= 1e-12, "n={n} ξ={xi} α={alpha} β={beta} H={h} R={r}: relative error {err:.3e}");
        worst = worst.max(err);
    }
    let c2 = c2_closed_form(2, 0.25, 0.1);
    ensure!(c2 == 20.0, "C2(2, 0.25, 0.1) = {c2}");
    let c = exponent_c(0.25, 0.1);
    ensure!(c == 70.0, "c(0.25, 0.1) = {c}");
    let bmax = admissible_beta(0.5, 0.0, 2).unwrap();
    ensure!((bmax - 1.0 / 36.0).abs() <= 1e-12 && (bmax - 0.0277778).abs() < 1e-6, "β_max = {bmax}");
    Ok(format!("100 random tunings, worst relative error {worst:.1e}"))
}

fn cutoff_audit() -> Outcome {
    let mut lines = Vec::new();
    for (name, s, _) in suite() {
        let g = Grid::new(&s, 65, 64).unwrap();
        let h = boundary_second_fundamental_form(&s).h;
        let hyp = GeometricHypotheses { h, r: 0.2, d: 10.0, k: 1.0, p: 2.0 };
        let alpha = admissible_alpha(0.5, h).unwrap();
        let out = run::audit_surface(&s, &g, &hyp, alpha).map_err(|e| e.to_string())?;
        let c = &out.cutoff;
        let ceiling = 4.0 * alpha * h * (1.0 + h) / 0.2;
        ensure!(c.sup_gradient <= ceiling + 1e-6, "{name}: sup|∇φ̃| {} > {ceiling}", c.sup_gradient);
        ensure!(c.corrected.min_margin >= -1e-6, "{name}: corrected Laplacian margin {:.3e}", c.corrected.min_margin);
        ensure!(c.stated.argmin.is_some(), "{name}: stated-constant column missing");
        lines.push(format!("{name} H={h:.3} stated {:.2e} corrected {:.2e}", c.stated.min_margin, c.corrected.min_margin));
    }
    Ok(lines.join("; "))
}

fn j_solver() -> Outcome {
    let s = flat();
    let g = Grid::new(&s, 64, 8).unwrap();
    let sol = solve_w(&s, &JConfig { c: 70.0, dt: 1e-3, t_final: 0.1, grid: g }).map_err(|e| e.to_string())?;
    for n in 0..=sol.steps() {
        ensure!(sol.j_line(n).iter().all(|j| (j - 1.0).abs() <= 1e-10), "V ≡ 0 but J ≠ 1 at step {n}");
    }

    // f''/f = 1/2 on cosh(r/√2); c = 2 gives V ≡ 1 and J = e^{−t}
    let s = WarpedSurface::new(0.0, 1.0, Warp::Cosh { offset: 0.0, amplitude: 1.0, rate: 1.0 / SQRT_2, center: 0.0 }).unwrap();
    let g = Grid::new(&s, 64, 1).unwrap();
    let sol = solve_w(&s, &JConfig { c: 2.0, dt: 1e-3, t_final: 0.1, grid: g }).map_err(|e| e.to_string())?;
    let mut ode = 0.0f64;
    for n in 0..=sol.steps() {
        let exact = (-sol.time(n)).exp();
        ode = sol.j_line(n).iter().fold(ode, |m, j| m.max((j - exact).abs()));
    }
    ensure!(ode <= 1e-6, "constant-V error {ode:.3e}");

    let cfg = band_config();
    let (sol, out) = run::jsolve(&cfg).map_err(|e| e.to_string())?;
    let c = out.c;
    let grid = cfg.grid().unwrap();
    let ratio = (0..grid.nr()).map(|i| (suite()[1].2)(grid.r(i)).max(0.0)).fold(0.0, f64::max);
    let sup_v = 2.0 * (c - 1.0) * ratio;
    for n in 0..=sol.steps() {
        let desk = (-sol.time(n) * sup_v / (c - 1.0)).exp();
        for j in sol.j_line(n) {
            ensure!(j > 0.0 && j <= 1.0 + 1e-8, "J = {j} at step {n}");
            ensure!(j >= desk - 1e-6, "J = {j} below e^(−t supV/(c−1)) = {desk} at step {n}");
        }
    }
    ensure!(claims_audit(&sol, None).passed, "claims audit failed");
    let duhamel = duhamel_residual(&sol, cfg.j.duhamel_intervals).map_err(|e| e.to_string())?.residual;
    ensure!(duhamel <= 1e-3, "Duhamel residual {duhamel:.3e}");
    ensure!(out.passed, "jsolve report failed");
    Ok(format!("constant-V error {ode:.1e}, band c={c:.1}, Duhamel residual {duhamel:.1e}"))
}

fn kernel() -> Outcome {
    let s = flat();
    let coarse = Grid::new(&s, 49, 128).unwrap();
    let fine = coarse.refined(2);
    let centers = |g: &Grid| [Node::new(g.nr() / 2, 0), Node::new(0, g.ntheta() / 2), Node::new(g.nr() / 4, g.ntheta() / 4)];
    let a = kernel_gaussian_audit(&s, &coarse, 1e-3, &[0.05, 0.1], &centers(&coarse)).map_err(|e| e.to_string())?;
    let b = kernel_gaussian_audit(&s, &fine, 5e-4, &[0.05, 0.1], &centers(&fine)).map_err(|e| e.to_string())?;
    for rep in [&a, &b] {
        ensure!(rep.max_asymmetry <= 1e-4, "asymmetry {:.3e}", rep.max_asymmetry);
        ensure!(rep.max_mass_error <= 1e-8, "mass error {:.3e}", rep.max_mass_error);
    }
    let ratio = b.fitted_c / a.fitted_c;
    ensure!((ratio - 1.0).abs() <= 0.2, "fitted constant {} → {} under refinement", a.fitted_c, b.fitted_c);
    Ok(format!(
        "asymmetry {:.1e}, mass error {:.1e}, fitted C {:.3} → {:.3}",
        a.max_asymmetry.max(b.max_asymmetry),
        a.max_mass_error.max(b.max_mass_error),
        a.fitted_c,
        b.fitted_c
    ))
}

fn end_to_end() -> Outcome {
    let mut parts = Vec::new();
    for (name, cfg) in [("flat", flat_config()), ("curved band", band_config())] {
        let out = run::verify(&cfg).map_err(|e| e.to_string())?;
        ensure!(out.hypotheses_met == Some(true), "{name}: hypothesis audits failed");
        let k = out.constants.as_ref().unwrap();
        let alpha = admissible_alpha(0.5, 0.0).unwrap();
        let beta = admissible_beta(0.5, 0.0, 2).unwrap() / 2.0;
        ensure!(k.alpha == alpha && k.beta == beta, "{name}: tuning ({}, {})", k.alpha, k.beta);
        ensure!(k.c1 == 0.0, "{name}: C1 = {} with H = 0", k.c1);
        let v = out.verification.as_ref().unwrap();
        let first = v.report.snapshots.first().and_then(|s| s.t).unwrap_or(0.0);
        ensure!((first - 0.05).abs() < 1e-9, "{name}: window starts at {first}");
        ensure!(v.report.min_margin >= -1e-6 && out.passed, "{name}: min margin {:.3e}", v.report.min_margin);
        parts.push(format!("{name} min margin {:.3}", v.report.min_margin));
    }
    Ok(parts.join(", "))
}

fn hypothesis_audits() -> Outcome {
    let s = flat();
    let g = Grid::new(&s, 65, 64).unwrap();
    let hyp = GeometricHypotheses { h: 0.0, r: 0.2, d: 3.5, k: 0.1, p: 2.0 };
    let rep = run_audit(&s, &g, &hyp, &AuditOptions::default()).map_err(|e| e.to_string())?;
    let (amb, bdy) = (rep.doubling_ambient.max_ratio, rep.doubling_boundary.max_ratio);
    ensure!(amb <= 1.0 && rep.doubling_ambient.evaluated > 0, "ambient doubling ratio {amb}");
    ensure!(bdy <= 1.0 && rep.doubling_boundary.evaluated > 0, "boundary doubling ratio {bdy}");
    ensure!(rep.rolling.ok, "flat cylinder fails the rolling-ball check");
    let adm = &rep.admissibility;
    let margins = [adm.margin_first, adm.margin_second];
    ensure!(adm.admissible && margins.iter().all(|m| m.is_some_and(|m| m > 0.0)), "admissibility {adm:?}");
    ensure!(rep.passed, "flat audit report failed");

    let neck = WarpedSurface::new(0.0, 1.0, Warp::Bump { base: 0.005, amplitude: 1.0, center: 1.0, width: 0.9 }).unwrap();
    let g = Grid::new(&neck, 129, 64).unwrap();
    let roll = rolling_ball_check(&neck, &g, 0.2).map_err(|e| e.to_string())?;
    ensure!(!roll.ok, "pinched neck passes the rolling-ball check");
    let wrap = roll.witnesses.iter().find(|w| !w.ok && w.wraps);
    ensure!(wrap.is_some(), "no wrap witness among {} witnesses", roll.witnesses.len());
    let p = wrap.unwrap().p;
    Ok(format!("doubling ratios {amb:.3}/{bdy:.2e}, pinched neck wraps at (r, θ) = ({}, {})", p.r, p.theta))
}

fn outcomes(cfg: &ExperimentConfig) -> Result<(f64, Vec<bool>), String> {
    let a = run::audit(cfg).map_err(|e| e.to_string())?;
    let r = &a.audit;
    let (_, j) = run::jsolve(cfg).map_err(|e| e.to_string())?;
    let v = run::verify(cfg).map_err(|e| e.to_string())?;
    let flags = vec![
        r.diameter_ok,
        r.convexity_ok,
        r.condition_met,
        r.averaged_norm.margin >= 0.0,
        r.rolling.ok,
        r.admissibility.admissible,
        r.doubling_ambient.max_ratio <= 1.0,
        r.doubling_boundary.max_ratio <= 1.0,
        a.gradient_ok,
        a.cutoff.corrected.passed,
        a.passed,
        j.passed,
        v.passed,
    ];
    Ok((r.scale_invariant, flags))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_liyau")).args(args).output().map_err(|e| e.to_string())?;
    ensure!(status.status.code() == Some(0), "liyau {args:?}: {}", String::from_utf8_lossy(&status.stderr));
    Ok(())
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn scale_coherence() -> Outcome {
    let mut checked = 0;
    for cfg in [flat_config(), band_config()] {
        let scaled = cfg.rescaled(2.0).map_err(|e| e.to_string())?;
        let (q0, f0) = outcomes(&cfg)?;
        let (q1, f1) = outcomes(&scaled)?;
        ensure!((q0 - q1).abs() <= 1e-9 * q0.abs().max(1e-12), "D²·norm {q0} → {q1}");
        ensure!(f0 == f1, "pass/fail flags {f0:?} → {f1:?}");
        checked += f0.len();
    }

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = tmp.path().join("band.json");
    let mut cfg = band_config();
    cfg.sweep = Some(serde_json::from_value(json!({"xi": [0.25, 0.5], "alpha": ["auto"], "beta": ["auto", 0.005]})).unwrap());
    std::fs::write(&path, cfg.to_json()).map_err(|e| e.to_string())?;
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for dir in &dirs {
        for cmd in ["constants", "audit", "solve", "jsolve", "verify", "sweep"] {
            run_cli(&[cmd, "--config", path.to_str().unwrap(), "--out", dir.to_str().unwrap()])?;
        }
    }
    let (a, b) = (files(&dirs[0]), files(&dirs[1]));
    ensure!(a.len() >= 10, "only {} report files", a.len());
    for ((na, ba), (nb, bb)) in a.iter().zip(&b) {
        ensure!(na == nb && ba == bb, "{na} differs between identical runs");
    }
    Ok(format!("{checked} flags unchanged under λ = 2, {} report files byte-identical", a.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("heat solver matches the separable cosine solution", 5, heat_oracle),
        ("mass conservation and positivity on the suite", 60, conservation),
        ("classic estimate on the flat convex cylinder", 10, classic),
        ("sharpness probe in the Gaussian regime", 30, sharpness),
        ("derived constants cross-check", 1, constants_cross_check),
        ("cutoff function bounds", 10, cutoff_audit),
        ("J solver oracles and claims", 60, j_solver),
        ("heat kernel audits", 60, kernel),
        ("gradient estimate end to end", 120, end_to_end),
        ("hypothesis audits and the pinched neck", 60, hypothesis_audits),
        ("scale coherence and reproducibility", 120, scale_coherence),
    ];
    let mut failed = 0;
    for (k, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        let (word, detail) = match (&result, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {limit} s limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if word == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {word} [{:.2} s < {limit} s] {name}: {detail}", k + 1, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
