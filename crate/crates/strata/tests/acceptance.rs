//! Acceptance suite over the shipped scenarios. Prints one PASS/FAIL line
//! per criterion and exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use serde_json::Value;
use strata::analyze::{analyze, Report};
use strata::simulate::{simulate, ExperimentSummary, Outcome};
use strata::Setup;

type Check = Result<String, String>;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.toml"))
}

fn load(name: &str) -> Result<Setup, String> {
    Setup::load(&scenario(name)).map_err(|e| e.to_string())
}

fn run(name: &str) -> Result<(Outcome, Duration), String> {
    let setup = load(name)?;
    let t = Instant::now();
    let out = simulate(&setup).map_err(|e| format!("{name}: {e}"))?;
    Ok((out, t.elapsed()))
}

fn report(r: Report, name: &str) -> Result<(Value, Duration), String> {
    let setup = load(name)?;
    let t = Instant::now();
    let a = analyze(r, &setup).map_err(|e| format!("{name}: {e}"))?;
    Ok((a.json, t.elapsed()))
}

fn f(v: &Value, path: &[&str]) -> Result<f64, String> {
    let mut cur = v;
    for p in path {
        cur = &cur[*p];
    }
    cur.as_f64()
        .ok_or_else(|| format!("missing {}", path.join(".")))
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn pressure_imbalance() -> Check {
    let (j, dt) = report(Report::Imbalance, "figure3")?;
    let values: Vec<f64> =
        serde_json::from_value(j["values"].clone()).map_err(|e| e.to_string())?;
    let cells: Vec<usize> =
        serde_json::from_value(j["cells"].clone()).map_err(|e| e.to_string())?;
    let at2048 = cells
        .iter()
        .position(|&m| m == 2048)
        .map(|i| values[i])
        .ok_or("no m=2048 entry")?;
    let within = values.iter().all(|v| (v + 0.0037395).abs() <= 1e-4);
    let monotone = j["monotone"].as_bool() == Some(true);
    ensure(
        within
            && monotone
            && cells.first() == Some(&512)
            && cells.last() == Some(&4096)
            && dt.as_secs_f64() < 1.0,
        format!(
            "P_delta(m=2048) = {at2048:.7}, refinement {values:?}, monotone {monotone}, {:.3} s",
            dt.as_secs_f64()
        ),
    )
}

fn shock_time(fine: &(Outcome, Duration), coarse: &(Outcome, Duration)) -> Check {
    let tf = fine.0.summary.shock_time.ok_or("no shock at m=2048")?;
    let tc = coarse.0.summary.shock_time.ok_or("no shock at m=1024")?;
    let rel = (tf - tc).abs() / tf;
    let hyp = fine.0.summary.hyperbolic_until_event == Some(true)
        && coarse.0.summary.hyperbolic_until_event == Some(true);
    let secs = fine.1.as_secs_f64();
    ensure(
        (2.5..=3.1).contains(&tf) && (2.5..=3.1).contains(&tc) && rel < 0.05 && hyp && secs < 60.0,
        format!("t_shock = {tf:.4} (m=2048), {tc:.4} (m=1024), change {:.2}%, hyperbolic until event {hyp}, {secs:.1} s", rel * 100.0),
    )
}

fn haantjes() -> Check {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, want) in [("free-surface-2", 3.0), ("boussinesq", 12.0)] {
        let (j, _) = report(Report::Haantjes, name)?;
        let lo = f(&j, &["min_nonvanishing"])?;
        let hi = f(&j, &["max_nonvanishing"])?;
        let err = f(&j, &["closed_form_max_relative_error"])?;
        let rest = f(&j, &["max_vanishing_ratio"])?;
        let n = f(&j, &["samples"])?;
        let consistent = j["consistent"].as_bool() == Some(true);
        ok &= lo == want && hi == want && err < 1e-6 && consistent && n == 100.0;
        parts.push(format!("{name}: {lo}..{hi} of 24 nonvanishing, closed-form rel err {err:.1e}, vanishing ratio {rest:.1e}"));
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(
        ok && secs < 5.0,
        format!("{}; {secs:.2} s", parts.join("; ")),
    )
}

fn poisson_congruence() -> Check {
    let (j, _) = report(Report::PoissonCheck, "gaussian-bump")?;
    let n = f(&j, &["density_triples"])?;
    let r = f(&j, &["congruence_max_residual"])?;
    ensure(
        n == 50.0 && r < 1e-12,
        format!("{n} density triples, max residual {r:.1e}"),
    )
}

fn gradient() -> Check {
    let (j, _) = report(Report::GradientCheck, "gaussian-bump")?;
    let n = f(&j, &["samples"])?;
    let err = f(&j, &["max_relative_error"])?;
    let lo = f(&j, &["min_order"])?;
    let hi = f(&j, &["max_order"])?;
    ensure(
        n == 100.0 && err < 1e-6 && lo > 1.8 && hi < 2.2,
        format!("{n} states, max rel err {err:.1e}, observed order {lo:.3}..{hi:.3}"),
    )
}

fn conservation(fig3: &Outcome) -> Check {
    let (bump, _) = run("gaussian-bump")?;
    let drifts = bump.summary.drifts.clone().ok_or("no drifts")?;
    let conserved = ["H", "K", "Z1", "Z2", "S1", "S2"];
    let worst = conserved
        .iter()
        .map(|k| drifts.get(*k).copied().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let pi = drifts.get("Pi").copied().unwrap_or(0.0);
    let id = fig3
        .summary
        .momentum_identity
        .as_ref()
        .ok_or("no momentum identity")?;
    ensure(
        worst < 1e-6 && pi > 1e-8 && id.relative_error < 0.05 && id.derived,
        format!(
            "max drift of H,K,Z,S {worst:.1e}, Pi drift {pi:.1e}; dPi/dt(0) = {:.6e} vs -h*P_delta = {:.6e} (rel {:.1e}, derived)",
            id.rate, id.predicted, id.relative_error
        ),
    )
}

fn scaling() -> Check {
    let slope = |name: &str| -> Result<(f64, Vec<f64>), String> {
        match run(name)?.0.summary.experiment {
            Some(ExperimentSummary::MomentumScaling { slope, eps, .. }) => Ok((slope, eps)),
            _ => Err(format!("{name}: not a momentum-scaling experiment")),
        }
    };
    let (single, eps) = slope("momentum-scaling")?;
    let (all, _) = slope("momentum-scaling-all")?;
    let span = eps.first() == Some(&1e-3) && eps.last() == Some(&1e-1);
    ensure(
        (single - 1.0).abs() <= 0.1 && span,
        format!(
            "single-gap slope {single:.4} over eps 1e-3..1e-1; all-gap slope {all:.4} (reported)"
        ),
    )
}

fn symmetry() -> Check {
    let h = 1.0;
    let res = |name: &str| -> Result<f64, String> {
        run(name)?
            .0
            .summary
            .symmetry_residual_max
            .ok_or(format!("{name}: no residual"))
    };
    let eq = res("symmetric-equal")?;
    let uneq = res("symmetric-unequal")?;
    let (j, _) = report(Report::Hyperbolicity, "symmetric-pair")?;
    let speed = f(&j, &["symmetric", "speed_max_error"])?;
    let flips = f(&j, &["symmetric", "boundary_mismatches"])?;
    ensure(
        eq < 1e-8 * h && uneq > 1e-3 * h && speed < 1e-10 && flips == 0.0,
        format!("equal gaps {eq:.1e}, 10% unequal {uneq:.2e}; speeds err {speed:.1e}; classification mismatches {flips}"),
    )
}

fn free_surface() -> Check {
    let (j, _) = report(Report::Hyperbolicity, "free-surface-2")?;
    let cells = f(&j, &["block_oracle_cells"])?;
    let oracle = f(&j, &["block_oracle_max_error"])?;
    let (p, _) = report(Report::PoissonCheck, "free-surface-3")?;
    let layer = f(&p, &["layer_equations", "max_relative_residual"])?;
    ensure(
        cells > 0.0 && oracle < 1e-10 && layer < 1e-8,
        format!("block oracle err {oracle:.1e} over {cells} cells; 3-layer equations via 6x6 operator {layer:.1e}"),
    )
}

fn cross_formulation() -> Check {
    match run("cross-formulation")?.0.summary.experiment {
        Some(ExperimentSummary::CrossFormulation {
            gaps,
            observed_orders,
            cells,
        }) => ensure(
            !observed_orders.is_empty() && observed_orders.iter().all(|p| (1.7..=2.3).contains(p)),
            format!("gaps {gaps:?} at cells {cells:?}, observed order {observed_orders:.3?}"),
        ),
        _ => Err("not a cross-formulation experiment".into()),
    }
}

fn canonical_form() -> Check {
    let get = |name: &str| -> Result<(f64, usize, Option<f64>), String> {
        match run(name)?.0.summary.experiment {
            Some(ExperimentSummary::CanonicalForm {
                residual,
                points,
                regression_residual,
                ..
            }) => Ok((residual, points, regression_residual)),
            _ => Err(format!("{name}: not a canonical-form experiment")),
        }
    };
    let (r4, m4, _) = get("canonical-form-n4")?;
    let (r3, _, reg) = get("canonical-form-n3")?;
    let reg = reg.ok_or("no n=3 regression")?;
    ensure(
        r4 < 1e-4 && m4 == 512 && r3 < 1e-8 && reg < 1e-8,
        format!("n=4 residual {r4:.1e} at m={m4}; n=3 residual {r3:.1e}, closed-form regression {reg:.1e}"),
    )
}

fn main() -> ExitCode {
    let fig3 = run("figure3");
    let fig3c = run("figure3-m1024");
    let shared = |k: &str| -> Result<(), String> {
        for r in [&fig3, &fig3c] {
            if let Err(e) = r {
                return Err(format!("{k}: {e}"));
            }
        }
        Ok(())
    };
    let fig = || fig3.as_ref().map_err(Clone::clone);
    let criteria: Vec<(&str, Box<dyn Fn() -> Check + '_>)> = vec![
        ("pressure imbalance", Box::new(pressure_imbalance)),
        (
            "shock time",
            Box::new(|| {
                shared("figure3")?;
                shock_time(fig()?, fig3c.as_ref().map_err(Clone::clone)?)
            }),
        ),
        ("haantjes golden", Box::new(haantjes)),
        ("poisson congruence", Box::new(poisson_congruence)),
        ("gradient correctness", Box::new(gradient)),
        ("conservation suite", Box::new(|| conservation(&fig()?.0))),
        ("density-difference scaling", Box::new(scaling)),
        ("symmetric invariance", Box::new(symmetry)),
        ("free-surface checks", Box::new(free_surface)),
        ("cross-formulation", Box::new(cross_formulation)),
        ("n=4 canonical form", Box::new(canonical_form)),
    ];
    let mut failed = 0;
    for (i, (label, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(msg) => println!("PASS {:>2} {label}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {label}: {msg}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
