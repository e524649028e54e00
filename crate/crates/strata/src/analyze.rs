//! The `analyze` reports.

use std::path::Path;

use serde::Serialize;
use strata_core::dynamics::{free_surface_layer_rates, hamiltonian_rates, Jet};
use strata_core::hamiltonian::{
    congruence_residual, gradient_analytic, gradient_fd, gradient_fd_point, HamiltonianModel,
    PoissonKind, PoissonOperator, Variant,
};
use strata_core::hydrostatics::pressure_imbalance;
use strata_core::linalg::{Complex, Matrix};
use strata_core::model::{canonical_to_primitive, CanonicalState, Lid};
use strata_core::quasilinear::{
    build_system, classify_matrix, haantjes, haantjes_closed_boussinesq,
    haantjes_closed_free_surface2, hamiltonian_characteristic, symmetric_char_speeds, CharSpeeds,
    Hyperbolicity, QuasilinearSystem, System,
};
use strata_core::stencil::{derivative, inner, Boundary};

use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, num, write_json, Table};
use crate::sampling::{density_triple, noise, random_state, rng};
use crate::scenario::Setup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Report {
    Hyperbolicity,
    Haantjes,
    Imbalance,
    PoissonCheck,
    GradientCheck,
}

impl Report {
    pub fn name(self) -> &'static str {
        match self {
            Report::Hyperbolicity => "hyperbolicity",
            Report::Haantjes => "haantjes",
            Report::Imbalance => "imbalance",
            Report::PoissonCheck => "poisson-check",
            Report::GradientCheck => "gradient-check",
        }
    }
}

/// A report: JSON summary plus one tidy table.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub json: serde_json::Value,
    pub table: Table,
}

fn unsupported(r: Report, setup: &Setup, why: &str) -> CliError {
    CliError::Validation(format!(
        "`analyze {}` is not available for variant {}: {why}",
        r.name(),
        setup.file.variant.as_str()
    ))
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

pub fn analyze(report: Report, setup: &Setup) -> CliResult<Analysis> {
    match report {
        Report::Hyperbolicity => hyperbolicity(setup),
        Report::Haantjes => haantjes_report(setup),
        Report::Imbalance => imbalance(setup),
        Report::PoissonCheck => poisson_check(setup),
        Report::GradientCheck => gradient_check(setup),
    }
}

pub fn cmd_analyze(report: Report, path: &Path, dir: &Path) -> CliResult<Analysis> {
    let setup = Setup::load(path)?;
    let a = analyze(report, &setup)?;
    ensure_dir(dir)?;
    a.table.write(&dir.join(format!("{}.csv", report.name())))?;
    write_json(&dir.join(format!("{}.json", report.name())), &a.json)?;
    Ok(a)
}

/// Point state in the coordinates of the quasilinear system (velocities
/// instead of layer momenta for free-surface models).
fn system_point(model: &HamiltonianModel, p: &[f64]) -> Vec<f64> {
    match model {
        HamiltonianModel::FreeSurface { rho, .. } => {
            let n = rho.len();
            let mut q = p.to_vec();
            for i in 0..n {
                q[n + i] /= rho[i];
            }
            q
        }
        _ => p.to_vec(),
    }
}

fn point(fields: &[Vec<f64>], c: usize) -> Vec<f64> {
    fields.iter().map(|f| f[c]).collect()
}

fn characteristic(setup: &Setup, sys: Option<&System>, p: &[f64]) -> CliResult<Matrix> {
    match sys {
        Some(s) => s.matrix(&system_point(&setup.model, p)),
        None => hamiltonian_characteristic(&setup.model, p, 4),
    }
    .map_err(CliError::from_run)
}

fn sorted_eigen(a: &Matrix) -> CliResult<Vec<Complex>> {
    let mut e = a
        .eigenvalues()
        .ok_or_else(|| CliError::Numerical("eigenvalue iteration did not converge".into()))?;
    e.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(e)
}

/// ±√eig(A₁₂A₂₁) for block anti-diagonal A, sorted.
fn block_oracle(a: &Matrix) -> Option<Vec<f64>> {
    let n = a.dim();
    let k = n / 2;
    let p = Matrix::from_fn(k, |i, j| a[(i, k + j)]);
    let q = Matrix::from_fn(k, |i, j| a[(k + i, j)]);
    let sq = p.mul(&q).eigenvalues()?;
    let mut out = Vec::with_capacity(n);
    for z in sq {
        if z.re < 0.0 || z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
            return None;
        }
        out.push(z.re.sqrt());
        out.push(-z.re.sqrt());
    }
    out.sort_by(f64::total_cmp);
    Some(out)
}

fn at_rest(p: &[f64]) -> bool {
    p[p.len() / 2..].iter().all(|v| *v == 0.0)
}

#[derive(Serialize)]
struct SymmetricCheck {
    samples: usize,
    /// Closed-form speeds against the eigen-solve, relative to |λ|.
    speed_max_error: f64,
    /// Sampled states whose classification disagrees with σ² < ghρ̄ρ_Δ/2
    /// outside a relative margin.
    boundary_mismatches: usize,
    boundary_margin: f64,
    critical_sigma: f64,
}

#[derive(Serialize)]
struct HyperbolicityReport {
    cells: usize,
    hyperbolic: usize,
    elliptic: usize,
    degenerate: usize,
    first_non_hyperbolic: Option<usize>,
    max_speed: f64,
    /// Block reduction against the eigen-solve, over cells at rest.
    block_oracle_cells: usize,
    block_oracle_max_error: Option<f64>,
    symmetric: Option<SymmetricCheck>,
}

fn speed_error(setup: &Setup, sys: &System, z: f64, s: f64) -> CliResult<f64> {
    let e = sorted_eigen(&sys.matrix(&[z, s]).map_err(CliError::from_run)?)?;
    let scale = e.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    Ok(
        match symmetric_char_speeds(&setup.config, z, s).map_err(CliError::from_run)? {
            CharSpeeds::Real { minus, plus } => {
                (e[0].re - minus).abs().max((e[1].re - plus).abs()) / scale
            }
            CharSpeeds::Complex { re, im } => {
                (e[0].re - re).abs().max((e[0].im.abs() - im).abs()) / scale
            }
        },
    )
}

fn hyperbolicity(setup: &Setup) -> CliResult<Analysis> {
    let sys = build_system(&setup.config, setup.variant).ok();
    let f = &setup.initial;
    let n = f.len();
    let xs = setup.disc.grid.centers();
    let mut header = vec![
        "x".to_string(),
        "class".into(),
        "max_speed".into(),
        "max_imag".into(),
    ];
    header.extend((1..=n).map(|i| format!("re{i}")));
    header.extend((1..=n).map(|i| format!("im{i}")));
    let mut table = Table::new(header);
    let mut rep = HyperbolicityReport {
        cells: xs.len(),
        hyperbolic: 0,
        elliptic: 0,
        degenerate: 0,
        first_non_hyperbolic: None,
        max_speed: 0.0,
        block_oracle_cells: 0,
        block_oracle_max_error: None,
        symmetric: None,
    };
    let tol = setup.options.hyperbolicity_tol;
    for (c, x) in xs.iter().enumerate() {
        let p = point(f, c);
        let a = characteristic(setup, sys.as_ref(), &p)?;
        let cls = classify_matrix(&a, tol).map_err(CliError::from_run)?;
        let eig = sorted_eigen(&a)?;
        let class = match cls {
            Hyperbolicity::Hyperbolic(_) => {
                rep.hyperbolic += 1;
                "hyperbolic"
            }
            Hyperbolicity::Elliptic(_) => {
                rep.elliptic += 1;
                "elliptic"
            }
            Hyperbolicity::Degenerate(_) => {
                rep.degenerate += 1;
                "degenerate"
            }
        };
        if !cls.is_hyperbolic() && rep.first_non_hyperbolic.is_none() {
            rep.first_non_hyperbolic = Some(c);
        }
        rep.max_speed = rep.max_speed.max(cls.max_speed());
        if at_rest(&p) {
            if let Some(o) = block_oracle(&a) {
                let scale = o.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
                let err = eig
                    .iter()
                    .zip(&o)
                    .map(|(e, v)| (e.re - v).abs().max(e.im.abs()))
                    .fold(0.0, f64::max);
                rep.block_oracle_cells += 1;
                rep.block_oracle_max_error =
                    Some(rep.block_oracle_max_error.unwrap_or(0.0).max(err / scale));
            }
        }
        let max_imag = eig.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
        let mut row = vec![num(*x), class.into(), num(cls.max_speed()), num(max_imag)];
        row.extend(eig.iter().map(|e| num(e.re)));
        row.extend(eig.iter().map(|e| num(e.im)));
        table.push(row);
    }
    if let (
        Some(sys),
        HamiltonianModel::Symmetric {
            g,
            h,
            rho_bar,
            rho_delta,
        },
    ) = (&sys, &setup.model)
    {
        let crit = (g * h * rho_bar * rho_delta / 2.0).sqrt();
        let margin = 1e-6;
        let mut worst: f64 = 0.0;
        for c in 0..xs.len() {
            worst = worst.max(speed_error(setup, sys, f[0][c], f[1][c])?);
        }
        let mut r = rng(setup.file.analysis.seed);
        let samples = setup.file.analysis.samples;
        let mut mismatches = 0;
        for _ in 0..samples {
            let p = random_state(&setup.model, &mut r);
            worst = worst.max(speed_error(setup, sys, p[0], p[1])?);
            let ratio = p[1].abs() / crit;
            if (ratio - 1.0).abs() <= margin {
                continue;
            }
            let cls = classify_matrix(&sys.matrix(&p).map_err(CliError::from_run)?, tol)
                .map_err(CliError::from_run)?;
            if cls.is_hyperbolic() != (ratio < 1.0) {
                mismatches += 1;
            }
        }
        rep.symmetric = Some(SymmetricCheck {
            samples,
            speed_max_error: worst,
            boundary_mismatches: mismatches,
            boundary_margin: margin,
            critical_sigma: crit,
        });
    }
    Ok(Analysis {
        json: to_json(&rep),
        table,
    })
}

fn triple_label(i: usize, j: usize, k: usize) -> String {
    format!("({};{},{})", i + 1, j + 1, k + 1)
}

#[derive(Serialize)]
struct HaantjesReport {
    samples: usize,
    dim: usize,
    independent_components: usize,
    /// Non-vanishing triples, 1-based `(upper; lower, lower)`.
    nonvanishing: Vec<String>,
    /// True when every sample has the same non-vanishing set.
    consistent: bool,
    min_nonvanishing: usize,
    max_nonvanishing: usize,
    /// Largest |H|/threshold among the vanishing components.
    max_vanishing_ratio: f64,
    closed_form_triples: Option<Vec<String>>,
    closed_form_max_relative_error: Option<f64>,
}

fn haantjes_report(setup: &Setup) -> CliResult<Analysis> {
    let r = Report::Haantjes;
    let sys = build_system(&setup.config, setup.variant)
        .map_err(|e| unsupported(r, setup, &e.to_string()))?;
    let a = &setup.file.analysis;
    let mut rand = rng(a.seed);
    let mut table = Table::new([
        "sample",
        "i",
        "j",
        "k",
        "value",
        "closed_form",
        "relative_error",
        "nonvanishing",
    ]);
    let mut first: Option<Vec<(usize, usize, usize)>> = None;
    let (mut consistent, mut minc, mut maxc) = (true, usize::MAX, 0);
    let mut vanish_ratio: f64 = 0.0;
    let mut closed_err: Option<f64> = None;
    let mut closed_triples = None;
    let mut dim = sys.dim();
    let mut taken = 0;
    let mut attempts = 0;
    while taken < a.samples {
        attempts += 1;
        if attempts > 1000 * a.samples.max(1) {
            return Err(CliError::Numerical(
                "could not draw hyperbolic sample states".into(),
            ));
        }
        let p = random_state(&setup.model, &mut rand);
        let u = system_point(&setup.model, &p);
        let cls = classify_matrix(
            &sys.matrix(&u).map_err(CliError::from_run)?,
            setup.options.hyperbolicity_tol,
        )
        .map_err(CliError::from_run)?;
        if !cls.is_hyperbolic() {
            continue;
        }
        let res = haantjes(&sys, &u).map_err(CliError::from_run)?;
        dim = res.dim;
        let closed = match &sys {
            System::FreeSurface2 { g, rho } => Some(haantjes_closed_free_surface2(*g, *rho, &u)),
            System::Boussinesq3 { g, h, rho } => Some(haantjes_closed_boussinesq(*g, *h, *rho, &u)),
            _ => None,
        };
        if let Some(cl) = &closed {
            closed_triples.get_or_insert_with(|| {
                cl.iter()
                    .map(|c| triple_label(c.0, c.1, c.2))
                    .collect::<Vec<_>>()
            });
        }
        for &(i, j, k, v) in &res.components {
            let cf = closed.as_ref().map(|cl| {
                cl.iter()
                    .find(|c| (c.0, c.1, c.2) == (i, j, k))
                    .map_or(0.0, |c| c.3)
            });
            let rel = cf.map(|c| {
                if c == 0.0 {
                    (v / res.threshold).abs()
                } else {
                    ((v - c) / c).abs()
                }
            });
            let nv = res.nonvanishing.contains(&(i, j, k));
            if let (Some(c), Some(e)) = (cf, rel) {
                if c != 0.0 {
                    closed_err = Some(closed_err.unwrap_or(0.0).max(e));
                }
            }
            if !nv {
                vanish_ratio = vanish_ratio.max(v.abs() / res.threshold);
            }
            table.push(vec![
                taken.to_string(),
                (i + 1).to_string(),
                (j + 1).to_string(),
                (k + 1).to_string(),
                num(v),
                cf.map(num).unwrap_or_default(),
                rel.map(num).unwrap_or_default(),
                if nv { "1" } else { "0" }.into(),
            ]);
        }
        minc = minc.min(res.nonvanishing.len());
        maxc = maxc.max(res.nonvanishing.len());
        match &first {
            None => first = Some(res.nonvanishing.clone()),
            Some(f) => consistent &= *f == res.nonvanishing,
        }
        taken += 1;
    }
    let rep = HaantjesReport {
        samples: taken,
        dim,
        independent_components: dim * dim * (dim - 1) / 2,
        nonvanishing: first
            .unwrap_or_default()
            .iter()
            .map(|t| triple_label(t.0, t.1, t.2))
            .collect(),
        consistent,
        min_nonvanishing: if taken == 0 { 0 } else { minc },
        max_nonvanishing: maxc,
        max_vanishing_ratio: vanish_ratio,
        closed_form_triples: closed_triples,
        closed_form_max_relative_error: closed_err,
    };
    Ok(Analysis {
        json: to_json(&rep),
        table,
    })
}

#[derive(Serialize)]
struct ImbalanceReport {
    cells: Vec<usize>,
    values: Vec<f64>,
    flat_far_field: Vec<bool>,
    /// |P(m_{k+1}) − P(m_k)|.
    increments: Vec<f64>,
    monotone: bool,
    finest: f64,
}

fn imbalance(setup: &Setup) -> CliResult<Analysis> {
    let r = Report::Imbalance;
    if setup.config.n() != 3 || setup.variant == Variant::Symmetric || setup.config.h().is_none() {
        return Err(unsupported(r, setup, "needs a 3-layer rigid-lid state"));
    }
    let analysis = &setup.file.analysis;
    let cells = if analysis.imbalance_cells.is_empty() {
        vec![setup.disc.grid.m]
    } else {
        analysis.imbalance_cells.clone()
    };
    let mut table = Table::new(["cells", "dx", "P_delta", "flat_far_field"]);
    let (mut values, mut flat) = (Vec::new(), Vec::new());
    for &m in &cells {
        let s = setup.with_cells(m)?;
        let cs = CanonicalState::from_fields(s.initial.clone()).map_err(CliError::from_run)?;
        let prim = canonical_to_primitive(&s.config, &cs).map_err(CliError::from_run)?;
        let im = pressure_imbalance(&s.config, &prim, s.disc.dx(), s.disc.order, s.disc.boundary)
            .map_err(CliError::from_run)?;
        table.push(vec![
            m.to_string(),
            num(s.disc.dx()),
            num(im.value),
            im.flat_far_field.to_string(),
        ]);
        values.push(im.value);
        flat.push(im.flat_far_field);
    }
    let increments: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let rep = ImbalanceReport {
        monotone: increments.windows(2).all(|w| w[1] < w[0]),
        finest: *values.last().unwrap_or(&f64::NAN),
        cells,
        values,
        flat_far_field: flat,
        increments,
    };
    Ok(Analysis {
        json: to_json(&rep),
        table,
    })
}

#[derive(Serialize)]
struct SkewCheck {
    operator: String,
    order: usize,
    /// |⟨b, 𝓑a⟩ + ⟨a, 𝓑b⟩| relative to ‖b‖‖𝓑a‖.
    residual: f64,
}

#[derive(Serialize)]
struct LayerEquationCheck {
    points: usize,
    max_relative_residual: f64,
}

#[derive(Serialize)]
struct PoissonReport {
    density_triples: usize,
    congruence_max_residual: f64,
    scenario_congruence_residual: Option<f64>,
    skew_adjoint: Vec<SkewCheck>,
    skew_adjoint_max_residual: f64,
    /// Operator form against the free-surface layer equations.
    layer_equations: Option<LayerEquationCheck>,
}

fn skew_residual(op: &PoissonOperator, m: usize, dx: f64, order: usize, seed: u64) -> f64 {
    let n = op.dim();
    let mut r = rng(seed);
    let a: Vec<Vec<f64>> = (0..n).map(|_| noise(&mut r, m)).collect();
    let b: Vec<Vec<f64>> = (0..n).map(|_| noise(&mut r, m)).collect();
    let ba = op.apply(&a, dx, order, Boundary::Periodic);
    let bb = op.apply(&b, dx, order, Boundary::Periodic);
    let lhs: f64 = (0..n).map(|i| inner(&b[i], &ba[i], dx)).sum();
    let rhs: f64 = (0..n).map(|i| inner(&a[i], &bb[i], dx)).sum();
    let norm = |v: &[Vec<f64>]| v.iter().map(|f| inner(f, f, dx)).sum::<f64>().sqrt();
    (lhs + rhs).abs() / (norm(&b) * norm(&ba)).max(1e-300)
}

fn poisson_check(setup: &Setup) -> CliResult<Analysis> {
    let a = &setup.file.analysis;
    let mut table = Table::new(["check", "index", "residual"]);
    let mut r = rng(a.seed);
    let mut worst: f64 = 0.0;
    for t in 0..a.density_triples {
        let res = congruence_residual(&density_triple(&mut r)).map_err(CliError::from_run)?;
        worst = worst.max(res);
        table.push(vec!["congruence".into(), t.to_string(), num(res)]);
    }
    let own = match setup.config.rigid3() {
        Ok((rho, _)) => Some(congruence_residual(&rho).map_err(CliError::from_run)?),
        Err(_) => None,
    };
    let m = setup.disc.grid.m;
    let dx = setup.disc.dx();
    let mut ops = vec![(
        format!("canonical-{}", setup.model.dim()),
        setup.model.poisson(),
    )];
    if let Ok((rho, _)) = setup.config.rigid3() {
        ops.push((
            "flat-3".into(),
            PoissonOperator::new(PoissonKind::Flat3(rho)),
        ));
    }
    let mut skew = Vec::new();
    for (name, op) in &ops {
        for order in [2, 4] {
            let res = skew_residual(op, m, dx, order, a.seed.wrapping_add(order as u64));
            table.push(vec![format!("skew-{name}"), order.to_string(), num(res)]);
            skew.push(SkewCheck {
                operator: name.clone(),
                order,
                residual: res,
            });
        }
    }
    let layer_equations = if setup.config.lid() == Lid::FreeSurface {
        let f = &setup.initial;
        let slopes: Vec<Vec<f64>> = f
            .iter()
            .map(|c| derivative(c, dx, 4, setup.disc.boundary))
            .collect();
        let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
        for c in 0..m {
            let jet = Jet {
                value: point(f, c),
                slope: point(&slopes, c),
            };
            let x = free_surface_layer_rates(&setup.config, &jet).map_err(CliError::from_run)?;
            let y = hamiltonian_rates(&setup.model, &jet).map_err(CliError::from_run)?;
            for (p, q) in x.iter().zip(&y) {
                diff = diff.max((p - q).abs());
                scale = scale.max(p.abs());
            }
        }
        let rel = if scale > 0.0 { diff / scale } else { diff };
        table.push(vec!["layer-equations".into(), m.to_string(), num(rel)]);
        Some(LayerEquationCheck {
            points: m,
            max_relative_residual: rel,
        })
    } else {
        None
    };
    let rep = PoissonReport {
        density_triples: a.density_triples,
        congruence_max_residual: worst,
        scenario_congruence_residual: own,
        skew_adjoint_max_residual: skew.iter().map(|s| s.residual).fold(0.0, f64::max),
        skew_adjoint: skew,
        layer_equations,
    };
    Ok(Analysis {
        json: to_json(&rep),
        table,
    })
}

#[derive(Serialize)]
struct GradientReport {
    samples: usize,
    fd_step: f64,
    fd_steps: [f64; 2],
    max_relative_error: f64,
    /// Samples where the coarse-step error is above round-off.
    order_samples: usize,
    min_order: Option<f64>,
    max_order: Option<f64>,
    /// Whole-field analytic against finite-difference gradient of the
    /// scenario state.
    field_max_relative_error: f64,
}

fn rel_err(model: &HamiltonianModel, p: &[f64], exact: &[f64], d: f64) -> CliResult<f64> {
    let fd = gradient_fd_point(model, p, d, 2).map_err(CliError::from_run)?;
    let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    Ok(fd
        .iter()
        .zip(exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale)
}

fn gradient_check(setup: &Setup) -> CliResult<Analysis> {
    let r = Report::GradientCheck;
    let model = &setup.model;
    let a = &setup.file.analysis;
    let mut rand = rng(a.seed);
    let mut table = Table::new([
        "sample",
        "relative_error",
        "error_coarse",
        "error_fine",
        "order",
    ]);
    let mut worst: f64 = 0.0;
    let mut orders = Vec::new();
    for s in 0..a.samples {
        let p = random_state(model, &mut rand);
        let exact = model
            .gradient_closed(&p)
            .ok_or_else(|| unsupported(r, setup, "no closed-form gradient"))?
            .map_err(CliError::from_run)?;
        let e = rel_err(model, &p, &exact, a.fd_step)?;
        let e1 = rel_err(model, &p, &exact, a.fd_steps[0])?;
        let e2 = rel_err(model, &p, &exact, a.fd_steps[1])?;
        let order = if e1 > 1e-11 {
            Some((e1 / e2).ln() / (a.fd_steps[0] / a.fd_steps[1]).ln())
        } else {
            None
        };
        if let Some(o) = order {
            orders.push(o);
        }
        worst = worst.max(e);
        table.push(vec![
            s.to_string(),
            num(e),
            num(e1),
            num(e2),
            order.map(num).unwrap_or_default(),
        ]);
    }
    let ga = gradient_analytic(model, &setup.initial).map_err(CliError::from_run)?;
    let gf = gradient_fd(model, &setup.initial, a.fd_step).map_err(CliError::from_run)?;
    let scale = ga
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let field = ga
        .iter()
        .flatten()
        .zip(gf.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale;
    let rep = GradientReport {
        samples: a.samples,
        fd_step: a.fd_step,
        fd_steps: a.fd_steps,
        max_relative_error: worst,
        order_samples: orders.len(),
        min_order: orders.iter().copied().reduce(f64::min),
        max_order: orders.iter().copied().reduce(f64::max),
        field_max_relative_error: field,
    };
    Ok(Analysis {
        json: to_json(&rep),
        table,
    })
}
