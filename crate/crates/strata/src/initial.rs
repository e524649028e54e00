//! Initial-condition generators.

use std::path::Path;

use strata_core::dynamics::{symmetric_lift, Fields};
use strata_core::hamiltonian::{HamiltonianModel, Variant};
use strata_core::model::Grid1D;
use strata_core::profiles::{figure3_canonical, Bump};

use crate::error::{CliError, CliResult};
use crate::scenario::{BumpSpec, InitialSpec, Setup};

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn bump(b: &BumpSpec) -> Bump {
    Bump {
        base: b.base,
        amplitude: b.amplitude,
        center: b.center,
        width: b.width,
    }
}

/// Bumps in state order; absent fields are identically zero.
pub fn field_bumps(setup: &Setup) -> CliResult<Vec<Bump>> {
    let InitialSpec::GaussianBump { bump: spec } = &setup.file.initial else {
        return Err(invalid("expected gaussian-bump data"));
    };
    let names = setup.field_names();
    if let Some(unknown) = spec.keys().find(|k| !names.contains(k)) {
        return Err(invalid(format!(
            "unknown field `{unknown}` (fields: {})",
            names.join(", ")
        )));
    }
    for (k, b) in spec {
        if !(b.width.is_finite() && b.width > 0.0) {
            return Err(invalid(format!("bump.{k}.width must be positive")));
        }
    }
    Ok(names
        .iter()
        .map(|n| spec.get(n).map(bump).unwrap_or_else(|| Bump::flat(0.0)))
        .collect())
}

pub fn generate(setup: &Setup, grid: &Grid1D) -> CliResult<Fields> {
    let xs = grid.centers();
    let dim = setup.model.dim();
    match &setup.file.initial {
        InitialSpec::Figure3 => {
            let three = setup.config.n() == 3 && setup.model.h().is_some();
            if !three || setup.variant == Variant::Symmetric {
                return Err(invalid("figure3 needs a 3-layer rigid-lid variant"));
            }
            Ok(figure3_canonical(setup.model.h().unwrap_or(1.0), &xs))
        }
        InitialSpec::GaussianBump { .. } => {
            Ok(field_bumps(setup)?.iter().map(|b| b.sample(&xs)).collect())
        }
        InitialSpec::SymmetricPair { zeta, sigma } => {
            let z = bump(zeta).sample(&xs);
            let s = bump(sigma).sample(&xs);
            match setup.variant {
                Variant::Symmetric => Ok(vec![z, s]),
                Variant::RigidLid3 | Variant::Boussinesq3 => {
                    Ok(symmetric_lift(setup.model.h().unwrap_or(1.0), &z, &s))
                }
                _ => Err(invalid(
                    "symmetric-pair needs a 3-layer rigid-lid or symmetric variant",
                )),
            }
        }
        InitialSpec::Uniform { values } => {
            if values.len() != dim {
                return Err(invalid(format!(
                    "uniform needs {dim} values ({}), got {}",
                    setup.field_names().join(", "),
                    values.len()
                )));
            }
            Ok(values.iter().map(|v| vec![*v; xs.len()]).collect())
        }
        InitialSpec::Table { path } => {
            let p = setup.base_dir.join(path);
            let (x, cols) = read_table(&p, &setup.field_names())?;
            cols.iter()
                .map(|c| {
                    interpolate(&x, c, &xs).map_err(|m| invalid(format!("{}: {m}", p.display())))
                })
                .collect()
        }
    }
}

/// Reads `x,<names...>` columns; `x` strictly increasing.
pub fn read_table(path: &Path, names: &[String]) -> CliResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let label = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| invalid(format!("{label}: {e}")))?;
    let header = rdr
        .headers()
        .map_err(|e| invalid(format!("{label}: {e}")))?
        .clone();
    let col = |n: &str| {
        header
            .iter()
            .position(|h| h == n)
            .ok_or_else(|| invalid(format!("{label}: missing column `{n}`")))
    };
    let xi = col("x")?;
    let idx: Vec<usize> = names.iter().map(|n| col(n)).collect::<CliResult<_>>()?;
    let mut x = Vec::new();
    let mut cols = vec![Vec::new(); names.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| invalid(format!("{label}: {e}")))?;
        let line = row + 2;
        let num = |i: usize| -> CliResult<f64> {
            let s = rec.get(i).unwrap_or("");
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| invalid(format!("{label}:{line}: `{s}` is not a finite number")))
        };
        let xv = num(xi)?;
        if x.last().is_some_and(|p| *p >= xv) {
            return Err(invalid(format!("{label}:{line}: x must increase strictly")));
        }
        x.push(xv);
        for (c, i) in idx.iter().enumerate() {
            cols[c].push(num(*i)?);
        }
    }
    if x.len() < 2 {
        return Err(invalid(format!("{label}: needs at least two rows")));
    }
    Ok((x, cols))
}

/// Piecewise-linear interpolation; every target must lie inside the samples.
pub fn interpolate(x: &[f64], y: &[f64], at: &[f64]) -> Result<Vec<f64>, String> {
    let (lo, hi) = (x[0], x[x.len() - 1]);
    at.iter()
        .map(|&t| {
            if t < lo || t > hi {
                return Err(format!("grid point {t} outside table range [{lo}, {hi}]"));
            }
            let k = x.partition_point(|v| *v <= t).clamp(1, x.len() - 1);
            let w = (t - x[k - 1]) / (x[k] - x[k - 1]);
            Ok(y[k - 1] + w * (y[k] - y[k - 1]))
        })
        .collect()
}

/// Finiteness plus the geometric constraints of the variant.
pub fn check_state(setup: &Setup, f: &Fields) -> CliResult<()> {
    let names = setup.field_names();
    for (k, col) in f.iter().enumerate() {
        if let Some(c) = col.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("{} is not finite at cell {c}", names[k])));
        }
    }
    let m = f.first().map_or(0, Vec::len);
    match &setup.model {
        HamiltonianModel::FreeSurface { rho, .. } => {
            for (i, col) in f[..rho.len()].iter().enumerate() {
                if let Some(c) = col.iter().position(|v| *v <= 0.0) {
                    return Err(invalid(format!("{} must be positive (cell {c})", names[i])));
                }
            }
        }
        HamiltonianModel::Symmetric { h, .. } => {
            if let Some(c) = f[0].iter().position(|z| !(*z > 0.0 && *z < h / 2.0)) {
                return Err(invalid(format!(
                    "zeta must lie in (0, h/2) (cell {c}, value {})",
                    f[0][c]
                )));
            }
        }
        model => {
            let h = model.h().unwrap_or(1.0);
            let k = f.len() / 2;
            for c in 0..m {
                let mut upper = h;
                for j in 0..k {
                    let z = f[j][c];
                    if !(z > 0.0 && z < upper) {
                        return Err(invalid(format!(
                            "interfaces must satisfy h > zeta1 > ... > 0 (cell {c}, {} = {z})",
                            names[j]
                        )));
                    }
                    upper = z;
                }
            }
        }
    }
    Ok(())
}
