//! The `simulate` command: time integration or one of the scenario
//! experiments, with CSV and JSON output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use strata_core::dynamics::{
    bump_jets, conjecture_residual, cross_formulation_gap, integrate, momentum_experiment,
    momentum_identity, regression_residual_n3, Event, GapScaling, RunResult, Snapshot,
};
use strata_core::hamiltonian::Variant;
use strata_core::hydrostatics::pressure_imbalance;
use strata_core::model::{canonical_to_primitive, CanonicalState};

use crate::error::{CliError, CliResult};
use crate::initial::field_bumps;
use crate::output::{
    diagnostics_table, ensure_dir, fields_table, num, write_json, write_text, Table,
};
use crate::scenario::{ExperimentSpec, ScalingName, Setup};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventSummary {
    Shock { t: f64 },
    HyperbolicityLoss { t: f64, cell: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumIdentitySummary {
    pub rate: f64,
    pub predicted: f64,
    pub pressure_imbalance: f64,
    pub relative_error: f64,
    /// The relation dΠ/dt = −h·P_Δ is derived rather than quoted.
    pub relation: &'static str,
    pub derived: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentSummary {
    MomentumScaling {
        scaling: &'static str,
        gap: usize,
        eps: Vec<f64>,
        rates: Vec<f64>,
        slope: f64,
    },
    CrossFormulation {
        cells: Vec<usize>,
        gaps: Vec<f64>,
        /// log₂ of successive gap ratios.
        observed_orders: Vec<f64>,
    },
    CanonicalForm {
        layers: usize,
        points: usize,
        residual: f64,
        /// Closed-form against generic pipeline, 3 layers only.
        regression_residual: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: String,
    pub variant: &'static str,
    pub cells: usize,
    pub status: &'static str,
    pub event: Option<EventSummary>,
    pub shock_time: Option<f64>,
    pub final_time: Option<f64>,
    pub steps: Option<usize>,
    pub pressure_imbalance: Option<f64>,
    pub pressure_imbalance_flat_far_field: Option<bool>,
    /// Max relative drift of each diagnostic over the run.
    pub drifts: Option<BTreeMap<String, f64>>,
    pub max_gradient_growth: Option<f64>,
    pub hyperbolic_until_event: Option<bool>,
    pub symmetry_residual_max: Option<f64>,
    pub momentum_identity: Option<MomentumIdentitySummary>,
    pub experiment: Option<ExperimentSummary>,
}

/// Everything a simulation produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    pub run: Option<RunResult>,
    pub experiment_table: Option<Table>,
}

fn three_layer_imbalance(setup: &Setup) -> CliResult<Option<(f64, bool)>> {
    let three = setup.config.n() == 3 && setup.config.h().is_some();
    if !three || setup.variant == Variant::Symmetric {
        return Ok(None);
    }
    let cs = CanonicalState::from_fields(setup.initial.clone()).map_err(CliError::from_run)?;
    let prim = canonical_to_primitive(&setup.config, &cs).map_err(CliError::from_run)?;
    let d = &setup.disc;
    let im = pressure_imbalance(&setup.config, &prim, d.dx(), d.order, d.boundary)
        .map_err(CliError::from_run)?;
    Ok(Some((im.value, im.flat_far_field)))
}

fn base_summary(setup: &Setup, status: &'static str) -> CliResult<Summary> {
    let im = three_layer_imbalance(setup)?;
    Ok(Summary {
        schema_version: setup.file.schema_version,
        scenario: setup.name().to_string(),
        variant: setup.file.variant.as_str(),
        cells: setup.disc.grid.m,
        status,
        event: None,
        shock_time: None,
        final_time: None,
        steps: None,
        pressure_imbalance: im.map(|v| v.0),
        pressure_imbalance_flat_far_field: im.map(|v| v.1),
        drifts: None,
        max_gradient_growth: None,
        hyperbolic_until_event: None,
        symmetry_residual_max: None,
        momentum_identity: None,
        experiment: None,
    })
}

fn drifts(run: &RunResult) -> BTreeMap<String, f64> {
    let mut d = BTreeMap::new();
    d.insert("H".to_string(), run.drift(|r| r.energy));
    d.insert("K".to_string(), run.drift(|r| r.impulse));
    let k = run.diagnostics.first().map_or(0, |r| r.position.len());
    for j in 0..k {
        d.insert(format!("Z{}", j + 1), run.drift(|r| r.position[j]));
        d.insert(format!("S{}", j + 1), run.drift(|r| r.shear[j]));
    }
    if run
        .diagnostics
        .first()
        .is_some_and(|r| r.momentum.is_some())
    {
        d.insert("Pi".to_string(), run.drift(|r| r.momentum.unwrap_or(0.0)));
    }
    d
}

/// Runs a scenario without touching the file system.
pub fn simulate(setup: &Setup) -> CliResult<Outcome> {
    if let Some(exp) = &setup.file.experiment {
        return run_experiment(setup, exp);
    }
    let run = integrate(&setup.model, &setup.disc, &setup.initial, &setup.options)
        .map_err(CliError::from_run)?;
    let status = match run.event {
        None => "completed",
        Some(Event::Shock { .. }) => "shock",
        Some(Event::HyperbolicityLoss { .. }) => "hyperbolicity-loss",
    };
    let mut s = base_summary(setup, status)?;
    s.event = run.event.map(|e| match e {
        Event::Shock { t } => EventSummary::Shock { t },
        Event::HyperbolicityLoss { t, cell } => EventSummary::HyperbolicityLoss { t, cell },
    });
    s.shock_time = run.shock_time();
    s.final_time = Some(run.final_time);
    s.steps = Some(run.steps);
    s.drifts = Some(drifts(&run));
    s.max_gradient_growth = Some(
        run.diagnostics
            .iter()
            .map(|r| r.gradient_growth)
            .fold(0.0, f64::max),
    );
    s.hyperbolic_until_event = Some(run.diagnostics.iter().all(|r| r.hyperbolic));
    if setup.options.track_symmetry {
        s.symmetry_residual_max = Some(
            run.diagnostics
                .iter()
                .filter_map(|r| r.symmetry_residual)
                .fold(0.0, f64::max),
        );
    }
    if setup.file.diagnostics.momentum_identity {
        let id = momentum_identity(
            &setup.config,
            &setup.disc,
            &setup.initial,
            setup.file.diagnostics.momentum_tau,
        )
        .map_err(CliError::from_run)?;
        s.momentum_identity = Some(MomentumIdentitySummary {
            rate: id.rate,
            predicted: id.predicted,
            pressure_imbalance: id.pressure_imbalance,
            relative_error: id.relative_error,
            relation: "dPi/dt(0) = -h * P_delta",
            derived: true,
        });
    }
    Ok(Outcome {
        summary: s,
        run: Some(run),
        experiment_table: None,
    })
}

fn run_experiment(setup: &Setup, exp: &ExperimentSpec) -> CliResult<Outcome> {
    let mut s = base_summary(setup, "experiment")?;
    let table = match exp {
        ExperimentSpec::MomentumScaling {
            eps,
            scaling,
            gap,
            tau,
        } => {
            let sc = match scaling {
                ScalingName::Single => GapScaling::Single(*gap),
                ScalingName::All => GapScaling::All,
            };
            let r = momentum_experiment(&setup.config, &setup.disc, &setup.initial, eps, sc, *tau)
                .map_err(CliError::from_run)?;
            let mut t = Table::new(["eps", "dPi_dt"]);
            for (e, v) in r.eps.iter().zip(&r.rates) {
                t.push(vec![num(*e), num(*v)]);
            }
            s.experiment = Some(ExperimentSummary::MomentumScaling {
                scaling: match scaling {
                    ScalingName::Single => "single",
                    ScalingName::All => "all",
                },
                gap: *gap,
                eps: r.eps,
                rates: r.rates,
                slope: r.slope,
            });
            t
        }
        ExperimentSpec::CrossFormulation { cells, t_end, cfl } => {
            let gaps = cells
                .iter()
                .map(|&m| {
                    let sm = setup.with_cells(m)?;
                    cross_formulation_gap(&sm.config, &sm.disc, &sm.initial, *t_end, *cfl)
                        .map_err(CliError::from_run)
                })
                .collect::<CliResult<Vec<f64>>>()?;
            let observed_orders: Vec<f64> = gaps.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
            let mut t = Table::new(["cells", "dx", "max_gap"]);
            for (m, g) in cells.iter().zip(&gaps) {
                t.push(vec![
                    m.to_string(),
                    num(setup.disc.grid.length() / *m as f64),
                    num(*g),
                ]);
            }
            s.experiment = Some(ExperimentSummary::CrossFormulation {
                cells: cells.clone(),
                gaps,
                observed_orders,
            });
            t
        }
        ExperimentSpec::CanonicalForm => {
            let jets = bump_jets(&field_bumps(setup)?, &setup.disc.grid.centers());
            let residual = conjecture_residual(&setup.config, &jets).map_err(CliError::from_run)?;
            let regression = if setup.config.n() == 3 {
                Some(regression_residual_n3(&setup.config, &jets).map_err(CliError::from_run)?)
            } else {
                None
            };
            let mut t = Table::new(["layers", "points", "residual", "regression_residual"]);
            t.push(vec![
                setup.config.n().to_string(),
                jets.len().to_string(),
                num(residual),
                regression.map(num).unwrap_or_default(),
            ]);
            s.experiment = Some(ExperimentSummary::CanonicalForm {
                layers: setup.config.n(),
                points: jets.len(),
                residual,
                regression_residual: regression,
            });
            t
        }
    };
    Ok(Outcome {
        summary: s,
        run: None,
        experiment_table: Some(table),
    })
}

/// Writes fields.csv, diagnostics.csv (or experiment.csv) and summary.json.
pub fn write_outcome(setup: &Setup, outcome: &Outcome, dir: &Path) -> CliResult<()> {
    ensure_dir(dir)?;
    let names = setup.field_names();
    let stride = setup.file.integration.fields_stride;
    let initial = [Snapshot {
        t: 0.0,
        fields: setup.initial.clone(),
    }];
    let snaps: &[Snapshot] = match &outcome.run {
        Some(r) if !r.snapshots.is_empty() => &r.snapshots,
        _ => &initial,
    };
    write_text(
        &dir.join("fields.csv"),
        &fields_table(&setup.disc.grid, &names, snaps, stride),
    )?;
    if let Some(run) = &outcome.run {
        diagnostics_table(&run.diagnostics, setup.options.track_symmetry)
            .write(&dir.join("diagnostics.csv"))?;
    }
    if let Some(t) = &outcome.experiment_table {
        t.write(&dir.join("experiment.csv"))?;
    }
    write_json(&dir.join("summary.json"), &outcome.summary)
}

/// Loads, runs and writes one scenario.
pub fn cmd_simulate(path: &Path, dir: &Path) -> CliResult<Summary> {
    let setup = Setup::load(path)?;
    let out = simulate(&setup)?;
    write_outcome(&setup, &out, dir)?;
    Ok(out.summary)
}
