//! Scenario files: a versioned TOML schema and its validation into a
//! ready-to-run [`Setup`].
//!
//! ```toml
//! schema_version = 1
//! name = "figure3"
//! variant = "rigid-lid-3"
//!
//! [layers]
//! rho = [0.5, 0.75, 1.0]
//! g = 1.0
//! lid = "rigid"
//! h = 1.0
//!
//! [grid]
//! x0 = -5.0
//! x1 = 7.0
//! cells = 2048
//!
//! [initial]
//! kind = "figure3"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use strata_core::dynamics::{Discretization, Fields, IntegrateOptions, ShockDetector};
use strata_core::hamiltonian::{HamiltonianModel, Variant};
use strata_core::model::{Grid1D, LayerConfig, Lid};
use strata_core::stencil::Boundary;

use crate::error::{CliError, CliResult};
use crate::initial;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantName {
    #[serde(rename = "free-surface-2")]
    FreeSurface2,
    #[serde(rename = "free-surface-3")]
    FreeSurface3,
    FreeSurfaceN,
    #[serde(rename = "rigid-lid-3")]
    RigidLid3,
    RigidLidN,
    #[serde(rename = "boussinesq-3")]
    Boussinesq3,
    Symmetric,
}

impl VariantName {
    pub fn variant(self) -> Variant {
        match self {
            Self::FreeSurface2 => Variant::FreeSurface2,
            Self::FreeSurface3 => Variant::FreeSurface3,
            Self::FreeSurfaceN => Variant::FreeSurfaceN,
            Self::RigidLid3 => Variant::RigidLid3,
            Self::RigidLidN => Variant::RigidLidN,
            Self::Boussinesq3 => Variant::Boussinesq3,
            Self::Symmetric => Variant::Symmetric,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::FreeSurface2 => "free-surface-2",
            Self::FreeSurface3 => "free-surface-3",
            Self::FreeSurfaceN => "free-surface-n",
            Self::RigidLid3 => "rigid-lid-3",
            Self::RigidLidN => "rigid-lid-n",
            Self::Boussinesq3 => "boussinesq-3",
            Self::Symmetric => "symmetric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LidName {
    Rigid,
    Free,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayersSpec {
    pub rho: Vec<f64>,
    pub g: f64,
    pub lid: LidName,
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    #[serde(default)]
    pub base: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Piecewise-parabolic interfaces at rest.
    Figure3,
    /// One Gaussian bump per named state field; absent fields are zero.
    GaussianBump { bump: BTreeMap<String, BumpSpec> },
    /// Symmetric data: lower interface `zeta` and its shear `sigma`.
    SymmetricPair { zeta: BumpSpec, sigma: BumpSpec },
    /// Constant state, one value per field.
    Uniform { values: Vec<f64> },
    /// CSV samples `x,<fields>` interpolated linearly onto the grid.
    Table { path: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryName {
    FarField,
    Periodic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSpec {
    #[serde(default = "one")]
    pub t_end: f64,
    pub output_interval: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_stencil")]
    pub stencil: usize,
    #[serde(default = "default_boundary")]
    pub boundary: BoundaryName,
    #[serde(default)]
    pub viscosity: f64,
    #[serde(default)]
    pub allow_elliptic: bool,
    /// Every `fields_stride`-th cell goes to fields.csv.
    #[serde(default = "default_stride")]
    pub fields_stride: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
}

fn default_cfl() -> f64 {
    0.4
}
fn default_stencil() -> usize {
    2
}
fn default_boundary() -> BoundaryName {
    BoundaryName::FarField
}
fn default_stride() -> usize {
    1
}
fn default_max_steps() -> usize {
    10_000_000
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            output_interval: None,
            cfl: default_cfl(),
            stencil: default_stencil(),
            boundary: default_boundary(),
            viscosity: 0.0,
            allow_elliptic: false,
            fields_stride: default_stride(),
            max_steps: default_max_steps(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DetectorName {
    #[default]
    DualGrid,
    GradientGrowth,
    Off,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSpec {
    #[serde(default)]
    pub detector: DetectorName,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSpec {
    /// Measure dΠ/dt at t = 0 against −h·P_Δ (zero velocities only).
    #[serde(default)]
    pub momentum_identity: bool,
    #[serde(default = "default_tau")]
    pub momentum_tau: f64,
    /// Track the mirror-symmetry residual of 4-field rigid-lid states.
    #[serde(default)]
    pub symmetry: bool,
}

fn default_tau() -> f64 {
    0.01
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        Self {
            momentum_identity: false,
            momentum_tau: default_tau(),
            symmetry: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Grids for the pressure-imbalance refinement curve.
    #[serde(default)]
    pub imbalance_cells: Vec<usize>,
    #[serde(default = "default_triples")]
    pub density_triples: usize,
    /// Step pair used to measure the finite-difference order.
    #[serde(default = "default_fd_steps")]
    pub fd_steps: [f64; 2],
    /// Step for the accuracy comparison.
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_samples() -> usize {
    100
}
fn default_seed() -> u64 {
    1
}
fn default_triples() -> usize {
    50
}
fn default_fd_steps() -> [f64; 2] {
    [4e-3, 2e-3]
}
fn default_fd_step() -> f64 {
    1e-5
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            seed: default_seed(),
            imbalance_cells: Vec::new(),
            density_triples: default_triples(),
            fd_steps: default_fd_steps(),
            fd_step: default_fd_step(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingName {
    Single,
    All,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// dΠ/dt at rest across density-gap scales.
    MomentumScaling {
        eps: Vec<f64>,
        scaling: ScalingName,
        #[serde(default)]
        gap: usize,
        #[serde(default = "default_tau")]
        tau: f64,
    },
    /// Canonical against primitive evolution on a sequence of grids.
    CrossFormulation {
        cells: Vec<usize>,
        t_end: f64,
        #[serde(default = "default_cfl")]
        cfl: f64,
    },
    /// Canonical form of the n-layer rigid-lid equations, evaluated
    /// pointwise on the analytic bump jets at the grid centres.
    CanonicalForm,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub variant: VariantName,
    pub layers: LayersSpec,
    pub grid: GridSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub integration: IntegrationSpec,
    #[serde(default)]
    pub shock: ShockSpec,
    #[serde(default)]
    pub diagnostics: DiagnosticsSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    pub experiment: Option<ExperimentSpec>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub file: ScenarioFile,
    /// Directory that relative table paths resolve against.
    pub base_dir: PathBuf,
    pub variant: Variant,
    pub config: LayerConfig,
    pub model: HamiltonianModel,
    pub disc: Discretization,
    pub initial: Fields,
    pub options: IntegrateOptions,
}

/// Locates `path` (dotted key) in the source and returns its 1-based line.
fn locate(source: &str, path: &str) -> Option<usize> {
    let (table, key) = match path.rsplit_once('.') {
        Some((t, k)) => (Some(t), k),
        None => (None, path),
    };
    let mut current: Option<String> = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = Some(
                line.trim_matches(|c| c == '[' || c == ']')
                    .trim()
                    .to_string(),
            );
            continue;
        }
        let key_here = line.split('=').next().map(str::trim);
        if key_here == Some(key) && current.as_deref() == table {
            return Some(i + 1);
        }
    }
    match table {
        Some(t) => source
            .lines()
            .position(|l| l.trim().trim_matches(|c| c == '[' || c == ']').trim() == t)
            .map(|i| i + 1),
        None => None,
    }
}

struct Checker<'a> {
    origin: &'a str,
    source: &'a str,
}

impl Checker<'_> {
    fn fail(&self, field: &str, msg: impl std::fmt::Display) -> CliError {
        match locate(self.source, field) {
            Some(line) => CliError::Validation(format!("{}:{line}: {field}: {msg}", self.origin)),
            None => CliError::Validation(format!("{}: {field}: {msg}", self.origin)),
        }
    }

    fn positive(&self, field: &str, v: f64) -> CliResult<()> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(self.fail(field, format!("must be positive and finite, got {v}")))
        }
    }
}

impl Setup {
    /// Reads and validates a scenario file.
    pub fn load(path: &Path) -> CliResult<Setup> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Setup::parse(&text, &path.display().to_string(), &base)
    }

    /// Parses and validates scenario text; `origin` labels messages.
    pub fn parse(text: &str, origin: &str, base_dir: &Path) -> CliResult<Setup> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| CliError::Validation(format!("{origin}: {e}")))?;
        Setup::build(file, text, origin, base_dir)
    }

    fn build(file: ScenarioFile, source: &str, origin: &str, base_dir: &Path) -> CliResult<Setup> {
        let ck = Checker { origin, source };
        if file.schema_version != SCHEMA_VERSION {
            return Err(ck.fail(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    file.schema_version
                ),
            ));
        }
        if file.name.trim().is_empty() {
            return Err(ck.fail("name", "must not be empty"));
        }
        let l = &file.layers;
        let lid = match (l.lid, l.h) {
            (LidName::Rigid, Some(h)) => {
                ck.positive("layers.h", h)?;
                Lid::RigidLid { h }
            }
            (LidName::Rigid, None) => return Err(ck.fail("layers.h", "required for a rigid lid")),
            (LidName::Free, Some(_)) => {
                return Err(ck.fail("layers.h", "not allowed with a free surface"))
            }
            (LidName::Free, None) => Lid::FreeSurface,
        };
        ck.positive("layers.g", l.g)?;
        let config =
            LayerConfig::new(l.rho.clone(), l.g, lid).map_err(|e| ck.fail("layers.rho", e))?;
        let variant = file.variant.variant();
        let model = HamiltonianModel::new(&config, variant).map_err(|e| ck.fail("variant", e))?;

        let gs = file.grid;
        if !(gs.x0.is_finite() && gs.x1.is_finite() && gs.x1 > gs.x0) {
            return Err(ck.fail("grid.x1", "must exceed grid.x0"));
        }
        let grid = Grid1D::new(gs.x0, gs.x1, gs.cells).map_err(|e| ck.fail("grid.cells", e))?;

        let it = &file.integration;
        if !(it.t_end.is_finite() && it.t_end >= 0.0) {
            return Err(ck.fail("integration.t_end", "must be non-negative"));
        }
        ck.positive("integration.cfl", it.cfl)?;
        if it.stencil != 2 && it.stencil != 4 {
            return Err(ck.fail(
                "integration.stencil",
                format!("must be 2 or 4, got {}", it.stencil),
            ));
        }
        if it.fields_stride == 0 {
            return Err(ck.fail("integration.fields_stride", "must be at least 1"));
        }
        if it.allow_elliptic && !(it.viscosity > 0.0) {
            return Err(ck.fail(
                "integration.viscosity",
                "allow_elliptic needs a positive viscosity",
            ));
        }
        let boundary = match it.boundary {
            BoundaryName::FarField => Boundary::FarFieldClamp,
            BoundaryName::Periodic => Boundary::Periodic,
        };
        let disc = Discretization::new(grid, it.stencil, boundary, it.viscosity)
            .map_err(|e| ck.fail("integration.viscosity", e))?;
        let output_interval =
            it.output_interval
                .unwrap_or(if it.t_end > 0.0 { it.t_end / 10.0 } else { 1.0 });
        ck.positive("integration.output_interval", output_interval)?;

        let shock = match (file.shock.detector, file.shock.threshold) {
            (DetectorName::Off, _) => ShockDetector::Off,
            (DetectorName::DualGrid, t) => {
                let theta = t.unwrap_or(0.1);
                ck.positive("shock.threshold", theta)?;
                if grid.coarsened().is_err() {
                    return Err(ck.fail(
                        "grid.cells",
                        "the dual-grid detector needs an even cell count of at least 16",
                    ));
                }
                ShockDetector::DualGrid { theta }
            }
            (DetectorName::GradientGrowth, t) => {
                let factor = t.unwrap_or(25.0);
                if !(factor > 1.0) {
                    return Err(ck.fail("shock.threshold", "gradient growth factor must exceed 1"));
                }
                ShockDetector::GradientGrowth { factor }
            }
        };
        ck.positive("diagnostics.momentum_tau", file.diagnostics.momentum_tau)?;
        if file.diagnostics.momentum_identity && variant != Variant::RigidLid3 {
            return Err(ck.fail("diagnostics.momentum_identity", "needs variant rigid-lid-3"));
        }
        if file.diagnostics.symmetry
            && !matches!(variant, Variant::RigidLid3 | Variant::Boussinesq3)
        {
            return Err(ck.fail("diagnostics.symmetry", "needs a 3-layer rigid-lid variant"));
        }

        let a = &file.analysis;
        for (k, c) in a.imbalance_cells.iter().enumerate() {
            if Grid1D::new(gs.x0, gs.x1, *c).is_err() {
                return Err(ck.fail(
                    "analysis.imbalance_cells",
                    format!("entry {k} ({c}) is not a valid cell count"),
                ));
            }
        }
        ck.positive("analysis.fd_step", a.fd_step)?;
        if !(a.fd_steps[0] > a.fd_steps[1] && a.fd_steps[1] > 0.0) {
            return Err(ck.fail("analysis.fd_steps", "needs two decreasing positive steps"));
        }

        if let Some(exp) = &file.experiment {
            check_experiment(&ck, exp, &file, variant, &gs)?;
        }

        let options = IntegrateOptions {
            t_end: it.t_end,
            cfl: it.cfl,
            output_interval,
            shock,
            allow_elliptic: it.allow_elliptic,
            track_symmetry: file.diagnostics.symmetry,
            far_field: None,
            keep_snapshots: true,
            hyperbolicity_tol: 1e-7,
            max_steps: it.max_steps,
        };
        let mut setup = Setup {
            base_dir: base_dir.to_path_buf(),
            variant,
            config,
            model,
            disc,
            initial: Vec::new(),
            options,
            file,
        };
        setup.initial = setup.fields_on(&grid).map_err(|e| match e {
            CliError::Validation(m) => ck.fail("initial", m),
            other => other,
        })?;
        Ok(setup)
    }

    /// Samples the initial condition on `grid` and checks it.
    pub fn fields_on(&self, grid: &Grid1D) -> CliResult<Fields> {
        let f = initial::generate(self, grid)?;
        initial::check_state(self, &f)?;
        Ok(f)
    }

    /// The same scenario on a grid with `cells` cells.
    pub fn with_cells(&self, cells: usize) -> CliResult<Setup> {
        let grid = Grid1D::new(self.disc.grid.x0, self.disc.grid.x1, cells)
            .map_err(|e| CliError::Validation(format!("grid.cells: {e}")))?;
        let mut s = self.clone();
        s.disc.grid = grid;
        s.file.grid.cells = cells;
        s.initial = s.fields_on(&grid)?;
        Ok(s)
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn field_names(&self) -> Vec<String> {
        self.model.field_names()
    }
}

fn check_experiment(
    ck: &Checker,
    exp: &ExperimentSpec,
    file: &ScenarioFile,
    variant: Variant,
    gs: &GridSpec,
) -> CliResult<()> {
    match exp {
        ExperimentSpec::MomentumScaling { eps, gap, tau, .. } => {
            if variant != Variant::RigidLid3 {
                return Err(ck.fail(
                    "experiment.kind",
                    "momentum-scaling needs variant rigid-lid-3",
                ));
            }
            if eps.len() < 2 {
                return Err(ck.fail("experiment.eps", "needs at least two gap scales"));
            }
            for e in eps {
                ck.positive("experiment.eps", *e)?;
            }
            if *gap + 1 >= file.layers.rho.len() {
                return Err(ck.fail("experiment.gap", format!("gap {gap} out of range")));
            }
            ck.positive("experiment.tau", *tau)?;
        }
        ExperimentSpec::CrossFormulation { cells, t_end, cfl } => {
            if variant != Variant::RigidLid3 {
                return Err(ck.fail(
                    "experiment.kind",
                    "cross-formulation needs variant rigid-lid-3",
                ));
            }
            if cells.is_empty() {
                return Err(ck.fail("experiment.cells", "must list at least one grid"));
            }
            for c in cells {
                if Grid1D::new(gs.x0, gs.x1, *c).is_err() {
                    return Err(
                        ck.fail("experiment.cells", format!("{c} is not a valid cell count"))
                    );
                }
            }
            ck.positive("experiment.t_end", *t_end)?;
            ck.positive("experiment.cfl", *cfl)?;
        }
        ExperimentSpec::CanonicalForm => {
            if variant != Variant::RigidLidN {
                return Err(ck.fail(
                    "experiment.kind",
                    "canonical-form needs variant rigid-lid-n",
                ));
            }
            if !matches!(file.initial, InitialSpec::GaussianBump { .. }) {
                return Err(ck.fail("initial.kind", "canonical-form needs gaussian-bump data"));
            }
        }
    }
    Ok(())
}

/// Flattens a parse of every `.toml` file in `dir`, sorted by file name.
pub fn list_dir(dir: &Path) -> CliResult<Vec<(PathBuf, CliResult<Setup>)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| {
            let s = Setup::load(&p);
            (p, s)
        })
        .collect())
}
