//! Method-of-lines integration of the canonical conservation form, run
//! diagnostics, shock detection and the momentum, symmetry and
//! flat-coordinate experiments built on top of it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::hamiltonian::{evaluate_hamiltonian, gradient_fields, HamiltonianModel, Variant};
use crate::hydrostatics::{pressure_imbalance, rigid_lid_bottom_pressure_gradient};
use crate::linalg::Matrix;
use crate::model::{
    canonical_to_primitive, primitive_to_canonical, rigid_velocities_from_shears,
    rigid_velocity_matrix, thicknesses_from_interfaces, CanonicalState, Grid1D, LayerConfig, Lid,
    PrimitiveState,
};
use crate::profiles::Bump;
use crate::quasilinear::{classify_matrix, hamiltonian_characteristic, Hyperbolicity};
use crate::stencil::{derivative, integrate as quadrature, second_derivative, Boundary};
use crate::{Error, Result};

pub type Fields = Vec<Vec<f64>>;

/// Spatial discretization shared by every right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub grid: Grid1D,
    /// Central stencil order, 2 or 4.
    pub order: usize,
    pub boundary: Boundary,
    /// Coefficient of the optional `ν·u_xx` term.
    pub viscosity: f64,
}

impl Discretization {
    pub fn new(grid: Grid1D, order: usize, boundary: Boundary, viscosity: f64) -> Result<Self> {
        if order != 2 && order != 4 {
            return Err(Error::Config(format!(
                "stencil order must be 2 or 4, got {order}"
            )));
        }
        if !(viscosity.is_finite() && viscosity >= 0.0) {
            return Err(Error::Config(format!(
                "viscosity must be finite and non-negative, got {viscosity}"
            )));
        }
        Ok(Self {
            grid,
            order,
            boundary,
            viscosity,
        })
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx()
    }

    /// Same settings on the grid with half the cells.
    pub fn coarsened(&self) -> Result<Self> {
        Ok(Self {
            grid: self.grid.coarsened()?,
            ..*self
        })
    }
}

fn check_fields(fields: &[Vec<f64>], dim: usize, m: usize) -> Result<()> {
    if fields.len() != dim {
        return Err(Error::Shape {
            expected: dim,
            found: fields.len(),
        });
    }
    if let Some(f) = fields.iter().find(|f| f.len() != m) {
        return Err(Error::Shape {
            expected: m,
            found: f.len(),
        });
    }
    Ok(())
}

fn add_viscosity(out: &mut Fields, fields: &[Vec<f64>], disc: &Discretization) {
    if disc.viscosity > 0.0 {
        for (o, f) in out.iter_mut().zip(fields) {
            let d2 = second_derivative(f, disc.dx(), disc.boundary);
            for (a, b) in o.iter_mut().zip(d2) {
                *a += disc.viscosity * b;
            }
        }
    }
}

/// `u_t = B·∂ₓ∇h(u)` (+ `ν u_xx`).
pub fn rhs(model: &HamiltonianModel, disc: &Discretization, fields: &[Vec<f64>]) -> Result<Fields> {
    check_fields(fields, model.dim(), disc.grid.m)?;
    let grad = gradient_fields(model, fields)?;
    let mut out = model
        .poisson()
        .apply(&grad, disc.dx(), disc.order, disc.boundary);
    add_viscosity(&mut out, fields, disc);
    Ok(out)
}

/// Right-hand side of the primitive rigid-lid 3-layer system in the
/// variables `(η₂, η₃, ū₂, ū₃)`, with ū₁ and η₁ recovered from the lid
/// constraints and the bottom-pressure gradient eliminated hydrostatically.
pub fn primitive_rhs3(
    config: &LayerConfig,
    disc: &Discretization,
    fields: &[Vec<f64>],
) -> Result<Fields> {
    let (rho, h) = config.rigid3()?;
    let m = disc.grid.m;
    check_fields(fields, 4, m)?;
    let (e2, e3, u2, u3) = (&fields[0], &fields[1], &fields[2], &fields[3]);
    let mut e1 = vec![0.0; m];
    let mut u1 = vec![0.0; m];
    for c in 0..m {
        e1[c] = h - e2[c] - e3[c];
        if e1[c] == 0.0 {
            return Err(Error::Singular(format!("top layer vanishes at cell {c}")));
        }
        u1[c] = -(e2[c] * u2[c] + e3[c] * u3[c]) / e1[c];
    }
    let state = PrimitiveState {
        eta: vec![e1, e2.clone(), e3.clone()],
        u: vec![u1, u2.clone(), u3.clone()],
    };
    let px =
        rigid_lid_bottom_pressure_gradient(config, &state, disc.dx(), disc.order, disc.boundary)?;
    let d = |f: &[f64]| derivative(f, disc.dx(), disc.order, disc.boundary);
    let flux = |e: &[f64], u: &[f64]| -> Vec<f64> { e.iter().zip(u).map(|(a, b)| a * b).collect() };
    let half_sq = |u: &[f64]| -> Vec<f64> { u.iter().map(|v| 0.5 * v * v).collect() };
    let g = config.g();
    let e3x = d(e3);
    let (f2, f3) = (d(&flux(e2, u2)), d(&flux(e3, u3)));
    let (k2, k3) = (d(&half_sq(u2)), d(&half_sq(u3)));
    let mut out = vec![vec![0.0; m]; 4];
    for c in 0..m {
        out[0][c] = -f2[c];
        out[1][c] = -f3[c];
        out[2][c] = -k2[c] - px[c] / rho[1] + g * (rho[2] - rho[1]) / rho[1] * e3x[c];
        out[3][c] = -k3[c] - px[c] / rho[2];
    }
    add_viscosity(&mut out, fields, disc);
    Ok(out)
}

fn axpy(y: &[Vec<f64>], a: f64, k: &[Vec<f64>]) -> Fields {
    y.iter()
        .zip(k)
        .map(|(f, g)| f.iter().zip(g).map(|(u, v)| u + a * v).collect())
        .collect()
}

/// One classic Runge–Kutta step of `y_t = f(y)`; `dt` may be negative.
pub fn rk4_step<F>(mut f: F, y: &[Vec<f64>], dt: f64) -> Result<Fields>
where
    F: FnMut(&[Vec<f64>]) -> Result<Fields>,
{
    let k1 = f(y)?;
    let k2 = f(&axpy(y, 0.5 * dt, &k1))?;
    let k3 = f(&axpy(y, 0.5 * dt, &k2))?;
    let k4 = f(&axpy(y, dt, &k3))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, yi)| {
            (0..yi.len())
                .map(|c| yi[c] + dt / 6.0 * (k1[i][c] + 2.0 * k2[i][c] + 2.0 * k3[i][c] + k4[i][c]))
                .collect()
        })
        .collect())
}

/// Pair-average restriction onto the grid with half the cells.
pub fn restrict(fields: &[Vec<f64>]) -> Fields {
    fields
        .iter()
        .map(|f| f.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect())
        .collect()
}

fn all_finite(fields: &[Vec<f64>]) -> bool {
    fields.iter().all(|f| f.iter().all(|v| v.is_finite()))
}

/// Cell-wise characteristic data of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralScan {
    pub max_speed: f64,
    /// First cell with a complex characteristic speed.
    pub elliptic_cell: Option<usize>,
}

/// Scans every cell with the Hessian stencil of the given order.
pub fn spectral_scan(
    model: &HamiltonianModel,
    fields: &[Vec<f64>],
    order: usize,
    tol: f64,
) -> Result<SpectralScan> {
    let m = fields.first().map_or(0, Vec::len);
    let mut p = vec![0.0; fields.len()];
    let mut max_speed: f64 = 0.0;
    let mut elliptic_cell = None;
    for c in 0..m {
        for (k, f) in fields.iter().enumerate() {
            p[k] = f[c];
        }
        let a = hamiltonian_characteristic(model, &p, order)?;
        let cls = classify_matrix(&a, tol)?;
        max_speed = max_speed.max(cls.max_speed());
        if elliptic_cell.is_none() && matches!(cls, Hyperbolicity::Elliptic(_)) {
            elliptic_cell = Some(c);
        }
    }
    Ok(SpectralScan {
        max_speed,
        elliptic_cell,
    })
}

/// ‖ζ₂−(h−ζ₁)‖∞ + ‖σ₂+σ₁‖∞.
pub fn symmetry_residual(h: f64, fields: &[Vec<f64>]) -> f64 {
    let m = fields[0].len();
    let (mut a, mut b) = (0.0f64, 0.0f64);
    for c in 0..m {
        a = a.max((fields[1][c] - (h - fields[0][c])).abs());
        b = b.max((fields[3][c] + fields[2][c]).abs());
    }
    a + b
}

/// Lifts reduced symmetric data `(ζ, σ)`, the lower interface and its
/// shear, to `(h−ζ, ζ, −σ, σ)`.
pub fn symmetric_lift(h: f64, zeta: &[f64], sigma: &[f64]) -> Fields {
    vec![
        zeta.iter().map(|z| h - z).collect(),
        zeta.to_vec(),
        sigma.iter().map(|s| -s).collect(),
        sigma.to_vec(),
    ]
}

/// Horizontal momentum density `Σρᵢηᵢūᵢ` (rigid lid) or `Σηᵢμᵢ` (free
/// surface); `None` for Boussinesq and reduced models.
pub fn momentum_density(model: &HamiltonianModel, fields: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
    let m = fields.first().map_or(0, Vec::len);
    let rigid = |rho: &[f64], h: f64| -> Result<Vec<f64>> {
        let k = rho.len() - 1;
        let mut z = vec![0.0; k];
        let mut s = vec![0.0; k];
        (0..m)
            .map(|c| {
                for j in 0..k {
                    z[j] = fields[j][c];
                    s[j] = fields[k + j][c];
                }
                let u = rigid_velocities_from_shears(rho, h, &z, &s)?;
                let eta = thicknesses_from_interfaces(h, &z);
                Ok((0..rho.len()).map(|i| rho[i] * eta[i] * u[i]).sum())
            })
            .collect()
    };
    match model {
        HamiltonianModel::RigidLid3 { rho, h, .. } => rigid(rho, *h).map(Some),
        HamiltonianModel::RigidLidN { rho, h, .. } => rigid(rho, *h).map(Some),
        HamiltonianModel::FreeSurface { rho, .. } => {
            let n = rho.len();
            Ok(Some(
                (0..m)
                    .map(|c| (0..n).map(|i| fields[i][c] * fields[n + i][c]).sum())
                    .collect(),
            ))
        }
        _ => Ok(None),
    }
}

/// ∫ of [`momentum_density`].
pub fn total_momentum(
    model: &HamiltonianModel,
    fields: &[Vec<f64>],
    dx: f64,
) -> Result<Option<f64>> {
    Ok(momentum_density(model, fields)?.map(|d| quadrature(&d, dx)))
}

/// One sample of the run diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRow {
    pub t: f64,
    /// H, with the far-field density subtracted when one is set.
    pub energy: f64,
    /// K = ∫ Σ qₖpₖ over the conjugate pairs.
    pub impulse: f64,
    /// ∫ of each position field (ζⱼ or ηⱼ).
    pub position: Vec<f64>,
    /// ∫ of each momentum field (σⱼ or μⱼ).
    pub shear: Vec<f64>,
    pub momentum: Option<f64>,
    /// max |∂ₓ| over the position fields.
    pub max_gradient: f64,
    /// `max_gradient` over its initial value.
    pub gradient_growth: f64,
    /// Fine/coarse gradient-energy ratio of the dual-grid detector.
    pub grid_ratio: Option<f64>,
    pub hyperbolic: bool,
    pub symmetry_residual: Option<f64>,
}

fn gradient_stats(fields: &[Vec<f64>], disc: &Discretization) -> (f64, f64) {
    let k = fields.len() / 2;
    let mut max: f64 = 0.0;
    let mut energy = 0.0;
    for f in &fields[..k] {
        let d = derivative(f, disc.dx(), 2, disc.boundary);
        for v in &d {
            max = max.max(v.abs());
        }
        energy += d.iter().map(|v| v * v).sum::<f64>() * disc.dx();
    }
    (max, energy)
}

/// Shock criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShockDetector {
    Off,
    /// A companion run at half resolution; shock when the fine and coarse
    /// gradient energies differ by more than the relative `theta`.
    DualGrid {
        theta: f64,
    },
    /// Shock when max |∂ₓζ| exceeds `factor` times its initial value.
    GradientGrowth {
        factor: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub t_end: f64,
    pub cfl: f64,
    pub output_interval: f64,
    pub shock: ShockDetector,
    /// Permit elliptic states; needs positive viscosity.
    pub allow_elliptic: bool,
    pub track_symmetry: bool,
    /// Point state subtracted in the energy; defaults to the first cell under
    /// `FarFieldClamp`.
    pub far_field: Option<Vec<f64>>,
    pub keep_snapshots: bool,
    /// Reality tolerance for the per-step spectrum check.
    pub hyperbolicity_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            cfl: 0.4,
            output_interval: 0.1,
            shock: ShockDetector::DualGrid { theta: 0.1 },
            allow_elliptic: false,
            track_symmetry: false,
            far_field: None,
            keep_snapshots: true,
            hyperbolicity_tol: 1e-7,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    Shock { t: f64 },
    HyperbolicityLoss { t: f64, cell: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub fields: Fields,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub snapshots: Vec<Snapshot>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub event: Option<Event>,
    pub final_time: f64,
    pub final_state: Fields,
    pub steps: usize,
}

impl RunResult {
    /// max |q(t) − q(0)| / |q(0)| over the diagnostics.
    pub fn drift<F: Fn(&DiagnosticRow) -> f64>(&self, q: F) -> f64 {
        let Some(first) = self.diagnostics.first() else {
            return 0.0;
        };
        let q0 = q(first);
        let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
        self.diagnostics
            .iter()
            .map(|r| (q(r) - q0).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn shock_time(&self) -> Option<f64> {
        match self.event {
            Some(Event::Shock { t }) => Some(t),
            _ => None,
        }
    }
}

struct Recorder<'a> {
    model: &'a HamiltonianModel,
    disc: &'a Discretization,
    far_field: Option<Vec<f64>>,
    h: Option<f64>,
    g0: f64,
}

impl Recorder<'_> {
    fn row(
        &self,
        t: f64,
        y: &[Vec<f64>],
        ratio: Option<f64>,
        hyperbolic: bool,
    ) -> Result<DiagnosticRow> {
        let dx = self.disc.dx();
        let k = y.len() / 2;
        let energy = evaluate_hamiltonian(self.model, y, dx, self.far_field.as_deref())?;
        let impulse = (0..k)
            .map(|j| y[j].iter().zip(&y[k + j]).map(|(a, b)| a * b).sum::<f64>())
            .sum::<f64>()
            * dx;
        let (max_gradient, _) = gradient_stats(y, self.disc);
        Ok(DiagnosticRow {
            t,
            energy,
            impulse,
            position: y[..k].iter().map(|f| quadrature(f, dx)).collect(),
            shear: y[k..].iter().map(|f| quadrature(f, dx)).collect(),
            momentum: total_momentum(self.model, y, dx)?,
            max_gradient,
            gradient_growth: if self.g0 > 0.0 {
                max_gradient / self.g0
            } else {
                0.0
            },
            grid_ratio: ratio,
            hyperbolic,
            symmetry_residual: match self.h {
                Some(h) if y.len() == 4 => Some(symmetry_residual(h, y)),
                _ => None,
            },
        })
    }
}

/// Integrates with RK4 under the CFL policy, recording diagnostics every
/// output interval and stopping at a shock or hyperbolicity loss.
pub fn integrate(
    model: &HamiltonianModel,
    disc: &Discretization,
    initial: &[Vec<f64>],
    opts: &IntegrateOptions,
) -> Result<RunResult> {
    check_fields(initial, model.dim(), disc.grid.m)?;
    if !(opts.t_end.is_finite() && opts.t_end >= 0.0) {
        return Err(Error::Config(format!(
            "t_end must be non-negative, got {}",
            opts.t_end
        )));
    }
    if !(opts.cfl > 0.0 && opts.cfl.is_finite()) {
        return Err(Error::Config(format!(
            "cfl must be positive, got {}",
            opts.cfl
        )));
    }
    if !(opts.output_interval > 0.0) {
        return Err(Error::Config("output_interval must be positive".into()));
    }
    if opts.allow_elliptic && disc.viscosity <= 0.0 {
        return Err(Error::Config(
            "integrating elliptic states requires viscosity > 0".into(),
        ));
    }
    if !all_finite(initial) {
        return Err(Error::NonFinite("initial state".into()));
    }
    let tol = opts.hyperbolicity_tol;
    let mut scan = spectral_scan(model, initial, 2, tol)?;
    if let (Some(cell), false) = (scan.elliptic_cell, opts.allow_elliptic) {
        return Err(Error::NotHyperbolic { cell });
    }
    let far_field = opts.far_field.clone().or_else(|| match disc.boundary {
        Boundary::FarFieldClamp => Some(initial.iter().map(|f| f[0]).collect()),
        Boundary::Periodic => None,
    });
    let (g0, _) = gradient_stats(initial, disc);
    let symmetric_h = if opts.track_symmetry { model.h() } else { None };
    let rec = Recorder {
        model,
        disc,
        far_field,
        h: symmetric_h,
        g0,
    };

    let coarse_disc = match opts.shock {
        ShockDetector::DualGrid { .. } => Some(disc.coarsened()?),
        _ => None,
    };
    let mut coarse = coarse_disc.as_ref().map(|_| restrict(initial));
    let ratio_of = |fine: &[Vec<f64>], coarse: &Option<Fields>| -> Option<f64> {
        let (cd, c) = (coarse_disc.as_ref()?, coarse.as_ref()?);
        let ef = gradient_stats(fine, disc).1;
        let ec = gradient_stats(c, cd).1;
        Some(if ec > 0.0 { ef / ec } else { 1.0 })
    };

    let mut y: Fields = initial.to_vec();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut event = None;
    let mut diagnostics =
        vec![rec.row(0.0, &y, ratio_of(&y, &coarse), scan.elliptic_cell.is_none())?];
    let mut snapshots = Vec::new();
    if opts.keep_snapshots {
        snapshots.push(Snapshot {
            t: 0.0,
            fields: y.clone(),
        });
    }
    let mut outputs = 1usize;
    let eps_t = 1e-12 * opts.t_end.max(1.0);

    while t < opts.t_end - eps_t {
        if steps >= opts.max_steps {
            return Err(Error::Config(format!(
                "step limit {} reached at t = {t}",
                opts.max_steps
            )));
        }
        let next_out = (outputs as f64 * opts.output_interval).min(opts.t_end);
        let mut dt = if scan.max_speed > 0.0 {
            opts.cfl * disc.dx() / scan.max_speed
        } else {
            f64::INFINITY
        };
        dt = dt.min(next_out - t).min(opts.t_end - t);
        let step = rk4_step(|u: &[Vec<f64>]| rhs(model, disc, u), &y, dt).map_err(|e| match e {
            Error::Singular(_) | Error::NonFinite(_) => Error::BlowUp { t },
            other => other,
        })?;
        if !all_finite(&step) {
            return Err(Error::BlowUp { t });
        }
        if let (Some(cd), Some(c)) = (coarse_disc.as_ref(), coarse.as_mut()) {
            let next = rk4_step(|u: &[Vec<f64>]| rhs(model, cd, u), c, dt)
                .map_err(|_| Error::BlowUp { t })?;
            if !all_finite(&next) {
                return Err(Error::BlowUp { t });
            }
            *c = next;
        }
        y = step;
        t += dt;
        steps += 1;
        scan = spectral_scan(model, &y, 2, tol)?;

        let ratio = ratio_of(&y, &coarse);
        match opts.shock {
            ShockDetector::DualGrid { theta } if ratio.is_some_and(|r| r > 1.0 + theta) => {
                event = Some(Event::Shock { t });
            }
            ShockDetector::GradientGrowth { factor }
                if gradient_stats(&y, disc).0 > factor * g0 =>
            {
                event = Some(Event::Shock { t });
            }
            _ => {}
        }
        if event.is_none() {
            if let (Some(cell), false) = (scan.elliptic_cell, opts.allow_elliptic) {
                event = Some(Event::HyperbolicityLoss { t, cell });
            }
        }
        let at_output = t >= next_out - eps_t;
        if at_output || event.is_some() {
            diagnostics.push(rec.row(t, &y, ratio, scan.elliptic_cell.is_none())?);
            if opts.keep_snapshots {
                snapshots.push(Snapshot {
                    t,
                    fields: y.clone(),
                });
            }
            if at_output {
                outputs += 1;
            }
        }
        if event.is_some() {
            break;
        }
    }
    Ok(RunResult {
        snapshots,
        diagnostics,
        event,
        final_time: t,
        final_state: y,
        steps,
    })
}

/// Plain CFL-limited RK4 evolution over a signed `duration`, without
/// diagnostics or event checks.
pub fn evolve(
    model: &HamiltonianModel,
    disc: &Discretization,
    initial: &[Vec<f64>],
    duration: f64,
    cfl: f64,
) -> Result<Fields> {
    check_fields(initial, model.dim(), disc.grid.m)?;
    let mut y: Fields = initial.to_vec();
    let total = duration.abs();
    let sign = if duration < 0.0 { -1.0 } else { 1.0 };
    let mut done = 0.0;
    while done < total * (1.0 - 1e-14) {
        let speed = spectral_scan(model, &y, 2, 1e-7)?.max_speed;
        let dt = if speed > 0.0 {
            (cfl * disc.dx() / speed).min(total - done)
        } else {
            total - done
        };
        y = rk4_step(|u: &[Vec<f64>]| rhs(model, disc, u), &y, sign * dt)?;
        if !all_finite(&y) {
            return Err(Error::BlowUp { t: sign * done });
        }
        done += dt;
    }
    Ok(y)
}

/// dΠ/dt at the initial time from the central difference of Π over
/// `[−τ, τ]`.
pub fn momentum_rate(
    model: &HamiltonianModel,
    disc: &Discretization,
    initial: &[Vec<f64>],
    tau: f64,
    cfl: f64,
) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Config("momentum window must be positive".into()));
    }
    let dx = disc.dx();
    let pi = |f: &[Vec<f64>]| -> Result<f64> {
        total_momentum(model, f, dx)?
            .ok_or_else(|| Error::Misuse("model has no momentum density".into()))
    };
    let fwd = evolve(model, disc, initial, tau, cfl)?;
    let bwd = evolve(model, disc, initial, -tau, cfl)?;
    Ok((pi(&fwd)? - pi(&bwd)?) / (2.0 * tau))
}

/// Measured momentum rate against the relation dΠ/dt = −h·P_Δ at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumIdentity {
    pub rate: f64,
    pub predicted: f64,
    pub pressure_imbalance: f64,
    pub relative_error: f64,
}

/// Which density gaps a gap scale ε multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapScaling {
    /// Every gap: ρᵢ(ε) = ρₙ − ε(ρₙ − ρᵢ).
    All,
    /// Only the gap ρ_{k+1} − ρ_k (0 = top); the other gaps are unchanged.
    Single(usize),
}

/// Densities with the selected gaps multiplied by `eps`; g and the lid are
/// unchanged.
pub fn scaled_config(config: &LayerConfig, eps: f64, scaling: GapScaling) -> Result<LayerConfig> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!(
            "gap scale must be positive, got {eps}"
        )));
    }
    let rho = config.rho();
    let n = rho.len();
    let scaled: Vec<f64> = match scaling {
        GapScaling::All => {
            let bottom = rho[n - 1];
            rho.iter().map(|r| bottom - eps * (bottom - r)).collect()
        }
        GapScaling::Single(k) => {
            if k + 1 >= n {
                return Err(Error::Domain(format!(
                    "gap {k} out of range for {n} layers"
                )));
            }
            let shift = (1.0 - eps) * (rho[k + 1] - rho[k]);
            rho.iter()
                .enumerate()
                .map(|(i, r)| if i <= k { r + shift } else { *r })
                .collect()
        }
    };
    if scaled[0] <= 0.0 {
        return Err(Error::Domain(format!(
            "gap scale {eps} makes the top density non-positive"
        )));
    }
    LayerConfig::new(scaled, config.g(), config.lid())
        .map_err(|e| Error::Domain(format!("gap scale {eps}: {e}")))
}

fn at_rest(fields: &[Vec<f64>]) -> bool {
    let k = fields.len() / 2;
    fields[k..].iter().all(|f| f.iter().all(|v| *v == 0.0))
}

pub fn momentum_identity(
    config: &LayerConfig,
    disc: &Discretization,
    initial: &[Vec<f64>],
    tau: f64,
) -> Result<MomentumIdentity> {
    let model = HamiltonianModel::new(config, Variant::RigidLid3)?;
    check_fields(initial, 4, disc.grid.m)?;
    if !at_rest(initial) {
        return Err(Error::Domain(
            "momentum identity needs zero initial velocities".into(),
        ));
    }
    let h = config.require_h()?;
    let cs = CanonicalState::from_fields(initial.to_vec())?;
    let prim = canonical_to_primitive(config, &cs)?;
    let p_delta = pressure_imbalance(config, &prim, disc.dx(), disc.order, disc.boundary)?.value;
    let rate = momentum_rate(&model, disc, initial, tau, 0.4)?;
    let predicted = -h * p_delta;
    let relative_error = (rate - predicted).abs() / predicted.abs().max(f64::MIN_POSITIVE);
    Ok(MomentumIdentity {
        rate,
        predicted,
        pressure_imbalance: p_delta,
        relative_error,
    })
}

/// Momentum rates across gap scales and their log-log slope.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumScaling {
    pub eps: Vec<f64>,
    pub rates: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of log|y| against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| libm::log(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| libm::log(v.abs())).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn momentum_experiment(
    config: &LayerConfig,
    disc: &Discretization,
    initial: &[Vec<f64>],
    eps: &[f64],
    scaling: GapScaling,
    tau: f64,
) -> Result<MomentumScaling> {
    if eps.len() < 2 {
        return Err(Error::Config(
            "momentum scaling needs at least two gap scales".into(),
        ));
    }
    check_fields(initial, 4, disc.grid.m)?;
    if !at_rest(initial) {
        return Err(Error::Domain(
            "momentum scaling needs zero initial velocities".into(),
        ));
    }
    let rates = eps
        .iter()
        .map(|&e| {
            let model =
                HamiltonianModel::new(&scaled_config(config, e, scaling)?, Variant::RigidLid3)?;
            momentum_rate(&model, disc, initial, tau, 0.4)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MomentumScaling {
        eps: eps.to_vec(),
        slope: loglog_slope(eps, &rates),
        rates,
    })
}

/// Evolves symmetric initial data with the Boussinesq model and returns
/// `(t, residual)` at every output time.
pub fn symmetric_run(
    config: &LayerConfig,
    disc: &Discretization,
    initial: &[Vec<f64>],
    t_end: f64,
    output_interval: f64,
) -> Result<Vec<(f64, f64)>> {
    let model = HamiltonianModel::new(config, Variant::Boussinesq3)?;
    let h = config.require_h()?;
    check_fields(initial, 4, disc.grid.m)?;
    let r0 = symmetry_residual(h, initial);
    if r0 > 1e-12 * h {
        return Err(Error::Domain(format!(
            "initial state is off the symmetric set (residual {r0:e})"
        )));
    }
    let opts = IntegrateOptions {
        t_end,
        output_interval,
        shock: ShockDetector::Off,
        track_symmetry: true,
        keep_snapshots: false,
        ..IntegrateOptions::default()
    };
    let run = integrate(&model, disc, initial, &opts)?;
    Ok(run
        .diagnostics
        .iter()
        .map(|r| (r.t, r.symmetry_residual.unwrap_or(0.0)))
        .collect())
}

fn canonical_to_primitive_fields(config: &LayerConfig, fields: &[Vec<f64>]) -> Result<Fields> {
    let p = canonical_to_primitive(config, &CanonicalState::from_fields(fields.to_vec())?)?;
    Ok(vec![
        p.eta[1].clone(),
        p.eta[2].clone(),
        p.u[1].clone(),
        p.u[2].clone(),
    ])
}

fn primitive_to_canonical_fields(config: &LayerConfig, fields: &[Vec<f64>]) -> Result<Fields> {
    let h = config.require_h()?;
    let (e2, e3, u2, u3) = (&fields[0], &fields[1], &fields[2], &fields[3]);
    let m = e2.len();
    let e1: Vec<f64> = (0..m).map(|c| h - e2[c] - e3[c]).collect();
    let u1: Vec<f64> = (0..m)
        .map(|c| -(e2[c] * u2[c] + e3[c] * u3[c]) / e1[c])
        .collect();
    let prim = PrimitiveState {
        eta: vec![e1, e2.clone(), e3.clone()],
        u: vec![u1, u2.clone(), u3.clone()],
    };
    Ok(primitive_to_canonical(config, &prim)?.into_fields())
}

/// Evolves canonical data with the canonical and the primitive right-hand
/// sides over the same fixed steps and returns the max canonical-field gap.
pub fn cross_formulation_gap(
    config: &LayerConfig,
    disc: &Discretization,
    initial: &[Vec<f64>],
    t_end: f64,
    cfl: f64,
) -> Result<f64> {
    let model = HamiltonianModel::new(config, Variant::RigidLid3)?;
    check_fields(initial, 4, disc.grid.m)?;
    let speed = spectral_scan(&model, initial, 2, 1e-7)?
        .max_speed
        .max(1e-12);
    let steps = libm::ceil(t_end * speed / (cfl * disc.dx())).max(1.0) as usize;
    let dt = t_end / steps as f64;
    let mut a: Fields = initial.to_vec();
    let mut b = canonical_to_primitive_fields(config, initial)?;
    for _ in 0..steps {
        a = rk4_step(|u: &[Vec<f64>]| rhs(&model, disc, u), &a, dt)?;
        b = rk4_step(|u: &[Vec<f64>]| primitive_rhs3(config, disc, u), &b, dt)?;
    }
    let b = primitive_to_canonical_fields(config, &b)?;
    Ok(a.iter()
        .zip(&b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max))
}

/// Canonical state and its exact x-derivative at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: Vec<f64>,
    pub slope: Vec<f64>,
}

/// Jets of analytic bump profiles at the points `xs`, one bump per field.
pub fn bump_jets(bumps: &[Bump], xs: &[f64]) -> Vec<Jet> {
    xs.iter()
        .map(|&x| Jet {
            value: bumps.iter().map(|b| b.value(x)).collect(),
            slope: bumps.iter().map(|b| b.slope(x)).collect(),
        })
        .collect()
}

/// Canonical rates `(ζₜ, σₜ)` of a rigid-lid n-layer jet computed from the
/// primitive layer equations with the hydrostatic bottom-pressure gradient.
pub fn primitive_canonical_rates(config: &LayerConfig, jet: &Jet) -> Result<Vec<f64>> {
    let h = config.require_h()?;
    let rho = config.rho();
    let (g, n) = (config.g(), config.n());
    let k = n - 1;
    if jet.value.len() != 2 * k || jet.slope.len() != 2 * k {
        return Err(Error::Shape {
            expected: 2 * k,
            found: jet.value.len(),
        });
    }
    let (zeta, sigma) = jet.value.split_at(k);
    let (zeta_x, sigma_x) = jet.slope.split_at(k);
    let eta = thicknesses_from_interfaces(h, zeta);
    let eta_x = thicknesses_from_interfaces(0.0, zeta_x);
    let u = rigid_velocities_from_shears(rho, h, zeta, sigma)?;
    let mut b = sigma_x.to_vec();
    b.push(-(0..n).map(|i| eta_x[i] * u[i]).sum::<f64>());
    let u_x = rigid_velocity_matrix(rho, &eta)
        .solve(&b)
        .ok_or_else(|| Error::Singular("velocity-slope recovery".into()))?;
    let mut flux2_x = 0.0;
    let mut buoy = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        flux2_x += eta_x[i] * u[i] * u[i] + 2.0 * eta[i] * u[i] * u_x[i];
        den += eta[i] / rho[i];
        for j in i + 1..n {
            buoy += (rho[j] - rho[i]) / rho[i] * eta_x[j] * eta[i];
        }
    }
    let p0x = (-flux2_x + g * buoy) / den;
    let eta_t: Vec<f64> = (0..n)
        .map(|i| -(eta_x[i] * u[i] + eta[i] * u_x[i]))
        .collect();
    let u_t: Vec<f64> = (0..n)
        .map(|i| {
            let b: f64 = (i + 1..n)
                .map(|j| (rho[j] - rho[i]) / rho[i] * eta_x[j])
                .sum();
            -u[i] * u_x[i] - p0x / rho[i] + g * b
        })
        .collect();
    let mut out = vec![0.0; 2 * k];
    for j in 0..k {
        out[j] = eta_t[j + 1..].iter().sum();
        out[k + j] = rho[j + 1] * u_t[j + 1] - rho[j] * u_t[j];
    }
    Ok(out)
}

/// Rates `(ηₜ, μₜ)` of the free-surface layer equations at a jet, with
/// `μᵢ = ρᵢūᵢ`.
pub fn free_surface_layer_rates(config: &LayerConfig, jet: &Jet) -> Result<Vec<f64>> {
    if config.lid() != Lid::FreeSurface {
        return Err(Error::Misuse(
            "free-surface rates need a free surface".into(),
        ));
    }
    let rho = config.rho();
    let (g, n) = (config.g(), config.n());
    if jet.value.len() != 2 * n || jet.slope.len() != 2 * n {
        return Err(Error::Shape {
            expected: 2 * n,
            found: jet.value.len(),
        });
    }
    let (e, m) = jet.value.split_at(n);
    let (ex, mx) = jet.slope.split_at(n);
    let mut out = vec![0.0; 2 * n];
    for i in 0..n {
        out[i] = -(ex[i] * m[i] + e[i] * mx[i]) / rho[i];
        let above: f64 = (0..i).map(|k| rho[k] * ex[k]).sum();
        let below: f64 = ex[i..].iter().sum();
        out[n + i] = -m[i] * mx[i] / rho[i] - g * (above + rho[i] * below);
    }
    Ok(out)
}

/// Rates `B·Hess(h)·w_x` of a Hamiltonian model at a jet.
pub fn hamiltonian_rates(model: &HamiltonianModel, jet: &Jet) -> Result<Vec<f64>> {
    let hess = model.hessian(&jet.value, 4)?;
    let b: Matrix = model.poisson().b;
    Ok(b.mul_vec(&hess.mul_vec(&jet.slope)))
}

fn relative_sup(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        for (p, q) in x.iter().zip(y) {
            diff = diff.max((p - q).abs());
            scale = scale.max(p.abs());
        }
    }
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Sup-norm gap, relative to the largest primitive rate, between the
/// primitive rates and the canonical flow of the numerically eliminated
/// n-layer Hamiltonian density.
pub fn conjecture_residual(config: &LayerConfig, jets: &[Jet]) -> Result<f64> {
    let model = HamiltonianModel::new(config, Variant::RigidLidN)?;
    let prim = jets
        .iter()
        .map(|j| primitive_canonical_rates(config, j))
        .collect::<Result<Vec<_>>>()?;
    let ham = jets
        .iter()
        .map(|j| hamiltonian_rates(&model, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(relative_sup(&prim, &ham))
}

/// Gap between the generic n-layer canonical rates and the closed-form
/// 3-layer ones.
pub fn regression_residual_n3(config: &LayerConfig, jets: &[Jet]) -> Result<f64> {
    let generic = HamiltonianModel::new(config, Variant::RigidLidN)?;
    let closed = HamiltonianModel::new(config, Variant::RigidLid3)?;
    let a = jets
        .iter()
        .map(|j| hamiltonian_rates(&closed, j))
        .collect::<Result<Vec<_>>>()?;
    let b = jets
        .iter()
        .map(|j| hamiltonian_rates(&generic, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(relative_sup(&a, &b))
}
