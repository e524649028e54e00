//! Layer configurations, grids, state containers and the coordinate maps
//! between primitive `(η, ū)`, canonical `(ζ, σ)` and flat `(ξ, τ)` fields.
//!
//! Layers are numbered from the top: index 0 in every slice is layer 1.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Upper boundary condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lid {
    FreeSurface,
    /// Rigid lid at channel height `h`.
    RigidLid {
        h: f64,
    },
}

/// Densities (top to bottom), gravity and lid.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerConfig {
    rho: Vec<f64>,
    g: f64,
    lid: Lid,
}

impl LayerConfig {
    pub fn new(rho: Vec<f64>, g: f64, lid: Lid) -> Result<Self> {
        if rho.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 layers, got {}",
                rho.len()
            )));
        }
        if rho.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::Config(
                "densities must be positive and finite".into(),
            ));
        }
        if rho.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "densities must increase strictly downward".into(),
            ));
        }
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::Config("gravity must be positive".into()));
        }
        if let Lid::RigidLid { h } = lid {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Config("channel height must be positive".into()));
            }
        }
        Ok(Self { rho, g, lid })
    }

    pub fn rigid(rho: Vec<f64>, g: f64, h: f64) -> Result<Self> {
        Self::new(rho, g, Lid::RigidLid { h })
    }

    pub fn free_surface(rho: Vec<f64>, g: f64) -> Result<Self> {
        Self::new(rho, g, Lid::FreeSurface)
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn lid(&self) -> Lid {
        self.lid
    }

    pub fn h(&self) -> Option<f64> {
        match self.lid {
            Lid::RigidLid { h } => Some(h),
            Lid::FreeSurface => None,
        }
    }

    pub fn require_h(&self) -> Result<f64> {
        self.h()
            .ok_or_else(|| Error::Misuse("rigid lid required".into()))
    }

    /// Densities and channel height of a rigid-lid 3-layer configuration.
    pub fn rigid3(&self) -> Result<([f64; 3], f64)> {
        let h = self.require_h()?;
        match self.rho[..] {
            [a, b, c] => Ok(([a, b, c], h)),
            _ => Err(Error::Misuse(format!(
                "3 layers required, got {}",
                self.n()
            ))),
        }
    }

    pub fn mean_density(&self) -> f64 {
        self.rho.iter().sum::<f64>() / self.n() as f64
    }
}

/// Uniform cell-centred grid on `[x0, x1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x0: f64,
    pub x1: f64,
    pub m: usize,
}

impl Grid1D {
    pub fn new(x0: f64, x1: f64, m: usize) -> Result<Self> {
        if m < 8 {
            return Err(Error::Config(format!(
                "grid needs at least 8 cells, got {m}"
            )));
        }
        if !(x0.is_finite() && x1.is_finite() && x1 > x0) {
            return Err(Error::Config("grid endpoints must satisfy x0 < x1".into()));
        }
        Ok(Self { x0, x1, m })
    }

    pub fn dx(&self) -> f64 {
        (self.x1 - self.x0) / self.m as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.x(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.x1 - self.x0
    }

    /// The grid with every other cell, same endpoints.
    pub fn coarsened(&self) -> Result<Self> {
        if self.m % 2 != 0 {
            return Err(Error::Config("coarsening needs an even cell count".into()));
        }
        Self::new(self.x0, self.x1, self.m / 2)
    }
}

/// Layer thicknesses and layer-mean velocities, one field per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveState {
    pub eta: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
}

impl PrimitiveState {
    pub fn cells(&self) -> usize {
        self.eta.first().map_or(0, Vec::len)
    }

    fn check_shape(&self, n: usize) -> Result<usize> {
        if self.eta.len() != n || self.u.len() != n {
            return Err(Error::Shape {
                expected: n,
                found: self.eta.len().min(self.u.len()),
            });
        }
        let m = self.cells();
        for f in self.eta.iter().chain(self.u.iter()) {
            if f.len() != m {
                return Err(Error::Shape {
                    expected: m,
                    found: f.len(),
                });
            }
        }
        Ok(m)
    }

    /// Interface elevations ζ_1..ζ_{n-1} (ζ_i = Σ_{k>i} η_k).
    pub fn interfaces(&self) -> Vec<Vec<f64>> {
        let n = self.eta.len();
        (1..n)
            .map(|i| {
                (0..self.cells())
                    .map(|c| self.eta[i..].iter().map(|f| f[c]).sum())
                    .collect()
            })
            .collect()
    }
}

/// Rigid-lid 3-layer canonical fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalState {
    pub zeta1: Vec<f64>,
    pub zeta2: Vec<f64>,
    pub sigma1: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl CanonicalState {
    pub fn new(
        zeta1: Vec<f64>,
        zeta2: Vec<f64>,
        sigma1: Vec<f64>,
        sigma2: Vec<f64>,
    ) -> Result<Self> {
        let m = zeta1.len();
        for f in [&zeta2, &sigma1, &sigma2] {
            if f.len() != m {
                return Err(Error::Shape {
                    expected: m,
                    found: f.len(),
                });
            }
        }
        Ok(Self {
            zeta1,
            zeta2,
            sigma1,
            sigma2,
        })
    }

    pub fn from_fields(mut fields: Vec<Vec<f64>>) -> Result<Self> {
        if fields.len() != 4 {
            return Err(Error::Shape {
                expected: 4,
                found: fields.len(),
            });
        }
        let s2 = fields.pop().unwrap_or_default();
        let s1 = fields.pop().unwrap_or_default();
        let z2 = fields.pop().unwrap_or_default();
        let z1 = fields.pop().unwrap_or_default();
        Self::new(z1, z2, s1, s2)
    }

    pub fn into_fields(self) -> Vec<Vec<f64>> {
        vec![self.zeta1, self.zeta2, self.sigma1, self.sigma2]
    }

    pub fn cells(&self) -> usize {
        self.zeta1.len()
    }

    pub fn point(&self, c: usize) -> [f64; 4] {
        [self.zeta1[c], self.zeta2[c], self.sigma1[c], self.sigma2[c]]
    }

    /// Checks 0 < ζ₂ < ζ₁ < h everywhere.
    pub fn check_ordering(&self, h: f64) -> Result<()> {
        for c in 0..self.cells() {
            let (z1, z2) = (self.zeta1[c], self.zeta2[c]);
            if !(0.0 < z2 && z2 < z1 && z1 < h) {
                return Err(Error::Domain(format!(
                    "interfaces out of order at cell {c}: ζ1={z1}, ζ2={z2}"
                )));
            }
        }
        Ok(())
    }
}

/// Flat coordinates of the reduced Poisson tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatState {
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub tau1: Vec<f64>,
    pub tau2: Vec<f64>,
}

/// One failed check reported by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Positivity {
        layer: usize,
        cell: usize,
        value: f64,
    },
    Geometric {
        cell: usize,
        total: f64,
    },
    Dynamical {
        cell: usize,
        flux: f64,
    },
}

/// Constraint check. `tol` is relative: positivity and the geometric
/// constraint use `tol·h` (or `tol·max η` without a lid), the flux
/// constraint uses `tol·max|ηᵢūᵢ|`.
pub fn validate(config: &LayerConfig, state: &PrimitiveState, tol: f64) -> Result<Vec<Violation>> {
    let m = state.check_shape(config.n())?;
    let mut out = Vec::new();
    let scale = match config.h() {
        Some(h) => h,
        None => state
            .eta
            .iter()
            .flatten()
            .fold(0.0, |a, b| f64::max(a, b.abs())),
    };
    for (layer, f) in state.eta.iter().enumerate() {
        for (cell, &v) in f.iter().enumerate() {
            if !(v > tol * scale) {
                out.push(Violation::Positivity {
                    layer,
                    cell,
                    value: v,
                });
            }
        }
    }
    if let Some(h) = config.h() {
        let mut flux_scale = 0.0f64;
        for c in 0..m {
            for i in 0..config.n() {
                flux_scale = flux_scale.max((state.eta[i][c] * state.u[i][c]).abs());
            }
        }
        for c in 0..m {
            let total: f64 = state.eta.iter().map(|f| f[c]).sum();
            if !((total - h).abs() <= tol * h) {
                out.push(Violation::Geometric { cell: c, total });
            }
            let flux: f64 = (0..config.n())
                .map(|i| state.eta[i][c] * state.u[i][c])
                .sum();
            if !(flux.abs() <= tol * flux_scale) {
                out.push(Violation::Dynamical { cell: c, flux });
            }
        }
    }
    Ok(out)
}

/// Top-layer velocity from the zero-flux constraint.
pub fn close_velocity_top(zeta1: f64, zeta2: f64, u2: f64, u3: f64, h: f64) -> Result<f64> {
    let d = zeta1 - h;
    if d == 0.0 {
        return Err(Error::Singular("vanishing top layer (ζ1 = h)".into()));
    }
    Ok(((zeta1 - zeta2) * u2 + zeta2 * u3) / d)
}

/// Field version of [`close_velocity_top`].
pub fn close_velocity_top_fields(
    zeta1: &[f64],
    zeta2: &[f64],
    u2: &[f64],
    u3: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    (0..zeta1.len())
        .map(|c| close_velocity_top(zeta1[c], zeta2[c], u2[c], u3[c], h))
        .collect()
}

/// Ψ = hρ₂ρ₃ − ρ₃(ρ₂−ρ₁)ζ₁ − ρ₁(ρ₃−ρ₂)ζ₂.
pub fn psi(rho: &[f64; 3], h: f64, zeta1: f64, zeta2: f64) -> f64 {
    let [r1, r2, r3] = *rho;
    h * r2 * r3 - r3 * (r2 - r1) * zeta1 - r1 * (r3 - r2) * zeta2
}

/// Layer velocities (ū₁, ū₂, ū₃) from canonical point values.
pub fn velocities_from_shears(rho: &[f64; 3], h: f64, p: [f64; 4]) -> Result<[f64; 3]> {
    let [r1, r2, r3] = *rho;
    let [z1, z2, s1, s2] = p;
    let ps = psi(rho, h, z1, z2);
    if ps == 0.0 || !ps.is_finite() {
        return Err(Error::Singular(format!("Ψ = {ps}")));
    }
    let u2 = (r3 * (h - z1) * s1 - z2 * r1 * s2) / ps;
    let u3 = (r2 * (h - z1) * s1 + (h * r2 + (r1 - r2) * z1 - z2 * r1) * s2) / ps;
    let u1 = close_velocity_top(z1, z2, u2, u3, h)?;
    Ok([u1, u2, u3])
}

/// (σ₁, σ₂) = (ρ₂ū₂ − ρ₁ū₁, ρ₃ū₃ − ρ₂ū₂).
pub fn shears_from_velocities(rho: &[f64; 3], u: [f64; 3]) -> [f64; 2] {
    [rho[1] * u[1] - rho[0] * u[0], rho[2] * u[2] - rho[1] * u[1]]
}

pub fn primitive_to_canonical(
    config: &LayerConfig,
    state: &PrimitiveState,
) -> Result<CanonicalState> {
    let (rho, _h) = config.rigid3()?;
    let m = state.check_shape(3)?;
    let mut out = CanonicalState::new(vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m])?;
    for c in 0..m {
        out.zeta2[c] = state.eta[2][c];
        out.zeta1[c] = state.eta[1][c] + state.eta[2][c];
        let [s1, s2] = shears_from_velocities(&rho, [state.u[0][c], state.u[1][c], state.u[2][c]]);
        out.sigma1[c] = s1;
        out.sigma2[c] = s2;
    }
    Ok(out)
}

pub fn canonical_to_primitive(
    config: &LayerConfig,
    state: &CanonicalState,
) -> Result<PrimitiveState> {
    let (rho, h) = config.rigid3()?;
    let m = state.cells();
    let mut eta = vec![vec![0.0; m]; 3];
    let mut u = vec![vec![0.0; m]; 3];
    for c in 0..m {
        let p = state.point(c);
        eta[0][c] = h - p[0];
        eta[1][c] = p[0] - p[1];
        eta[2][c] = p[1];
        let v = velocities_from_shears(&rho, h, p)?;
        for i in 0..3 {
            u[i][c] = v[i];
        }
    }
    Ok(PrimitiveState { eta, u })
}

fn check_flat_densities(rho: &[f64; 3]) -> Result<()> {
    if rho[1] == rho[2] || rho[0] == rho[2] {
        return Err(Error::Singular(
            "degenerate densities for the flat map".into(),
        ));
    }
    Ok(())
}

/// Pointwise (ζ₁, ζ₂, σ₁, σ₂) → (ξ₁, ξ₂, τ₁, τ₂).
pub fn to_flat_point(rho: &[f64; 3], h: f64, p: [f64; 4]) -> [f64; 4] {
    let [r1, r2, r3] = *rho;
    let [z1, z2, s1, s2] = p;
    [
        (h - z2) * (r2 - r3) + (h - z1) * (r1 - r2),
        0.5 * (r2 - r3) * (z1 - z2),
        s1 + s2,
        s2,
    ]
}

/// Pointwise inverse of [`to_flat_point`].
pub fn from_flat_point(rho: &[f64; 3], h: f64, q: [f64; 4]) -> [f64; 4] {
    let [r1, r2, r3] = *rho;
    let [x1, x2, t1, t2] = q;
    let a = r1 - r3;
    [
        -x1 / a + 2.0 * x2 / a + h,
        -x1 / a - 2.0 * (r1 - r2) * x2 / ((r2 - r3) * a) + h,
        t1 - t2,
        t2,
    ]
}

pub fn canonical_to_flat(config: &LayerConfig, state: &CanonicalState) -> Result<FlatState> {
    let (rho, h) = config.rigid3()?;
    check_flat_densities(&rho)?;
    let m = state.cells();
    let mut f = [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    for c in 0..m {
        let q = to_flat_point(&rho, h, state.point(c));
        for k in 0..4 {
            f[k][c] = q[k];
        }
    }
    let [xi1, xi2, tau1, tau2] = f;
    Ok(FlatState {
        xi1,
        xi2,
        tau1,
        tau2,
    })
}

pub fn flat_to_canonical(config: &LayerConfig, state: &FlatState) -> Result<CanonicalState> {
    let (rho, h) = config.rigid3()?;
    check_flat_densities(&rho)?;
    let m = state.xi1.len();
    let mut f = [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]];
    for c in 0..m {
        let p = from_flat_point(
            &rho,
            h,
            [state.xi1[c], state.xi2[c], state.tau1[c], state.tau2[c]],
        );
        for k in 0..4 {
            f[k][c] = p[k];
        }
    }
    let [z1, z2, s1, s2] = f;
    CanonicalState::new(z1, z2, s1, s2)
}

/// Constant Jacobian ∂(ξ, τ)/∂(ζ, σ).
pub fn flat_jacobian(rho: &[f64; 3]) -> Matrix {
    let [r1, r2, r3] = *rho;
    Matrix::from_rows([
        [r2 - r1, r3 - r2, 0.0, 0.0],
        [0.5 * (r2 - r3), -0.5 * (r2 - r3), 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Constant Jacobian ∂(ζ, σ)/∂(ξ, τ).
pub fn canonical_jacobian(rho: &[f64; 3]) -> Result<Matrix> {
    check_flat_densities(rho)?;
    let [r1, r2, r3] = *rho;
    let a = r1 - r3;
    Ok(Matrix::from_rows([
        [-1.0 / a, 2.0 / a, 0.0, 0.0],
        [-1.0 / a, -2.0 * (r1 - r2) / ((r2 - r3) * a), 0.0, 0.0],
        [0.0, 0.0, 1.0, -1.0],
        [0.0, 0.0, 0.0, 1.0],
    ]))
}

/// Rigid-lid n-layer velocities from interfaces ζ₁..ζ_{n−1} and shears
/// σ_k = ρ_{k+1}ū_{k+1} − ρ_kū_k, closed by Σηᵢūᵢ = 0.
pub fn rigid_velocities_from_shears(
    rho: &[f64],
    h: f64,
    zeta: &[f64],
    sigma: &[f64],
) -> Result<Vec<f64>> {
    let n = rho.len();
    if zeta.len() != n - 1 || sigma.len() != n - 1 {
        return Err(Error::Shape {
            expected: n - 1,
            found: zeta.len().min(sigma.len()),
        });
    }
    let eta = thicknesses_from_interfaces(h, zeta);
    let mut b = sigma.to_vec();
    b.push(0.0);
    rigid_velocity_matrix(rho, &eta)
        .solve(&b)
        .ok_or_else(|| Error::Singular("velocity recovery".to_string()))
}

/// Rows `ρ_{k+1}ū_{k+1} − ρ_kū_k` for k < n−1, then `Σηᵢūᵢ`.
pub fn rigid_velocity_matrix(rho: &[f64], eta: &[f64]) -> Matrix {
    let n = rho.len();
    let mut a = Matrix::zeros(n);
    for k in 0..n - 1 {
        a[(k, k)] = -rho[k];
        a[(k, k + 1)] = rho[k + 1];
    }
    for i in 0..n {
        a[(n - 1, i)] = eta[i];
    }
    a
}

/// η₁ = h − ζ₁, ηᵢ = ζ_{i−1} − ζᵢ, ηₙ = ζ_{n−1}.
pub fn thicknesses_from_interfaces(h: f64, zeta: &[f64]) -> Vec<f64> {
    let n = zeta.len() + 1;
    (0..n)
        .map(|i| {
            let above = if i == 0 { h } else { zeta[i - 1] };
            let below = if i == n - 1 { 0.0 } else { zeta[i] };
            above - below
        })
        .collect()
}
