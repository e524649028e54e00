//! Hamiltonian densities and gradients, constant Poisson operators, the
//! Boussinesq limit and the canonical involution.
//!
//! Every density here depends on the fields pointwise, so variational
//! derivatives are ordinary partial derivatives of the density.
//!
//! State ordering per model:
//! - free surface, n layers: `(η₁..ηₙ, μ₁..μₙ)` with μᵢ = ρᵢūᵢ
//! - rigid lid, 3 layers (full and Boussinesq): `(ζ₁, ζ₂, σ₁, σ₂)`
//! - rigid lid, n layers: `(ζ₁..ζ_{n−1}, σ₁..σ_{n−1})`
//! - symmetric reduction: `(ζ, σ)`

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::Matrix;
use crate::model::{
    psi, rigid_velocities_from_shears, thicknesses_from_interfaces, CanonicalState, LayerConfig,
    Lid,
};
use crate::stencil::{derivative, Boundary};
use crate::{Error, Result};

/// Model selector shared by the Hamiltonian and quasilinear layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    FreeSurface2,
    FreeSurface3,
    FreeSurfaceN,
    RigidLid3,
    RigidLidN,
    Boussinesq3,
    Symmetric,
}

/// A Hamiltonian system with its parameters baked in.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianModel {
    FreeSurface {
        rho: Vec<f64>,
        g: f64,
    },
    RigidLid3 {
        rho: [f64; 3],
        g: f64,
        h: f64,
    },
    RigidLidN {
        rho: Vec<f64>,
        g: f64,
        h: f64,
    },
    Boussinesq3 {
        rho: [f64; 3],
        g: f64,
        h: f64,
    },
    Symmetric {
        g: f64,
        h: f64,
        rho_bar: f64,
        rho_delta: f64,
    },
}

/// Kinetic energy density 𝒯(ζ, σ) of the rigid-lid 3-layer system.
pub fn kinetic_rigid3(rho: &[f64; 3], h: f64, p: [f64; 4]) -> f64 {
    let [r1, r2, r3] = *rho;
    let [z1, z2, s1, s2] = p;
    let num = (h - z1) * (r3 * z1 + (r2 - r3) * z2) * s1 * s1
        + 2.0 * (h - z1) * r2 * z2 * s1 * s2
        + ((r1 - r2) * z2 * z1 + r2 * z2 * h - r1 * z2 * z2) * s2 * s2;
    num / (2.0 * psi(rho, h, z1, z2))
}

/// Kinetic energy density in the Boussinesq limit, mean density `rho_bar`.
pub fn kinetic_boussinesq(rho_bar: f64, h: f64, p: [f64; 4]) -> f64 {
    let [z1, z2, s1, s2] = p;
    (z1 * (h - z1) * s1 * s1 + 2.0 * z2 * (h - z1) * s1 * s2 + z2 * (h - z2) * s2 * s2)
        / (2.0 * h * rho_bar)
}

/// ½g[(ρ₂−ρ₁)ζ₁² + (ρ₃−ρ₂)ζ₂²].
pub fn potential_rigid3(rho: &[f64; 3], g: f64, z1: f64, z2: f64) -> f64 {
    0.5 * g * ((rho[1] - rho[0]) * z1 * z1 + (rho[2] - rho[1]) * z2 * z2)
}

/// Closed-form gradient (δζ₁, δζ₂, δσ₁, δσ₂) of the rigid-lid 3-layer density.
pub fn gradient_rigid3(rho: &[f64; 3], g: f64, h: f64, p: [f64; 4]) -> Result<[f64; 4]> {
    let [r1, r2, r3] = *rho;
    let [z1, z2, s1, s2] = p;
    let ps = psi(rho, h, z1, z2);
    if ps == 0.0 || !ps.is_finite() {
        return Err(Error::Singular(format!("Ψ = {ps}")));
    }
    let t = kinetic_rigid3(rho, h, p);
    let gz1 = ((h * r3 - 2.0 * z1 * r3 + z2 * (r3 - r2)) * s1 * s1
        - 2.0 * z2 * r2 * s2 * s1
        - z2 * (r2 - r1) * s2 * s2)
        / (2.0 * ps)
        - r3 * (r1 - r2) * t / ps
        + g * (r2 - r1) * z1;
    let gz2 = ((h - z1) * (r2 - r3) * s1 * s1
        + 2.0 * (h - z1) * r2 * s2 * s1
        + (r2 * h + z1 * r1 - z1 * r2 - 2.0 * z2 * r1) * s2 * s2)
        / (2.0 * ps)
        - r1 * (r2 - r3) * t / ps
        + g * (r3 - r2) * z2;
    let gs1 = ((z1 * r3 + z2 * r2 - z2 * r3) * (h - z1) * s1 + r2 * z2 * (h - z1) * s2) / ps;
    let gs2 = (r2 * z2 * (h - z1) * s1 + z2 * (h * r2 + z1 * (r1 - r2) - z2 * r1) * s2) / ps;
    Ok([gz1, gz2, gs1, gs2])
}

impl HamiltonianModel {
    pub fn new(config: &LayerConfig, variant: Variant) -> Result<Self> {
        let n = config.n();
        let g = config.g();
        let free = config.lid() == Lid::FreeSurface;
        let mismatch = || {
            Err(Error::Config(format!(
                "variant {variant:?} does not fit {n} layers / {:?}",
                config.lid()
            )))
        };
        match variant {
            Variant::FreeSurface2 | Variant::FreeSurface3 | Variant::FreeSurfaceN => {
                let want = match variant {
                    Variant::FreeSurface2 => Some(2),
                    Variant::FreeSurface3 => Some(3),
                    _ => None,
                };
                if !free || want.is_some_and(|w| w != n) {
                    return mismatch();
                }
                Ok(Self::FreeSurface {
                    rho: config.rho().to_vec(),
                    g,
                })
            }
            Variant::RigidLid3 | Variant::Boussinesq3 | Variant::Symmetric => {
                let Ok((rho, h)) = config.rigid3() else {
                    return mismatch();
                };
                Ok(match variant {
                    Variant::RigidLid3 => Self::RigidLid3 { rho, g, h },
                    Variant::Boussinesq3 => Self::Boussinesq3 { rho, g, h },
                    _ => Self::Symmetric {
                        g,
                        h,
                        rho_bar: config.mean_density(),
                        rho_delta: rho[2] - rho[1],
                    },
                })
            }
            Variant::RigidLidN => {
                let Some(h) = config.h() else {
                    return mismatch();
                };
                Ok(Self::RigidLidN {
                    rho: config.rho().to_vec(),
                    g,
                    h,
                })
            }
        }
    }

    /// Number of state fields.
    pub fn dim(&self) -> usize {
        match self {
            Self::FreeSurface { rho, .. } => 2 * rho.len(),
            Self::RigidLid3 { .. } | Self::Boussinesq3 { .. } => 4,
            Self::RigidLidN { rho, .. } => 2 * (rho.len() - 1),
            Self::Symmetric { .. } => 2,
        }
    }

    /// Field names in state order.
    pub fn field_names(&self) -> Vec<alloc::string::String> {
        let half = self.dim() / 2;
        let (a, b) = match self {
            Self::FreeSurface { .. } => ("eta", "mu"),
            Self::Symmetric { .. } => return vec!["zeta".into(), "sigma".into()],
            _ => ("zeta", "sigma"),
        };
        (1..=half)
            .map(|i| format!("{a}{i}"))
            .chain((1..=half).map(|i| format!("{b}{i}")))
            .collect()
    }

    /// Channel height, if the model has a lid.
    pub fn h(&self) -> Option<f64> {
        match self {
            Self::FreeSurface { .. } => None,
            Self::RigidLid3 { h, .. }
            | Self::RigidLidN { h, .. }
            | Self::Boussinesq3 { h, .. }
            | Self::Symmetric { h, .. } => Some(*h),
        }
    }

    /// Energy density at one point.
    pub fn density(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p)?;
        match self {
            Self::FreeSurface { rho, g } => {
                let n = rho.len();
                let (eta, mu) = p.split_at(n);
                let mut e = 0.0;
                for i in 0..n {
                    e += 0.5 * eta[i] / rho[i] * mu[i] * mu[i];
                    for j in 0..n {
                        e += 0.5 * g * rho[i.min(j)] * eta[i] * eta[j];
                    }
                }
                Ok(e)
            }
            Self::RigidLid3 { rho, g, h } => {
                let q = [p[0], p[1], p[2], p[3]];
                let ps = psi(rho, *h, q[0], q[1]);
                if ps == 0.0 {
                    return Err(Error::Singular("Ψ = 0".into()));
                }
                Ok(kinetic_rigid3(rho, *h, q) + potential_rigid3(rho, *g, q[0], q[1]))
            }
            Self::Boussinesq3 { rho, g, h } => {
                let q = [p[0], p[1], p[2], p[3]];
                let rb = (rho[0] + rho[1] + rho[2]) / 3.0;
                Ok(kinetic_boussinesq(rb, *h, q) + potential_rigid3(rho, *g, q[0], q[1]))
            }
            Self::RigidLidN { rho, g, h } => {
                let k = rho.len() - 1;
                let (zeta, sigma) = p.split_at(k);
                let u = rigid_velocities_from_shears(rho, *h, zeta, sigma)?;
                let eta = thicknesses_from_interfaces(*h, zeta);
                let t: f64 = (0..rho.len())
                    .map(|i| 0.5 * rho[i] * eta[i] * u[i] * u[i])
                    .sum();
                let v: f64 = (0..k)
                    .map(|i| 0.5 * g * (rho[i + 1] - rho[i]) * zeta[i] * zeta[i])
                    .sum();
                Ok(t + v)
            }
            Self::Symmetric {
                g,
                h,
                rho_bar,
                rho_delta,
            } => {
                let (z, s) = (p[0], p[1]);
                let d = z - h / 2.0;
                Ok(z * (h - 2.0 * z) * s * s / (2.0 * rho_bar * h) + 0.5 * g * rho_delta * d * d)
            }
        }
    }

    /// Gradient at one point: closed form where available, otherwise a
    /// fourth-order central difference.
    pub fn gradient_point(&self, p: &[f64]) -> Result<Vec<f64>> {
        match self.gradient_closed(p) {
            Some(g) => g,
            None => gradient_fd_point(self, p, 1e-4, 4),
        }
    }

    /// Closed-form gradient, `None` for models without one.
    pub fn gradient_closed(&self, p: &[f64]) -> Option<Result<Vec<f64>>> {
        if let Err(e) = self.check_dim(p) {
            return Some(Err(e));
        }
        match self {
            Self::FreeSurface { rho, g } => {
                let n = rho.len();
                let (eta, mu) = p.split_at(n);
                let mut out = vec![0.0; 2 * n];
                for i in 0..n {
                    out[i] = 0.5 * mu[i] * mu[i] / rho[i]
                        + g * (0..n).map(|j| rho[i.min(j)] * eta[j]).sum::<f64>();
                    out[n + i] = eta[i] * mu[i] / rho[i];
                }
                Some(Ok(out))
            }
            Self::RigidLid3 { rho, g, h } => {
                Some(gradient_rigid3(rho, *g, *h, [p[0], p[1], p[2], p[3]]).map(|a| a.to_vec()))
            }
            Self::Boussinesq3 { rho, g, h } => {
                let [z1, z2, s1, s2] = [p[0], p[1], p[2], p[3]];
                let rb = (rho[0] + rho[1] + rho[2]) / 3.0;
                let c = 1.0 / (h * rb);
                Some(Ok(vec![
                    0.5 * c * ((h - 2.0 * z1) * s1 * s1 - 2.0 * z2 * s1 * s2)
                        + g * (rho[1] - rho[0]) * z1,
                    0.5 * c * (2.0 * (h - z1) * s1 * s2 + (h - 2.0 * z2) * s2 * s2)
                        + g * (rho[2] - rho[1]) * z2,
                    c * (z1 * (h - z1) * s1 + z2 * (h - z1) * s2),
                    c * (z2 * (h - z1) * s1 + z2 * (h - z2) * s2),
                ]))
            }
            Self::Symmetric {
                g,
                h,
                rho_bar,
                rho_delta,
            } => {
                let (z, s) = (p[0], p[1]);
                Some(Ok(vec![
                    (h - 4.0 * z) * s * s / (2.0 * rho_bar * h) + g * rho_delta * (z - h / 2.0),
                    z * (h - 2.0 * z) * s / (rho_bar * h),
                ]))
            }
            Self::RigidLidN { .. } => None,
        }
    }

    /// Hessian of the density at one point by central differences of
    /// [`HamiltonianModel::gradient_point`]; `order` 2 (step 1e−6) or 4
    /// (step 1e−3), relative to `1 + |field|`.
    pub fn hessian(&self, p: &[f64], order: usize) -> Result<Matrix> {
        let n = self.dim();
        let mut hm = Matrix::zeros(n);
        let mut q = p.to_vec();
        let fourth = order >= 4;
        for l in 0..n {
            let d = if fourth { 1e-3 } else { 1e-6 } * (1.0 + p[l].abs());
            let mut at = |s: f64| -> Result<Vec<f64>> {
                q[l] = p[l] + s * d;
                let g = self.gradient_point(&q);
                q[l] = p[l];
                g
            };
            let col: Vec<f64> = if fourth {
                let (a, b, c, e) = (at(2.0)?, at(1.0)?, at(-1.0)?, at(-2.0)?);
                (0..n)
                    .map(|i| (-a[i] + 8.0 * b[i] - 8.0 * c[i] + e[i]) / (12.0 * d))
                    .collect()
            } else {
                let (a, b) = (at(1.0)?, at(-1.0)?);
                (0..n).map(|i| (a[i] - b[i]) / (2.0 * d)).collect()
            };
            for i in 0..n {
                hm[(i, l)] = col[i];
            }
        }
        Ok(hm)
    }

    /// The model's constant Poisson matrix `B` (operator `B·∂ₓ`).
    pub fn poisson(&self) -> PoissonOperator {
        PoissonOperator::canonical(self.dim() / 2)
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                found: p.len(),
            });
        }
        Ok(())
    }
}

fn point(fields: &[Vec<f64>], c: usize, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend(fields.iter().map(|f| f[c]));
}

fn cells(model: &HamiltonianModel, fields: &[Vec<f64>]) -> Result<usize> {
    if fields.len() != model.dim() {
        return Err(Error::Shape {
            expected: model.dim(),
            found: fields.len(),
        });
    }
    let m = fields[0].len();
    for f in fields {
        if f.len() != m {
            return Err(Error::Shape {
                expected: m,
                found: f.len(),
            });
        }
    }
    Ok(m)
}

/// Energy density at every cell.
pub fn density_field(model: &HamiltonianModel, fields: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = cells(model, fields)?;
    let mut buf = Vec::with_capacity(fields.len());
    (0..m)
        .map(|c| {
            point(fields, c, &mut buf);
            model.density(&buf)
        })
        .collect()
}

/// Midpoint-rule integral of the density; with `far_field` the far-field
/// density is subtracted cell-wise first.
pub fn evaluate_hamiltonian(
    model: &HamiltonianModel,
    fields: &[Vec<f64>],
    dx: f64,
    far_field: Option<&[f64]>,
) -> Result<f64> {
    let dens = density_field(model, fields)?;
    let base = match far_field {
        Some(p) => model.density(p)?,
        None => 0.0,
    };
    Ok(dens.iter().map(|d| d - base).sum::<f64>() * dx)
}

/// Closed-form gradient fields.
pub fn gradient_analytic(model: &HamiltonianModel, fields: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = cells(model, fields)?;
    let n = model.dim();
    let mut out = vec![vec![0.0; m]; n];
    let mut buf = Vec::with_capacity(n);
    for c in 0..m {
        point(fields, c, &mut buf);
        let g = model
            .gradient_closed(&buf)
            .ok_or_else(|| Error::Misuse("no closed-form gradient for this model".into()))??;
        for k in 0..n {
            out[k][c] = g[k];
        }
    }
    Ok(out)
}

/// Gradient fields from the model's best pointwise gradient.
pub fn gradient_fields(model: &HamiltonianModel, fields: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let m = cells(model, fields)?;
    let n = model.dim();
    let mut out = vec![vec![0.0; m]; n];
    let mut buf = Vec::with_capacity(n);
    for c in 0..m {
        point(fields, c, &mut buf);
        let g = model.gradient_point(&buf)?;
        for k in 0..n {
            out[k][c] = g[k];
        }
    }
    Ok(out)
}

/// Central-difference gradient of the density at one point with step
/// `delta·(1 + |field|)`; `order` 2 or 4.
pub fn gradient_fd_point(
    model: &HamiltonianModel,
    p: &[f64],
    delta: f64,
    order: usize,
) -> Result<Vec<f64>> {
    let n = p.len();
    let mut q = p.to_vec();
    let mut out = vec![0.0; n];
    for k in 0..n {
        let d = delta * (1.0 + p[k].abs());
        let mut f = |s: f64| -> Result<f64> {
            q[k] = p[k] + s * d;
            let v = model.density(&q);
            q[k] = p[k];
            v
        };
        out[k] = if order >= 4 {
            (-f(2.0)? + 8.0 * f(1.0)? - 8.0 * f(-1.0)? + f(-2.0)?) / (12.0 * d)
        } else {
            (f(1.0)? - f(-1.0)?) / (2.0 * d)
        };
    }
    Ok(out)
}

/// Second-order central-difference gradient fields, step `delta·(1+|field|)`.
pub fn gradient_fd(
    model: &HamiltonianModel,
    fields: &[Vec<f64>],
    delta: f64,
) -> Result<Vec<Vec<f64>>> {
    let m = cells(model, fields)?;
    let n = model.dim();
    let mut out = vec![vec![0.0; m]; n];
    let mut buf = Vec::with_capacity(n);
    for c in 0..m {
        point(fields, c, &mut buf);
        let g = gradient_fd_point(model, &buf, delta, 2)?;
        for k in 0..n {
            out[k][c] = g[k];
        }
    }
    Ok(out)
}

/// Constant-coefficient Poisson operator `w ↦ B·∂ₓw`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonOperator {
    pub b: Matrix,
}

/// Named operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoissonKind {
    /// Free surface with n layers, `(η, μ)` ordering.
    FreeSurface(usize),
    /// Reduced tensor in flat coordinates `(ξ₁, ξ₂, τ₁, τ₂)`.
    Flat3([f64; 3]),
    /// Canonical rigid-lid 3-layer form in `(ζ, σ)`.
    Canonical3,
    /// Symmetric 2-field reduction.
    Symmetric,
}

impl PoissonOperator {
    /// −[[0, I], [I, 0]] with `k` conjugate pairs.
    pub fn canonical(k: usize) -> Self {
        let b = Matrix::from_fn(2 * k, |i, j| {
            if (i + k == j) || (j + k == i) {
                -1.0
            } else {
                0.0
            }
        });
        Self { b }
    }

    pub fn new(kind: PoissonKind) -> Self {
        match kind {
            PoissonKind::FreeSurface(n) => Self::canonical(n),
            PoissonKind::Canonical3 => Self::canonical(2),
            PoissonKind::Symmetric => Self::canonical(1),
            PoissonKind::Flat3(rho) => {
                let a = rho[0] - rho[2];
                let b = rho[1] - rho[2];
                Self {
                    b: Matrix::from_rows([
                        [0.0, 0.0, a, b],
                        [0.0, 0.0, 0.0, 0.5 * b],
                        [a, 0.0, 0.0, 0.0],
                        [b, 0.5 * b, 0.0, 0.0],
                    ]),
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    /// `B·∂ₓ(w)` with the given stencil.
    pub fn apply(
        &self,
        w: &[Vec<f64>],
        dx: f64,
        order: usize,
        boundary: Boundary,
    ) -> Vec<Vec<f64>> {
        let n = self.dim();
        let dw: Vec<Vec<f64>> = w
            .iter()
            .map(|f| derivative(f, dx, order, boundary))
            .collect();
        let m = w.first().map_or(0, Vec::len);
        (0..n)
            .map(|i| {
                (0..m)
                    .map(|c| (0..n).map(|j| self.b[(i, j)] * dw[j][c]).sum())
                    .collect()
            })
            .collect()
    }
}

/// max |M·B_flat·Mᵀ − B_canonical| with M = ∂(ζ, σ)/∂(ξ, τ).
pub fn congruence_residual(rho: &[f64; 3]) -> Result<f64> {
    let m = crate::model::canonical_jacobian(rho)?;
    let pred = PoissonOperator::new(PoissonKind::Flat3(*rho)).b;
    let preta = PoissonOperator::new(PoissonKind::Canonical3).b;
    Ok(m.mul(&pred).mul(&m.transpose()).sub(&preta).max_abs())
}

/// Relative L² deviation between the full kinetic density at densities
/// ρᵢ(ε) = ρ̄(1 + ε δᵢ) and the Boussinesq kinetic density, where δᵢ is
/// fixed so that ε = 1 recovers `config`.
pub fn boussinesq_limit_check(
    config: &LayerConfig,
    state: &CanonicalState,
    eps: f64,
) -> Result<f64> {
    let (rho, h) = config.rigid3()?;
    let rb = config.mean_density();
    let delta: Vec<f64> = rho.iter().map(|r| r / rb - 1.0).collect();
    let dmax = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    if !(eps > 0.0 && eps < 1.0 / dmax) {
        return Err(Error::Domain(format!(
            "ε = {eps} outside (0, {})",
            1.0 / dmax
        )));
    }
    let re = [
        rb * (1.0 + eps * delta[0]),
        rb * (1.0 + eps * delta[1]),
        rb * (1.0 + eps * delta[2]),
    ];
    let (mut num, mut den) = (0.0, 0.0);
    for c in 0..state.cells() {
        let p = state.point(c);
        let tb = kinetic_boussinesq(rb, h, p);
        let tf = kinetic_rigid3(&re, h, p);
        num += (tf - tb) * (tf - tb);
        den += tb * tb;
    }
    if den == 0.0 {
        return Err(Error::Domain(
            "Boussinesq kinetic density vanishes identically".into(),
        ));
    }
    Ok(libm::sqrt(num / den))
}

/// (ζ₁, ζ₂, σ₁, σ₂) ↦ (h−ζ₂, h−ζ₁, −σ₂, −σ₁).
pub fn involution(config: &LayerConfig, state: &CanonicalState) -> Result<CanonicalState> {
    let (_, h) = config.rigid3()?;
    CanonicalState::new(
        state.zeta2.iter().map(|z| h - z).collect(),
        state.zeta1.iter().map(|z| h - z).collect(),
        state.sigma2.iter().map(|s| -s).collect(),
        state.sigma1.iter().map(|s| -s).collect(),
    )
}

/// Jacobian of [`involution`].
pub fn involution_jacobian() -> Matrix {
    Matrix::from_rows([
        [0.0, -1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, -1.0, 0.0],
    ])
}
